#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atsp/graph.hpp"
#include "atsp/instance.hpp"

namespace atsp {

// A weighted digraph read from disk or generated, plus the laminarly-weighted
// instance when the source carried one (native JSON with "laminar", gadgets).
struct InputGraph {
  Digraph g;
  EdgeValues w;
  std::optional<Instance> instance;
};

enum class InputFormat { kAuto, kTsplib, kJson };

// "tsplib" | "json" | "auto"; throws ParseError otherwise.
InputFormat parse_format(const std::string& name);

// TYPE: ATSP, EDGE_WEIGHT_TYPE: EXPLICIT, EDGE_WEIGHT_FORMAT: FULL_MATRIX.
// Weights are nonnegative 64-bit integers; the diagonal is dropped. Throws
// ParseError naming the offending line.
InputGraph parse_tsplib(std::istream& in);

// {"n": k, "edges": [{"tail", "head", "w"}, ...]} with rationals as "p/q"
// strings or integers. A "laminar" key makes it a full instance.
InputGraph parse_json_input(std::istream& in);

// kAuto picks JSON when the first non-blank character is '{'.
InputGraph read_input(std::istream& in, InputFormat format = InputFormat::kAuto);
InputGraph read_input_file(const std::string& path, InputFormat format = InputFormat::kAuto);

nlohmann::json graph_to_json(const Digraph& g, const EdgeValues& w);
nlohmann::json input_to_json(const InputGraph& in);
// Needs a simple digraph with every off-diagonal pair present and
// nonnegative integral weights; throws SolveError otherwise.
std::string write_tsplib(const Digraph& g, const EdgeValues& w, const std::string& name);

// random (complete, weights 0..20), sparse (random Hamiltonian cycle plus
// each other arc with probability 1/2, weights 0..20), node-weighted
// (w(u,v) = f(u) + f(v), f in 0..10), two-weight (weights 1 or 2), or a
// gadget name. Deterministic in (kind, n, seed); gadgets ignore n and seed.
std::vector<std::string> generator_kinds();
InputGraph generate(const std::string& kind, int n, std::uint64_t seed);

}  // namespace atsp
