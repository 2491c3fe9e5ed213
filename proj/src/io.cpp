#include "atsp/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "atsp/errors.hpp"
#include "atsp/gadgets.hpp"

namespace atsp {

InputFormat parse_format(const std::string& name) {
  if (name == "auto") return InputFormat::kAuto;
  if (name == "tsplib") return InputFormat::kTsplib;
  if (name == "json") return InputFormat::kJson;
  throw ParseError("unknown format '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

Rational json_rational(const nlohmann::json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(std::to_string(v.get<std::int64_t>()));
  throw ParseError("weight must be an integer or a \"p/q\" string");
}

}  // namespace

InputGraph parse_tsplib(std::istream& in) {
  std::string line;
  int lineno = 0;
  long dim = -1;
  bool in_section = false;
  std::vector<std::int64_t> weights;
  int last_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!in_section) {
      if (t == "EDGE_WEIGHT_SECTION") {
        if (dim < 0) fail_at(lineno, "EDGE_WEIGHT_SECTION before DIMENSION");
        in_section = true;
        continue;
      }
      if (t == "EOF") break;
      const auto colon = t.find(':');
      if (colon == std::string::npos) fail_at(lineno, "expected 'KEY: VALUE'");
      const std::string key = trim(t.substr(0, colon));
      const std::string val = trim(t.substr(colon + 1));
      if (key == "TYPE" && val != "ATSP") fail_at(lineno, "TYPE must be ATSP");
      if (key == "EDGE_WEIGHT_TYPE" && val != "EXPLICIT") fail_at(lineno, "EDGE_WEIGHT_TYPE must be EXPLICIT");
      if (key == "EDGE_WEIGHT_FORMAT" && val != "FULL_MATRIX") fail_at(lineno, "EDGE_WEIGHT_FORMAT must be FULL_MATRIX");
      if (key == "DIMENSION") {
        const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), dim);
        if (ec != std::errc() || p != val.data() + val.size() || dim < 1) fail_at(lineno, "bad DIMENSION");
      }
      continue;
    }
    if (t == "EOF") break;
    std::istringstream ls(t);
    std::string tok;
    while (ls >> tok) {
      std::int64_t v = 0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) fail_at(lineno, "bad weight '" + tok + "'");
      if (v < 0) fail_at(lineno, "negative weight");
      if (static_cast<long>(weights.size()) == dim * dim) fail_at(lineno, "more weights than DIMENSION^2");
      weights.push_back(v);
    }
    last_line = lineno;
  }
  if (!in_section) fail_at(lineno, "missing EDGE_WEIGHT_SECTION");
  if (static_cast<long>(weights.size()) != dim * dim) {
    fail_at(last_line, "matrix has " + std::to_string(weights.size()) + " entries, DIMENSION " +
                           std::to_string(dim) + " needs " + std::to_string(dim * dim));
  }
  InputGraph out;
  const int n = static_cast<int>(dim);
  out.g = Digraph(n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      out.g.add_edge(u, v);
      out.w.push_back(Rational(std::to_string(weights[static_cast<std::size_t>(u) * n + v])));
    }
  }
  return out;
}

InputGraph parse_json_input(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
  InputGraph out;
  try {
    if (j.contains("laminar")) {
      out.instance = instance_from_json(j);
      out.g = out.instance->graph();
      out.w = out.instance->weights();
      return out;
    }
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParseError("json: n must be positive");
    out.g = Digraph(n);
    for (const auto& ej : j.at("edges")) {
      const int t = ej.at("tail").get<int>(), h = ej.at("head").get<int>();
      if (t < 0 || t >= n || h < 0 || h >= n) throw ParseError("json: edge endpoint out of range");
      const Rational w = json_rational(ej.at("w"));
      if (sgn(w) < 0) throw ParseError("json: negative weight");
      out.g.add_edge(t, h);
      out.w.push_back(w);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
  return out;
}

InputGraph read_input(std::istream& in, InputFormat format) {
  if (format == InputFormat::kAuto) {
    in >> std::ws;
    format = in.peek() == '{' ? InputFormat::kJson : InputFormat::kTsplib;
  }
  return format == InputFormat::kJson ? parse_json_input(in) : parse_tsplib(in);
}

InputGraph read_input_file(const std::string& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_input(in, format);
}

nlohmann::json graph_to_json(const Digraph& g, const EdgeValues& w) {
  nlohmann::json j;
  j["n"] = g.num_vertices();
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges()) {
    j["edges"].push_back({{"tail", e.tail}, {"head", e.head}, {"w", to_string(w[e.id])}});
  }
  return j;
}

nlohmann::json input_to_json(const InputGraph& in) {
  return in.instance ? instance_to_json(*in.instance) : graph_to_json(in.g, in.w);
}

std::string write_tsplib(const Digraph& g, const EdgeValues& w, const std::string& name) {
  const int n = g.num_vertices();
  std::vector<std::optional<Rational>> m(static_cast<std::size_t>(n) * n);
  for (const Edge& e : g.edges()) {
    if (e.tail == e.head) continue;
    auto& cell = m[static_cast<std::size_t>(e.tail) * n + e.head];
    if (cell) throw SolveError("tsplib: parallel edges");
    if (!is_integral(w[e.id]) || sgn(w[e.id]) < 0) throw SolveError("tsplib: weights must be nonnegative integers");
    cell = w[e.id];
  }
  std::ostringstream os;
  os << "NAME: " << name << "\nTYPE: ATSP\nDIMENSION: " << n
     << "\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n";
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (v > 0) os << ' ';
      if (u == v) {
        os << 0;
        continue;
      }
      const auto& cell = m[static_cast<std::size_t>(u) * n + v];
      if (!cell) throw SolveError("tsplib: missing edge " + std::to_string(u) + "->" + std::to_string(v));
      os << to_string(*cell);
    }
    os << '\n';
  }
  os << "EOF\n";
  return os.str();
}

std::vector<std::string> generator_kinds() {
  std::vector<std::string> kinds = {"random", "sparse", "node-weighted", "two-weight"};
  for (const std::string& g : gadget_names()) kinds.push_back(g);
  return kinds;
}

InputGraph generate(const std::string& kind, int n, std::uint64_t seed) {
  const auto gadgets = gadget_names();
  if (std::find(gadgets.begin(), gadgets.end(), kind) != gadgets.end()) {
    Gadget gd = gadget_by_name(kind);
    InputGraph out;
    out.g = gd.inst.graph();
    out.w = gd.inst.weights();
    out.instance = std::move(gd.inst);
    return out;
  }
  if (n < 2) throw SolveError("generate: n must be at least 2");
  std::mt19937_64 rng(seed);
  InputGraph out;
  if (kind == "random") {
    std::tie(out.g, out.w) = random_complete_digraph(rng, n, 0, 20);
  } else if (kind == "two-weight") {
    std::tie(out.g, out.w) = random_complete_digraph(rng, n, 1, 2);
  } else if (kind == "node-weighted") {
    std::uniform_int_distribution<int> fd(0, 10);
    std::vector<int> f(n);
    for (int& v : f) v = fd(rng);
    out.g = Digraph(n);
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u == v) continue;
        out.g.add_edge(u, v);
        out.w.push_back(Rational(f[u] + f[v]));
      }
    }
  } else if (kind == "sparse") {
    std::uniform_int_distribution<int> wd(0, 20);
    std::bernoulli_distribution keep(0.5);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> next(n);
    for (int k = 0; k < n; ++k) next[order[k]] = order[(k + 1) % n];
    out.g = Digraph(n);
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        if (u == v) continue;
        const bool on_cycle = next[u] == v;
        const bool extra = keep(rng);
        const int wt = wd(rng);
        if (!on_cycle && !extra) continue;
        out.g.add_edge(u, v);
        out.w.push_back(Rational(wt));
      }
    }
  } else {
    throw SolveError("unknown generator kind '" + kind + "'");
  }
  return out;
}

}  // namespace atsp
