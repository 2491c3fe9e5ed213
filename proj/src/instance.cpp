#include "atsp/instance.hpp"

#include <algorithm>

#include "atsp/errors.hpp"

namespace atsp {

LaminarForest::LaminarForest(int n, std::vector<std::pair<VertexSet, Rational>> sets)
    : n_(n), singleton_of_(n, -1), innermost_(n, -1) {
  std::vector<std::pair<VertexSet, Rational>> kept;
  for (auto& [s, y] : sets) {
    if (sgn(y) < 0) throw SolveError("laminar family: negative y");
    if (s.empty()) throw SolveError("laminar family: empty set");
    s = make_vertex_set(std::move(s));
    if (s.front() < 0 || s.back() >= n) throw SolveError("laminar family: vertex out of range");
    if (s.size() == 1 && sgn(y) == 0) continue;
    kept.emplace_back(std::move(s), std::move(y));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  for (std::size_t i = 0; i < kept.size(); ++i) {
    LaminarSet node;
    node.vertices = std::move(kept[i].first);
    node.y = std::move(kept[i].second);
    for (int j = static_cast<int>(sets_.size()) - 1; j >= 0; --j) {
      const VertexSet& other = sets_[j].vertices;
      if (other == node.vertices) throw SolveError("laminar family: duplicate set");
      if (!intersects(other, node.vertices)) continue;
      if (!is_subset(node.vertices, other)) throw SolveError("laminar family: crossing sets");
      if (node.parent < 0) node.parent = j;
    }
    int id = static_cast<int>(sets_.size());
    if (node.parent >= 0) sets_[node.parent].children.push_back(id);
    for (int v : node.vertices) innermost_[v] = id;
    if (node.vertices.size() == 1) singleton_of_[node.vertices[0]] = id;
    sets_.push_back(std::move(node));
  }
}

std::optional<int> LaminarForest::find(const VertexSet& s) const {
  if (s.empty() || s.front() < 0 || s.back() >= n_) return std::nullopt;
  for (int id = innermost_[s.front()]; id >= 0; id = sets_[id].parent) {
    if (sets_[id].vertices == s) return id;
    if (sets_[id].vertices.size() > s.size()) break;
  }
  return std::nullopt;
}

Rational LaminarForest::singleton_y(int v) const {
  int id = singleton_of_.at(v);
  return id < 0 ? Rational(0) : sets_[id].y;
}

std::vector<int> LaminarForest::chain(int v) const {
  std::vector<int> out;
  for (int id = innermost_.at(v); id >= 0; id = sets_[id].parent) out.push_back(id);
  return out;
}

std::vector<int> LaminarForest::roots() const {
  std::vector<int> out;
  for (int id = 0; id < size(); ++id) {
    if (sets_[id].parent < 0) out.push_back(id);
  }
  return out;
}

Instance::Instance(Digraph g, EdgeValues x, LaminarForest laminar)
    : g_(std::move(g)), x_(std::move(x)), laminar_(std::move(laminar)) {
  ATSP_CHECK(static_cast<int>(x_.size()) == g_.num_edges(), "x vector size");
  ATSP_CHECK(laminar_.num_vertices() == g_.num_vertices(), "laminar family over wrong vertex count");
  w_.assign(g_.num_edges(), Rational(0));
  for (const LaminarSet& s : laminar_.sets()) {
    if (sgn(s.y) == 0) continue;
    std::vector<char> in = membership(g_.num_vertices(), s.vertices);
    for (const Edge& e : g_.edges()) {
      if (in[e.tail] != in[e.head]) w_[e.id] += s.y;
    }
  }
}

Instance build_instance(const Digraph& g, const EdgeValues& w,
                        const HeldKarpSolution& hk, const DualSolution& dual) {
  Digraph h(g.num_vertices());
  EdgeValues x;
  for (const Edge& e : g.edges()) {
    if (sgn(hk.x[e.id]) > 0) {
      h.add_edge(e.tail, e.head, e.id);
      x.push_back(hk.x[e.id]);
    }
  }
  std::vector<std::pair<VertexSet, Rational>> sets;
  for (std::size_t i = 0; i < dual.family.size(); ++i) sets.emplace_back(dual.family[i], dual.y[i]);
  Instance inst(std::move(h), std::move(x), LaminarForest(g.num_vertices(), std::move(sets)));
  for (const Edge& e : inst.graph().edges()) {
    const Edge& orig = g.edge(*e.preimage);
    Rational reduced = w[orig.id] - dual.alpha[orig.tail] + dual.alpha[orig.head];
    if (reduced != inst.weights()[e.id]) throw SolveError("inconsistent primal/dual");
  }
  return inst;
}

const Rational& induced_weight(const Instance& inst, int edge) {
  return inst.weights().at(edge);
}

Rational cost(const Instance& inst, const EdgeMultiset& f) {
  return multiset_cost(f, inst.weights());
}

Rational cost_by_crossings(const Instance& inst, const EdgeMultiset& f) {
  Rational total = 0;
  const Digraph& g = inst.graph();
  for (const LaminarSet& s : inst.laminar().sets()) {
    std::vector<char> in = membership(g.num_vertices(), s.vertices);
    long crossings = 0;
    for (const auto& [e, c] : f.counts()) {
      if (in[g.edge(e).tail] != in[g.edge(e).head]) crossings += c;
    }
    total += s.y * crossings;
  }
  return total;
}

Rational value(const Instance& inst, const VertexSet& s) {
  Rational total = 0;
  for (const LaminarSet& r : inst.laminar().sets()) {
    if (r.vertices.size() < s.size() && is_subset(r.vertices, s)) total += r.y;
  }
  return 2 * total;
}

Rational total_value(const Instance& inst) {
  Rational total = 0;
  for (const LaminarSet& r : inst.laminar().sets()) total += r.y;
  return 2 * total;
}

Rational lb(const Instance& inst, int v) { return 2 * inst.laminar().singleton_y(v); }

Rational lb_set(const Instance& inst, const VertexSet& u) {
  Rational total = 0;
  for (int v : u) total += lb(inst, v);
  return total;
}

Rational lb_bar(const Instance& inst, const VertexSet& backbone_vertices) {
  return lb_set(inst, set_difference(all_vertices(inst.num_vertices()), backbone_vertices));
}

bool is_singleton(const Instance& inst) {
  for (const LaminarSet& s : inst.laminar().sets()) {
    if (s.vertices.size() != 1) return false;
  }
  return true;
}

VertexSet s_in(const Instance& inst, const VertexSet& s) {
  std::vector<char> in = membership(inst.num_vertices(), s);
  std::vector<int> out;
  for (const Edge& e : inst.graph().edges()) {
    if (!in[e.tail] && in[e.head]) out.push_back(e.head);
  }
  return make_vertex_set(std::move(out));
}

VertexSet s_out(const Instance& inst, const VertexSet& s) {
  std::vector<char> in = membership(inst.num_vertices(), s);
  std::vector<int> out;
  for (const Edge& e : inst.graph().edges()) {
    if (in[e.tail] && !in[e.head]) out.push_back(e.tail);
  }
  return make_vertex_set(std::move(out));
}

std::vector<std::string> verify_instance(const Instance& inst) {
  std::vector<std::string> problems;
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  for (const Edge& e : g.edges()) {
    if (sgn(inst.x()[e.id]) <= 0) problems.push_back("positivity: edge " + std::to_string(e.id));
  }
  for (int v = 0; v < n; ++v) {
    if (out_value(g, inst.x(), {v}) != in_value(g, inst.x(), {v})) {
      problems.push_back("circulation: vertex " + std::to_string(v));
    }
  }
  if (n >= 2) {
    if (n <= 12) {
      std::vector<int> s;
      for (long mask = 1; mask + 1 < (1L << n); ++mask) {
        s.clear();
        for (int v = 0; v < n; ++v) {
          if (mask >> v & 1) s.push_back(v);
        }
        if (cut_value(g, inst.x(), s) < 2) {
          problems.push_back("cut: a proper set has x(delta) < 2");
          break;
        }
      }
    } else if (separate(g, inst.x())) {
      problems.push_back("cut: separation found x(delta+) < 1");
    }
  }
  for (const LaminarSet& s : inst.laminar().sets()) {
    if (out_value(g, inst.x(), s.vertices) != 1 || in_value(g, inst.x(), s.vertices) != 1) {
      problems.push_back("tightness: set of size " + std::to_string(s.vertices.size()));
    }
    if (sgn(s.y) < 0) problems.push_back("negative y");
  }
  return problems;
}

namespace {

Rational rational_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw ParseError(std::string("field '") + key + "' must be a \"p/q\" string");
}

}  // namespace

nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["n"] = inst.num_vertices();
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : inst.graph().edges()) {
    nlohmann::json ej = {{"tail", e.tail}, {"head", e.head}, {"x", to_string(inst.x()[e.id])},
                         {"w", to_string(inst.weights()[e.id])}};
    if (e.preimage) ej["preimage"] = *e.preimage;
    j["edges"].push_back(std::move(ej));
  }
  j["laminar"] = nlohmann::json::array();
  for (const LaminarSet& s : inst.laminar().sets()) {
    j["laminar"].push_back({{"vertices", s.vertices}, {"y", to_string(s.y)}});
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  try {
    int n = j.at("n").get<int>();
    if (n < 0) throw ParseError("negative vertex count");
    Digraph g(n);
    EdgeValues x;
    for (const auto& ej : j.at("edges")) {
      int t = ej.at("tail").get<int>(), h = ej.at("head").get<int>();
      if (t < 0 || t >= n || h < 0 || h >= n) throw ParseError("edge endpoint out of range");
      std::optional<int> pre;
      if (ej.contains("preimage")) pre = ej.at("preimage").get<int>();
      g.add_edge(t, h, pre);
      x.push_back(rational_field(ej, "x"));
    }
    std::vector<std::pair<VertexSet, Rational>> sets;
    for (const auto& sj : j.at("laminar")) {
      sets.emplace_back(sj.at("vertices").get<std::vector<int>>(), rational_field(sj, "y"));
    }
    LaminarForest lam;
    try {
      lam = LaminarForest(n, std::move(sets));
    } catch (const SolveError& e) {
      throw ParseError(e.what());
    }
    Instance inst(std::move(g), std::move(x), std::move(lam));
    for (std::size_t i = 0; i < j.at("edges").size(); ++i) {
      const auto& ej = j.at("edges")[i];
      if (ej.contains("w") && rational_field(ej, "w") != inst.weights()[i]) {
        throw ParseError("edge " + std::to_string(i) + ": stored weight disagrees with laminar y");
      }
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance json: ") + e.what());
  }
}

}  // namespace atsp
