#include "atsp/spc_singleton.hpp"

#include <map>
#include <tuple>

#include "atsp/errors.hpp"

namespace atsp {

void validate_partition(const Instance& inst, const VertexSet& backbone_vertices,
                        const std::vector<VertexSet>& partition) {
  const int n = inst.num_vertices();
  const Digraph& g = inst.graph();
  std::vector<int> owner(n, -1);
  for (int v : backbone_vertices) {
    if (v < 0 || v >= n) throw SolveError("invalid partition: backbone vertex out of range");
    owner[v] = -2;
  }
  for (std::size_t i = 0; i < partition.size(); ++i) {
    VertexSet cls = make_vertex_set(partition[i]);
    if (cls.empty()) throw SolveError("invalid partition: empty class");
    if (cls.front() < 0 || cls.back() >= n) throw SolveError("invalid partition: vertex out of range");
    if (static_cast<int>(cls.size()) == n) throw SolveError("invalid partition: partition class equals V");
    for (int v : cls) {
      if (owner[v] != -1) throw SolveError("invalid partition: vertex " + std::to_string(v) + " covered twice");
      owner[v] = static_cast<int>(i);
    }
    if (!strongly_connected(g, cls)) {
      throw SolveError("invalid partition: class " + std::to_string(i) + " is not strongly connected");
    }
  }
  for (int v = 0; v < n; ++v) {
    if (owner[v] == -1) throw SolveError("invalid partition: vertex " + std::to_string(v) + " uncovered");
  }
}

std::vector<int> uncovered_classes(const Digraph& g, const EdgeMultiset& f,
                                   const std::vector<VertexSet>& partition) {
  std::vector<int> out;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    auto in = membership(g.num_vertices(), partition[i]);
    bool covered = false;
    for (const auto& [e, c] : f.counts()) {
      if (in[g.edge(e).tail] && !in[g.edge(e).head]) {
        covered = true;
        break;
      }
    }
    if (!covered) out.push_back(static_cast<int>(i));
  }
  return out;
}

LightnessCheck check_lightness(const Instance& inst, const VertexSet& backbone_vertices,
                               const EdgeMultiset& f, const Rational& alpha,
                               const Rational& beta) {
  LightnessCheck res;
  if (!degree_imbalance(inst.graph(), f).empty()) {
    res.ok = false;
    res.reason = "not Eulerian";
    return res;
  }
  for (Subtour& t : eulerian_components(inst.graph(), f)) {
    Rational w = cost(inst, t.edges);
    if (intersects(t.vertices, backbone_vertices)) {
      res.backbone_weight += w;
    } else if (w > alpha * lb_set(inst, t.vertices)) {
      if (res.ok) {
        res.ok = false;
        res.reason = "subtour of weight " + to_string(w) + " exceeds alpha * lb = " +
                     to_string(alpha * lb_set(inst, t.vertices));
        res.offending = std::move(t);
      }
    }
  }
  if (res.ok && res.backbone_weight > beta) {
    res.ok = false;
    res.reason = "subtours meeting the backbone weigh " + to_string(res.backbone_weight) +
                 " > beta = " + to_string(beta);
  }
  return res;
}

namespace {

// One simple cycle of the decomposition with per-position redirections.
struct Piece {
  std::vector<int> edges;
  Rational lambda;
  std::vector<int> into_aux;  // class whose a_i replaces the head, or -1
  std::vector<int> from_aux;  // class whose a_i replaces the tail, or -1
  std::vector<char> removed;  // part of some internal flow x_i
};

Piece make_piece(std::vector<int> edges, Rational lambda) {
  Piece p;
  const std::size_t m = edges.size();
  p.edges = std::move(edges);
  p.lambda = std::move(lambda);
  p.into_aux.assign(m, -1);
  p.from_aux.assign(m, -1);
  p.removed.assign(m, 0);
  return p;
}

int position_of(const Piece& p, int e) {
  for (std::size_t k = 0; k < p.edges.size(); ++k) {
    if (p.edges[k] == e) return static_cast<int>(k);
  }
  return -1;
}

}  // namespace

EdgeMultiset solve_spc_singleton(const Instance& inst, const std::vector<VertexSet>& partition,
                                 SpcSingletonStats* stats) {
  if (!is_singleton(inst)) throw SolveError("spc-singleton: instance is not singleton");
  validate_partition(inst, {}, partition);
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  const int k = static_cast<int>(partition.size());
  std::vector<VertexSet> classes;
  for (const VertexSet& c : partition) classes.push_back(make_vertex_set(c));

  std::vector<Piece> pieces;
  for (auto& c : cycle_decomposition(g, inst.x())) pieces.push_back(make_piece(std::move(c.edges), c.weight));

  int redirected = 0;
  for (int i = 0; i < k; ++i) {
    auto in = membership(n, classes[i]);
    // X_i^-: entering occurrences by increasing edge id, then piece order,
    // until the mass is exactly 1; the last piece is split if needed.
    std::vector<std::pair<int, int>> chosen;  // (piece, position)
    Rational need = 1;
    for (const Edge& e : g.edges()) {
      if (sgn(need) == 0) break;
      if (in[e.tail] || !in[e.head]) continue;
      for (std::size_t p = 0; p < pieces.size() && sgn(need) > 0; ++p) {
        int pos = position_of(pieces[p], e.id);
        if (pos < 0) continue;
        if (pieces[p].lambda > need) {
          Piece rest = pieces[p];
          rest.lambda -= need;
          pieces[p].lambda = need;
          pieces.push_back(std::move(rest));
          // Earlier entries of this piece into V_i were counted at full mass.
          const int copy = static_cast<int>(pieces.size()) - 1;
          const std::size_t before = chosen.size();
          for (std::size_t c = 0; c < before; ++c) {
            if (chosen[c].first == static_cast<int>(p)) chosen.emplace_back(copy, chosen[c].second);
          }
        }
        need -= pieces[p].lambda;
        chosen.emplace_back(static_cast<int>(p), pos);
      }
    }
    ATSP_CHECK(sgn(need) == 0, "class with x(delta-) < 1");
    // X_i^+ is the first exit after each chosen entry; the edges between are x_i.
    for (auto [p, pos] : chosen) {
      Piece& piece = pieces[p];
      const int m = static_cast<int>(piece.edges.size());
      ATSP_CHECK(piece.into_aux[pos] < 0, "entry occurrence chosen twice");
      piece.into_aux[pos] = i;
      int q = (pos + 1) % m;
      while (in[g.edge(piece.edges[q]).head]) {
        ATSP_CHECK(q != pos, "cycle never leaves its class");
        piece.removed[q] = 1;
        q = (q + 1) % m;
      }
      ATSP_CHECK(!piece.removed[q] && piece.from_aux[q] < 0, "exit occurrence reused");
      piece.from_aux[q] = i;
      redirected += 2;
    }
  }

  // x' on G': arcs keyed by (preimage edge, tail', head'). Plain copies of
  // every edge are included at zero value so rounding may use them.
  auto aux = [n](int cls) { return n + cls; };
  std::map<std::tuple<int, int, int>, Rational> xprime;
  for (const Edge& e : g.edges()) xprime[{e.id, e.tail, e.head}];
  for (const Piece& p : pieces) {
    for (std::size_t q = 0; q < p.edges.size(); ++q) {
      if (p.removed[q]) continue;
      const Edge& e = g.edge(p.edges[q]);
      int t = p.from_aux[q] >= 0 ? aux(p.from_aux[q]) : e.tail;
      int h = p.into_aux[q] >= 0 ? aux(p.into_aux[q]) : e.head;
      xprime[{e.id, t, h}] += p.lambda;
    }
  }
  {
    std::vector<Rational> out(n + k), into(n + k);
    for (const auto& [key, val] : xprime) {
      out[std::get<1>(key)] += val;
      into[std::get<2>(key)] += val;
    }
    for (int v = 0; v < n + k; ++v) ATSP_CHECK(out[v] == into[v], "x' is not a circulation");
    for (int v = 0; v < n; ++v) {
      if (sgn(inst.laminar().singleton_y(v)) > 0) ATSP_CHECK(out[v] <= 1, "x'(delta+(v)) > 1");
    }
    for (int i = 0; i < k; ++i) ATSP_CHECK(out[aux(i)] == 1, "x'(delta+(a_i)) != 1");
  }

  // Integral rounding: v -> (v_in = 2v, v_out = 2v + 1).
  FlowNetwork net;
  for (int v = 0; v < 2 * (n + k); ++v) net.add_node();
  for (int v = 0; v < n; ++v) {
    std::int64_t cap = sgn(inst.laminar().singleton_y(v)) > 0 ? 1 : kInfiniteCapacity;
    net.add_arc(2 * v, 2 * v + 1, 0, cap, Rational(0));
  }
  for (int i = 0; i < k; ++i) net.add_arc(2 * aux(i), 2 * aux(i) + 1, 1, 1, Rational(0));
  std::vector<std::tuple<int, int, int>> arc_key;
  const int first_edge_arc = static_cast<int>(net.arcs.size());
  for (const auto& [key, val] : xprime) {
    auto [e, t, h] = key;
    net.add_arc(2 * t + 1, 2 * h, 0, kInfiniteCapacity, inst.weights()[e]);
    arc_key.push_back(key);
  }
  FlowSolution z;
  try {
    z = min_cost_integral_flow(net);
  } catch (const InfeasibleFlow& err) {
    ATSP_CHECK(false, std::string("rounding of x' infeasible: ") + err.what());
  }

  EdgeMultiset f;
  std::vector<int> u_of(k, -1), v_of(k, -1);
  for (std::size_t a = 0; a < arc_key.size(); ++a) {
    std::int64_t c = z.flow[first_edge_arc + a];
    if (c == 0) continue;
    auto [e, t, h] = arc_key[a];
    f.add(e, c);
    if (h >= n) {
      ATSP_CHECK(c == 1 && u_of[h - n] < 0, "a_i entered more than once");
      u_of[h - n] = g.edge(e).head;
    }
    if (t >= n) {
      ATSP_CHECK(c == 1 && v_of[t - n] < 0, "a_i left more than once");
      v_of[t - n] = g.edge(e).tail;
    }
  }
  Rational rounded = cost(inst, f);

  std::vector<int> repair_lengths;
  for (int i = 0; i < k; ++i) {
    ATSP_CHECK(u_of[i] >= 0 && v_of[i] >= 0, "a_i unused by z'");
    auto path = shortest_path(g, inst.weights(), u_of[i], v_of[i], classes[i]);
    ATSP_CHECK(path.has_value(), "class not strongly connected after validation");
    for (int e : path->edges) f.add(e);
    repair_lengths.push_back(static_cast<int>(path->edges.size()));
  }

  ATSP_CHECK(degree_imbalance(g, f).empty(), "spc-singleton output not Eulerian");
  ATSP_CHECK(uncovered_classes(g, f, classes).empty(), "spc-singleton output misses a class");
  for (int v = 0; v < n; ++v) {
    if (sgn(inst.laminar().singleton_y(v)) == 0) continue;
    std::int64_t out = 0;
    for (int e : g.out_edges(v)) out += f.count(e);
    ATSP_CHECK(out <= 2, "vertex with y > 0 left more than twice");
  }
  ATSP_CHECK(check_lightness(inst, {}, f, Rational(2), Rational(0)).ok, "spc-singleton not (2,0)-light");

  if (stats) {
    stats->cycles = static_cast<int>(pieces.size());
    stats->redirected = redirected;
    stats->rounded_cost = rounded;
    stats->repair_lengths = std::move(repair_lengths);
  }
  return f;
}

}  // namespace atsp
