#include "atsp/laminar_ops.hpp"

#include <algorithm>

#include "atsp/errors.hpp"

namespace atsp {

namespace {

std::vector<int> entering_edges(const Digraph& g, const std::vector<char>& in) {
  std::vector<int> out;
  for (const Edge& e : g.edges()) {
    if (!in[e.tail] && in[e.head]) out.push_back(e.id);
  }
  return out;
}

std::vector<int> leaving_edges(const Digraph& g, const std::vector<char>& in) {
  std::vector<int> out;
  for (const Edge& e : g.edges()) {
    if (in[e.tail] && !in[e.head]) out.push_back(e.id);
  }
  return out;
}

bool strictly_inside(const VertexSet& r, const VertexSet& s) {
  return r.size() < s.size() && is_subset(r, s);
}

// y-mass of laminar sets strictly inside S that contain v.
Rational inner_mass(const Instance& inst, const VertexSet& s, int v) {
  Rational total = 0;
  for (int id : inst.laminar().chain(v)) {
    const LaminarSet& r = inst.laminar().set(id);
    if (strictly_inside(r.vertices, s)) total += r.y;
  }
  return total;
}

// Vertex sequence of an edge sequence starting at `start`.
std::vector<int> path_vertices(const Digraph& g, const std::vector<int>& edges, int start) {
  std::vector<int> vs = {start};
  for (int e : edges) vs.push_back(g.edge(e).head);
  return vs;
}

// Drops closed subwalks so every vertex appears once. Crossing counts and
// weight can only go down: a closed walk crosses every set evenly.
std::vector<int> shortcut(const Digraph& g, const std::vector<int>& edges, int start) {
  std::vector<int> kept;
  std::vector<int> at = {start};  // at[i] = vertex after kept[0..i)
  for (int e : edges) {
    int h = g.edge(e).head;
    auto it = std::find(at.begin(), at.end(), h);
    if (it != at.end()) {
      std::size_t pos = it - at.begin();
      kept.resize(pos);
      at.resize(pos + 1);
    } else {
      kept.push_back(e);
      at.push_back(h);
    }
  }
  return kept;
}

std::vector<int> inside_path(const Instance& inst, const VertexSet& region, int a, int b) {
  auto p = shortest_path(inst.graph(), inst.weights(), a, b, region);
  ATSP_CHECK(p.has_value(), "no path inside a tight set between an entry and an exit");
  return p->edges;
}

Subtour single_walk(const Digraph& g, const EdgeMultiset& tour) {
  auto comps = eulerian_components(g, tour);
  ATSP_CHECK(comps.size() == 1, "tour must be one component");
  return comps[0];
}

}  // namespace

bool is_tour(const Digraph& g, const EdgeMultiset& f) {
  if (!degree_imbalance(g, f).empty()) return false;
  auto comps = eulerian_components(g, f);
  if (g.num_vertices() <= 1) return comps.size() <= 1;
  return comps.size() == 1 &&
         static_cast<int>(comps[0].vertices.size()) == g.num_vertices();
}

std::vector<VertexSet> scc_chain(const Instance& inst, const VertexSet& s) {
  const Digraph& g = inst.graph();
  if (out_value(g, inst.x(), s) != 1 || in_value(g, inst.x(), s) != 1) {
    throw SolveError("instance corrupt: x not tight on S");
  }
  std::vector<VertexSet> comps = scc_topological(g, s);
  auto in_of = [&](const VertexSet& c) { return entering_edges(g, membership(g.num_vertices(), c)); };
  auto out_of = [&](const VertexSet& c) { return leaving_edges(g, membership(g.num_vertices(), c)); };
  bool ok = in_of(comps.front()) == in_of(s) && out_of(comps.back()) == out_of(s);
  for (std::size_t k = 1; ok && k < comps.size(); ++k) {
    ok = out_of(comps[k - 1]) == in_of(comps[k]);
  }
  if (!ok) throw SolveError("instance corrupt: component chain of a tight set is broken");
  return comps;
}

int crossings(const Digraph& g, const std::vector<int>& edges, const VertexSet& r) {
  int count = 0;
  for (int e : edges) {
    if (contains(r, g.edge(e).tail) != contains(r, g.edge(e).head)) ++count;
  }
  return count;
}

int allowed_crossings(const Instance& inst, const VertexSet& s, const VertexSet& r,
                      int u, int v) {
  const int k = contains(r, u) + contains(r, v);
  if (k == 1) return 1;
  if (k == 2 && strictly_inside(r, s) &&
      (contains(s_in(inst, s), u) || contains(s_out(inst, s), v))) {
    return 0;
  }
  return 2;
}

ShortPathResult short_path(const Instance& inst, const VertexSet& s, int u, int v,
                           const std::optional<std::vector<int>>& initial) {
  const Digraph& g = inst.graph();
  const LaminarForest& lam = inst.laminar();
  ATSP_CHECK(contains(s, u) && contains(s, v), "short_path endpoints must lie in S");
  for (const LaminarSet& r : lam.sets()) {
    if (crossing(r.vertices, s)) throw SolveError("short_path: S crosses a laminar set");
  }

  std::vector<int> path;
  if (initial) {
    path = *initial;
    int at = u;
    for (int e : path) {
      ATSP_CHECK(g.edge(e).tail == at && contains(s, g.edge(e).head),
                 "initial path is not a walk inside S from u");
      at = g.edge(e).head;
    }
    ATSP_CHECK(at == v, "initial path does not end at v");
  } else {
    auto p = shortest_path(g, inst.weights(), u, v, s);
    if (!p) throw SolveError("unreachable inside S");
    path = p->edges;
  }

  std::vector<int> inner;  // ids of sets strictly inside S, largest first
  std::vector<int> allowed;
  for (int id = 0; id < lam.size(); ++id) {
    if (strictly_inside(lam.set(id).vertices, s)) {
      inner.push_back(id);
      allowed.push_back(allowed_crossings(inst, s, lam.set(id).vertices, u, v));
    }
  }
  const bool refined = contains(s_in(inst, s), u) || contains(s_out(inst, s), v);

  ShortPathResult result;
  while (true) {
    int pick = -1;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      if (crossings(g, path, lam.set(inner[k]).vertices) > allowed[k]) {
        pick = inner[k];
        break;
      }
    }
    if (pick < 0) break;
    ++result.repairs;
    // Each repair adds edges only inside R, so a set is repaired at most once.
    ATSP_CHECK(result.repairs <= static_cast<int>(inner.size()), "short_path repair loop");

    const VertexSet& r = lam.set(pick).vertices;
    const std::vector<int> vs = path_vertices(g, path, u);
    const int m = static_cast<int>(path.size());
    const bool has_u = contains(r, u), has_v = contains(r, v);
    std::vector<int> next;
    auto append = [&next](const std::vector<int>& part) {
      next.insert(next.end(), part.begin(), part.end());
    };
    if (!has_u && !has_v) {
      int first = -1, last = -1;
      for (int i = 0; i <= m; ++i) {
        if (contains(r, vs[i])) {
          if (first < 0) first = i;
          last = i;
        }
      }
      next.assign(path.begin(), path.begin() + first);
      append(inside_path(inst, r, vs[first], vs[last]));
      next.insert(next.end(), path.begin() + last, path.end());
    } else if (has_u && !has_v) {
      int last = 0;
      for (int i = 0; i <= m; ++i) {
        if (contains(r, vs[i])) last = i;
      }
      append(inside_path(inst, r, u, vs[last]));
      next.insert(next.end(), path.begin() + last, path.end());
    } else if (!has_u && has_v) {
      int first = 0;
      while (!contains(r, vs[first])) ++first;
      next.assign(path.begin(), path.begin() + first);
      append(inside_path(inst, r, vs[first], v));
    } else if (refined) {
      append(inside_path(inst, r, u, v));
    } else {
      const VertexSet r_in = s_in(inst, r);
      int first = 0;
      while (first <= m && !contains(r_in, vs[first])) ++first;
      ATSP_CHECK(first <= m, "violated set never re-entered");
      next.assign(path.begin(), path.begin() + first);
      append(inside_path(inst, r, vs[first], v));
    }
    path = std::move(next);
  }

  path = shortcut(g, path, u);
  for (int id = 0; id < lam.size(); ++id) {
    const VertexSet& r = lam.set(id).vertices;
    int c = crossings(g, path, r);
    ATSP_CHECK(c <= 2, "short_path crosses a laminar set more than twice");
    if (strictly_inside(r, s)) {
      ATSP_CHECK(c <= allowed_crossings(inst, s, r, u, v), "short_path crossing bound");
    }
  }
  result.path.edges = path;
  result.path.weight = 0;
  for (int e : path) result.path.weight += inst.weights()[e];
  ATSP_CHECK(result.path.weight <= value(inst, s), "short_path weight exceeds value(S)");
  return result;
}

std::optional<Rational> distance_dS(const Instance& inst, const VertexSet& s, int u, int v) {
  auto p = shortest_path(inst.graph(), inst.weights(), u, v, s);
  if (!p) return std::nullopt;
  return p->weight;
}

std::optional<Rational> distance_DS(const Instance& inst, const VertexSet& s, int u, int v) {
  auto d = distance_dS(inst, s, u, v);
  if (!d) return std::nullopt;
  return *d + inner_mass(inst, s, u) + inner_mass(inst, s, v);
}

MaxDS max_DS(const Instance& inst, const VertexSet& s) {
  const VertexSet entries = s_in(inst, s);
  const VertexSet exits = s_out(inst, s);
  const Rational cap = value(inst, s);
  MaxDS best;
  for (int u : entries) {
    auto dist = shortest_distances(inst.graph(), inst.weights(), u, s);
    const Rational mu = inner_mass(inst, s, u);
    for (int v : exits) {
      ATSP_CHECK(dist[v].has_value(), "exit unreachable from entry inside a tight set");
      Rational d = *dist[v] + mu + inner_mass(inst, s, v);
      ATSP_CHECK(d <= cap, "D_S exceeds value(S) for an entry/exit pair");
      if (best.u < 0 || d > best.value) {
        best.value = d;
        best.u = u;
        best.v = v;
      }
    }
  }
  ATSP_CHECK(best.u >= 0, "tight set without entries or exits");
  return best;
}

std::pair<Instance, ContractionRecord> contract(const Instance& inst, const VertexSet& s) {
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  if (!inst.laminar().find(s)) throw SolveError("contract: S is not a laminar set");
  ContractionRecord rec;
  rec.kind = ReductionKind::kContract;
  rec.set = s;
  rec.max_d = max_DS(inst, s);
  std::vector<char> in = membership(n, s);
  rec.vertex_map.assign(n, -1);
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (!in[v]) rec.vertex_map[v] = next++;
  }
  rec.new_vertex = next;
  for (int v : s) rec.vertex_map[v] = rec.new_vertex;

  Digraph h(next + 1);
  EdgeValues x;
  rec.edge_map.assign(g.num_edges(), -1);
  for (const Edge& e : g.edges()) {
    if (in[e.tail] && in[e.head]) continue;
    rec.edge_map[e.id] = h.add_edge(rec.vertex_map[e.tail], rec.vertex_map[e.head], e.id);
    x.push_back(inst.x()[e.id]);
  }

  std::vector<std::pair<VertexSet, Rational>> sets;
  for (const LaminarSet& r : inst.laminar().sets()) {
    if (strictly_inside(r.vertices, s)) continue;
    std::vector<int> mapped;
    for (int v : r.vertices) mapped.push_back(rec.vertex_map[v]);
    Rational y = r.y;
    if (r.vertices == s) {
      rec.new_y = r.y + rec.max_d.value / 2;
      y = rec.new_y;
    }
    sets.emplace_back(make_vertex_set(std::move(mapped)), std::move(y));
  }
  Instance child(std::move(h), std::move(x), LaminarForest(next + 1, std::move(sets)));
  ATSP_CHECK(total_value(child) ==
                 total_value(inst) - (value(inst, s) - rec.max_d.value),
             "contraction changed the value by the wrong amount");
  return {std::move(child), std::move(rec)};
}

std::pair<Instance, ContractionRecord> induce(const Instance& inst, const VertexSet& s) {
  const Digraph& g = inst.graph();
  const int n = g.num_vertices();
  if (!inst.laminar().find(s)) throw SolveError("induce: S is not a laminar set");
  if (static_cast<int>(s.size()) == n) throw SolveError("induce: S must be a proper subset");
  ContractionRecord rec;
  rec.kind = ReductionKind::kInduce;
  rec.set = s;
  std::vector<char> in = membership(n, s);
  rec.vertex_map.assign(n, -1);
  int next = 0;
  for (int v : s) rec.vertex_map[v] = next++;
  rec.new_vertex = next;
  for (int v = 0; v < n; ++v) {
    if (!in[v]) rec.vertex_map[v] = rec.new_vertex;
  }

  Digraph h(next + 1);
  EdgeValues x;
  rec.edge_map.assign(g.num_edges(), -1);
  for (const Edge& e : g.edges()) {
    if (!in[e.tail] && !in[e.head]) continue;
    rec.edge_map[e.id] = h.add_edge(rec.vertex_map[e.tail], rec.vertex_map[e.head], e.id);
    x.push_back(inst.x()[e.id]);
  }

  const Rational val = value(inst, s);
  rec.new_y = val / 2;
  std::vector<std::pair<VertexSet, Rational>> sets;
  for (const LaminarSet& r : inst.laminar().sets()) {
    if (!strictly_inside(r.vertices, s)) continue;
    std::vector<int> mapped;
    for (int v : r.vertices) mapped.push_back(rec.vertex_map[v]);
    sets.emplace_back(make_vertex_set(std::move(mapped)), r.y);
  }
  sets.emplace_back(VertexSet{rec.new_vertex}, rec.new_y);
  Instance child(std::move(h), std::move(x), LaminarForest(next + 1, std::move(sets)));
  ATSP_CHECK(total_value(child) == 2 * val, "induced instance value is not 2 value(S)");
  return {std::move(child), std::move(rec)};
}

Subtour lift_subtour(const Instance& parent, const Instance& child, const ContractionRecord& rec,
                     const EdgeMultiset& subtour, const LiftOptions& opts) {
  ATSP_CHECK(rec.kind == ReductionKind::kContract, "lift needs a contraction record");
  if (subtour.empty()) return {};
  const Digraph& cg = child.graph();
  if (!degree_imbalance(cg, subtour).empty() || eulerian_components(cg, subtour).size() != 1) {
    throw SolveError("lift: not a subtour");
  }
  const Subtour walk = single_walk(cg, subtour);

  const VertexSet region = opts.unrestricted_paths ? all_vertices(parent.num_vertices()) : rec.set;
  const Digraph& pg = parent.graph();
  EdgeMultiset f;
  const std::size_t len = walk.walk.size();
  for (std::size_t k = 0; k < len; ++k) {
    const Edge& e = cg.edge(walk.walk[k]);
    const Edge& pe = pg.edge(*e.preimage);
    f.add(pe.id);
    if (e.head != rec.new_vertex) continue;
    const Edge& out = pg.edge(*cg.edge(walk.walk[(k + 1) % len]).preimage);
    auto p = shortest_path(pg, parent.weights(), pe.head, out.tail, region);
    ATSP_CHECK(p.has_value(), "lift: exit unreachable from entry");
    for (int pe2 : p->edges) f.add(pe2);
  }
  ATSP_CHECK(cost(parent, f) <= cost(child, subtour), "lift costs more than the contracted subtour");
  return single_walk(pg, f);
}

Subtour lift(const Instance& parent, const Instance& child, const ContractionRecord& rec,
             const EdgeMultiset& tour, const LiftOptions& opts) {
  ATSP_CHECK(rec.kind == ReductionKind::kContract, "lift needs a contraction record");
  const Digraph& cg = child.graph();
  if (!is_tour(cg, tour)) throw SolveError("lift: not a tour of the contracted instance");
  if (!contains(multiset_vertices(cg, tour), rec.new_vertex)) throw SolveError("lift: not a tour");
  return lift_subtour(parent, child, rec, tour, opts);
}

ContractibleResult make_contractible(const Instance& parent, const Instance& child,
                                     const ContractionRecord& rec, const EdgeMultiset& tour) {
  ATSP_CHECK(rec.kind == ReductionKind::kInduce, "make_contractible needs an induce record");
  const Digraph& cg = child.graph();
  const Digraph& pg = parent.graph();
  if (!is_tour(cg, tour)) throw SolveError("make_contractible: not a tour of the induced instance");
  const Subtour walk = single_walk(cg, tour);

  ContractibleResult res;
  res.components = scc_chain(parent, rec.set);
  std::vector<int> pw;
  for (int e : walk.walk) {
    pw.push_back(*cg.edge(e).preimage);
    if (cg.edge(e).head == rec.new_vertex) ++res.visits;
  }
  const std::size_t len = pw.size();
  for (const VertexSet& comp : res.components) {
    std::vector<char> in = membership(pg.num_vertices(), comp);
    EdgeMultiset fc;
    int stitches = 0;
    for (std::size_t k = 0; k < len; ++k) {
      const Edge& e = pg.edge(pw[k]);
      if (in[e.tail] && in[e.head]) fc.add(e.id);
      if (!(in[e.tail] && !in[e.head])) continue;
      // Exit at k; join it to the next re-entry in cyclic walk order.
      std::size_t q = (k + 1) % len;
      while (!(in[pg.edge(pw[q]).head] && !in[pg.edge(pw[q]).tail])) q = (q + 1) % len;
      for (int pe : inside_path(parent, comp, e.tail, pg.edge(pw[q]).head)) fc.add(pe);
      ++stitches;
    }
    if (!fc.empty()) {
      auto parts = eulerian_components(pg, fc);
      ATSP_CHECK(parts.size() == 1 && parts[0].vertices == comp,
                 "component tour does not cover its component");
    } else {
      ATSP_CHECK(comp.size() == 1, "empty tour for a nontrivial component");
    }
    ATSP_CHECK(stitches == res.visits, "stitch count differs from visits to s-bar");
    res.f.add(fc);
    res.stitches.push_back(stitches);
  }
  ATSP_CHECK(cost(parent, res.f) <= cost(child, tour),
             "contractible completion costs more than the induced tour");
  return res;
}

bool is_reducible(const Instance& inst, const VertexSet& s, const Rational& delta) {
  if (s.size() <= 1) return false;
  return max_DS(inst, s).value < delta * value(inst, s);
}

}  // namespace atsp
