#include "atsp/gadgets.hpp"

#include <algorithm>
#include <numeric>

#include "atsp/errors.hpp"
#include "atsp/heldkarp.hpp"

namespace atsp {

Instance instance_from_cycles(int n, const std::vector<WeightedCycle>& cycles,
                              std::vector<std::pair<VertexSet, Rational>> laminar) {
  std::map<std::pair<int, int>, Rational> mass;
  for (const WeightedCycle& c : cycles) {
    const std::size_t k = c.vertices.size();
    for (std::size_t i = 0; i < k; ++i) {
      mass[{c.vertices[i], c.vertices[(i + 1) % k]}] += c.weight;
    }
  }
  Digraph g(n);
  EdgeValues x;
  for (const auto& [uv, m] : mass) {
    g.add_edge(uv.first, uv.second);
    x.push_back(m);
  }
  return Instance(std::move(g), std::move(x), LaminarForest(n, std::move(laminar)));
}

Gadget fig2_contraction_gadget() {
  enum { a, b, c, d, o1, o2 };
  const Rational half = make_rational(1, 2);
  Gadget gd;
  gd.name = "fig2-contraction";
  gd.focus = {a, b, c, d};
  gd.named = {{"v_in", a}, {"u_out", c}, {"b", b}, {"d", d}, {"o1", o1}, {"o2", o2}};
  gd.inst = instance_from_cycles(
      6, {{{o1, a, b, d, c, o2}, half}, {{o2, a, b, d, c, o1}, half}},
      {{{a}, Rational(2)}, {{b}, Rational(2)}, {{c}, Rational(3)}, {{c, d}, Rational(4)},
       {{a, b, c, d}, Rational(1)}, {{o1}, Rational(1)}, {{o2}, Rational(1)}});
  return gd;
}

Gadget series_scc_gadget() {
  const Rational half = make_rational(1, 2);
  Gadget gd;
  gd.name = "series-scc";
  gd.focus = {0, 1, 2, 3};
  gd.named = {{"out_a", 4}, {"out_b", 5}};
  gd.inst = instance_from_cycles(
      6, {{{4, 0, 1, 2, 3, 5}, half}, {{5, 1, 0, 3, 2, 4}, half}},
      {{{0, 1, 2, 3}, Rational(1)}, {{0, 1}, Rational(1)}, {{2, 3}, Rational(2)},
       {{2}, Rational(1)}, {{3}, half}, {{4}, Rational(1)}, {{5}, Rational(1)}});
  return gd;
}

Gadget crossing_repair_gadget() {
  const Rational half = make_rational(1, 2);
  Gadget gd;
  gd.name = "crossing-repair";
  gd.focus = {1, 2};
  gd.named = {{"u", 0}, {"r1", 1}, {"r2", 2}, {"w", 3}, {"v", 4}};
  gd.inst = instance_from_cycles(
      5,
      {{{0, 1, 3}, half}, {{3, 2, 4}, half}, {{1, 2}, half}, {{4, 0, 3}, half}},
      {{{1, 2}, Rational(1)}, {{1}, Rational(1)}, {{2}, Rational(1)}, {{0}, Rational(1)},
       {{4}, Rational(1)}});
  return gd;
}

Gadget single_set_gadget() {
  const Rational half = make_rational(1, 2);
  Gadget gd;
  gd.name = "single-set";
  gd.focus = {0, 1, 2};
  gd.named = {{"a", 3}, {"b", 4}};
  gd.inst = instance_from_cycles(5, {{{3, 0, 1, 2, 4}, half}, {{4, 1, 0, 2, 3}, half}},
                                 {{{0, 1, 2}, Rational(2)}, {{0}, Rational(1)}, {{3}, Rational(1)}, {{4}, Rational(1)}});
  return gd;
}

namespace {

// S = {1..5} entered at 1, left at 3; R = {4,5} hangs off the 1 -> 2 -> 3 spine.
Instance nested_instance(const Rational& y1, const Rational& y2, const Rational& y3) {
  const Rational half = make_rational(1, 2);
  const Rational quarter = make_rational(1, 4);
  return instance_from_cycles(
      6, {{{0, 1, 4, 5, 2, 3}, half}, {{0, 1, 2, 4, 5, 3}, half}},
      {{{1, 2, 3, 4, 5}, Rational(1)}, {{4, 5}, half}, {{0}, Rational(1)}, {{1}, y1}, {{2}, y2},
       {{3}, y3}, {{4}, quarter}, {{5}, quarter}});
}

}  // namespace

Gadget nested_unvisited_gadget() {
  Gadget gd;
  gd.name = "nested-unvisited";
  gd.focus = {4, 5};
  gd.named = {{"entry", 1}, {"exit", 3}};
  // Spine 1 -> 2 -> 3 weighs 5, the detour through R 6: D_S = 9 of value 11.
  gd.inst = nested_instance(Rational(2), make_rational(1, 2), Rational(2));
  return gd;
}

Gadget nested_reducible_gadget() {
  Gadget gd;
  gd.name = "nested-reducible";
  gd.focus = {1, 2, 3, 4, 5};
  gd.named = {{"entry", 1}, {"exit", 3}};
  // The detour through R weighs 5/2 against a heavy spine: D_S = 3 of value 9.
  gd.inst = nested_instance(make_rational(1, 4), Rational(3), make_rational(1, 4));
  return gd;
}

std::vector<std::string> gadget_names() {
  return {"fig2-contraction", "series-scc", "crossing-repair", "single-set", "nested-unvisited", "nested-reducible"};
}

Gadget gadget_by_name(const std::string& name) {
  if (name == "fig2-contraction") return fig2_contraction_gadget();
  if (name == "series-scc") return series_scc_gadget();
  if (name == "crossing-repair") return crossing_repair_gadget();
  if (name == "single-set") return single_set_gadget();
  if (name == "nested-unvisited") return nested_unvisited_gadget();
  if (name == "nested-reducible") return nested_reducible_gadget();
  throw SolveError("unknown gadget '" + name + "'");
}

std::pair<Digraph, EdgeValues> random_complete_digraph(std::mt19937_64& rng, int n, int lo, int hi) {
  std::uniform_int_distribution<int> wt(lo, hi);
  Digraph g(n);
  EdgeValues w;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      g.add_edge(u, v);
      w.push_back(Rational(wt(rng)));
    }
  }
  return {std::move(g), std::move(w)};
}

Instance random_clustered_instance(std::mt19937_64& rng, int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // cluster[v], sub[v]: group labels; sub refines cluster.
  std::vector<int> cluster(n), sub(n);
  std::uniform_int_distribution<int> size(1, 4);
  int next_sub = 0;
  for (int at = 0, c = 0; at < n; ++c) {
    int k = std::min(size(rng), n - at);
    int split = k >= 3 && rng() % 2 ? 2 : k;
    for (int i = 0; i < k; ++i) {
      cluster[perm[at + i]] = c;
      sub[perm[at + i]] = i < split ? next_sub : next_sub + 1;
    }
    next_sub += 2;
    at += k;
  }
  std::uniform_int_distribution<int> inner(0, 2), mid(2, 5), outer(10, 20);
  Digraph g(n);
  EdgeValues w;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      g.add_edge(u, v);
      int c = sub[u] == sub[v] ? inner(rng) : cluster[u] == cluster[v] ? mid(rng) : outer(rng);
      w.push_back(Rational(c));
    }
  }
  HeldKarpSolution hk = solve_held_karp(g, w);
  return build_instance(g, w, hk, extract_laminar_dual(g, w, hk));
}

Subtour backbone_through(const Instance& inst, const std::vector<int>& targets) {
  const Digraph& g = inst.graph();
  const VertexSet all = all_vertices(g.num_vertices());
  ATSP_CHECK(!targets.empty(), "backbone needs a target");
  Subtour b;
  auto append = [&](const std::vector<int>& edges) {
    for (int e : edges) {
      b.edges.add(e);
      b.walk.push_back(e);
    }
  };
  if (targets.size() == 1) {
    const int t = targets.front();
    std::optional<Path> best;
    int best_edge = -1;
    for (int e : g.out_edges(t)) {
      auto back = shortest_path(g, inst.weights(), g.edge(e).head, t, all);
      if (!back) continue;
      Rational total = inst.weights()[e] + back->weight;
      if (!best || total < best->weight + inst.weights()[best_edge]) {
        best = back;
        best_edge = e;
      }
    }
    if (!best) throw SolveError("backbone: no cycle through vertex " + std::to_string(t));
    append({best_edge});
    append(best->edges);
  } else {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      auto p = shortest_path(g, inst.weights(), targets[i], targets[(i + 1) % targets.size()], all);
      if (!p) throw SolveError("backbone: target unreachable");
      append(p->edges);
    }
  }
  b.vertices = multiset_vertices(g, b.edges);
  return b;
}

Instance random_laminar_instance(std::mt19937_64& rng, int n) {
  ATSP_CHECK(n >= 3, "random_laminar_instance needs n >= 3");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // Top-level groups of 1..4 vertices (at least two groups); a group of three
  // or more may nest a pair.
  struct Group {
    std::vector<int> pair;
    std::vector<int> rest;
  };
  std::vector<Group> groups;
  for (int at = 0; at < n;) {
    int k = std::min(1 + static_cast<int>(rng() % 4), n - at);
    if (at == 0 && k == n) k = n - 1;
    Group gr;
    std::vector<int> vs(perm.begin() + at, perm.begin() + at + k);
    if (k >= 3 && rng() % 2) {
      gr.pair = {vs[0], vs[1]};
      gr.rest.assign(vs.begin() + 2, vs.end());
    } else {
      gr.rest = vs;
    }
    groups.push_back(std::move(gr));
    at += k;
  }
  std::vector<std::pair<VertexSet, Rational>> laminar;
  std::uniform_int_distribution<int> cluster_y(1, 3), vertex_y(0, 3);
  for (const Group& gr : groups) {
    VertexSet all = set_union(make_vertex_set(gr.pair), make_vertex_set(gr.rest));
    if (all.size() >= 2) laminar.push_back({all, Rational(cluster_y(rng))});
    if (!gr.pair.empty()) laminar.push_back({make_vertex_set(gr.pair), Rational(cluster_y(rng))});
  }
  for (int v = 0; v < n; ++v) laminar.push_back({{v}, Rational(vertex_y(rng))});

  const int count = 2 + static_cast<int>(rng() % 3);
  std::vector<int> parts;
  for (int i = 0; i < count; ++i) parts.push_back(1 + static_cast<int>(rng() % 4));
  const int total = std::accumulate(parts.begin(), parts.end(), 0);
  std::vector<WeightedCycle> cycles;
  for (int i = 0; i < count; ++i) {
    std::vector<int> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> tour;
    for (int gi : order) {
      // Items of a group: the nested pair as one block, then single vertices.
      std::vector<std::vector<int>> items;
      if (!groups[gi].pair.empty()) {
        std::vector<int> pr = groups[gi].pair;
        std::shuffle(pr.begin(), pr.end(), rng);
        items.push_back(pr);
      }
      for (int v : groups[gi].rest) items.push_back({v});
      std::shuffle(items.begin(), items.end(), rng);
      for (const auto& it : items) tour.insert(tour.end(), it.begin(), it.end());
    }
    cycles.push_back({tour, make_rational(parts[i], total)});
  }
  return instance_from_cycles(n, cycles, std::move(laminar));
}

Instance random_singleton_instance(std::mt19937_64& rng, int n) {
  ATSP_CHECK(n >= 3, "random_singleton_instance needs n >= 3");
  std::uniform_int_distribution<int> vertex_y(0, 3);
  std::vector<std::pair<VertexSet, Rational>> laminar;
  for (int v = 0; v < n; ++v) laminar.push_back({{v}, Rational(vertex_y(rng))});
  laminar[rng() % n].second += 1;
  const int count = 2 + static_cast<int>(rng() % 3);
  std::vector<int> parts;
  for (int i = 0; i < count; ++i) parts.push_back(1 + static_cast<int>(rng() % 4));
  const int total = std::accumulate(parts.begin(), parts.end(), 0);
  std::vector<WeightedCycle> cycles;
  for (int i = 0; i < count; ++i) {
    std::vector<int> tour(n);
    std::iota(tour.begin(), tour.end(), 0);
    std::shuffle(tour.begin(), tour.end(), rng);
    cycles.push_back({tour, make_rational(parts[i], total)});
  }
  return instance_from_cycles(n, cycles, std::move(laminar));
}

VertebratePair random_vertebrate_pair(std::mt19937_64& rng, int n) {
  VertebratePair vp;
  vp.inst = random_laminar_instance(rng, n);
  const LaminarForest& lam = vp.inst.laminar();
  std::vector<int> targets;
  for (const LaminarSet& s : lam.sets()) {
    if (s.vertices.size() < 2) continue;
    bool minimal = std::none_of(s.children.begin(), s.children.end(),
                                [&](int c) { return lam.set(c).vertices.size() >= 2; });
    if (minimal) targets.push_back(s.vertices[rng() % s.vertices.size()]);
  }
  if (targets.empty()) targets.push_back(static_cast<int>(rng() % n));
  std::shuffle(targets.begin(), targets.end(), rng);
  vp.backbone = backbone_through(vp.inst, targets);
  return vp;
}

namespace {

// Innermost non-singleton set containing v, or -1 for V.
std::vector<int> innermost_regions(const Instance& inst) {
  const int n = inst.num_vertices();
  std::vector<int> region(n, -1);
  for (int v = 0; v < n; ++v) {
    for (int id : inst.laminar().chain(v)) {
      if (inst.laminar().set(id).vertices.size() >= 2) {
        region[v] = id;
        break;
      }
    }
  }
  return region;
}

}  // namespace

std::vector<VertexSet> random_u_family(std::mt19937_64& rng, const Instance& inst, const VertexSet& backbone_vertices) {
  const int n = inst.num_vertices();
  std::vector<int> region = innermost_regions(inst);
  std::map<int, VertexSet> groups;
  for (int v = 0; v < n; ++v) {
    if (!contains(backbone_vertices, v)) groups[region[v]].push_back(v);
  }
  std::vector<VertexSet> out;
  for (const auto& [r, grp] : groups) {
    for (const VertexSet& comp : scc_topological(inst.graph(), grp)) {
      switch (rng() % 3) {
        case 0:
          break;
        case 1:
          out.push_back(comp);
          break;
        default:
          out.push_back({comp[rng() % comp.size()]});
      }
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<VertexSet> random_scc_partition(std::mt19937_64& rng, const Instance& inst, const VertexSet& excluded) {
  VertexSet rest = set_difference(all_vertices(inst.num_vertices()), excluded);
  if (rest.empty()) return {};
  const int k = 1 + static_cast<int>(rng() % rest.size());
  std::vector<VertexSet> raw(k);
  for (int v : rest) raw[rng() % k].push_back(v);
  std::vector<VertexSet> out;
  for (const VertexSet& grp : raw) {
    if (grp.empty()) continue;
    for (VertexSet& c : scc_topological(inst.graph(), grp)) out.push_back(std::move(c));
  }
  // A class equal to V is not allowed; split it into strongly connected parts.
  if (out.size() == 1 && static_cast<int>(out[0].size()) == inst.num_vertices()) {
    VertexSet a(out[0].begin(), out[0].begin() + 1), b(out[0].begin() + 1, out[0].end());
    out.clear();
    for (const VertexSet& grp : {a, b}) {
      for (VertexSet& c : scc_topological(inst.graph(), grp)) out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace atsp
