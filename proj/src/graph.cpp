#include "atsp/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

#include "atsp/errors.hpp"

namespace atsp {

Digraph::Digraph(int n) : n_(n), out_(n), in_(n) {
  ATSP_CHECK(n >= 0, "negative vertex count");
}

int Digraph::add_edge(int tail, int head, std::optional<int> preimage) {
  ATSP_CHECK(tail >= 0 && tail < n_ && head >= 0 && head < n_,
             "edge endpoint out of range");
  int id = num_edges();
  edges_.push_back(Edge{id, tail, head, preimage});
  out_[tail].push_back(id);
  in_[head].push_back(id);
  return id;
}

void EdgeMultiset::add(int edge, std::int64_t count) {
  if (count == 0) return;
  auto& c = counts_[edge];
  c += count;
  ATSP_CHECK(c >= 0, "negative multiplicity");
  if (c == 0) counts_.erase(edge);
}

void EdgeMultiset::add(const EdgeMultiset& other) {
  for (const auto& [e, c] : other.counts_) add(e, c);
}

std::int64_t EdgeMultiset::count(int edge) const {
  auto it = counts_.find(edge);
  return it == counts_.end() ? 0 : it->second;
}

std::int64_t EdgeMultiset::size() const {
  std::int64_t total = 0;
  for (const auto& [e, c] : counts_) total += c;
  return total;
}

VertexSet make_vertex_set(std::vector<int> vs) {
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

bool contains(const VertexSet& s, int v) {
  return std::binary_search(s.begin(), s.end(), v);
}

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

bool is_subset(const VertexSet& a, const VertexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool intersects(const VertexSet& a, const VertexSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

std::vector<char> membership(int n, const VertexSet& s) {
  std::vector<char> in(n, 0);
  for (int v : s) in.at(v) = 1;
  return in;
}

VertexSet all_vertices(int n) {
  VertexSet s(n);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

Rational out_value(const Digraph& g, const EdgeValues& val, const VertexSet& s) {
  auto in = membership(g.num_vertices(), s);
  Rational total = 0;
  for (const Edge& e : g.edges()) {
    if (in[e.tail] && !in[e.head]) total += val[e.id];
  }
  return total;
}

Rational in_value(const Digraph& g, const EdgeValues& val, const VertexSet& s) {
  auto in = membership(g.num_vertices(), s);
  Rational total = 0;
  for (const Edge& e : g.edges()) {
    if (!in[e.tail] && in[e.head]) total += val[e.id];
  }
  return total;
}

Rational cut_value(const Digraph& g, const EdgeValues& val, const VertexSet& s) {
  return out_value(g, val, s) + in_value(g, val, s);
}

Rational multiset_cost(const EdgeMultiset& f, const EdgeValues& w) {
  Rational total = 0;
  for (const auto& [e, c] : f.counts()) total += w.at(e) * c;
  return total;
}

VertexSet multiset_vertices(const Digraph& g, const EdgeMultiset& f) {
  std::vector<int> vs;
  for (const auto& [e, c] : f.counts()) {
    vs.push_back(g.edge(e).tail);
    vs.push_back(g.edge(e).head);
  }
  return make_vertex_set(std::move(vs));
}

std::vector<VertexSet> scc_topological(const Digraph& g, const VertexSet& restrict) {
  if (restrict.empty()) throw SolveError("scc_topological: empty input");
  const int n = g.num_vertices();
  auto in = membership(n, restrict);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  std::vector<VertexSet> comps;
  int counter = 0;

  // Iterative Tarjan; frames hold (vertex, position in its out-edge list).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root : restrict) {
    if (index[root] != -1) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& outs = g.out_edges(v);
      if (pos < outs.size()) {
        int h = g.edge(outs[pos++]).head;
        if (!in[h]) continue;
        if (index[h] == -1) {
          index[h] = low[h] = counter++;
          stack.push_back(h);
          on_stack[h] = 1;
          frames.push_back({h, 0});
        } else if (on_stack[h]) {
          low[v] = std::min(low[v], index[h]);
        }
        continue;
      }
      int done = v;
      frames.pop_back();
      if (!frames.empty()) {
        int parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        VertexSet comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  // Tarjan emits sinks first.
  std::reverse(comps.begin(), comps.end());
  return comps;
}

bool strongly_connected(const Digraph& g, const VertexSet& restrict) {
  if (restrict.empty()) return true;
  return scc_topological(g, restrict).size() == 1;
}

CutResult min_st_cut(const Digraph& g, const EdgeValues& cap, int s, int t) {
  ATSP_CHECK(s != t, "min_st_cut requires s != t");
  const int n = g.num_vertices();
  // Residual arcs come in pairs: 2k forward, 2k+1 backward.
  struct Arc {
    int to;
    Rational res;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : g.edges()) {
    if (sgn(cap[e.id]) <= 0 || e.tail == e.head) continue;
    adj[e.tail].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({e.head, cap[e.id]});
    adj[e.head].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({e.tail, Rational(0)});
  }

  Rational value = 0;
  std::vector<int> via(n);
  std::vector<char> seen(n);
  while (true) {
    std::fill(via.begin(), via.end(), -1);
    std::fill(seen.begin(), seen.end(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty() && !seen[t]) {
      int v = q.front();
      q.pop();
      for (int a : adj[v]) {
        if (sgn(arcs[a].res) > 0 && !seen[arcs[a].to]) {
          seen[arcs[a].to] = 1;
          via[arcs[a].to] = a;
          q.push(arcs[a].to);
        }
      }
    }
    if (!seen[t]) {
      VertexSet side;
      for (int v = 0; v < n; ++v) {
        if (seen[v]) side.push_back(v);
      }
      return {value, side};
    }
    Rational bottleneck = arcs[via[t]].res;
    for (int v = t; v != s; v = arcs[via[v] ^ 1].to) {
      if (arcs[via[v]].res < bottleneck) bottleneck = arcs[via[v]].res;
    }
    for (int v = t; v != s; v = arcs[via[v] ^ 1].to) {
      arcs[via[v]].res -= bottleneck;
      arcs[via[v] ^ 1].res += bottleneck;
    }
    value += bottleneck;
  }
}

namespace {

struct DistKey {
  Rational weight;
  int hops = 0;
  bool operator<(const DistKey& o) const {
    int c = cmp(weight, o.weight);
    return c != 0 ? c < 0 : hops < o.hops;
  }
  bool operator==(const DistKey& o) const {
    return weight == o.weight && hops == o.hops;
  }
};

// Dijkstra on (weight, hops) toward `target` along reversed edges.
std::vector<std::optional<DistKey>> distances_to(const Digraph& g,
                                                 const EdgeValues& w, int target,
                                                 const std::vector<char>& in,
                                                 const std::vector<char>* allowed) {
  const int n = g.num_vertices();
  std::vector<std::optional<DistKey>> dist(n);
  using Item = std::tuple<Rational, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[target] = DistKey{Rational(0), 0};
  pq.push({Rational(0), 0, target});
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [dw, dh, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (int id : g.in_edges(v)) {
      if (allowed && !(*allowed)[id]) continue;
      int u = g.edge(id).tail;
      if (!in[u] || done[u]) continue;
      ATSP_CHECK(sgn(w[id]) >= 0, "shortest_path requires nonnegative weights");
      DistKey cand{dw + w[id], dh + 1};
      if (!dist[u] || cand < *dist[u]) {
        dist[u] = cand;
        pq.push({cand.weight, cand.hops, u});
      }
    }
  }
  return dist;
}

}  // namespace

std::optional<Path> shortest_path(const Digraph& g, const EdgeValues& w, int u,
                                  int v, const VertexSet& restrict,
                                  const std::vector<char>* edge_allowed) {
  auto in = membership(g.num_vertices(), restrict);
  ATSP_CHECK(in.at(u) && in.at(v), "shortest_path endpoints outside restrict");
  if (u == v) return Path{{}, Rational(0)};
  auto dist = distances_to(g, w, v, in, edge_allowed);
  if (!dist[u]) return std::nullopt;
  Path path;
  path.weight = dist[u]->weight;
  int cur = u;
  while (cur != v) {
    int chosen = -1;
    for (int id : g.out_edges(cur)) {
      if (edge_allowed && !(*edge_allowed)[id]) continue;
      int h = g.edge(id).head;
      if (!in[h] || !dist[h]) continue;
      DistKey via{dist[h]->weight + w[id], dist[h]->hops + 1};
      if (via == *dist[cur]) {
        chosen = id;
        break;  // out-edge lists are sorted by id
      }
    }
    ATSP_CHECK(chosen >= 0, "shortest path reconstruction failed");
    path.edges.push_back(chosen);
    cur = g.edge(chosen).head;
  }
  return path;
}

std::vector<std::optional<Rational>> shortest_distances(const Digraph& g,
                                                        const EdgeValues& w,
                                                        int source,
                                                        const VertexSet& restrict) {
  const int n = g.num_vertices();
  auto in = membership(n, restrict);
  std::vector<std::optional<Rational>> dist(n);
  using Item = std::pair<Rational, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[source] = Rational(0);
  pq.push({Rational(0), source});
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (int id : g.out_edges(v)) {
      int h = g.edge(id).head;
      if (!in[h] || done[h]) continue;
      Rational cand = d + w[id];
      if (!dist[h] || cand < *dist[h]) {
        dist[h] = cand;
        pq.push({cand, h});
      }
    }
  }
  return dist;
}

std::vector<int> degree_imbalance(const Digraph& g, const EdgeMultiset& f) {
  std::vector<std::int64_t> bal(g.num_vertices(), 0);
  for (const auto& [e, c] : f.counts()) {
    bal[g.edge(e).tail] += c;
    bal[g.edge(e).head] -= c;
  }
  std::vector<int> bad;
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (bal[v] != 0) bad.push_back(v);
  }
  return bad;
}

std::vector<Subtour> eulerian_components(const Digraph& g, const EdgeMultiset& f) {
  auto bad = degree_imbalance(g, f);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "degree imbalance at vertices";
    for (int v : bad) msg << ' ' << v;
    throw SolveError(msg.str());
  }
  const int n = g.num_vertices();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<char> used(n, 0);
  for (const auto& [e, c] : f.counts()) {
    int a = find(g.edge(e).tail), b = find(g.edge(e).head);
    used[g.edge(e).tail] = used[g.edge(e).head] = 1;
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  // Remaining multiplicity per vertex, scanned in edge-id order.
  std::vector<std::vector<std::pair<int, std::int64_t>>> outs(n);
  for (const auto& [e, c] : f.counts()) outs[g.edge(e).tail].push_back({e, c});
  std::vector<std::size_t> cursor(n, 0);

  std::vector<Subtour> result;
  for (int start = 0; start < n; ++start) {
    if (!used[start] || find(start) != start) continue;
    // `start` is the smallest vertex of its component.
    Subtour st;
    std::vector<std::pair<int, int>> stack{{start, -1}};
    std::vector<int> circuit;
    while (!stack.empty()) {
      int v = stack.back().first;
      auto& list = outs[v];
      std::size_t& cur = cursor[v];
      while (cur < list.size() && list[cur].second == 0) ++cur;
      if (cur < list.size()) {
        --list[cur].second;
        int e = list[cur].first;
        stack.push_back({g.edge(e).head, e});
      } else {
        int e = stack.back().second;
        stack.pop_back();
        if (e >= 0) circuit.push_back(e);
      }
    }
    std::reverse(circuit.begin(), circuit.end());
    st.walk = circuit;
    std::vector<int> vs;
    for (int e : circuit) {
      st.edges.add(e);
      vs.push_back(g.edge(e).tail);
    }
    st.vertices = make_vertex_set(std::move(vs));
    result.push_back(std::move(st));
  }
  return result;
}

std::vector<WeightedCycleEdges> cycle_decomposition(const Digraph& g, const EdgeValues& x) {
  const int n = g.num_vertices();
  ATSP_CHECK(static_cast<int>(x.size()) == g.num_edges(), "flow vector size");
  for (int v = 0; v < n; ++v) {
    Rational bal = 0;
    for (int e : g.out_edges(v)) bal += x[e];
    for (int e : g.in_edges(v)) bal -= x[e];
    if (sgn(bal) != 0) throw SolveError("cycle_decomposition: not a circulation at vertex " + std::to_string(v));
  }
  EdgeValues r = x;
  for (const Rational& v : r) ATSP_CHECK(sgn(v) >= 0, "negative flow");
  std::vector<WeightedCycleEdges> out;
  int next = 0;
  while (true) {
    while (next < g.num_edges() && sgn(r[next]) == 0) ++next;
    if (next == g.num_edges()) break;
    std::vector<int> walk = {next};
    std::vector<int> pos(n, -1);
    pos[g.edge(next).tail] = 0;
    int at = g.edge(next).head;
    while (pos[at] < 0) {
      pos[at] = static_cast<int>(walk.size());
      int pick = -1;
      for (int e : g.out_edges(at)) {
        if (sgn(r[e]) > 0) {
          pick = e;
          break;
        }
      }
      ATSP_CHECK(pick >= 0, "circulation has a dead end");
      walk.push_back(pick);
      at = g.edge(pick).head;
    }
    WeightedCycleEdges c;
    c.edges.assign(walk.begin() + pos[at], walk.end());
    c.weight = r[c.edges[0]];
    for (int e : c.edges) c.weight = std::min(c.weight, r[e]);
    for (int e : c.edges) r[e] -= c.weight;
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<Subtour> min_closed_walk(const Digraph& g, const EdgeValues& w, const VertexSet& u) {
  const int m = static_cast<int>(u.size());
  ATSP_CHECK(m >= 1 && m <= 16, "min_closed_walk supports 1..16 vertices");
  Subtour out;
  out.vertices = u;
  if (m == 1) return out;
  std::vector<std::vector<std::optional<Path>>> sp(m, std::vector<std::optional<Path>>(m));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      sp[a][b] = shortest_path(g, w, u[a], u[b], u);
      if (!sp[a][b]) return std::nullopt;
    }
  }
  const int full = (1 << m) - 1;
  std::vector<std::vector<std::optional<Rational>>> best(1 << m, std::vector<std::optional<Rational>>(m));
  std::vector<std::vector<int>> prev(1 << m, std::vector<int>(m, -1));
  best[1][0] = Rational(0);
  for (int mask = 1; mask <= full; ++mask) {
    if (!(mask & 1)) continue;
    for (int last = 0; last < m; ++last) {
      if (!best[mask][last]) continue;
      for (int nxt = 1; nxt < m; ++nxt) {
        if (mask >> nxt & 1) continue;
        Rational c = *best[mask][last] + sp[last][nxt]->weight;
        int nm = mask | (1 << nxt);
        if (!best[nm][nxt] || c < *best[nm][nxt]) {
          best[nm][nxt] = c;
          prev[nm][nxt] = last;
        }
      }
    }
  }
  int last = -1;
  std::optional<Rational> total;
  for (int v = 1; v < m; ++v) {
    Rational c = *best[full][v] + sp[v][0]->weight;
    if (!total || c < *total) {
      total = c;
      last = v;
    }
  }
  std::vector<int> order;
  for (int mask = full, v = last; v > 0;) {
    order.push_back(v);
    int p = prev[mask][v];
    mask &= ~(1 << v);
    v = p;
  }
  order.push_back(0);
  std::reverse(order.begin(), order.end());
  order.push_back(0);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    for (int e : sp[order[i]][order[i + 1]]->edges) {
      out.walk.push_back(e);
      out.edges.add(e);
    }
  }
  ATSP_CHECK(multiset_cost(out.edges, w) == *total, "closed walk weight mismatch");
  return out;
}

std::vector<int> walk_vertices(const Digraph& g, const std::vector<int>& walk) {
  std::vector<int> vs;
  vs.reserve(walk.size());
  for (int e : walk) vs.push_back(g.edge(e).tail);
  return vs;
}

int FlowNetwork::add_node() {
  supply.push_back(0);
  return num_nodes++;
}

int FlowNetwork::add_arc(int tail, int head, std::int64_t lower, std::int64_t upper,
                         Rational cost) {
  arcs.push_back(FlowArc{tail, head, lower, upper, std::move(cost)});
  return static_cast<int>(arcs.size()) - 1;
}

FlowSolution min_cost_integral_flow(const FlowNetwork& net) {
  const int n = net.num_nodes;
  ATSP_CHECK(static_cast<int>(net.supply.size()) == n, "supply size mismatch");
  std::vector<std::int64_t> supply = net.supply;
  std::vector<std::int64_t> flow(net.arcs.size(), 0);

  const int src = n, snk = n + 1, total = n + 2;
  struct RArc {
    int to;
    std::int64_t cap;
    Rational cost;
    int arc;  // network arc index, or -1 for super arcs
    bool forward;
  };
  std::vector<RArc> ra;
  std::vector<std::vector<int>> adj(total);
  auto add_pair = [&](int a, int b, std::int64_t cap, const Rational& cost, int arc,
                      std::int64_t back_cap) {
    adj[a].push_back(static_cast<int>(ra.size()));
    ra.push_back({b, cap, cost, arc, true});
    adj[b].push_back(static_cast<int>(ra.size()));
    ra.push_back({a, back_cap, -cost, arc, false});
  };

  for (std::size_t i = 0; i < net.arcs.size(); ++i) {
    const FlowArc& a = net.arcs[i];
    ATSP_CHECK(a.lower <= a.upper, "arc lower bound exceeds upper bound");
    std::int64_t cap = a.upper - a.lower;
    supply[a.tail] -= a.lower;
    supply[a.head] += a.lower;
    flow[i] = a.lower;
    if (sgn(a.cost) < 0) {
      ATSP_CHECK(a.upper < kInfiniteCapacity, "negative-cost arc needs finite capacity");
      // Saturate so every residual arc starts with nonnegative cost.
      supply[a.tail] -= cap;
      supply[a.head] += cap;
      flow[i] += cap;
      add_pair(a.tail, a.head, 0, a.cost, static_cast<int>(i), cap);
    } else {
      add_pair(a.tail, a.head, cap, a.cost, static_cast<int>(i), 0);
    }
  }
  std::int64_t required = 0;
  for (int v = 0; v < n; ++v) {
    if (supply[v] > 0) {
      add_pair(src, v, supply[v], Rational(0), -1, 0);
      required += supply[v];
    } else if (supply[v] < 0) {
      add_pair(v, snk, -supply[v], Rational(0), -1, 0);
    }
  }

  std::vector<Rational> pot(total, Rational(0));
  std::int64_t sent = 0;
  while (sent < required) {
    std::vector<std::optional<Rational>> dist(total);
    std::vector<int> via(total, -1);
    using Item = std::pair<Rational, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[src] = Rational(0);
    pq.push({Rational(0), src});
    std::vector<char> done(total, 0);
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (done[v]) continue;
      done[v] = 1;
      for (int id : adj[v]) {
        const RArc& a = ra[id];
        if (a.cap <= 0 || done[a.to]) continue;
        Rational reduced = a.cost + pot[v] - pot[a.to];
        ATSP_CHECK(sgn(reduced) >= 0, "negative reduced cost in residual graph");
        Rational cand = d + reduced;
        if (!dist[a.to] || cand < *dist[a.to]) {
          dist[a.to] = cand;
          via[a.to] = id;
          pq.push({cand, a.to});
        }
      }
    }
    if (!dist[snk]) {
      std::vector<int> cut;
      for (int v = 0; v < n; ++v) {
        if (done[v]) cut.push_back(v);
      }
      throw InfeasibleFlow("min-cost flow infeasible: " + std::to_string(required - sent) +
                               " units of supply cannot reach demand",
                           cut);
    }
    for (int v = 0; v < total; ++v) {
      if (dist[v]) pot[v] += *dist[v];
    }
    std::int64_t push = required - sent;
    for (int v = snk; v != src; v = ra[via[v] ^ 1].to) push = std::min(push, ra[via[v]].cap);
    for (int v = snk; v != src; v = ra[via[v] ^ 1].to) {
      RArc& a = ra[via[v]];
      a.cap -= push;
      ra[via[v] ^ 1].cap += push;
      if (a.arc >= 0) flow[a.arc] += a.forward ? push : -push;
    }
    sent += push;
  }

  FlowSolution sol;
  sol.flow = std::move(flow);
  sol.cost = 0;
  for (std::size_t i = 0; i < net.arcs.size(); ++i) sol.cost += net.arcs[i].cost * sol.flow[i];
  return sol;
}

}  // namespace atsp
