// Runtime support for programs emitted by graphdyn-codegen.
//
// Header-only. Provides graph and update-stream loading, the CSR plus
// diff-CSR dynamic graph, INF-aware arithmetic, the atomic helpers used by
// parallel loops, and the result writers.
#ifndef GRAPHDYN_RT_H
#define GRAPHDYN_RT_H

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>
#ifdef _OPENMP
#include <omp.h>
#endif

namespace rt {

using node_t = int32_t;
using weight_t = int32_t;

constexpr uint32_t SENTINEL = 0xFFFFFFFFu;
constexpr size_t MISSING = SIZE_MAX;
constexpr size_t LOOKUP = SIZE_MAX - 1;

[[noreturn]] inline void fail(const std::string& msg, int code = 3) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(code);
}

[[noreturn]] inline void usage(const std::string& msg) { fail(msg, 1); }

// ---- values ----

template <class T>
inline T inf() {
  if constexpr (std::is_same_v<T, bool>) {
    return true;
  } else {
    return std::numeric_limits<T>::max();
  }
}

template <class T>
inline T clamp128(__int128 x) {
  const __int128 lo = std::numeric_limits<T>::min();
  const __int128 hi = std::numeric_limits<T>::max();
  return static_cast<T>(x < lo ? lo : (x > hi ? hi : x));
}

template <class T>
inline T add(T a, T b) {
  if (a == inf<T>() || b == inf<T>()) return inf<T>();
  if constexpr (std::is_integral_v<T>) {
    return clamp128<T>(static_cast<__int128>(a) + b);
  } else {
    return a + b;
  }
}

template <class T>
inline T sub(T a, T b) {
  if (a == inf<T>() || b == inf<T>()) return inf<T>();
  if constexpr (std::is_integral_v<T>) {
    return clamp128<T>(static_cast<__int128>(a) - b);
  } else {
    return a - b;
  }
}

template <class T>
inline T mul(T a, T b) {
  if constexpr (std::is_integral_v<T>) {
    return clamp128<T>(static_cast<__int128>(a) * b);
  } else {
    return a * b;
  }
}

template <class T>
inline T div(T a, T b) {
  if (b == 0) fail("division by zero");
  if constexpr (std::is_integral_v<T>) {
    return clamp128<T>(static_cast<__int128>(a) / b);
  } else {
    return a / b;
  }
}

template <class T>
inline T rem(T a, T b) {
  if (b == 0) fail("remainder by zero");
  if constexpr (std::is_integral_v<T>) {
    return clamp128<T>(static_cast<__int128>(a) % b);
  } else {
    return std::fmod(a, b);
  }
}

template <class T>
inline T neg(T a) {
  if constexpr (std::is_integral_v<T>) {
    return clamp128<T>(-static_cast<__int128>(a));
  } else {
    return -a;
  }
}

template <class T>
inline T abs_(T a) {
  if constexpr (std::is_integral_v<T>) {
    __int128 x = a;
    return clamp128<T>(x < 0 ? -x : x);
  } else {
    return std::fabs(a);
  }
}

// Numeric conversion that keeps INF as INF and saturates integers.
template <class To, class From>
inline To cvt(From v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else {
    if (v == inf<From>()) return inf<To>();
    if constexpr (std::is_integral_v<To>) {
      if constexpr (std::is_floating_point_v<From>) {
        if (std::isnan(v)) return 0;
        if (v <= static_cast<From>(std::numeric_limits<To>::min())) return std::numeric_limits<To>::min();
        if (v >= static_cast<From>(std::numeric_limits<To>::max())) return std::numeric_limits<To>::max();
        return static_cast<To>(v);
      } else {
        return clamp128<To>(static_cast<__int128>(v));
      }
    } else {
      return static_cast<To>(static_cast<double>(v));
    }
  }
}

// ---- atomics ----

template <class T>
inline T atomic_load(const T* p) {
  T x;
  __atomic_load(p, &x, __ATOMIC_RELAXED);
  return x;
}

template <class T, class V>
inline void atomic_store(T* p, V v) {
  T x = static_cast<T>(v);
  __atomic_store(p, &x, __ATOMIC_RELAXED);
}

template <class T, class V>
inline void atomic_add(T* p, V v) {
  const T d = static_cast<T>(v);
  T old = atomic_load(p);
  T next = add<T>(old, d);
  while (!__atomic_compare_exchange(p, &old, &next, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)) {
    next = add<T>(old, d);
  }
}

template <class T, class V>
inline void atomic_sub(T* p, V v) {
  const T d = static_cast<T>(v);
  T old = atomic_load(p);
  T next = sub<T>(old, d);
  while (!__atomic_compare_exchange(p, &old, &next, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)) {
    next = sub<T>(old, d);
  }
}

// Lock guarding the companion writes of a multi-target Min/Max.
inline std::mutex& stripe(const void* p) {
  static std::mutex locks[64];
  return locks[(reinterpret_cast<uintptr_t>(p) >> 3) % 64];
}

// ---- edges and updates ----

struct Edge {
  node_t source = 0;
  node_t destination = 0;
  weight_t weight = 0;
  // Flat forward slot, or MISSING, or LOOKUP when only the endpoints are known.
  size_t id = MISSING;
};

inline weight_t weight(const Edge& e) {
  if (e.id == MISSING) {
    fail("weight of a missing edge " + std::to_string(e.source) + " -> " + std::to_string(e.destination));
  }
  return e.weight;
}

inline std::pair<node_t, node_t> key(const Edge& e) { return {e.source, e.destination}; }

struct Update {
  bool del = false;
  node_t source = 0;
  node_t destination = 0;
  weight_t weight = 0;

  bool is_delete() const { return del; }
  bool is_add() const { return !del; }
  Edge edge() const { return Edge{source, destination, weight, LOOKUP}; }
};

struct Window {
  const Update* data = nullptr;
  size_t len = 0;

  size_t size() const { return len; }
  const Update& operator[](size_t i) const { return data[i]; }
  const Update* begin() const { return data; }
  const Update* end() const { return data + len; }
};

struct Updates {
  std::vector<Update> records;
  size_t lo = 0;
  size_t hi = 0;
  bool open = false;

  void enter(size_t a, size_t b) {
    lo = a;
    hi = b;
    open = true;
  }
  void leave() { open = false; }
  Window window() const {
    if (!open) fail("the current batch is only defined inside a Batch block");
    return Window{records.data() + lo, hi - lo};
  }
};

// ---- CSR segments ----

struct Arc {
  node_t u;
  node_t v;
  weight_t w;
};

struct Csr {
  std::vector<size_t> offsets;
  std::vector<uint32_t> coords;
  std::vector<weight_t> weights;

  size_t len() const { return coords.size(); }

  size_t sentinels() const {
    return static_cast<size_t>(std::count(coords.begin(), coords.end(), SENTINEL));
  }

  // Counting sort on the row; entries of one row keep their order.
  static Csr from_entries(size_t rows, const std::vector<Arc>& entries) {
    Csr c;
    c.offsets.assign(rows + 1, 0);
    for (const Arc& a : entries) c.offsets[static_cast<size_t>(a.u) + 1]++;
    for (size_t i = 0; i < rows; ++i) c.offsets[i + 1] += c.offsets[i];
    std::vector<size_t> cursor(c.offsets.begin(), c.offsets.end() - 1);
    c.coords.assign(entries.size(), SENTINEL);
    c.weights.assign(entries.size(), 0);
    for (const Arc& a : entries) {
      size_t at = cursor[a.u]++;
      c.coords[at] = static_cast<uint32_t>(a.v);
      c.weights[at] = a.w;
    }
    return c;
  }
};

struct Adjacency;

// Live edges of one row: main segment first, then deltas oldest-first.
struct NbrIter {
  const Adjacency* adj;
  node_t row;
  bool flipped;
  bool fwd_ids;
  size_t seg;
  size_t cur;
  size_t end;
  Edge e;

  inline void settle();
  const Edge& operator*() const { return e; }
  NbrIter& operator++() {
    ++cur;
    settle();
    return *this;
  }
  bool operator!=(const NbrIter& o) const { return seg != o.seg; }
};

struct NbrRange {
  NbrIter first;
  NbrIter last;
  NbrIter begin() const { return first; }
  NbrIter end() const { return last; }
};

struct Adjacency {
  size_t rows = 0;
  std::vector<Csr> segs;
  std::vector<size_t> starts;
  std::vector<uint32_t> degrees;
  size_t live = 0;

  void build(size_t n, const std::vector<Arc>& arcs) {
    rows = n;
    segs.assign(1, Csr::from_entries(n, arcs));
    starts.assign(1, 0);
    degrees.assign(n, 0);
    for (size_t r = 0; r < n; ++r) {
      degrees[r] = static_cast<uint32_t>(segs[0].offsets[r + 1] - segs[0].offsets[r]);
    }
    live = arcs.size();
  }

  size_t slot_count() const { return starts.back() + segs.back().len(); }

  size_t sentinel_count() const {
    size_t s = 0;
    for (const Csr& c : segs) s += c.sentinels();
    return s;
  }

  NbrRange range(node_t v, bool flipped, bool fwd_ids) const {
    NbrIter b{this, v, flipped, fwd_ids, 0, segs[0].offsets[v], segs[0].offsets[v + 1], Edge{}};
    b.settle();
    NbrIter e{this, v, flipped, fwd_ids, segs.size(), 0, 0, Edge{}};
    return NbrRange{b, e};
  }

  bool find(node_t u, node_t t, Edge* out) const {
    for (const Edge& e : range(u, false, true)) {
      if (e.destination == t) {
        *out = e;
        return true;
      }
    }
    return false;
  }

  size_t release_one(node_t u, node_t t) {
    for (size_t s = 0; s < segs.size(); ++s) {
      Csr& c = segs[s];
      for (size_t i = c.offsets[u]; i < c.offsets[u + 1]; ++i) {
        if (c.coords[i] == static_cast<uint32_t>(t)) {
          c.coords[i] = SENTINEL;
          degrees[u]--;
          __atomic_fetch_sub(&live, 1, __ATOMIC_RELAXED);
          return starts[s] + i;
        }
      }
    }
    return MISSING;
  }

  size_t claim_one(node_t u, node_t t, weight_t w) {
    for (size_t s = 0; s < segs.size(); ++s) {
      Csr& c = segs[s];
      for (size_t i = c.offsets[u]; i < c.offsets[u + 1]; ++i) {
        if (c.coords[i] == SENTINEL) {
          c.coords[i] = static_cast<uint32_t>(t);
          c.weights[i] = w;
          degrees[u]++;
          __atomic_fetch_add(&live, 1, __ATOMIC_RELAXED);
          return starts[s] + i;
        }
      }
    }
    return MISSING;
  }

  // Indices of `arcs` stably sorted by source, cut into same-source runs.
  template <class A>
  static std::vector<std::vector<size_t>> groups(const std::vector<A>& arcs) {
    std::vector<size_t> order(arcs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return arcs[a].u < arcs[b].u; });
    std::vector<std::vector<size_t>> out;
    for (size_t k = 0; k < order.size(); ++k) {
      if (k == 0 || arcs[order[k]].u != arcs[order[k - 1]].u) out.emplace_back();
      out.back().push_back(order[k]);
    }
    return out;
  }

  // Sentinels one matching slot per arc; MISSING marks a miss. Arcs of one
  // source are handled in input order by one thread.
  std::vector<size_t> delete_arcs(const std::vector<Arc>& arcs) {
    std::vector<size_t> out(arcs.size(), MISSING);
    auto gs = groups(arcs);
#pragma omp parallel for schedule(dynamic, 16)
    for (size_t k = 0; k < gs.size(); ++k) {
      for (size_t i : gs[k]) out[i] = release_one(arcs[i].u, arcs[i].v);
    }
    return out;
  }

  // Claims vacancies first; leftovers form one new delta segment.
  std::vector<size_t> add_arcs(const std::vector<Arc>& arcs, bool* new_delta) {
    std::vector<size_t> out(arcs.size(), MISSING);
    auto gs = groups(arcs);
#pragma omp parallel for schedule(dynamic, 16)
    for (size_t k = 0; k < gs.size(); ++k) {
      for (size_t i : gs[k]) out[i] = claim_one(arcs[i].u, arcs[i].v, arcs[i].w);
    }
    std::vector<size_t> overflow;
    for (size_t i = 0; i < arcs.size(); ++i) {
      if (out[i] == MISSING) overflow.push_back(i);
    }
    *new_delta = !overflow.empty();
    if (overflow.empty()) return out;
    std::vector<Arc> entries;
    entries.reserve(overflow.size());
    for (size_t i : overflow) entries.push_back(arcs[i]);
    Csr delta = Csr::from_entries(rows, entries);
    size_t start = slot_count();
    std::vector<size_t> cursor(delta.offsets.begin(), delta.offsets.end() - 1);
    for (size_t k = 0; k < overflow.size(); ++k) {
      size_t row = static_cast<size_t>(entries[k].u);
      out[overflow[k]] = start + cursor[row]++;
      degrees[row]++;
    }
    live += overflow.size();
    starts.push_back(start);
    segs.push_back(std::move(delta));
    return out;
  }

  // Folds deltas and sentinels into one compact segment. Returns false
  // when already compact; otherwise fills the old-to-new slot map.
  bool merge(std::vector<size_t>* map, size_t* new_len) {
    if (segs.size() == 1 && segs[0].sentinels() == 0) return false;
    map->assign(slot_count(), MISSING);
    std::vector<Arc> entries;
    entries.reserve(live);
    for (size_t r = 0; r < rows; ++r) {
      for (const Edge& e : range(static_cast<node_t>(r), false, true)) {
        (*map)[e.id] = entries.size();
        entries.push_back(Arc{static_cast<node_t>(r), e.destination, e.weight});
      }
    }
    *new_len = entries.size();
    segs.assign(1, Csr::from_entries(rows, entries));
    starts.assign(1, 0);
    return true;
  }
};

inline void NbrIter::settle() {
  while (true) {
    if (cur < end) {
      const Csr& c = adj->segs[seg];
      uint32_t t = c.coords[cur];
      if (t == SENTINEL) {
        ++cur;
        continue;
      }
      node_t other = static_cast<node_t>(t);
      e.source = flipped ? other : row;
      e.destination = flipped ? row : other;
      e.weight = c.weights[cur];
      e.id = fwd_ids ? adj->starts[seg] + cur : LOOKUP;
      return;
    }
    if (++seg >= adj->segs.size()) return;
    cur = adj->segs[seg].offsets[row];
    end = adj->segs[seg].offsets[row + 1];
  }
}

// ---- the dynamic graph ----

// Per-slot storage kept aligned with the forward slot space.
struct EdgeTable {
  virtual void grow(size_t len, const std::vector<size_t>& claimed) = 0;
  virtual void remap(const std::vector<size_t>& map, size_t new_len) = 0;
  virtual ~EdgeTable() = default;
};

struct Graph {
  size_t n = 0;
  bool directed = true;
  size_t merge_interval = 1;
  size_t since_merge = 0;
  Adjacency fwd;
  Adjacency rev;
  std::vector<EdgeTable*> tables;

  // Undirected edges become two arcs, self-loops one. Directed graphs keep
  // a reverse adjacency for in-edge queries.
  void build(size_t nodes, const std::vector<Arc>& edges, bool is_directed) {
    n = nodes;
    directed = is_directed;
    std::vector<Arc> arcs;
    arcs.reserve(edges.size() * (directed ? 1 : 2));
    for (const Arc& a : edges) {
      arcs.push_back(a);
      if (!directed && a.u != a.v) arcs.push_back(Arc{a.v, a.u, a.w});
    }
    fwd.build(n, arcs);
    if (directed) {
      std::vector<Arc> back;
      back.reserve(edges.size());
      for (const Arc& a : edges) back.push_back(Arc{a.v, a.u, a.w});
      rev.build(n, back);
    }
  }

  int32_t num_nodes() const { return static_cast<int32_t>(n); }

  int32_t num_edges() const {
    return static_cast<int32_t>(std::min<size_t>(fwd.live, static_cast<size_t>(INT32_MAX)));
  }

  node_t ck(int64_t v) const {
    if (v < 0 || static_cast<uint64_t>(v) >= n) {
      fail("node " + std::to_string(v) + " is out of range for " + std::to_string(n) + " nodes");
    }
    return static_cast<node_t>(v);
  }

  int32_t degree(int64_t v) const { return static_cast<int32_t>(fwd.degrees[ck(v)]); }

  int32_t in_degree(int64_t v) const {
    return static_cast<int32_t>(directed ? rev.degrees[ck(v)] : fwd.degrees[ck(v)]);
  }

  NbrRange out(int64_t v) const { return fwd.range(ck(v), false, true); }

  NbrRange in(int64_t v) const { return directed ? rev.range(ck(v), true, false) : fwd.range(ck(v), true, true); }

  std::vector<Edge> out_list(int64_t v) const {
    std::vector<Edge> out;
    for (const Edge& e : this->out(v)) out.push_back(e);
    return out;
  }

  std::vector<Edge> in_list(int64_t v) const {
    std::vector<Edge> out;
    for (const Edge& e : in(v)) out.push_back(e);
    return out;
  }

  Edge get_edge(int64_t u, int64_t v) const {
    Edge e{ck(u), ck(v), 0, MISSING};
    fwd.find(e.source, e.destination, &e);
    return e;
  }

  bool is_an_edge(int64_t u, int64_t v) const {
    Edge e;
    return fwd.find(ck(u), ck(v), &e);
  }

  size_t slot(const Edge& e) const {
    if (e.id == LOOKUP) {
      Edge f;
      if (fwd.find(e.source, e.destination, &f)) return f.id;
    } else if (e.id != MISSING) {
      return e.id;
    }
    fail("there is no edge " + std::to_string(e.source) + " -> " + std::to_string(e.destination));
  }

  void check(const Window& w) const {
    for (const Update& u : w) {
      if (static_cast<size_t>(u.source) >= n || static_cast<size_t>(u.destination) >= n) {
        fail("update " + std::to_string(u.source) + " " + std::to_string(u.destination) + " names a node outside the graph");
      }
    }
  }

  // Deletes of an undirected edge target the min -> max arc first; the twin
  // is removed only when that hit.
  void update_csr_del(const Window& w) {
    check(w);
    std::vector<Arc> arcs;
    std::vector<const Update*> dels;
    for (const Update& u : w) {
      if (!u.is_delete()) continue;
      dels.push_back(&u);
      node_t a = u.source, b = u.destination;
      if (!directed && b < a) std::swap(a, b);
      arcs.push_back(Arc{a, b, 0});
    }
    std::vector<size_t> hit = fwd.delete_arcs(arcs);
    std::vector<Arc> twins;
    std::vector<Arc> back;
    for (size_t i = 0; i < dels.size(); ++i) {
      if (hit[i] == MISSING) continue;
      if (!directed && arcs[i].u != arcs[i].v) twins.push_back(Arc{arcs[i].v, arcs[i].u, 0});
      back.push_back(Arc{dels[i]->destination, dels[i]->source, 0});
    }
    if (!twins.empty()) fwd.delete_arcs(twins);
    if (directed) rev.delete_arcs(back);
  }

  void update_csr_add(const Window& w) {
    check(w);
    std::vector<Arc> arcs;
    std::vector<Arc> back;
    for (const Update& u : w) {
      if (!u.is_add()) continue;
      arcs.push_back(Arc{u.source, u.destination, u.weight});
      if (!directed && u.source != u.destination) arcs.push_back(Arc{u.destination, u.source, u.weight});
      back.push_back(Arc{u.destination, u.source, u.weight});
    }
    bool fresh = false;
    std::vector<size_t> claimed = fwd.add_arcs(arcs, &fresh);
    if (directed) rev.add_arcs(back, &fresh);
    size_t len = fwd.slot_count();
    for (EdgeTable* t : tables) t->grow(len, claimed);
  }

  void finish_batch() {
    if (++since_merge < merge_interval) return;
    since_merge = 0;
    std::vector<size_t> map;
    size_t len = 0;
    if (directed) rev.merge(&map, &len);
    if (fwd.merge(&map, &len)) {
      for (EdgeTable* t : tables) t->remap(map, len);
    }
  }

  // Logical edges; undirected edges once with source <= destination.
  std::vector<std::tuple<node_t, node_t, weight_t>> edges() const {
    std::vector<std::tuple<node_t, node_t, weight_t>> out;
    for (size_t u = 0; u < n; ++u) {
      for (const Edge& e : this->out(static_cast<int64_t>(u))) {
        if (directed || e.source <= e.destination) out.emplace_back(e.source, e.destination, e.weight);
      }
    }
    return out;
  }
};

// ---- properties ----

template <class T>
struct NodeProp {
  const Graph* g;
  std::vector<T> cur;
  std::vector<T> nxt;

  explicit NodeProp(const Graph& graph) : g(&graph), cur(graph.n, T()), nxt(graph.n, T()) {}
  NodeProp(const NodeProp&) = delete;
  NodeProp& operator=(const NodeProp&) = delete;

  T& at(int64_t v) { return cur[g->ck(v)]; }
  T& nxt_at(int64_t v) { return nxt[g->ck(v)]; }
};

template <class T>
struct EdgeProp : EdgeTable {
  Graph* g;
  std::vector<T> cur;
  std::vector<T> nxt;

  explicit EdgeProp(Graph& graph) : g(&graph), cur(graph.fwd.slot_count(), T()), nxt(graph.fwd.slot_count(), T()) {
    g->tables.push_back(this);
  }
  ~EdgeProp() override { g->tables.erase(std::find(g->tables.begin(), g->tables.end(), this)); }
  EdgeProp(const EdgeProp&) = delete;
  EdgeProp& operator=(const EdgeProp&) = delete;

  T& at(const Edge& e) { return cur[g->slot(e)]; }
  T& nxt_at(const Edge& e) { return nxt[g->slot(e)]; }

  void grow(size_t len, const std::vector<size_t>& claimed) override {
    cur.resize(len, T());
    nxt.resize(len, T());
    for (size_t s : claimed) {
      cur[s] = T();
      nxt[s] = T();
    }
  }

  void remap(const std::vector<size_t>& map, size_t new_len) override {
    for (std::vector<T>* v : {&cur, &nxt}) {
      std::vector<T> moved(new_len, T());
      for (size_t o = 0; o < map.size() && o < v->size(); ++o) {
        if (map[o] != MISSING) moved[map[o]] = (*v)[o];
      }
      v->swap(moved);
    }
  }
};

template <class T, class V>
inline void fill(std::vector<T>& v, V value) {
  const T x = static_cast<T>(value);
#pragma omp parallel for schedule(static) if (v.size() > 65536)
  for (size_t i = 0; i < v.size(); ++i) v[i] = x;
}

template <class T>
inline void copy(std::vector<T>& dst, const std::vector<T>& src) {
  dst = src;
}

// base <- next, next <- zero: the end of a fixedPoint iteration.
template <class T>
inline void advance(std::vector<T>& base, std::vector<T>& next) {
#pragma omp parallel for schedule(static) if (base.size() > 65536)
  for (size_t i = 0; i < base.size(); ++i) {
    base[i] = next[i];
    next[i] = T();
  }
}

template <class T>
inline bool any(const std::vector<T>& v) {
  for (const T& x : v) {
    if (x != T()) return true;
  }
  return false;
}

// Sets the flag of every node weakly connected to a flagged node.
template <class T>
inline void propagate(const Graph& g, std::vector<T>& flags) {
  std::vector<node_t> frontier;
  for (size_t v = 0; v < g.n; ++v) {
    if (flags[v] != T()) frontier.push_back(static_cast<node_t>(v));
  }
  while (!frontier.empty()) {
    std::vector<node_t> next;
    for (node_t v : frontier) {
      for (const Edge& e : g.out(v)) {
        if (flags[e.destination] == T()) {
          flags[e.destination] = static_cast<T>(1);
          next.push_back(e.destination);
        }
      }
      if (g.directed) {
        for (const Edge& e : g.in(v)) {
          if (flags[e.source] == T()) {
            flags[e.source] = static_cast<T>(1);
            next.push_back(e.source);
          }
        }
      }
    }
    std::sort(next.begin(), next.end());
    frontier.swap(next);
  }
}

// ---- iteration cap ----

inline uint64_t& cap() {
  static uint64_t c = 10;
  return c;
}

[[noreturn]] inline void cap_exceeded(int line) {
  fail("fixedPoint at line " + std::to_string(line) + " did not converge within " + std::to_string(cap()) + " iterations");
}

// ---- command line and files ----

inline std::string strip(const std::string& line) {
  std::string s = line.substr(0, line.find('#'));
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool parse_i64(const std::string& s, int64_t* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || *end != '\0') return false;
  *out = v;
  return true;
}

inline bool parse_node(const std::string& s, node_t* out) {
  int64_t v = 0;
  if (!parse_i64(s, &v) || v < 0 || v >= static_cast<int64_t>(SENTINEL)) return false;
  if (v > INT32_MAX) return false;
  *out = static_cast<node_t>(v);
  return true;
}

struct Args {
  std::string graph;
  std::string updates;
  std::string out;
  bool undirected = false;
  int64_t nodes = -1;
  int64_t threads = 0;
  int64_t merge_interval = 1;
  int64_t iteration_cap = -1;
  std::map<std::string, std::string> inputs;

  Args(int argc, char** argv) {
    auto value = [&](int& i) -> std::string {
      if (i + 1 >= argc) usage(std::string("missing value for ") + argv[i]);
      return argv[++i];
    };
    auto number = [&](int& i) -> int64_t {
      std::string flag = argv[i];
      int64_t v = 0;
      if (!parse_i64(value(i), &v)) usage("bad number for " + flag);
      return v;
    };
    for (int i = 1; i < argc; ++i) {
      std::string a = argv[i];
      if (a == "--updates") {
        updates = value(i);
      } else if (a == "--out") {
        out = value(i);
      } else if (a == "--undirected") {
        undirected = true;
      } else if (a == "--nodes") {
        nodes = number(i);
      } else if (a == "--threads") {
        threads = number(i);
      } else if (a == "--merge-interval") {
        merge_interval = number(i);
      } else if (a == "--iteration-cap") {
        iteration_cap = number(i);
      } else if (a == "--set") {
        std::string kv = value(i);
        size_t eq = kv.find('=');
        if (eq == std::string::npos) usage("--set expects name=value, got " + kv);
        inputs[kv.substr(0, eq)] = kv.substr(eq + 1);
      } else if (!a.empty() && a[0] == '-') {
        usage("unknown flag " + a);
      } else if (graph.empty()) {
        graph = a;
      } else {
        usage("unexpected argument " + a);
      }
    }
    if (graph.empty()) usage("missing graph file");
    if (merge_interval <= 0) usage("--merge-interval must be positive");
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(static_cast<int>(threads));
#endif
  }

  const std::string& raw(const char* name) const {
    auto it = inputs.find(name);
    if (it == inputs.end()) usage(std::string("missing input `") + name + "` (pass --set " + name + "=VALUE)");
    return it->second;
  }

  template <class T>
  T scalar(const char* name) const {
    const std::string& s = raw(name);
    if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "True" || s == "1") return true;
      if (s == "false" || s == "False" || s == "0") return false;
      usage(std::string("input `") + name + "` is not a bool");
    } else if constexpr (std::is_integral_v<T>) {
      int64_t v = 0;
      if (!parse_i64(s, &v) || v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max()) {
        usage(std::string("input `") + name + "` is not a valid integer");
      }
      return static_cast<T>(v);
    } else {
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (s.empty() || *end != '\0') usage(std::string("input `") + name + "` is not a number");
      return static_cast<T>(v);
    }
  }

  node_t node(const char* name, const Graph& g) const {
    int64_t v = scalar<int64_t>(name);
    if (v < 0 || static_cast<uint64_t>(v) >= g.n) usage(std::string("input `") + name + "` is not a node of the graph");
    return static_cast<node_t>(v);
  }
};

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// `src dst [weight]` per line; node count is 1 + max id unless overridden.
inline void load_graph(const Args& a, Graph* g) {
  std::vector<Arc> edges;
  int64_t max_id = -1;
  std::vector<std::string> lines = read_lines(a.graph);
  for (size_t k = 0; k < lines.size(); ++k) {
    std::string s = strip(lines[k]);
    if (s.empty()) continue;
    std::istringstream fs(s);
    std::vector<std::string> f;
    std::string tok;
    while (fs >> tok) f.push_back(tok);
    std::string where = a.graph + ":" + std::to_string(k + 1);
    if (f.size() < 2 || f.size() > 3) fail(where + ": expected 2 or 3 fields");
    Arc e{0, 0, 1};
    if (!parse_node(f[0], &e.u) || !parse_node(f[1], &e.v)) fail(where + ": bad node id");
    if (f.size() == 3) {
      int64_t w = 0;
      if (!parse_i64(f[2], &w) || w < INT32_MIN || w > INT32_MAX) fail(where + ": bad weight");
      if (w < 0) fail(where + ": negative weight");
      e.w = static_cast<weight_t>(w);
    }
    max_id = std::max<int64_t>(max_id, std::max(e.u, e.v));
    edges.push_back(e);
  }
  int64_t n = a.nodes >= 0 ? a.nodes : max_id + 1;
  if (max_id >= n) fail("edge endpoint " + std::to_string(max_id) + " is out of range for " + std::to_string(n) + " nodes");
  g->merge_interval = static_cast<size_t>(a.merge_interval);
  g->build(static_cast<size_t>(n), edges, !a.undirected);
  cap() = a.iteration_cap >= 0 ? static_cast<uint64_t>(a.iteration_cap) : std::max<uint64_t>(10 * g->n, 10);
}

// `a <src> <dst> [weight]` or `d <src> <dst>` per line.
inline void load_updates(const Args& a, const Graph& g, Updates* u) {
  if (a.updates.empty()) usage("this program needs --updates");
  std::vector<std::string> lines = read_lines(a.updates);
  for (size_t k = 0; k < lines.size(); ++k) {
    std::string s = strip(lines[k]);
    if (s.empty()) continue;
    std::istringstream fs(s);
    std::vector<std::string> f;
    std::string tok;
    while (fs >> tok) f.push_back(tok);
    std::string where = a.updates + ":" + std::to_string(k + 1);
    Update r;
    if (f[0] == "a") {
      if (f.size() < 3 || f.size() > 4) fail(where + ": malformed add record");
      r.weight = 1;
      if (f.size() == 4) {
        int64_t w = 0;
        if (!parse_i64(f[3], &w) || w < INT32_MIN || w > INT32_MAX) fail(where + ": bad weight");
        r.weight = static_cast<weight_t>(w);
      }
    } else if (f[0] == "d") {
      if (f.size() != 3) fail(where + ": malformed delete record");
      r.del = true;
    } else {
      fail(where + ": unknown record tag " + f[0]);
    }
    if (!parse_node(f[1], &r.source) || !parse_node(f[2], &r.destination)) fail(where + ": bad node id");
    if (static_cast<size_t>(r.source) >= g.n || static_cast<size_t>(r.destination) >= g.n) {
      fail(where + ": node outside the graph");
    }
    u->records.push_back(r);
  }
}

// ---- results ----

inline std::string fmt(bool v) { return v ? "True" : "False"; }
inline std::string fmt(uint8_t v) { return v ? "True" : "False"; }
inline std::string fmt(int32_t v) { return std::to_string(v); }
inline std::string fmt(int64_t v) { return std::to_string(v); }

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(float v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

inline std::string fmt(const Edge& e) { return std::to_string(e.source) + "->" + std::to_string(e.destination); }

// With --out DIR every node property goes to DIR/<name>.csv and returned
// values to DIR/scalars.csv; otherwise the first of them goes to stdout.
struct Output {
  std::string dir;
  bool printed = false;
  std::vector<std::pair<std::string, std::string>> scalars;

  explicit Output(const Args& a) : dir(a.out) {}

  void emit(const std::string& name, const std::string& body) {
    if (dir.empty()) {
      if (!printed) std::fputs(body.c_str(), stdout);
      printed = true;
      return;
    }
    std::string path = dir + "/" + name;
    std::ofstream f(path);
    if (!f) fail("cannot write " + path);
    f << body;
  }

  template <class T>
  void node_prop(const char* name, const std::vector<T>& v) {
    std::string body = "node,value\n";
    for (size_t i = 0; i < v.size(); ++i) body += std::to_string(i) + "," + fmt(v[i]) + "\n";
    emit(std::string(name) + ".csv", body);
  }

  template <class T>
  void scalar(const char* name, const T& v) {
    scalars.emplace_back(name, fmt(v));
  }

  void finish() {
    if (scalars.empty()) return;
    std::string body = "name,value\n";
    for (auto& kv : scalars) body += kv.first + "," + kv.second + "\n";
    emit("scalars.csv", body);
  }
};

}  // namespace rt

#endif
