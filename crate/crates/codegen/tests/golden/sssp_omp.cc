// Generated by graphdyn-codegen 0.1.0 from sssp.sp. Do not edit.
#include "graphdyn_rt.h"

namespace prog {

void staticSSSP(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& modified, int32_t src);
void fixParents(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& touched, int32_t src);
void Decremental(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& modified, rt::NodeProp<uint8_t>& affected, int32_t src);
void Incremental(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& modified, int32_t src);
void DynSSSP(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::Updates& updateBatch, int32_t batchSize, int32_t src);

void staticSSSP(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& modified, int32_t src) {
  rt::fill(dist.cur, rt::inf<int32_t>());
  rt::fill(parent.cur, -1);
  rt::fill(modified.cur, false);
  rt::fill(modified.nxt, false);
  dist.at(src) = 0;
  modified.at(src) = true;
  {
    bool finished = false;
    uint64_t _g1 = 0;
    while (true) {
      finished = !rt::any(modified.cur);
      if (finished) break;
      if (_g1 >= rt::cap()) rt::cap_exceeded(7);
      #pragma omp parallel for schedule(dynamic, 64)
      for (int32_t v = 0; v < g.num_nodes(); ++v) {
        if (!((modified.at(v) != 0) == true)) continue;
        for (const rt::Edge& _g2 : g.out(v)) {
          const int32_t nbr = _g2.destination;
          rt::Edge e = _g2;
          {
            int32_t _g3 = rt::add<int32_t>(dist.at(v), rt::weight(e));
            uint8_t _g4 = true;
            std::lock_guard<std::mutex> _g5(rt::stripe(&dist.at(nbr)));
            int32_t* const _g6 = &dist.at(nbr);
            int32_t _g7 = rt::atomic_load(_g6);
            bool _g8 = false;
            while (_g3 < _g7) {
              if (__atomic_compare_exchange(_g6, &_g7, &_g3, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)) {  // line 11
                _g8 = true;
                break;
              }
            }
            if (_g8) {
              rt::atomic_store(&modified.nxt_at(nbr), _g4);
            }
          }
        }
      }
      rt::advance(modified.cur, modified.nxt);
      ++_g1;
    }
  }
  rt::fill(modified.cur, true);
  fixParents(g, dist, parent, modified, src);
  rt::fill(modified.cur, false);
}

void fixParents(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& touched, int32_t src) {
  #pragma omp parallel for schedule(dynamic, 64)
  for (int32_t v = 0; v < g.num_nodes(); ++v) {
    if (!((touched.at(v) != 0) == true)) continue;
    int32_t best = -1;
    if ((v != src) && (dist.at(v) != rt::inf<int32_t>())) {
      for (const rt::Edge& _g1 : g.in(v)) {
        const int32_t u = _g1.source;
        rt::Edge e = _g1;
        if (((dist.at(u) != rt::inf<int32_t>()) && (rt::add<int32_t>(dist.at(u), rt::weight(e)) == dist.at(v))) && ((best == (-1)) || (u < best))) {
          best = u;
        }
      }
    }
    parent.at(v) = best;
  }
}

void Decremental(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& modified, rt::NodeProp<uint8_t>& affected, int32_t src) {
  bool grew = true;
  while (grew) {
    grew = false;
    #pragma omp parallel for schedule(dynamic, 64)
    for (int32_t v = 0; v < g.num_nodes(); ++v) {
      if (!((affected.at(v) != 0) == false)) continue;
      int32_t p = parent.at(v);
      if (p != (-1)) {
        int32_t pn = p;
        if ((affected.at(pn) != 0) == true) {
          dist.at(v) = rt::inf<int32_t>();
          parent.at(v) = -1;
          modified.at(v) = true;
          affected.at(v) = true;
          rt::atomic_store(&grew, true);  // line 51
        }
      }
    }
  }
  rt::fill(modified.nxt, false);
  {
    bool finished = false;
    uint64_t _g1 = 0;
    while (true) {
      finished = !rt::any(modified.cur);
      if (finished) break;
      if (_g1 >= rt::cap()) rt::cap_exceeded(57);
      #pragma omp parallel for schedule(dynamic, 64)
      for (int32_t v = 0; v < g.num_nodes(); ++v) {
        if (!((modified.at(v) != 0) == true)) continue;
        int32_t best = dist.at(v);
        for (const rt::Edge& _g2 : g.in(v)) {
          const int32_t u = _g2.source;
          rt::Edge e = _g2;
          if ((dist.at(u) != rt::inf<int32_t>()) && (rt::add<int32_t>(dist.at(u), rt::weight(e)) < best)) {
            best = rt::add<int32_t>(dist.at(u), rt::weight(e));
          }
        }
        if (best < dist.at(v)) {
          dist.at(v) = best;
        }
        if (dist.at(v) != rt::inf<int32_t>()) {
          for (const rt::Edge& _g3 : g.out(v)) {
            const int32_t nbr = _g3.destination;
            rt::Edge e2 = _g3;
            if (dist.at(nbr) > rt::add<int32_t>(dist.at(v), rt::weight(e2))) {
              rt::atomic_store(&modified.nxt_at(nbr), true);  // line 73
            }
          }
        }
      }
      rt::advance(modified.cur, modified.nxt);
      ++_g1;
    }
  }
  fixParents(g, dist, parent, affected, src);
  rt::fill(affected.cur, false);
}

void Incremental(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::NodeProp<uint8_t>& modified, int32_t src) {
  rt::NodeProp<uint8_t> changed(g);
  rt::fill(changed.cur, false);
  rt::fill(modified.nxt, false);
  {
    bool finished = false;
    uint64_t _g1 = 0;
    while (true) {
      finished = !rt::any(modified.cur);
      if (finished) break;
      if (_g1 >= rt::cap()) rt::cap_exceeded(86);
      #pragma omp parallel for schedule(dynamic, 64)
      for (int32_t v = 0; v < g.num_nodes(); ++v) {
        if (!((modified.at(v) != 0) == true)) continue;
        for (const rt::Edge& _g2 : g.out(v)) {
          const int32_t nbr = _g2.destination;
          rt::Edge e = _g2;
          {
            int32_t _g3 = rt::add<int32_t>(dist.at(v), rt::weight(e));
            uint8_t _g4 = true;
            uint8_t _g5 = true;
            std::lock_guard<std::mutex> _g6(rt::stripe(&dist.at(nbr)));
            int32_t* const _g7 = &dist.at(nbr);
            int32_t _g8 = rt::atomic_load(_g7);
            bool _g9 = false;
            while (_g3 < _g8) {
              if (__atomic_compare_exchange(_g7, &_g8, &_g3, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)) {  // line 90
                _g9 = true;
                break;
              }
            }
            if (_g9) {
              rt::atomic_store(&modified.nxt_at(nbr), _g4);
              rt::atomic_store(&changed.at(nbr), _g5);
            }
          }
        }
      }
      rt::advance(modified.cur, modified.nxt);
      ++_g1;
    }
  }
  fixParents(g, dist, parent, changed, src);
}

void DynSSSP(rt::Graph& g, rt::NodeProp<int32_t>& dist, rt::NodeProp<int32_t>& parent, rt::Updates& updateBatch, int32_t batchSize, int32_t src) {
  rt::NodeProp<uint8_t> modified(g);
  rt::NodeProp<uint8_t> affected(g);
  staticSSSP(g, dist, parent, modified, src);
  rt::fill(affected.cur, false);
  {
    const int64_t _g1 = rt::cvt<int64_t, int32_t>(batchSize);
    if (_g1 <= 0) rt::fail("batch size must be positive, got " + std::to_string(_g1));
    for (size_t _g2 = 0; _g2 < updateBatch.records.size(); _g2 = updateBatch.hi) {
      updateBatch.enter(_g2, updateBatch.records.size() - _g2 > static_cast<uint64_t>(_g1) ? _g2 + static_cast<size_t>(_g1) : updateBatch.records.size());
      {
        const rt::Window _g3 = updateBatch.window();
        #pragma omp parallel for schedule(dynamic, 64)
        for (size_t _g4 = 0; _g4 < _g3.size(); ++_g4) {
          const rt::Update& _g5 = _g3[_g4];
          if (!_g5.is_delete()) continue;
          const rt::Edge u = _g5.edge();
          int32_t s = u.source;
          int32_t d = u.destination;
          if (parent.at(d) == s) {
            rt::atomic_store(&dist.at(d), rt::inf<int32_t>());  // line 107
            rt::atomic_store(&parent.at(d), -1);  // line 108
            rt::atomic_store(&modified.at(d), true);  // line 109
            rt::atomic_store(&affected.at(d), true);  // line 110
          }
        }
      }
      g.update_csr_del(updateBatch.window());
      Decremental(g, dist, parent, modified, affected, src);
      {
        const rt::Window _g6 = updateBatch.window();
        #pragma omp parallel for schedule(dynamic, 64)
        for (size_t _g7 = 0; _g7 < _g6.size(); ++_g7) {
          const rt::Update& _g8 = _g6[_g7];
          if (!_g8.is_add()) continue;
          const rt::Edge u = _g8.edge();
          int32_t s = u.source;
          int32_t d = u.destination;
          if ((dist.at(s) != rt::inf<int32_t>()) && (rt::add<int32_t>(dist.at(s), rt::weight(u)) < dist.at(d))) {
            rt::atomic_store(&modified.at(s), true);  // line 119
          }
        }
      }
      g.update_csr_add(updateBatch.window());
      Incremental(g, dist, parent, modified, src);
      g.finish_batch();
    }
    updateBatch.leave();
  }
}

}  // namespace prog

int main(int argc, char** argv) {
  const rt::Args _gargs(argc, argv);
  rt::Graph g;
  rt::load_graph(_gargs, &g);
  rt::NodeProp<int32_t> dist(g);
  rt::NodeProp<int32_t> parent(g);
  rt::Updates updateBatch;
  rt::load_updates(_gargs, g, &updateBatch);
  const int32_t batchSize = _gargs.scalar<int32_t>("batchSize");
  const int32_t src = _gargs.node("src", g);
  prog::DynSSSP(g, dist, parent, updateBatch, batchSize, src);
  rt::Output _gout(_gargs);
  _gout.node_prop("dist", dist.cur);
  _gout.node_prop("parent", parent.cur);
  _gout.finish();
  return 0;
}
