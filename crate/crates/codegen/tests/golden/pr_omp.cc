// Generated by graphdyn-codegen 0.1.0 from pr.sp. Do not edit.
#include "graphdyn_rt.h"

namespace prog {

void staticPR(rt::Graph& g, rt::NodeProp<double>& pageRank, double beta, double damping, int32_t maxIter);
void recompute(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::NodeProp<uint8_t>& flag, double beta, double damping, int32_t maxIter);
void Decremental(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::NodeProp<uint8_t>& flag, double beta, double damping, int32_t maxIter);
void Incremental(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::NodeProp<uint8_t>& flag, double beta, double damping, int32_t maxIter);
void DynPR(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::Updates& updateBatch, int32_t batchSize, double beta, double damping, int32_t maxIter);

void staticPR(rt::Graph& g, rt::NodeProp<double>& pageRank, double beta, double damping, int32_t maxIter) {
  rt::NodeProp<uint8_t> flag(g);
  double n = rt::cvt<double, int32_t>(g.num_nodes());
  rt::fill(pageRank.cur, rt::div<double>(1.0, n));
  rt::fill(flag.cur, true);
  recompute(g, pageRank, flag, beta, damping, maxIter);
}

void recompute(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::NodeProp<uint8_t>& flag, double beta, double damping, int32_t maxIter) {
  double n = rt::cvt<double, int32_t>(g.num_nodes());
  rt::NodeProp<double> pageRank_nxt(g);
  int32_t iter = 0;
  bool done = false;
  while (!done) {
    bool dangling_flagged = false;
    #pragma omp parallel for schedule(dynamic, 64)
    for (int32_t v = 0; v < g.num_nodes(); ++v) {
      if (!((flag.at(v) != 0) == true)) continue;
      if (g.degree(v) == 0) {
        rt::atomic_store(&dangling_flagged, true);  // line 22
      }
    }
    if (dangling_flagged) {
      rt::fill(flag.cur, true);
    }
    double diff = rt::add<double>(beta, 1.0);
    while ((diff > beta) && (iter < maxIter)) {
      double dangling = 0.0;
      #pragma omp parallel for schedule(dynamic, 64) reduction(+: dangling)
      for (int32_t u = 0; u < g.num_nodes(); ++u) {
        if (g.degree(u) == 0) {
          dangling = rt::add<double>(dangling, pageRank.at(u));
        }
      }
      diff = 0.0;
      #pragma omp parallel for schedule(dynamic, 64)
      for (int32_t v = 0; v < g.num_nodes(); ++v) {
        if (!((flag.at(v) != 0) == true)) continue;
        double sum = 0.0;
        for (const rt::Edge& _g1 : g.in(v)) {
          const int32_t u = _g1.source;
          sum = rt::add<double>(sum, rt::div<double>(pageRank.at(u), rt::cvt<double, int32_t>(g.degree(u))));
        }
        double val = rt::add<double>(rt::div<double>(rt::sub<double>(1.0, damping), n), rt::mul<double>(damping, rt::add<double>(sum, rt::div<double>(dangling, n))));
        {
          double _g2 = rt::abs_<double>(rt::sub<double>(val, pageRank.at(v)));
          double* const _g3 = &diff;
          double _g4 = rt::atomic_load(_g3);
          while (_g2 > _g4) {
            if (__atomic_compare_exchange(_g3, &_g4, &_g2, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)) break;  // line 43
          }
        }
        pageRank_nxt.at(v) = val;
      }
      #pragma omp parallel for schedule(dynamic, 64)
      for (int32_t v = 0; v < g.num_nodes(); ++v) {
        if (!((flag.at(v) != 0) == true)) continue;
        pageRank.at(v) = pageRank_nxt.at(v);
      }
      iter = rt::add<int32_t>(iter, 1);
    }
    double dangling = 0.0;
    #pragma omp parallel for schedule(dynamic, 64) reduction(+: dangling)
    for (int32_t u = 0; u < g.num_nodes(); ++u) {
      if (g.degree(u) == 0) {
        dangling = rt::add<double>(dangling, pageRank.at(u));
      }
    }
    double worst = 0.0;
    #pragma omp parallel for schedule(dynamic, 64)
    for (int32_t v = 0; v < g.num_nodes(); ++v) {
      double sum = 0.0;
      for (const rt::Edge& _g5 : g.in(v)) {
        const int32_t u = _g5.source;
        sum = rt::add<double>(sum, rt::div<double>(pageRank.at(u), rt::cvt<double, int32_t>(g.degree(u))));
      }
      double val = rt::add<double>(rt::div<double>(rt::sub<double>(1.0, damping), n), rt::mul<double>(damping, rt::add<double>(sum, rt::div<double>(dangling, n))));
      {
        double _g6 = rt::abs_<double>(rt::sub<double>(val, pageRank.at(v)));
        double* const _g7 = &worst;
        double _g8 = rt::atomic_load(_g7);
        while (_g6 > _g8) {
          if (__atomic_compare_exchange(_g7, &_g8, &_g6, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)) break;  // line 64
        }
      }
    }
    if ((worst > beta) && (iter < maxIter)) {
      rt::fill(flag.cur, true);
    } else {
      done = true;
    }
  }
}

void Decremental(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::NodeProp<uint8_t>& flag, double beta, double damping, int32_t maxIter) {
  rt::propagate(g, flag.cur);
  recompute(g, pageRank, flag, beta, damping, maxIter);
  rt::fill(flag.cur, false);
}

void Incremental(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::NodeProp<uint8_t>& flag, double beta, double damping, int32_t maxIter) {
  rt::propagate(g, flag.cur);
  recompute(g, pageRank, flag, beta, damping, maxIter);
  rt::fill(flag.cur, false);
}

void DynPR(rt::Graph& g, rt::NodeProp<double>& pageRank, rt::Updates& updateBatch, int32_t batchSize, double beta, double damping, int32_t maxIter) {
  rt::NodeProp<uint8_t> flag(g);
  staticPR(g, pageRank, beta, damping, maxIter);
  rt::fill(flag.cur, false);
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
          rt::atomic_store(&flag.at(s), true);  // line 94
          rt::atomic_store(&flag.at(d), true);  // line 95
        }
      }
      g.update_csr_del(updateBatch.window());
      Decremental(g, pageRank, flag, beta, damping, maxIter);
      {
        const rt::Window _g6 = updateBatch.window();
        #pragma omp parallel for schedule(dynamic, 64)
        for (size_t _g7 = 0; _g7 < _g6.size(); ++_g7) {
          const rt::Update& _g8 = _g6[_g7];
          if (!_g8.is_add()) continue;
          const rt::Edge u = _g8.edge();
          int32_t s = u.source;
          int32_t d = u.destination;
          rt::atomic_store(&flag.at(s), true);  // line 102
          rt::atomic_store(&flag.at(d), true);  // line 103
        }
      }
      g.update_csr_add(updateBatch.window());
      Incremental(g, pageRank, flag, beta, damping, maxIter);
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
  rt::NodeProp<double> pageRank(g);
  rt::Updates updateBatch;
  rt::load_updates(_gargs, g, &updateBatch);
  const int32_t batchSize = _gargs.scalar<int32_t>("batchSize");
  const double beta = _gargs.scalar<double>("beta");
  const double damping = _gargs.scalar<double>("damping");
  const int32_t maxIter = _gargs.scalar<int32_t>("maxIter");
  prog::DynPR(g, pageRank, updateBatch, batchSize, beta, damping, maxIter);
  rt::Output _gout(_gargs);
  _gout.node_prop("pageRank", pageRank.cur);
  _gout.finish();
  return 0;
}
