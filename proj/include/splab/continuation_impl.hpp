#pragma once

#include <algorithm>
#include <cstdio>

namespace splab {

template <typename F>
SolveReport continuation(const Pair& start, F&& params, const SolverConfig& cfg, Active active) {
  SolverConfig inner = cfg;
  double s = 0, delta = 1.0 / std::max(1, cfg.continuation_steps);
  Pair u = start;
  SolveReport last = newton_solve(u, params(0.0), inner, active);
  if (!last.converged()) {
    last.status = "branch lost at s=0";
    return last;
  }
  u = last.solution;
  int steps = 0;
  while (s < 1) {
    double s_next = std::min(1.0, s + delta);
    SolveReport r = newton_solve(u, params(s_next), inner, active);
    if (r.converged() && r.classification != Classification::trivial) {
      s = s_next;
      u = r.solution;
      last = std::move(r);
      ++steps;
      delta = std::min(2 * delta, 1.0 / std::max(1, cfg.continuation_steps));
    } else {
      delta /= 2;
      if (delta < cfg.min_step) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "branch lost; last good s=%.10g", s);
        SolveReport bad = r;
        bad.classification = Classification::diverged;
        bad.status = buf;
        return bad;
      }
    }
  }
  last.iterations = steps;
  return last;
}

}  // namespace splab
