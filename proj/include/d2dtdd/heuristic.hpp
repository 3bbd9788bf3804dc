#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "d2dtdd/energy.hpp"
#include "d2dtdd/fo.hpp"
#include "d2dtdd/rs.hpp"
#include "d2dtdd/scenario.hpp"

namespace d2dtdd {

struct HeuristicConfig {
  double theta = 1.2;     // switch margin, >= 1; larger keeps pairs on the shared channel
  int max_iters = 500;
  double sinr_tol = 1e-6; // relative slack on the SINR targets at convergence

  void validate() const {
    if (!(theta >= 1.0)) throw std::invalid_argument("HeuristicConfig: theta must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("HeuristicConfig: max_iters must be >= 1");
    if (!(sinr_tol > 0.0)) throw std::invalid_argument("HeuristicConfig: sinr_tol must be positive");
  }
};

struct SwitchEvent {
  int iteration = 0;
  int pair = 0;  // pair position that moved to cellular mode
};

struct HeuristicIterate {
  int iteration = 0;
  std::vector<double> p;          // full length; zero for pairs not on the channel
  std::vector<double> sinr;       // full length; zero for pairs not on the channel
  std::vector<std::uint8_t> mode; // 1 = direct link
};

/// Per-iteration record of the distributed power control run. The set of
/// pairs on the shared channel only ever shrinks.
struct HeuristicTrace {
  std::vector<HeuristicIterate> iterations;
  std::vector<SwitchEvent> switches;
  bool converged = true;
};

struct HeuristicOutcome {
  RsSolution solution;
  HeuristicTrace trace;
};

/// SINR each active pair perceives under powers p, counting interference from
/// the active set only: gamma_l = p_l G_ll / (sigma2 + sum_j p_j G_jl).
inline std::vector<double> perceived_sinr(const SinrSystem& sys, const std::vector<int>& active,
                                          const std::vector<double>& p) {
  std::vector<double> out(active.size(), 0.0);
  for (std::size_t a = 0; a < active.size(); ++a) {
    const int l = active[a];
    double interference = 0.0;
    for (std::size_t b = 0; b < active.size(); ++b) {
      if (b == a) continue;
      interference += p[b] * sys.gain_tx_to_rx(active[b], l);
    }
    out[a] = p[a] * sys.direct_gain[l] / (sys.sigma2 + interference);
  }
  return out;
}

/// One synchronous power-control sweep: p' = (gamma_tgt / gamma) p. Fixed
/// points solve p = eta + H p on the active set. Pairs with a positive target
/// must come in with positive SINR; a zero-target pair needs no power at all.
inline std::vector<double> fm_update(const SinrSystem& sys, const std::vector<int>& active,
                                     const std::vector<double>& p) {
  const std::vector<double> sinr = perceived_sinr(sys, active, p);
  std::vector<double> next(p.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    if (sys.gamma_tgt[active[a]] == 0.0) {
      next[a] = 0.0;
      continue;
    }
    if (!(sinr[a] > 0.0))
      throw std::logic_error("fm_update: nonpositive SINR in the active set (zero power entered)");
    next[a] = sys.gamma_tgt[active[a]] / sinr[a] * p[a];
  }
  return next;
}

/// Power-control mode selection: seed with the orthogonal-channel optimum,
/// run synchronous power-control sweeps on the pairs it put on the shared
/// channel, and move a pair to cellular mode as soon as its power climbs past
/// min(theta/T * its cellular cost at the seed allocation, p_max). Pairs only
/// ever leave the channel. The uplink time of the final cellular set is then
/// re-optimized and the remaining channel powers set to their exact minima.
inline HeuristicOutcome run_heuristic(const LinkBudget& budget, const SinrSystem& sys,
                                      const HeuristicConfig& cfg = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = budget.size();
  const double frame_t = budget.params.frame_t_s;

  const FoSolution fo = solve_fo(budget, EnergyObjective::UserEnergy);

  std::vector<int> active;
  std::vector<double> cap(n, 0.0);
  for (int l = 0; l < n; ++l) {
    if (!fo.mode[l]) continue;
    active.push_back(l);
    const double e_cell_seed = energy_ul(fo.t_ul, budget.pairs[l].demand, budget.pairs[l].g_tx_bs,
                                         budget.pairs[l].sigma2, budget.pairs[l].bandwidth);
    cap[l] = std::min(cfg.theta / frame_t * e_cell_seed, budget.pairs[l].p_max_ue);
  }

  std::vector<std::uint8_t> mode(fo.mode);
  std::vector<double> p(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) p[a] = std::max(fo.p_d2d[active[a]], 1e-30);

  HeuristicTrace trace;
  auto record = [&](int k, const std::vector<double>& sinr) {
    HeuristicIterate it;
    it.iteration = k;
    it.p.assign(n, 0.0);
    it.sinr.assign(n, 0.0);
    for (std::size_t a = 0; a < active.size(); ++a) {
      it.p[active[a]] = p[a];
      it.sinr[active[a]] = sinr[a];
    }
    it.mode = mode;
    trace.iterations.push_back(std::move(it));
  };

  record(0, perceived_sinr(sys, active, p));
  bool converged = active.empty();

  for (int k = 0; k < cfg.max_iters && !converged && !active.empty(); ++k) {
    p = fm_update(sys, active, p);

    // synchronous switch check after the sweep
    std::vector<int> keep;
    std::vector<double> keep_p;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const int l = active[a];
      if (p[a] > cap[l]) {
        mode[l] = 0;
        trace.switches.push_back({k + 1, l});
      } else {
        keep.push_back(l);
        keep_p.push_back(p[a]);
      }
    }
    active = std::move(keep);
    p = std::move(keep_p);

    const std::vector<double> sinr = perceived_sinr(sys, active, p);
    record(k + 1, sinr);

    bool targets_met = true;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (sinr[a] < sys.gamma_tgt[active[a]] * (1.0 - cfg.sinr_tol)) {
        targets_met = false;
        break;
      }
    }
    if (!targets_met) continue;

    // Declare convergence only if the exact limit powers also respect the
    // caps; otherwise keep sweeping until the growing iterates cross them.
    const D2dFeasibility fz = d2d_set_feasible(sys, active);
    if (!fz.feasible) continue;
    bool caps_ok = true;
    for (std::size_t a = 0; a < active.size(); ++a)
      if (fz.p_min[a] > cap[active[a]]) {
        caps_ok = false;
        break;
      }
    if (caps_ok) converged = true;
  }
  trace.converged = converged || active.empty();

  // Final allocation: exact minimum powers for the surviving channel set and
  // a re-optimized common uplink time for everyone else.
  std::vector<int> cellular;
  for (int l = 0; l < n; ++l)
    if (!mode[l]) cellular.push_back(l);

  std::vector<double> p_final = p;
  const D2dFeasibility fz = d2d_set_feasible(sys, active);
  if (fz.feasible) {
    p_final = fz.p_min;
  } else {
    trace.converged = false;
  }
  const CommonTime ct = cellular_common_time(budget, cellular, EnergyObjective::UserEnergy);
  if (!ct.feasible)
    throw std::runtime_error("run_heuristic: cellular set lost feasibility");

  HeuristicOutcome out;
  out.solution = detail::assemble_rs_solution(budget, EnergyObjective::UserEnergy, active, p_final, ct);
  out.solution.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.trace = std::move(trace);
  return out;
}

/// Per-iteration table of the trace: iteration, pair, mode, power, SINR.
inline void write_trace_csv(const HeuristicTrace& trace, std::ostream& os) {
  os << "iteration,pair,mode,p_w,sinr\n";
  char buf[64];
  for (const HeuristicIterate& it : trace.iterations) {
    for (std::size_t l = 0; l < it.p.size(); ++l) {
      os << it.iteration << ',' << l + 1 << ',' << int(it.mode[l]) << ',';
      std::snprintf(buf, sizeof buf, "%.17g", it.p[l]);
      os << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", it.sinr[l]);
      os << buf << '\n';
    }
  }
}

}  // namespace d2dtdd
