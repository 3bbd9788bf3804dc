#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "d2dtdd/detail/dense.hpp"
#include "d2dtdd/energy.hpp"
#include "d2dtdd/fo.hpp"
#include "d2dtdd/scenario.hpp"

namespace d2dtdd {

/// SINR-target form of the shared-channel problem: per-pair targets
/// gamma = exp(b/(W T)) - 1, normalized noise terms eta = gamma*sigma2/G_ll,
/// and the normalized cross-gain matrix h_lj = gamma_l * G_jl / G_ll.
struct SinrSystem {
  int n = 0;
  double sigma2 = 0.0;
  double frame_t = 0.0;
  std::vector<double> gamma_tgt;   // per pair
  std::vector<double> eta;         // per pair [W]
  std::vector<double> p_max;       // per pair [W]
  std::vector<double> direct_gain; // G_ll
  std::vector<double> h;           // n*n, h[l*n + j], zero diagonal
  std::vector<double> cross_gain;  // n*n copy, [j*n + l] = gain Tx-j -> Rx-l

  double gain_tx_to_rx(int tx, int rx) const { return cross_gain[static_cast<std::size_t>(tx) * n + rx]; }
};

inline SinrSystem build_sinr_system(const LinkBudget& budget) {
  SinrSystem sys;
  sys.n = budget.size();
  sys.sigma2 = budget.sigma2;
  sys.frame_t = budget.params.frame_t_s;
  sys.gamma_tgt.resize(sys.n);
  sys.eta.resize(sys.n);
  sys.p_max.resize(sys.n);
  sys.direct_gain.resize(sys.n);
  sys.h.assign(static_cast<std::size_t>(sys.n) * sys.n, 0.0);
  sys.cross_gain = budget.cross_gain;
  for (int l = 0; l < sys.n; ++l) {
    const PairBudget& row = budget.pairs[l];
    sys.gamma_tgt[l] = std::expm1(row.demand / (row.bandwidth * row.frame_t));
    sys.eta[l] = sys.gamma_tgt[l] * row.sigma2 / row.g_direct;
    sys.p_max[l] = row.p_max_ue;
    sys.direct_gain[l] = row.g_direct;
    for (int j = 0; j < sys.n; ++j) {
      if (j == l) continue;
      sys.h[static_cast<std::size_t>(l) * sys.n + j] = sys.gamma_tgt[l] * budget.gain_tx_to_rx(j, l) / row.g_direct;
    }
  }
  return sys;
}

enum class InfeasibleReason { None, SpectralRadius, PowerLimit };

struct D2dFeasibility {
  bool feasible = false;
  InfeasibleReason reason = InfeasibleReason::None;
  double spectral_radius = 0.0;
  std::vector<double> p_min;  // componentwise-minimum powers, indexed as `members`
};

/// Existence of valid powers for a set of pairs sharing the channel: the
/// normalized cross-gain submatrix must have Perron root below one, and the
/// componentwise-minimum solution of (I - H) p = eta must respect the caps.
/// Within 1e-10 of the spectral boundary the direct linear-solve test decides.
inline D2dFeasibility d2d_set_feasible(const SinrSystem& sys, const std::vector<int>& members) {
  D2dFeasibility out;
  const int m = static_cast<int>(members.size());
  if (m == 0) {
    out.feasible = true;
    return out;
  }
  std::vector<double> hm(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> eta_m(m);
  for (int a = 0; a < m; ++a) {
    eta_m[a] = sys.eta[members[a]];
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      hm[static_cast<std::size_t>(a) * m + b] = sys.h[static_cast<std::size_t>(members[a]) * sys.n + members[b]];
    }
  }
  out.spectral_radius = detail::nonneg_spectral_radius(hm, m);

  std::vector<double> im_minus_h(hm.size());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      im_minus_h[static_cast<std::size_t>(a) * m + b] = (a == b ? 1.0 : 0.0) - hm[static_cast<std::size_t>(a) * m + b];

  bool spectral_ok;
  std::vector<double> p;
  if (std::fabs(out.spectral_radius - 1.0) <= 1e-10) {
    // boundary: a positive solution of (I - H) p = eta certifies rho < 1
    spectral_ok = detail::solve_linear(im_minus_h, eta_m, m, p);
    if (spectral_ok)
      for (int a = 0; a < m; ++a)
        if (p[a] < 0.0) {
          if (p[a] < -1e-12 * sys.p_max[members[a]]) spectral_ok = false;
          p[a] = 0.0;
        }
  } else {
    spectral_ok = out.spectral_radius < 1.0;
    if (spectral_ok && !detail::solve_linear(im_minus_h, eta_m, m, p)) spectral_ok = false;
  }
  if (!spectral_ok) {
    out.reason = InfeasibleReason::SpectralRadius;
    return out;
  }

  out.p_min = std::move(p);
  for (int a = 0; a < m; ++a) {
    if (out.p_min[a] > sys.p_max[members[a]]) {
      out.feasible = false;
      out.reason = InfeasibleReason::PowerLimit;
      return out;
    }
  }
  out.feasible = true;
  return out;
}

struct CommonTime {
  bool feasible = false;
  double t_ul = 0.0;
  double cost = 0.0;
};

/// Best common uplink time for a set of pairs all held in cellular mode, over
/// the intersection of their feasibility windows. Infeasible when the
/// intersection is empty; an empty set costs nothing and leaves t free (T).
inline CommonTime cellular_common_time(const LinkBudget& budget, const std::vector<int>& members,
                                       EnergyObjective obj) {
  CommonTime out;
  if (members.empty()) {
    out.feasible = true;
    out.t_ul = budget.params.frame_t_s;
    return out;
  }
  double lo = 0.0, hi = budget.params.frame_t_s;
  for (int m : members) {
    lo = std::max(lo, budget.pairs[m].ul_lo);
    hi = std::min(hi, budget.pairs[m].ul_hi);
  }
  if (lo > hi) return out;
  out.feasible = true;
  if (obj == EnergyObjective::UserEnergy) {
    out.t_ul = hi;  // every term is decreasing in t
  } else {
    auto deriv = [&](double t) {
      double d = 0.0;
      for (int m : members) d += cellular_energy_deriv(budget.pairs[m], t, obj);
      return d;
    };
    out.t_ul = detail::minimize_convex_by_derivative(deriv, lo, hi, 1e-12 * budget.params.frame_t_s);
  }
  for (int m : members) out.cost += cellular_energy(budget.pairs[m], out.t_ul, obj);
  return out;
}

struct SolverStats {
  long nodes_explored = 0;       // tree nodes processed (equals solutions for enumeration)
  long solutions_evaluated = 0;  // complete mode vectors whose cost or feasibility was examined
  long leaves_evaluated = 0;
  long pruned_infeasible = 0;
  long pruned_bound = 0;
  double wall_time_s = 0.0;
};

/// Complete shared-channel solution.
struct RsSolution {
  std::vector<std::uint8_t> mode;  // 1 = direct link
  double t_ul = 0.0;
  std::vector<double> p_d2d, p_ul, p_dl;
  std::vector<double> pair_energy;
  double total_energy = 0.0;
  SolverStats stats;

  int d2d_count() const { return static_cast<int>(std::count(mode.begin(), mode.end(), std::uint8_t{1})); }
};

namespace detail {

inline RsSolution assemble_rs_solution(const LinkBudget& budget, EnergyObjective obj,
                                       const std::vector<int>& d2d_members, const std::vector<double>& p_d2d,
                                       const CommonTime& cell) {
  const int n = budget.size();
  RsSolution sol;
  sol.mode.assign(n, 0);
  sol.p_d2d.assign(n, 0.0);
  sol.p_ul.assign(n, 0.0);
  sol.p_dl.assign(n, 0.0);
  sol.pair_energy.assign(n, 0.0);
  sol.t_ul = cell.t_ul;
  for (std::size_t a = 0; a < d2d_members.size(); ++a) {
    const int l = d2d_members[a];
    sol.mode[l] = 1;
    sol.p_d2d[l] = p_d2d[a];
    sol.pair_energy[l] = p_d2d[a] * budget.params.frame_t_s;
  }
  for (int l = 0; l < n; ++l) {
    if (sol.mode[l]) continue;
    const PairBudget& row = budget.pairs[l];
    sol.pair_energy[l] = cellular_energy(row, cell.t_ul, obj);
    if (row.demand > 0.0) {
      sol.p_ul[l] = optimal_power_ul(row, cell.t_ul);
      sol.p_dl[l] = optimal_power_dl(row, cell.t_ul);
    }
  }
  sol.total_energy = std::accumulate(sol.pair_energy.begin(), sol.pair_energy.end(), 0.0);
  return sol;
}

inline std::vector<int> mask_members(std::uint32_t mask, int n) {
  std::vector<int> out;
  for (int l = 0; l < n; ++l)
    if ((mask >> l) & 1u) out.push_back(l);
  return out;
}

}  // namespace detail

/// Exact baseline: enumerate mode vectors by increasing D2D-set size, skipping
/// supersets of sets already proven infeasible (infeasibility is monotone
/// under set growth). Guarded to 20 pairs.
inline RsSolution rs_exhaustive(const LinkBudget& budget, const SinrSystem& sys, EnergyObjective obj) {
  const int n = budget.size();
  if (n > 20) throw std::invalid_argument("rs_exhaustive: refusing more than 20 pairs");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::uint32_t> order(std::size_t{1} << n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });

  SolverStats stats;
  std::vector<std::uint32_t> infeasible_sets;
  bool have_best = false;
  double best_cost = 0.0;
  RsSolution best;

  for (std::uint32_t mask : order) {
    bool dominated = false;
    for (std::uint32_t bad : infeasible_sets) {
      if ((mask & bad) == bad) {
        dominated = true;
        break;
      }
    }
    if (dominated) {
      ++stats.pruned_infeasible;
      continue;
    }
    ++stats.nodes_explored;
    ++stats.solutions_evaluated;
    ++stats.leaves_evaluated;

    const std::vector<int> d2d = detail::mask_members(mask, n);
    const D2dFeasibility fz = d2d_set_feasible(sys, d2d);
    if (!fz.feasible) {
      infeasible_sets.push_back(mask);
      continue;
    }
    std::vector<int> cellular;
    for (int l = 0; l < n; ++l)
      if (!((mask >> l) & 1u)) cellular.push_back(l);
    const CommonTime ct = cellular_common_time(budget, cellular, obj);
    if (!ct.feasible) continue;

    double cost = ct.cost;
    for (double p : fz.p_min) cost += p * budget.params.frame_t_s;
    if (!have_best || cost < best_cost) {
      have_best = true;
      best_cost = cost;
      best = detail::assemble_rs_solution(budget, obj, d2d, fz.p_min, ct);
    }
  }
  if (!have_best) throw std::runtime_error("rs_exhaustive: no feasible mode selection vector");
  best.stats = stats;
  best.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

enum class BranchRule { Proposed, RandomOrder };

struct BnbNodeRecord {
  std::uint32_t fixed_mask = 0;
  std::uint32_t d2d_mask = 0;
  int depth = 0;
  double lower_bound = 0.0;
};

struct BnbOptions {
  BranchRule rule = BranchRule::Proposed;
  std::uint64_t shuffle_seed = 0;                 // used by RandomOrder
  std::vector<BnbNodeRecord>* node_log = nullptr; // optional bound trace
};

namespace detail {

inline std::vector<int> bnb_branch_order(const LinkBudget& budget, const SinrSystem& sys, EnergyObjective obj,
                                         const BnbOptions& opts) {
  const int n = budget.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (opts.rule == BranchRule::RandomOrder) {
    std::mt19937_64 rng(opts.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
  }

  // Interference-free solution splits the pairs: branch on its D2D members
  // first, strongest interferers (s_l = sum G_li / G_ll over D2D peers) ahead,
  // then on the rest by how much they would save on the direct link.
  const FoSolution fo = solve_fo(budget, obj);
  std::vector<double> strength(n, 0.0), saving(n, 0.0);
  std::vector<int> d2d, rest;
  for (int l = 0; l < n; ++l) {
    if (fo.mode[l]) {
      d2d.push_back(l);
    } else {
      rest.push_back(l);
    }
  }
  for (int l : d2d) {
    double s = 0.0;
    for (int i : d2d)
      if (i != l) s += sys.gain_tx_to_rx(l, i) / sys.direct_gain[l];
    strength[l] = s;
  }
  for (int l : rest) {
    const ExtendedEnergy ext = d2d_energy_ext(budget.pairs[l], 0.0);
    const double e_cell = cellular_energy(budget.pairs[l], fo.t_ul, obj);
    saving[l] = ext.is_finite() ? e_cell - ext.value() : -std::numeric_limits<double>::infinity();
  }
  std::stable_sort(d2d.begin(), d2d.end(), [&](int a, int b) { return strength[a] > strength[b]; });
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) { return saving[a] > saving[b]; });
  order = d2d;
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

}  // namespace detail

/// Customized branch and bound over the binary mode vector.
///
/// Nodes fix a prefix of the branching order; a node whose fixed D2D set
/// already fails the shared-channel feasibility test is discarded with its
/// whole subtree (adding members never restores feasibility). Otherwise the
/// node is bounded from above by sending every undecided pair through the BS,
/// and from below by the fixed cost plus an orthogonal-channel relaxation of
/// the undecided pairs whose noise floors are raised by the interference the
/// fixed D2D transmitters already create at their minimum powers.
inline RsSolution rs_branch_and_bound(const LinkBudget& budget, const SinrSystem& sys, EnergyObjective obj,
                                      const BnbOptions& opts = {}) {
  const int n = budget.size();
  if (n > 31) throw std::invalid_argument("rs_branch_and_bound: refusing more than 31 pairs");
  const auto t0 = std::chrono::steady_clock::now();
  const double frame_t = budget.params.frame_t_s;

  SolverStats stats;
  const std::vector<int> order = detail::bnb_branch_order(budget, sys, obj, opts);

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  bool have_best = false;
  double best_cost = 0.0;
  RsSolution best;
  auto offer = [&](const std::vector<int>& d2d, const std::vector<double>& p, const CommonTime& ct, double cost) {
    if (!have_best || cost < best_cost) {
      have_best = true;
      best_cost = cost;
      best = detail::assemble_rs_solution(budget, obj, d2d, p, ct);
    }
  };

  // Root incumbent: the all-cellular allocation, always feasible by assumption.
  {
    const CommonTime ct = cellular_common_time(budget, all, obj);
    if (ct.feasible) {
      ++stats.solutions_evaluated;
      offer({}, {}, ct, ct.cost);
    }
  }

  struct Node {
    int depth;
    std::uint32_t d2d_mask;
  };
  std::vector<Node> stack;
  stack.push_back({0, 0u});

  while (!stack.empty()) {
    const Node node = stack.back();
    stack.pop_back();
    ++stats.nodes_explored;

    const std::vector<int> d2d = detail::mask_members(node.d2d_mask, n);
    const D2dFeasibility fz = d2d_set_feasible(sys, d2d);
    if (!fz.feasible) {
      ++stats.pruned_infeasible;
      continue;
    }
    double fixed_d2d_cost = 0.0;
    for (double p : fz.p_min) fixed_d2d_cost += p * frame_t;

    std::vector<int> fixed_cell, undecided;
    for (int i = 0; i < node.depth; ++i)
      if (!((node.d2d_mask >> order[i]) & 1u)) fixed_cell.push_back(order[i]);
    for (int i = node.depth; i < n; ++i) undecided.push_back(order[i]);
    std::sort(fixed_cell.begin(), fixed_cell.end());
    std::sort(undecided.begin(), undecided.end());

    if (node.depth == n) {
      ++stats.leaves_evaluated;
      ++stats.solutions_evaluated;
      const CommonTime ct = cellular_common_time(budget, fixed_cell, obj);
      if (!ct.feasible) continue;
      offer(d2d, fz.p_min, ct, fixed_d2d_cost + ct.cost);
      continue;
    }

    // Upper bound: complete the node by sending all undecided pairs cellular.
    {
      std::vector<int> cellular = fixed_cell;
      cellular.insert(cellular.end(), undecided.begin(), undecided.end());
      std::sort(cellular.begin(), cellular.end());
      const CommonTime ct = cellular_common_time(budget, cellular, obj);
      ++stats.solutions_evaluated;
      if (ct.feasible) offer(d2d, fz.p_min, ct, fixed_d2d_cost + ct.cost);
    }

    // Lower bound: fixed pairs at their minimum costs (times may differ), the
    // undecided relaxed to orthogonal channels under the fixed interference.
    double lb = fixed_d2d_cost;
    {
      const CommonTime ct = cellular_common_time(budget, fixed_cell, obj);
      if (!ct.feasible) continue;  // no completion can serve the fixed cellular set
      lb += ct.cost;
      std::vector<double> interference(undecided.size(), 0.0);
      for (std::size_t u = 0; u < undecided.size(); ++u) {
        double acc = 0.0;
        for (std::size_t a = 0; a < d2d.size(); ++a) acc += fz.p_min[a] * sys.gain_tx_to_rx(d2d[a], undecided[u]);
        interference[u] = acc;
      }
      lb += solve_fo_subset(budget, obj, undecided, interference).total_energy;
    }
    std::uint32_t fixed_mask = 0;
    for (int i = 0; i < node.depth; ++i) fixed_mask |= 1u << order[i];
    if (opts.node_log) opts.node_log->push_back({fixed_mask, node.d2d_mask, node.depth, lb});

    if (have_best && lb >= best_cost * (1.0 - 1e-12)) {
      ++stats.pruned_bound;
      continue;
    }

    const int var = order[node.depth];
    stack.push_back({node.depth + 1, node.d2d_mask});                   // cellular child
    stack.push_back({node.depth + 1, node.d2d_mask | (1u << var)});     // direct-link child first
  }

  if (!have_best) throw std::runtime_error("rs_branch_and_bound: no feasible mode selection vector");
  best.stats = stats;
  best.stats.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace d2dtdd
