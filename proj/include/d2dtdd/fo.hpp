#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "d2dtdd/detail/bisect.hpp"
#include "d2dtdd/energy.hpp"
#include "d2dtdd/scenario.hpp"

namespace d2dtdd {

/// Subinterval of the common uplink time during which one pair is at least as
/// cheap in cellular mode as on the direct link; Empty when the direct link
/// always wins.
struct PairInterval {
  bool empty = true;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double t) const { return !empty && t >= lo && t <= hi; }
};

/// Maximal closed subinterval of [ul_lo, ul_hi] where the cellular cost stays
/// at or below the (extended) D2D cost. The user objective is decreasing, so
/// at most one crossing exists; the system objective is convex, so at most
/// two. An infeasible direct link makes the whole window cellular.
inline PairInterval pair_interval(const PairBudget& row, EnergyObjective obj, double interference = 0.0) {
  if (!cellular_feasible(row))
    throw std::domain_error("pair " + std::to_string(row.id) + ": infeasible in cellular mode");
  const double wlo = row.ul_lo, whi = row.ul_hi;
  const ExtendedEnergy ext = d2d_energy_ext(row, interference);
  if (!ext.is_finite()) return PairInterval{false, wlo, whi};
  const double ebar = ext.value();
  const double tol = 1e-12 * row.frame_t;
  auto excess = [&](double t) { return cellular_energy(row, t, obj) - ebar; };

  if (obj == EnergyObjective::UserEnergy) {
    if (excess(whi) > 0.0) return PairInterval{};  // decreasing, best is still worse
    if (excess(wlo) <= 0.0) return PairInterval{false, wlo, whi};
    return PairInterval{false, detail::bisect_root(excess, wlo, whi, tol), whi};
  }

  const CellularOpt opt = cellular_energy_opt(row, obj);
  if (excess(opt.t_ul) > 0.0) return PairInterval{};
  PairInterval out{false, wlo, whi};
  if (excess(wlo) > 0.0) out.lo = detail::bisect_root(excess, wlo, opt.t_ul, tol);
  if (excess(whi) > 0.0) out.hi = detail::bisect_root(excess, opt.t_ul, whi, tol);
  return out;
}

/// One interval of the piecewise total-cost function, with the set of pairs
/// whose cellular cost is active there and the constant direct-link remainder.
struct PiecewisePiece {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> active;  // positions into members(): cellular on this piece
  bool infinite = false;    // some pair has no finite option here
  double constant = 0.0;    // sum of finite direct-link energies of the rest
};

/// Total cost F(t_ul) as an ordered breakpoint partition of [0, T] with at
/// most 2L+1 pieces. Evaluation reproduces the per-pair minimum sum.
class PiecewiseCost {
 public:
  struct PairTerm {
    PairBudget row;
    double interference = 0.0;
    ExtendedEnergy ext = ExtendedEnergy::infinite();
    PairInterval delta;
  };

  static PiecewiseCost build(const std::vector<const PairBudget*>& rows, EnergyObjective obj,
                             const std::vector<double>& interference) {
    PiecewiseCost pc;
    pc.obj_ = obj;
    pc.frame_t_ = rows.empty() ? 0.0 : rows.front()->frame_t;
    pc.terms_.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      PairTerm term{*rows[i], interference.empty() ? 0.0 : interference[i],
                    ExtendedEnergy::infinite(), PairInterval{}};
      term.ext = d2d_energy_ext(term.row, term.interference);
      term.delta = pair_interval(term.row, obj, term.interference);
      pc.terms_.push_back(std::move(term));
    }
    pc.build_pieces();
    return pc;
  }

  /// F(t). At an interior breakpoint the function takes the smaller of the two
  /// adjacent piece values (the per-pair minimum is lower semicontinuous).
  ExtendedEnergy value_at(double t) const {
    if (!(t >= 0.0 && t <= frame_t_)) throw std::domain_error("PiecewiseCost: t outside [0, T]");
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    std::size_t idx = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it));
    idx = (idx == 0) ? 0 : idx - 1;
    if (idx >= pieces_.size()) idx = pieces_.size() - 1;
    ExtendedEnergy v = eval_piece(idx, t);
    if (idx > 0 && t == breakpoints_[idx]) {
      const ExtendedEnergy left = eval_piece(idx - 1, t);
      if (left.is_finite() && (!v.is_finite() || left.value() < v.value())) v = left;
    }
    return v;
  }

  ExtendedEnergy eval_piece(std::size_t i, double t) const {
    const PiecewisePiece& piece = pieces_[i];
    if (piece.infinite) return ExtendedEnergy::infinite();
    double sum = piece.constant;
    for (int pos : piece.active) sum += cellular_energy(terms_[pos].row, t, obj_);
    return ExtendedEnergy::finite(sum);
  }

  const std::vector<PiecewisePiece>& pieces() const { return pieces_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<PairTerm>& terms() const { return terms_; }
  EnergyObjective objective() const { return obj_; }
  double frame_t() const { return frame_t_; }

 private:
  void build_pieces() {
    breakpoints_ = {0.0, frame_t_};
    for (const PairTerm& term : terms_) {
      if (term.delta.empty) continue;
      breakpoints_.push_back(term.delta.lo);
      breakpoints_.push_back(term.delta.hi);
    }
    std::sort(breakpoints_.begin(), breakpoints_.end());
    const double tol = 1e-15 * frame_t_;
    std::vector<double> dedup;
    for (double b : breakpoints_) {
      if (b < 0.0 || b > frame_t_) continue;
      if (dedup.empty() || b - dedup.back() > tol) dedup.push_back(b);
    }
    if (dedup.size() < 2) dedup = {0.0, frame_t_};
    dedup.front() = 0.0;
    dedup.back() = frame_t_;
    breakpoints_ = std::move(dedup);

    pieces_.clear();
    for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
      PiecewisePiece piece;
      piece.lo = breakpoints_[i];
      piece.hi = breakpoints_[i + 1];
      const double mid = 0.5 * (piece.lo + piece.hi);
      for (std::size_t pos = 0; pos < terms_.size(); ++pos) {
        const PairTerm& term = terms_[pos];
        if (term.delta.contains(mid)) {
          piece.active.push_back(static_cast<int>(pos));
        } else if (term.ext.is_finite()) {
          piece.constant += term.ext.value();
        } else {
          piece.infinite = true;
        }
      }
      pieces_.push_back(std::move(piece));
    }
  }

  EnergyObjective obj_ = EnergyObjective::UserEnergy;
  double frame_t_ = 0.0;
  std::vector<PairTerm> terms_;
  std::vector<double> breakpoints_;
  std::vector<PiecewisePiece> pieces_;
};

/// Piecewise total cost over all pairs with interference-free direct links.
inline PiecewiseCost build_piecewise(const LinkBudget& budget, EnergyObjective obj) {
  std::vector<const PairBudget*> rows;
  rows.reserve(budget.pairs.size());
  for (const PairBudget& row : budget.pairs) rows.push_back(&row);
  return PiecewiseCost::build(rows, obj, {});
}

/// Joint solution for the orthogonal-channel problem.
struct FoSolution {
  std::vector<int> members;       // pair positions this solve covered
  double t_ul = 0.0;              // common uplink time (T when nobody is cellular)
  std::vector<std::uint8_t> mode; // per member, 1 = direct link
  std::vector<double> p_ul, p_dl, p_d2d;  // per member, 0 where not applicable
  std::vector<double> pair_energy;        // per member, objective energy
  double total_energy = 0.0;

  int d2d_count() const { return static_cast<int>(std::count(mode.begin(), mode.end(), std::uint8_t{1})); }
};

namespace detail {

inline FoSolution solve_fo_impl(const std::vector<const PairBudget*>& rows, EnergyObjective obj,
                                const std::vector<double>& interference, std::vector<int> members) {
  FoSolution sol;
  sol.members = std::move(members);
  const std::size_t n = rows.size();
  if (n == 0) {
    sol.t_ul = 0.0;
    return sol;
  }
  const double frame_t = rows.front()->frame_t;
  const PiecewiseCost pc = PiecewiseCost::build(rows, obj, interference);

  const bool any_delta = std::any_of(pc.terms().begin(), pc.terms().end(),
                                     [](const PiecewiseCost::PairTerm& t) { return !t.delta.empty; });
  double best_t = frame_t;
  ExtendedEnergy best = ExtendedEnergy::infinite();

  if (!any_delta) {
    // Every pair prefers the direct link at every t; keep the full frame free.
    best = pc.value_at(frame_t);
  } else if (obj == EnergyObjective::UserEnergy) {
    // Piecewise decreasing: the optimum is one of the interval right ends.
    std::vector<double> candidates;
    for (const PiecewiseCost::PairTerm& term : pc.terms())
      if (!term.delta.empty) candidates.push_back(term.delta.hi);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (double t : candidates) {
      const ExtendedEnergy v = pc.value_at(t);
      if (!v.is_finite()) continue;
      if (!best.is_finite() || v.value() < best.value()) {
        best = v;
        best_t = t;
      }
    }
  } else {
    // Piecewise convex: minimize on every finite piece, then take the best.
    for (std::size_t i = 0; i < pc.pieces().size(); ++i) {
      const PiecewisePiece& piece = pc.pieces()[i];
      if (piece.infinite) continue;
      double t;
      if (piece.active.empty()) {
        t = piece.lo;
      } else {
        auto deriv = [&](double tt) {
          double d = 0.0;
          for (int pos : piece.active) d += cellular_energy_deriv(pc.terms()[pos].row, tt, obj);
          return d;
        };
        t = minimize_convex_by_derivative(deriv, piece.lo, piece.hi, 1e-12 * frame_t);
      }
      const ExtendedEnergy v = pc.value_at(t);
      if (!v.is_finite()) continue;
      if (!best.is_finite() || v.value() < best.value() ||
          (v.value() == best.value() && t < best_t)) {
        best = v;
        best_t = t;
      }
    }
  }

  if (!best.is_finite())
    throw std::runtime_error("solve_fo: no common uplink time serves every pair");

  sol.t_ul = best_t;
  sol.mode.assign(n, 1);
  sol.p_ul.assign(n, 0.0);
  sol.p_dl.assign(n, 0.0);
  sol.p_d2d.assign(n, 0.0);
  sol.pair_energy.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PiecewiseCost::PairTerm& term = pc.terms()[i];
    const PairBudget& row = term.row;
    const bool in_window = best_t >= row.ul_lo && best_t <= row.ul_hi;
    const bool cellular = in_window && cellular_preferred(cellular_energy(row, best_t, obj), term.ext);
    if (cellular) {
      sol.mode[i] = 0;
      sol.pair_energy[i] = cellular_energy(row, best_t, obj);
      if (row.demand > 0.0) {
        sol.p_ul[i] = optimal_power_ul(row, best_t);
        sol.p_dl[i] = optimal_power_dl(row, best_t);
      }
    } else {
      if (!term.ext.is_finite())
        throw std::logic_error("solve_fo: pair left without a finite option at the chosen time");
      sol.mode[i] = 1;
      sol.pair_energy[i] = term.ext.value();
      sol.p_d2d[i] = optimal_power_d2d(row, term.interference);
    }
    total += sol.pair_energy[i];
  }
  sol.total_energy = total;
  return sol;
}

}  // namespace detail

/// Optimal joint mode selection and common uplink time with orthogonal
/// channels: per-pair D2D costs are constants, so the problem reduces to
/// minimizing the piecewise cost over one variable.
inline FoSolution solve_fo(const LinkBudget& budget, EnergyObjective obj) {
  std::vector<const PairBudget*> rows;
  std::vector<int> members(budget.pairs.size());
  std::iota(members.begin(), members.end(), 0);
  rows.reserve(budget.pairs.size());
  for (const PairBudget& row : budget.pairs) rows.push_back(&row);
  return detail::solve_fo_impl(rows, obj, {}, std::move(members));
}

/// Same solve restricted to a subset of pairs, each with additional fixed
/// interference raising the noise floor of its direct link.
inline FoSolution solve_fo_subset(const LinkBudget& budget, EnergyObjective obj,
                                  const std::vector<int>& members,
                                  const std::vector<double>& extra_interference) {
  std::vector<const PairBudget*> rows;
  rows.reserve(members.size());
  for (int m : members) rows.push_back(&budget.pairs[m]);
  return detail::solve_fo_impl(rows, obj, extra_interference, members);
}

}  // namespace d2dtdd
