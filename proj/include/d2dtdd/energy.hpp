#pragma once

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "d2dtdd/detail/bisect.hpp"
#include "d2dtdd/scenario.hpp"

namespace d2dtdd {

enum class EnergyObjective {
  SystemEnergy,  // device uplink + BS downlink
  UserEnergy,    // device uplink only
};

enum class Mode : std::uint8_t { Cellular = 0, D2d = 1 };

/// Energy value extended with an explicit +infinity state (power-infeasible).
/// Never encoded as a floating sentinel, so comparisons stay NaN-free.
class ExtendedEnergy {
 public:
  static ExtendedEnergy finite(double joules) { return ExtendedEnergy(true, joules); }
  static ExtendedEnergy infinite() { return ExtendedEnergy(false, 0.0); }

  bool is_finite() const { return finite_; }
  double value() const {
    assert(finite_);
    return value_;
  }
  /// Value with +inf materialized; only for printing/aggregation.
  double value_or_inf() const { return finite_ ? value_ : std::numeric_limits<double>::infinity(); }

 private:
  ExtendedEnergy(bool finite, double value) : finite_(finite), value_(value) {}
  bool finite_;
  double value_;
};

/// True when a finite cellular cost wins against an extended D2D cost.
/// Ties go to cellular.
inline bool cellular_preferred(double e_cell, const ExtendedEnergy& e_d2d) {
  return !e_d2d.is_finite() || e_cell <= e_d2d.value();
}

/// Shannon rate W * ln(1 + p*G/(sigma2 + I)) in nats/s; see shannon_rate.
inline double rate(double p, double gain, double sigma2, double interference, double bandwidth) {
  assert(p >= 0.0 && gain > 0.0 && sigma2 > 0.0 && interference >= 0.0);
  return shannon_rate(p, gain, sigma2, interference, bandwidth);
}

namespace detail {

// E(t) = (exp(b/(W t)) - 1) * noise/gain * t; convex, strictly decreasing for b > 0.
inline double link_energy(double t, double b, double gain, double noise, double bandwidth) {
  if (!(t > 0.0)) throw std::domain_error("link energy: transmission time must be positive");
  return std::expm1(b / (bandwidth * t)) * (noise / gain) * t;
}

// d/dt of link_energy: noise/gain * (expm1(x) - x e^x) with x = b/(W t).
inline double link_energy_deriv(double t, double b, double gain, double noise, double bandwidth) {
  const double x = b / (bandwidth * t);
  return (noise / gain) * (std::expm1(x) - x * std::exp(x));
}

// Power sustaining demand b over time t: (exp(b/(W t)) - 1) * noise/gain.
inline double link_power(double t, double b, double gain, double noise, double bandwidth) {
  if (!(t > 0.0)) throw std::domain_error("link power: transmission time must be positive");
  return std::expm1(b / (bandwidth * t)) * (noise / gain);
}

}  // namespace detail

inline double energy_ul(double t, double b, double g_tx_bs, double sigma2, double bandwidth) {
  return detail::link_energy(t, b, g_tx_bs, sigma2, bandwidth);
}

inline double energy_dl(double t, double b, double g_bs_rx, double sigma2, double bandwidth) {
  return detail::link_energy(t, b, g_bs_rx, sigma2, bandwidth);
}

inline double energy_d2d(double t, double b, double g_direct, double sigma2, double interference, double bandwidth) {
  return detail::link_energy(t, b, g_direct, sigma2 + interference, bandwidth);
}

/// Cellular cost at common uplink time t: UL energy alone (user objective) or
/// UL plus the downlink leg over the rest of the frame (system objective).
inline double cellular_energy(const PairBudget& row, double t_ul, EnergyObjective obj) {
  double e = energy_ul(t_ul, row.demand, row.g_tx_bs, row.sigma2, row.bandwidth);
  if (obj == EnergyObjective::SystemEnergy)
    e += energy_dl(row.frame_t - t_ul, row.demand, row.g_bs_rx, row.sigma2, row.bandwidth);
  return e;
}

inline double cellular_energy_deriv(const PairBudget& row, double t_ul, EnergyObjective obj) {
  double d = detail::link_energy_deriv(t_ul, row.demand, row.g_tx_bs, row.sigma2, row.bandwidth);
  if (obj == EnergyObjective::SystemEnergy)
    d -= detail::link_energy_deriv(row.frame_t - t_ul, row.demand, row.g_bs_rx, row.sigma2, row.bandwidth);
  return d;
}

/// Pair can be served through the BS within one frame.
inline bool cellular_feasible(const PairBudget& row) {
  return row.demand / row.r_ul_max + row.demand / row.r_dl_max <= row.frame_t;
}

/// Pair can meet its demand on the direct link at full power, no interference.
inline bool d2d_feasible(const PairBudget& row) {
  return row.r_d2d_max * row.frame_t >= row.demand;
}

/// Direct-link energy over the full frame under interference power I, or
/// +infinity when the required transmit power exceeds the device cap.
inline ExtendedEnergy d2d_energy_ext(const PairBudget& row, double interference) {
  assert(interference >= 0.0);
  const double p = detail::link_power(row.frame_t, row.demand, row.g_direct, row.sigma2 + interference, row.bandwidth);
  if (p > row.p_max_ue) return ExtendedEnergy::infinite();
  return ExtendedEnergy::finite(p * row.frame_t);
}

struct CellularOpt {
  double t_ul = 0.0;
  double energy = 0.0;
};

/// Energy-optimal uplink time for one pair held in cellular mode.
/// The user objective is decreasing in t, so its optimum sits at the right
/// edge of the feasible window; the system objective is convex and is
/// minimized by bisection on its derivative.
inline CellularOpt cellular_energy_opt(const PairBudget& row, EnergyObjective obj) {
  if (!cellular_feasible(row))
    throw std::domain_error("pair " + std::to_string(row.id) + ": infeasible in cellular mode");
  CellularOpt out;
  if (row.demand == 0.0) {
    out.t_ul = (obj == EnergyObjective::UserEnergy) ? row.ul_hi : 0.5 * row.frame_t;
    out.energy = 0.0;
    return out;
  }
  if (obj == EnergyObjective::UserEnergy) {
    out.t_ul = row.ul_hi;
  } else {
    out.t_ul = detail::minimize_convex_by_derivative(
        [&](double t) { return cellular_energy_deriv(row, t, obj); }, row.ul_lo, row.ul_hi,
        1e-12 * row.frame_t);
  }
  out.energy = cellular_energy(row, out.t_ul, obj);
  return out;
}

namespace detail {

// At the edge of the feasibility window the reconstructed power equals the
// cap in exact arithmetic; absorb the rounding of the inversion chain.
inline double snap_to_cap(double p, double cap) {
  return (p > cap && p <= cap * (1.0 + 1e-9)) ? cap : p;
}

}  // namespace detail

/// Transmit powers realizing the chosen allocation.
inline double optimal_power_ul(const PairBudget& row, double t_ul) {
  return detail::snap_to_cap(detail::link_power(t_ul, row.demand, row.g_tx_bs, row.sigma2, row.bandwidth),
                             row.p_max_ue);
}
inline double optimal_power_dl(const PairBudget& row, double t_ul) {
  return detail::snap_to_cap(
      detail::link_power(row.frame_t - t_ul, row.demand, row.g_bs_rx, row.sigma2, row.bandwidth), row.p_max_bs);
}
inline double optimal_power_d2d(const PairBudget& row, double interference = 0.0) {
  return detail::snap_to_cap(
      detail::link_power(row.frame_t, row.demand, row.g_direct, row.sigma2 + interference, row.bandwidth),
      row.p_max_ue);
}

struct SinglePairSolution {
  Mode mode = Mode::Cellular;
  double t_ul = 0.0;  // defined only in cellular mode
  double p_ul = 0.0;
  double p_dl = 0.0;
  double p_d2d = 0.0;
  double energy = 0.0;
};

/// Least-energy mode for an isolated pair. Ties go to cellular.
inline SinglePairSolution single_pair_select(const PairBudget& row, EnergyObjective obj) {
  const CellularOpt cell = cellular_energy_opt(row, obj);
  const ExtendedEnergy d2d = d2d_energy_ext(row, 0.0);

  SinglePairSolution out;
  if (cellular_preferred(cell.energy, d2d)) {
    out.mode = Mode::Cellular;
    out.t_ul = cell.t_ul;
    out.energy = cell.energy;
    if (row.demand > 0.0) {
      out.p_ul = optimal_power_ul(row, cell.t_ul);
      out.p_dl = optimal_power_dl(row, cell.t_ul);
    }
  } else {
    out.mode = Mode::D2d;
    out.energy = d2d.value();
    out.p_d2d = optimal_power_d2d(row);
  }
  return out;
}

}  // namespace d2dtdd
