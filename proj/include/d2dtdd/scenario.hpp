#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2dtdd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Physical-layer parameters of the single-cell deployment.
/// Internal units are W, Hz, seconds and nats; the noise density is the only
/// dB-scale input and is converted once by noise_power().
struct PhysParams {
  double bandwidth_w = 5e6;         // channel bandwidth W [Hz]
  double noise_density_dbm = -174;  // noise power density [dBm/Hz]
  double pathloss_exponent = 4.0;   // alpha
  double ref_gain = 5.7e-4;         // gain at the 1 m reference distance
  double p_max_bs_w = 40.0;         // BS transmit power cap [W]
  double p_max_ue_w = 0.25;         // device transmit power cap [W]
  double frame_t_s = 1.0;           // frame duration T [s]
  double cell_radius_m = 500.0;
  std::string carrier = "1 GHz";    // informational only

  /// Noise power over the channel, sigma^2 = 10^((N0_dBm - 30)/10) * W, in W.
  double noise_power() const {
    return std::pow(10.0, (noise_density_dbm - 30.0) / 10.0) * bandwidth_w;
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string("PhysParams: ") + name + " must be positive");
    };
    positive(bandwidth_w, "bandwidth_w");
    positive(ref_gain, "ref_gain");
    positive(p_max_bs_w, "p_max_bs_w");
    positive(p_max_ue_w, "p_max_ue_w");
    positive(frame_t_s, "frame_t_s");
    positive(cell_radius_m, "cell_radius_m");
    if (!(pathloss_exponent >= 2.0))
      throw std::invalid_argument("PhysParams: pathloss_exponent must be >= 2");
    if (!(noise_power() > 0.0))
      throw std::invalid_argument("PhysParams: derived noise power must be positive");
  }

  /// Urban macro-cell defaults used by the experiment harness.
  static PhysParams defaults() { return PhysParams{}; }
};

/// One transmitter/receiver pair with its per-frame traffic demand in nats.
struct UserPair {
  int id = 0;
  Vec2 tx;
  Vec2 rx;
  double demand = 0.0;  // b, nats per frame
};

/// Immutable problem instance: cell parameters plus the user pairs.
struct CellScenario {
  PhysParams params;
  Vec2 bs;  // base station position, origin by default
  std::vector<UserPair> pairs;
  std::uint64_t seed = 0;  // provenance of generated instances
};

/// Distance-based power gain G0 * d^(-alpha). Strictly decreasing in d.
inline double pathloss_gain(double d, const PhysParams& params) {
  if (!(d > 0.0)) throw std::domain_error("pathloss_gain: distance must be positive");
  return params.ref_gain * std::pow(d, -params.pathloss_exponent);
}

/// Per-pair derived quantities: channel gains, peak rates, and the window of
/// common uplink times that keeps the pair power-feasible in cellular mode.
/// Rows carry their physical context so that every per-pair computation is a
/// pure function of the row.
struct PairBudget {
  int id = 0;
  double demand = 0.0;    // b [nats/frame]
  double g_tx_bs = 0.0;   // gain Tx -> BS
  double g_bs_rx = 0.0;   // gain BS -> Rx
  double g_direct = 0.0;  // gain Tx -> Rx
  double r_ul_max = 0.0;  // peak uplink rate [nats/s]
  double r_dl_max = 0.0;  // peak downlink rate [nats/s]
  double r_d2d_max = 0.0; // peak direct rate, interference-free [nats/s]
  double ul_lo = 0.0;     // b / r_ul_max
  double ul_hi = 0.0;     // T - b / r_dl_max
  double bandwidth = 0.0; // W [Hz]
  double sigma2 = 0.0;    // noise power [W]
  double frame_t = 0.0;   // T [s]
  double p_max_ue = 0.0;
  double p_max_bs = 0.0;
};

struct LinkBudget {
  PhysParams params;
  double sigma2 = 0.0;
  std::vector<PairBudget> pairs;
  std::vector<double> cross_gain;  // row-major L*L; [j*L + l] = gain Tx-j -> Rx-l

  int size() const { return static_cast<int>(pairs.size()); }
  double gain_tx_to_rx(int tx, int rx) const { return cross_gain[static_cast<std::size_t>(tx) * pairs.size() + rx]; }
};

namespace detail {

// User-to-user distances are floored at the 1 m reference so gains never
// exceed ref_gain; distances to the BS must be strictly positive.
inline double user_distance_floored(const Vec2& a, const Vec2& b) {
  return std::max(distance(a, b), 1.0);
}

inline double bs_distance(const Vec2& user, const Vec2& bs, int pair_id, const char* which) {
  const double d = distance(user, bs);
  if (d == 0.0)
    throw std::domain_error("pair " + std::to_string(pair_id) + ": " + which + " co-located with the base station");
  return std::max(d, 1.0);
}

}  // namespace detail

/// Shannon rate W * ln(1 + p*G / (sigma2 + I)), in nats/s.
inline double shannon_rate(double p, double gain, double sigma2, double interference, double bandwidth) {
  return bandwidth * std::log1p(p * gain / (sigma2 + interference));
}

/// Builds the budget row of one pair from raw geometry. Throws when the pair
/// cannot be served in cellular mode within the frame (ul_lo > ul_hi).
inline PairBudget make_pair_budget(const PhysParams& params, const Vec2& bs, const UserPair& pair) {
  PairBudget row;
  row.id = pair.id;
  row.demand = pair.demand;
  row.bandwidth = params.bandwidth_w;
  row.sigma2 = params.noise_power();
  row.frame_t = params.frame_t_s;
  row.p_max_ue = params.p_max_ue_w;
  row.p_max_bs = params.p_max_bs_w;

  row.g_tx_bs = pathloss_gain(detail::bs_distance(pair.tx, bs, pair.id, "transmitter"), params);
  row.g_bs_rx = pathloss_gain(detail::bs_distance(pair.rx, bs, pair.id, "receiver"), params);
  row.g_direct = pathloss_gain(detail::user_distance_floored(pair.tx, pair.rx), params);

  row.r_ul_max = shannon_rate(params.p_max_ue_w, row.g_tx_bs, row.sigma2, 0.0, params.bandwidth_w);
  row.r_dl_max = shannon_rate(params.p_max_bs_w, row.g_bs_rx, row.sigma2, 0.0, params.bandwidth_w);
  row.r_d2d_max = shannon_rate(params.p_max_ue_w, row.g_direct, row.sigma2, 0.0, params.bandwidth_w);

  row.ul_lo = pair.demand / row.r_ul_max;
  row.ul_hi = params.frame_t_s - pair.demand / row.r_dl_max;
  if (!(row.ul_lo <= row.ul_hi))
    throw std::domain_error("pair " + std::to_string(pair.id) + ": demand not supportable in cellular mode");
  return row;
}

/// Validates the scenario invariants: positive demands, unique contiguous ids
/// starting at 1, users inside the cell, and cellular feasibility per pair.
inline void validate_scenario(const CellScenario& s) {
  s.params.validate();
  const int n = static_cast<int>(s.pairs.size());
  for (int i = 0; i < n; ++i) {
    const UserPair& p = s.pairs[i];
    if (p.id != i + 1)
      throw std::invalid_argument("pair ids must be contiguous 1..L (got id " + std::to_string(p.id) +
                                  " at position " + std::to_string(i) + ")");
    if (!(p.demand > 0.0))
      throw std::invalid_argument("pair " + std::to_string(p.id) + ": demand must be positive");
    const double radius = s.params.cell_radius_m * (1.0 + 1e-12);
    if (distance(p.tx, s.bs) > radius || distance(p.rx, s.bs) > radius)
      throw std::invalid_argument("pair " + std::to_string(p.id) + ": users must lie within the cell radius");
  }
}

/// Derives every pair's budget row and the full cross-gain matrix.
inline LinkBudget build_link_budget(const CellScenario& s) {
  validate_scenario(s);
  LinkBudget budget;
  budget.params = s.params;
  budget.sigma2 = s.params.noise_power();
  budget.pairs.reserve(s.pairs.size());
  for (const UserPair& p : s.pairs) budget.pairs.push_back(make_pair_budget(s.params, s.bs, p));

  const std::size_t n = s.pairs.size();
  budget.cross_gain.assign(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l)
      budget.cross_gain[j * n + l] =
          pathloss_gain(detail::user_distance_floored(s.pairs[j].tx, s.pairs[l].rx), s.params);
  return budget;
}

namespace detail {

/// Deterministic uniform double in [0, 1) from the top 53 bits of the engine.
template <typename Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Engine>
Vec2 sample_disc(Engine& rng, double radius) {
  const double r = radius * std::sqrt(uniform01(rng));
  const double ang = 2.0 * std::numbers::pi * uniform01(rng);
  return Vec2{r * std::cos(ang), r * std::sin(ang)};
}

}  // namespace detail

/// Common per-pair demand that stays cellular-feasible even with both users at
/// the cell edge: b = r_ul * r_dl / (r_ul + r_dl) * T with edge peak rates.
inline double edge_feasible_demand(const PhysParams& params) {
  const double sigma2 = params.noise_power();
  const double g_edge = pathloss_gain(params.cell_radius_m, params);
  const double r_ul = shannon_rate(params.p_max_ue_w, g_edge, sigma2, 0.0, params.bandwidth_w);
  const double r_dl = shannon_rate(params.p_max_bs_w, g_edge, sigma2, 0.0, params.bandwidth_w);
  if (!(r_ul > 0.0) || !(r_dl > 0.0))
    throw std::domain_error("edge_feasible_demand: peak edge rates must be positive");
  return r_ul * r_dl / (r_ul + r_dl) * params.frame_t_s;
}

/// Random instance with L pairs placed uniformly over the cell disc and a
/// common demand chosen so every placement is cellular-feasible.
/// Deterministic in (L, seed, params).
inline CellScenario random_scenario(int num_pairs, std::uint64_t seed, const PhysParams& params = PhysParams::defaults()) {
  if (num_pairs < 1) throw std::invalid_argument("random_scenario: need at least one pair");
  params.validate();
  const double b = edge_feasible_demand(params);

  CellScenario s;
  s.params = params;
  s.bs = Vec2{0.0, 0.0};
  s.seed = seed;
  s.pairs.reserve(num_pairs);

  std::mt19937_64 rng(seed);
  for (int l = 1; l <= num_pairs; ++l) {
    for (;;) {  // resample on the (practically impossible) infeasible draw
      UserPair p;
      p.id = l;
      p.tx = detail::sample_disc(rng, params.cell_radius_m);
      p.rx = detail::sample_disc(rng, params.cell_radius_m);
      p.demand = b;
      if (distance(p.tx, s.bs) == 0.0 || distance(p.rx, s.bs) == 0.0) continue;
      try {
        (void)make_pair_budget(params, s.bs, p);
      } catch (const std::domain_error&) {
        continue;
      }
      s.pairs.push_back(p);
      break;
    }
  }
  return s;
}

}  // namespace d2dtdd
