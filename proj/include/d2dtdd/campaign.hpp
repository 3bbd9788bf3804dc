#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "d2dtdd/energy.hpp"
#include "d2dtdd/fo.hpp"
#include "d2dtdd/heuristic.hpp"
#include "d2dtdd/rs.hpp"
#include "d2dtdd/scenario.hpp"

namespace d2dtdd {

enum class SolverKind {
  AllCellular,
  FoUe,
  FoSe,
  RsUeBnb,
  RsUeBnbRandom,
  RsUeExhaustive,
  RsUeHeuristic,
};

inline const char* solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::AllCellular: return "all-cellular";
    case SolverKind::FoUe: return "FO-UE";
    case SolverKind::FoSe: return "FO-SE";
    case SolverKind::RsUeBnb: return "RS-UE-BnB";
    case SolverKind::RsUeBnbRandom: return "RS-UE-BnB-random";
    case SolverKind::RsUeExhaustive: return "RS-UE-exhaustive";
    case SolverKind::RsUeHeuristic: return "RS-UE-heuristic";
  }
  return "?";
}

inline SolverKind solver_kind_from_name(const std::string& name) {
  for (SolverKind k : {SolverKind::AllCellular, SolverKind::FoUe, SolverKind::FoSe, SolverKind::RsUeBnb,
                       SolverKind::RsUeBnbRandom, SolverKind::RsUeExhaustive, SolverKind::RsUeHeuristic})
    if (name == solver_kind_name(k)) return k;
  throw std::invalid_argument("unknown solver '" + name + "'");
}

/// Monte Carlo experiment description: which instances to generate and which
/// solvers to run on each of them.
struct Campaign {
  int pairs = 10;
  std::vector<std::uint64_t> seeds;
  PhysParams params = PhysParams::defaults();
  std::vector<SolverKind> solvers;
  std::vector<double> thetas = {1.2};  // heuristic variants
  int threads = 0;                     // 0: hardware concurrency

  void validate() const {
    if (pairs < 1) throw std::invalid_argument("campaign: pairs must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("campaign: no seeds");
    std::vector<std::uint64_t> s = seeds;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw std::invalid_argument("campaign: seeds must be distinct");
    if (solvers.empty()) throw std::invalid_argument("campaign: no solvers selected");
  }
};

/// One solver outcome on one instance.
struct ResultRow {
  std::uint64_t seed = 0;
  std::string solver;
  double theta = 0.0;
  bool has_theta = false;
  bool ok = true;
  std::string error;
  double total_energy = 0.0;
  std::vector<double> pair_energy;
  std::vector<std::uint8_t> mode;
  int channels = 0;
  double t_ul = 0.0;
  long nodes_explored = -1;  // -1: not applicable
  long solutions = -1;       // complete mode vectors examined
  long leaves = -1;
  double wall_s = 0.0;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string mode_string(const std::vector<std::uint8_t>& mode) {
  std::string s;
  s.reserve(mode.size());
  for (std::uint8_t m : mode) s.push_back(m ? '1' : '0');
  return s;
}

struct SolverVariant {
  SolverKind kind;
  double theta = 0.0;
  bool has_theta = false;
};

inline std::vector<SolverVariant> expand_variants(const Campaign& c) {
  std::vector<SolverVariant> out;
  for (SolverKind k : c.solvers) {
    if (k == SolverKind::RsUeHeuristic) {
      for (double th : c.thetas) out.push_back({k, th, true});
    } else {
      out.push_back({k, 0.0, false});
    }
  }
  return out;
}

/// Channels consumed by a solution: one per cellular pair, one per direct
/// pair on orthogonal channels, a single shared channel otherwise.
inline int channels_used(SolverKind kind, const std::vector<std::uint8_t>& mode) {
  const int n = static_cast<int>(mode.size());
  const int d2d = static_cast<int>(std::count(mode.begin(), mode.end(), std::uint8_t{1}));
  switch (kind) {
    case SolverKind::AllCellular:
    case SolverKind::FoUe:
    case SolverKind::FoSe:
      return n;
    default:
      return (n - d2d) + (d2d > 0 ? 1 : 0);
  }
}

inline ResultRow run_solver_on(const LinkBudget& budget, const SinrSystem& sys, std::uint64_t seed,
                               const SolverVariant& v) {
  ResultRow row;
  row.seed = seed;
  row.solver = solver_kind_name(v.kind);
  row.theta = v.theta;
  row.has_theta = v.has_theta;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (v.kind) {
      case SolverKind::AllCellular: {
        std::vector<int> all(budget.size());
        std::iota(all.begin(), all.end(), 0);
        const CommonTime ct = cellular_common_time(budget, all, EnergyObjective::UserEnergy);
        if (!ct.feasible) throw std::runtime_error("all-cellular allocation infeasible");
        const RsSolution sol = detail::assemble_rs_solution(budget, EnergyObjective::UserEnergy, {}, {}, ct);
        row.total_energy = sol.total_energy;
        row.pair_energy = sol.pair_energy;
        row.mode = sol.mode;
        row.t_ul = sol.t_ul;
        break;
      }
      case SolverKind::FoUe:
      case SolverKind::FoSe: {
        const EnergyObjective obj =
            v.kind == SolverKind::FoUe ? EnergyObjective::UserEnergy : EnergyObjective::SystemEnergy;
        const FoSolution sol = solve_fo(budget, obj);
        row.total_energy = sol.total_energy;
        row.pair_energy = sol.pair_energy;
        row.mode = sol.mode;
        row.t_ul = sol.t_ul;
        break;
      }
      case SolverKind::RsUeBnb:
      case SolverKind::RsUeBnbRandom: {
        BnbOptions opts;
        opts.rule = v.kind == SolverKind::RsUeBnb ? BranchRule::Proposed : BranchRule::RandomOrder;
        opts.shuffle_seed = seed;
        const RsSolution sol = rs_branch_and_bound(budget, sys, EnergyObjective::UserEnergy, opts);
        row.total_energy = sol.total_energy;
        row.pair_energy = sol.pair_energy;
        row.mode = sol.mode;
        row.t_ul = sol.t_ul;
        row.nodes_explored = sol.stats.nodes_explored;
        row.solutions = sol.stats.solutions_evaluated;
        row.leaves = sol.stats.leaves_evaluated;
        break;
      }
      case SolverKind::RsUeExhaustive: {
        const RsSolution sol = rs_exhaustive(budget, sys, EnergyObjective::UserEnergy);
        row.total_energy = sol.total_energy;
        row.pair_energy = sol.pair_energy;
        row.mode = sol.mode;
        row.t_ul = sol.t_ul;
        row.nodes_explored = sol.stats.nodes_explored;
        row.solutions = sol.stats.solutions_evaluated;
        row.leaves = sol.stats.leaves_evaluated;
        break;
      }
      case SolverKind::RsUeHeuristic: {
        HeuristicConfig cfg;
        cfg.theta = v.theta;
        const HeuristicOutcome out = run_heuristic(budget, sys, cfg);
        row.total_energy = out.solution.total_energy;
        row.pair_energy = out.solution.pair_energy;
        row.mode = out.solution.mode;
        row.t_ul = out.solution.t_ul;
        break;
      }
    }
    row.channels = channels_used(v.kind, row.mode);
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace detail

/// Runs every selected solver on every seed. Instances are dispatched to a
/// worker pool; rows come back ordered by (seed position, solver position) so
/// repeated runs produce identical output.
inline std::vector<ResultRow> run_campaign(const Campaign& c) {
  c.validate();
  const std::vector<detail::SolverVariant> variants = detail::expand_variants(c);
  std::vector<ResultRow> rows(c.seeds.size() * variants.size());

  unsigned n_threads = c.threads > 0 ? static_cast<unsigned>(c.threads) : std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  n_threads = std::min<unsigned>(n_threads, c.seeds.size());

  std::atomic<std::size_t> next_seed{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t si = next_seed.fetch_add(1);
      if (si >= c.seeds.size()) return;
      const std::uint64_t seed = c.seeds[si];
      LinkBudget budget;
      SinrSystem sys;
      bool instance_ok = true;
      std::string instance_error;
      try {
        budget = build_link_budget(random_scenario(c.pairs, seed, c.params));
        sys = build_sinr_system(budget);
      } catch (const std::exception& e) {
        instance_ok = false;
        instance_error = e.what();
      }
      for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        ResultRow& row = rows[si * variants.size() + vi];
        if (!instance_ok) {
          row.seed = seed;
          row.solver = solver_kind_name(variants[vi].kind);
          row.theta = variants[vi].theta;
          row.has_theta = variants[vi].has_theta;
          row.ok = false;
          row.error = instance_error;
          continue;
        }
        row = detail::run_solver_on(budget, sys, seed, variants[vi]);
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return rows;
}

/// Result table without timing columns; identical campaigns give identical bytes.
inline void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "seed,solver,theta,status,total_energy_J,t_ul_s,channels,nodes_explored,solutions,leaves,modes,"
        "pair_energies_J\n";
  for (const ResultRow& r : rows) {
    os << r.seed << ',' << r.solver << ',';
    if (r.has_theta) os << detail::fmt17(r.theta);
    os << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) {
      os << detail::fmt17(r.total_energy) << ',' << detail::fmt17(r.t_ul) << ',' << r.channels << ',';
      if (r.nodes_explored >= 0) os << r.nodes_explored;
      os << ',';
      if (r.solutions >= 0) os << r.solutions;
      os << ',';
      if (r.leaves >= 0) os << r.leaves;
      os << ',' << detail::mode_string(r.mode) << ',';
      for (std::size_t i = 0; i < r.pair_energy.size(); ++i) {
        if (i) os << ';';
        os << detail::fmt17(r.pair_energy[i]);
      }
    } else {
      os << ",,,,,,," << '"' << r.error << '"';
    }
    os << '\n';
  }
}

inline void write_timing_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << "seed,solver,theta,wall_s\n";
  for (const ResultRow& r : rows) {
    os << r.seed << ',' << r.solver << ',';
    if (r.has_theta) os << detail::fmt17(r.theta);
    os << ',' << detail::fmt17(r.wall_s) << '\n';
  }
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * (sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace detail

/// Per-solver means and quantiles of the energy, channel, and node counts.
inline void write_summary_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  struct Agg {
    std::vector<double> energy;
    std::vector<double> channels;
    std::vector<double> nodes;
  };
  std::map<std::pair<std::string, double>, Agg> groups;
  for (const ResultRow& r : rows) {
    if (!r.ok) continue;
    Agg& g = groups[{r.solver, r.has_theta ? r.theta : -1.0}];
    g.energy.push_back(r.total_energy);
    g.channels.push_back(r.channels);
    if (r.nodes_explored >= 0) g.nodes.push_back(static_cast<double>(r.nodes_explored));
  }
  os << "solver,theta,count,mean_energy_J,q10_energy_J,median_energy_J,q90_energy_J,mean_channels,mean_nodes_explored\n";
  for (auto& [key, g] : groups) {
    std::sort(g.energy.begin(), g.energy.end());
    const double mean_e = std::accumulate(g.energy.begin(), g.energy.end(), 0.0) / g.energy.size();
    const double mean_c = std::accumulate(g.channels.begin(), g.channels.end(), 0.0) / g.channels.size();
    os << key.first << ',';
    if (key.second >= 0.0) os << detail::fmt17(key.second);
    os << ',' << g.energy.size() << ',' << detail::fmt17(mean_e) << ','
       << detail::fmt17(detail::quantile_sorted(g.energy, 0.10)) << ','
       << detail::fmt17(detail::quantile_sorted(g.energy, 0.50)) << ','
       << detail::fmt17(detail::quantile_sorted(g.energy, 0.90)) << ',' << detail::fmt17(mean_c) << ',';
    if (!g.nodes.empty())
      os << detail::fmt17(std::accumulate(g.nodes.begin(), g.nodes.end(), 0.0) / g.nodes.size());
    os << '\n';
  }
}

enum class FigureKind { GainCurve, HeuristicGapHist, EnergyVsChannels, BnbNodeTable };

namespace detail {

inline std::map<std::uint64_t, const ResultRow*> rows_for(const std::vector<ResultRow>& rows,
                                                          const std::string& solver, double theta = -1.0) {
  std::map<std::uint64_t, const ResultRow*> out;
  for (const ResultRow& r : rows) {
    if (!r.ok || r.solver != solver) continue;
    if (theta >= 0.0 && (!r.has_theta || r.theta != theta)) continue;
    out[r.seed] = &r;
  }
  return out;
}

}  // namespace detail

/// Columnar data behind the standard evaluation figures. Throws when the rows
/// for a required solver are missing, naming what has to be run.
inline std::string emit_figure_data(FigureKind kind, const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  switch (kind) {
    case FigureKind::GainCurve: {
      const auto cell = detail::rows_for(rows, "all-cellular");
      const auto fo = detail::rows_for(rows, "FO-UE");
      if (cell.empty() || fo.empty())
        throw std::runtime_error("gain-curve needs rows from: all-cellular, FO-UE");
      // per seed, pairs sorted by increasing percentage gain; averaged by rank
      std::vector<std::vector<double>> pct_by_rank, abs_by_rank;
      for (const auto& [seed, crow] : cell) {
        const auto it = fo.find(seed);
        if (it == fo.end()) continue;
        const ResultRow& frow = *it->second;
        std::vector<std::pair<double, double>> gains;  // (pct, abs)
        for (std::size_t i = 0; i < crow->pair_energy.size(); ++i) {
          const double abs_gain = crow->pair_energy[i] - frow.pair_energy[i];
          gains.push_back({100.0 * abs_gain / crow->pair_energy[i], abs_gain});
        }
        std::sort(gains.begin(), gains.end());
        if (pct_by_rank.size() < gains.size()) {
          pct_by_rank.resize(gains.size());
          abs_by_rank.resize(gains.size());
        }
        for (std::size_t i = 0; i < gains.size(); ++i) {
          pct_by_rank[i].push_back(gains[i].first);
          abs_by_rank[i].push_back(gains[i].second);
        }
      }
      if (pct_by_rank.empty()) throw std::runtime_error("gain-curve needs matching all-cellular and FO-UE seeds");
      os << "rank,mean_gain_pct,mean_gain_J\n";
      for (std::size_t i = 0; i < pct_by_rank.size(); ++i) {
        const double mp = std::accumulate(pct_by_rank[i].begin(), pct_by_rank[i].end(), 0.0) / pct_by_rank[i].size();
        const double ma = std::accumulate(abs_by_rank[i].begin(), abs_by_rank[i].end(), 0.0) / abs_by_rank[i].size();
        os << i + 1 << ',' << detail::fmt17(mp) << ',' << detail::fmt17(ma) << '\n';
      }
      break;
    }
    case FigureKind::HeuristicGapHist: {
      const auto opt = detail::rows_for(rows, "RS-UE-BnB");
      if (opt.empty()) throw std::runtime_error("heuristic-gap-hist needs rows from: RS-UE-BnB, RS-UE-heuristic");
      os << "seed,theta,gap_pct\n";
      bool any = false;
      for (const ResultRow& r : rows) {
        if (!r.ok || r.solver != "RS-UE-heuristic") continue;
        const auto it = opt.find(r.seed);
        if (it == opt.end()) continue;
        any = true;
        const double gap = 100.0 * (r.total_energy - it->second->total_energy) / it->second->total_energy;
        os << r.seed << ',' << detail::fmt17(r.theta) << ',' << detail::fmt17(gap) << '\n';
      }
      if (!any) throw std::runtime_error("heuristic-gap-hist needs rows from: RS-UE-BnB, RS-UE-heuristic");
      break;
    }
    case FigureKind::EnergyVsChannels: {
      std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>> groups;
      for (const ResultRow& r : rows) {
        if (!r.ok) continue;
        auto& g = groups[{r.solver, r.has_theta ? r.theta : -1.0}];
        g.first.push_back(r.total_energy);
        g.second.push_back(r.channels);
      }
      if (groups.empty()) throw std::runtime_error("energy-vs-channels needs at least one solved row");
      os << "solver,theta,mean_energy_J,mean_channels\n";
      for (const auto& [key, g] : groups) {
        os << key.first << ',';
        if (key.second >= 0.0) os << detail::fmt17(key.second);
        os << ',' << detail::fmt17(std::accumulate(g.first.begin(), g.first.end(), 0.0) / g.first.size()) << ','
           << detail::fmt17(std::accumulate(g.second.begin(), g.second.end(), 0.0) / g.second.size()) << '\n';
      }
      break;
    }
    case FigureKind::BnbNodeTable: {
      std::vector<std::string> missing;
      os << "algorithm,mean_explored_solutions,mean_explored_nodes,mean_explored_leaves\n";
      for (const char* solver : {"RS-UE-exhaustive", "RS-UE-BnB-random", "RS-UE-BnB"}) {
        const auto rs = detail::rows_for(rows, solver);
        if (rs.empty()) {
          missing.push_back(solver);
          continue;
        }
        double nodes = 0.0, solutions = 0.0, leaves = 0.0;
        for (const auto& [seed, r] : rs) {
          nodes += static_cast<double>(r->nodes_explored);
          solutions += static_cast<double>(r->solutions);
          leaves += static_cast<double>(r->leaves);
        }
        os << solver << ',' << detail::fmt17(solutions / rs.size()) << ',' << detail::fmt17(nodes / rs.size())
           << ',' << detail::fmt17(leaves / rs.size()) << '\n';
      }
      if (!missing.empty()) {
        std::string what = "bnb-node-table needs rows from:";
        for (const std::string& m : missing) what += " " + m;
        throw std::runtime_error(what);
      }
      break;
    }
  }
  return os.str();
}

enum class MapClass : std::uint8_t { Outside, CellularOptimal, D2dOptimal };

inline const char* map_class_name(MapClass c) {
  switch (c) {
    case MapClass::Outside: return "outside";
    case MapClass::CellularOptimal: return "cellular";
    case MapClass::D2dOptimal: return "d2d";
  }
  return "?";
}

/// Mode-preference map over receiver positions for a transmitter at a fixed
/// distance from the BS. Every cell is classified by the single-pair energy
/// comparison, with the direct-link power-feasible disc marked alongside;
/// under the user objective the equivalent distance-ratio rule
/// d_direct <= kappa * d_tx_bs is evaluated too and cross-checked.
struct AreaMap {
  double tx_distance = 0.0;
  int resolution = 0;
  EnergyObjective objective = EnergyObjective::UserEnergy;
  double demand = 0.0;
  std::vector<double> xs, ys;          // cell-center coordinates per axis
  std::vector<MapClass> cls;           // resolution x resolution, row-major by y
  std::vector<std::uint8_t> feasible;  // direct link can carry the demand
  std::vector<double> kappa;           // per cell; NaN outside (user objective only)
  double max_abs_kappa_minus_1 = 0.0;
  long kappa_rule_mismatches = 0;      // distance rule vs energy comparison
};

inline AreaMap d2d_area_map(const PhysParams& params, double tx_distance, int resolution,
                            EnergyObjective objective) {
  params.validate();
  if (!(tx_distance > 0.0 && tx_distance < params.cell_radius_m))
    throw std::invalid_argument("d2d_area_map: transmitter distance must lie inside the cell");
  if (resolution < 2) throw std::invalid_argument("d2d_area_map: resolution must be >= 2");

  AreaMap map;
  map.tx_distance = tx_distance;
  map.resolution = resolution;
  map.objective = objective;

  const double R = params.cell_radius_m;
  const double sigma2 = params.noise_power();
  const Vec2 bs{0.0, 0.0};
  const Vec2 tx{tx_distance, 0.0};

  // Largest demand the pair can carry in cellular mode with the receiver on
  // the cell boundary; keeps every receiver position in the map feasible.
  const double r_ul = shannon_rate(params.p_max_ue_w, pathloss_gain(tx_distance, params), sigma2, 0.0, params.bandwidth_w);
  const double r_dl_edge = shannon_rate(params.p_max_bs_w, pathloss_gain(R, params), sigma2, 0.0, params.bandwidth_w);
  map.demand = r_ul * r_dl_edge / (r_ul + r_dl_edge) * params.frame_t_s;

  map.xs.resize(resolution);
  map.ys.resize(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double c = (-R) + (2.0 * R) * (i + 0.5) / resolution;
    map.xs[i] = c;
    map.ys[i] = c;
  }
  map.cls.assign(static_cast<std::size_t>(resolution) * resolution, MapClass::Outside);
  map.feasible.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  map.kappa.assign(static_cast<std::size_t>(resolution) * resolution, std::nan(""));

  const double alpha = params.pathloss_exponent;
  const double wt = params.bandwidth_w * params.frame_t_s;

  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      const std::size_t idx = static_cast<std::size_t>(iy) * resolution + ix;
      const Vec2 rx{map.xs[ix], map.ys[iy]};
      if (std::hypot(rx.x, rx.y) > R) continue;

      UserPair pair;
      pair.id = 1;
      pair.tx = tx;
      pair.rx = rx;
      pair.demand = map.demand;
      const PairBudget row = make_pair_budget(params, bs, pair);

      const SinglePairSolution pick = single_pair_select(row, objective);
      map.cls[idx] = pick.mode == Mode::D2d ? MapClass::D2dOptimal : MapClass::CellularOptimal;
      map.feasible[idx] = d2d_feasible(row) ? 1 : 0;

      if (objective == EnergyObjective::UserEnergy) {
        const double t_star = row.ul_hi;
        const double num = std::expm1(map.demand / wt) * params.frame_t_s;
        const double den = std::expm1(map.demand / (params.bandwidth_w * t_star)) * t_star;
        const double k = std::pow(num / den, -1.0 / alpha);
        map.kappa[idx] = k;
        map.max_abs_kappa_minus_1 = std::max(map.max_abs_kappa_minus_1, std::fabs(k - 1.0));
        const double d_direct = detail::user_distance_floored(tx, rx);
        const double d_tx_bs = std::max(tx_distance, 1.0);
        const bool rule_d2d = d_direct <= k * d_tx_bs;
        const bool energy_d2d = pick.mode == Mode::D2d;
        if (rule_d2d != energy_d2d) ++map.kappa_rule_mismatches;
      }
    }
  }
  return map;
}

inline void write_map_csv(const AreaMap& map, std::ostream& os) {
  os << "x_m,y_m,class,d2d_feasible,kappa\n";
  for (int iy = 0; iy < map.resolution; ++iy) {
    for (int ix = 0; ix < map.resolution; ++ix) {
      const std::size_t idx = static_cast<std::size_t>(iy) * map.resolution + ix;
      os << detail::fmt17(map.xs[ix]) << ',' << detail::fmt17(map.ys[iy]) << ','
         << map_class_name(map.cls[idx]) << ',' << int(map.feasible[idx]) << ',';
      if (!std::isnan(map.kappa[idx])) os << detail::fmt17(map.kappa[idx]);
      os << '\n';
    }
  }
}

}  // namespace d2dtdd
