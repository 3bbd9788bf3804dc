// Command-line front end: generate instances, solve them, run Monte Carlo
// campaigns, and draw mode-preference area maps. All outputs are CSV/JSON.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "d2dtdd/campaign.hpp"
#include "d2dtdd/scenario_io.hpp"

namespace {

using namespace d2dtdd;

PhysParams params_from_json(const nlohmann::json& j) {
  PhysParams p;
  if (j.contains("bandwidth_W")) p.bandwidth_w = j.at("bandwidth_W").get<double>();
  if (j.contains("noise_density")) p.noise_density_dbm = j.at("noise_density").get<double>();
  if (j.contains("pathloss_exponent")) p.pathloss_exponent = j.at("pathloss_exponent").get<double>();
  if (j.contains("ref_gain_G0")) p.ref_gain = j.at("ref_gain_G0").get<double>();
  if (j.contains("p_max_bs")) p.p_max_bs_w = j.at("p_max_bs").get<double>();
  if (j.contains("p_max_ue")) p.p_max_ue_w = j.at("p_max_ue").get<double>();
  if (j.contains("frame_T")) p.frame_t_s = j.at("frame_T").get<double>();
  if (j.contains("cell_radius")) p.cell_radius_m = j.at("cell_radius").get<double>();
  if (j.contains("carrier")) p.carrier = j.at("carrier").get<std::string>();
  return p;
}

Campaign campaign_from_spec(const std::string& path, bool full_scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open campaign spec '" + path + "'");
  nlohmann::json j;
  in >> j;

  Campaign c;
  if (j.contains("pairs")) c.pairs = j.at("pairs").get<int>();
  if (j.contains("params")) c.params = params_from_json(j.at("params"));
  if (j.contains("thetas")) c.thetas = j.at("thetas").get<std::vector<double>>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();

  std::uint64_t start = 1, count = 100;
  if (j.contains("seeds")) {
    const nlohmann::json& s = j.at("seeds");
    if (s.is_array()) {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    } else {
      if (s.contains("start")) start = s.at("start").get<std::uint64_t>();
      if (s.contains("count")) count = s.at("count").get<std::uint64_t>();
    }
  }
  if (c.seeds.empty()) {
    if (full_scale) count *= 10;
    for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(start + i);
  }

  if (!j.contains("solvers")) throw std::runtime_error("campaign spec: missing 'solvers'");
  for (const auto& name : j.at("solvers")) c.solvers.push_back(solver_kind_from_name(name.get<std::string>()));
  return c;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << contents;
}

int cmd_gen(int pairs, std::uint64_t seed, const std::string& out_path) {
  const CellScenario s = random_scenario(pairs, seed);
  save_scenario(s, out_path);
  std::cout << "wrote " << out_path << " (" << pairs << " pairs, seed " << seed << ")\n";
  return 0;
}

int cmd_solve(const std::string& in_path, const std::string& solver, double theta, const std::string& out_path,
              const std::string& trace_path) {
  const CellScenario s = load_scenario(in_path);
  const LinkBudget budget = build_link_budget(s);
  const SinrSystem sys = build_sinr_system(budget);

  detail::SolverVariant v{solver_kind_from_name(solver), theta, false};
  if (v.kind == SolverKind::RsUeHeuristic) v.has_theta = true;

  if (!trace_path.empty()) {
    if (v.kind != SolverKind::RsUeHeuristic)
      throw std::runtime_error("--trace is only meaningful with RS-UE-heuristic");
    HeuristicConfig cfg;
    cfg.theta = theta;
    const HeuristicOutcome out = run_heuristic(budget, sys, cfg);
    std::ostringstream ts;
    write_trace_csv(out.trace, ts);
    write_file(trace_path, ts.str());
  }

  const ResultRow row = detail::run_solver_on(budget, sys, s.seed, v);
  if (!row.ok) throw std::runtime_error("solver failed: " + row.error);

  std::ostringstream os;
  write_results_csv({row}, os);
  std::cout << os.str();
  if (!out_path.empty()) write_file(out_path, os.str());
  return 0;
}

int cmd_campaign(const std::string& spec_path, std::string out_dir, bool full_scale) {
  const Campaign c = campaign_from_spec(spec_path, full_scale);
  const std::vector<ResultRow> rows = run_campaign(c);

  if (out_dir.empty()) out_dir = ".";
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  std::ostringstream results, timing, summary;
  write_results_csv(rows, results);
  write_timing_csv(rows, timing);
  write_summary_csv(rows, summary);
  write_file(dir / "results.csv", results.str());
  write_file(dir / "timing.csv", timing.str());
  write_file(dir / "summary.csv", summary.str());

  const std::pair<FigureKind, const char*> figures[] = {
      {FigureKind::GainCurve, "gain_curve.csv"},
      {FigureKind::HeuristicGapHist, "heuristic_gap.csv"},
      {FigureKind::EnergyVsChannels, "energy_vs_channels.csv"},
      {FigureKind::BnbNodeTable, "bnb_nodes.csv"},
  };
  for (const auto& [kind, name] : figures) {
    try {
      write_file(dir / name, emit_figure_data(kind, rows));
    } catch (const std::exception&) {
      // figure needs solvers this campaign did not run
    }
  }

  long failed = 0;
  for (const ResultRow& r : rows)
    if (!r.ok) ++failed;
  std::cout << "campaign done: " << rows.size() << " rows (" << failed << " failed) in " << out_dir << "\n";
  return failed == 0 ? 0 : 2;
}

int cmd_map(double tx_distance, int resolution, const std::string& objective, const std::string& out_path) {
  const EnergyObjective obj = objective == "SE" ? EnergyObjective::SystemEnergy : EnergyObjective::UserEnergy;
  const AreaMap map = d2d_area_map(PhysParams::defaults(), tx_distance, resolution, obj);
  std::ostringstream os;
  write_map_csv(map, os);
  write_file(out_path, os.str());
  std::cout << "wrote " << out_path << '\n';
  if (obj == EnergyObjective::UserEnergy) {
    std::cout << "max |kappa - 1| = " << map.max_abs_kappa_minus_1 << '\n'
              << "distance-rule mismatches: " << map.kappa_rule_mismatches << '\n';
    if (map.kappa_rule_mismatches != 0) return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-optimal D2D mode selection in a dynamic-TDD cell"};
  app.require_subcommand(1);

  int pairs = 10;
  std::uint64_t seed = 1;
  std::string out_path, in_path, solver = "FO-UE", spec_path, objective = "UE";
  double theta = 1.2;
  double tx_distance = 250.0;
  int resolution = 200;
  bool full_scale = false;

  CLI::App* gen = app.add_subcommand("gen", "generate a random scenario file");
  gen->add_option("--pairs", pairs, "number of user pairs")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out_path, "output scenario file")->required();

  CLI::App* solve = app.add_subcommand("solve", "solve one scenario with one solver");
  std::string trace_path;
  solve->add_option("--in", in_path, "scenario file")->required();
  solve->add_option("--solver", solver,
                    "all-cellular | FO-UE | FO-SE | RS-UE-BnB | RS-UE-BnB-random | RS-UE-exhaustive | RS-UE-heuristic");
  solve->add_option("--theta", theta, "heuristic switch margin (>= 1)");
  solve->add_option("--out", out_path, "also write the result row here");
  solve->add_option("--trace", trace_path, "write the heuristic per-iteration table here");

  CLI::App* campaign = app.add_subcommand("campaign", "run a Monte Carlo campaign from a spec file");
  campaign->add_option("spec", spec_path, "campaign spec (JSON)")->required();
  campaign->add_option("--out", out_path, "output directory");
  campaign->add_flag("--full-scale", full_scale, "10x the default seed count");

  CLI::App* map = app.add_subcommand("map", "mode-preference map over receiver positions");
  map->add_option("--tx-distance", tx_distance, "transmitter distance from the BS [m]");
  map->add_option("--resolution", resolution, "grid resolution per axis")->check(CLI::Range(2, 4096));
  map->add_option("--objective", objective, "UE | SE")->check(CLI::IsMember({"UE", "SE"}));
  map->add_option("--out", out_path, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(pairs, seed, out_path);
    if (solve->parsed()) return cmd_solve(in_path, solver, theta, out_path, trace_path);
    if (campaign->parsed()) return cmd_campaign(spec_path, out_path, full_scale);
    if (map->parsed()) return cmd_map(tx_distance, resolution, objective, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
