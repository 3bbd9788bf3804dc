#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "d2dtdd/campaign.hpp"
#include "test_support.hpp"

using namespace d2dtdd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

Campaign small_campaign() {
  Campaign c;
  c.pairs = 6;
  c.seeds = {1, 2, 3, 4, 5};
  c.solvers = {SolverKind::AllCellular, SolverKind::FoUe,          SolverKind::RsUeBnb,
               SolverKind::RsUeBnbRandom, SolverKind::RsUeExhaustive, SolverKind::RsUeHeuristic};
  c.thetas = {1.2};
  c.threads = 2;
  return c;
}

const ResultRow& row_of(const std::vector<ResultRow>& rows, std::uint64_t seed, const std::string& solver) {
  for (const ResultRow& r : rows)
    if (r.seed == seed && r.solver == solver) return r;
  throw std::runtime_error("row not found: " + solver);
}

}  // namespace

TEST_CASE("campaign runs") {
  const Campaign c = small_campaign();
  const std::vector<ResultRow> rows = run_campaign(c);

  SECTION("all rows solved, grouped deterministically") {
    REQUIRE(rows.size() == c.seeds.size() * c.solvers.size());
    for (const ResultRow& r : rows) {
      INFO(r.solver << " seed " << r.seed << ": " << r.error);
      REQUIRE(r.ok);
    }
  }

  SECTION("result CSV is byte-identical across runs; timing lives elsewhere") {
    const std::vector<ResultRow> rows2 = run_campaign(c);
    std::ostringstream a, b;
    write_results_csv(rows, a);
    write_results_csv(rows2, b);
    REQUIRE(a.str() == b.str());
    REQUIRE_THAT(a.str(), !ContainsSubstring("wall"));
    std::ostringstream t;
    write_timing_csv(rows, t);
    REQUIRE_THAT(t.str(), ContainsSubstring("wall_s"));
  }

  SECTION("exact solvers agree seed by seed") {
    for (std::uint64_t seed : c.seeds) {
      const ResultRow& ex = row_of(rows, seed, "RS-UE-exhaustive");
      const ResultRow& bb = row_of(rows, seed, "RS-UE-BnB");
      const ResultRow& bbr = row_of(rows, seed, "RS-UE-BnB-random");
      REQUIRE_THAT(bb.total_energy, WithinRel(ex.total_energy, 1e-9));
      REQUIRE_THAT(bbr.total_energy, WithinRel(ex.total_energy, 1e-9));
    }
  }

  SECTION("per-pair gains over the cellular baseline are never negative") {
    for (std::uint64_t seed : c.seeds) {
      const ResultRow& cell = row_of(rows, seed, "all-cellular");
      const ResultRow& fo = row_of(rows, seed, "FO-UE");
      REQUIRE(cell.channels == c.pairs);
      for (int l = 0; l < c.pairs; ++l)
        REQUIRE(fo.pair_energy[l] <= cell.pair_energy[l] * (1.0 + 1e-12));
    }
  }

  SECTION("channel accounting") {
    for (const ResultRow& r : rows) {
      const int d2d = static_cast<int>(std::count(r.mode.begin(), r.mode.end(), std::uint8_t{1}));
      if (r.solver == "all-cellular" || r.solver == "FO-UE" || r.solver == "FO-SE") {
        REQUIRE(r.channels == c.pairs);
      } else {
        REQUIRE(r.channels == (c.pairs - d2d) + (d2d > 0 ? 1 : 0));
      }
    }
  }

  SECTION("figure emitters") {
    const std::string gain = emit_figure_data(FigureKind::GainCurve, rows);
    REQUIRE_THAT(gain, ContainsSubstring("rank,mean_gain_pct,mean_gain_J"));
    REQUIRE(std::count(gain.begin(), gain.end(), '\n') == c.pairs + 1);

    const std::string gap = emit_figure_data(FigureKind::HeuristicGapHist, rows);
    std::istringstream is(gap);
    std::string line;
    std::getline(is, line);
    int n = 0;
    while (std::getline(is, line)) {
      const double g = std::stod(line.substr(line.rfind(',') + 1));
      REQUIRE(g >= -1e-7);
      ++n;
    }
    REQUIRE(n == static_cast<int>(c.seeds.size()));

    const std::string evc = emit_figure_data(FigureKind::EnergyVsChannels, rows);
    REQUIRE_THAT(evc, ContainsSubstring("all-cellular"));
    const std::string nodes = emit_figure_data(FigureKind::BnbNodeTable, rows);
    REQUIRE_THAT(nodes, ContainsSubstring("RS-UE-exhaustive"));

    const std::vector<ResultRow> only_fo{row_of(rows, 1, "FO-UE")};
    REQUIRE_THROWS_WITH(emit_figure_data(FigureKind::GainCurve, only_fo), ContainsSubstring("all-cellular"));
    REQUIRE_THROWS_WITH(emit_figure_data(FigureKind::BnbNodeTable, only_fo), ContainsSubstring("RS-UE-BnB"));
  }

  SECTION("summary aggregates per solver") {
    std::ostringstream os;
    write_summary_csv(rows, os);
    REQUIRE_THAT(os.str(), ContainsSubstring("FO-UE"));
    REQUIRE_THAT(os.str(), ContainsSubstring("mean_energy_J"));
  }
}

TEST_CASE("campaign validation") {
  Campaign c = small_campaign();
  SECTION("duplicate seeds rejected") {
    c.seeds = {1, 2, 2};
    REQUIRE_THROWS_AS(run_campaign(c), std::invalid_argument);
  }
  SECTION("solver failures are recorded, not fatal") {
    c.pairs = 21;  // beyond the exhaustive guard
    c.seeds = {1};
    c.solvers = {SolverKind::RsUeExhaustive, SolverKind::FoUe};
    const std::vector<ResultRow> rows = run_campaign(c);
    REQUIRE_FALSE(rows[0].ok);
    REQUIRE_THAT(rows[0].error, ContainsSubstring("20"));
    REQUIRE(rows[1].ok);
  }
}

TEST_CASE("mode-preference area map") {
  const PhysParams params;

  SECTION("receiver on the transmitter is direct-optimal; far edge is cellular") {
    const AreaMap map = d2d_area_map(params, 250.0, 50, EnergyObjective::UserEnergy);
    auto index_of = [&](double x, double y) {
      int ix = 0, iy = 0;
      for (int i = 0; i < map.resolution; ++i) {
        if (std::fabs(map.xs[i] - x) < std::fabs(map.xs[ix] - x)) ix = i;
        if (std::fabs(map.ys[i] - y) < std::fabs(map.ys[iy] - y)) iy = i;
      }
      return static_cast<std::size_t>(iy) * map.resolution + ix;
    };
    REQUIRE(map.cls[index_of(250.0, 0.0)] == MapClass::D2dOptimal);
    REQUIRE(map.feasible[index_of(250.0, 0.0)] == 1);
    REQUIRE(map.cls[index_of(-480.0, 0.0)] == MapClass::CellularOptimal);
    REQUIRE(map.feasible[index_of(-480.0, 0.0)] == 0);
    REQUIRE(map.cls[index_of(-499.0, -499.0)] == MapClass::Outside);
    // the preferred region sits strictly inside the power-feasible disc
    for (std::size_t i = 0; i < map.cls.size(); ++i)
      if (map.cls[i] == MapClass::D2dOptimal) REQUIRE(map.feasible[i] == 1);
  }

  SECTION("distance rule reproduces the energy comparison everywhere") {
    for (double d : {250.0, 450.0}) {
      const AreaMap map = d2d_area_map(params, d, 60, EnergyObjective::UserEnergy);
      REQUIRE(map.kappa_rule_mismatches == 0);
      REQUIRE(map.max_abs_kappa_minus_1 < 0.05);
    }
  }

  SECTION("system-objective map classifies without the distance rule") {
    const AreaMap map = d2d_area_map(params, 250.0, 30, EnergyObjective::SystemEnergy);
    long d2d = 0, cell = 0;
    for (MapClass c : map.cls) {
      d2d += c == MapClass::D2dOptimal;
      cell += c == MapClass::CellularOptimal;
    }
    REQUIRE(d2d > 0);
    REQUIRE(cell > 0);
  }

  SECTION("CSV export shape") {
    const AreaMap map = d2d_area_map(params, 250.0, 20, EnergyObjective::UserEnergy);
    std::ostringstream os;
    write_map_csv(map, os);
    const std::string csv = os.str();
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 20 * 20 + 1);
    REQUIRE_THAT(csv, ContainsSubstring("x_m,y_m,class,d2d_feasible,kappa"));
  }
}
