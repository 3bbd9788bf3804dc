#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "d2dtdd/scenario.hpp"
#include "d2dtdd/scenario_io.hpp"
#include "test_support.hpp"

using namespace d2dtdd;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

TEST_CASE("pathloss gain") {
  PhysParams p;

  SECTION("reference distance") {
    REQUIRE(pathloss_gain(1.0, p) == 5.7e-4);
  }
  SECTION("power of ten") {
    PhysParams unit = p;
    unit.ref_gain = 1.0;
    REQUIRE_THAT(pathloss_gain(10.0, unit), WithinRel(1e-4, 1e-14));
  }
  SECTION("high-precision reference at 250 m") {
    // 5.7e-4 * 250^-4, evaluated with 50-digit arithmetic
    REQUIRE_THAT(pathloss_gain(250.0, p), WithinRel(1.4592e-13, 1e-14));
  }
  SECTION("domain errors") {
    REQUIRE_THROWS_AS(pathloss_gain(0.0, p), std::domain_error);
    REQUIRE_THROWS_AS(pathloss_gain(-3.0, p), std::domain_error);
  }
  SECTION("scales as d^-alpha") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      PhysParams q = p;
      q.pathloss_exponent = testsupport::uniform(rng, 2.0, 6.0);
      const double d = testsupport::uniform(rng, 0.5, 800.0);
      const double ratio = pathloss_gain(2.0 * d, q) / pathloss_gain(d, q);
      REQUIRE_THAT(ratio, WithinRel(std::pow(2.0, -q.pathloss_exponent), 1e-12));
      REQUIRE(pathloss_gain(d * 1.01, q) < pathloss_gain(d, q));
    }
  }
}

TEST_CASE("noise power from density") {
  // 50-digit reference; pow(10, -20.4) itself carries ~1e-14 relative rounding
  REQUIRE_THAT(PhysParams::defaults().noise_power(), WithinRel(1.9905358527674862539e-14, 1e-13));
}

TEST_CASE("link budget rows") {
  SECTION("uplink peak rate at 1 m") {
    const PairBudget row = testsupport::pair_at(1.0, 0.0, 5.0, 0.0, 1e5);
    // W ln(1 + p_max_ue * G0 / sigma2), 50-digit reference
    REQUIRE_THAT(row.r_ul_max, WithinRel(113458094.34282137657, 1e-13));
    REQUIRE(row.ul_lo <= row.ul_hi);
  }
  SECTION("zero device power fails cellular support") {
    PhysParams p;
    p.p_max_ue_w = 0.0;
    UserPair pair{1, {100.0, 0.0}, {120.0, 0.0}, 1e5};
    REQUIRE_THROWS_AS(make_pair_budget(p, Vec2{0, 0}, pair), std::domain_error);
  }
  SECTION("symmetric geometry gives identical uplink rates") {
    CellScenario s;
    s.pairs = {{1, {200.0, 0.0}, {250.0, 0.0}, 2e5}, {2, {0.0, 200.0}, {0.0, 250.0}, 2e5}};
    const LinkBudget budget = build_link_budget(s);
    REQUIRE(budget.pairs[0].r_ul_max == budget.pairs[1].r_ul_max);
    REQUIRE(budget.pairs[0].ul_lo == budget.pairs[1].ul_lo);
  }
  SECTION("transmitter on the BS is rejected") {
    CellScenario s;
    s.pairs = {{1, {0.0, 0.0}, {50.0, 0.0}, 1e5}};
    REQUIRE_THROWS_AS(build_link_budget(s), std::domain_error);
  }
  SECTION("direct gain is floored at the 1 m reference") {
    const PairBudget row = testsupport::pair_at(100.0, 0.0, 100.0, 0.2, 1e5);
    REQUIRE(row.g_direct == PhysParams::defaults().ref_gain);
  }
}

TEST_CASE("random scenarios") {
  const PhysParams params;

  SECTION("deterministic in the seed") {
    const CellScenario a = random_scenario(10, 42, params);
    const CellScenario b = random_scenario(10, 42, params);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
      REQUIRE(a.pairs[i].tx.x == b.pairs[i].tx.x);
      REQUIRE(a.pairs[i].tx.y == b.pairs[i].tx.y);
      REQUIRE(a.pairs[i].rx.x == b.pairs[i].rx.x);
      REQUIRE(a.pairs[i].rx.y == b.pairs[i].rx.y);
      REQUIRE(a.pairs[i].demand == b.pairs[i].demand);
    }
    const CellScenario c = random_scenario(10, 43, params);
    REQUIRE(a.pairs[0].tx.x != c.pairs[0].tx.x);
  }

  SECTION("ids contiguous, users inside the cell") {
    const CellScenario s = random_scenario(10, 7, params);
    REQUIRE(s.pairs.size() == 10);
    for (int i = 0; i < 10; ++i) {
      REQUIRE(s.pairs[i].id == i + 1);
      REQUIRE(distance(s.pairs[i].tx, s.bs) <= params.cell_radius_m);
      REQUIRE(distance(s.pairs[i].rx, s.bs) <= params.cell_radius_m);
    }
  }

  SECTION("common demand equals the edge-rate formula recomputed from scratch") {
    const CellScenario s = random_scenario(3, 1, params);
    const double sigma2 = std::pow(10.0, (params.noise_density_dbm - 30.0) / 10.0) * params.bandwidth_w;
    const double g = params.ref_gain * std::pow(params.cell_radius_m, -params.pathloss_exponent);
    const double rul = params.bandwidth_w * std::log(1.0 + params.p_max_ue_w * g / sigma2);
    const double rdl = params.bandwidth_w * std::log(1.0 + params.p_max_bs_w * g / sigma2);
    const double expected = rul * rdl / (rul + rdl) * params.frame_t_s;
    for (const UserPair& p : s.pairs) REQUIRE_THAT(p.demand, WithinRel(expected, 1e-12));
    REQUIRE_THAT(s.pairs[0].demand, WithinRel(523064.35448454551938, 1e-12));
  }

  SECTION("every generated scenario admits one shared uplink window") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull, 12345ull}) {
      const LinkBudget budget = build_link_budget(random_scenario(12, seed, params));
      double lo = 0.0, hi = params.frame_t_s;
      for (const PairBudget& row : budget.pairs) {
        lo = std::max(lo, row.ul_lo);
        hi = std::min(hi, row.ul_hi);
      }
      REQUIRE(lo <= hi);
    }
  }
}

TEST_CASE("scenario files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "d2dtdd_test_io";
  fs::create_directories(dir);

  SECTION("round trip preserves every numeric field bit-exactly") {
    const CellScenario s = random_scenario(5, 77);
    const fs::path path = dir / "roundtrip.json";
    save_scenario(s, path.string());
    const CellScenario r = load_scenario(path.string());
    REQUIRE(r.pairs.size() == s.pairs.size());
    REQUIRE(r.seed == s.seed);
    REQUIRE(r.params.bandwidth_w == s.params.bandwidth_w);
    REQUIRE(r.params.noise_density_dbm == s.params.noise_density_dbm);
    REQUIRE(r.params.ref_gain == s.params.ref_gain);
    for (std::size_t i = 0; i < s.pairs.size(); ++i) {
      REQUIRE(r.pairs[i].id == s.pairs[i].id);
      REQUIRE(r.pairs[i].tx.x == s.pairs[i].tx.x);
      REQUIRE(r.pairs[i].tx.y == s.pairs[i].tx.y);
      REQUIRE(r.pairs[i].rx.x == s.pairs[i].rx.x);
      REQUIRE(r.pairs[i].rx.y == s.pairs[i].rx.y);
      REQUIRE(r.pairs[i].demand == s.pairs[i].demand);
    }
  }

  SECTION("missing demand field is reported by name") {
    const fs::path path = dir / "missing_b.json";
    {
      nlohmann::json j = scenario_to_json(random_scenario(2, 5));
      j["pairs"][1].erase("b");
      std::ofstream(path) << j.dump();
    }
    REQUIRE_THROWS_WITH(load_scenario(path.string()),
                        ContainsSubstring("pairs[1]") && ContainsSubstring("'b'"));
  }

  SECTION("hand-written two-pair fixture") {
    const fs::path path = dir / "fixture.json";
    std::ofstream(path) << R"({
      "params": {"bandwidth_W": 5e6, "noise_density": -174.0, "pathloss_exponent": 4.0,
                 "ref_gain_G0": 5.7e-4, "p_max_bs": 40.0, "p_max_ue": 0.25,
                 "frame_T": 1.0, "cell_radius": 500.0, "carrier": "1 GHz"},
      "bs": [0.0, 0.0],
      "pairs": [
        {"id": 1, "tx": [100.0, 0.0], "rx": [150.0, 20.0], "b": 4.0e5},
        {"id": 2, "tx": [-200.0, 50.0], "rx": [-180.0, 40.0], "b": 3.0e5}
      ],
      "seed": 9
    })";
    const CellScenario s = load_scenario(path.string());
    REQUIRE(s.pairs.size() == 2);
    REQUIRE(s.pairs[1].demand == 3.0e5);
    REQUIRE(s.seed == 9);
  }

  SECTION("malformed document reports a parse error") {
    const fs::path path = dir / "garbled.json";
    std::ofstream(path) << "{ \"params\": { oops";
    REQUIRE_THROWS_AS(load_scenario(path.string()), ScenarioParseError);
  }

  SECTION("wrong-typed field is reported by name") {
    const fs::path path = dir / "bad_type.json";
    {
      nlohmann::json j = scenario_to_json(random_scenario(2, 5));
      j["pairs"][0]["b"] = "plenty";
      std::ofstream(path) << j.dump();
    }
    REQUIRE_THROWS_WITH(load_scenario(path.string()),
                        ContainsSubstring("pairs[0]") && ContainsSubstring("'b'"));
  }

  SECTION("non-contiguous ids are rejected") {
    const fs::path path = dir / "bad_ids.json";
    {
      nlohmann::json j = scenario_to_json(random_scenario(2, 5));
      j["pairs"][1]["id"] = 7;
      std::ofstream(path) << j.dump();
    }
    REQUIRE_THROWS_AS(load_scenario(path.string()), std::invalid_argument);
  }
}
