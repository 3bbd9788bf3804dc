#include <catch2/catch_amalgamated.hpp>

#include "d2dtdd/heuristic.hpp"
#include "test_support.hpp"

using namespace d2dtdd;
using Catch::Matchers::WithinRel;

namespace {

LinkBudget scale_cross(LinkBudget budget, double factor) {
  const int n = budget.size();
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      if (j != l) budget.cross_gain[static_cast<std::size_t>(j) * n + l] *= factor;
  return budget;
}

/// Two pairs that both prefer the direct link in isolation but cannot share
/// the channel: the second transmitter sits next to the first receiver.
CellScenario coupled_pair_fixture() {
  CellScenario s;
  const double b = edge_feasible_demand(PhysParams::defaults());
  s.pairs = {{1, {200.0, 0.0}, {210.0, 0.0}, b}, {2, {211.0, 0.0}, {221.0, 0.0}, b}};
  return s;
}

}  // namespace

TEST_CASE("perceived SINR") {
  const LinkBudget budget = build_link_budget(random_scenario(3, 13));
  const SinrSystem sys = build_sinr_system(budget);

  SECTION("single active pair sees no interference") {
    const std::vector<double> g = perceived_sinr(sys, {1}, {0.1});
    REQUIRE_THAT(g[0], WithinRel(0.1 * sys.direct_gain[1] / sys.sigma2, 1e-14));
  }
  SECTION("zero power gives zero SINR") {
    const std::vector<double> g = perceived_sinr(sys, {0, 1}, {0.0, 0.05});
    REQUIRE(g[0] == 0.0);
  }
  SECTION("matches direct arithmetic on three pairs") {
    const std::vector<int> active{0, 1, 2};
    const std::vector<double> p{0.01, 0.02, 0.03};
    const std::vector<double> g = perceived_sinr(sys, active, p);
    for (int l = 0; l < 3; ++l) {
      double interference = 0.0;
      for (int j = 0; j < 3; ++j)
        if (j != l) interference += p[j] * budget.gain_tx_to_rx(j, l);
      REQUIRE_THAT(g[l], WithinRel(p[l] * budget.pairs[l].g_direct / (budget.sigma2 + interference), 1e-14));
    }
  }
}

TEST_CASE("power-control sweep") {
  const LinkBudget budget = build_link_budget(random_scenario(3, 29));
  const SinrSystem sys = build_sinr_system(budget);
  const std::vector<int> active{0, 1, 2};

  SECTION("fixed point stays fixed") {
    const D2dFeasibility fz = d2d_set_feasible(sys, active);
    if (fz.feasible) {
      const std::vector<double> next = fm_update(sys, active, fz.p_min);
      for (int a = 0; a < 3; ++a) REQUIRE_THAT(next[a], WithinRel(fz.p_min[a], 1e-10));
    }
  }
  SECTION("single pair converges in one step") {
    const std::vector<double> next = fm_update(sys, {2}, {0.19});
    REQUIRE_THAT(next[0], WithinRel(sys.eta[2], 1e-12));
  }
  SECTION("iterates approach the componentwise-minimum solution") {
    std::mt19937_64 rng(121);
    int convergent = 0;
    for (int i = 0; i < 100; ++i) {
      const SinrSystem synth = testsupport::random_sinr_system(rng, 3, testsupport::uniform(rng, 0.05, 0.6));
      const D2dFeasibility fz = d2d_set_feasible(synth, active);
      if (!fz.feasible) continue;
      std::vector<double> p(3);
      for (int a = 0; a < 3; ++a) p[a] = synth.eta[a];
      for (int k = 0; k < 500; ++k) p = fm_update(synth, active, p);
      for (int a = 0; a < 3; ++a) REQUIRE_THAT(p[a], WithinRel(fz.p_min[a], 1e-8));
      ++convergent;
    }
    REQUIRE(convergent > 30);
  }
  SECTION("zero power in the active set is a contract violation") {
    REQUIRE_THROWS_AS(fm_update(sys, {0, 1}, {0.0, 0.1}), std::logic_error);
  }
  SECTION("zero-target pair updates to zero power without tripping the contract") {
    SinrSystem degenerate = sys;
    degenerate.gamma_tgt[0] = 0.0;
    degenerate.eta[0] = 0.0;
    const std::vector<double> p1 = fm_update(degenerate, {0, 1}, {0.05, 0.1});
    REQUIRE(p1[0] == 0.0);
    REQUIRE(p1[1] > 0.0);
    const std::vector<double> p2 = fm_update(degenerate, {0, 1}, p1);  // zero power is now fine
    REQUIRE(p2[0] == 0.0);
  }
}

TEST_CASE("heuristic mode selection") {
  SECTION("no interference: reduces to the orthogonal solution, no switches") {
    for (std::uint64_t seed : {91ull, 92ull, 93ull}) {
      const LinkBudget budget = scale_cross(build_link_budget(random_scenario(8, seed)), 1e-9);
      const SinrSystem sys = build_sinr_system(budget);
      const FoSolution fo = solve_fo(budget, EnergyObjective::UserEnergy);
      const HeuristicOutcome out = run_heuristic(budget, sys);
      REQUIRE(out.trace.converged);
      REQUIRE(out.trace.switches.empty());
      REQUIRE(out.solution.mode == fo.mode);
      REQUIRE_THAT(out.solution.total_energy, WithinRel(fo.total_energy, 1e-6));
    }
  }

  SECTION("strongly coupled pairs: exactly one leaves the channel") {
    const LinkBudget budget = build_link_budget(coupled_pair_fixture());
    const SinrSystem sys = build_sinr_system(budget);
    const FoSolution fo = solve_fo(budget, EnergyObjective::UserEnergy);
    REQUIRE(fo.mode == std::vector<std::uint8_t>{1, 1});
    REQUIRE_FALSE(d2d_set_feasible(sys, {0, 1}).feasible);

    const HeuristicOutcome out = run_heuristic(budget, sys);
    REQUIRE(out.trace.converged);
    REQUIRE(out.trace.switches.size() == 1);
    REQUIRE(out.solution.d2d_count() == 1);

    const RsSolution opt = rs_branch_and_bound(budget, sys, EnergyObjective::UserEnergy);
    REQUIRE(out.solution.total_energy >= opt.total_energy * (1.0 - 1e-9));
  }

  SECTION("never beats the exact optimum, and is usually close") {
    int within_10pct = 0, total = 0;
    for (std::uint64_t seed = 201; seed <= 230; ++seed) {
      const LinkBudget budget = build_link_budget(random_scenario(8, seed));
      const SinrSystem sys = build_sinr_system(budget);
      const HeuristicOutcome out = run_heuristic(budget, sys);
      const RsSolution opt = rs_branch_and_bound(budget, sys, EnergyObjective::UserEnergy);
      REQUIRE(out.solution.total_energy >= opt.total_energy * (1.0 - 1e-9));
      ++total;
      if (out.solution.total_energy <= opt.total_energy * 1.10) ++within_10pct;
    }
    REQUIRE(within_10pct >= total * 2 / 3);
  }

  SECTION("channel set only shrinks and final powers respect caps and targets") {
    for (std::uint64_t seed : {301ull, 302ull, 303ull, 304ull}) {
      const LinkBudget budget = build_link_budget(random_scenario(10, seed));
      const SinrSystem sys = build_sinr_system(budget);
      HeuristicConfig cfg;
      const HeuristicOutcome out = run_heuristic(budget, sys, cfg);

      // monotone shrinkage across the trace
      for (std::size_t k = 1; k < out.trace.iterations.size(); ++k) {
        const auto& prev = out.trace.iterations[k - 1].mode;
        const auto& curr = out.trace.iterations[k].mode;
        for (std::size_t l = 0; l < prev.size(); ++l) REQUIRE(curr[l] <= prev[l]);
      }

      // the surviving set is feasible and meets its targets at the caps
      std::vector<int> active;
      for (int l = 0; l < budget.size(); ++l)
        if (out.solution.mode[l]) active.push_back(l);
      const D2dFeasibility fz = d2d_set_feasible(sys, active);
      REQUIRE(fz.feasible);
      const FoSolution fo = solve_fo(budget, EnergyObjective::UserEnergy);
      std::vector<double> p;
      for (int l : active) p.push_back(out.solution.p_d2d[l]);
      const std::vector<double> sinr = perceived_sinr(sys, active, p);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const int l = active[a];
        REQUIRE(sinr[a] >= sys.gamma_tgt[l] * (1.0 - 1e-6));
        const double e_cell_seed = energy_ul(fo.t_ul, budget.pairs[l].demand, budget.pairs[l].g_tx_bs,
                                             budget.pairs[l].sigma2, budget.pairs[l].bandwidth);
        const double cap = std::min(cfg.theta / budget.params.frame_t_s * e_cell_seed, budget.pairs[l].p_max_ue);
        REQUIRE(out.solution.p_d2d[l] <= cap * (1.0 + 1e-12));
      }
    }
  }

  SECTION("larger theta keeps more pairs on the shared channel (on average)") {
    // switch cascades are not monotone per instance; the mean over a couple
    // of hundred instances is
    const std::vector<double> thetas{1.0, 1.5, 2.0, 4.0};
    std::vector<double> mean_d2d(thetas.size(), 0.0);
    const int instances = 200;
    for (int i = 0; i < instances; ++i) {
      const LinkBudget budget = build_link_budget(random_scenario(10, 1000 + i));
      const SinrSystem sys = build_sinr_system(budget);
      for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        HeuristicConfig cfg;
        cfg.theta = thetas[ti];
        mean_d2d[ti] += run_heuristic(budget, sys, cfg).solution.d2d_count();
      }
    }
    for (std::size_t ti = 1; ti < thetas.size(); ++ti) REQUIRE(mean_d2d[ti] >= mean_d2d[ti - 1] - 1e-9);
  }

  SECTION("zero-demand pair costs nothing end to end") {
    CellScenario s;
    const double b = edge_feasible_demand(PhysParams::defaults());
    s.pairs = {{1, {150.0, 0.0}, {160.0, 0.0}, b}, {2, {-150.0, 0.0}, {-160.0, 0.0}, b}};
    LinkBudget budget = build_link_budget(s);
    budget.pairs[1].demand = 0.0;  // hand-built degenerate row
    const SinrSystem sys = build_sinr_system(budget);
    REQUIRE(sys.gamma_tgt[1] == 0.0);
    const HeuristicOutcome out = run_heuristic(budget, sys);
    REQUIRE(out.trace.converged);
    REQUIRE(out.solution.pair_energy[1] == 0.0);
  }

  SECTION("iteration cap returns a flagged best-effort result") {
    const LinkBudget budget = build_link_budget(coupled_pair_fixture());
    const SinrSystem sys = build_sinr_system(budget);
    HeuristicConfig cfg;
    cfg.max_iters = 1;  // far too few sweeps for the coupled pair to resolve
    const HeuristicOutcome out = run_heuristic(budget, sys, cfg);
    REQUIRE_FALSE(out.trace.converged);
    REQUIRE(out.solution.mode.size() == 2);
    REQUIRE(out.solution.total_energy > 0.0);
  }

  SECTION("trace export") {
    const LinkBudget budget = build_link_budget(coupled_pair_fixture());
    const SinrSystem sys = build_sinr_system(budget);
    const HeuristicOutcome out = run_heuristic(budget, sys);
    std::ostringstream os;
    write_trace_csv(out.trace, os);
    const std::string csv = os.str();
    REQUIRE(csv.rfind("iteration,pair,mode,p_w,sinr\n", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') ==
            static_cast<long>(out.trace.iterations.size() * budget.size()) + 1);
  }
}
