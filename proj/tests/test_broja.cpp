#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pidtri/broja.hpp"
#include "pidtri/catalog.hpp"
#include "pidtri/dist.hpp"

using namespace pidtri;

namespace {

// worst absolute difference between the fixed pairwise marginals of p and q
double marginal_gap(const JointDist3& p, const JointDist3& q, Role target) {
  const auto src = sources_of(target);
  double worst = 0.0;
  for (Role s : src) {
    auto mp = marginal(p, VarSet{target, s});
    auto mq = marginal(q, VarSet{target, s});
    for (std::size_t i = 0; i < mp.p.size(); ++i)
      worst = std::max(worst, std::abs(mp.p[i] - mq.p[i]));
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// The grid-scan oracle comes first: its values anchor everything else.
// ---------------------------------------------------------------------------

TEST_CASE("grid-scan oracle on closed-form systems") {
  SECTION("AND gate with independent inputs") {
    // minimum of I_q(X:(Y,Z)) is 0.75*log2(4/3), giving SI = I(X:Y) and CI = 1/2
    auto atoms = brute_force_pid(make_and(1.0), Role::X, 1e-5);
    CHECK(atoms.si == Catch::Approx(0.3112781244591328).margin(2e-5));
    CHECK(atoms.ci == Catch::Approx(0.5).margin(2e-5));
    CHECK(atoms.ui_a == Catch::Approx(0.0).margin(2e-5));
    CHECK(atoms.ui_b == Catch::Approx(0.0).margin(2e-5));
  }
  SECTION("XOR is pure synergy") {
    auto atoms = brute_force_pid(make_xor(), Role::X, 1e-5);
    CHECK(atoms.ci == Catch::Approx(1.0).margin(1e-6));
    CHECK(atoms.si == Catch::Approx(0.0).margin(1e-6));
    CHECK(atoms.ui_a == Catch::Approx(0.0).margin(1e-6));
    CHECK(atoms.ui_b == Catch::Approx(0.0).margin(1e-6));
  }
  SECTION("free dimension guard") {
    DetRng rng(5);
    auto d = random_dist(rng, 3, 3, 3);  // 3 slabs x 4 free dims = 12
    CHECK_THROWS_AS(brute_force_pid(d, Role::X), std::invalid_argument);
  }
}

// ---------------------------------------------------------------------------
// Solver against frozen values and against the oracle.
// ---------------------------------------------------------------------------

TEST_CASE("solver on the AND gate") {
  auto sol = solve_pid(make_and(1.0), Role::X);
  CHECK(sol.atoms.si == Catch::Approx(0.3112781244591328).margin(1e-9));
  CHECK(sol.atoms.ci == Catch::Approx(0.5).margin(1e-9));
  CHECK(sol.atoms.ui_a == Catch::Approx(0.0).margin(1e-9));
  CHECK(sol.atoms.ui_b == Catch::Approx(0.0).margin(1e-9));
  CHECK(sol.diagnostics.converged);

  SECTION("objective matches the returned point") {
    const auto src = sources_of(Role::X);
    CHECK(sol.point.objective_bits ==
          mutual_information(sol.point.q, Role::X, VarSet{src[0], src[1]}));
  }
  SECTION("the other targets carry no shared information") {
    auto sy = solve_pid(make_and(1.0), Role::Y);
    CHECK(sy.atoms.si == Catch::Approx(0.0).margin(1e-9));
    CHECK(sy.atoms.ui(Role::X) == Catch::Approx(0.3112781244591328).margin(1e-9));
    CHECK(sy.atoms.ui(Role::Z) == Catch::Approx(0.0).margin(1e-9));
    CHECK(sy.atoms.ci == Catch::Approx(0.18872187554086717).margin(1e-9));
  }
}

TEST_CASE("solver on XOR and copy gates") {
  SECTION("XOR: one bit of synergy, nothing else") {
    auto sol = solve_pid(make_xor(), Role::X);
    CHECK(sol.atoms.ci == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.atoms.si == Catch::Approx(0.0).margin(1e-9));
    CHECK(sol.atoms.ui_a + sol.atoms.ui_b == Catch::Approx(0.0).margin(1e-9));
    // the optimizer spreads mass uniformly
    for (double v : sol.point.q.probs()) CHECK(v == Catch::Approx(0.125).margin(1e-7));
  }
  SECTION("copy of independent inputs: two unique bits") {
    auto sol = solve_pid(make_copy(1.0), Role::X);
    CHECK(sol.atoms.si == Catch::Approx(0.0).margin(1e-9));
    CHECK(sol.atoms.ui_a == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.atoms.ui_b == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.atoms.ci == Catch::Approx(0.0).margin(1e-9));
  }
  SECTION("copy of identical inputs: one shared bit") {
    auto sol = solve_pid(make_copy(0.0), Role::X);
    CHECK(sol.atoms.si == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.atoms.ui_a == Catch::Approx(0.0).margin(1e-9));
    CHECK(sol.atoms.ui_b == Catch::Approx(0.0).margin(1e-9));
    CHECK(sol.atoms.ci == Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("solver agrees with the oracle on random binary systems") {
  DetRng rng(808);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = random_dist(rng, 2, 2, 2);
    for (Role target : {Role::X, Role::Z}) {
      auto fast = solve_pid(d, target);
      auto slow = brute_force_pid(d, target, 1e-5);
      INFO("trial " << trial << " target " << role_name(target));
      CHECK(fast.atoms.si == Catch::Approx(slow.si).margin(1e-4));
      CHECK(fast.atoms.ui_a == Catch::Approx(slow.ui_a).margin(1e-4));
      CHECK(fast.atoms.ui_b == Catch::Approx(slow.ui_b).margin(1e-4));
      CHECK(fast.atoms.ci == Catch::Approx(slow.ci).margin(1e-4));
    }
  }
}

TEST_CASE("solver output satisfies the defining identities") {
  DetRng rng(177);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t nx = 2 + rng.below(3), ny = 2 + rng.below(3), nz = 2 + rng.below(2);
    auto d = random_dist(rng, nx, ny, nz);
    for (Role target : kAllRoles) {
      auto sol = solve_pid(d, target);
      const auto src = sources_of(target);
      INFO("trial " << trial << " target " << role_name(target));

      // atoms recombine into the classical informations
      CHECK(sol.atoms.si + sol.atoms.ui_a ==
            Catch::Approx(mutual_information(d, target, src[0])).margin(1e-8));
      CHECK(sol.atoms.si + sol.atoms.ui_b ==
            Catch::Approx(mutual_information(d, target, src[1])).margin(1e-8));
      CHECK(sol.atoms.ci + sol.atoms.ui_a ==
            Catch::Approx(conditional_mutual_information(d, target, src[0], src[1]))
                .margin(1e-8));
      CHECK(sol.atoms.ci + sol.atoms.ui_b ==
            Catch::Approx(conditional_mutual_information(d, target, src[1], src[0]))
                .margin(1e-8));
      CHECK(sol.atoms.total() ==
            Catch::Approx(mutual_information(d, target, VarSet{src[0], src[1]}))
                .margin(1e-8));
      CHECK(sol.atoms.si - sol.atoms.ci == Catch::Approx(co_information(d)).margin(1e-8));

      // all atoms nonnegative
      CHECK(sol.atoms.si >= 0.0);
      CHECK(sol.atoms.ui_a >= 0.0);
      CHECK(sol.atoms.ui_b >= 0.0);
      CHECK(sol.atoms.ci >= 0.0);

      // the point is feasible and the objective can only have gone down
      CHECK(marginal_gap(d, sol.point.q, target) <= 1e-8);
      CHECK(sol.point.objective_bits <=
            mutual_information(d, target, VarSet{src[0], src[1]}) + 1e-10);

      // iterate objectives never increase
      const auto& hist = sol.diagnostics.objective_history;
      for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("objective is convex between feasible points") {
  DetRng rng(55);
  for (int trial = 0; trial < 4; ++trial) {
    auto d = random_dist(rng, 2, 3, 2);
    auto sol = solve_pid(d, Role::X);
    // p itself and the optimizer are two points of the same polytope
    std::vector<double> mix(d.cells());
    for (std::size_t i = 0; i < mix.size(); ++i)
      mix[i] = 0.5 * (d.probs()[i] + sol.point.q.probs()[i]);
    JointDist3 qm(d.alphabet(Role::X), d.alphabet(Role::Y), d.alphabet(Role::Z), mix);
    const VarSet pair{Role::Y, Role::Z};
    const double f_p = mutual_information(d, Role::X, pair);
    const double f_q = sol.point.objective_bits;
    const double f_mix = mutual_information(qm, Role::X, pair);
    CHECK(f_mix <= 0.5 * (f_p + f_q) + 1e-12);
    // and the optimizer is no worse than the midpoint
    CHECK(f_q <= f_mix + 1e-10);
  }
}

TEST_CASE("dice sums") {
  SECTION("alpha = 6 reads both dice perfectly") {
    auto d = make_dice(0.5, 6);
    auto sol = solve_pid(d, Role::X);
    CHECK(sol.atoms.si ==
          Catch::Approx(mutual_information(d, Role::Y, Role::Z)).margin(1e-6));
  }
  SECTION("alpha = 1 with coupled dice keeps a synergy component") {
    auto d = make_dice(0.5, 1);
    auto sol = solve_pid(d, Role::X);
    CHECK(sol.atoms.ci > 0.01);
    CHECK(sol.atoms.si > 0.01);
  }
}

TEST_CASE("solver failure and config validation") {
  SolverConfig tight;
  tight.max_iters = 1;
  CHECK_THROWS_AS(solve_pid(make_and(1.0), Role::X, tight), SolverFailure);
  try {
    solve_pid(make_and(1.0), Role::X, tight);
  } catch (const SolverFailure& e) {
    CHECK(e.best_objective() > 0.0);
    CHECK(e.gap_estimate() >= 0.0);
  }

  SolverConfig bad;
  bad.tol_bits = 0.0;
  CHECK_THROWS_AS(solve_pid(make_and(1.0), Role::X, bad), std::invalid_argument);
  bad = SolverConfig{};
  bad.max_iters = -3;
  CHECK_THROWS_AS(solve_pid(make_and(1.0), Role::X, bad), std::invalid_argument);
}
