#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "pidtri/catalog.hpp"
#include "pidtri/dist.hpp"

using namespace pidtri;

namespace {

// Group a sub-bit of the pair variables and compute a two-variable mutual
// information the slow way (test-local reference path).
double ref_pair_mi(const JointDist3& d, int x_bit, int y_bit) {
  std::map<std::pair<int, int>, double> pxy;
  std::map<int, double> px, py;
  for (std::size_t ix = 0; ix < d.nx(); ++ix)
    for (std::size_t iy = 0; iy < d.ny(); ++iy)
      for (std::size_t iz = 0; iz < d.nz(); ++iz) {
        const double v = d.p(ix, iy, iz);
        const int a = (int(ix) >> x_bit) & 1, b = (int(iy) >> y_bit) & 1;
        pxy[{a, b}] += v;
        px[a] += v;
        py[b] += v;
      }
  double mi = 0.0;
  for (const auto& [ab, v] : pxy)
    if (v > 0) mi += v * std::log2(v / (px[ab.first] * py[ab.second]));
  return mi;
}

}  // namespace

TEST_CASE("copy system") {
  SECTION("lambda = 0: inputs identical, one redundant bit") {
    auto d = make_copy(0.0);
    auto pyz = marginal(d, VarSet{Role::Y, Role::Z});
    CHECK(pyz.p[0] == Catch::Approx(0.5));  // (y,z) = (0,0)
    CHECK(pyz.p[3] == Catch::Approx(0.5));  // (y,z) = (1,1)
    CHECK(pyz.p[1] == 0.0);
    CHECK(mutual_information(d, Role::Y, Role::Z) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("lambda = 1: inputs independent") {
    auto d = make_copy(1.0);
    auto pyz = marginal(d, VarSet{Role::Y, Role::Z});
    for (double v : pyz.p) CHECK(v == Catch::Approx(0.25));
    CHECK(mutual_information(d, Role::Y, Role::Z) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("X is an exact copy of the pair") {
    auto d = make_copy(0.37);
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t z = 0; z < 2; ++z) {
        // all mass for this (y, z) sits on the matching x label
        const std::size_t x = y * 2 + z;
        double off = 0.0;
        for (std::size_t ix = 0; ix < 4; ++ix)
          if (ix != x) off += d.p(ix, y, z);
        CHECK(off == 0.0);
      }
    CHECK(d.alphabet(Role::X).label(2) == "10");
    CHECK(mutual_information(d, Role::X, VarSet{Role::Y, Role::Z}) ==
          Catch::Approx(entropy(d, Role::X)).margin(1e-12));
  }
  SECTION("parameter range") {
    CHECK_THROWS_AS(make_copy(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_copy(1.5), std::invalid_argument);
  }
}

TEST_CASE("and system") {
  SECTION("shares the input-pair marginal with copy") {
    for (double lambda : {0.0, 0.25, 0.8, 1.0}) {
      auto a = marginal(make_and(lambda), VarSet{Role::Y, Role::Z});
      auto c = marginal(make_copy(lambda), VarSet{Role::Y, Role::Z});
      for (std::size_t i = 0; i < 4; ++i) CHECK(a.p[i] == Catch::Approx(c.p[i]).margin(1e-15));
    }
  }
  SECTION("lambda = 1 reproduces the plain AND gate") {
    auto d = make_and(1.0);
    CHECK(d.p(0, 0, 0) == Catch::Approx(0.25));
    CHECK(d.p(0, 0, 1) == Catch::Approx(0.25));
    CHECK(d.p(0, 1, 0) == Catch::Approx(0.25));
    CHECK(d.p(1, 1, 1) == Catch::Approx(0.25));
    CHECK(mutual_information(d, Role::X, Role::Y) ==
          Catch::Approx(0.3112781244591328).margin(1e-12));
  }
  SECTION("lambda = 0 collapses to one shared bit") {
    auto d = make_and(0.0);
    CHECK(d.p(0, 0, 0) == Catch::Approx(0.5));
    CHECK(d.p(1, 1, 1) == Catch::Approx(0.5));
    CHECK(mutual_information(d, Role::X, Role::Y) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("xor system") {
  auto d = make_xor();
  CHECK(mutual_information(d, Role::X, Role::Y) == Catch::Approx(0.0).margin(1e-12));
  CHECK(mutual_information(d, Role::X, VarSet{Role::Y, Role::Z}) ==
        Catch::Approx(1.0).margin(1e-12));
  CHECK(co_information(d) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("dice system") {
  SECTION("alphabet holds exactly the reachable weighted sums") {
    CHECK(make_dice(0.5, 1).nx() == 11);  // 2..12
    CHECK(make_dice(0.5, 6).nx() == 36);  // all distinct
    auto d = make_dice(0.5, 2);
    CHECK(d.alphabet(Role::X).label(0) == "3");  // 1 + 2*1
    // alphabet is fixed across lambda so sweeps keep one shape
    CHECK(make_dice(0.0, 2).nx() == make_dice(1.0, 2).nx());
  }
  SECTION("X is deterministic given the dice") {
    auto d = make_dice(0.3, 4);
    CHECK(mutual_information(d, Role::X, VarSet{Role::Y, Role::Z}) ==
          Catch::Approx(entropy(d, Role::X)).margin(1e-12));
  }
  SECTION("coupling interpolates the dice pair") {
    auto indep = make_dice(1.0, 1);
    CHECK(mutual_information(indep, Role::Y, Role::Z) == Catch::Approx(0.0).margin(1e-12));
    auto locked = make_dice(0.0, 1);
    CHECK(mutual_information(locked, Role::Y, Role::Z) ==
          Catch::Approx(std::log2(6.0)).margin(1e-12));
    auto half = make_dice(0.5, 1);
    const double expect_diag = 0.5 / 36.0 + 0.5 / 6.0;
    auto pyz = marginal(half, VarSet{Role::Y, Role::Z});
    CHECK(pyz.p[0] == Catch::Approx(expect_diag));
    CHECK(pyz.p[1] == Catch::Approx(0.5 / 36.0));
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(make_dice(0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_dice(0.5, 7), std::invalid_argument);
    CHECK_THROWS_AS(make_dice(-0.2, 3), std::invalid_argument);
  }
}

TEST_CASE("dyadic and triadic tables") {
  SECTION("dyadic matches its generating bit rules") {
    auto d = make_dyadic();
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> expect;
    for (std::size_t x2 = 0; x2 < 2; ++x2)
      for (std::size_t y2 = 0; y2 < 2; ++y2)
        for (std::size_t z2 = 0; z2 < 2; ++z2)
          expect[{2 * y2 + x2, 2 * z2 + y2, 2 * x2 + z2}] = 0.125;
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t z = 0; z < 4; ++z) {
          auto it = expect.find({x, y, z});
          CHECK(d.p(x, y, z) == (it == expect.end() ? 0.0 : it->second));
        }
  }
  SECTION("triadic matches its generating bit rules") {
    auto d = make_triadic();
    // low bits of all three variables agree; high bits have even parity
    double mass = 0.0;
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t z = 0; z < 4; ++z) {
          const double v = d.p(x, y, z);
          if (v == 0.0) continue;
          CHECK(v == 0.125);
          CHECK((x & 1) == (y & 1));
          CHECK((y & 1) == (z & 1));
          CHECK((((x >> 1) ^ (y >> 1) ^ (z >> 1)) & 1) == 0);
          mass += v;
        }
    CHECK(mass == Catch::Approx(1.0));
  }
  SECTION("both have three uniform two-bit marginals and 3 bits total") {
    for (auto d : {make_dyadic(), make_triadic()}) {
      CHECK(entropy(d, VarSet::all()) == Catch::Approx(3.0).margin(1e-12));
      for (Role r : kAllRoles) CHECK(entropy(d, r) == Catch::Approx(2.0).margin(1e-12));
    }
  }
}

TEST_CASE("markov chain systems") {
  SECTION("X and Y are conditionally independent given Z") {
    DetRng rng(2024);
    for (int i = 0; i < 5; ++i) {
      auto d = random_markov(rng, 3, 4, 2);
      CHECK(conditional_mutual_information(d, Role::X, Role::Y, Role::Z) ==
            Catch::Approx(0.0).margin(1e-11));
    }
  }
  SECTION("explicit tables assemble the product form") {
    MarkovTables t;
    t.pz = {0.5, 0.5};
    t.x_given_z = {{0.9, 0.1}, {0.2, 0.8}};
    t.y_given_z = {{1.0, 0.0}, {0.0, 1.0}};
    auto d = make_markov(t);
    CHECK(d.p(0, 0, 0) == Catch::Approx(0.45));
    CHECK(d.p(1, 1, 1) == Catch::Approx(0.4));
    CHECK(d.p(0, 1, 0) == 0.0);
  }
  SECTION("bad tables are rejected") {
    MarkovTables t;
    t.pz = {0.6, 0.6};
    t.x_given_z = {{1.0, 0.0}, {1.0, 0.0}};
    t.y_given_z = {{1.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS_WITH(make_markov(t), Catch::Matchers::ContainsSubstring("p(z)"));
    t.pz = {0.5, 0.5};
    t.x_given_z[1] = {0.7, 0.7};
    CHECK_THROWS_WITH(make_markov(t), Catch::Matchers::ContainsSubstring("row 1"));
    t.x_given_z[1] = {0.7, 0.3};
    t.y_given_z.pop_back();
    CHECK_THROWS_AS(make_markov(t), std::invalid_argument);
  }
}

TEST_CASE("parallel channel system") {
  SECTION("the X-Y information splits across the two channels") {
    for (auto [l1, l2, l3] : {std::array{0.2, 0.4, 0.6}, std::array{0.0, 0.5, 1.0},
                              std::array{0.7, 0.1, 0.3}}) {
      auto d = make_parallel(l1, l2, l3);
      const double i_total = mutual_information(d, Role::X, Role::Y);
      const double i_first = ref_pair_mi(d, 1, 1);   // X1 vs Y1 (high bits)
      const double i_second = ref_pair_mi(d, 0, 0);  // X2 vs Y2 (low bits)
      CHECK(i_total == Catch::Approx(i_first + i_second).margin(1e-12));
    }
  }
  SECTION("degenerate corners") {
    // lambda1 = lambda2 = 0: X1 = Z = Y1 exactly
    auto chain = make_parallel(0.0, 0.0, 0.5);
    CHECK(ref_pair_mi(chain, 1, 1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(mutual_information(chain, Role::X, Role::Z) == Catch::Approx(1.0).margin(1e-12));
    // all couplings independent: X and Y share nothing
    auto indep = make_parallel(1.0, 1.0, 1.0);
    CHECK(mutual_information(indep, Role::X, Role::Y) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("Z only sees the first channel") {
    auto d = make_parallel(0.3, 0.6, 0.9);
    CHECK(conditional_mutual_information(d, Role::X, Role::Z, Role::Y) >= 0.0);
    // I(X2 : Z) = 0 because the second channel never touches Z
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> pa, pb;
    for (std::size_t ix = 0; ix < 4; ++ix)
      for (std::size_t iy = 0; iy < 4; ++iy)
        for (std::size_t iz = 0; iz < 2; ++iz) {
          const double v = d.p(ix, iy, iz);
          joint[{int(ix) & 1, int(iz)}] += v;
          pa[int(ix) & 1] += v;
          pb[int(iz)] += v;
        }
    double mi = 0.0;
    for (const auto& [ab, v] : joint)
      if (v > 0) mi += v * std::log2(v / (pa[ab.first] * pb[ab.second]));
    CHECK(mi == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("system spec dispatch") {
  SystemSpec s;
  s.kind = SystemKind::And;
  s.params["lambda"] = 0.5;
  CHECK(make_system(s).nx() == 2);

  SECTION("missing parameters are named") {
    SystemSpec bad;
    bad.kind = SystemKind::Dice;
    bad.params["lambda"] = 0.5;
    CHECK_THROWS_WITH(make_system(bad), Catch::Matchers::ContainsSubstring("alpha"));
  }
  SECTION("unexpected parameters are rejected") {
    SystemSpec bad;
    bad.kind = SystemKind::Xor;
    bad.params["lambda"] = 0.5;
    CHECK_THROWS_AS(make_system(bad), std::invalid_argument);
  }
  SECTION("fractional alpha is rejected") {
    SystemSpec bad;
    bad.kind = SystemKind::Dice;
    bad.params["lambda"] = 0.5;
    bad.params["alpha"] = 2.5;
    CHECK_THROWS_AS(make_system(bad), std::invalid_argument);
  }
  SECTION("kind names round-trip") {
    for (SystemKind k : {SystemKind::Copy, SystemKind::And, SystemKind::Xor, SystemKind::Dice,
                         SystemKind::Dyadic, SystemKind::Triadic, SystemKind::Markov,
                         SystemKind::Parallel})
      CHECK(system_kind_from_name(system_kind_name(k)) == k);
    CHECK_THROWS_AS(system_kind_from_name("nand"), std::invalid_argument);
  }
}

TEST_CASE("deterministic random instances") {
  DetRng a(42), b(42), c(43);
  auto da = random_dist(a, 3, 3, 3);
  auto db = random_dist(b, 3, 3, 3);
  auto dc = random_dist(c, 3, 3, 3);
  CHECK(da.probs() == db.probs());
  CHECK(da.probs() != dc.probs());
  double total = 0.0;
  for (double v : da.probs()) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == Catch::Approx(1.0).margin(1e-12));
}
