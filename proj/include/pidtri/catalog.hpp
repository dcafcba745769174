#pragma once

// Canonical trivariate systems used throughout the test corpus and the
// command-line driver, plus deterministic random-instance generators.
//
// Several families share one coupling primitive: a symmetric binary (or
// six-sided) channel  p(b | a) = lambda/n + (1 - lambda) * [a == b], which
// interpolates between a perfect copy (lambda = 0) and an independent uniform
// draw (lambda = 1).

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pidtri/dist.hpp"

namespace pidtri {

enum class SystemKind { Copy, And, Xor, Dice, Dyadic, Triadic, Markov, Parallel };

inline const char* system_kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::Copy: return "copy";
    case SystemKind::And: return "and";
    case SystemKind::Xor: return "xor";
    case SystemKind::Dice: return "dice";
    case SystemKind::Dyadic: return "dyadic";
    case SystemKind::Triadic: return "triadic";
    case SystemKind::Markov: return "markov";
    case SystemKind::Parallel: return "parallel";
  }
  throw std::invalid_argument("system_kind_name: invalid kind");
}

inline SystemKind system_kind_from_name(const std::string& s) {
  if (s == "copy") return SystemKind::Copy;
  if (s == "and") return SystemKind::And;
  if (s == "xor") return SystemKind::Xor;
  if (s == "dice") return SystemKind::Dice;
  if (s == "dyadic") return SystemKind::Dyadic;
  if (s == "triadic") return SystemKind::Triadic;
  if (s == "markov") return SystemKind::Markov;
  if (s == "parallel") return SystemKind::Parallel;
  throw std::invalid_argument("unknown system kind \"" + s +
                              "\"; expected one of copy, and, xor, dice, dyadic, triadic, "
                              "markov, parallel");
}

// Conditional tables for a Markov chain X <- Z -> Y.
struct MarkovTables {
  std::vector<double> pz;                       // p(z), one entry per z value
  std::vector<std::vector<double>> x_given_z;   // row z, column x
  std::vector<std::vector<double>> y_given_z;   // row z, column y
};

struct SystemSpec {
  SystemKind kind = SystemKind::Xor;
  std::map<std::string, double> params;  // lambda, alpha, lambda1, lambda2, lambda3
  std::optional<MarkovTables> markov;    // required iff kind == Markov
};

namespace detail {

inline void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                std::to_string(v));
}

// p(b | a) over n symbols: lambda/n chance of a uniform redraw, otherwise copy.
inline double coupling(std::size_t a, std::size_t b, double lambda, std::size_t n) {
  return lambda / double(n) + (a == b ? 1.0 - lambda : 0.0);
}

// The input pair (Y, Z) shared by the copy and AND gates: a hidden uniform
// bit W drives both through identical lambda-couplings.
inline std::vector<double> input_pair_pmf(double lambda) {
  std::vector<double> pyz(4, 0.0);
  for (std::size_t w = 0; w < 2; ++w)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t z = 0; z < 2; ++z)
        pyz[y * 2 + z] += 0.5 * coupling(w, y, lambda, 2) * coupling(w, z, lambda, 2);
  return pyz;
}

}  // namespace detail

// X is a perfect copy of the pair (Y, Z); label "yz" concatenates the bits.
inline JointDist3 make_copy(double lambda) {
  detail::check_unit_interval(lambda, "lambda");
  const auto pyz = detail::input_pair_pmf(lambda);
  std::vector<double> p(4 * 2 * 2, 0.0);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t z = 0; z < 2; ++z)
      p[((y * 2 + z) * 2 + y) * 2 + z] = pyz[y * 2 + z];
  return JointDist3(Alphabet({"00", "01", "10", "11"}), index_alphabet(2), index_alphabet(2),
                    std::move(p));
}

// X = Y AND Z over the same correlated input pair as make_copy.
inline JointDist3 make_and(double lambda) {
  detail::check_unit_interval(lambda, "lambda");
  const auto pyz = detail::input_pair_pmf(lambda);
  std::vector<double> p(2 * 2 * 2, 0.0);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t z = 0; z < 2; ++z)
      p[((y & z) * 2 + y) * 2 + z] += pyz[y * 2 + z];
  return JointDist3(index_alphabet(2), index_alphabet(2), index_alphabet(2), std::move(p));
}

// X = Y XOR Z with independent uniform inputs.
inline JointDist3 make_xor() {
  std::vector<double> p(8, 0.0);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t z = 0; z < 2; ++z) p[((y ^ z) * 2 + y) * 2 + z] = 0.25;
  return JointDist3(index_alphabet(2), index_alphabet(2), index_alphabet(2), std::move(p));
}

// Two coupled dice Y, Z in {1..6} with p(y,z) = lambda/36 + (1-lambda)/6 [y==z],
// observed through the weighted sum X = Y + alpha * Z.  The X alphabet holds
// every sum the full 6x6 grid can reach (fixed across lambda), sorted
// ascending, so sweeps over lambda keep one table shape.
inline JointDist3 make_dice(double lambda, int alpha) {
  detail::check_unit_interval(lambda, "lambda");
  if (alpha < 1 || alpha > 6)
    throw std::invalid_argument("alpha must be an integer in {1, ..., 6}, got " +
                                std::to_string(alpha));
  std::set<int> sums;
  for (int y = 1; y <= 6; ++y)
    for (int z = 1; z <= 6; ++z) sums.insert(y + alpha * z);
  std::vector<std::string> xlabels;
  std::map<int, std::size_t> xindex;
  for (int s : sums) {
    xindex[s] = xlabels.size();
    xlabels.push_back(std::to_string(s));
  }
  std::vector<std::string> dielabels{"1", "2", "3", "4", "5", "6"};
  const std::size_t nx = xlabels.size();
  std::vector<double> p(nx * 6 * 6, 0.0);
  for (int y = 1; y <= 6; ++y)
    for (int z = 1; z <= 6; ++z) {
      const double pyz = lambda / 36.0 + (y == z ? (1.0 - lambda) / 6.0 : 0.0);
      const std::size_t ix = xindex.at(y + alpha * z);
      p[(ix * 6 + (y - 1)) * 6 + (z - 1)] += pyz;
    }
  return JointDist3(Alphabet(std::move(xlabels)), Alphabet(dielabels), Alphabet(dielabels),
                    std::move(p));
}

// Eight equiprobable rows built from three independent uniform bits
// (x2, y2, z2): each variable pairs its own bit with one neighbour's,
// X = (y2, x2), Y = (z2, y2), Z = (x2, z2), coded as value 2*high + low.
// Every pairwise interaction is dyadic; no three-way constraint exists.
inline JointDist3 make_dyadic() {
  std::vector<double> p(4 * 4 * 4, 0.0);
  for (std::size_t x2 = 0; x2 < 2; ++x2)
    for (std::size_t y2 = 0; y2 < 2; ++y2)
      for (std::size_t z2 = 0; z2 < 2; ++z2) {
        const std::size_t x = 2 * y2 + x2, y = 2 * z2 + y2, z = 2 * x2 + z2;
        p[(x * 4 + y) * 4 + z] = 0.125;
      }
  return JointDist3(index_alphabet(4), index_alphabet(4), index_alphabet(4), std::move(p));
}

// Eight equiprobable rows from a shared uniform low bit c and high bits
// (a, b, d) uniform on the even-parity set a ^ b ^ d = 0:
// X = (a, c), Y = (b, c), Z = (d, c).  The parity constraint is purely
// three-way; the shared bit is purely redundant.
inline JointDist3 make_triadic() {
  std::vector<double> p(4 * 4 * 4, 0.0);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t d = a ^ b;
        const std::size_t x = 2 * a + c, y = 2 * b + c, z = 2 * d + c;
        p[(x * 4 + y) * 4 + z] = 0.125;
      }
  return JointDist3(index_alphabet(4), index_alphabet(4), index_alphabet(4), std::move(p));
}

// Markov chain X <- Z -> Y assembled from explicit conditional tables.
inline JointDist3 make_markov(const MarkovTables& t) {
  const std::size_t nz = t.pz.size();
  if (nz == 0) throw std::invalid_argument("markov: p(z) must be non-empty");
  if (t.x_given_z.size() != nz || t.y_given_z.size() != nz)
    throw std::invalid_argument("markov: conditional tables must have one row per z value");
  const std::size_t nx = t.x_given_z[0].size();
  const std::size_t ny = t.y_given_z[0].size();
  if (nx == 0 || ny == 0)
    throw std::invalid_argument("markov: conditional rows must be non-empty");

  double zmass = 0.0;
  for (double v : t.pz) {
    if (!(v >= 0.0)) throw std::invalid_argument("markov: p(z) has a negative entry");
    zmass += v;
  }
  if (std::abs(zmass - 1.0) > JointDist3::kNormTol)
    throw std::invalid_argument("markov: p(z) sums to " + std::to_string(zmass) + ", not 1");
  auto check_rows = [](const std::vector<std::vector<double>>& rows, std::size_t width,
                       const char* name) {
    for (std::size_t z = 0; z < rows.size(); ++z) {
      if (rows[z].size() != width)
        throw std::invalid_argument(std::string("markov: ") + name + " row " +
                                    std::to_string(z) + " has inconsistent length");
      double s = 0.0;
      for (double v : rows[z]) {
        if (!(v >= 0.0))
          throw std::invalid_argument(std::string("markov: ") + name + " row " +
                                      std::to_string(z) + " has a negative entry");
        s += v;
      }
      if (std::abs(s - 1.0) > JointDist3::kNormTol)
        throw std::invalid_argument(std::string("markov: ") + name + " row " +
                                    std::to_string(z) + " sums to " + std::to_string(s) +
                                    ", not 1");
    }
  };
  check_rows(t.x_given_z, nx, "p(x|z)");
  check_rows(t.y_given_z, ny, "p(y|z)");

  std::vector<double> p(nx * ny * nz, 0.0);
  for (std::size_t iz = 0; iz < nz; ++iz)
    for (std::size_t ix = 0; ix < nx; ++ix)
      for (std::size_t iy = 0; iy < ny; ++iy)
        p[(ix * ny + iy) * nz + iz] = t.pz[iz] * t.x_given_z[iz][ix] * t.y_given_z[iz][iy];
  return JointDist3::normalized(index_alphabet(nx), index_alphabet(ny), index_alphabet(nz),
                                std::move(p));
}

// Two independent channels in parallel: a uniform bit Z drives X1 (coupling
// lambda1) and Y1 (coupling lambda2); an independent uniform bit X2 drives Y2
// (coupling lambda3).  X = (X1, X2) and Y = (Y1, Y2), labels "x1x2" / "y1y2".
inline JointDist3 make_parallel(double lambda1, double lambda2, double lambda3) {
  detail::check_unit_interval(lambda1, "lambda1");
  detail::check_unit_interval(lambda2, "lambda2");
  detail::check_unit_interval(lambda3, "lambda3");
  std::vector<double> p(4 * 4 * 2, 0.0);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t y1 = 0; y1 < 2; ++y1)
        for (std::size_t x2 = 0; x2 < 2; ++x2)
          for (std::size_t y2 = 0; y2 < 2; ++y2) {
            const double mass = 0.5 * detail::coupling(z, x1, lambda1, 2) *
                                detail::coupling(z, y1, lambda2, 2) * 0.5 *
                                detail::coupling(x2, y2, lambda3, 2);
            p[((2 * x1 + x2) * 4 + (2 * y1 + y2)) * 2 + z] += mass;
          }
  Alphabet pair({"00", "01", "10", "11"});
  return JointDist3(pair, pair, index_alphabet(2), std::move(p));
}

inline JointDist3 make_system(const SystemSpec& spec) {
  auto require = [&](std::initializer_list<const char*> names) {
    for (const char* n : names)
      if (!spec.params.count(n))
        throw std::invalid_argument(std::string("system \"") + system_kind_name(spec.kind) +
                                    "\" requires parameter \"" + n + "\"");
    for (const auto& [k, v] : spec.params) {
      bool known = false;
      for (const char* n : names) known = known || (k == n);
      if (!known)
        throw std::invalid_argument("system \"" + std::string(system_kind_name(spec.kind)) +
                                    "\" does not take parameter \"" + k + "\"");
    }
  };
  switch (spec.kind) {
    case SystemKind::Copy:
      require({"lambda"});
      return make_copy(spec.params.at("lambda"));
    case SystemKind::And:
      require({"lambda"});
      return make_and(spec.params.at("lambda"));
    case SystemKind::Xor:
      require({});
      return make_xor();
    case SystemKind::Dice: {
      require({"lambda", "alpha"});
      const double a = spec.params.at("alpha");
      if (a != std::floor(a))
        throw std::invalid_argument("alpha must be an integer, got " + std::to_string(a));
      return make_dice(spec.params.at("lambda"), int(a));
    }
    case SystemKind::Dyadic:
      require({});
      return make_dyadic();
    case SystemKind::Triadic:
      require({});
      return make_triadic();
    case SystemKind::Markov:
      require({});
      if (!spec.markov) throw std::invalid_argument("markov system requires conditional tables");
      return make_markov(*spec.markov);
    case SystemKind::Parallel:
      require({"lambda1", "lambda2", "lambda3"});
      return make_parallel(spec.params.at("lambda1"), spec.params.at("lambda2"),
                           spec.params.at("lambda3"));
  }
  throw std::invalid_argument("make_system: invalid kind");
}

// --- deterministic random instances ------------------------------------------

// splitmix64: tiny, fast, and identical on every platform, unlike the
// standard library's distribution templates.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1p-53; }

  // standard exponential; the 1-u argument keeps log() away from zero
  double exponential() { return -std::log(1.0 - uniform()); }

  // uniform integer in [0, n)
  std::size_t below(std::size_t n) { return std::size_t(uniform() * double(n)) % n; }

 private:
  std::uint64_t state_;
};

namespace detail {

// Flat Dirichlet draw: exponentials normalized to the simplex.
inline std::vector<double> random_simplex(DetRng& rng, std::size_t n) {
  std::vector<double> v(n);
  double total = 0.0;
  for (double& e : v) total += (e = rng.exponential());
  for (double& e : v) e /= total;
  return v;
}

}  // namespace detail

// Fully random joint table, uniform on the probability simplex.
inline JointDist3 random_dist(DetRng& rng, std::size_t nx, std::size_t ny, std::size_t nz) {
  return JointDist3::normalized(index_alphabet(nx), index_alphabet(ny), index_alphabet(nz),
                                detail::random_simplex(rng, nx * ny * nz));
}

// Random Markov chain X <- Z -> Y with flat-Dirichlet marginals and rows.
inline JointDist3 random_markov(DetRng& rng, std::size_t nx, std::size_t ny, std::size_t nz) {
  MarkovTables t;
  t.pz = detail::random_simplex(rng, nz);
  for (std::size_t z = 0; z < nz; ++z) {
    t.x_given_z.push_back(detail::random_simplex(rng, nx));
    t.y_given_z.push_back(detail::random_simplex(rng, ny));
  }
  return make_markov(t);
}

}  // namespace pidtri
