#pragma once

// Closed-form decomposition for trivariate jointly Gaussian systems with a
// univariate target.  For such systems the redundancy of every established
// decomposition proposal coincides and saturates its upper bound,
//
//     SI(T:{A;B}) = min[I(T:A), I(T:B)],
//
// so the atoms need no numerical optimization.  The redundancy split follows
// the same pattern one level down,
//
//     SR(T:{A;B})  = min[I(T:A), I(T:B), I(A:B)],
//     NSR(T:{A;B}) = SI - SR,
//
// equivalently: NSR = 0 when I(A:B) >= SI, else NSR = SI - I(A:B).  All
// quantities reduce to pairwise and joint Gaussian mutual informations,
// which depend on the covariance matrix only through its correlations.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pidtri/broja.hpp"
#include "pidtri/dist.hpp"
#include "pidtri/subatoms.hpp"

namespace pidtri {

// Raised when a covariance matrix is singular or close enough to it that the
// mutual informations diverge (e.g. a correlation of magnitude one).
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Eigenvalues of a symmetric 3x3 matrix by the trigonometric closed form,
// returned in ascending order.
inline std::array<double, 3> symmetric_eigenvalues(const std::array<std::array<double, 3>, 3>& a) {
  const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  if (p1 == 0.0) {
    std::array<double, 3> e{a[0][0], a[1][1], a[2][2]};
    std::sort(e.begin(), e.end());
    return e;
  }
  const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                    (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  std::array<std::array<double, 3>, 3> b{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  const double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                      b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                      b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(detb / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e_hi = q + 2.0 * p * std::cos(phi);
  const double e_lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e_lo, 3.0 * q - e_hi - e_lo, e_hi};
}

}  // namespace detail

// Covariance matrix of a trivariate Gaussian, variable order (X, Y, Z).
// Validated on construction: symmetric within 1e-12 and positive definite
// with smallest eigenvalue above 1e-12 of the largest; anything closer to
// singular makes the informations diverge and raises DegeneracyError.
struct GaussianCov {
  std::array<std::array<double, 3>, 3> cov{};

  explicit GaussianCov(const std::array<std::array<double, 3>, 3>& c) : cov(c) { validate(); }

  void validate() const {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (!std::isfinite(cov[i][j]))
          throw std::invalid_argument("GaussianCov: entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") is not finite");
        if (std::abs(cov[i][j] - cov[j][i]) > 1e-12)
          throw std::invalid_argument(
              "GaussianCov: matrix is not symmetric: entries (" + std::to_string(i) + "," +
              std::to_string(j) + ") and (" + std::to_string(j) + "," + std::to_string(i) +
              ") differ by " + std::to_string(std::abs(cov[i][j] - cov[j][i])));
      }
    const auto eig = detail::symmetric_eigenvalues(cov);
    if (eig[0] < -1e-12 * std::max(eig[2], 0.0) || eig[2] <= 0.0)
      throw std::invalid_argument("GaussianCov: matrix is not positive semidefinite "
                                  "(smallest eigenvalue " + std::to_string(eig[0]) + ")");
    if (eig[0] <= 1e-12 * eig[2])
      throw DegeneracyError("GaussianCov: covariance is singular or nearly so (eigenvalues " +
                            std::to_string(eig[0]) + " vs " + std::to_string(eig[2]) +
                            "); some mutual information diverges");
  }

  double variance(Role r) const { return cov[int(r)][int(r)]; }
  double correlation(Role r1, Role r2) const {
    return cov[int(r1)][int(r2)] / std::sqrt(variance(r1) * variance(r2));
  }
};

// Pairwise and joint-source mutual informations of the Gaussian, in bits.
struct GaussianMis {
  // pairwise[i][j] = I(role i : role j); joint[t] = I(t : other two)
  std::array<std::array<double, 3>, 3> pairwise{};
  std::array<double, 3> joint{};

  double between(Role a, Role b) const {
    if (a == b) throw std::invalid_argument("GaussianMis::between: roles must differ");
    return pairwise[int(a)][int(b)];
  }
  double joint_sources(Role target) const { return joint[int(target)]; }

  std::map<std::string, double> as_map() const {
    std::map<std::string, double> m;
    const char* n = "XYZ";
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        m["I(" + std::string(1, n[i]) + ":" + std::string(1, n[j]) + ")"] = pairwise[i][j];
    for (int t = 0; t < 3; ++t) {
      const auto s = sources_of(Role(t));
      m["I(" + std::string(1, n[t]) + ":(" + std::string(1, n[int(s[0])]) + "," +
        std::string(1, n[int(s[1])]) + "))"] = joint[t];
    }
    return m;
  }
};

// I(a:b) = -1/2 log2(1 - rho^2) for each pair, and for each target the joint
// I(t:(a,b)) = 1/2 log2(Var(t) / Var(t | a,b)) with the conditional variance
// from the Schur complement of the source block.
inline GaussianMis gaussian_mutual_informations(const GaussianCov& g) {
  g.validate();
  GaussianMis out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double rho = g.correlation(Role(i), Role(j));
      const double one_minus = 1.0 - rho * rho;
      if (one_minus <= 1e-15)
        throw DegeneracyError("gaussian_mutual_informations: |correlation| of pair (" +
                              std::to_string(i) + "," + std::to_string(j) +
                              ") is 1; the mutual information diverges");
      out.pairwise[i][j] = std::max(0.0, -0.5 * std::log2(one_minus));
    }
  for (int t = 0; t < 3; ++t) {
    const auto s = sources_of(Role(t));
    const int a = int(s[0]), b = int(s[1]);
    const double saa = g.cov[a][a], sbb = g.cov[b][b], sab = g.cov[a][b];
    const double det_s = saa * sbb - sab * sab;
    const double va = g.cov[t][a], vb = g.cov[t][b];
    // v^T S^{-1} v with S the 2x2 source covariance block
    const double quad = (vb * (saa * vb - sab * va) + va * (sbb * va - sab * vb)) / det_s;
    const double cond = g.cov[t][t] - quad;
    if (!(cond > 1e-15 * g.cov[t][t]))
      throw DegeneracyError(std::string("gaussian_mutual_informations: conditional variance of ") +
                            role_name(Role(t)) + " given the sources vanishes; the joint "
                            "mutual information diverges");
    out.joint[t] = std::max(0.0, 0.5 * std::log2(g.cov[t][t] / cond));
  }
  return out;
}

// Closed-form atoms: SI saturates at the smaller target-source information,
// so that source's unique information is exactly zero, and the synergy is
// what the joint information adds over the larger pairwise one.
inline PidAtoms gaussian_pid(const GaussianCov& g, Role target) {
  const auto mis = gaussian_mutual_informations(g);
  const auto src = sources_of(target);
  const double ia = mis.between(target, src[0]);
  const double ib = mis.between(target, src[1]);
  PidAtoms atoms;
  atoms.target = target;
  atoms.si = std::min(ia, ib);
  atoms.ui_a = ia - atoms.si;  // one of these is exactly 0
  atoms.ui_b = ib - atoms.si;
  atoms.ci = std::max(0.0, mis.joint_sources(target) - std::max(ia, ib));
  return atoms;
}

// SR = min of all three pairwise informations (source redundancy is maximal
// in Gaussian systems); the branch structure follows: when the source pair
// shares at least SI bits, all redundancy is source redundancy.
inline RedundancySplit gaussian_sr_nsr(const GaussianCov& g, Role target) {
  const auto mis = gaussian_mutual_informations(g);
  const auto src = sources_of(target);
  const double ia = mis.between(target, src[0]);
  const double ib = mis.between(target, src[1]);
  const double iab = mis.between(src[0], src[1]);
  RedundancySplit split;
  split.target = target;
  const double si = std::min(ia, ib);
  split.sr = std::min(si, iab);
  split.nsr = detail::exact_complement(si, split.sr);
  return split;
}

// Dense midpoint discretization of the Gaussian onto a regular grid of
// `bins` cells per dimension covering +-`half_width` standard deviations:
// the density is evaluated at each cell's midpoint in standardized
// coordinates and the table normalized.  The result depends on the
// covariance only through its correlations, like every other output here.
inline JointDist3 discretize_gaussian(const GaussianCov& g, std::size_t bins = 40,
                                      double half_width = 4.0) {
  g.validate();
  if (bins < 2) throw std::invalid_argument("discretize_gaussian: need at least 2 bins");
  if (!(half_width > 0.0))
    throw std::invalid_argument("discretize_gaussian: half_width must be positive");

  // correlation matrix and its inverse via the adjugate
  std::array<std::array<double, 3>, 3> c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c[i][j] = g.correlation(Role(i), Role(j));
  const double det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) -
                     c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0]) +
                     c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
  if (det <= 1e-15)
    throw DegeneracyError("discretize_gaussian: correlation matrix is singular");
  std::array<std::array<double, 3>, 3> inv{};
  inv[0][0] = (c[1][1] * c[2][2] - c[1][2] * c[2][1]) / det;
  inv[0][1] = (c[0][2] * c[2][1] - c[0][1] * c[2][2]) / det;
  inv[0][2] = (c[0][1] * c[1][2] - c[0][2] * c[1][1]) / det;
  inv[1][1] = (c[0][0] * c[2][2] - c[0][2] * c[2][0]) / det;
  inv[1][2] = (c[0][2] * c[1][0] - c[0][0] * c[1][2]) / det;
  inv[2][2] = (c[0][0] * c[1][1] - c[0][1] * c[1][0]) / det;
  inv[1][0] = inv[0][1];
  inv[2][0] = inv[0][2];
  inv[2][1] = inv[1][2];

  std::vector<double> centers(bins);
  const double step = 2.0 * half_width / double(bins);
  for (std::size_t i = 0; i < bins; ++i) centers[i] = -half_width + (double(i) + 0.5) * step;

  std::vector<double> probs(bins * bins * bins);
  std::size_t at = 0;
  for (std::size_t ix = 0; ix < bins; ++ix)
    for (std::size_t iy = 0; iy < bins; ++iy)
      for (std::size_t iz = 0; iz < bins; ++iz) {
        const std::array<double, 3> u{centers[ix], centers[iy], centers[iz]};
        double quad = 0.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) quad += u[i] * inv[i][j] * u[j];
        probs[at++] = std::exp(-0.5 * quad);
      }

  std::vector<std::string> labels(bins);
  for (std::size_t i = 0; i < bins; ++i) labels[i] = "b" + std::to_string(i);
  Alphabet ax(labels), ay(labels), az(labels);
  return JointDist3::normalized(std::move(ax), std::move(ay), std::move(az), std::move(probs));
}

}  // namespace pidtri
