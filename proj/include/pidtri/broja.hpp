#pragma once

// Decomposition of I(T : (A,B)) into redundant, unique, and synergistic atoms
// for one choice of target variable T among {X, Y, Z}.
//
// The atoms are defined through the convex program
//
//     q* = argmin I_q(T : (A,B))   over  { q >= 0 : q(t,a) = p(t,a),
//                                                   q(t,b) = p(t,b) },
//
// i.e. the joint distribution with the least target/source-pair information
// among all distributions sharing both target-source pairwise marginals.
// The atoms follow as
//
//     UI(T:{A\B}) = I_q*(T:A|B)        unique via A
//     UI(T:{B\A}) = I_q*(T:B|A)        unique via B
//     SI(T:{A;B}) = I_p(T:A) - UI(T:{A\B})   redundancy
//     CI(T:{A;B}) = I_p(T:(A,B)) - I_q*(T:(A,B))   synergy
//
// Because q(t) is fixed on the feasible set, the objective is convex in q,
// and the feasible set is a transportation polytope per target value.  The
// solver walks it with a projected-gradient step plus cyclic exact line
// minimization along the 2x2 exchange directions
//     +e(t,a,b) + e(t,a',b') - e(t,a,b') - e(t,a',b),
// which span the tangent space of each slab's marginal constraints.  Two
// compound direction classes handle the boundary: column kills (emptying one
// source-pair cell across all slabs at once) reach faces that single-slab
// moves only approach sublinearly, and joint refills re-enter a dead column
// in several slabs at once, which is the one direction class whose descent
// is invisible to every single-slab probe (see joint_refill).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pidtri/dist.hpp"

namespace pidtri {

struct SolverConfig {
  double tol_bits = 1e-10;   // sweep-over-sweep objective decrease threshold
  long max_iters = 100000;   // cap on full sweeps
  double marginal_tol = 1e-8;  // allowed feasibility residual of the result
  double grad_tol = 1e-8;    // stationarity residual: largest objective decrease
                             // (bits) any probed direction (single-slab exchanges
                             // and joint dead-column refills) can still achieve

  void validate() const {
    if (!(tol_bits > 0.0) || !(marginal_tol > 0.0) || !(grad_tol > 0.0) || max_iters <= 0)
      throw std::invalid_argument("SolverConfig: all fields must be strictly positive");
  }
};

// The four decomposition atoms for a fixed target.  `ui_a` belongs to the
// source with the lower role index (sources_of(target)[0]).
struct PidAtoms {
  Role target = Role::X;
  double si = 0.0;    // shared (redundant) information
  double ui_a = 0.0;  // unique information of the first source
  double ui_b = 0.0;  // unique information of the second source
  double ci = 0.0;    // complementary (synergistic) information

  double ui(Role source) const {
    const auto s = sources_of(target);
    if (source == s[0]) return ui_a;
    if (source == s[1]) return ui_b;
    throw std::invalid_argument("PidAtoms::ui: role is the target, not a source");
  }
  double total() const { return si + ui_a + ui_b + ci; }
};

// A feasible point of the optimization polytope, carried as a full joint
// table with the same alphabets as the input distribution.
struct PolytopePoint {
  JointDist3 q;
  double objective_bits;  // I_q(T : (A,B))
};

struct SolveDiagnostics {
  long sweeps = 0;
  bool converged = false;
  double final_decrease = 0.0;      // objective drop over the last sweep
  double grad_residual = 0.0;       // stationarity residual: best per-direction
                                    // objective decrease still achievable, bits
  double marginal_residual = 0.0;   // worst pairwise-marginal violation
  bool sampled_directions = false;  // true when the direction set was subsampled
  std::vector<double> objective_history;  // objective after each sweep
};

struct PidSolution {
  PidAtoms atoms;
  PolytopePoint point;
  SolveDiagnostics diagnostics;
};

// Raised when the iteration cap is hit before both convergence tests pass.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double best_objective, double gap_estimate)
      : std::runtime_error(what), best_objective_(best_objective), gap_estimate_(gap_estimate) {}
  double best_objective() const { return best_objective_; }
  double gap_estimate() const { return gap_estimate_; }

 private:
  double best_objective_;
  double gap_estimate_;
};

namespace detail {

// Full enumeration of exchange directions is used while the per-sweep count
// stays below this; larger systems fall back to a deterministic sample.
inline constexpr std::size_t kDirectionBudget = 60000;
inline constexpr double kZeroMass = 1e-300;

// Exchange moves that land on a face leave float dust (~1e-17) in cells that
// are exactly zero mathematically.  Treating that dust as positive mass makes
// blocked directions look movable and reports phantom first-order violations,
// so anything at or below this floor counts as zero.  Discarding it perturbs
// the marginals by far less than any tolerance in play.
inline constexpr double kCellFloor = 1e-15;

// Allowed excess of the final objective over I_p(T:A) + I_p(T:B).  By the
// chain rule, SI = I_p(T:A) + I_p(T:B) - objective at every feasible point,
// and the true optimum has SI >= 0, so any excess is a certificate of
// remaining descent.  Half the atom clamp's 1e-9 noise floor keeps the
// extracted SI clear of the clamp's consistency error.
inline constexpr double kSiCertSlack = 5e-10;

inline double snap(double v) { return v <= kCellFloor ? 0.0 : v; }

// log2(qc / mc) with the shared-zero convention: when the cell and its
// source-pair marginal vanish together the ratio tends to q/m -> 1, so the
// term is 0; a vanishing cell under positive marginal gives -infinity.
inline double log_ratio(double qc, double mc) {
  if (qc <= kZeroMass) return mc <= kZeroMass ? 0.0 : -std::numeric_limits<double>::infinity();
  return std::log2(qc / mc);
}

// Working state of one optimization problem, laid out target-major:
// q[(t * na + a) * nb + b].
struct BrojaProblem {
  Role target, role_a, role_b;
  std::size_t nt, na, nb;
  std::vector<double> q;
  std::vector<double> mta, mtb;  // fixed pairwise marginals, nt*na and nt*nb
  std::vector<double> pt;        // fixed target marginal
  std::vector<double> mab;       // current source-pair marginal, na*nb
  std::vector<std::vector<int>> rows, cols;  // active indices per slab

  std::size_t qi(std::size_t t, std::size_t a, std::size_t b) const {
    return (t * na + a) * nb + b;
  }

  static BrojaProblem from(const JointDist3& d, Role target) {
    BrojaProblem P;
    P.target = target;
    const auto src = sources_of(target);
    P.role_a = src[0];
    P.role_b = src[1];
    P.nt = d.size(target);
    P.na = d.size(P.role_a);
    P.nb = d.size(P.role_b);
    P.q.assign(P.nt * P.na * P.nb, 0.0);

    std::array<std::size_t, 3> idx{};
    for (std::size_t ix = 0; ix < d.nx(); ++ix)
      for (std::size_t iy = 0; iy < d.ny(); ++iy)
        for (std::size_t iz = 0; iz < d.nz(); ++iz) {
          idx[0] = ix; idx[1] = iy; idx[2] = iz;
          P.q[P.qi(idx[int(target)], idx[int(P.role_a)], idx[int(P.role_b)])] +=
              d.p(ix, iy, iz);
        }

    P.mta.assign(P.nt * P.na, 0.0);
    P.mtb.assign(P.nt * P.nb, 0.0);
    P.pt.assign(P.nt, 0.0);
    for (std::size_t t = 0; t < P.nt; ++t)
      for (std::size_t a = 0; a < P.na; ++a)
        for (std::size_t b = 0; b < P.nb; ++b) {
          const double v = P.q[P.qi(t, a, b)];
          P.mta[t * P.na + a] += v;
          P.mtb[t * P.nb + b] += v;
          P.pt[t] += v;
        }

    P.rows.resize(P.nt);
    P.cols.resize(P.nt);
    for (std::size_t t = 0; t < P.nt; ++t) {
      for (std::size_t a = 0; a < P.na; ++a)
        if (P.mta[t * P.na + a] > 0.0) P.rows[t].push_back(int(a));
      for (std::size_t b = 0; b < P.nb; ++b)
        if (P.mtb[t * P.nb + b] > 0.0) P.cols[t].push_back(int(b));
    }
    P.refresh_mab();
    return P;
  }

  void refresh_mab() {
    mab.assign(na * nb, 0.0);
    for (double& v : q) v = snap(v);
    for (std::size_t t = 0; t < nt; ++t)
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) mab[a * nb + b] += q[qi(t, a, b)];
  }

  // I_q(T : (A,B)) = H(T) + H(A,B) - H(T,A,B), all in bits.
  double objective() const {
    return entropy(pt) + entropy(mab) - entropy(q);
  }

  double marginal_residual() const {
    double worst = 0.0;
    std::vector<double> ra(nt * na, 0.0), rb(nt * nb, 0.0);
    for (std::size_t t = 0; t < nt; ++t)
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
          const double v = q[qi(t, a, b)];
          ra[t * na + a] += v;
          rb[t * nb + b] += v;
        }
    for (std::size_t i = 0; i < ra.size(); ++i) worst = std::max(worst, std::abs(ra[i] - mta[i]));
    for (std::size_t i = 0; i < rb.size(); ++i) worst = std::max(worst, std::abs(rb[i] - mtb[i]));
    return worst;
  }

  std::size_t direction_count() const {
    std::size_t n = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t r = rows[t].size(), c = cols[t].size();
      n += (r * (r - 1) / 2) * (c * (c - 1) / 2);
    }
    return n;
  }

  // Exact minimization of the objective along one exchange direction:
  //   delta added at (t,a,b) and (t,a',b'), removed at (t,a,b') and (t,a',b).
  // phi'(delta) = log2[(q1+d)(q2+d) / ((q3-d)(q4-d))]
  //             - log2[(m1+d)(m2+d) / ((m3-d)(m4-d))]
  // is nondecreasing (phi convex), so the minimizer is located by sign
  // bisection.  Returns the achievable objective decrease along the direction
  // in bits (the stationarity residual: zero everywhere certifies a
  // coordinate-wise optimum) and, when `move` is set, applies the minimizing
  // step to q and mab in place.  A raw derivative would not work as the
  // residual: near a face of the polytope the movable range can shrink to
  // nothing while the derivative stays finite, which would make boundary
  // optima look forever unconverged.
  double line_minimize(std::size_t t, int a, int a2, int b, int b2, bool move) {
    const std::size_t i1 = qi(t, a, b), i2 = qi(t, a2, b2), i3 = qi(t, a, b2), i4 = qi(t, a2, b);
    const std::size_t j1 = std::size_t(a) * nb + b, j2 = std::size_t(a2) * nb + b2,
                      j3 = std::size_t(a) * nb + b2, j4 = std::size_t(a2) * nb + b;
    // snapped local copies: dust cells behave as the exact zeros they are
    const double q1 = snap(q[i1]), q2 = snap(q[i2]), q3 = snap(q[i3]), q4 = snap(q[i4]);
    const double m1 = snap(mab[j1]), m2 = snap(mab[j2]), m3 = snap(mab[j3]),
                 m4 = snap(mab[j4]);

    const double lo = -std::min(q1, q2), hi = std::min(q3, q4);
    const double width = hi - lo;
    if (width <= 1e-18) return 0.0;

    auto dphi = [&](double d) {
      return log_ratio(q1 + d, m1 + d) + log_ratio(q2 + d, m2 + d) -
             log_ratio(q3 - d, m3 - d) - log_ratio(q4 - d, m4 - d);
    };
    // phi(d) - phi(0): the four changed joint cells enter the objective as
    // +p log2 p, the four changed pair-marginal cells as -p log2 p
    auto plogp = [](double v) { return v > 0.0 ? v * std::log2(v) : 0.0; };
    auto phi_gain = [&](double d) {  // objective decrease achieved at d
      const double dq = plogp(q1 + d) + plogp(q2 + d) + plogp(q3 - d) + plogp(q4 - d) -
                        plogp(q1) - plogp(q2) - plogp(q3) - plogp(q4);
      const double dm = plogp(m1 + d) + plogp(m2 + d) + plogp(m3 - d) + plogp(m4 - d) -
                        plogp(m1) - plogp(m2) - plogp(m3) - plogp(m4);
      return -(dq - dm);
    };

    // first-order screen: skip directions with no improvement beyond noise
    double viol;
    const double probe = std::min(width * 0.5, 1e-11);
    if (lo < 0.0 && hi > 0.0) {
      viol = std::abs(dphi(0.0));
    } else if (lo == 0.0) {  // can only move right; improvement iff phi' < 0 there
      viol = std::max(0.0, -dphi(probe));
    } else {  // hi == 0: can only move left; improvement iff phi' > 0 there
      viol = std::max(0.0, dphi(-probe));
    }
    if (viol <= 1e-13) return 0.0;

    // locate the minimizer by bisection on the sign of phi'
    double a_lo = lo + std::min(width * 1e-15, 1e-18);
    double a_hi = hi - std::min(width * 1e-15, 1e-18);
    double dstar;
    if (dphi(a_lo) >= 0.0) {
      dstar = lo;
    } else if (dphi(a_hi) <= 0.0) {
      dstar = hi;
    } else {
      for (int it = 0; it < 100 && a_hi - a_lo > 1e-17; ++it) {
        const double mid = 0.5 * (a_lo + a_hi);
        (dphi(mid) < 0.0 ? a_lo : a_hi) = mid;
      }
      dstar = 0.5 * (a_lo + a_hi);
    }
    const double gain = std::max(0.0, phi_gain(dstar));
    if (!move || dstar == 0.0) return gain;

    q[i1] = q1 + dstar;
    q[i2] = q2 + dstar;
    q[i3] = std::max(0.0, q3 - dstar);
    q[i4] = std::max(0.0, q4 - dstar);
    if (dstar == lo) (q1 < q2 ? q[i1] : q[i2]) = 0.0;  // land exactly on the face
    if (dstar == hi) (q3 < q4 ? q[i3] : q[i4]) = 0.0;
    mab[j1] = std::max(0.0, m1 + dstar);
    mab[j2] = std::max(0.0, m2 + dstar);
    mab[j3] = std::max(0.0, m3 - dstar);
    mab[j4] = std::max(0.0, m4 - dstar);
    return gain;
  }

  // Compound move that empties one source-pair cell: in every slab the mass
  // of (a,b) is rerouted through an exchange with a partner cell, so the pair
  // marginal q(a,b) drops to exact zero while all constraints stay intact.
  // Accepted only on strict objective decrease.  Cyclic single-slab moves
  // cannot do this in finite time: when the optimum keeps a whole column on
  // the boundary, each slab's one-dimensional minimizer stays barely interior
  // (the shared marginal shrinks along with the cells) and the iterates crawl
  // sublinearly, which is where almost all sweeps would otherwise go.
  bool try_kill_column(int a, int b) {
    auto plogp = [](double v) { return v > 0.0 ? v * std::log2(v) : 0.0; };
    struct Move {
      std::size_t t;
      int a2, b2;
      double c;
    };
    std::vector<Move> moves;
    double dq = 0.0;  // change of sum q log2 q over the affected joint cells
    for (std::size_t t = 0; t < nt; ++t) {
      const double c = q[qi(t, a, b)];
      if (c <= 0.0) continue;
      // partner must carry at least the rerouted mass itself
      int best_a2 = -1, best_b2 = -1;
      double best = c;
      for (int a2 : rows[t]) {
        if (a2 == a) continue;
        for (int b2 : cols[t]) {
          if (b2 == b) continue;
          const double w = q[qi(t, a2, b2)];
          if (w >= best) {
            best = w;
            best_a2 = a2;
            best_b2 = b2;
          }
        }
      }
      if (best_a2 < 0) return false;  // no slab partner can absorb the mass
      moves.push_back({t, best_a2, best_b2, c});
      const double q22 = q[qi(t, best_a2, best_b2)];
      const double q12 = q[qi(t, a, best_b2)];
      const double q21 = q[qi(t, best_a2, b)];
      dq += -plogp(c) + plogp(q22 - c) - plogp(q22) + plogp(q12 + c) - plogp(q12) +
            plogp(q21 + c) - plogp(q21);
    }
    if (moves.empty()) return false;

    // change of sum m log2 m over the affected pair-marginal cells
    std::map<std::pair<int, int>, double> mdelta;
    for (const Move& mv : moves) {
      mdelta[{a, b}] -= mv.c;
      mdelta[{mv.a2, mv.b2}] -= mv.c;
      mdelta[{a, mv.b2}] += mv.c;
      mdelta[{mv.a2, b}] += mv.c;
    }
    double dm = 0.0;
    for (const auto& [cell, delta] : mdelta) {
      const double m0 = mab[std::size_t(cell.first) * nb + cell.second];
      dm += plogp(std::max(0.0, m0 + delta)) - plogp(m0);
    }

    // f = H(pt) - sum m log2 m + sum q log2 q, so the decrease is -(dq - dm)
    if (-(dq - dm) <= 1e-14) return false;

    for (const Move& mv : moves) {
      q[qi(mv.t, a, b)] = 0.0;
      q[qi(mv.t, mv.a2, mv.b2)] = std::max(0.0, q[qi(mv.t, mv.a2, mv.b2)] - mv.c);
      q[qi(mv.t, a, mv.b2)] += mv.c;
      q[qi(mv.t, mv.a2, b)] += mv.c;
    }
    for (const auto& [cell, delta] : mdelta) {
      double& m = mab[std::size_t(cell.first) * nb + cell.second];
      m = std::max(0.0, m + delta);
    }
    mab[std::size_t(a) * nb + b] = 0.0;
    return true;
  }

  // Weighted joint refill of a dead source-pair column through the exchange
  //     sum_t  w_t * [ +e(t,a,b) + e(t,a2,b2) - e(t,a,b2) - e(t,a2,b) ].
  //
  // When the column marginal m(a,b) is exactly zero the objective is kinked
  // there, and the kink hides descent from every single-slab probe: one slab
  // refilling alone keeps q(t,a,b) = m(a,b) along its ray, so the
  // delta*log2(delta) terms of the cell and of the marginal cancel and the
  // one-slab derivative stays finite (often nonnegative).  Refilling k >= 2
  // slabs together breaks that tie: the cells gain sum_t w_t*log2(w_t*delta)
  // while the marginal pays only log2(delta), leaving a strict -H(w) < 0
  // head start.  The one-sided derivative along the family is
  //     -H(w) + sum_t w_t log2(q2t/(q3t q4t)) - log2(m2/(m3 m4)),
  // minimized over the weight simplex by Gibbs weights w_t ~ 2^{-c_t} with
  // c_t = log2(q2t/(q3t q4t)); with the partner column dead as well the
  // cancellation pattern changes and uniform weights stay a safe probe.
  // Returns the achievable objective decrease in bits at the exact
  // one-dimensional minimizer (phi is convex: every cell is affine in the
  // step) and applies the step when `move` is set.
  double joint_refill(int a, int b, int a2, int b2, bool move) {
    const std::size_t j1 = std::size_t(a) * nb + b, j2 = std::size_t(a2) * nb + b2,
                      j3 = std::size_t(a) * nb + b2, j4 = std::size_t(a2) * nb + b;
    const double m1 = snap(mab[j1]);
    if (m1 > 0.0) return 0.0;  // live columns are smooth; single probes see them
    const double m2 = snap(mab[j2]), m3 = snap(mab[j3]), m4 = snap(mab[j4]);
    if (m3 <= 0.0 || m4 <= 0.0) return 0.0;

    auto& slabs = refill_slabs_;
    auto& q2v = refill_q2_;
    auto& q3v = refill_q3_;
    auto& q4v = refill_q4_;
    auto& ct = refill_ct_;
    slabs.clear();
    q2v.clear();
    q3v.clear();
    q4v.clear();
    ct.clear();
    double cmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < nt; ++t) {
      const double q3t = snap(q[qi(t, a, b2)]), q4t = snap(q[qi(t, a2, b)]);
      if (q3t <= 0.0 || q4t <= 0.0) continue;  // slab has no donor mass
      const double q2t = snap(q[qi(t, a2, b2)]);
      slabs.push_back(t);
      q2v.push_back(q2t);
      q3v.push_back(q3t);
      q4v.push_back(q4t);
      const double c = std::log2(std::max(q2t, 1e-300) / (q3t * q4t));
      ct.push_back(c);
      cmin = std::min(cmin, c);
    }
    const std::size_t k = slabs.size();
    if (k < 2) return 0.0;  // a lone slab cannot beat the kink; no joint gain

    auto& w = refill_w_;
    w.assign(k, 1.0 / double(k));
    if (m2 > 0.0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        w[i] = std::max(std::exp2(-(ct[i] - cmin)), 1e-280);
        sum += w[i];
      }
      for (double& x : w) x /= sum;
    }

    double dmax = std::min(m3, m4);
    for (std::size_t i = 0; i < k; ++i)
      dmax = std::min(dmax, std::min(q3v[i], q4v[i]) / w[i]);
    if (!(dmax > 1e-18)) return 0.0;

    // phi'(d); the 1/ln2 terms cancel within each slab and within the
    // marginal block, and q1t = m1 = 0 exactly on a dead column
    auto dphi = [&](double d) {
      double s = -(std::log2(d) + std::log2(m2 + d) - std::log2(m3 - d) - std::log2(m4 - d));
      for (std::size_t i = 0; i < k; ++i) {
        const double e = w[i] * d;
        s += w[i] * (std::log2(e) + std::log2(q2v[i] + e) - std::log2(q3v[i] - e) -
                     std::log2(q4v[i] - e));
      }
      return s;
    };
    auto plogp = [](double v) { return v > 0.0 ? v * std::log2(v) : 0.0; };
    auto phi_gain = [&](double d) {  // objective decrease achieved at d
      double dq = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double e = w[i] * d;
        dq += plogp(e) + plogp(q2v[i] + e) - plogp(q2v[i]) + plogp(q3v[i] - e) -
              plogp(q3v[i]) + plogp(q4v[i] - e) - plogp(q4v[i]);
      }
      const double dm = plogp(d) + plogp(m2 + d) - plogp(m2) + plogp(m3 - d) - plogp(m3) +
                        plogp(m4 - d) - plogp(m4);
      return -(dq - dm);
    };

    const double probe = std::min(dmax * 0.5, 1e-11);
    if (-dphi(probe) <= 1e-13) return 0.0;

    double a_lo = probe, a_hi = dmax * (1.0 - 1e-12);
    double dstar;
    if (dphi(a_hi) <= 0.0) {
      dstar = dmax;
    } else {
      for (int it = 0; it < 200 && a_hi - a_lo > 1e-17; ++it) {
        const double mid = 0.5 * (a_lo + a_hi);
        (dphi(mid) < 0.0 ? a_lo : a_hi) = mid;
      }
      dstar = 0.5 * (a_lo + a_hi);
    }
    const double gain = std::max(0.0, phi_gain(dstar));
    if (!move || gain <= 0.0) return gain;

    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t t = slabs[i];
      const double e = w[i] * dstar;
      q[qi(t, a, b)] = e;  // the cell was exactly zero
      q[qi(t, a2, b2)] = snap(q[qi(t, a2, b2)]) + e;
      q[qi(t, a, b2)] = std::max(0.0, q3v[i] - e);
      q[qi(t, a2, b)] = std::max(0.0, q4v[i] - e);
    }
    mab[j1] = dstar;
    mab[j2] = m2 + dstar;
    mab[j3] = std::max(0.0, m3 - dstar);
    mab[j4] = std::max(0.0, m4 - dstar);
    return gain;
  }

  // Probes (and with `move`, takes) the best joint refill of every dead
  // column.  With partner_budget == 0 every partner column is tried; a
  // positive budget instead probes that many deterministically sampled
  // partners per dead column (hashed from `salt`, so runs stay bit-exact).
  // Large discretized systems can hold hundreds of dead columns, and the
  // full dead x partner product costs more than the whole sweep, while the
  // improving refill directions are rare; sampling keeps the scan O(dead x
  // budget) and the full scan still backs the stationarity verification.
  double joint_refill_scan(bool move, std::size_t partner_budget = 0,
                           std::uint64_t salt = 0) {
    double best = 0.0;
    for (int a = 0; a < int(na); ++a)
      for (int b = 0; b < int(nb); ++b) {
        if (snap(mab[std::size_t(a) * nb + b]) > 0.0) continue;
        if (partner_budget == 0) {
          for (int a2 = 0; a2 < int(na); ++a2) {
            if (a2 == a) continue;
            for (int b2 = 0; b2 < int(nb); ++b2) {
              if (b2 == b) continue;
              best = std::max(best, joint_refill(a, b, a2, b2, move));
            }
          }
        } else {
          std::uint64_t h = salt ^ (std::uint64_t(a) * nb + b) * 0x9E3779B97F4A7C15ULL;
          for (std::size_t j = 0; j < partner_budget; ++j) {
            h += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = h;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            z ^= z >> 31;
            const int a2 = int(z % na), b2 = int((z >> 32) % nb);
            if (a2 == a || b2 == b) continue;
            best = std::max(best, joint_refill(a, b, a2, b2, move));
          }
        }
      }
    return best;
  }

  // Exact line search along the net displacement of the last sweep.  Around
  // a flat interior optimum the cyclic exchange moves zig-zag: each sweep
  // closes only a fixed fraction of the remaining gap, but the sum of a
  // sweep's moves points down the valley floor.  The difference of two
  // feasible points preserves every marginal, so the ray q + s*(q - q_old)
  // stays in the constraint plane; the objective is convex along it (each
  // source-pair column contributes sum_t q log2(q/m), whose Hessian
  // diag(1/q) - (1/m)*ones is PSD by Cauchy-Schwarz, and H(pt) is constant),
  // so golden-section finds the exact minimizer.  One call costs a few dozen
  // O(cells) evaluations -- noise next to a sweep's line minimizations.
  bool extrapolate(const std::vector<double>& q_old) {
    ex_dir.assign(q.size(), 0.0);
    double dmax = 0.0, s_hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double d = q[i] - q_old[i];
      ex_dir[i] = d;
      dmax = std::max(dmax, std::abs(d));
      if (d < 0.0) s_hi = std::min(s_hi, q[i] / -d);
    }
    if (dmax < 1e-15 || !(s_hi > 0.0)) return false;
    s_hi = std::min(s_hi, 1e9);

    ex_dmab.assign(na * nb, 0.0);
    for (std::size_t t = 0; t < nt; ++t)
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b)
          ex_dmab[a * nb + b] += ex_dir[qi(t, a, b)];

    auto plogp = [](double v) { return v > 0.0 ? v * std::log2(v) : 0.0; };
    // objective minus the constant entropy(pt): enough for comparisons
    auto eval = [&](double s) {
      double acc = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i)
        acc += plogp(std::max(0.0, q[i] + s * ex_dir[i]));
      for (std::size_t j = 0; j < mab.size(); ++j)
        acc -= plogp(std::max(0.0, mab[j] + s * ex_dmab[j]));
      return acc;
    };

    const double f0 = eval(0.0);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = s_hi;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-13 * s_hi; ++it) {
      if (f1 <= f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - gr * (hi - lo); f1 = eval(x1);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + gr * (hi - lo); f2 = eval(x2);
      }
    }
    double s_star = 0.5 * (lo + hi);
    double f_star = eval(s_star);
    if (eval(s_hi) < f_star) {  // minimizer on the feasibility boundary
      s_star = s_hi;
      f_star = eval(s_hi);
    }
    if (s_star <= 0.0 || !(f_star < f0 - 1e-16)) return false;

    for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::max(0.0, q[i] + s_star * ex_dir[i]);
    for (std::size_t j = 0; j < mab.size(); ++j)
      mab[j] = std::max(0.0, mab[j] + s_star * ex_dmab[j]);
    return true;
  }

  std::vector<double> ex_dir, ex_dmab;  // extrapolation scratch
  std::vector<std::size_t> refill_slabs_;  // joint_refill scratch
  std::vector<double> refill_q2_, refill_q3_, refill_q4_, refill_ct_, refill_w_;

  // One projected-gradient step with Armijo backtracking.  The gradient of
  // the objective is log2 q(t,a,b) - log2 q(a,b); projecting onto the tangent
  // space of a slab's marginal constraints is double centering over its
  // active rows and columns.  Components that would push mass out of cells
  // already at zero are removed by alternating the centering with clipping.
  void gradient_step() {
    refresh_mab();  // consistent, dust-free baseline for the line search
    std::vector<double> v(q.size(), 0.0);
    std::vector<char> at_zero(q.size(), 0);

    for (std::size_t t = 0; t < nt; ++t) {
      const auto& R = rows[t];
      const auto& C = cols[t];
      if (R.size() < 2 || C.size() < 2) continue;
      for (int a : R)
        for (int b : C) {
          const std::size_t i = qi(t, a, b);
          const double m = mab[std::size_t(a) * nb + b];
          if (m <= kCellFloor) {
            v[i] = 0.0;
          } else if (q[i] <= kCellFloor) {
            at_zero[i] = 1;
            v[i] = -std::max(std::log2(1e-20 / m), -80.0);  // descent direction
          } else {
            v[i] = -std::log2(q[i] / m);
          }
        }

      auto center = [&] {
        const double nr = double(R.size()), nc = double(C.size());
        double grand = 0.0;
        std::vector<double> rmean(na, 0.0), cmean(nb, 0.0);
        for (int a : R)
          for (int b : C) {
            const double w = v[qi(t, a, b)];
            rmean[a] += w;
            cmean[b] += w;
            grand += w;
          }
        for (int a : R) rmean[a] /= nc;
        for (int b : C) cmean[b] /= nr;
        grand /= nr * nc;
        for (int a : R)
          for (int b : C) v[qi(t, a, b)] += grand - rmean[a] - cmean[b];
      };

      center();
      for (int round = 0; round < 40; ++round) {
        bool clipped = false;
        for (int a : R)
          for (int b : C) {
            const std::size_t i = qi(t, a, b);
            if (at_zero[i] && v[i] < 0.0) {
              v[i] = 0.0;
              clipped = true;
            }
          }
        if (!clipped) break;
        center();
      }
      // if the alternation left a meaningful pull out of an empty cell the
      // step would be truncated to nothing; drop the slab's direction instead
      double vmax = 0.0, bad = 0.0;
      for (int a : R)
        for (int b : C) {
          const std::size_t i = qi(t, a, b);
          vmax = std::max(vmax, std::abs(v[i]));
          if (at_zero[i]) bad = std::max(bad, -v[i]);
        }
      if (bad > 1e-10 * std::max(vmax, 1.0))
        for (int a : R)
          for (int b : C) v[qi(t, a, b)] = 0.0;
    }

    double norm2 = 0.0, gmax = 0.0, step_cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
      norm2 += v[i] * v[i];
      gmax = std::max(gmax, std::abs(v[i]));
      if (v[i] < 0.0) step_cap = std::min(step_cap, q[i] / -v[i]);
    }
    // A direction made of centering dust means the smooth part is already
    // stationary.  Stepping on it would be catastrophic: 1/sqrt(norm2)
    // explodes and the Armijo threshold c*eta*norm2 drops below evaluation
    // noise, so a garbage step of macroscopic size can be accepted.
    if (gmax <= 1e-12 || !(step_cap > 0.0)) return;

    const double f0 = objective();
    double eta = std::min(step_cap, 1.0 / std::sqrt(norm2));
    std::vector<double> trial(q.size());
    for (int bt = 0; bt < 50; ++bt) {
      for (std::size_t i = 0; i < q.size(); ++i) trial[i] = std::max(0.0, q[i] + eta * v[i]);
      const double ht = entropy(pt);
      std::vector<double> tm(na * nb, 0.0);
      for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t a = 0; a < na; ++a)
          for (std::size_t b = 0; b < nb; ++b) tm[a * nb + b] += trial[qi(t, a, b)];
      const double f1 = ht + entropy(tm) - entropy(trial);
      if (f1 <= f0 - 1e-4 * eta * norm2) {
        q.swap(trial);
        mab.swap(tm);
        return;
      }
      eta *= 0.5;
      if (eta * std::sqrt(norm2) < 1e-16) return;
    }
  }
};

}  // namespace detail

// Minimizes I_q(T:(A,B)) over the pairwise-marginal polytope and extracts the
// four decomposition atoms.  Deterministic for fixed inputs and config.
inline PidSolution solve_pid(const JointDist3& dist, Role target, const SolverConfig& cfg = {}) {
  cfg.validate();
  auto P = detail::BrojaProblem::from(dist, target);

  const std::size_t total_dirs = P.direction_count();
  const bool sampled = total_dirs > detail::kDirectionBudget;

  SolveDiagnostics diag;
  diag.sampled_directions = sampled;
  double f_prev = P.objective();
  diag.objective_history.push_back(f_prev);

  // An objective above this bound proves the optimum has not been reached
  // (SI would extract below zero); see kSiCertSlack.
  const auto bound_src = sources_of(target);
  const double si_zero_bound = mutual_information(dist, target, bound_src[0]) +
                               mutual_information(dist, target, bound_src[1]) +
                               detail::kSiCertSlack;

  // deterministic sampler state for the large-system fallback
  std::uint64_t rng_state = 0x9E3779B97F4A7C15ULL;
  auto next_u64 = [&rng_state] {
    std::uint64_t z = (rng_state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };

  bool converged = false;
  long sweep = 0;
  std::vector<double> q_snapshot;
  // Long-baseline anchor for the secant acceleration: an 8-sweep difference
  // averages the zig-zag out of the direction, so its extrapolation tracks
  // the dominant error mode far better than a single sweep's displacement.
  std::vector<double> q_anchor = P.q;
  int anchor_age = 0;
  for (; sweep < cfg.max_iters && !converged; ++sweep) {
    q_snapshot = P.q;
    P.gradient_step();

    double viol_max = 0.0;
    if (!sampled) {
      for (std::size_t t = 0; t < P.nt; ++t) {
        const auto& R = P.rows[t];
        const auto& C = P.cols[t];
        for (std::size_t i = 0; i + 1 < R.size(); ++i)
          for (std::size_t i2 = i + 1; i2 < R.size(); ++i2)
            for (std::size_t j = 0; j + 1 < C.size(); ++j)
              for (std::size_t j2 = j + 1; j2 < C.size(); ++j2)
                viol_max = std::max(
                    viol_max, P.line_minimize(t, R[i], R[i2], C[j], C[j2], true));
      }
    } else {
      for (std::size_t k = 0; k < detail::kDirectionBudget; ++k) {
        const std::size_t t = next_u64() % P.nt;
        const auto& R = P.rows[t];
        const auto& C = P.cols[t];
        if (R.size() < 2 || C.size() < 2) continue;
        std::size_t i = next_u64() % R.size(), i2 = next_u64() % R.size();
        std::size_t j = next_u64() % C.size(), j2 = next_u64() % C.size();
        if (i == i2 || j == j2) continue;
        viol_max = std::max(
            viol_max, P.line_minimize(t, R[std::min(i, i2)], R[std::max(i, i2)],
                                      C[std::min(j, j2)], C[std::max(j, j2)], true));
      }
    }

    // boundary acceleration: empty any source-pair cell whose death lowers
    // the objective (see try_kill_column); single-slab moves approach such
    // faces only sublinearly
    if (!sampled)
      for (std::size_t a = 0; a < P.na; ++a)
        for (std::size_t b = 0; b < P.nb; ++b)
          if (P.mab[a * P.nb + b] > 0.0) P.try_kill_column(int(a), int(b));
    // re-enter dead columns the optimum wants alive; sampled systems probe a
    // budget of partners per dead column, full systems try them all
    P.joint_refill_scan(true, sampled ? detail::kRefillPartnerBudget : 0,
                        std::uint64_t(sweep) + 1);

    P.refresh_mab();  // kill accumulated float drift once per sweep
    // Stall detection looks at the raw sweep decrease only.  The secant
    // acceleration below can keep harvesting real descent for many sweeps
    // after the cyclic moves are already stationary to within grad_tol, and
    // counting its progress here would postpone convergence indefinitely.
    const double f_raw = P.objective();
    const double decrease = f_prev - f_raw;

    P.extrapolate(q_snapshot);  // ride the sweep's net direction down the valley
    if (++anchor_age >= 8) {
      P.extrapolate(q_anchor);
      q_anchor = P.q;
      anchor_age = 0;
    }
    P.refresh_mab();
    const double f_now = P.objective();
    f_prev = std::min(f_prev, std::min(f_raw, f_now));
    diag.objective_history.push_back(f_prev);
    diag.final_decrease = decrease;

    // The verification pass costs as much as a sweep, so run it only when
    // the certificate can actually be met: while the objective still exceeds
    // the SI-nonnegativity bound, convergence is impossible this sweep.
    if (decrease < cfg.tol_bits && f_now <= si_zero_bound) {
      // verification pass: first-order residual over the direction set,
      // without moving anything
      double res = 0.0;
      if (!sampled) {
        for (std::size_t t = 0; t < P.nt; ++t) {
          const auto& R = P.rows[t];
          const auto& C = P.cols[t];
          for (std::size_t i = 0; i + 1 < R.size(); ++i)
            for (std::size_t i2 = i + 1; i2 < R.size(); ++i2)
              for (std::size_t j = 0; j + 1 < C.size(); ++j)
                for (std::size_t j2 = j + 1; j2 < C.size(); ++j2)
                  res = std::max(res,
                                 P.line_minimize(t, R[i], R[i2], C[j], C[j2], false));
        }
      } else {
        res = viol_max;
      }
      res = std::max(res, P.joint_refill_scan(false));
      diag.grad_residual = res;
      if (res < cfg.grad_tol) converged = true;
    }
  }

  diag.sweeps = sweep;
  diag.converged = converged;
  diag.marginal_residual = P.marginal_residual();

  if (!converged) {
    // the verification pass is skipped while the certificate fails, so the
    // stored residual can be stale; measure it once for an honest report
    if (!sampled) {
      double res = 0.0;
      for (std::size_t t = 0; t < P.nt; ++t) {
        const auto& R = P.rows[t];
        const auto& C = P.cols[t];
        for (std::size_t i = 0; i + 1 < R.size(); ++i)
          for (std::size_t i2 = i + 1; i2 < R.size(); ++i2)
            for (std::size_t j = 0; j + 1 < C.size(); ++j)
              for (std::size_t j2 = j + 1; j2 < C.size(); ++j2)
                res = std::max(res, P.line_minimize(t, R[i], R[i2], C[j], C[j2], false));
      }
      diag.grad_residual = std::max(res, P.joint_refill_scan(false));
    }
    std::string msg = "solve_pid: no convergence within " + std::to_string(cfg.max_iters) +
                      " sweeps (last decrease " + std::to_string(diag.final_decrease) +
                      " bits, stationarity residual " + std::to_string(diag.grad_residual) +
                      " bits";
    if (f_prev > si_zero_bound)
      msg += "; objective exceeds the SI-nonnegativity bound by " +
             std::to_string(f_prev - si_zero_bound) + " bits";
    throw SolverFailure(msg + ")", f_prev, diag.grad_residual * 2.0);
  }
  if (diag.marginal_residual > cfg.marginal_tol)
    throw ConsistencyError("solve_pid: result violates the pairwise marginals by " +
                           std::to_string(diag.marginal_residual));

  // assemble the optimizer back into (X, Y, Z) layout
  std::vector<double> probs(dist.cells(), 0.0);
  std::array<std::size_t, 3> idx{};
  for (std::size_t ix = 0; ix < dist.nx(); ++ix)
    for (std::size_t iy = 0; iy < dist.ny(); ++iy)
      for (std::size_t iz = 0; iz < dist.nz(); ++iz) {
        idx[0] = ix; idx[1] = iy; idx[2] = iz;
        probs[dist.index(ix, iy, iz)] =
            P.q[P.qi(idx[int(P.target)], idx[int(P.role_a)], idx[int(P.role_b)])];
      }
  JointDist3 qdist(dist.alphabet(Role::X), dist.alphabet(Role::Y), dist.alphabet(Role::Z),
                   std::move(probs));

  const auto src = sources_of(target);
  const VarSet pair{src[0], src[1]};
  const double objective = mutual_information(qdist, target, pair);
  const double ip_joint = mutual_information(dist, target, pair);
  const double ip_a = mutual_information(dist, target, src[0]);

  PidAtoms atoms;
  atoms.target = target;
  const double tol = 1e-9;
  atoms.ui_a = detail::clamp_information(
      conditional_mutual_information(qdist, target, src[0], src[1]), tol, "UI via first source");
  atoms.ui_b = detail::clamp_information(
      conditional_mutual_information(qdist, target, src[1], src[0]), tol, "UI via second source");
  atoms.si = detail::clamp_information(ip_a - atoms.ui_a, tol, "shared information");
  atoms.ci = detail::clamp_information(ip_joint - objective, tol, "synergistic information");

  return PidSolution{atoms, PolytopePoint{std::move(qdist), objective}, std::move(diag)};
}

// Independent check of solve_pid for very small problems: a nested
// full-factorial grid scan over the free coordinates of the polytope.
// The free dimension per target slab is (rows-1)*(cols-1); the total must
// not exceed 4 (binary systems have 2).
inline PidAtoms brute_force_pid(const JointDist3& dist, Role target, double resolution = 1e-4) {
  if (!(resolution > 0.0)) throw std::invalid_argument("brute_force_pid: resolution must be > 0");
  auto P = detail::BrojaProblem::from(dist, target);

  // enumerate basis directions: pivot on each slab's first active row/column
  struct Basis {
    std::size_t c_free, c_row, c_col, c_piv;  // cell indices: +, -, -, +
  };
  std::vector<Basis> basis;
  for (std::size_t t = 0; t < P.nt; ++t) {
    const auto& R = P.rows[t];
    const auto& C = P.cols[t];
    for (std::size_t i = 1; i < R.size(); ++i)
      for (std::size_t j = 1; j < C.size(); ++j)
        basis.push_back({P.qi(t, R[i], C[j]), P.qi(t, R[i], C[0]), P.qi(t, R[0], C[j]),
                         P.qi(t, R[0], C[0])});
  }
  const std::size_t D = basis.size();
  if (D > 4)
    throw std::invalid_argument("brute_force_pid: polytope has " + std::to_string(D) +
                                " free dimensions; the grid scan handles at most 4");

  const std::vector<double> p0 = P.q;  // theta = 0 is the input point, always feasible
  std::vector<double> qbuf(P.q.size());
  auto assemble = [&](const std::vector<double>& theta) -> bool {
    qbuf = p0;
    for (std::size_t k = 0; k < D; ++k) {
      const double th = theta[k];
      qbuf[basis[k].c_free] += th;
      qbuf[basis[k].c_row] -= th;
      qbuf[basis[k].c_col] -= th;
      qbuf[basis[k].c_piv] += th;
    }
    for (double v : qbuf)
      if (v < -1e-12) return false;
    return true;
  };
  // objective along an independent code path (plain log-sums over the buffer)
  auto eval = [&]() {
    std::vector<double> m(P.na * P.nb, 0.0);
    for (std::size_t t = 0; t < P.nt; ++t)
      for (std::size_t a = 0; a < P.na; ++a)
        for (std::size_t b = 0; b < P.nb; ++b) m[a * P.nb + b] += qbuf[P.qi(t, a, b)];
    double ht = 0.0, hm = 0.0, hq = 0.0;
    for (double v : P.pt)
      if (v > 0) ht -= v * std::log2(v);
    for (double v : m)
      if (v > 0) hm -= v * std::log2(v);
    for (double v : qbuf)
      if (v > 0) hq -= v * std::log2(v);
    return ht + hm - hq;
  };

  std::vector<double> best_theta(D, 0.0), theta(D, 0.0), center(D, 0.0);
  assemble(best_theta);
  double best_f = eval();
  std::vector<double> best_q = qbuf;

  if (D > 0) {
    const int K = D <= 2 ? 41 : 13;
    double w = 1.0;
    while (w > resolution * 0.25) {
      std::vector<int> ticks(D, 0);
      bool carry = false;
      while (!carry) {
        for (std::size_t k = 0; k < D; ++k)
          theta[k] = center[k] + w * (2.0 * ticks[k] / double(K - 1) - 1.0);
        if (assemble(theta)) {
          const double f = eval();
          if (f < best_f) {
            best_f = f;
            best_theta = theta;
            best_q = qbuf;
          }
        }
        std::size_t k = 0;
        for (; k < D; ++k) {
          if (++ticks[k] < K) break;
          ticks[k] = 0;
        }
        carry = (k == D);
      }
      center = best_theta;
      // Halve the span rather than dividing by the tick count: when the
      // feasible set is a thin sliver between grid points, the best feasible
      // grid point lags the true optimum, and a fast-shrinking span strands
      // the search around that laggard.  Halving keeps each new span wide
      // enough (about ten previous spacings for K = 41) to re-capture it.
      w *= 0.5;
    }
  }

  // extract atoms with local entropy sums only (independent of dist-core)
  auto h_of = [](const std::vector<double>& v) {
    double h = 0.0;
    for (double e : v)
      if (e > 0) h -= e * std::log2(e);
    return h;
  };
  std::vector<double> m(P.na * P.nb, 0.0), mb(P.nb, 0.0), ma(P.na, 0.0), qa(P.nt * P.na, 0.0),
      qb(P.nt * P.nb, 0.0);
  for (std::size_t t = 0; t < P.nt; ++t)
    for (std::size_t a = 0; a < P.na; ++a)
      for (std::size_t b = 0; b < P.nb; ++b) {
        const double v = best_q[P.qi(t, a, b)];
        m[a * P.nb + b] += v;
        qa[t * P.na + a] += v;
        qb[t * P.nb + b] += v;
      }
  for (std::size_t a = 0; a < P.na; ++a)
    for (std::size_t b = 0; b < P.nb; ++b) {
      ma[a] += m[a * P.nb + b];
      mb[b] += m[a * P.nb + b];
    }
  const double h_t = h_of(P.pt), h_q = h_of(best_q), h_m = h_of(m);
  const double f_star = h_t + h_m - h_q;
  // UI via A = I_q(T:A|B) = H(T,B) + H(A,B) - H(B) - H(T,A,B)
  const double ui_a = h_of(qb) + h_m - h_of(mb) - h_q;
  const double ui_b = h_of(qa) + h_m - h_of(ma) - h_q;

  // p-side informations from the fixed marginals / input table
  std::vector<double> pa = ma, pb = mb;  // source marginals are preserved
  const double ip_a = h_t + h_of(pa) - h_of(P.mta);
  const double ip_b = h_t + h_of(pb) - h_of(P.mtb);
  std::vector<double> pm(P.na * P.nb, 0.0);
  for (std::size_t t = 0; t < P.nt; ++t)
    for (std::size_t a = 0; a < P.na; ++a)
      for (std::size_t b = 0; b < P.nb; ++b) pm[a * P.nb + b] += p0[P.qi(t, a, b)];
  const double ip_joint = h_t + h_of(pm) - h_of(p0);

  PidAtoms atoms;
  atoms.target = target;
  atoms.ui_a = std::max(0.0, ui_a);
  atoms.ui_b = std::max(0.0, ui_b);
  atoms.si = std::max(0.0, ip_a - atoms.ui_a);
  atoms.ci = std::max(0.0, ip_joint - f_star);
  (void)ip_b;
  return atoms;
}

}  // namespace pidtri
