// Cross-lattice analysis of the three partial information decompositions.
//
// Rotating the target through X, Y, Z yields three PID lattices for the same
// distribution.  Their atoms are tied together by structural identities:
// for each pair of variables {A,B} with third C,
//
//   SI(A:{B;C}) + UI(A:{B\C}) = I(A:B) = SI(B:{A;C}) + UI(B:{A\C}),
//
// and every lattice satisfies SI - CI = coI(X;Y;Z).  Sorting the targets by
// their shared information exposes a minimal set of seven nonnegative
// subatoms -- one reversible shared information (rsi), one reversible
// complementary information (rci), three reversible unique informations
// (rui, one per variable pair), and two irreversibility increments
// (irsi_first, irsi_second) -- from which all twelve atoms of the three
// lattices are reconstructed by plain sums.  The same seven values weight a
// nonnegative decomposition of the joint entropy, and redundancy splits into
// a source-correlation part and a non-source part.
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pidtri/broja.hpp"
#include "pidtri/dist.hpp"

namespace pidtri {

// The three PID lattices of one distribution, one per choice of target.
// Synergies are recomputed from the shared co-information (ci = si - coI)
// so that the redundancy ordering and the synergy ordering of the targets
// agree exactly instead of up to three independent solver tolerances.
struct ThreePids {
  std::array<PidAtoms, 3> by_target{};  // indexed by role
  double co_information = 0.0;          // I(A:B) - I(A:B|C), target-invariant

  const PidAtoms& of(Role t) const { return by_target[static_cast<int>(t)]; }
};

inline ThreePids three_pids(const JointDist3& dist, const SolverConfig& cfg = {},
                            std::array<SolveDiagnostics, 3>* diagnostics = nullptr) {
  ThreePids out;
  out.co_information = co_information(dist);
  for (Role t : kAllRoles) {
    PidAtoms atoms;
    try {
      PidSolution sol = solve_pid(dist, t, cfg);
      if (diagnostics) (*diagnostics)[static_cast<int>(t)] = sol.diagnostics;
      atoms = sol.atoms;
    } catch (const SolverFailure& e) {
      throw SolverFailure(std::string("three_pids: target ") + role_name(t) + ": " + e.what(),
                          e.best_objective(), e.gap_estimate());
    }
    atoms.ci = detail::clamp_information(atoms.si - out.co_information, 1e-9,
                                         "synergy from co-information");
    out.by_target[static_cast<int>(t)] = atoms;
  }
  return out;
}

// One irreversibility increment: the amount of shared (equivalently,
// complementary) information specific to the head's lattice relative to the
// tail's, with the remaining variable in the middle.
struct IrsiBlock {
  Role head = Role::X;
  Role tail = Role::Y;
  Role middle = Role::Z;
  double value = 0.0;
};

// The minimal set of seven subatoms together with the target ordering that
// defines it.  `ordering` sorts the roles by shared information ascending,
// ties broken by the fixed role order X < Y < Z.
struct MinimalSet {
  std::array<Role, 3> ordering{Role::X, Role::Y, Role::Z};
  double rsi = 0.0;  // smallest shared information across the lattices
  double rci = 0.0;  // smallest complementary information
  std::array<double, 3> rui_by_middle{};  // pair {a,b} stored under the absent role
  IrsiBlock irsi_first;   // head t2, tail t1, middle t3
  IrsiBlock irsi_second;  // head t3, tail t2, middle t1

  // Reversible unique information of the unordered pair {a,b}.
  double rui(Role a, Role b) const {
    if (a == b) throw std::invalid_argument("MinimalSet::rui: roles must differ");
    return rui_by_middle[3 - static_cast<int>(a) - static_cast<int>(b)];
  }

  // Position of a role in the redundancy ordering (0 = smallest SI).
  int position(Role r) const {
    for (int k = 0; k < 3; ++k)
      if (ordering[k] == r) return k;
    throw std::logic_error("MinimalSet::position: corrupt ordering");
  }

  // Cumulative-sum reconstruction of one lattice's four atoms: SI and CI
  // grow by the increments along the ordering, and each unique information
  // is the pair's rui plus the shared-information gap the pair spans.
  PidAtoms reconstruct(Role target) const {
    auto si_at = [this](int k) {
      return rsi + (k >= 1 ? irsi_first.value : 0.0) + (k >= 2 ? irsi_second.value : 0.0);
    };
    auto ci_at = [this](int k) {
      return rci + (k >= 1 ? irsi_first.value : 0.0) + (k >= 2 ? irsi_second.value : 0.0);
    };
    const int kt = position(target);
    PidAtoms a;
    a.target = target;
    a.si = si_at(kt);
    a.ci = ci_at(kt);
    const auto src = sources_of(target);
    auto ui_of = [&](Role s) {
      return rui(target, s) + std::max(0.0, si_at(position(s)) - si_at(kt));
    };
    a.ui_a = ui_of(src[0]);
    a.ui_b = ui_of(src[1]);
    return a;
  }
};

inline MinimalSet minimal_set(const ThreePids& pids) {
  std::array<Role, 3> ord = {Role::X, Role::Y, Role::Z};
  std::stable_sort(ord.begin(), ord.end(),
                   [&](Role a, Role b) { return pids.of(a).si < pids.of(b).si; });
  const PidAtoms& a1 = pids.of(ord[0]);
  const PidAtoms& a2 = pids.of(ord[1]);
  const PidAtoms& a3 = pids.of(ord[2]);

  auto clamp = [](double v, const char* what) {
    return detail::clamp_information(v, 1e-9, what);
  };

  MinimalSet m;
  m.ordering = ord;
  m.rsi = clamp(a1.si, "rsi");
  m.rci = clamp(a1.ci, "rci");
  m.irsi_first = {ord[1], ord[0], ord[2], clamp(a2.si - a1.si, "irsi_first")};
  m.irsi_second = {ord[2], ord[1], ord[0], clamp(a3.si - a2.si, "irsi_second")};
  for (Role c : kAllRoles) {
    const auto pair = sources_of(c);  // the two roles other than c
    const double u1 = pids.of(pair[0]).ui(pair[1]);
    const double u2 = pids.of(pair[1]).ui(pair[0]);
    m.rui_by_middle[static_cast<int>(c)] = clamp(std::min(u1, u2), "rui");
  }

  // The cumulative sums must give back every atom of every lattice; a larger
  // residual means the inputs were not three decompositions of one system.
  double residual = 0.0;
  for (Role t : kAllRoles) {
    const PidAtoms rec = m.reconstruct(t);
    const PidAtoms& ref = pids.of(t);
    residual = std::max({residual, std::abs(rec.si - ref.si), std::abs(rec.ci - ref.ci),
                         std::abs(rec.ui_a - ref.ui_a), std::abs(rec.ui_b - ref.ui_b)});
  }
  if (residual > 1e-6)
    throw ConsistencyError("minimal_set: atom reconstruction residual " +
                           std::to_string(residual) + " bits exceeds 1e-6");
  return m;
}

// Shared information established between a and b regardless of which is the
// target: the smaller of the two lattices' SI values.  Symmetric.
inline double rsi_between(const ThreePids& pids, Role a, Role b) {
  if (a == b) throw std::invalid_argument("rsi_between: roles must differ");
  return std::min(pids.of(a).si, pids.of(b).si);
}

// Synergy analogue of rsi_between: the smaller complementary information.
inline double rci_between(const ThreePids& pids, Role a, Role b) {
  if (a == b) throw std::invalid_argument("rci_between: roles must differ");
  return std::min(pids.of(a).ci, pids.of(b).ci);
}

// Shared information specific to the head's lattice relative to the tail's.
// Nonnegative; at least one direction of every pair is zero.
inline double irsi_directed(const ThreePids& pids, Role head, Role tail) {
  if (head == tail) throw std::invalid_argument("irsi_directed: roles must differ");
  return std::max(0.0, pids.of(head).si - pids.of(tail).si);
}

// Redundancy about `target` split into the part forced by the correlation of
// the sources (sr) and the remainder (nsr).
struct RedundancySplit {
  Role target = Role::X;
  double sr = 0.0;
  double nsr = 0.0;
};

inline RedundancySplit source_redundancy(const ThreePids& pids, Role target) {
  const auto src = sources_of(target);
  const double si_t = pids.of(target).si;
  const double sr = std::max(std::min(si_t, pids.of(src[0]).si),
                             std::min(si_t, pids.of(src[1]).si));
  return {target, sr, detail::exact_complement(si_t, sr)};
}

// Label of the pair {a,b} in reports: "rui_xy", "rui_xz", or "rui_yz".
inline std::string rui_label(Role a, Role b) {
  if (a == b) throw std::invalid_argument("rui_label: roles must differ");
  if (static_cast<int>(a) > static_cast<int>(b)) std::swap(a, b);
  return std::string("rui_") + "xyz"[static_cast<int>(a)] + "xyz"[static_cast<int>(b)];
}

// The unique nonnegative decomposition of the joint entropy: three
// single-variable conditional entropies plus the dual total correlation,
// the latter expanded as an integer-weighted sum of the seven subatoms.
struct EntropyDecomposition {
  std::array<double, 3> h1_terms{};  // by role: H(role | other two)
  double dtc = 0.0;                  // total - sum of h1_terms
  double total = 0.0;                // H(X,Y,Z)
  std::map<std::string, int> coefficients;  // subatom label -> weight

  double h1_sum() const { return h1_terms[0] + h1_terms[1] + h1_terms[2]; }
};

inline EntropyDecomposition entropy_decomposition(const JointDist3& dist,
                                                  const MinimalSet& mset) {
  EntropyDecomposition e;
  e.total = entropy(dist, VarSet::all());
  for (Role r : kAllRoles) {
    const auto rest = sources_of(r);
    e.h1_terms[static_cast<int>(r)] =
        conditional_entropy(dist, VarSet{r}, VarSet{rest[0], rest[1]});
  }
  e.dtc = e.total - e.h1_sum();
  e.coefficients = {{"rsi", 1},
                    {"rci", 2},
                    {rui_label(Role::X, Role::Y), 1},
                    {rui_label(Role::X, Role::Z), 1},
                    {rui_label(Role::Y, Role::Z), 1},
                    {"irsi_first", 3},
                    {"irsi_second", 2}};

  // Reconstruction through the coefficient map itself, so a mis-assigned
  // weight is caught for any input with nonzero subatoms.
  auto value_of = [&](const std::string& label) {
    if (label == "rsi") return mset.rsi;
    if (label == "rci") return mset.rci;
    if (label == "irsi_first") return mset.irsi_first.value;
    if (label == "irsi_second") return mset.irsi_second.value;
    for (Role c : kAllRoles) {
      const auto pair = sources_of(c);
      if (label == rui_label(pair[0], pair[1])) return mset.rui(pair[0], pair[1]);
    }
    throw std::logic_error("entropy_decomposition: unknown subatom label " + label);
  };
  double weighted = 0.0;
  for (const auto& [label, coeff] : e.coefficients) weighted += coeff * value_of(label);

  const double residual = std::abs(e.h1_sum() + weighted - e.total);
  if (residual > 1e-6)
    throw ConsistencyError("entropy_decomposition: reconstruction residual " +
                           std::to_string(residual) + " bits exceeds 1e-6");
  return e;
}

// Extending the middle variable can only increase the shared information it
// mediates between the endpoints.  The input is a four-variable table over
// (X, Y, Z, E) with E the extension attached to `middle`; the check compares
// rsi between the endpoints with the plain middle (E marginalized out)
// against the composite middle (middle and E merged into one alphabet).
inline bool verify_monotonicity(const std::vector<double>& p4,
                                const std::array<std::size_t, 4>& dims, Role middle,
                                const SolverConfig& cfg = {}) {
  std::size_t cells = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("verify_monotonicity: empty axis");
    cells *= d;
  }
  if (p4.size() != cells)
    throw std::invalid_argument("verify_monotonicity: table size does not match dims");

  const int mid = static_cast<int>(middle);
  const auto ends = sources_of(middle);  // the two endpoint roles

  // plain system: marginalize the extension away
  std::vector<double> plain(dims[0] * dims[1] * dims[2], 0.0);
  // extended system: merge the middle axis with the extension axis
  std::array<std::size_t, 3> xdims = {dims[0], dims[1], dims[2]};
  xdims[mid] *= dims[3];
  std::vector<double> merged(xdims[0] * xdims[1] * xdims[2], 0.0);

  std::size_t flat = 0;
  for (std::size_t i = 0; i < dims[0]; ++i)
    for (std::size_t j = 0; j < dims[1]; ++j)
      for (std::size_t k = 0; k < dims[2]; ++k)
        for (std::size_t e = 0; e < dims[3]; ++e, ++flat) {
          const double v = p4[flat];
          plain[(i * dims[1] + j) * dims[2] + k] += v;
          std::array<std::size_t, 3> ix = {i, j, k};
          ix[mid] = ix[mid] * dims[3] + e;
          merged[(ix[0] * xdims[1] + ix[1]) * xdims[2] + ix[2]] += v;
        }

  auto rsi_endpoints = [&](const std::vector<double>& p,
                           const std::array<std::size_t, 3>& dd) {
    const JointDist3 d(index_alphabet(dd[0]), index_alphabet(dd[1]), index_alphabet(dd[2]),
                       p);
    return std::min(solve_pid(d, ends[0], cfg).atoms.si, solve_pid(d, ends[1], cfg).atoms.si);
  };

  const double rsi_plain = rsi_endpoints(plain, {dims[0], dims[1], dims[2]});
  const double rsi_extended = rsi_endpoints(merged, xdims);
  return rsi_extended >= rsi_plain - 1e-9;
}

}  // namespace pidtri
