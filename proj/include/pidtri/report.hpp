#pragma once

// Assembly and rendering of the full analysis report emitted by the
// command-line driver: the six Shannon mutual informations plus
// co-information, all three PID lattices, the minimal set of seven subatoms,
// the per-target redundancy splits, the nonnegative joint-entropy
// decomposition, and solver diagnostics.
//
// Every reconstruction identity is re-verified here against independently
// computed Shannon quantities before a report can be rendered; a violation
// raises ConsistencyError and nothing is emitted.

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pidtri/broja.hpp"
#include "pidtri/dist.hpp"
#include "pidtri/subatoms.hpp"

namespace pidtri {

struct Report {
  std::string input;  // human-readable descriptor of where the table came from
  std::vector<std::pair<std::string, double>> shannon;  // six MIs + co-information
  ThreePids pids;
  MinimalSet mset;
  std::array<RedundancySplit, 3> splits;  // indexed by target role
  EntropyDecomposition entropy;
  std::array<SolveDiagnostics, 3> diagnostics;  // indexed by target role
};

namespace detail {

// Rounds to `digits` significant decimal digits via a decimal text
// round-trip, so emitted numbers are reproducible across platforms.
inline double round_sig(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

inline std::string fmt_sig(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace detail

// Builds the report and re-verifies every identity that ties its parts
// together.  three_pids / minimal_set / entropy_decomposition already refuse
// internally inconsistent results; the checks here additionally pin the
// solver's atoms to Shannon quantities computed straight from the input.
inline Report make_report(const JointDist3& dist, std::string descriptor,
                          const SolverConfig& cfg = {}) {
  Report r;
  r.input = std::move(descriptor);

  const double ixy = mutual_information(dist, Role::X, Role::Y);
  const double ixz = mutual_information(dist, Role::X, Role::Z);
  const double iyz = mutual_information(dist, Role::Y, Role::Z);
  const double ix_rest = mutual_information(dist, Role::X, VarSet{Role::Y, Role::Z});
  const double iy_rest = mutual_information(dist, Role::Y, VarSet{Role::X, Role::Z});
  const double iz_rest = mutual_information(dist, Role::Z, VarSet{Role::X, Role::Y});
  r.shannon = {{"I(X:Y)", ixy},           {"I(X:Z)", ixz},          {"I(Y:Z)", iyz},
               {"I(X:(Y,Z))", ix_rest},   {"I(Y:(X,Z))", iy_rest},  {"I(Z:(X,Y))", iz_rest},
               {"coI(X;Y;Z)", co_information(dist)}};

  r.pids = three_pids(dist, cfg, &r.diagnostics);
  r.mset = minimal_set(r.pids);
  for (Role t : kAllRoles) r.splits[static_cast<int>(t)] = source_redundancy(r.pids, t);
  r.entropy = entropy_decomposition(dist, r.mset);

  // Lattice consistency against the Shannon quantities (tolerance 1e-6 bits):
  // each lattice's four atoms must sum to the target's joint mutual
  // information, and SI + UI(source) must give back the pairwise one.
  const double joint_mi[3] = {ix_rest, iy_rest, iz_rest};
  for (Role t : kAllRoles) {
    const int k = static_cast<int>(t);
    const PidAtoms& a = r.pids.of(t);
    const auto src = sources_of(t);
    auto fail = [&](const std::string& what, double residual) {
      throw ConsistencyError("report: target " + std::string(role_name(t)) + ": " + what +
                             " residual " + std::to_string(residual) + " bits exceeds 1e-6");
    };
    if (std::abs(a.total() - joint_mi[k]) > 1e-6)
      fail("atoms do not sum to the joint mutual information",
           std::abs(a.total() - joint_mi[k]));
    const double i_ta = mutual_information(dist, t, src[0]);
    const double i_tb = mutual_information(dist, t, src[1]);
    if (std::abs(a.si + a.ui_a - i_ta) > 1e-6)
      fail("SI + UI does not give back the first pairwise information",
           std::abs(a.si + a.ui_a - i_ta));
    if (std::abs(a.si + a.ui_b - i_tb) > 1e-6)
      fail("SI + UI does not give back the second pairwise information",
           std::abs(a.si + a.ui_b - i_tb));
    if (std::abs((a.si - a.ci) - r.pids.co_information) > 1e-9)
      fail("SI - CI does not equal the co-information",
           std::abs((a.si - a.ci) - r.pids.co_information));
    const RedundancySplit& s = r.splits[k];
    if (s.nsr < -1e-12 || s.sr < -1e-12 || std::abs(s.sr + s.nsr - a.si) > 1e-12)
      fail("redundancy split does not partition SI", std::abs(s.sr + s.nsr - a.si));
  }
  return r;
}

// --- JSON rendering -----------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json pid_json(const PidAtoms& a, int digits) {
  const auto src = sources_of(a.target);
  nlohmann::ordered_json j;
  j["si"] = round_sig(a.si, digits);
  j[std::string("ui_") + role_name(src[0])] = round_sig(a.ui_a, digits);
  j[std::string("ui_") + role_name(src[1])] = round_sig(a.ui_b, digits);
  j["ci"] = round_sig(a.ci, digits);
  return j;
}

inline nlohmann::ordered_json irsi_json(const IrsiBlock& b, int digits) {
  nlohmann::ordered_json j;
  j["value"] = round_sig(b.value, digits);
  j["head"] = role_name(b.head);
  j["tail"] = role_name(b.tail);
  j["middle"] = role_name(b.middle);
  return j;
}

}  // namespace detail

// `targets` filters the per-lattice blocks (minimal set and entropy are
// target-invariant and always present).
inline nlohmann::ordered_json render_report_json(const Report& r, int digits,
                                                 const std::vector<Role>& targets = {
                                                     Role::X, Role::Y, Role::Z}) {
  using detail::round_sig;
  nlohmann::ordered_json j;
  j["input"] = r.input;

  auto& sh = j["shannon"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : r.shannon) sh[name] = round_sig(value, digits);

  auto& pid = j["pid"] = nlohmann::ordered_json::object();
  for (Role t : targets) pid[role_name(t)] = detail::pid_json(r.pids.of(t), digits);

  auto& ms = j["minimal_set"] = nlohmann::ordered_json::object();
  ms["ordering"] = {role_name(r.mset.ordering[0]), role_name(r.mset.ordering[1]),
                    role_name(r.mset.ordering[2])};
  ms["rsi"] = round_sig(r.mset.rsi, digits);
  ms["rci"] = round_sig(r.mset.rci, digits);
  for (Role c : {Role::Z, Role::Y, Role::X}) {  // pairs in xy, xz, yz order
    const auto pair = sources_of(c);
    ms[rui_label(pair[0], pair[1])] = round_sig(r.mset.rui(pair[0], pair[1]), digits);
  }
  ms["irsi_first"] = detail::irsi_json(r.mset.irsi_first, digits);
  ms["irsi_second"] = detail::irsi_json(r.mset.irsi_second, digits);

  auto& sp = j["redundancy_split"] = nlohmann::ordered_json::object();
  for (Role t : targets) {
    const RedundancySplit& s = r.splits[static_cast<int>(t)];
    sp[role_name(t)] = {{"sr", round_sig(s.sr, digits)}, {"nsr", round_sig(s.nsr, digits)}};
  }

  auto& en = j["entropy"] = nlohmann::ordered_json::object();
  en["total"] = round_sig(r.entropy.total, digits);
  for (Role t : kAllRoles)
    en[std::string("h_") + role_name(t) + "_given_rest"] =
        round_sig(r.entropy.h1_terms[static_cast<int>(t)], digits);
  en["dtc"] = round_sig(r.entropy.dtc, digits);
  en["coefficients"] = r.entropy.coefficients;

  auto& di = j["diagnostics"] = nlohmann::ordered_json::object();
  for (Role t : targets) {
    const SolveDiagnostics& d = r.diagnostics[static_cast<int>(t)];
    di[role_name(t)] = {{"sweeps", d.sweeps},
                        {"converged", d.converged},
                        {"stationarity_residual", round_sig(d.grad_residual, digits)},
                        {"marginal_residual", round_sig(d.marginal_residual, digits)}};
  }
  return j;
}

// --- aligned text rendering ------------------------------------------------------

inline std::string render_report_table(const Report& r, int digits,
                                       const std::vector<Role>& targets = {Role::X, Role::Y,
                                                                           Role::Z}) {
  using detail::fmt_sig;
  std::string out;
  auto line = [&](const std::string& label, const std::string& value) {
    out += "  ";
    out += label;
    out.append(label.size() < 26 ? 26 - label.size() : 1, ' ');
    out += value;
    out += '\n';
  };
  auto numline = [&](const std::string& label, double v) { line(label, fmt_sig(v, digits)); };

  out += "input: " + r.input + "\n\nshannon quantities [bits]\n";
  for (const auto& [name, value] : r.shannon) numline(name, value);

  out += "\npartial information decompositions [bits]\n";
  for (Role t : targets) {
    const PidAtoms& a = r.pids.of(t);
    const auto src = sources_of(t);
    out += std::string("  target ") + role_name(t) + "\n";
    numline(std::string("  si"), a.si);
    numline(std::string("  ui_") + role_name(src[0]), a.ui_a);
    numline(std::string("  ui_") + role_name(src[1]), a.ui_b);
    numline(std::string("  ci"), a.ci);
  }

  out += "\nminimal set of subatoms [bits]\n";
  line("ordering (SI ascending)", std::string(role_name(r.mset.ordering[0])) + " " +
                                      role_name(r.mset.ordering[1]) + " " +
                                      role_name(r.mset.ordering[2]));
  numline("rsi", r.mset.rsi);
  numline("rci", r.mset.rci);
  for (Role c : {Role::Z, Role::Y, Role::X}) {  // pairs in xy, xz, yz order
    const auto pair = sources_of(c);
    numline(rui_label(pair[0], pair[1]), r.mset.rui(pair[0], pair[1]));
  }
  numline("irsi_first", r.mset.irsi_first.value);
  numline("irsi_second", r.mset.irsi_second.value);

  out += "\nredundancy split [bits]\n";
  for (Role t : targets) {
    const RedundancySplit& s = r.splits[static_cast<int>(t)];
    numline(std::string("sr(") + role_name(t) + ")", s.sr);
    numline(std::string("nsr(") + role_name(t) + ")", s.nsr);
  }

  out += "\njoint entropy decomposition [bits]\n";
  numline("H(X,Y,Z)", r.entropy.total);
  for (Role t : kAllRoles)
    numline(std::string("H(") + role_name(t) + "|rest)",
            r.entropy.h1_terms[static_cast<int>(t)]);
  numline("dual total correlation", r.entropy.dtc);
  {
    std::string co;
    for (const auto& [label, coeff] : r.entropy.coefficients)
      co += (co.empty() ? "" : " + ") + std::to_string(coeff) + "*" + label;
    line("dtc expansion", co);
  }

  out += "\nsolver diagnostics\n";
  for (Role t : targets) {
    const SolveDiagnostics& d = r.diagnostics[static_cast<int>(t)];
    line(std::string("target ") + role_name(t),
         std::to_string(d.sweeps) + " sweeps, stationarity " + fmt_sig(d.grad_residual, 3) +
             ", marginals " + fmt_sig(d.marginal_residual, 3));
  }
  return out;
}

}  // namespace pidtri
