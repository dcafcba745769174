// pidtri -- partial information decompositions of trivariate distributions.
//
// Subcommands:
//   decompose   full report (three PID lattices, minimal set, redundancy
//               split, entropy decomposition) for one distribution
//   sweep       CSV over a parameter grid of a catalog system
//   gaussian    closed-form report for a trivariate Gaussian covariance
//   verify      built-in oracle and identity suites; exit 0 iff all pass
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 computation failure (solver non-convergence or internal inconsistency).
//
// Output is deterministic: identical inputs, flags, and seeds produce
// byte-identical bytes on stdout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pidtri/broja.hpp"
#include "pidtri/catalog.hpp"
#include "pidtri/dist.hpp"
#include "pidtri/gaussian.hpp"
#include "pidtri/io.hpp"
#include "pidtri/report.hpp"
#include "pidtri/subatoms.hpp"

namespace {

using namespace pidtri;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCompute = 3;

struct SolverFlags {
  double tol = -1.0;      // <= 0 means "use the library default"
  long max_iters = -1;
};

SolverConfig to_config(const SolverFlags& f) {
  SolverConfig cfg;
  if (f.tol > 0.0) {
    cfg.tol_bits = f.tol;
    // A loose --tol loosens the stationarity gate as well, so the flag
    // controls the full convergence test instead of only half of it.
    cfg.grad_tol = std::max(f.tol, cfg.grad_tol);
  }
  if (f.max_iters > 0) cfg.max_iters = f.max_iters;
  return cfg;
}

std::vector<Role> parse_targets(const std::string& s) {
  if (s == "all") return {Role::X, Role::Y, Role::Z};
  if (s == "X") return {Role::X};
  if (s == "Y") return {Role::Y};
  if (s == "Z") return {Role::Z};
  throw std::invalid_argument("--target must be X, Y, Z, or all, got \"" + s + "\"");
}

std::string fmt_sig(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// --- decompose ---------------------------------------------------------------------

struct ParamFlags {
  // value + whether the flag appeared, in the canonical parameter order
  std::array<std::pair<std::string, std::string>, 5> raw{};  // name -> text (sweep)
  std::map<std::string, double> scalars;                     // decompose
};

struct DecomposeOpts {
  std::string pmf_path, system_arg, target = "all", format = "json";
  bool normalize = false;
  int precision = 6;
  SolverFlags solver;
  std::map<std::string, double> params;  // only flags that actually appeared
};

bool looks_like_path(const std::string& s) {
  if (s.find('/') != std::string::npos || s.find('.') != std::string::npos) return true;
  std::ifstream probe(s);
  return probe.good();
}

std::string describe_system(const SystemSpec& spec) {
  std::string desc = std::string("system ") + system_kind_name(spec.kind);
  if (!spec.params.empty()) {
    desc += "(";
    bool first = true;
    for (const auto& [k, v] : spec.params) {
      if (!first) desc += ", ";
      first = false;
      desc += k + "=" + fmt_sig(v, 15);
    }
    desc += ")";
  }
  return desc;
}

int run_decompose(const DecomposeOpts& o) {
  if (o.pmf_path.empty() == o.system_arg.empty())
    throw std::invalid_argument("decompose needs exactly one of --pmf or --system");

  JointDist3 dist = [&] {
    if (!o.pmf_path.empty()) {
      if (!o.params.empty())
        throw std::invalid_argument("parameter flags apply to --system, not --pmf");
      return read_pmf_file(o.pmf_path, o.normalize);
    }
    SystemSpec spec;
    if (looks_like_path(o.system_arg)) {
      if (!o.params.empty())
        throw std::invalid_argument(
            "parameter flags cannot be combined with a system-spec file");
      spec = read_system_file(o.system_arg);
    } else {
      spec.kind = system_kind_from_name(o.system_arg);
      spec.params = o.params;
    }
    return make_system(spec);
  }();

  const std::string desc = !o.pmf_path.empty()
                               ? "pmf " + o.pmf_path
                               : (looks_like_path(o.system_arg)
                                      ? "system file " + o.system_arg
                                      : describe_system(SystemSpec{
                                            system_kind_from_name(o.system_arg), o.params, {}}));

  const Report report = make_report(dist, desc, to_config(o.solver));
  const std::vector<Role> targets = parse_targets(o.target);
  if (o.format == "json")
    std::cout << render_report_json(report, o.precision, targets).dump(2) << "\n";
  else
    std::cout << render_report_table(report, o.precision, targets);
  return kExitOk;
}

// --- sweep -------------------------------------------------------------------------

struct SweepOpts {
  std::string system, target = "X";
  int precision = 6;
  SolverFlags solver;
  // parameter text in canonical order; empty string = flag absent
  std::array<std::pair<const char*, std::string>, 5> params{
      {{"lambda", ""}, {"alpha", ""}, {"lambda1", ""}, {"lambda2", ""}, {"lambda3", ""}}};
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != text.size())
    throw std::invalid_argument(what + ": cannot parse number \"" + text + "\"");
  return v;
}

// "value" or "start:stop:step"; endpoints are included when a grid point
// lands within 1e-12 of them.
std::vector<double> parse_axis(const std::string& text, const std::string& name) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else
      cur += c;
  }
  parts.push_back(cur);
  if (parts.size() == 1) return {parse_number(parts[0], "--" + name)};
  if (parts.size() != 3)
    throw std::invalid_argument("--" + name + ": expected \"value\" or \"start:stop:step\", got \"" +
                                text + "\"");
  const double start = parse_number(parts[0], "--" + name + " start");
  const double stop = parse_number(parts[1], "--" + name + " stop");
  const double step = parse_number(parts[2], "--" + name + " step");
  if (!(step > 0.0)) throw std::invalid_argument("--" + name + ": step must be positive");
  if (stop < start - 1e-12)
    throw std::invalid_argument("--" + name + ": stop lies before start");
  std::vector<double> pts;
  for (long k = 0;; ++k) {
    double v = start + double(k) * step;
    if (v > stop + 1e-12) break;
    if (std::abs(v - stop) <= 1e-12) v = stop;  // hit the endpoint exactly
    pts.push_back(v);
    if (v == stop) break;
  }
  if (pts.empty()) throw std::invalid_argument("--" + name + ": empty grid");
  return pts;
}

int run_sweep(const SweepOpts& o) {
  if (o.system.empty()) throw std::invalid_argument("sweep requires --system KIND");
  const SystemKind kind = system_kind_from_name(o.system);
  const std::vector<Role> tsel = parse_targets(o.target);
  if (tsel.size() != 1)
    throw std::invalid_argument("sweep reports one target per run; --target all is not valid");
  const Role target = tsel[0];
  const auto src = sources_of(target);

  struct Axis {
    std::string name;
    std::vector<double> values;
  };
  std::vector<Axis> axes;
  for (const auto& [name, text] : o.params)
    if (!text.empty()) axes.push_back({name, parse_axis(text, name)});
  if (axes.empty())
    throw std::invalid_argument("sweep needs at least one parameter flag (e.g. --lambda 0:1:0.05)");

  // header: parameter columns in canonical order, then the fixed column set
  std::string header;
  for (const Axis& a : axes) header += a.name + ",";
  header +=
      "si,sr,nsr,ci,rsi,rci,rui_xy,rui_xz,rui_yz,irsi_first,irsi_second,i_sources";
  std::cout << header << "\n";

  const SolverConfig cfg = to_config(o.solver);
  std::vector<std::size_t> tick(axes.size(), 0);
  while (true) {
    SystemSpec spec;
    spec.kind = kind;
    std::string at;  // parameter context for error messages
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double v = axes[k].values[tick[k]];
      spec.params[axes[k].name] = v;
      at += (at.empty() ? "" : ", ") + axes[k].name + "=" + fmt_sig(v, 15);
    }
    try {
      const JointDist3 dist = make_system(spec);
      const ThreePids pids = three_pids(dist, cfg);
      const MinimalSet mset = minimal_set(pids);
      const RedundancySplit split = source_redundancy(pids, target);
      const PidAtoms& atoms = pids.of(target);
      const double i_sources = mutual_information(dist, src[0], src[1]);

      std::string row;
      for (std::size_t k = 0; k < axes.size(); ++k)
        row += fmt_sig(axes[k].values[tick[k]], o.precision) + ",";
      for (double v : {atoms.si, split.sr, split.nsr, atoms.ci, mset.rsi, mset.rci,
                       mset.rui(Role::X, Role::Y), mset.rui(Role::X, Role::Z),
                       mset.rui(Role::Y, Role::Z), mset.irsi_first.value,
                       mset.irsi_second.value, i_sources})
        row += fmt_sig(v, o.precision) + ",";
      row.pop_back();
      std::cout << row << "\n";
    } catch (const SolverFailure& e) {
      throw SolverFailure("sweep at " + at + ": " + e.what(), e.best_objective(),
                          e.gap_estimate());
    } catch (const ConsistencyError& e) {
      throw ConsistencyError("sweep at " + at + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sweep at " + at + ": " + e.what());
    }

    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++tick[k] < axes[k].values.size()) break;
      tick[k] = 0;
      if (k == 0) return kExitOk;  // odometer wrapped: grid exhausted
    }
  }
}

// --- gaussian ----------------------------------------------------------------------

struct GaussianOpts {
  std::string cov_path, target = "all", format = "json";
  int precision = 6;
};

int run_gaussian(const GaussianOpts& o) {
  if (o.cov_path.empty()) throw std::invalid_argument("gaussian requires --cov FILE");
  const GaussianCov g = read_cov_file(o.cov_path);
  const GaussianMis mis = gaussian_mutual_informations(g);
  const std::vector<Role> targets = parse_targets(o.target);

  // Identity check before emission: the four closed-form atoms must sum to
  // the joint mutual information, and sr + nsr must partition SI.
  std::array<PidAtoms, 3> atoms;
  std::array<RedundancySplit, 3> splits;
  for (Role t : kAllRoles) {
    const int k = static_cast<int>(t);
    atoms[k] = gaussian_pid(g, t);
    splits[k] = gaussian_sr_nsr(g, t);
    if (std::abs(atoms[k].total() - mis.joint_sources(t)) > 1e-9)
      throw ConsistencyError(std::string("gaussian report: target ") + role_name(t) +
                             ": atoms do not sum to the joint mutual information");
    if (std::abs(splits[k].sr + splits[k].nsr - atoms[k].si) > 1e-12 || splits[k].nsr < 0.0)
      throw ConsistencyError(std::string("gaussian report: target ") + role_name(t) +
                             ": redundancy split does not partition SI");
  }

  const std::vector<std::pair<std::string, double>> shannon = {
      {"I(X:Y)", mis.between(Role::X, Role::Y)},
      {"I(X:Z)", mis.between(Role::X, Role::Z)},
      {"I(Y:Z)", mis.between(Role::Y, Role::Z)},
      {"I(X:(Y,Z))", mis.joint_sources(Role::X)},
      {"I(Y:(X,Z))", mis.joint_sources(Role::Y)},
      {"I(Z:(X,Y))", mis.joint_sources(Role::Z)}};

  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["input"] = "cov " + o.cov_path;
    auto& sh = j["shannon"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : shannon) sh[name] = detail::round_sig(value, o.precision);
    auto& pid = j["pid"] = nlohmann::ordered_json::object();
    auto& sp = j["redundancy_split"] = nlohmann::ordered_json::object();
    for (Role t : targets) {
      const int k = static_cast<int>(t);
      pid[role_name(t)] = detail::pid_json(atoms[k], o.precision);
      sp[role_name(t)] = {{"sr", detail::round_sig(splits[k].sr, o.precision)},
                          {"nsr", detail::round_sig(splits[k].nsr, o.precision)}};
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::string out = "input: cov " + o.cov_path + "\n\nshannon quantities [bits]\n";
    auto line = [&](const std::string& label, double v) {
      out += "  " + label;
      out.append(label.size() < 26 ? 26 - label.size() : 1, ' ');
      out += fmt_sig(v, o.precision) + "\n";
    };
    for (const auto& [name, value] : shannon) line(name, value);
    out += "\nclosed-form decomposition [bits]\n";
    for (Role t : targets) {
      const int k = static_cast<int>(t);
      const auto s = sources_of(t);
      out += std::string("  target ") + role_name(t) + "\n";
      line(std::string("  si"), atoms[k].si);
      line(std::string("  ui_") + role_name(s[0]), atoms[k].ui_a);
      line(std::string("  ui_") + role_name(s[1]), atoms[k].ui_b);
      line(std::string("  ci"), atoms[k].ci);
      line(std::string("  sr"), splits[k].sr);
      line(std::string("  nsr"), splits[k].nsr);
    }
    std::cout << out;
  }
  return kExitOk;
}

// --- verify ------------------------------------------------------------------------

struct VerifyOpts {
  std::uint64_t seed = 1;
  int random = 20;
  SolverFlags solver;
};

// Free dimension count of the optimization polytope for this target; the
// grid oracle handles at most 4.
std::size_t polytope_dims(const JointDist3& d, Role target) {
  const auto src = sources_of(target);
  return d.size(target) * (d.size(src[0]) - 1) * (d.size(src[1]) - 1);
}

int run_verify(const VerifyOpts& o) {
  const SolverConfig cfg = to_config(o.solver);
  int failures = 0, printed = 0;
  auto fail_case = [&](const std::string& what, const JointDist3* dist) {
    ++failures;
    if (printed < 5) {
      ++printed;
      std::cout << "FAIL  " << what << "\n";
      if (dist) {
        std::cout << "      failing distribution for replay:\n";
        std::ostringstream tsv;
        write_pmf_tsv(tsv, *dist);
        std::istringstream lines(tsv.str());
        for (std::string l; std::getline(lines, l);) std::cout << "      " << l << "\n";
      }
    }
  };

  // Suite 1: solver against the independent grid oracle, on the binary
  // catalog systems and seeded random tables, every target with <= 4 free
  // polytope dimensions.
  double worst_dev = 0.0;
  int comparisons = 0;
  {
    std::vector<std::pair<std::string, JointDist3>> cases;
    cases.emplace_back("xor", make_xor());
    for (double l : {0.0, 0.5, 1.0})
      cases.emplace_back("and(lambda=" + fmt_sig(l, 3) + ")", make_and(l));
    for (double l : {0.0, 0.5, 1.0})
      cases.emplace_back("copy(lambda=" + fmt_sig(l, 3) + ")", make_copy(l));
    DetRng rng(o.seed);
    for (int i = 0; i < o.random; ++i)
      cases.emplace_back("random 2x2x2 #" + std::to_string(i), random_dist(rng, 2, 2, 2));

    for (const auto& [name, dist] : cases) {
      for (Role t : kAllRoles) {
        if (polytope_dims(dist, t) > 4) continue;
        const std::string ctx = name + ", target " + role_name(t);
        try {
          const PidAtoms fast = solve_pid(dist, t, cfg).atoms;
          const PidAtoms slow = brute_force_pid(dist, t, 1e-5);
          const double dev =
              std::max({std::abs(fast.si - slow.si), std::abs(fast.ui_a - slow.ui_a),
                        std::abs(fast.ui_b - slow.ui_b), std::abs(fast.ci - slow.ci)});
          worst_dev = std::max(worst_dev, dev);
          ++comparisons;
          if (dev > 1e-4)
            fail_case(ctx + ": solver deviates from the oracle by " + fmt_sig(dev, 3) + " bits",
                      &dist);
        } catch (const std::exception& e) {
          fail_case(ctx + ": " + e.what(), &dist);
        }
      }
    }
  }

  // Suite 2: every reconstruction identity on one representative of each
  // catalog system plus seeded random tables of mixed shapes.
  double worst_residual = 0.0;
  int systems = 0;
  {
    std::vector<std::pair<std::string, JointDist3>> cases;
    cases.emplace_back("copy(lambda=0.3)", make_copy(0.3));
    cases.emplace_back("and(lambda=0.7)", make_and(0.7));
    cases.emplace_back("xor", make_xor());
    cases.emplace_back("dice(lambda=0.4, alpha=3)", make_dice(0.4, 3));
    cases.emplace_back("dyadic", make_dyadic());
    cases.emplace_back("triadic", make_triadic());
    DetRng rng(o.seed + 0x9E3779B97F4A7C15ULL);
    cases.emplace_back("random markov", random_markov(rng, 3, 2, 3));
    cases.emplace_back("parallel(0.2, 0.5, 0.8)", make_parallel(0.2, 0.5, 0.8));
    const std::size_t shapes[4][3] = {{2, 2, 2}, {2, 3, 2}, {3, 2, 4}, {3, 3, 3}};
    for (int i = 0; i < o.random; ++i) {
      const auto& s = shapes[i % 4];
      cases.emplace_back("random " + std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" +
                             std::to_string(s[2]) + " #" + std::to_string(i),
                         random_dist(rng, s[0], s[1], s[2]));
    }

    for (const auto& [name, dist] : cases) {
      try {
        const ThreePids pids = three_pids(dist, cfg);
        double res = 0.0;
        for (Role t : kAllRoles) {
          const PidAtoms& a = pids.of(t);
          const auto src = sources_of(t);
          res = std::max(
              {res,
               std::abs(a.total() - mutual_information(dist, t, VarSet{src[0], src[1]})),
               std::abs(a.si + a.ui_a - mutual_information(dist, t, src[0])),
               std::abs(a.si + a.ui_b - mutual_information(dist, t, src[1]))});
          if (std::abs((a.si - a.ci) - pids.co_information) > 1e-9)
            fail_case(name + ": SI - CI does not equal the co-information", &dist);
          const RedundancySplit split = source_redundancy(pids, t);
          if (split.nsr < -1e-12 || std::abs(split.sr + split.nsr - a.si) > 1e-12)
            fail_case(name + ": redundancy split does not partition SI", &dist);
        }
        // minimal_set and entropy_decomposition throw ConsistencyError when
        // their own reconstruction residuals exceed 1e-6.
        const MinimalSet mset = minimal_set(pids);
        const EntropyDecomposition ent = entropy_decomposition(dist, mset);
        (void)ent;
        worst_residual = std::max(worst_residual, res);
        ++systems;
        if (res > 1e-6)
          fail_case(name + ": identity residual " + fmt_sig(res, 3) + " bits exceeds 1e-6",
                    &dist);
      } catch (const std::exception& e) {
        fail_case(name + ": " + e.what(), &dist);
      }
    }
  }

  std::printf("oracle suite:    %s  worst atom deviation %s bits over %d comparisons\n",
              failures == 0 ? "PASS" : "FAIL", fmt_sig(worst_dev, 3).c_str(), comparisons);
  std::printf("identity suite:  %s  worst identity residual %s bits over %d systems\n",
              failures == 0 ? "PASS" : "FAIL", fmt_sig(worst_residual, 3).c_str(), systems);
  std::printf("verify: %s (%d failures)\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Partial information decompositions of trivariate distributions:\n"
      "three PID lattices, the minimal set of seven subatoms, the\n"
      "source/non-source redundancy split, and the nonnegative joint-entropy\n"
      "decomposition."};
  app.require_subcommand(1);

  DecomposeOpts dopt;
  double p_lambda = 0, p_alpha = 0, p_l1 = 0, p_l2 = 0, p_l3 = 0;
  auto* dec = app.add_subcommand("decompose", "Full decomposition report for one distribution");
  dec->add_option("--pmf", dopt.pmf_path, "pmf file, TSV or JSON (auto-detected)");
  dec->add_option("--system", dopt.system_arg,
                  "catalog system kind (copy|and|xor|dice|dyadic|triadic|markov|parallel) "
                  "or path to a system-spec JSON file");
  auto* f_lambda = dec->add_option("--lambda", p_lambda, "coupling parameter");
  auto* f_alpha = dec->add_option("--alpha", p_alpha, "dice weight, integer 1..6");
  auto* f_l1 = dec->add_option("--lambda1", p_l1, "parallel: Z-X1 coupling");
  auto* f_l2 = dec->add_option("--lambda2", p_l2, "parallel: Z-Y1 coupling");
  auto* f_l3 = dec->add_option("--lambda3", p_l3, "parallel: X2-Y2 coupling");
  dec->add_flag("--normalize", dopt.normalize, "rescale a pmf whose total mass is not 1");
  dec->add_option("--target", dopt.target, "lattice(s) to print: X, Y, Z, or all (default all)");
  dec->add_option("--tol", dopt.solver.tol, "solver tolerance in bits");
  dec->add_option("--max-iters", dopt.solver.max_iters, "solver sweep cap");
  dec->add_option("--format", dopt.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));
  dec->add_option("--precision", dopt.precision, "significant digits (default 6)")
      ->check(CLI::Range(1, 15));

  SweepOpts sopt;
  auto* swp = app.add_subcommand("sweep",
                                 "CSV decomposition sweep over a parameter grid; grids are "
                                 "start:stop:step, endpoints included");
  swp->add_option("--system", sopt.system, "catalog system kind");
  swp->add_option("--lambda", sopt.params[0].second, "value or start:stop:step");
  swp->add_option("--alpha", sopt.params[1].second, "value or start:stop:step");
  swp->add_option("--lambda1", sopt.params[2].second, "value or start:stop:step");
  swp->add_option("--lambda2", sopt.params[3].second, "value or start:stop:step");
  swp->add_option("--lambda3", sopt.params[4].second, "value or start:stop:step");
  swp->add_option("--target", sopt.target, "target lattice for si/sr/nsr/ci (default X)");
  swp->add_option("--tol", sopt.solver.tol, "solver tolerance in bits");
  swp->add_option("--max-iters", sopt.solver.max_iters, "solver sweep cap");
  std::string sweep_format = "csv";
  swp->add_option("--format", sweep_format, "csv (the only sweep format)")
      ->check(CLI::IsMember({"csv"}));
  swp->add_option("--precision", sopt.precision, "significant digits (default 6)")
      ->check(CLI::Range(1, 15));

  GaussianOpts gopt;
  auto* gau = app.add_subcommand("gaussian",
                                 "Closed-form decomposition of a trivariate Gaussian");
  gau->add_option("--cov", gopt.cov_path, "covariance JSON file: {\"cov\": [[..]x3]}");
  gau->add_option("--target", gopt.target, "X, Y, Z, or all (default all)");
  gau->add_option("--format", gopt.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));
  gau->add_option("--precision", gopt.precision, "significant digits (default 6)")
      ->check(CLI::Range(1, 15));

  VerifyOpts vopt;
  auto* ver = app.add_subcommand("verify",
                                 "Run the built-in oracle and identity suites; exit 0 iff all "
                                 "pass");
  ver->add_option("--seed", vopt.seed, "seed for the random cases (default 1)");
  ver->add_option("--random", vopt.random, "number of random systems per suite (default 20)")
      ->check(CLI::Range(0, 100000));
  ver->add_option("--tol", vopt.solver.tol, "solver tolerance in bits");
  ver->add_option("--max-iters", vopt.solver.max_iters, "solver sweep cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (dec->parsed()) {
      if (f_lambda->count()) dopt.params["lambda"] = p_lambda;
      if (f_alpha->count()) dopt.params["alpha"] = p_alpha;
      if (f_l1->count()) dopt.params["lambda1"] = p_l1;
      if (f_l2->count()) dopt.params["lambda2"] = p_l2;
      if (f_l3->count()) dopt.params["lambda3"] = p_l3;
      return run_decompose(dopt);
    }
    if (swp->parsed()) return run_sweep(sopt);
    if (gau->parsed()) return run_gaussian(gopt);
    if (ver->parsed()) return run_verify(vopt);
    std::cerr << "error: no subcommand selected\n";
    return kExitValidation;
  } catch (const SolverFailure& e) {
    std::cerr << "error: solver did not converge: " << e.what() << "\n";
    return kExitCompute;
  } catch (const ConsistencyError& e) {
    std::cerr << "error: internal consistency check failed, refusing to emit: " << e.what()
              << "\n";
    return kExitCompute;
  } catch (const DegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {  // covers ParseError
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}
