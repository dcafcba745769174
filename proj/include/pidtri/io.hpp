#pragma once

// On-disk formats consumed and produced by the command-line driver:
//
//   pmf TSV    one outcome per line, four whitespace-separated fields
//              `x y z p`; `#` starts a comment; outcomes not listed have
//              probability zero; labels are registered in order of first
//              appearance.
//   pmf JSON   {"alphabets": {"X": [...], "Y": [...], "Z": [...]},
//               "pmf": [{"x":..,"y":..,"z":..,"p":..}, ...]}
//              labels may be strings or integers (integers map to their
//              decimal string).
//   cov JSON   {"cov": [[..],[..],[..]]}, a symmetric PD 3x3 matrix.
//   system JSON  {"kind":"and","params":{"lambda":0.5}}; the "markov" kind
//              carries explicit tables under "markov" instead of "params".
//
// Readers reject malformed input with messages naming the offending line or
// JSON element; writers emit full-precision round-trippable text.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pidtri/catalog.hpp"
#include "pidtri/dist.hpp"
#include "pidtri/gaussian.hpp"

namespace pidtri {

// Malformed or unreadable input; the message names the offending location.
class ParseError : public std::invalid_argument {
 public:
  explicit ParseError(const std::string& what) : std::invalid_argument(what) {}
};

namespace detail {

inline std::string fmt_prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Label collector preserving first-appearance order.
class LabelSet {
 public:
  std::size_t id_of(const std::string& label) {
    auto [it, inserted] = index_.try_emplace(label, labels_.size());
    if (inserted) labels_.push_back(label);
    return it->second;
  }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> labels_;
};

struct RawOutcome {
  std::size_t ix, iy, iz;
  double p;
  std::string where;  // human-readable source location for error messages
};

// Shared tail of both pmf readers: dense table, duplicate detection,
// construction (with opt-in renormalization).
inline JointDist3 assemble_pmf(const LabelSet& lx, const LabelSet& ly, const LabelSet& lz,
                               const std::vector<RawOutcome>& outcomes, bool normalize,
                               const char* format_name) {
  if (outcomes.empty())
    throw ParseError(std::string(format_name) + ": no outcomes; the pmf is empty");
  const std::size_t ny = ly.size(), nz = lz.size();
  std::vector<double> probs(lx.size() * ny * nz, 0.0);
  std::vector<const std::string*> seen(probs.size(), nullptr);
  for (const RawOutcome& o : outcomes) {
    const std::size_t flat = (o.ix * ny + o.iy) * nz + o.iz;
    if (seen[flat])
      throw ParseError(std::string(format_name) + ": " + o.where + " repeats outcome (" +
                       lx.labels()[o.ix] + ", " + ly.labels()[o.iy] + ", " + lz.labels()[o.iz] +
                       ") first given at " + *seen[flat]);
    seen[flat] = &o.where;
    if (!(o.p >= 0.0))
      throw ParseError(std::string(format_name) + ": " + o.where + ": probability " +
                       fmt_prob(o.p) + " is negative or not a number");
    probs[flat] = o.p;
  }
  Alphabet ax(lx.labels()), ay(ly.labels()), az(lz.labels());
  if (normalize)
    return JointDist3::normalized(std::move(ax), std::move(ay), std::move(az), std::move(probs));
  try {
    return JointDist3(std::move(ax), std::move(ay), std::move(az), std::move(probs));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string(format_name) + ": " + e.what());
  }
}

}  // namespace detail

// --- pmf TSV -----------------------------------------------------------------

inline JointDist3 read_pmf_tsv(std::istream& in, bool normalize = false) {
  detail::LabelSet lx, ly, lz;
  std::vector<detail::RawOutcome> outcomes;
  std::string line;
  for (long lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string x, y, z, p_text, extra;
    if (!(fields >> x)) continue;  // blank or comment-only line
    const std::string where = "line " + std::to_string(lineno);
    if (!(fields >> y >> z >> p_text))
      throw ParseError("pmf tsv: " + where + ": expected 4 fields \"x y z p\", got \"" + line +
                       "\"");
    if (fields >> extra)
      throw ParseError("pmf tsv: " + where + ": trailing field \"" + extra +
                       "\" after the probability");
    double p = 0.0;
    std::size_t used = 0;
    try {
      p = std::stod(p_text, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != p_text.size())
      throw ParseError("pmf tsv: " + where + ": cannot parse probability \"" + p_text + "\"");
    outcomes.push_back({lx.id_of(x), ly.id_of(y), lz.id_of(z), p, where});
  }
  if (in.bad()) throw ParseError("pmf tsv: read error");
  return detail::assemble_pmf(lx, ly, lz, outcomes, normalize, "pmf tsv");
}

// Writes every nonzero cell at full precision; a fresh read round-trips to
// the same table as long as labels carry no whitespace or '#'.
inline void write_pmf_tsv(std::ostream& out, const JointDist3& d) {
  for (Role r : {Role::X, Role::Y, Role::Z})
    for (const std::string& label : d.alphabet(r).labels())
      if (label.find_first_of(" \t#") != std::string::npos)
        throw std::invalid_argument("write_pmf_tsv: label \"" + label +
                                    "\" contains whitespace or '#' and cannot be written as TSV");
  out << "# x y z p\n";
  for (std::size_t ix = 0; ix < d.nx(); ++ix)
    for (std::size_t iy = 0; iy < d.ny(); ++iy)
      for (std::size_t iz = 0; iz < d.nz(); ++iz) {
        const double v = d.p(ix, iy, iz);
        if (v == 0.0) continue;
        out << d.alphabet(Role::X).labels()[ix] << '\t' << d.alphabet(Role::Y).labels()[iy]
            << '\t' << d.alphabet(Role::Z).labels()[iz] << '\t' << detail::fmt_prob(v) << '\n';
      }
}

// --- pmf JSON ----------------------------------------------------------------

namespace detail {

inline std::string json_label(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError("pmf json: " + where + " must be a string or integer label, got " + v.dump());
}

inline nlohmann::json parse_json(std::istream& in, const char* format_name) {
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(format_name) + ": " + e.what());
  }
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> known,
                                const char* format_name) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok)
      throw ParseError(std::string(format_name) + ": unknown key \"" + key + "\"");
  }
}

}  // namespace detail

inline JointDist3 read_pmf_json(std::istream& in, bool normalize = false) {
  const nlohmann::json j = detail::parse_json(in, "pmf json");
  if (!j.is_object() || !j.contains("alphabets") || !j.contains("pmf"))
    throw ParseError("pmf json: expected an object with \"alphabets\" and \"pmf\"");
  detail::reject_unknown_keys(j, {"alphabets", "pmf"}, "pmf json");

  const auto& al = j.at("alphabets");
  detail::LabelSet sets[3];
  const char* names[3] = {"X", "Y", "Z"};
  if (!al.is_object()) throw ParseError("pmf json: \"alphabets\" must be an object");
  detail::reject_unknown_keys(al, {"X", "Y", "Z"}, "pmf json alphabets");
  for (int r = 0; r < 3; ++r) {
    if (!al.contains(names[r]) || !al.at(names[r]).is_array() || al.at(names[r]).empty())
      throw ParseError(std::string("pmf json: alphabet \"") + names[r] +
                       "\" must be a non-empty array");
    std::size_t i = 0;
    for (const auto& v : al.at(names[r])) {
      const std::string where =
          std::string("alphabets.") + names[r] + "[" + std::to_string(i++) + "]";
      const std::string label = detail::json_label(v, where);
      const std::size_t before = sets[r].size();
      sets[r].id_of(label);
      if (sets[r].size() == before)  // id_of did not append, so the label already existed
        throw ParseError("pmf json: " + where + " repeats label \"" + label + "\"");
    }
  }

  const auto& pmf = j.at("pmf");
  if (!pmf.is_array()) throw ParseError("pmf json: \"pmf\" must be an array of outcomes");
  std::vector<detail::RawOutcome> outcomes;
  std::size_t at = 0;
  for (const auto& entry : pmf) {
    const std::string where = "pmf[" + std::to_string(at++) + "]";
    if (!entry.is_object())
      throw ParseError("pmf json: " + where + " must be an object {x, y, z, p}");
    detail::reject_unknown_keys(entry, {"x", "y", "z", "p"}, "pmf json outcome");
    for (const char* k : {"x", "y", "z", "p"})
      if (!entry.contains(k))
        throw ParseError("pmf json: " + where + " is missing \"" + k + "\"");
    std::size_t idx[3];
    const char* keys[3] = {"x", "y", "z"};
    for (int r = 0; r < 3; ++r) {
      const std::string label = detail::json_label(entry.at(keys[r]), where + "." + keys[r]);
      detail::LabelSet& s = sets[r];
      const std::size_t before = s.size();
      idx[r] = s.id_of(label);
      if (s.size() != before)
        throw ParseError("pmf json: " + where + "." + keys[r] + ": label \"" + label +
                         "\" is not in alphabet \"" + names[r] + "\"");
    }
    if (!entry.at("p").is_number())
      throw ParseError("pmf json: " + where + ".p must be a number, got " +
                       entry.at("p").dump());
    outcomes.push_back({idx[0], idx[1], idx[2], entry.at("p").get<double>(), where});
  }
  return detail::assemble_pmf(sets[0], sets[1], sets[2], outcomes, normalize, "pmf json");
}

inline void write_pmf_json(std::ostream& out, const JointDist3& d) {
  nlohmann::ordered_json j;
  j["alphabets"] = {{"X", d.alphabet(Role::X).labels()},
                    {"Y", d.alphabet(Role::Y).labels()},
                    {"Z", d.alphabet(Role::Z).labels()}};
  auto& pmf = j["pmf"] = nlohmann::ordered_json::array();
  for (std::size_t ix = 0; ix < d.nx(); ++ix)
    for (std::size_t iy = 0; iy < d.ny(); ++iy)
      for (std::size_t iz = 0; iz < d.nz(); ++iz) {
        const double v = d.p(ix, iy, iz);
        if (v == 0.0) continue;
        pmf.push_back({{"x", d.alphabet(Role::X).labels()[ix]},
                       {"y", d.alphabet(Role::Y).labels()[iy]},
                       {"z", d.alphabet(Role::Z).labels()[iz]},
                       {"p", v}});
      }
  out << j.dump(2) << '\n';
}

// Dispatches on the first non-whitespace byte: '{' means JSON, else TSV.
inline JointDist3 read_pmf_auto(std::istream& in, bool normalize = false) {
  int c;
  while ((c = in.peek()) != EOF && std::isspace(c)) in.get();
  if (c == '{') return read_pmf_json(in, normalize);
  return read_pmf_tsv(in, normalize);
}

// --- covariance JSON -----------------------------------------------------------

inline GaussianCov read_cov_json(std::istream& in) {
  const nlohmann::json j = detail::parse_json(in, "cov json");
  if (!j.is_object() || !j.contains("cov"))
    throw ParseError("cov json: expected an object with a \"cov\" matrix");
  detail::reject_unknown_keys(j, {"cov"}, "cov json");
  const auto& m = j.at("cov");
  if (!m.is_array() || m.size() != 3)
    throw ParseError("cov json: \"cov\" must be an array of 3 rows");
  std::array<std::array<double, 3>, 3> c{};
  for (int i = 0; i < 3; ++i) {
    const auto& row = m.at(i);
    if (!row.is_array() || row.size() != 3)
      throw ParseError("cov json: row " + std::to_string(i) + " must hold 3 numbers");
    for (int k = 0; k < 3; ++k) {
      if (!row.at(k).is_number())
        throw ParseError("cov json: entry (" + std::to_string(i) + "," + std::to_string(k) +
                         ") must be a number, got " + row.at(k).dump());
      c[i][k] = row.at(k).get<double>();
    }
  }
  try {
    return GaussianCov(c);
  } catch (const DegeneracyError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("cov json: ") + e.what());
  }
}

inline void write_cov_json(std::ostream& out, const GaussianCov& g) {
  nlohmann::ordered_json j;
  auto& m = j["cov"] = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i) m.push_back({g.cov[i][0], g.cov[i][1], g.cov[i][2]});
  out << j.dump(2) << '\n';
}

// --- system-spec JSON ------------------------------------------------------------

inline SystemSpec read_system_json(std::istream& in) {
  const nlohmann::json j = detail::parse_json(in, "system json");
  if (!j.is_object() || !j.contains("kind"))
    throw ParseError("system json: expected an object with a \"kind\"");
  detail::reject_unknown_keys(j, {"kind", "params", "markov"}, "system json");
  if (!j.at("kind").is_string())
    throw ParseError("system json: \"kind\" must be a string");

  SystemSpec spec;
  try {
    spec.kind = system_kind_from_name(j.at("kind").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("system json: ") + e.what());
  }

  if (j.contains("params")) {
    const auto& params = j.at("params");
    if (!params.is_object())
      throw ParseError("system json: \"params\" must be an object of numbers");
    for (const auto& [key, value] : params.items()) {
      if (!value.is_number())
        throw ParseError("system json: parameter \"" + key + "\" must be a number, got " +
                         value.dump());
      spec.params[key] = value.get<double>();
    }
  }

  if (j.contains("markov")) {
    const auto& mk = j.at("markov");
    detail::reject_unknown_keys(mk, {"pz", "x_given_z", "y_given_z"}, "system json markov");
    auto numbers = [](const nlohmann::json& arr, const std::string& where) {
      if (!arr.is_array() || arr.empty())
        throw ParseError("system json: " + where + " must be a non-empty array");
      std::vector<double> v;
      for (const auto& e : arr) {
        if (!e.is_number())
          throw ParseError("system json: " + where + " holds a non-number: " + e.dump());
        v.push_back(e.get<double>());
      }
      return v;
    };
    MarkovTables t;
    if (!mk.is_object() || !mk.contains("pz") || !mk.contains("x_given_z") ||
        !mk.contains("y_given_z"))
      throw ParseError(
          "system json: \"markov\" must hold \"pz\", \"x_given_z\", and \"y_given_z\"");
    t.pz = numbers(mk.at("pz"), "markov.pz");
    for (const char* key : {"x_given_z", "y_given_z"}) {
      const auto& rows = mk.at(key);
      if (!rows.is_array() || rows.empty())
        throw ParseError(std::string("system json: markov.") + key +
                         " must be a non-empty array of rows");
      auto& dst = (std::string(key) == "x_given_z") ? t.x_given_z : t.y_given_z;
      std::size_t r = 0;
      for (const auto& row : rows)
        dst.push_back(numbers(row, std::string("markov.") + key + "[" + std::to_string(r++) +
                                       "]"));
    }
    spec.markov = std::move(t);
  }
  return spec;
}

// --- file helpers ------------------------------------------------------------------

namespace detail {

template <typename Fn>
auto with_input_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file \"" + path + "\"");
  return fn(in);
}

}  // namespace detail

inline JointDist3 read_pmf_file(const std::string& path, bool normalize = false) {
  return detail::with_input_file(
      path, [&](std::istream& in) { return read_pmf_auto(in, normalize); });
}
inline GaussianCov read_cov_file(const std::string& path) {
  return detail::with_input_file(path, [](std::istream& in) { return read_cov_json(in); });
}
inline SystemSpec read_system_file(const std::string& path) {
  return detail::with_input_file(path, [](std::istream& in) { return read_system_json(in); });
}

}  // namespace pidtri
