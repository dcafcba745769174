#pragma once

// Finite trivariate probability distributions and the Shannon quantities
// built on them.  All information values are in bits (log base 2), and the
// convention 0*log(0) = 0 is implemented by skipping zero cells outright --
// never by adding an epsilon to the mass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pidtri {

// Raised when a quantity that is mathematically guaranteed (nonnegativity of
// mutual information, an identity between decompositions, ...) is violated by
// more than numerical noise.  It signals a bug or a badly conditioned solve,
// not a user error.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

enum class Role : int { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Role, 3> kAllRoles{Role::X, Role::Y, Role::Z};

inline const char* role_name(Role r) {
  switch (r) {
    case Role::X: return "X";
    case Role::Y: return "Y";
    case Role::Z: return "Z";
  }
  throw std::invalid_argument("role_name: invalid role");
}

inline Role role_from_name(const std::string& s) {
  if (s == "X" || s == "x") return Role::X;
  if (s == "Y" || s == "y") return Role::Y;
  if (s == "Z" || s == "z") return Role::Z;
  throw std::invalid_argument("role_from_name: expected one of X, Y, Z; got \"" + s + "\"");
}

// Given a target variable, the two remaining variables in role order.
inline std::array<Role, 2> sources_of(Role target) {
  switch (target) {
    case Role::X: return {Role::Y, Role::Z};
    case Role::Y: return {Role::X, Role::Z};
    case Role::Z: return {Role::X, Role::Y};
  }
  throw std::invalid_argument("sources_of: invalid role");
}

// A subset of {X, Y, Z}, used to name variable groups in entropies and
// mutual informations, e.g. I(X : (Y,Z)) takes {X} and {Y,Z}.
class VarSet {
 public:
  constexpr VarSet() = default;
  constexpr VarSet(Role r) : mask_(1u << static_cast<int>(r)) {}
  constexpr VarSet(std::initializer_list<Role> roles) {
    for (Role r : roles) mask_ |= 1u << static_cast<int>(r);
  }

  constexpr bool contains(Role r) const { return (mask_ >> static_cast<int>(r)) & 1u; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr int count() const {
    return int(mask_ & 1u) + int((mask_ >> 1) & 1u) + int((mask_ >> 2) & 1u);
  }
  constexpr VarSet operator|(VarSet other) const {
    VarSet s;
    s.mask_ = mask_ | other.mask_;
    return s;
  }
  constexpr bool intersects(VarSet other) const { return (mask_ & other.mask_) != 0; }
  constexpr bool operator==(const VarSet&) const = default;

  // Member roles in canonical X < Y < Z order.
  std::vector<Role> roles() const {
    std::vector<Role> out;
    for (Role r : kAllRoles)
      if (contains(r)) out.push_back(r);
    return out;
  }

  std::string name() const {
    std::string s;
    for (Role r : kAllRoles)
      if (contains(r)) s += role_name(r);
    return s.empty() ? std::string("{}") : s;
  }

  static constexpr VarSet all() { return VarSet{Role::X, Role::Y, Role::Z}; }

 private:
  unsigned mask_ = 0;
};

// Ordered list of distinct outcome labels for one variable.
class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("Alphabet: must have at least one label");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      auto [it, inserted] = index_.emplace(labels_[i], i);
      if (!inserted)
        throw std::invalid_argument("Alphabet: duplicate label \"" + labels_[i] + "\"");
    }
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Alphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Convenience: alphabet {"0", "1", ..., "n-1"}.
inline Alphabet index_alphabet(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return Alphabet(std::move(labels));
}

// A dense probability table over an ordered subset of the roles.  Produced by
// marginal(); consumed by entropy().  Probabilities are stored row-major in
// the listed role order.
struct ProbTable {
  std::vector<Role> roles;       // canonical X < Y < Z order
  std::vector<std::size_t> dims; // one extent per role
  std::vector<double> p;         // row-major, size = product of dims

  double mass() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
};

// Joint distribution of three finite variables X, Y, Z.  Validated at
// construction: every cell nonnegative, total mass within 1e-9 of one, and
// the table size capped so downstream algorithms stay tractable.
class JointDist3 {
 public:
  static constexpr double kNormTol = 1e-9;
  static constexpr std::size_t kMaxCells = 1000000;

  JointDist3(Alphabet x, Alphabet y, Alphabet z, std::vector<double> probs)
      : alphabets_{std::move(x), std::move(y), std::move(z)}, p_(std::move(probs)) {
    const std::size_t cells = nx() * ny() * nz();
    if (nx() != 0 && (cells / nx()) / ny() != nz())  // overflow guard
      throw std::invalid_argument("JointDist3: alphabet sizes overflow");
    if (cells > kMaxCells)
      throw std::invalid_argument("JointDist3: table has " + std::to_string(cells) +
                                  " cells, exceeding the limit of " + std::to_string(kMaxCells));
    if (p_.size() != cells)
      throw std::invalid_argument("JointDist3: expected " + std::to_string(cells) +
                                  " probabilities, got " + std::to_string(p_.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      const double v = p_[i];
      if (!(v >= 0.0))  // catches negatives and NaN
        throw std::invalid_argument("JointDist3: cell " + cell_name(i) + " has probability " +
                                    std::to_string(v) + ", which is negative or not a number");
      total += v;
    }
    if (std::abs(total - 1.0) > kNormTol)
      throw std::invalid_argument("JointDist3: total mass " + std::to_string(total) +
                                  " differs from 1 by more than " + std::to_string(kNormTol) +
                                  "; pass the table through JointDist3::normalized to rescale");
  }

  // Explicit opt-in rescaling: divides by the total mass, then validates.
  static JointDist3 normalized(Alphabet x, Alphabet y, Alphabet z, std::vector<double> probs) {
    double total = 0.0;
    for (double v : probs) {
      if (!(v >= 0.0))
        throw std::invalid_argument("JointDist3::normalized: negative or NaN probability");
      total += v;
    }
    if (total <= 0.0)
      throw std::invalid_argument("JointDist3::normalized: total mass is zero");
    for (double& v : probs) v /= total;
    return JointDist3(std::move(x), std::move(y), std::move(z), std::move(probs));
  }

  const Alphabet& alphabet(Role r) const { return alphabets_[static_cast<int>(r)]; }
  std::size_t size(Role r) const { return alphabets_[static_cast<int>(r)].size(); }
  std::size_t nx() const { return alphabets_[0].size(); }
  std::size_t ny() const { return alphabets_[1].size(); }
  std::size_t nz() const { return alphabets_[2].size(); }
  std::size_t cells() const { return p_.size(); }

  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return (ix * ny() + iy) * nz() + iz;
  }
  double p(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return p_[index(ix, iy, iz)];
  }
  const std::vector<double>& probs() const { return p_; }

  std::string cell_name(std::size_t flat) const {
    const std::size_t iz = flat % nz();
    const std::size_t iy = (flat / nz()) % ny();
    const std::size_t ix = flat / (ny() * nz());
    return "(" + alphabets_[0].label(ix) + ", " + alphabets_[1].label(iy) + ", " +
           alphabets_[2].label(iz) + ")";
  }

 private:
  std::array<Alphabet, 3> alphabets_;
  std::vector<double> p_;
};

// --- Shannon quantities -----------------------------------------------------

// Entropy in bits of an arbitrary nonnegative table; zero cells contribute 0.
inline double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

inline double entropy(const ProbTable& t) { return entropy(t.p); }

// Marginal table over the kept variables (canonical role order).  Keeping all
// three returns a copy of the full table, so entropy(marginal(d, all)) equals
// the joint entropy exactly.
inline ProbTable marginal(const JointDist3& d, VarSet keep) {
  if (keep.empty()) throw std::invalid_argument("marginal: kept set must be non-empty");
  ProbTable out;
  out.roles = keep.roles();
  std::size_t total = 1;
  for (Role r : out.roles) {
    out.dims.push_back(d.size(r));
    total *= d.size(r);
  }
  out.p.assign(total, 0.0);

  // stride of each kept role in the output index
  std::array<std::size_t, 3> stride{0, 0, 0};
  {
    std::size_t s = 1;
    for (auto it = out.roles.rbegin(); it != out.roles.rend(); ++it) {
      stride[static_cast<int>(*it)] = s;
      s *= d.size(*it);
    }
  }
  const bool kx = keep.contains(Role::X), ky = keep.contains(Role::Y), kz = keep.contains(Role::Z);
  std::size_t flat = 0;
  for (std::size_t ix = 0; ix < d.nx(); ++ix)
    for (std::size_t iy = 0; iy < d.ny(); ++iy)
      for (std::size_t iz = 0; iz < d.nz(); ++iz, ++flat) {
        const double v = d.probs()[flat];
        if (v == 0.0) continue;
        const std::size_t o = (kx ? ix * stride[0] : 0) + (ky ? iy * stride[1] : 0) +
                              (kz ? iz * stride[2] : 0);
        out.p[o] += v;
      }
  return out;
}

inline double entropy(const JointDist3& d, VarSet vars) { return entropy(marginal(d, vars)); }

namespace detail {

// Mutual informations are nonnegative; allow float noise up to `tol` below
// zero, clamp it away, and treat anything worse as an internal error.
inline double clamp_information(double v, double tol, const char* what) {
  if (v >= 0.0) return v;
  if (v >= -tol) return 0.0;
  throw ConsistencyError(std::string(what) + " came out " + std::to_string(v) +
                         " bits, below the -" + std::to_string(tol) + " noise floor");
}

inline constexpr double kInfoNoiseTol = 1e-12;

// The value `rest` such that part + rest == total holds bit-exactly.  A plain
// total - part is within one ulp, but quantities documented as exact
// partitions (sr + nsr = si) deserve the real thing; a couple of rounding
// corrections always reach it for same-sign operands.
inline double exact_complement(double total, double part) {
  double rest = total - part;
  for (int i = 0; i < 4 && part + rest != total; ++i) rest -= (part + rest) - total;
  return rest;
}

}  // namespace detail

// I(A : B) = H(A) + H(B) - H(A,B).  Either group may contain more than one
// variable, e.g. mutual_information(d, Role::X, {Role::Y, Role::Z}).
inline double mutual_information(const JointDist3& d, VarSet a, VarSet b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("mutual_information: variable groups must be non-empty");
  if (a.intersects(b))
    throw std::invalid_argument("mutual_information: groups " + a.name() + " and " + b.name() +
                                " overlap");
  const double v = entropy(d, a) + entropy(d, b) - entropy(d, a | b);
  return detail::clamp_information(v, detail::kInfoNoiseTol,
                                   ("I(" + a.name() + ":" + b.name() + ")").c_str());
}

// I(A : B | C) = H(A,C) + H(B,C) - H(C) - H(A,B,C).
inline double conditional_mutual_information(const JointDist3& d, Role a, Role b, Role given) {
  if (a == b || a == given || b == given)
    throw std::invalid_argument("conditional_mutual_information: roles must be distinct");
  const VarSet c{given};
  const double v =
      entropy(d, VarSet{a} | c) + entropy(d, VarSet{b} | c) - entropy(d, c) - entropy(d, VarSet::all());
  return detail::clamp_information(
      v, detail::kInfoNoiseTol,
      ("I(" + VarSet{a}.name() + ":" + VarSet{b}.name() + "|" + c.name() + ")").c_str());
}

// H(A | B) = H(A,B) - H(B).  May be 0 but never negative (up to noise).
inline double conditional_entropy(const JointDist3& d, VarSet a, VarSet given) {
  if (a.empty()) throw std::invalid_argument("conditional_entropy: group must be non-empty");
  if (given.empty()) return entropy(d, a);
  if (a.intersects(given))
    throw std::invalid_argument("conditional_entropy: groups overlap");
  const double v = entropy(d, a | given) - entropy(d, given);
  return detail::clamp_information(
      v, detail::kInfoNoiseTol,
      ("H(" + a.name() + "|" + given.name() + ")").c_str());
}

// Co-information: coI = I(X:Y) - I(X:Y|Z).  Symmetric under any permutation
// of the three variables; may be negative (synergy exceeding redundancy).
inline double co_information(const JointDist3& d) {
  return mutual_information(d, Role::X, Role::Y) -
         conditional_mutual_information(d, Role::X, Role::Y, Role::Z);
}

}  // namespace pidtri
