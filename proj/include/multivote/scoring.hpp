#pragma once

// Scoring machinery for OWA and Thiele rules.
//
// Score arithmetic is exact (arbitrary-precision rationals) whenever the rule
// family permits it: utilitarian/PAV/lex-simulated Thiele weights and all
// generator-produced OWA vectors are rational. Power-decay Thiele weights
// i^-x and user-supplied double OWA vectors run in floating point, where two
// scores within a relative 1e-9 of each other count as tied and fall through
// to deterministic tie-breaking.
//
// The egalitarian, leximin and hybrid-x OWA rules are additionally exposed as
// exact comparators over sorted satisfaction vectors, avoiding the huge
// rational tails of their weight vectors on the hot paths.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <variant>

#include "core.hpp"

namespace multivote {

using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kScoreEpsilon = 1e-9;

inline bool approx_equal(double a, double b, double eps = kScoreEpsilon) {
  return std::abs(a - b) <= eps * std::max(std::abs(a), std::abs(b));
}

// Exact rational or double score, never mixed within one rule evaluation.
struct ScoreValue {
  std::variant<Rational, double> value;

  ScoreValue() : value(Rational(0)) {}
  explicit ScoreValue(Rational r) : value(std::move(r)) {}
  explicit ScoreValue(double d) : value(d) {}

  bool exact() const { return std::holds_alternative<Rational>(value); }
  const Rational& rational() const { return std::get<Rational>(value); }
  double as_double() const {
    return exact() ? static_cast<double>(rational()) : std::get<double>(value);
  }

  // Canonical rendering: rationals as "p" or "p/q", doubles via max_digits10.
  std::string str() const {
    if (exact()) {
      const Rational& r = rational();
      if (denominator(r) == 1) return numerator(r).str();
      return numerator(r).str() + "/" + denominator(r).str();
    }
    std::ostringstream os;
    os.precision(17);
    os << std::get<double>(value);
    return os.str();
  }

  bool operator==(const ScoreValue& other) const { return value == other.value; }
};

// greater = first argument is the higher score. Doubles within the relative
// epsilon compare equal; mixing exact and float scores is a caller bug.
inline std::strong_ordering compare_scores(const ScoreValue& a, const ScoreValue& b,
                                           double eps = kScoreEpsilon) {
  if (a.exact() != b.exact()) throw Error("cannot compare exact and float scores");
  if (a.exact()) {
    const Rational& ra = a.rational();
    const Rational& rb = b.rational();
    if (ra < rb) return std::strong_ordering::less;
    if (rb < ra) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  const double da = a.as_double();
  const double db = b.as_double();
  if (approx_equal(da, db, eps)) return std::strong_ordering::equal;
  return da < db ? std::strong_ordering::less : std::strong_ordering::greater;
}

// OWA weight vector alpha_1..alpha_n, applied to the sorted (nondecreasing)
// satisfaction vector. Requires alpha_1 > 0 and all weights >= 0.
struct OwaVector {
  std::variant<std::vector<Rational>, std::vector<double>> weights;

  static OwaVector from_rationals(std::vector<Rational> w) {
    OwaVector a;
    a.weights = std::move(w);
    a.check();
    return a;
  }
  static OwaVector from_doubles(std::vector<double> w) {
    OwaVector a;
    a.weights = std::move(w);
    a.check();
    return a;
  }

  bool exact() const { return std::holds_alternative<std::vector<Rational>>(weights); }
  const std::vector<Rational>& rationals() const { return std::get<std::vector<Rational>>(weights); }
  const std::vector<double>& doubles() const { return std::get<std::vector<double>>(weights); }

  std::size_t size() const {
    return exact() ? rationals().size() : doubles().size();
  }

  bool nonnegative() const {
    if (exact()) {
      for (const Rational& w : rationals()) {
        if (w < 0) return false;
      }
    } else {
      for (double w : doubles()) {
        if (w < 0) return false;
      }
    }
    return true;
  }

  bool nonincreasing() const {
    if (exact()) {
      const auto& w = rationals();
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] > w[i - 1]) return false;
      }
    } else {
      const auto& w = doubles();
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] > w[i - 1]) return false;
      }
    }
    return true;
  }

  bool operator==(const OwaVector&) const = default;

 private:
  void check() const {
    if (size() == 0) throw ValidationError("OWA vector is empty");
    if (!nonnegative()) throw ValidationError("OWA weights must be nonnegative");
    const bool head_positive = exact() ? (rationals()[0] > 0) : (doubles()[0] > 0);
    if (!head_positive) throw ValidationError("OWA weight alpha_1 must be positive");
  }
};

// alpha . s for a sorted satisfaction vector s (exactness follows the vector).
inline ScoreValue owa_score(const OwaVector& alpha, const SortedSatVector& s) {
  if (alpha.size() != s.size()) throw ValidationError("OWA vector length != voter count");
  if (alpha.exact()) {
    Rational total = 0;
    const auto& w = alpha.rationals();
    for (std::size_t i = 0; i < s.size(); ++i) total += w[i] * s[i];
    return ScoreValue(std::move(total));
  }
  double total = 0;
  const auto& w = alpha.doubles();
  for (std::size_t i = 0; i < s.size(); ++i) total += w[i] * s[i];
  return ScoreValue(total);
}

enum class OwaFamily { utilitarian, egalitarian, leximin, hybrid };

// Canonical exact weight vectors for the named OWA families, for n voters and
// k issues. hybrid(x) has n-x leading ones followed by the geometric tail
// 1/(kn), 1/(kn)^2, ... which makes prefix differences dominate the tail; it
// is utilitarian at x = 0 and order-equivalent to leximin at x = n-1.
inline OwaVector owa_family_vector(OwaFamily family, int n, int k, int x = 0) {
  if (n < 1 || k < 1) throw ValidationError("OWA family vector needs n >= 1, k >= 1");
  std::vector<Rational> w(static_cast<std::size_t>(n));
  switch (family) {
    case OwaFamily::utilitarian:
      for (auto& wi : w) wi = Rational(1, n);
      break;
    case OwaFamily::egalitarian:
      w[0] = 1;
      break;
    case OwaFamily::leximin: {
      const Rational step = Rational(1, static_cast<std::int64_t>(k) * n);
      Rational cur = 1;
      for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = cur;
        cur *= step;
      }
      break;
    }
    case OwaFamily::hybrid: {
      if (x < 0 || x >= n) throw ValidationError("hybrid OWA needs 0 <= x <= n-1");
      const Rational step = Rational(1, static_cast<std::int64_t>(k) * n);
      for (int i = 0; i < n - x; ++i) w[static_cast<std::size_t>(i)] = 1;
      Rational cur = step;
      for (int i = n - x; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = cur;
        cur *= step;
      }
      break;
    }
  }
  return OwaVector::from_rationals(std::move(w));
}

// Lexicographic comparison of sorted satisfaction vectors: at the first index
// where they differ, the larger entry wins. greater = s preferred over t.
inline std::strong_ordering leximin_compare(const SortedSatVector& s, const SortedSatVector& t) {
  if (s.size() != t.size()) throw ValidationError("satisfaction vectors differ in length");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != t[i]) return s[i] > t[i] ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  return std::strong_ordering::equal;
}

// Compares minimum satisfaction only (the egalitarian rule's objective).
inline std::strong_ordering egalitarian_compare(const SortedSatVector& s, const SortedSatVector& t) {
  if (s.size() != t.size()) throw ValidationError("satisfaction vectors differ in length");
  if (s.empty()) return std::strong_ordering::equal;
  if (s[0] != t[0]) return s[0] > t[0] ? std::strong_ordering::greater : std::strong_ordering::less;
  return std::strong_ordering::equal;
}

// Exact realization of the hybrid-x OWA order: the sum of the n-x smallest
// entries decides first; ties fall through to a positional comparison of the
// remaining x entries from position n-x upward, where a difference at an
// earlier position dominates everything after it. This matches the rational
// dot product with the hybrid(x) weight vector because each geometric tail
// weight exceeds the largest total the later positions can contribute.
inline std::strong_ordering hybrid_owa_compare(int x, const SortedSatVector& s,
                                               const SortedSatVector& t) {
  if (s.size() != t.size()) throw ValidationError("satisfaction vectors differ in length");
  const int n = static_cast<int>(s.size());
  if (x < 0 || x >= n) throw ValidationError("hybrid OWA needs 0 <= x <= n-1");
  long long sum_s = 0;
  long long sum_t = 0;
  for (int i = 0; i < n - x; ++i) {
    sum_s += s[static_cast<std::size_t>(i)];
    sum_t += t[static_cast<std::size_t>(i)];
  }
  if (sum_s != sum_t) {
    return sum_s > sum_t ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  for (int i = n - x; i < n; ++i) {
    const int a = s[static_cast<std::size_t>(i)];
    const int b = t[static_cast<std::size_t>(i)];
    if (a != b) return a > b ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  return std::strong_ordering::equal;
}

// Thiele weight function f with f(1) > 0 and f nonincreasing; a voter at
// satisfaction s contributes f(1) + ... + f(s) to the rule's score.
class ThieleFunction {
 public:
  enum class Family { utilitarian, pav, power_decay, lex_simulated };

  static ThieleFunction utilitarian() { return ThieleFunction(Family::utilitarian, 0.0, 0, 0); }
  static ThieleFunction pav() { return ThieleFunction(Family::pav, 0.0, 0, 0); }
  static ThieleFunction power_decay(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ValidationError("power-decay Thiele exponent must be finite and >= 0");
    }
    return ThieleFunction(Family::power_decay, x, 0, 0);
  }
  // f(i) = 1/(kn)^(i-1): decays fast enough to mimic leximin for fixed n, k.
  static ThieleFunction lex_simulated(int k, int n) {
    if (k < 1 || n < 1) throw ValidationError("lex-simulated Thiele needs k >= 1, n >= 1");
    return ThieleFunction(Family::lex_simulated, 0.0, k, n);
  }

  Family family() const { return family_; }
  double exponent() const { return x_; }

  bool exact() const { return family_ != Family::power_decay; }

  // i is 1-based (the weight of a voter's i-th satisfied issue).
  Rational value_exact(int i) const {
    if (i < 1) throw ValidationError("Thiele weight index must be >= 1");
    switch (family_) {
      case Family::utilitarian:
        return Rational(1);
      case Family::pav:
        return Rational(1, i);
      case Family::lex_simulated: {
        Rational v = 1;
        const Rational step = Rational(1, static_cast<std::int64_t>(lex_k_) * lex_n_);
        for (int j = 1; j < i; ++j) v *= step;
        return v;
      }
      case Family::power_decay:
        throw Error("power-decay Thiele has no exact weights");
    }
    throw Error("unreachable");
  }

  double value(int i) const {
    if (i < 1) throw ValidationError("Thiele weight index must be >= 1");
    if (family_ == Family::power_decay) return std::pow(static_cast<double>(i), -x_);
    return static_cast<double>(value_exact(i));
  }

  bool operator==(const ThieleFunction&) const = default;

 private:
  ThieleFunction(Family f, double x, int k, int n) : family_(f), x_(x), lex_k_(k), lex_n_(n) {}

  Family family_;
  double x_;
  int lex_k_;
  int lex_n_;
};

// Total Thiele score of an outcome; exact for rational weight families.
inline ScoreValue thiele_score(const ThieleFunction& f, const Election& e, const Outcome& w) {
  require_valid(e);
  const SortedSatVector sats = sorted_sat_vector(e, w);
  if (f.exact()) {
    Rational total = 0;
    std::vector<Rational> prefix(1, Rational(0));  // prefix[s] = f(1)+...+f(s)
    for (int s : sats) {
      while (static_cast<int>(prefix.size()) <= s) {
        prefix.push_back(prefix.back() + f.value_exact(static_cast<int>(prefix.size())));
      }
      total += prefix[static_cast<std::size_t>(s)];
    }
    return ScoreValue(std::move(total));
  }
  double total = 0;
  std::vector<double> prefix(1, 0.0);
  for (int s : sats) {
    while (static_cast<int>(prefix.size()) <= s) {
      prefix.push_back(prefix.back() + f.value(static_cast<int>(prefix.size())));
    }
    total += prefix[static_cast<std::size_t>(s)];
  }
  return ScoreValue(total);
}

// --- rule specifications -----------------------------------------------

enum class RuleMode { optimization, sequential };

enum class ComparatorKind { egalitarian, leximin, hybrid };

// A comparator-backed OWA rule (exact, no weight vector materialized).
struct OwaComparator {
  ComparatorKind kind = ComparatorKind::egalitarian;
  int x = 0;  // used by hybrid only

  bool operator==(const OwaComparator&) const = default;
};

struct RuleSpec {
  std::variant<ThieleFunction, OwaComparator, OwaVector> family;
  RuleMode mode = RuleMode::optimization;

  bool is_thiele() const { return std::holds_alternative<ThieleFunction>(family); }
  bool is_comparator() const { return std::holds_alternative<OwaComparator>(family); }
  bool is_owa_vector() const { return std::holds_alternative<OwaVector>(family); }

  const ThieleFunction& thiele() const { return std::get<ThieleFunction>(family); }
  const OwaComparator& comparator() const { return std::get<OwaComparator>(family); }
  const OwaVector& owa() const { return std::get<OwaVector>(family); }

  static RuleSpec thiele_rule(ThieleFunction f, RuleMode mode) {
    return RuleSpec{std::move(f), mode};
  }
  static RuleSpec comparator_rule(ComparatorKind kind, int x, RuleMode mode) {
    return RuleSpec{OwaComparator{kind, x}, mode};
  }
  static RuleSpec owa_rule(OwaVector alpha, RuleMode mode) {
    return RuleSpec{std::move(alpha), mode};
  }
};

namespace detail {

inline std::string format_double_compact(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace detail

// Rule strings: thiele:util | thiele:pav | thiele:pow:<x> | owa:egal |
// owa:leximin | owa:hybrid:<x>, with an optional @opt / @seq mode suffix.
// `fallback` supplies the mode when the suffix is absent.
inline RuleSpec parse_rule(const std::string& text, RuleMode fallback = RuleMode::optimization) {
  std::string body = text;
  RuleMode mode = fallback;
  if (const std::size_t at = body.rfind('@'); at != std::string::npos) {
    const std::string suffix = body.substr(at + 1);
    if (suffix == "opt") {
      mode = RuleMode::optimization;
    } else if (suffix == "seq") {
      mode = RuleMode::sequential;
    } else {
      throw ParseError("unknown rule mode '@" + suffix + "' (expected @opt or @seq)");
    }
    body = body.substr(0, at);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = body.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(body.substr(start));
      break;
    }
    parts.push_back(body.substr(start, colon - start));
    start = colon + 1;
  }
  const auto bad = [&]() -> ParseError { return ParseError("unknown rule '" + text + "'"); };
  if (parts.size() < 2) throw bad();
  if (parts[0] == "thiele") {
    if (parts[1] == "util" && parts.size() == 2) {
      return RuleSpec::thiele_rule(ThieleFunction::utilitarian(), mode);
    }
    if (parts[1] == "pav" && parts.size() == 2) {
      return RuleSpec::thiele_rule(ThieleFunction::pav(), mode);
    }
    if (parts[1] == "pow" && parts.size() == 3) {
      double x = 0;
      try {
        std::size_t used = 0;
        x = std::stod(parts[2], &used);
        if (used != parts[2].size()) throw bad();
      } catch (const std::logic_error&) {
        throw bad();
      }
      return RuleSpec::thiele_rule(ThieleFunction::power_decay(x), mode);
    }
    throw bad();
  }
  if (parts[0] == "owa") {
    if (parts[1] == "egal" && parts.size() == 2) {
      return RuleSpec::comparator_rule(ComparatorKind::egalitarian, 0, mode);
    }
    if (parts[1] == "leximin" && parts.size() == 2) {
      return RuleSpec::comparator_rule(ComparatorKind::leximin, 0, mode);
    }
    if (parts[1] == "hybrid" && parts.size() == 3) {
      int x = 0;
      try {
        std::size_t used = 0;
        x = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw bad();
      } catch (const std::logic_error&) {
        throw bad();
      }
      if (x < 0) throw ParseError("owa:hybrid needs x >= 0");
      return RuleSpec::comparator_rule(ComparatorKind::hybrid, x, mode);
    }
    throw bad();
  }
  throw bad();
}

inline std::string format_rule(const RuleSpec& rule) {
  std::string body;
  if (rule.is_thiele()) {
    switch (rule.thiele().family()) {
      case ThieleFunction::Family::utilitarian:
        body = "thiele:util";
        break;
      case ThieleFunction::Family::pav:
        body = "thiele:pav";
        break;
      case ThieleFunction::Family::power_decay:
        body = "thiele:pow:" + detail::format_double_compact(rule.thiele().exponent());
        break;
      case ThieleFunction::Family::lex_simulated:
        body = "thiele:lexsim";
        break;
    }
  } else if (rule.is_comparator()) {
    switch (rule.comparator().kind) {
      case ComparatorKind::egalitarian:
        body = "owa:egal";
        break;
      case ComparatorKind::leximin:
        body = "owa:leximin";
        break;
      case ComparatorKind::hybrid:
        body = "owa:hybrid:" + std::to_string(rule.comparator().x);
        break;
    }
  } else {
    body = "owa:vector";
  }
  return body + (rule.mode == RuleMode::optimization ? "@opt" : "@seq");
}

}  // namespace multivote
