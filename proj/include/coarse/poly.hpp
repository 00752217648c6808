#pragma once
// Exact rational polynomials in the unbounded parameter t, bivariate
// polynomials in (t, k), and sign deciders over integer parameter domains.

#include <boost/multiprecision/cpp_int.hpp>

#include <climits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coarse/core.hpp"

namespace coarse::hyper {

using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

/// Accepts "7", "-3/2" and "0.25".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw InputError("empty rational");
  try {
    if (auto dot = s.find('.'); dot != std::string::npos) {
      if (s.find('/') != std::string::npos) throw InputError("bad rational '" + s + "'");
      const bool neg = s[0] == '-';
      std::string whole = s.substr(neg || s[0] == '+' ? 1 : 0, dot - (neg || s[0] == '+' ? 1 : 0));
      std::string frac = s.substr(dot + 1);
      if (whole.empty()) whole = "0";
      if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos ||
          whole.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("bad rational '" + s + "'");
      Integer den = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size()));
      // Integer parsing reads a leading zero as octal.
      std::string digits = whole + frac;
      digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
      Rational r(Integer(digits), den);
      return neg ? Rational(-r) : r;
    }
    if (s.find_first_not_of("+-0123456789/") != std::string::npos) throw InputError("bad rational '" + s + "'");
    auto integer = [&](std::string part) {
      const bool neg = !part.empty() && (part[0] == '-' || part[0] == '+');
      std::string sign = neg && part[0] == '-' ? "-" : "";
      if (neg) part.erase(0, 1);
      if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("bad rational '" + s + "'");
      part.erase(0, std::min(part.find_first_not_of('0'), part.size() - 1));
      return Integer(sign + part);
    };
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(integer(s));
    const Integer den = integer(s.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + s + "'");
    return Rational(integer(s.substr(0, slash)), den);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("bad rational '" + s + "'");
  }
}

inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline Integer floor_of(const Rational& r) {
  Integer q = numerator(r) / denominator(r);  // truncates toward zero
  if (r < 0 && Rational(q) != r) q -= 1;
  return q;
}
inline Integer ceil_of(const Rational& r) { return -floor_of(-r); }

inline constexpr int kZeroDegree = INT_MIN;

/// Polynomial in t with exact rational coefficients, ascending degree, no
/// trailing zero coefficient.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }
  Poly(std::initializer_list<Rational> coeffs) : c_(coeffs) { trim(); }

  static Poly constant(const Rational& v) { return Poly(std::vector<Rational>{v}); }
  static Poly variable() { return Poly(std::vector<Rational>{0, 1}); }

  /// kZeroDegree for the zero polynomial.
  int degree() const { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  Rational leading() const { return c_.empty() ? Rational(0) : c_.back(); }
  const std::vector<Rational>& coeffs() const { return c_; }

  Rational operator()(const Rational& t) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
    return acc;
  }
  double eval(double t) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + it->convert_to<double>();
    return acc;
  }

  /// this(q(t)).
  Poly compose(const Poly& q) const {
    Poly acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + constant(*it);
    return acc;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff(i) + b.coeff(i);
    return Poly(std::move(c));
  }
  friend Poly operator-(const Poly& a) {
    std::vector<Rational> c(a.c_);
    for (auto& x : c) x = -x;
    return Poly(std::move(c));
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> c(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(c));
  }
  friend Poly operator*(const Rational& s, const Poly& a) { return constant(s) * a; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

/// Bounded (finite in the nonstandard sense) iff degree <= 0.
inline bool poly_is_bounded(const Poly& p) { return p.degree() <= 0; }

/// Polynomial in (t, k), stored as coefficient polynomials in t by power of k.
class Poly2 {
 public:
  Poly2() = default;
  explicit Poly2(std::vector<Poly> by_k) : c_(std::move(by_k)) { trim(); }
  Poly2(const Poly& t_only) : c_{t_only} { trim(); }  // NOLINT: implicit lift

  static Poly2 k() { return Poly2(std::vector<Poly>{Poly(), Poly::constant(1)}); }

  int k_degree() const { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
  int t_degree() const {
    int d = kZeroDegree;
    for (const auto& p : c_) d = std::max(d, p.degree());
    return d;
  }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1 && coeff_k(0).is_constant(); }
  Poly coeff_k(std::size_t i) const { return i < c_.size() ? c_[i] : Poly(); }

  Rational operator()(const Rational& t, const Rational& k) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * k + (*it)(t);
    return acc;
  }
  double eval(double t, double k) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * k + it->eval(t);
    return acc;
  }

  /// this(t, q(t, k)).
  Poly2 substitute_k(const Poly2& q) const {
    Poly2 acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + Poly2(*it);
    return acc;
  }
  /// this(t, q(t)).
  Poly at_k(const Poly& q) const { return substitute_k(Poly2(q)).coeff_k(0); }
  /// this(t, k + 1).
  Poly2 shifted() const { return substitute_k(k() + Poly2(Poly::constant(1))); }

  friend Poly2 operator+(const Poly2& a, const Poly2& b) {
    std::vector<Poly> c(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff_k(i) + b.coeff_k(i);
    return Poly2(std::move(c));
  }
  friend Poly2 operator-(const Poly2& a) {
    std::vector<Poly> c(a.c_);
    for (auto& x : c) x = -x;
    return Poly2(std::move(c));
  }
  friend Poly2 operator-(const Poly2& a, const Poly2& b) { return a + (-b); }
  friend Poly2 operator*(const Poly2& a, const Poly2& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Poly> c(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
    return Poly2(std::move(c));
  }
  friend bool operator==(const Poly2& a, const Poly2& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  std::vector<Poly> c_;
};

/// this(p(t, k)) for a univariate polynomial in one variable s.
inline Poly2 compose(const Poly& outer, const Poly2& inner) {
  Poly2 acc;
  for (auto it = outer.coeffs().rbegin(); it != outer.coeffs().rend(); ++it)
    acc = acc * inner + Poly2(Poly::constant(*it));
  return acc;
}

/// Integer-valued on all of Z^2: checked on a (deg_t+1) x (deg_k+1) grid of
/// consecutive integers, which is exact for polynomials of those degrees.
inline bool integer_valued(const Poly2& p) {
  if (p.is_zero()) return true;
  const int dt = std::max(p.t_degree(), 0);
  const int dk = std::max(p.k_degree(), 0);
  for (int t = 0; t <= dt; ++t)
    for (int k = 0; k <= dk; ++k)
      if (denominator(p(Rational(t), Rational(k))) != 1) return false;
  return true;
}

enum class Verdict { proved, sampled, refuted };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::proved: return "proved";
    case Verdict::sampled: return "sampled";
    case Verdict::refuted: return "refuted";
  }
  return "?";
}

/// Outcome of a sign check; refutations carry a concrete (t, k).
struct Decision {
  Verdict verdict = Verdict::proved;
  std::optional<Rational> t;
  std::optional<Rational> k;

  bool ok() const { return verdict != Verdict::refuted; }
  static Decision refuted_at(Rational t, std::optional<Rational> k = {}) {
    return Decision{Verdict::refuted, std::move(t), std::move(k)};
  }
};

/// Refuted dominates sampled, which dominates proved.
inline Decision combine(const Decision& a, const Decision& b) {
  if (a.verdict == Verdict::refuted) return a;
  if (b.verdict == Verdict::refuted) return b;
  if (a.verdict == Verdict::sampled) return a;
  return b;
}

/// Sampling parameters for checks without a symbolic route.
struct SamplingLimits {
  long t_span = 1000;
  long max_evaluations = 1000000;
  long max_exhaustive = 1000000;
  long small_constant_range = 64;
};

/// q(t) >= 0 for every integer t >= ceil(t0). Beyond the Cauchy root bound
/// the sign is that of the leading coefficient; below it every integer is
/// checked exactly.
inline Decision nonneg_on_integers(const Poly& q, const Rational& t0, const SamplingLimits& lim = {}) {
  const Integer start = ceil_of(t0);
  if (q.is_zero()) return {};
  if (q.is_constant()) return q.coeff(0) >= 0 ? Decision{} : Decision::refuted_at(Rational(start));
  const Rational lead = q.leading();
  Rational bound = 0;
  for (int i = 0; i < q.degree(); ++i) bound = std::max(bound, Rational(abs(q.coeff(i) / lead)));
  bound += 1;
  const Integer last = floor_of(bound);
  if (lead < 0) {
    const Integer t = std::max(start, last + 1);
    return Decision::refuted_at(Rational(t));
  }
  if (last < start) return {};
  const bool exhaustive = (last - start) <= lim.max_exhaustive;
  const Integer stop = exhaustive ? last : start + lim.t_span;
  for (Integer t = start; t <= stop; ++t)
    if (q(Rational(t)) < 0) return Decision::refuted_at(Rational(t));
  return exhaustive ? Decision{} : Decision{Verdict::sampled, {}, {}};
}

namespace detail {

inline Decision sample_domain(const Poly2& f, const Rational& t0, const Poly& kmax, const SamplingLimits& lim) {
  long evals = 0;
  const Integer start = ceil_of(t0);
  for (Integer t = start; t <= start + lim.t_span && evals < lim.max_evaluations; ++t) {
    const Rational tr(t);
    const Integer top = floor_of(kmax(tr));
    for (Integer k = 0; k <= top && evals < lim.max_evaluations; ++k, ++evals)
      if (f(tr, Rational(k)) < 0) return Decision::refuted_at(tr, Rational(k));
  }
  return Decision{Verdict::sampled, {}, {}};
}

}  // namespace detail

/// f(t, k) >= 0 for integer t >= ceil(t0) and integer 0 <= k <= kmax(t).
/// Exact when kmax is a small constant or f has degree <= 2 in k (the real
/// relaxation in k is used, which is sound); sampled otherwise.
inline Decision nonneg_on_domain(const Poly2& f, const Rational& t0, const Poly& kmax,
                                 const SamplingLimits& lim = {}) {
  if (kmax.is_constant()) {
    const Rational top = kmax.coeff(0);
    if (top < 0) return {};
    if (top <= lim.small_constant_range) {
      Decision d;
      for (Integer k = 0; k <= floor_of(top); ++k) {
        Decision dk = nonneg_on_integers(f.at_k(Poly::constant(Rational(k))), t0, lim);
        if (!dk.ok()) dk.k = Rational(k);
        d = combine(d, dk);
        if (!d.ok()) return d;
      }
      return d;
    }
  }
  const int dk = f.k_degree();
  if (dk <= 0) return nonneg_on_integers(f.coeff_k(0), t0, lim);

  auto endpoint = [&](const Poly& at, bool upper) {
    Decision d = nonneg_on_integers(f.at_k(at), t0, lim);
    if (!d.ok() && d.t) d.k = upper ? Rational(floor_of(kmax(*d.t))) : Rational(0);
    return d;
  };
  const Decision ends = combine(endpoint(Poly(), false), endpoint(kmax, true));
  if (!ends.ok()) return ends;
  if (dk == 1) return ends;

  if (dk == 2) {
    const Poly A = f.coeff_k(2), B = f.coeff_k(1), C = f.coeff_k(0);
    auto proved = [&](const Poly& p) { return nonneg_on_integers(p, t0, lim).verdict == Verdict::proved; };
    if (proved(-A)) return ends;  // concave in k: minimum at an endpoint
    if (proved(A)) {
      const bool vertex_ok = proved(Rational(4) * A * C - B * B);
      const bool vertex_left = proved(B);
      const bool vertex_right = proved(-B - Rational(2) * A * kmax);
      if (vertex_ok || vertex_left || vertex_right) return ends;
    }
  }
  return combine(ends, detail::sample_domain(f, t0, kmax, lim));
}

}  // namespace coarse::hyper
