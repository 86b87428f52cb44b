#include "dyncore/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dyncore/errors.hpp"

namespace dyncore {

namespace {

mpz_class pow_u64(std::uint64_t base, std::uint64_t exponent) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exponent);
  return r;
}

bool factor_less(const DenomFactor& a, const DenomFactor& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.base < b.base;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenomTag

DenomTag DenomTag::plain(std::uint64_t d) {
  if (d == 0) throw InvalidArgument("denominator must be positive");
  DenomTag t;
  t.multiply(FactorKind::Plain, d);
  return t;
}

DenomTag DenomTag::leaf(std::uint64_t n_p, unsigned c_exp, std::uint64_t inv_eps) {
  DenomTag t;
  t.multiply(FactorKind::PhaseBase, n_p, c_exp + 1);
  t.multiply(FactorKind::InvEps, inv_eps);
  return t;
}

DenomTag& DenomTag::multiply(FactorKind kind, std::uint64_t base, std::uint32_t exponent) {
  if (base == 0) throw InvalidArgument("zero denominator factor");
  if (base == 1 || exponent == 0) return *this;
  DenomFactor f{kind, base, exponent};
  auto it = std::lower_bound(factors_.begin(), factors_.end(), f, factor_less);
  if (it != factors_.end() && it->kind == kind && it->base == base) {
    it->exponent += exponent;
  } else {
    factors_.insert(it, f);
  }
  return *this;
}

DenomTag& DenomTag::multiply(const DenomTag& other) {
  for (const auto& f : other.factors_) multiply(f.kind, f.base, f.exponent);
  return *this;
}

DenomTag DenomTag::times(const DenomTag& other) const {
  DenomTag r = *this;
  r.multiply(other);
  return r;
}

DenomTag DenomTag::common_multiple(const DenomTag& other) const {
  DenomTag r;
  r.factors_.reserve(factors_.size() + other.factors_.size());
  auto a = factors_.begin();
  auto b = other.factors_.begin();
  while (a != factors_.end() || b != other.factors_.end()) {
    if (b == other.factors_.end() || (a != factors_.end() && factor_less(*a, *b))) {
      r.factors_.push_back(*a++);
    } else if (a == factors_.end() || factor_less(*b, *a)) {
      r.factors_.push_back(*b++);
    } else {
      DenomFactor f = *a;
      f.exponent = std::max(a->exponent, b->exponent);
      r.factors_.push_back(f);
      ++a;
      ++b;
    }
  }
  return r;
}

bool DenomTag::divides_structurally(const DenomTag& multiple) const {
  auto m = multiple.factors_.begin();
  for (const auto& f : factors_) {
    while (m != multiple.factors_.end() && factor_less(*m, f)) ++m;
    if (m == multiple.factors_.end() || m->kind != f.kind || m->base != f.base ||
        m->exponent < f.exponent) {
      return false;
    }
  }
  return true;
}

bool DenomTag::divides(const DenomTag& multiple) const {
  if (divides_structurally(multiple)) return true;
  return mpz_divisible_p(multiple.value().get_mpz_t(), value().get_mpz_t()) != 0;
}

mpz_class DenomTag::quotient_into(const DenomTag& multiple) const {
  if (divides_structurally(multiple)) {
    mpz_class q = 1;
    auto f = factors_.begin();
    for (const auto& m : multiple.factors_) {
      while (f != factors_.end() && factor_less(*f, m)) ++f;
      std::uint32_t own = 0;
      if (f != factors_.end() && f->kind == m.kind && f->base == m.base) own = f->exponent;
      if (m.exponent > own) q *= pow_u64(m.base, m.exponent - own);
    }
    return q;
  }
  const mpz_class mv = multiple.value();
  const mpz_class tv = value();
  if (mpz_divisible_p(mv.get_mpz_t(), tv.get_mpz_t()) == 0) {
    throw InvalidArgument("denominator " + to_string() + " does not divide " +
                          multiple.to_string());
  }
  mpz_class q;
  mpz_divexact(q.get_mpz_t(), mv.get_mpz_t(), tv.get_mpz_t());
  return q;
}

mpz_class DenomTag::value() const {
  mpz_class v = 1;
  for (const auto& f : factors_) v *= pow_u64(f.base, f.exponent);
  return v;
}

std::uint32_t DenomTag::exponent_of(FactorKind kind, std::uint64_t base) const {
  for (const auto& f : factors_) {
    if (f.kind == kind && f.base == base) return f.exponent;
  }
  return 0;
}

std::uint32_t DenomTag::total_exponent(FactorKind kind) const {
  std::uint32_t sum = 0;
  for (const auto& f : factors_) {
    if (f.kind == kind) sum += f.exponent;
  }
  return sum;
}

std::string DenomTag::to_string() const {
  if (factors_.empty()) return "1";
  static constexpr const char* kNames[] = {"plain", "n", "inv_eps", "s", "log_eps"};
  std::ostringstream os;
  bool first = true;
  for (const auto& f : factors_) {
    if (!first) os << '*';
    first = false;
    os << kNames[static_cast<int>(f.kind)] << '(' << f.base << ')';
    if (f.exponent != 1) os << '^' << f.exponent;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// BoundedRational

BoundedRational::BoundedRational(mpz_class numerator, DenomTag denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (sgn(num_) < 0) throw InvalidArgument("weights must be nonnegative");
}

BoundedRational BoundedRational::from_rational(const mpq_class& q) {
  mpq_class c = q;
  c.canonicalize();
  if (sgn(c) < 0) throw InvalidArgument("weights must be nonnegative");
  const mpz_class& d = c.get_den();
  if (!d.fits_ulong_p()) throw InvalidArgument("denominator too large");
  return BoundedRational(c.get_num(), DenomTag::plain(d.get_ui()));
}

BoundedRational BoundedRational::parse(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
      throw InvalidArgument("malformed weight literal '" + std::string(text) + "'");
    }
    return mpz_class(std::string(s));
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return from_rational(mpq_class(parse_int(text)));
  mpz_class num = parse_int(text.substr(0, slash));
  mpz_class den = parse_int(text.substr(slash + 1));
  if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
  return from_rational(mpq_class(num, den));
}

mpq_class BoundedRational::value() const {
  mpq_class q(num_, den_.value());
  q.canonicalize();
  return q;
}

double BoundedRational::to_double() const {
  if (den_.is_one()) return num_.get_d();
  return value().get_d();
}

std::string BoundedRational::to_string() const {
  const mpq_class q = value();
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

BoundedRational BoundedRational::rebased(const DenomTag& target) const {
  return BoundedRational(num_ * den_.quotient_into(target), target);
}

BoundedRational operator+(const BoundedRational& a, const BoundedRational& b) {
  const DenomTag common = a.den_.common_multiple(b.den_);
  return BoundedRational(a.num_ * a.den_.quotient_into(common) + b.num_ * b.den_.quotient_into(common),
                         common);
}

BoundedRational operator-(const BoundedRational& a, const BoundedRational& b) {
  const DenomTag common = a.den_.common_multiple(b.den_);
  mpz_class n = a.num_ * a.den_.quotient_into(common) - b.num_ * b.den_.quotient_into(common);
  if (sgn(n) < 0) throw InvalidArgument("weight difference is negative");
  return BoundedRational(std::move(n), common);
}

bool operator==(const BoundedRational& a, const BoundedRational& b) {
  return a.value() == b.value();
}

std::strong_ordering operator<=>(const BoundedRational& a, const BoundedRational& b) {
  const int c = cmp(a.value(), b.value());
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::vector<BoundedRational> rebase_to_common_denominator(std::span<const BoundedRational> weights,
                                                          const DenomTag& target) {
  std::vector<BoundedRational> out;
  out.reserve(weights.size());
  for (const auto& w : weights) {
    if (!w.denominator().divides(target)) {
      throw InvalidArgument("target " + target.to_string() + " is not a multiple of " +
                            w.denominator().to_string());
    }
    out.push_back(w.rebased(target));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rounding

mpz_class floor_round(const mpz_class& a, const mpz_class& b, const mpz_class& d) {
  if (a < 1 || b < 1 || d < 1) throw InvalidArgument("floor_round requires a, b, d >= 1");
  mpz_class c;
  mpz_class ad = a * d;
  mpz_fdiv_q(c.get_mpz_t(), ad.get_mpz_t(), b.get_mpz_t());
  return c;
}

mpq_class round_fractional_part(const mpq_class& r, const mpz_class& d) {
  if (d < 1) throw InvalidArgument("round_fractional_part requires d >= 1");
  if (r < 1) throw InvalidArgument("round_fractional_part requires r >= 1");
  mpz_class whole;
  mpz_fdiv_q(whole.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  const mpq_class frac = r - mpq_class(whole);
  // frac = a/b in lowest terms; c = floor(a d / b)
  mpz_class c;
  mpz_class ad = frac.get_num() * d;
  mpz_fdiv_q(c.get_mpz_t(), ad.get_mpz_t(), frac.get_den_mpz_t());
  mpq_class out(whole * d + c, d);
  out.canonicalize();
  return out;
}

bool within_input_bound(const mpq_class& w, std::uint64_t n_p, unsigned c_exp) {
  const mpz_class cap = pow_u64(n_p, c_exp);
  return abs(w.get_num()) <= cap && w.get_den() <= cap;
}

RoundedInputWeight round_input_weight(const mpz_class& a, const mpz_class& b, std::uint64_t n_p,
                                      unsigned c_exp, double eps) {
  if (n_p < 2) throw InvalidArgument("round_input_weight requires n_p >= 2");
  if (b < 1 || a < 0) throw InvalidArgument("input weight must be a nonnegative fraction");
  const mpz_class cap = pow_u64(n_p, c_exp);
  if (a > cap || b > cap) {
    throw InvalidArgument("input weight " + a.get_str() + "/" + b.get_str() +
                          " exceeds the n_p^c bound " + cap.get_str());
  }
  RoundedInputWeight r;
  r.denominator = pow_u64(n_p, c_exp + 1) * mpz_class(static_cast<unsigned long>(inverse_eps_ceil(eps)));
  mpz_class ad = a * r.denominator;
  mpz_cdiv_q(r.numerator.get_mpz_t(), ad.get_mpz_t(), b.get_mpz_t());
  return r;
}

// ---------------------------------------------------------------------------
// Error budgets

mpq_class level_error_budget(unsigned level, const mpq_class& eps_s) {
  mpq_class base = 1 + eps_s;
  mpq_class acc = 1;
  unsigned e = level;
  while (e > 0) {
    if (e & 1U) acc *= base;
    base *= base;
    e >>= 1U;
  }
  acc -= 1;
  acc.canonicalize();
  return acc;
}

ErrorBudget make_error_budget(unsigned level, const mpq_class& per_level_eps) {
  return ErrorBudget{level, per_level_eps, level_error_budget(level, per_level_eps)};
}

mpq_class binomial_series(unsigned level, const mpq_class& alpha) {
  mpq_class sum = 0;
  mpq_class power = 1;
  mpz_class binom = 1;  // C(level, i), updated incrementally
  for (unsigned i = 1; i <= level; ++i) {
    binom = binom * (level - i + 1) / i;
    power *= alpha;
    sum += mpq_class(binom) * power;
  }
  sum.canonicalize();
  return sum;
}

bool binom_recurrence_check(unsigned level, const mpq_class& alpha) {
  if (level == 0) throw InvalidArgument("binom_recurrence_check requires level >= 1");
  mpq_class lhs = alpha + (1 + alpha) * binomial_series(level - 1, alpha);
  lhs.canonicalize();
  return lhs == binomial_series(level, alpha);
}

bool budget_bound_check(unsigned level, const mpq_class& alpha) {
  if (level == 0) throw InvalidArgument("budget_bound_check requires level >= 1");
  if (alpha < 0 || alpha > 1) throw InvalidArgument("budget_bound_check requires alpha in [0,1]");
  mpq_class per_level = alpha / (2 * level);
  per_level.canonicalize();
  return level_error_budget(level, per_level) <= alpha;
}

double compose_quality(double eps, double delta) { return eps + delta + eps * delta; }

// ---------------------------------------------------------------------------

unsigned ceil_log2(std::uint64_t n) {
  unsigned r = 0;
  std::uint64_t v = 1;
  while (v < n) {
    v <<= 1U;
    ++r;
  }
  return r;
}

std::uint64_t inverse_eps_ceil(double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  // Guard against 1/0.2 landing a hair above 5.
  return static_cast<std::uint64_t>(std::ceil(1.0 / eps - 1e-9));
}

std::uint64_t log_eps_ceil(std::uint64_t n_p, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const double v = std::ceil(std::log2(static_cast<double>(std::max<std::uint64_t>(n_p, 1))) / eps - 1e-9);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(v));
}

double log2_mpz(const mpz_class& v) {
  if (sgn(v) <= 0) return 0.0;
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log2(mant) + static_cast<double>(exp);
}

}  // namespace dyncore
