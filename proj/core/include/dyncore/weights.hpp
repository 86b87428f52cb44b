#pragma once

// Exact weight arithmetic with structured denominators.
//
// Every weight inside the dynamic structures is an integer numerator over a
// denominator that is a product of a few known factors: the phase base
// n_p^(c+1), ceil(1/eps), and one (threshold * ceil(log2(n_p)/eps)) pair per
// fractional-output reduction level. DenomTag keeps that product in factored
// form so that common multiples and divisibility are decided on the factor
// lists; the integer value is only formed when a numerator has to be rescaled
// or a weight leaves the library.

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dyncore {

enum class FactorKind : std::uint8_t {
  Plain = 0,      // arbitrary integer (parsed input, tests)
  PhaseBase = 1,  // n_p, appears with exponent c+1
  InvEps = 2,     // ceil(1/eps)
  Threshold = 3,  // s' of a fractional-output reduction
  LogEps = 4,     // ceil(log2(n_p)/eps)
};

struct DenomFactor {
  FactorKind kind;
  std::uint64_t base;
  std::uint32_t exponent;

  friend bool operator==(const DenomFactor&, const DenomFactor&) = default;
};

class DenomTag {
 public:
  DenomTag() = default;

  static DenomTag plain(std::uint64_t d);
  /// n_p^(c+1) * ceil(1/eps): the denominator of a freshly rounded input weight.
  static DenomTag leaf(std::uint64_t n_p, unsigned c_exp, std::uint64_t inv_eps);

  DenomTag& multiply(FactorKind kind, std::uint64_t base, std::uint32_t exponent = 1);
  DenomTag& multiply(const DenomTag& other);
  [[nodiscard]] DenomTag times(const DenomTag& other) const;

  /// Smallest tag (factor-wise maximum of exponents) that both tags divide.
  [[nodiscard]] DenomTag common_multiple(const DenomTag& other) const;

  /// Factor-list containment. Sufficient, not necessary, for divisibility.
  [[nodiscard]] bool divides_structurally(const DenomTag& multiple) const;
  /// Structural test first, integer test as fallback.
  [[nodiscard]] bool divides(const DenomTag& multiple) const;

  /// multiple.value() / value(); throws InvalidArgument if not exact.
  [[nodiscard]] mpz_class quotient_into(const DenomTag& multiple) const;

  [[nodiscard]] mpz_class value() const;
  [[nodiscard]] bool is_one() const { return factors_.empty(); }
  [[nodiscard]] std::uint32_t exponent_of(FactorKind kind, std::uint64_t base) const;
  [[nodiscard]] std::uint32_t total_exponent(FactorKind kind) const;
  [[nodiscard]] std::span<const DenomFactor> factors() const { return factors_; }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const DenomTag&, const DenomTag&) = default;

 private:
  // Sorted by (kind, base); no zero exponents, no base-1 factors.
  std::vector<DenomFactor> factors_;
};

/// Nonnegative rational numerator / denominator-tag.
class BoundedRational {
 public:
  BoundedRational() = default;
  BoundedRational(mpz_class numerator, DenomTag denominator);
  /// Exact value of a reduced fraction; denominator stored as a Plain factor.
  static BoundedRational from_rational(const mpq_class& q);
  /// Parses "NUM" or "NUM/DEN" (nonnegative).
  static BoundedRational parse(std::string_view text);

  [[nodiscard]] const mpz_class& numerator() const { return num_; }
  [[nodiscard]] const DenomTag& denominator() const { return den_; }
  [[nodiscard]] mpq_class value() const;
  [[nodiscard]] double to_double() const;
  /// Reduced "NUM/DEN", or "NUM" for integers.
  [[nodiscard]] std::string to_string() const;

  /// Same value over `target`; requires denominator().divides(target).
  [[nodiscard]] BoundedRational rebased(const DenomTag& target) const;

  friend BoundedRational operator+(const BoundedRational& a, const BoundedRational& b);
  /// Throws InvalidArgument if the result would be negative.
  friend BoundedRational operator-(const BoundedRational& a, const BoundedRational& b);
  friend bool operator==(const BoundedRational& a, const BoundedRational& b);
  friend std::strong_ordering operator<=>(const BoundedRational& a, const BoundedRational& b);

 private:
  mpz_class num_{0};
  DenomTag den_{};
};

/// Rescales every weight to the shared denominator `target` without changing
/// any value. Throws InvalidArgument if some denominator does not divide it.
std::vector<BoundedRational> rebase_to_common_denominator(std::span<const BoundedRational> weights,
                                                          const DenomTag& target);

// ---------------------------------------------------------------------------
// Rounding primitives

/// floor(a*d/b). For a,b,d >= 1 the result c satisfies a/b - a/d <= c/d <= a/b.
mpz_class floor_round(const mpz_class& a, const mpz_class& b, const mpz_class& d);

/// floor(r) + floor(frac(r) * d) / d, computed exactly. Requires r >= 1.
/// The result lies in [(1 - 1/d) r, r].
mpq_class round_fractional_part(const mpq_class& r, const mpz_class& d);

struct RoundedInputWeight {
  mpz_class numerator;    // f = ceil(a*d/b)
  mpz_class denominator;  // d = n_p^(c+1) * ceil(1/eps)
};

/// Rounds an input weight a/b (0 <= a, 1 <= b, both <= n_p^c) to f/d with
/// d = n_p^(c+1) ceil(1/eps) and f = ceil(a d / b). Relative error <= eps/n_p.
/// Throws InvalidArgument when a or b exceeds n_p^c.
RoundedInputWeight round_input_weight(const mpz_class& a, const mpz_class& b, std::uint64_t n_p,
                                      unsigned c_exp, double eps);

/// Whether a/b satisfies the input contract numerator, denominator <= n_p^c.
bool within_input_bound(const mpq_class& w, std::uint64_t n_p, unsigned c_exp);

// ---------------------------------------------------------------------------
// Error-budget algebra for multi-level coresets

struct ErrorBudget {
  unsigned level = 0;
  mpq_class per_level_eps{0};
  mpq_class accumulated{0};
};

ErrorBudget make_error_budget(unsigned level, const mpq_class& per_level_eps);

/// (1 + eps_s)^level - 1, i.e. sum_{i=1..level} C(level,i) eps_s^i.
mpq_class level_error_budget(unsigned level, const mpq_class& eps_s);

/// sum_{i=1..level} C(level, i) alpha^i, summed term by term.
mpq_class binomial_series(unsigned level, const mpq_class& alpha);

/// alpha + (1+alpha) * series(level-1, alpha) == series(level, alpha), exactly.
bool binom_recurrence_check(unsigned level, const mpq_class& alpha);

/// level_error_budget(level, alpha / (2 level)) <= alpha. Requires 0 <= alpha <= 1.
bool budget_bound_check(unsigned level, const mpq_class& alpha);

/// Quality of a delta-coreset of an eps-coreset: eps + delta + eps*delta.
double compose_quality(double eps, double delta);

// ---------------------------------------------------------------------------
// Small integer helpers shared by the schedules

/// ceil(log2(n)) for n >= 1; 0 for n <= 1.
unsigned ceil_log2(std::uint64_t n);
/// ceil(1/eps) for eps in (0, 1).
std::uint64_t inverse_eps_ceil(double eps);
/// ceil(log2(n_p) / eps), at least 1.
std::uint64_t log_eps_ceil(std::uint64_t n_p, double eps);
/// log2 of a positive big integer (double precision).
double log2_mpz(const mpz_class& v);

}  // namespace dyncore
