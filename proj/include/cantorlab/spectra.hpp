#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cantorlab/surd.hpp"

namespace cantorlab {

/// Partial quotients a_1, a_2, ... of alpha = [0; a_1, a_2, ...].
class CFSequence {
 public:
  enum class Tail { Finite, Periodic, Streamed };
  using Generator = std::function<std::int64_t(std::size_t)>;  ///< index i -> a_{i+1}

  static CFSequence finite(std::vector<std::int64_t> digits);
  static CFSequence periodic(std::vector<std::int64_t> period, std::vector<std::int64_t> prefix = {});
  static CFSequence streamed(Generator generator, std::string label = "streamed");
  /// "2,1" as a purely periodic sequence.
  static CFSequence parse_period(const std::string& text);

  Tail tail() const noexcept { return tail_; }
  bool infinite() const noexcept { return tail_ != Tail::Finite; }
  const std::vector<std::int64_t>& prefix() const noexcept { return prefix_; }
  const std::vector<std::int64_t>& period() const noexcept { return period_; }
  /// a_{i+1}; throws InvalidArgument past the end of a finite sequence.
  std::int64_t digit(std::size_t i) const;
  std::vector<std::int64_t> first(std::size_t n) const;
  std::size_t size() const;  ///< finite length; SIZE_MAX when infinite
  std::string str() const;

 private:
  Tail tail_ = Tail::Finite;
  std::vector<std::int64_t> prefix_, period_;
  Generator generator_;
  std::string label_;
};

/// Exact partial quotients of a rational in (0, 1); stops when the expansion ends.
CFSequence cf_expand(const BigRational& x, std::size_t n);
/// Exact partial quotients of a quadratic irrational in (0, 1).
CFSequence cf_expand(const QuadraticSurd& x, std::size_t n);
/// Digits of a double read as the interval x +- half an ulp; throws
/// PrecisionExhausted when the endpoints disagree before n digits.
CFSequence cf_expand(double x, std::size_t n);
/// Number of digits the double determines unambiguously.
std::size_t certified_digit_count(double x);

struct Convergent {
  BigInt p, q;
};

/// p/q = [0; a_1, ..., a_n] by the continuant recursion; Overflow past max_bits.
Convergent cf_value(std::span<const std::int64_t> digits, unsigned max_bits = 1u << 16);

/// Exact value of [c_0; c_1, ..., c_{m-1}, c_0, c_1, ...] (purely periodic, c_0 >= 1).
QuadraticSurd periodic_value(std::span<const std::int64_t> period);

/// alpha = [0; prefix, period, period, ...] exactly.
QuadraticSurd sequence_value(const CFSequence& seq);

/// Exact limsup for an eventually periodic sequence: the largest
/// [c_i; c_{i+1}, ...] + [0; c_{i-1}, c_{i-2}, ...] over rotations of the period.
QuadraticSurd k_exact(std::span<const std::int64_t> period);

struct SpectrumValue {
  double value = 0;
  std::optional<QuadraticSurd> exact;
  std::vector<std::int64_t> witness;  ///< the period for periodic inputs, else the digits used
  int window = 0;
  double direct = 0;  ///< max of 1 / |q_n (q_n alpha - p_n)| over the last period of the window
  double tail = 0;    ///< max of [a_{n+1}; a_{n+2}, ...] + [0; a_n, ..., a_1] over the same indices
};

/// k(alpha) for infinite sequences, both estimators evaluated on n in
/// [window - span + 1, window] with span the period length (periodic) or
/// window / 2 (streamed). Throws EstimatorMismatch when they differ by more than 1e-9.
SpectrumValue k_alpha(const CFSequence& seq, int window = 64);

struct LagrangeConfig {
  std::size_t budget = 2'000'000;  ///< digit strings enumerated
  unsigned jobs = 1;
};

/// Exact k-values of periodic sequences with period <= max_period and digits
/// <= digit_bound, one per distinct value, sorted ascending.
std::vector<SpectrumValue> lagrange_sample(int max_period, int digit_bound, const LagrangeConfig& config = {});

/// Lexicographically smallest rotation.
std::vector<std::int64_t> minimal_rotation(std::span<const std::int64_t> word);

/// CSV rows `value,witness_digits,window` (digits joined by spaces).
void write_spectrum_csv(std::ostream& os, std::span<const SpectrumValue> values);

struct HalfLineHit {
  double target;
  std::int64_t marker;
  double sum_target;        ///< target - marker, inside C(4) + C(4)
  CFSequence witness;       ///< periodic: marker, x digits, reversed y digits
  double value;             ///< exact k of the witness
  double hit_distance;
};

/// Builds for each target t >= 6 a periodic witness whose k-value is close to
/// t: a marker digit A with t - A in C(4) + C(4), followed by depth-word
/// approximations of x and y (reversed) with x + y = t - A and digits <= 4.
std::vector<HalfLineHit> hall_halfline_probe(std::span<const double> targets, int depth);

}  // namespace cantorlab
