#include "cantorlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cantorlab/cantor_set.hpp"
#include "cantorlab/error.hpp"
#include "cantorlab/parallel.hpp"

namespace cantorlab {

namespace {

void check_digits(std::span<const std::int64_t> digits) {
  for (auto d : digits) {
    if (d < 1) throw Error(ErrorKind::InvalidArgument, "partial quotients must be positive");
  }
}

std::int64_t to_digit(const BigInt& a) {
  if (a > std::numeric_limits<std::int64_t>::max()) throw Error(ErrorKind::Overflow, "partial quotient too large");
  return a.convert_to<std::int64_t>();
}

BigInt floor_of(const BigRational& x) {
  BigInt n = boost::multiprecision::numerator(x), d = boost::multiprecision::denominator(x);
  BigInt q = n / d;
  if (n < 0 && q * d != n) --q;
  return q;
}

}  // namespace

CFSequence CFSequence::finite(std::vector<std::int64_t> digits) {
  check_digits(digits);
  CFSequence s;
  s.tail_ = Tail::Finite;
  s.prefix_ = std::move(digits);
  return s;
}

CFSequence CFSequence::periodic(std::vector<std::int64_t> period, std::vector<std::int64_t> prefix) {
  if (period.empty()) throw Error(ErrorKind::InvalidArgument, "period must be nonempty");
  check_digits(period);
  check_digits(prefix);
  CFSequence s;
  s.tail_ = Tail::Periodic;
  s.prefix_ = std::move(prefix);
  s.period_ = std::move(period);
  return s;
}

CFSequence CFSequence::streamed(Generator generator, std::string label) {
  if (!generator) throw Error(ErrorKind::InvalidArgument, "empty generator");
  CFSequence s;
  s.tail_ = Tail::Streamed;
  s.generator_ = std::move(generator);
  s.label_ = std::move(label);
  return s;
}

CFSequence CFSequence::parse_period(const std::string& text) {
  std::vector<std::int64_t> digits;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      digits.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad digit '" + item + "' in period '" + text + "'");
    }
  }
  return periodic(std::move(digits));
}

std::int64_t CFSequence::digit(std::size_t i) const {
  switch (tail_) {
    case Tail::Finite:
      if (i >= prefix_.size()) throw Error(ErrorKind::InvalidArgument, "index past the end of a finite sequence");
      return prefix_[i];
    case Tail::Periodic:
      if (i < prefix_.size()) return prefix_[i];
      return period_[(i - prefix_.size()) % period_.size()];
    case Tail::Streamed: {
      const std::int64_t d = generator_(i);
      if (d < 1) throw Error(ErrorKind::InvalidArgument, "generator produced a nonpositive digit");
      return d;
    }
  }
  return 0;
}

std::vector<std::int64_t> CFSequence::first(std::size_t n) const {
  std::vector<std::int64_t> out;
  const std::size_t m = std::min(n, size());
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(digit(i));
  return out;
}

std::size_t CFSequence::size() const {
  return tail_ == Tail::Finite ? prefix_.size() : std::numeric_limits<std::size_t>::max();
}

std::string CFSequence::str() const {
  auto join = [](const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  switch (tail_) {
    case Tail::Finite: return "[0; " + join(prefix_) + "]";
    case Tail::Periodic: return "[0; " + (prefix_.empty() ? "" : join(prefix_) + ",") + "(" + join(period_) + ")]";
    case Tail::Streamed: return "[0; <" + label_ + ">]";
  }
  return {};
}

CFSequence cf_expand(const BigRational& x0, std::size_t n) {
  BigRational x = x0 - BigRational(floor_of(x0));
  std::vector<std::int64_t> digits;
  while (digits.size() < n && x != 0) {
    const BigRational y = 1 / x;
    const BigInt a = floor_of(y);
    digits.push_back(to_digit(a));
    x = y - BigRational(a);
  }
  return CFSequence::finite(std::move(digits));
}

CFSequence cf_expand(const QuadraticSurd& x0, std::size_t n) {
  QuadraticSurd x = x0 - QuadraticSurd(BigRational(x0.floor()));
  std::vector<std::int64_t> digits;
  while (digits.size() < n && x.sign() != 0) {
    const QuadraticSurd y = QuadraticSurd(1) / x;
    const BigInt a = y.floor();
    digits.push_back(to_digit(a));
    x = y - QuadraticSurd(BigRational(a));
  }
  return CFSequence::finite(std::move(digits));
}

namespace {

// Expands both ends of [x - ulp/2, x + ulp/2] until their digits differ.
std::vector<std::int64_t> certified_digits(double x, std::size_t limit) {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "cannot expand a non-finite value");
  const double half_ulp = 0.5 * (std::nextafter(std::abs(x), INFINITY) - std::abs(x));
  BigRational lo = BigRational(x) - BigRational(half_ulp);
  BigRational hi = BigRational(x) + BigRational(half_ulp);
  std::vector<std::int64_t> digits;
  if (floor_of(lo) != floor_of(hi)) return digits;
  const BigRational whole(floor_of(lo));
  lo -= whole;
  hi -= whole;
  while (digits.size() < limit) {
    if (lo == 0 || hi == 0) break;
    const BigRational ylo = 1 / lo, yhi = 1 / hi;
    const BigInt a = floor_of(ylo), b = floor_of(yhi);
    if (a != b) break;
    digits.push_back(to_digit(a));
    lo = ylo - BigRational(a);
    hi = yhi - BigRational(b);
  }
  return digits;
}

}  // namespace

CFSequence cf_expand(double x, std::size_t n) {
  auto digits = certified_digits(x, n);
  if (digits.size() < n) {
    throw Error(ErrorKind::PrecisionExhausted, "double determines only " + std::to_string(digits.size()) +
                                                   " partial quotients, " + std::to_string(n) + " requested");
  }
  return CFSequence::finite(std::move(digits));
}

std::size_t certified_digit_count(double x) { return certified_digits(x, 4096).size(); }

Convergent cf_value(std::span<const std::int64_t> digits, unsigned max_bits) {
  check_digits(digits);
  BigInt p_prev = 1, q_prev = 0, p = 0, q = 1;
  for (auto a : digits) {
    BigInt pn = a * p + p_prev, qn = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(pn);
    q = std::move(qn);
    if (boost::multiprecision::msb(q) + 1 > max_bits) {
      throw Error(ErrorKind::Overflow, "convergent denominator exceeds " + std::to_string(max_bits) + " bits");
    }
  }
  return {p, q};
}

QuadraticSurd periodic_value(std::span<const std::int64_t> period) {
  if (period.empty()) throw Error(ErrorKind::InvalidArgument, "period must be nonempty");
  check_digits(period);
  // [[P, Q], [R, S]] = prod [[c, 1], [1, 0]]; the value solves R b^2 + (S - P) b - Q = 0.
  BigInt P = 1, Q = 0, R = 0, S = 1;
  for (auto c : period) {
    BigInt np = P * c + Q, nr = R * c + S;
    Q = P;
    S = R;
    P = np;
    R = nr;
  }
  const BigInt disc = (S - P) * (S - P) + 4 * Q * R;
  return QuadraticSurd(BigRational(P - S, 2 * R), BigRational(1, 2 * R), disc);
}

namespace {

// [d_0; d_1, ..., d_k, tail] for a finite digit list and an exact tail > 1.
QuadraticSurd prepend(std::span<const std::int64_t> digits, QuadraticSurd tail) {
  for (std::size_t i = digits.size(); i-- > 0;) tail = QuadraticSurd(digits[i]) + QuadraticSurd(1) / tail;
  return tail;
}

std::vector<std::int64_t> rotation(std::span<const std::int64_t> w, std::size_t start) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < w.size(); ++i) out.push_back(w[(start + i) % w.size()]);
  return out;
}

// [a_{n+1}; a_{n+2}, ...] exactly, for an eventually periodic sequence.
QuadraticSurd tail_value(const CFSequence& seq, std::size_t n) {
  const auto& pre = seq.prefix();
  const auto& per = seq.period();
  if (n >= pre.size()) return periodic_value(rotation(per, (n - pre.size()) % per.size()));
  return prepend(std::span(pre).subspan(n), periodic_value(per));
}

}  // namespace

QuadraticSurd sequence_value(const CFSequence& seq) {
  switch (seq.tail()) {
    case CFSequence::Tail::Finite: {
      auto c = cf_value(seq.prefix());
      return QuadraticSurd(BigRational(c.p, c.q));
    }
    case CFSequence::Tail::Periodic: return QuadraticSurd(1) / tail_value(seq, 0);
    case CFSequence::Tail::Streamed: break;
  }
  throw Error(ErrorKind::InvalidArgument, "streamed sequences have no exact value");
}

QuadraticSurd k_exact(std::span<const std::int64_t> period) {
  if (period.empty()) throw Error(ErrorKind::InvalidArgument, "period must be nonempty");
  const std::size_t m = period.size();
  std::optional<QuadraticSurd> best;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::int64_t> back;
    for (std::size_t j = 1; j <= m; ++j) back.push_back(period[(i + m - j) % m]);
    QuadraticSurd v = periodic_value(rotation(period, i)) + QuadraticSurd(1) / periodic_value(back);
    if (!best || v > *best) best = std::move(v);
  }
  return *best;
}

SpectrumValue k_alpha(const CFSequence& seq, int window) {
  if (window < 2) throw Error(ErrorKind::InvalidArgument, "window must be at least 2");
  if (!seq.infinite()) throw Error(ErrorKind::InvalidArgument, "k(alpha) needs an infinite sequence");
  const bool periodic = seq.tail() == CFSequence::Tail::Periodic;
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t span = periodic ? std::min(w, seq.period().size()) : std::max<std::size_t>(1, w / 2);
  const std::size_t first_n = w - span + 1;

  // Streamed inputs are cut off well past the window and evaluated as rationals.
  const std::size_t horizon = periodic ? w + 1 : w + 48;
  const auto digits = seq.first(horizon);
  QuadraticSurd alpha;
  std::vector<QuadraticSurd> truncated_tails;
  if (periodic) {
    alpha = sequence_value(seq);
  } else {
    auto c = cf_value(digits);
    alpha = QuadraticSurd(BigRational(c.p, c.q));
  }

  SpectrumValue out;
  out.window = window;
  out.witness = periodic ? seq.period() : std::vector<std::int64_t>(digits.begin(), digits.begin() + w);
  out.direct = -INFINITY;
  out.tail = -INFINITY;
  BigInt p_prev = 1, q_prev = 0, p = 0, q = 1;
  for (std::size_t n = 1; n <= w; ++n) {
    const std::int64_t a = digits[n - 1];
    BigInt pn = a * p + p_prev, qn = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(pn);
    q = std::move(qn);
    if (n < first_n) continue;
    const QuadraticSurd err = QuadraticSurd(BigRational(q)) * (QuadraticSurd(BigRational(q)) * alpha - QuadraticSurd(BigRational(p)));
    const double e = std::abs(err.to_double());
    if (e == 0) throw Error(ErrorKind::PrecisionExhausted, "convergent equals the truncated value");
    out.direct = std::max(out.direct, 1.0 / e);

    QuadraticSurd next;
    if (periodic) {
      next = tail_value(seq, n);
    } else {
      auto c = cf_value(std::span(digits).subspan(n));
      // [a_{n+1}; a_{n+2}, ..., a_N] = 1 / [0; a_{n+1}, ..., a_N]
      next = QuadraticSurd(BigRational(c.q, c.p));
    }
    const QuadraticSurd back(BigRational(q_prev, q));
    out.tail = std::max(out.tail, (next + back).to_double());
  }
  if (std::abs(out.direct - out.tail) > 1e-9) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "direct %.15g and tail %.15g disagree at window %d", out.direct, out.tail, window);
    throw Error(ErrorKind::EstimatorMismatch, buf);
  }
  if (periodic) {
    out.exact = k_exact(seq.period());
    out.value = out.exact->to_double();
  } else {
    out.value = out.tail;
  }
  return out;
}

std::vector<std::int64_t> minimal_rotation(std::span<const std::int64_t> word) {
  std::vector<std::int64_t> best(word.begin(), word.end());
  for (std::size_t i = 1; i < word.size(); ++i) {
    auto r = rotation(word, i);
    if (r < best) best = std::move(r);
  }
  return best;
}

std::vector<SpectrumValue> lagrange_sample(int max_period, int digit_bound, const LagrangeConfig& config) {
  if (max_period < 1 || digit_bound < 1) throw Error(ErrorKind::InvalidArgument, "period and digit bound must be positive");
  double total = 0;
  for (int len = 1; len <= max_period; ++len) total += std::pow(static_cast<double>(digit_bound), len);
  if (total > static_cast<double>(config.budget)) {
    throw Error(ErrorKind::BudgetExceeded, "lagrange sample would enumerate " + std::to_string(total) + " words");
  }
  // Necklaces: words equal to their minimal rotation and not a power of a shorter word.
  std::vector<std::vector<std::int64_t>> words;
  for (int len = 1; len <= max_period; ++len) {
    std::vector<std::int64_t> w(static_cast<std::size_t>(len), 1);
    for (;;) {
      bool primitive = true;
      for (int d = 1; d < len && primitive; ++d) {
        if (len % d != 0) continue;
        bool repeats = true;
        for (int i = d; i < len && repeats; ++i) repeats = w[i] == w[i - d];
        primitive = !repeats;
      }
      if (primitive && minimal_rotation(w) == w) words.push_back(w);
      int i = len - 1;
      while (i >= 0 && w[i] == digit_bound) w[i--] = 1;
      if (i < 0) break;
      ++w[i];
    }
  }
  std::vector<SpectrumValue> values(words.size());
  parallel_for(words.size(), config.jobs, [&](std::size_t i) {
    SpectrumValue& v = values[i];
    v.exact = k_exact(words[i]);
    v.value = v.exact->to_double();
    v.witness = words[i];
    v.window = static_cast<int>(words[i].size());
    v.direct = v.tail = v.value;
  });
  std::stable_sort(values.begin(), values.end(), [](const SpectrumValue& a, const SpectrumValue& b) {
    return *a.exact < *b.exact;
  });
  std::vector<SpectrumValue> unique;
  for (auto& v : values) {
    if (!unique.empty() && *unique.back().exact == *v.exact) continue;
    unique.push_back(std::move(v));
  }
  return unique;
}

void write_spectrum_csv(std::ostream& os, std::span<const SpectrumValue> values) {
  os << "value,witness_digits,window\n";
  char buf[40];
  for (const auto& v : values) {
    std::snprintf(buf, sizeof buf, "%.17g,", v.value);
    os << buf;
    for (std::size_t i = 0; i < v.witness.size(); ++i) os << (i ? " " : "") << v.witness[i];
    os << ',' << v.window << '\n';
  }
}

std::vector<HalfLineHit> hall_halfline_probe(std::span<const double> targets, int depth) {
  if (depth < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
  for (double t : targets) {
    if (!(t >= 6.0)) throw Error(ErrorKind::InvalidArgument, "half-line targets must be at least 6");
  }
  const RegularCantorSet c4 = gauss_cantor(4);
  const double lo = std::sqrt(2.0) - 1.0, hi = 4.0 * lo;
  std::vector<HalfLineHit> hits;
  for (double t : targets) {
    const std::int64_t marker = std::llround(t - 0.5 * (lo + hi));
    const double s = t - static_cast<double>(marker);

    // Depth-first search for nested construction intervals I, J with s in I + J.
    struct Frame {
      ConstructionChild a, b;
      int level;
    };
    auto central_first = [&](std::vector<Frame>& frames) {
      std::sort(frames.begin(), frames.end(), [&](const Frame& x, const Frame& y) {
        const double cx = 0.5 * (x.a.interval.lo + x.b.interval.lo + x.a.interval.hi + x.b.interval.hi);
        const double cy = 0.5 * (y.a.interval.lo + y.b.interval.lo + y.a.interval.hi + y.b.interval.hi);
        return std::abs(cx - s) > std::abs(cy - s);  // stack: most central on top
      });
    };
    auto holds = [&](const ConstructionChild& a, const ConstructionChild& b) {
      return a.interval.lo + b.interval.lo <= s + 1e-12 && s <= a.interval.hi + b.interval.hi + 1e-12;
    };
    std::vector<Frame> stack;
    for (const auto& a : construction_roots(c4)) {
      for (const auto& b : construction_roots(c4)) {
        if (holds(a, b)) stack.push_back({a, b, 0});
      }
    }
    central_first(stack);
    std::size_t visited = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> deepest;
    std::vector<std::vector<Frame>> pending{stack};
    std::vector<std::pair<std::int64_t, std::int64_t>> chosen;
    while (!pending.empty() && visited < 2'000'000) {
      auto& level = pending.back();
      if (level.empty()) {
        pending.pop_back();
        if (!chosen.empty()) chosen.pop_back();
        continue;
      }
      Frame f = std::move(level.back());
      level.pop_back();
      ++visited;
      chosen.push_back({f.a.symbol + 1, f.b.symbol + 1});
      if (chosen.size() > deepest.size()) deepest = chosen;
      if (f.level == depth) break;
      std::vector<Frame> next;
      for (const auto& a : construction_children(c4, f.a)) {
        for (const auto& b : construction_children(c4, f.b)) {
          if (holds(a, b)) next.push_back({a, b, f.level + 1});
        }
      }
      central_first(next);
      pending.push_back(std::move(next));
    }
    // Past the search budget the deepest partial witness is reported.

    std::vector<std::int64_t> period{marker};
    for (const auto& c : deepest) period.push_back(c.first);
    for (auto it = deepest.rbegin(); it != deepest.rend(); ++it) period.push_back(it->second);
    const double value = k_exact(period).to_double();
    hits.push_back({t, marker, s, CFSequence::periodic(period), value, std::abs(value - t)});
  }
  return hits;
}

}  // namespace cantorlab
