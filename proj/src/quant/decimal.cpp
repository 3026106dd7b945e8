#include <charconv>
#include <cstdlib>
#include <limits>

#include "gapbench/error.hpp"
#include "gapbench/quant.hpp"

namespace gapbench::quant {

namespace {

constexpr int kMaxScale = 18;

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::Parse, "decimal overflow");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::Parse, "decimal overflow");
  return out;
}

std::int64_t pow10(int n) {
  std::int64_t p = 1;
  for (int i = 0; i < n; ++i) p = checked_mul(p, 10);
  return p;
}

// Both mantissas expressed at the larger of the two scales.
std::pair<__int128, __int128> aligned(const Decimal& a, const Decimal& b) {
  __int128 x = a.mantissa();
  __int128 y = b.mantissa();
  for (int s = a.scale(); s < b.scale(); ++s) x *= 10;
  for (int s = b.scale(); s < a.scale(); ++s) y *= 10;
  return {x, y};
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  const std::string original(text);
  bool neg = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const auto int_part = text.substr(0, dot);
  const auto frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if ((int_part.empty() && frac_part.empty()) ||
      (dot != std::string_view::npos && frac_part.empty() && int_part.empty())) {
    throw Error(ErrorCode::Parse, "not a decimal number: '" + original + "'");
  }
  std::int64_t m = 0;
  for (const auto part : {int_part, frac_part}) {
    for (const char c : part) {
      if (c < '0' || c > '9') throw Error(ErrorCode::Parse, "not a decimal number: '" + original + "'");
      m = checked_add(checked_mul(m, 10), c - '0');
    }
  }
  if (frac_part.size() > static_cast<std::size_t>(kMaxScale)) {
    throw Error(ErrorCode::Parse, "too many fractional digits: '" + original + "'");
  }
  return {neg ? -m : m, static_cast<int>(frac_part.size())};
}

std::string Decimal::str() const {
  const bool neg = mantissa_ < 0;
  const auto magnitude = neg ? 0ULL - static_cast<unsigned long long>(mantissa_)
                            : static_cast<unsigned long long>(mantissa_);
  std::string digits = std::to_string(magnitude);
  if (scale_ > 0) {
    if (digits.size() <= static_cast<std::size_t>(scale_)) {
      digits.insert(0, static_cast<std::size_t>(scale_) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(scale_), ".");
  }
  return neg ? "-" + digits : digits;
}

double Decimal::to_double() const {
  const auto s = str();
  return std::strtod(s.c_str(), nullptr);
}

Decimal Decimal::shifted(int exponent) const {
  if (exponent >= 0) {
    if (scale_ >= exponent) return {mantissa_, scale_ - exponent};
    return {checked_mul(mantissa_, pow10(exponent - scale_)), 0};
  }
  if (scale_ - exponent > kMaxScale) throw Error(ErrorCode::Parse, "decimal scale overflow");
  return {mantissa_, scale_ - exponent};
}

Decimal Decimal::rounded(int digits) const {
  if (digits >= scale_) return *this;
  const auto p = pow10(scale_ - digits);
  std::int64_t q = mantissa_ / p;
  const std::int64_t r = mantissa_ % p;
  const std::int64_t twice = (r < 0 ? -r : r) * 2;
  if (twice >= p) q += mantissa_ < 0 ? -1 : 1;
  return {q, digits};
}

Decimal Decimal::trimmed() const {
  auto m = mantissa_;
  int s = scale_;
  while (s > 0 && m % 10 == 0) {
    m /= 10;
    --s;
  }
  return {m, s};
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  const auto [x, y] = aligned(a, b);
  const __int128 sum = x + y;
  if (sum > std::numeric_limits<std::int64_t>::max() || sum < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::Parse, "decimal overflow");
  }
  return {static_cast<std::int64_t>(sum), std::max(a.scale(), b.scale())};
}

Decimal operator-(const Decimal& a, const Decimal& b) { return a + Decimal(-b.mantissa(), b.scale()); }

Decimal Decimal::halved() const {
  if (mantissa_ % 2 == 0) return {mantissa_ / 2, scale_};
  return {checked_mul(mantissa_, 5), scale_ + 1};
}

bool operator==(const Decimal& a, const Decimal& b) {
  const auto [x, y] = aligned(a, b);
  return x == y;
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  const auto [x, y] = aligned(a, b);
  return x <=> y;
}

}  // namespace gapbench::quant
