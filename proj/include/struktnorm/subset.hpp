#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace struktnorm {

/// Thrown when an input violates a documented precondition (bad spec, bad
/// vector length, unsupported size). The CLI maps it to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a requested computation has no applicable method (for example
/// no SFM oracle for a large non-structured function).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative method fails to reach its certificate.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxGround = 64;
inline constexpr int kMaxExhaustive = 20;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nonnegative extended real: a finite value >= 0 or +inf.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v) || v < 0.0)
      throw InvalidArgument("extended real must be nonnegative or +inf, got " + std::to_string(v));
  }
  static constexpr ExtReal infinity() {
    ExtReal r;
    r.value_ = kInf;
    return r;
  }

  constexpr double value() const { return value_; }
  constexpr bool finite() const { return value_ != kInf; }
  constexpr bool is_inf() const { return value_ == kInf; }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    ExtReal r;
    r.value_ = a.value_ + b.value_;
    return r;
  }
  /// Differences are only defined when the subtrahend is finite.
  friend double operator-(ExtReal a, ExtReal b) {
    if (a.is_inf() && b.is_inf()) throw InvalidArgument("+inf - +inf is undefined");
    if (b.is_inf()) throw InvalidArgument("cannot subtract +inf from a finite value");
    return a.value_ - b.value_;
  }
  friend constexpr auto operator<=>(ExtReal a, ExtReal b) { return a.value_ <=> b.value_; }
  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.value_ == b.value_; }

 private:
  double value_ = 0.0;
};

/// Subset of the ground set {0,...,d-1} encoded as a bit mask.
class SubsetMask {
 public:
  constexpr SubsetMask() = default;
  constexpr explicit SubsetMask(std::uint64_t bits) : bits_(bits) {}

  static constexpr SubsetMask full(int d) {
    return SubsetMask(d >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << d) - 1));
  }
  static constexpr SubsetMask singleton(int i) { return SubsetMask(std::uint64_t{1} << i); }
  static SubsetMask from_indices(const std::vector<int>& zero_based) {
    SubsetMask m;
    for (int i : zero_based) {
      if (i < 0 || i >= kMaxGround) throw InvalidArgument("subset index out of range");
      m.bits_ |= std::uint64_t{1} << i;
    }
    return m;
  }
  /// Parses a sorted-or-not list of 1-based indices.
  static SubsetMask from_one_based(const std::vector<int>& one_based, int d) {
    SubsetMask m;
    for (int i : one_based) {
      if (i < 1 || i > d) throw InvalidArgument("subset index " + std::to_string(i) + " outside 1.." + std::to_string(d));
      m.bits_ |= std::uint64_t{1} << (i - 1);
    }
    return m;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1u; }
  constexpr bool subset_of(SubsetMask o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool within(int d) const { return subset_of(full(d)); }
  constexpr int min_index() const { return std::countr_zero(bits_); }
  constexpr int max_index() const { return 63 - std::countl_zero(bits_); }

  constexpr SubsetMask with(int i) const { return SubsetMask(bits_ | (std::uint64_t{1} << i)); }
  constexpr SubsetMask without(int i) const { return SubsetMask(bits_ & ~(std::uint64_t{1} << i)); }

  friend constexpr SubsetMask operator|(SubsetMask a, SubsetMask b) { return SubsetMask(a.bits_ | b.bits_); }
  friend constexpr SubsetMask operator&(SubsetMask a, SubsetMask b) { return SubsetMask(a.bits_ & b.bits_); }
  /// Set difference.
  friend constexpr SubsetMask operator-(SubsetMask a, SubsetMask b) { return SubsetMask(a.bits_ & ~b.bits_); }
  friend constexpr bool operator==(SubsetMask a, SubsetMask b) = default;
  friend constexpr auto operator<=>(SubsetMask a, SubsetMask b) = default;

  SubsetMask complement(int d) const { return full(d) - *this; }

  std::vector<int> indices() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }
  std::vector<int> one_based() const {
    auto v = indices();
    for (int& i : v) ++i;
    return v;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t b = bits_; b; b &= b - 1) f(std::countr_zero(b));
  }

 private:
  std::uint64_t bits_ = 0;
};

inline std::string to_string(SubsetMask m) {
  std::string s = "{";
  bool first = true;
  m.for_each([&](int i) {
    if (!first) s += ",";
    s += std::to_string(i + 1);
    first = false;
  });
  return s + "}";
}

/// Sum of a vector over a subset.
template <class Vec>
double subset_sum(const Vec& v, SubsetMask a) {
  double s = 0.0;
  a.for_each([&](int i) { s += v[i]; });
  return s;
}

}  // namespace struktnorm
