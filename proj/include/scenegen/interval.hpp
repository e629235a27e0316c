#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace scenegen {

/// Three-valued constraint outcome. The ordering False < Maybe < True is
/// what makes meet/join plain min/max.
enum class Tribool : std::uint8_t { False = 0, Maybe = 1, True = 2 };

/// Closed real interval [lo, hi] with lo <= hi.
///
/// Arithmetic is plain endpoint arithmetic with no directed rounding. An empty
/// interval is never representable; operations that can produce emptiness
/// return std::optional instead.
template <std::floating_point T>
class BasicInterval {
 public:
  using value_type = T;

  constexpr BasicInterval() = default;
  constexpr BasicInterval(T point) : lo_(point), hi_(point) {}  // NOLINT: points convert implicitly
  constexpr BasicInterval(T lo, T hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) {
      throw std::invalid_argument("interval bounds out of order: [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
    }
  }

  constexpr T lo() const { return lo_; }
  constexpr T hi() const { return hi_; }
  constexpr T width() const { return hi_ - lo_; }
  constexpr T midpoint() const { return lo_ + (hi_ - lo_) / 2; }
  constexpr bool is_point() const { return lo_ == hi_; }

  constexpr bool contains(T v) const { return lo_ <= v && v <= hi_; }
  constexpr bool contains(const BasicInterval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }

  friend constexpr bool operator==(const BasicInterval&, const BasicInterval&) = default;

 private:
  T lo_ = 0;
  T hi_ = 0;
};

using Interval = BasicInterval<double>;

template <std::floating_point T>
std::ostream& operator<<(std::ostream& os, const BasicInterval<T>& a) {
  return os << '[' << a.lo() << ", " << a.hi() << ']';
}

// ---------------------------------------------------------------------------
// Arithmetic

template <std::floating_point T>
constexpr BasicInterval<T> add(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return {a.lo() + b.lo(), a.hi() + b.hi()};
}

template <std::floating_point T>
constexpr BasicInterval<T> sub(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return {a.lo() - b.hi(), a.hi() - b.lo()};
}

/// {k*x + c : x in a}
template <std::floating_point T>
constexpr BasicInterval<T> scale_shift(const BasicInterval<T>& a, T k, T c) {
  T l = k * a.lo() + c;
  T h = k * a.hi() + c;
  if (k < 0) std::swap(l, h);
  return {l, h};
}

template <std::floating_point T>
constexpr BasicInterval<T> operator+(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return add(a, b);
}
template <std::floating_point T>
constexpr BasicInterval<T> operator-(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return sub(a, b);
}
template <std::floating_point T>
constexpr BasicInterval<T> operator+(const BasicInterval<T>& a, T c) {
  return scale_shift(a, T(1), c);
}
template <std::floating_point T>
constexpr BasicInterval<T> operator-(const BasicInterval<T>& a, T c) {
  return scale_shift(a, T(1), -c);
}
template <std::floating_point T>
constexpr BasicInterval<T> operator-(const BasicInterval<T>& a) {
  return scale_shift(a, T(-1), T(0));
}

// ---------------------------------------------------------------------------
// Set operations

template <std::floating_point T>
constexpr std::optional<BasicInterval<T>> intersect(const BasicInterval<T>& a,
                                                    const BasicInterval<T>& b) {
  T l = std::max(a.lo(), b.lo());
  T h = std::min(a.hi(), b.hi());
  if (l > h) return std::nullopt;
  return BasicInterval<T>(l, h);
}

template <std::floating_point T>
constexpr BasicInterval<T> hull(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

template <std::floating_point T>
constexpr T width(const BasicInterval<T>& a) {
  return a.width();
}

template <std::floating_point T>
constexpr T midpoint(const BasicInterval<T>& a) {
  return a.midpoint();
}

/// Halves at the midpoint; the halves share the midpoint and cover `a` exactly.
template <std::floating_point T>
constexpr std::pair<BasicInterval<T>, BasicInterval<T>> split(const BasicInterval<T>& a) {
  T m = a.midpoint();
  return {BasicInterval<T>(a.lo(), m), BasicInterval<T>(m, a.hi())};
}

// ---------------------------------------------------------------------------
// Comparisons

/// a < b. Definitely false when b.hi <= a.lo, definitely true when a.hi < b.lo.
template <std::floating_point T>
constexpr Tribool lt(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  if (b.hi() <= a.lo()) return Tribool::False;
  if (a.hi() < b.lo()) return Tribool::True;
  return Tribool::Maybe;
}

/// a <= b. Definitely true when a.hi <= b.lo, definitely false when b.hi < a.lo.
template <std::floating_point T>
constexpr Tribool le(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  if (a.hi() <= b.lo()) return Tribool::True;
  if (b.hi() < a.lo()) return Tribool::False;
  return Tribool::Maybe;
}

template <std::floating_point T>
constexpr Tribool gt(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return lt(b, a);
}

template <std::floating_point T>
constexpr Tribool ge(const BasicInterval<T>& a, const BasicInterval<T>& b) {
  return le(b, a);
}

inline constexpr double kDefaultEqualityTolerance = 0.2;

/// |x - y| <= eps for x in a, y in b.
template <std::floating_point T>
constexpr Tribool eq_tol(const BasicInterval<T>& a, const BasicInterval<T>& b,
                         T eps = T(kDefaultEqualityTolerance)) {
  const T gap = std::max(a.lo() - b.hi(), b.lo() - a.hi());  // > 0 when disjoint
  if (gap > eps) return Tribool::False;
  const T spread = std::max(a.hi() - b.lo(), b.hi() - a.lo());
  if (spread <= eps) return Tribool::True;
  return Tribool::Maybe;
}

// ---------------------------------------------------------------------------
// Kleene logic

constexpr Tribool meet(Tribool a, Tribool b) { return std::min(a, b); }
constexpr Tribool join(Tribool a, Tribool b) { return std::max(a, b); }
constexpr Tribool negate(Tribool a) {
  switch (a) {
    case Tribool::False: return Tribool::True;
    case Tribool::True: return Tribool::False;
    default: return Tribool::Maybe;
  }
}

constexpr Tribool operator&&(Tribool a, Tribool b) { return meet(a, b); }
constexpr Tribool operator||(Tribool a, Tribool b) { return join(a, b); }
constexpr Tribool operator!(Tribool a) { return negate(a); }

constexpr Tribool from_bool(bool b) { return b ? Tribool::True : Tribool::False; }

/// Logical-interval encoding: False=[0,0], Maybe=[0,1], True=[1,1].
constexpr Interval encode(Tribool t) {
  switch (t) {
    case Tribool::False: return {0.0, 0.0};
    case Tribool::True: return {1.0, 1.0};
    default: return {0.0, 1.0};
  }
}

inline Tribool decode(const Interval& a) {
  if (a == Interval(0.0, 0.0)) return Tribool::False;
  if (a == Interval(1.0, 1.0)) return Tribool::True;
  if (a == Interval(0.0, 1.0)) return Tribool::Maybe;
  throw std::invalid_argument("not a logical interval");
}

inline const char* to_string(Tribool t) {
  switch (t) {
    case Tribool::False: return "false";
    case Tribool::True: return "true";
    default: return "maybe";
  }
}

inline std::ostream& operator<<(std::ostream& os, Tribool t) { return os << to_string(t); }

}  // namespace scenegen
