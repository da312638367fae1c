#ifndef DIAGCERT_INTERVAL_HPP
#define DIAGCERT_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>

namespace diagcert {

// Closed interval [lo, hi] with outward rounding after every arithmetic op.
// Power is computed by repeated multiplication, so e.g. [-1,2]^2 = [-2,4],
// not the sharp [0,4]; tightness is bought by box splitting downstream.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {}
  static Interval point(double v) { return {v, v}; }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  Interval hull(const Interval& o) const {
    return {std::min(lo, o.lo), std::max(hi, o.hi)};
  }
};

namespace detail {
inline double down(double v) {
  if (!std::isfinite(v)) return v;
  return std::nextafter(v, -std::numeric_limits<double>::infinity());
}
inline double up(double v) {
  if (!std::isfinite(v)) return v;
  return std::nextafter(v, std::numeric_limits<double>::infinity());
}
}  // namespace detail

inline Interval outward(double lo, double hi) {
  return {detail::down(lo), detail::up(hi)};
}

inline Interval operator+(const Interval& a, const Interval& b) {
  return outward(a.lo + b.lo, a.hi + b.hi);
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return outward(a.lo - b.hi, a.hi - b.lo);
}

inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return outward(std::min(std::min(p1, p2), std::min(p3, p4)),
                 std::max(std::max(p1, p2), std::max(p3, p4)));
}

inline Interval operator*(double c, const Interval& a) {
  return c >= 0 ? outward(c * a.lo, c * a.hi) : outward(c * a.hi, c * a.lo);
}

inline Interval ipow(const Interval& a, unsigned e) {
  Interval r = Interval::point(1.0);
  for (unsigned i = 0; i < e; ++i) r = r * a;
  return r;
}

}  // namespace diagcert

#endif
