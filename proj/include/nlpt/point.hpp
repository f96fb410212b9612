#pragma once

#include <array>
#include <cmath>

namespace nlpt {

/// Coordinates in R^1 or R^2; unused components stay zero.
using Point = std::array<double, 2>;

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double t, const Point& a) { return {t * a[0], t * a[1]}; }

inline double norm(const Point& a) { return std::hypot(a[0], a[1]); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

}  // namespace nlpt
