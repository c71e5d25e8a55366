#pragma once

#include <array>
#include <cmath>
#include <functional>

namespace ermakov::fd {

/// Central difference with two Richardson extrapolation levels, O(h^6).
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  auto central = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
  const double d1 = central(h);
  const double d2 = central(h / 2);
  const double d3 = central(h / 4);
  const double r1 = (4.0 * d2 - d1) / 3.0;
  const double r2 = (4.0 * d3 - d2) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

/// Richardson-extrapolated gradient of a scalar field in the plane.
inline std::array<double, 2> gradient_xy(const std::function<double(double, double)>& f,
                                         double x, double y, double h_rel = 5e-4) {
  const double hx = h_rel * (1.0 + std::abs(x));
  const double hy = h_rel * (1.0 + std::abs(y));
  return {derivative([&](double xx) { return f(xx, y); }, x, hx),
          derivative([&](double yy) { return f(x, yy); }, y, hy)};
}

}  // namespace ermakov::fd
