#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ermakov/errors.hpp"

namespace ermakov::quad {

struct Options {
  double abs_tol = 1e-10;
  std::size_t max_intervals = 4096;  // global subdivision budget
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (symmetric half).
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kKronrodW = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGaussW = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Cell {
  double lo = 0, hi = 0;
  double integral = 0;
  double error = 0;
};

template <class F>
Cell evaluate_cell(F&& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  if (!std::isfinite(fc))
    throw QuadratureError("quadrature: integrand is not finite at x = " +
                          std::to_string(center));
  double kronrod = kKronrodW[7] * fc;
  double gauss = kGaussW[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    if (!std::isfinite(f1) || !std::isfinite(f2))
      throw QuadratureError("quadrature: integrand is not finite at x = " +
                            std::to_string(!std::isfinite(f1) ? center - dx : center + dx));
    const double sum = f1 + f2;
    kronrod += kKronrodW[i] * sum;
    if (i % 2 == 1) gauss += kGaussW[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return Cell{lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod 7-15 quadrature with absolute tolerance.
/// The worst cell is bisected until the summed error estimate drops below
/// opt.abs_tol or the interval budget is exhausted. Endpoints are never
/// evaluated, so integrable endpoint singularities are tolerated.
inline double gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                            Options opt = {}) {
  if (a == b) return 0.0;
  if (a > b) return -gauss_kronrod(f, b, a, opt);

  const double span = b - a;
  const double min_width = 8.0 * std::numeric_limits<double>::epsilon() * span;

  std::vector<detail::Cell> cells;
  cells.reserve(64);
  cells.push_back(detail::evaluate_cell(f, a, b));
  double total_err = cells.front().error;

  while (total_err > opt.abs_tol) {
    if (cells.size() >= opt.max_intervals)
      throw QuadratureError("quadrature did not converge within " +
                            std::to_string(opt.max_intervals) + " subdivisions");
    std::size_t worst = 0;
    for (std::size_t i = 1; i < cells.size(); ++i)
      if (cells[i].error > cells[worst].error) worst = i;
    const detail::Cell cell = cells[worst];
    if (cell.hi - cell.lo < min_width)
      throw QuadratureError("quadrature stalled on an interval of width " +
                            std::to_string(cell.hi - cell.lo));
    const double mid = 0.5 * (cell.lo + cell.hi);
    detail::Cell left = detail::evaluate_cell(f, cell.lo, mid);
    detail::Cell right = detail::evaluate_cell(f, mid, cell.hi);
    total_err += left.error + right.error - cell.error;
    cells[worst] = left;
    cells.push_back(right);
  }

  double total = 0;
  for (const auto& c : cells) total += c.integral;
  return total;
}

}  // namespace ermakov::quad
