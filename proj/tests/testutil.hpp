#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ermakov/expr.hpp"

namespace testutil {

inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng());
}

/// Central difference with step h = 1e-5 and one Richardson level.
inline double richardson_fd(const std::function<double(double)>& f, double x,
                            double h = 1e-5) {
  auto central = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

struct CorpusEntry {
  std::string src;
  double lo, hi;  // sampling range free of singularities
};

/// Expressions in u exercising every node kind, with safe sampling ranges.
inline const std::vector<CorpusEntry>& expression_corpus() {
  static const std::vector<CorpusEntry> corpus = {
      {"u^(-2)/2", 0.4, 2.5},
      {"sin(u)*exp(u)", -2.0, 2.0},
      {"atan(u)", -3.0, 3.0},
      {"sqrt(u^2+1)", -2.0, 2.0},
      {"tanh(u)", -2.0, 2.0},
      {"log(u)", 0.3, 3.0},
      {"u^3 - 2*u + 1", -2.0, 2.0},
      {"1/(1+u^2)", -3.0, 3.0},
      {"cos(u)/u", 0.3, 1.2},
      {"atanh(u/2)", -1.5, 1.5},
  };
  return corpus;
}

}  // namespace testutil
