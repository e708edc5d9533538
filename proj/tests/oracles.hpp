#pragma once

// Reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tsdr/rational.hpp"
#include "tsdr/univariate.hpp"

namespace oracle {

using tsdr::Rational;

// Textbook Cox-de Boor recursion, exact, half-open spans.
inline Rational coxDeBoor(const std::vector<Rational>& t, int i, int p, const Rational& x) {
  if (p == 0) return (t[i] <= x && x < t[i + 1]) ? Rational(1) : Rational(0);
  Rational a(0), b(0);
  if (t[i + p] != t[i]) a = (x - t[i]) / (t[i + p] - t[i]) * coxDeBoor(t, i, p - 1, x);
  if (t[i + p + 1] != t[i + 1]) b = (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * coxDeBoor(t, i + 1, p - 1, x);
  return a + b;
}

// Random p-open knot vector with interior multiplicities <= maxMult.
inline tsdr::KnotVector randomKnotVector(std::mt19937& rng, int p, int maxMult) {
  std::uniform_int_distribution<int> count(1, 5), mult(1, maxMult), num(1, 15);
  std::vector<Rational> b{Rational(0)};
  std::vector<int> m{p + 1};
  const int k = count(rng);
  std::vector<int> picks;
  while (static_cast<int>(picks.size()) < k) {
    int v = num(rng);
    bool seen = false;
    for (int q : picks) seen = seen || q == v;
    if (!seen) picks.push_back(v);
  }
  std::sort(picks.begin(), picks.end());
  for (int v : picks) {
    b.emplace_back(v, 16);
    m.push_back(mult(rng));
  }
  b.emplace_back(1);
  m.push_back(p + 1);
  return tsdr::KnotVector(p, b, m);
}

inline double relErr(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace oracle
