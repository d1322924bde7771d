#include "curate/exact_sum.hpp"

#include <cmath>
#include <utility>

#include "curate/errors.hpp"

namespace curate {

void ExactSum::add(double x) {
  if (!std::isfinite(x)) throw DomainError("ExactSum: non-finite term");
  add_exact(x);
}

// Grow-expansion step: keeps partials non-overlapping, increasing magnitude.
void ExactSum::add_exact(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

void ExactSum::merge(const ExactSum& other) {
  for (double p : other.partials_) add_exact(p);
}

void ExactSum::negate() noexcept {
  for (double& p : partials_) p = -p;
}

void ExactSum::add_square(double x) {
  if (!std::isfinite(x)) throw DomainError("ExactSum: non-finite term");
  const double hi = x * x;
  add_exact(hi);
  add_exact(std::fma(x, x, -hi));
}

ExactSum ExactSum::times(double factor) const {
  ExactSum out;
  for (double p : partials_) {
    const double hi = p * factor;
    out.add_exact(hi);
    out.add_exact(std::fma(p, factor, -hi));
  }
  return out;
}

ExactSum ExactSum::times(const ExactSum& other) const {
  ExactSum out;
  for (double a : partials_) {
    for (double b : other.partials_) {
      const double hi = a * b;
      out.add_exact(hi);
      out.add_exact(std::fma(a, b, -hi));
    }
  }
  return out;
}

double ExactSum::value() const noexcept {
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Round half-even across the remaining partials.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

}  // namespace curate
