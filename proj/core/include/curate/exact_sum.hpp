#pragma once

#include <span>
#include <vector>

namespace curate {

// Exact floating-point summation (Shewchuk expansions, as in Python's
// math.fsum). The running value is held as non-overlapping partials, so the
// rounded result is the correctly rounded exact sum regardless of the order
// in which terms were added or accumulators merged.
class ExactSum {
 public:
  ExactSum() = default;

  // Non-finite inputs are rejected with DomainError.
  void add(double x);
  void merge(const ExactSum& other);
  void negate() noexcept;

  // Correctly rounded value of the exact sum.
  double value() const noexcept;
  std::span<const double> partials() const noexcept { return partials_; }

  // Exact products, still as expansions.
  ExactSum times(double factor) const;
  ExactSum times(const ExactSum& other) const;

  // Adds the exact square of x (x*x without rounding).
  void add_square(double x);

 private:
  void add_exact(double x);
  std::vector<double> partials_;
};

}  // namespace curate
