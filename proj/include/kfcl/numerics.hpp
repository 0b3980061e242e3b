#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kfcl {

/// Neumaier-compensated accumulator. Error stays O(eps) independent of the
/// number of terms, which makes sums insensitive to term ordering.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  CompensatedSum& operator+=(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
    return *this;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(std::complex<double> z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  CompensatedComplexSum& operator+=(std::complex<double> z) {
    add(z);
    return *this;
  }
  [[nodiscard]] std::complex<double> value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

/// Sums f(i) for i in [0, count) with compensated partial sums over fixed
/// chunks, combined pairwise in chunk order. The result depends only on
/// (count, chunk), never on the number of worker threads.
double deterministic_sum(std::size_t count, const std::function<double(std::size_t)>& f,
                         unsigned threads = 1, std::size_t chunk = 4096);

/// Result of an ordinary least-squares fit y ~ X beta.
struct LinearFit {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  double residual_rms = 0.0;
  double r_squared = 0.0;
};

/// Least squares with the design matrix given row-major (rows x cols).
LinearFit least_squares(std::span<const double> design, std::size_t cols, std::span<const double> y);

/// Convenience: y ~ a + b x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Non-negative least squares (Lawson-Hanson active set), row-major design.
std::vector<double> nnls(std::span<const double> design, std::size_t cols, std::span<const double> y);

/// Warning sink used by the analytic kernel (pole proximity etc.).
void set_warning_sink(std::function<void(std::string_view)> sink);
void warn(std::string_view message);

/// 64-bit FNV-1a over a byte string. Used for cache keys and config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace kfcl
