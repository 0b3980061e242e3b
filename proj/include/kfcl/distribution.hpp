#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kfcl/explicit_formula.hpp"
#include "kfcl/kfree.hpp"

namespace kfcl {

/// Histogram of phi(y) = e^{-y/2k} S_f(e^y) under dy/(Y - y0) on [y0, Y].
/// Within a bin the CDF is taken linear.
struct EmpiricalDistribution {
  std::vector<double> edges;   // bins + 1, strictly ascending
  std::vector<double> masses;  // sum to 1
  double y0 = 0.0;
  double y1 = 0.0;
  double measure = 0.0;        // Y - y0
  double support_lo = 0.0;     // observed range of phi
  double support_hi = 0.0;
  double mean = 0.0;           // exact integrals of phi^m, m = 1..4
  double second_moment = 0.0;
  double third_moment = 0.0;
  double fourth_moment = 0.0;

  [[nodiscard]] std::size_t bins() const { return masses.size(); }
  [[nodiscard]] double variance() const { return second_moment - mean * mean; }
  /// Central fourth moment over variance squared.
  [[nodiscard]] double kurtosis() const;
  [[nodiscard]] double cdf(double v) const;
};

/// Exact log-measure distribution: every constant piece of S_f maps to a
/// monotone arc of phi whose preimage of each bin is found by inverting
/// the exponential. Bins are `bins` uniform cells over the observed range.
EmpiricalDistribution exact_log_distribution(const StepSeries& series, double y0, double y1, std::size_t bins = 201,
                                             unsigned threads = 1);

/// Same, on caller-supplied bin edges. Values of phi outside the edges are
/// assigned to the first or last bin.
EmpiricalDistribution exact_log_distribution(const StepSeries& series, double y0, double y1,
                                             std::span<const double> edges, unsigned threads = 1);

/// Histogram of samples on the given edges, linear CDF within bins. Samples
/// outside the edges go to the end bins.
EmpiricalDistribution histogram_from_samples(std::span<const double> samples, std::span<const double> edges);

/// Measure-weighted combination of distributions sharing the same edges.
EmpiricalDistribution mix_distributions(std::span<const EmpiricalDistribution> parts);

/// sup |F1 - F2| over the union of both edge sets.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// int_a^b (S_f(x)/x^{1/2k})^2 dx/x, closed form per piece. Default a = 2.
double variance_integral(const StepSeries& series, double x_hi, double x_lo = 2.0);

struct BetaEstimate {
  std::vector<double> heights;       // gamma of each term
  std::vector<double> partial_sums;  // 2 sum_{gamma' <= gamma} |c|^2
  double partial = 0.0;
  double decay_exponent = 0.0;       // fitted a in |c| ~ A gamma^{-a}
  double expected_exponent = 0.0;    // 1/2 + 1/2k
  double tail = 0.0;                 // from the fitted exponent
  double tail_bound = 0.0;           // from the expected exponent
  double estimate = 0.0;             // partial + tail
  double uncertainty = 0.0;          // |tail_bound - tail|
  bool converging = false;           // last-quarter increments shrink and the tail exponent exceeds 1/2
};

/// 2 sum |c_rho|^2 with a tail integrated against the zero density main term.
/// The amplitude of the tail model is matched to the upper half of the terms.
BetaEstimate beta_k(std::span<const ResidueTerm> terms, unsigned k, std::uint64_t modulus = 1);

struct GrowthReport {
  double sup_ratio = 0.0;
  double argmax = 0.0;
  double exceed_log_measure = 0.0;  // int over {|S| >= C g(x)} of dx/x
  double threshold = 0.0;           // C
  double eps = 0.0;
  double x_hi = 0.0;
};

/// g(x) = x^{1/2k} (log x)^{1/2 + eps} on [e^2, X].
GrowthReport growth_envelope(const StepSeries& series, double c, double eps, double x_hi);

/// Smallest C with exceedance log-measure below `target` (bisection on C).
double growth_threshold_for_measure(const StepSeries& series, double eps, double x_hi, double target = 0.01);

/// x^{1/2k} (log log x)^{1/2 - 1/2k} (log log log x)^{1/4k}, x > 16.
double conjecture_normalizer(double x, unsigned k);

struct NormalizerSweep {
  double max_ratio = 0.0;  // of S_f / normalizer
  double argmax = 0.0;
  double min_ratio = 0.0;
  double argmin = 0.0;
  std::vector<double> checkpoints;  // 10^j
  std::vector<double> running_abs_max;
};

NormalizerSweep normalizer_sweep(const StepSeries& series, double x_hi);

}  // namespace kfcl
