#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kfcl/distribution.hpp"
#include "kfcl/explicit_formula.hpp"

namespace kfcl {

/// r_gamma = 2|c_rho| for the catalog terms, plus an estimate of the
/// missing sum_{gamma > T} r_gamma^2.
struct ModelAmplitudes {
  std::vector<double> gammas;
  std::vector<double> r;
  double height = 0.0;
  double tail_sq = 0.0;     // central estimate
  double tail_sq_lo = 0.0;  // bracket
  double tail_sq_hi = 0.0;
  std::string tail_source;

  [[nodiscard]] std::size_t size() const { return r.size(); }
  /// sum r^2 over the catalog terms.
  [[nodiscard]] double sum_sq() const;
};

/// Tail from the beta_k extrapolation (fitted and expected decay exponents).
ModelAmplitudes model_amplitudes(std::span<const ResidueTerm> terms, unsigned k, double height,
                                 std::uint64_t modulus = 1);
/// Amplitudes given directly, with an explicit tail estimate.
ModelAmplitudes model_amplitudes(std::vector<double> r, double tail_sq = 0.0);

/// sum r sin(2 pi theta) for one angle vector.
double evaluate_x(const ModelAmplitudes& amps, std::span<const double> theta);

/// `count` draws of the truncated sum. Batches of fixed size get their own
/// generator, seeded by splitmix64 of (seed, batch), so the output depends
/// only on (amps, count, seed).
std::vector<double> sample_x(const ModelAmplitudes& amps, std::size_t count, std::uint64_t seed, unsigned threads = 1);

struct FourierValue {
  double value = 0.0;      // truncated * tail_factor
  double truncated = 0.0;  // prod J0(xi r)
  double tail_factor = 1.0;  // exp(-xi^2 tail_sq / 4), from log J0(z) ~ -z^2/4
};

FourierValue fourier_nu(const ModelAmplitudes& amps, double xi);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// mean cos(xi X) over the samples.
McEstimate mc_characteristic(std::span<const double> samples, double xi);

/// Fraction of samples >= v, with binomial standard error.
McEstimate tail_fraction(std::span<const double> samples, double v);

/// Draws `count` >= 10^4 samples and returns tail_fraction at v.
McEstimate tail_probability(const ModelAmplitudes& amps, double v, std::size_t count, std::uint64_t seed,
                            unsigned threads = 1);

struct MontgomeryBounds {
  std::size_t k_terms = 0;
  double head = 0.0;           // sum of the K largest r
  double tail_sq = 0.0;        // sum of the remaining r^2 incl. the extrapolated tail
  double upper_threshold = 0.0;  // 2 head
  double upper = 0.0;          // exp(-3/4 head^2 / tail_sq) bounds P(X >= 2 head)
  double lower_threshold = 0.0;  // head / 2
  double lower = 0.0;          // 2^-40 exp(-100 head^2 / tail_sq) bounds P(X >= head/2)
  double upper_hi = 0.0;       // same with the bracket ends of the tail estimate
  double lower_lo = 0.0;
  bool underflow = false;      // exponent infinite or below double range
};

/// Amplitudes sorted descending before splitting head and tail.
/// `include_extrapolated` adds the tail beyond T; off, the bounds describe
/// the truncated sum that sample_x draws from.
MontgomeryBounds montgomery_bounds(const ModelAmplitudes& amps, std::size_t k_terms, bool include_extrapolated = true);

struct LargeDeviationFit {
  unsigned k = 2;
  double power = 0.0;  // 2k/(k-1)
  std::vector<double> v;
  std::vector<double> prob;
  std::vector<double> neg_log_prob;
  double c = 0.0;       // slope of -log P against V^power
  double c_se = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool degenerate = false;
  std::string note;
};

/// Least squares of -log P_hat(V) on V^{2k/(k-1)} over grid points with
/// P_hat >= 10/count.
LargeDeviationFit large_deviation_fit(std::span<const double> samples, unsigned k, std::span<const double> v_grid,
                                      double support_bound);
LargeDeviationFit large_deviation_fit(const ModelAmplitudes& amps, unsigned k, std::span<const double> v_grid,
                                      std::size_t count, std::uint64_t seed, unsigned threads = 1);

struct ModelComparison {
  double ks = 0.0;
  double mean_empirical = 0.0;
  double mean_model = 0.0;
  double variance_empirical = 0.0;
  double variance_model = 0.0;
  double variance_predicted = 0.0;  // sum r^2 / 2 incl. tail
  double kurtosis_empirical = 0.0;
  double kurtosis_model = 0.0;
};

/// KS between the exact log-measure distribution and the sample histogram,
/// both on a common grid covering both supports with the empirical bin width.
ModelComparison empirical_vs_model(const EmpiricalDistribution& dist, const ModelAmplitudes& amps,
                                   std::span<const double> samples);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace kfcl
