#include "kfcl/limodel.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

#include "kfcl/errors.hpp"
#include "kfcl/numerics.hpp"
#include "kfcl/special.hpp"

namespace kfcl {

namespace {

constexpr std::size_t kBatch = 8192;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double ModelAmplitudes::sum_sq() const {
  CompensatedSum s;
  for (double v : r) s.add(v * v);
  return s.value();
}

ModelAmplitudes model_amplitudes(std::span<const ResidueTerm> terms, unsigned k, double height,
                                 std::uint64_t modulus) {
  ModelAmplitudes a;
  a.height = height;
  for (const auto& t : terms) {
    const double r = 2.0 * std::abs(t.coeff);
    if (!(r > 0.0)) throw DataError("model amplitudes: zero coefficient at gamma = " + std::to_string(t.gamma));
    a.gammas.push_back(t.gamma);
    a.r.push_back(r);
  }
  const auto beta = beta_k(terms, k, modulus);
  if (beta.tail > 0.0) {
    // r^2 = 4|c|^2 while beta counts 2|c|^2
    a.tail_sq = 2.0 * beta.tail;
    a.tail_sq_lo = 2.0 * std::min(beta.tail, beta.tail_bound);
    a.tail_sq_hi = 2.0 * std::max(beta.tail, beta.tail_bound);
    a.tail_source = "decay fit extrapolated against the zero density main term";
  } else {
    a.tail_source = "none (too few terms to fit)";
  }
  return a;
}

ModelAmplitudes model_amplitudes(std::vector<double> r, double tail_sq) {
  for (double v : r) {
    if (!(v > 0.0)) throw ValidationError("model amplitudes: amplitudes must be positive");
  }
  if (!(tail_sq >= 0.0)) throw ValidationError("model amplitudes: tail estimate must be non-negative");
  ModelAmplitudes a;
  a.r = std::move(r);
  a.tail_sq = a.tail_sq_lo = a.tail_sq_hi = tail_sq;
  a.tail_source = "given";
  return a;
}

double evaluate_x(const ModelAmplitudes& amps, std::span<const double> theta) {
  if (theta.size() != amps.size()) throw ValidationError("evaluate_x: one angle per amplitude required");
  CompensatedSum s;
  for (std::size_t i = 0; i < theta.size(); ++i) s.add(amps.r[i] * std::sin(kTwoPi * theta[i]));
  return s.value();
}

std::vector<double> sample_x(const ModelAmplitudes& amps, std::size_t count, std::uint64_t seed, unsigned threads) {
  if (count == 0) throw ValidationError("sample_x: count must be >= 1");
  std::vector<double> out(count);
  const std::size_t batches = (count + kBatch - 1) / kBatch;
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < batches; b += stride) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(b)));
      const std::size_t end = std::min(count, (b + 1) * kBatch);
      for (std::size_t i = b * kBatch; i < end; ++i) {
        double x = 0.0;
        for (double r : amps.r) {
          const double theta = static_cast<double>(rng() >> 11) * 0x1p-53;
          x += r * std::sin(kTwoPi * theta);
        }
        out[i] = x;
      }
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(batches)));
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, run, t, threads));
    for (auto& j : jobs) j.get();
  }
  return out;
}

FourierValue fourier_nu(const ModelAmplitudes& amps, double xi) {
  FourierValue f;
  double prod = 1.0;
  for (double r : amps.r) prod *= bessel_j0(xi * r);
  f.truncated = prod;
  f.tail_factor = std::exp(-xi * xi * amps.tail_sq / 4.0);
  f.value = f.truncated * f.tail_factor;
  return f;
}

McEstimate mc_characteristic(std::span<const double> samples, double xi) {
  if (samples.size() < 2) throw ValidationError("mc_characteristic: need at least two samples");
  CompensatedSum s1;
  CompensatedSum s2;
  for (double x : samples) {
    const double c = std::cos(xi * x);
    s1.add(c);
    s2.add(c * c);
  }
  const auto n = static_cast<double>(samples.size());
  const double mean = s1.value() / n;
  const double var = std::max(0.0, s2.value() / n - mean * mean) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

McEstimate tail_fraction(std::span<const double> samples, double v) {
  if (samples.empty()) throw ValidationError("tail_fraction: no samples");
  const auto hits = std::count_if(samples.begin(), samples.end(), [v](double x) { return x >= v; });
  const auto n = static_cast<double>(samples.size());
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

McEstimate tail_probability(const ModelAmplitudes& amps, double v, std::size_t count, std::uint64_t seed,
                            unsigned threads) {
  if (count < 10000) throw ValidationError("tail_probability: count must be >= 10^4");
  const auto samples = sample_x(amps, count, seed, threads);
  return tail_fraction(samples, v);
}

MontgomeryBounds montgomery_bounds(const ModelAmplitudes& amps, std::size_t k_terms, bool include_extrapolated) {
  if (k_terms < 1 || k_terms > amps.size()) {
    throw ValidationError("montgomery_bounds: K = " + std::to_string(k_terms) + " outside 1.." + std::to_string(amps.size()));
  }
  auto sorted = amps.r;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  MontgomeryBounds b;
  b.k_terms = k_terms;
  CompensatedSum head;
  CompensatedSum rest;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i < k_terms) {
      head.add(sorted[i]);
    } else {
      rest.add(sorted[i] * sorted[i]);
    }
  }
  b.head = head.value();
  const double in_catalog = rest.value();
  b.tail_sq = in_catalog + (include_extrapolated ? amps.tail_sq : 0.0);
  const double tail_lo = in_catalog + (include_extrapolated ? amps.tail_sq_lo : 0.0);
  const double tail_hi = in_catalog + (include_extrapolated ? amps.tail_sq_hi : 0.0);
  b.upper_threshold = 2.0 * b.head;
  b.lower_threshold = 0.5 * b.head;
  const double h2 = b.head * b.head;
  auto expo = [](double a) { return a == -INFINITY ? 0.0 : std::exp(a); };
  auto ratio = [h2](double t) { return t > 0.0 ? h2 / t : INFINITY; };
  b.upper = expo(-0.75 * ratio(b.tail_sq));
  b.upper_hi = expo(-0.75 * ratio(tail_hi));
  b.lower = std::ldexp(expo(-100.0 * ratio(b.tail_sq)), -40);
  b.lower_lo = std::ldexp(expo(-100.0 * ratio(tail_lo)), -40);
  b.underflow = b.upper == 0.0 || b.lower == 0.0;
  return b;
}

LargeDeviationFit large_deviation_fit(std::span<const double> samples, unsigned k, std::span<const double> v_grid,
                                      double support_bound) {
  if (k < 2) throw ValidationError("large_deviation_fit: k must be >= 2");
  LargeDeviationFit f;
  f.k = k;
  f.power = 2.0 * k / (k - 1.0);
  f.note = "consistency probe, not asymptotics";
  const double floor = 10.0 / static_cast<double>(samples.size());
  for (double v : v_grid) {
    if (!(v > 0.0)) continue;
    const double p = tail_fraction(samples, v).value;
    if (p < floor) continue;
    f.v.push_back(v);
    f.prob.push_back(p);
    f.neg_log_prob.push_back(-std::log(p));
  }
  if (f.v.empty()) throw DataError("large_deviation_fit: no grid point has P >= 10/count");
  if (f.v.size() >= 3) {
    std::vector<double> xs;
    for (double v : f.v) xs.push_back(std::pow(v, f.power));
    const auto fit = fit_line(xs, f.neg_log_prob);
    f.intercept = fit.coefficients[0];
    f.c = fit.coefficients[1];
    f.c_se = fit.std_errors[1];
    f.r_squared = fit.r_squared;
  }
  const double vmax = *std::max_element(f.v.begin(), f.v.end());
  if (f.v.size() < 3) {
    f.degenerate = true;
    f.note += "; degenerate: fewer than three resolvable grid points";
  } else if (2.0 * vmax >= support_bound) {
    f.degenerate = true;
    f.note += "; degenerate: grid reaches the hard support bound sum r";
  } else if (!(f.c > 0.0)) {
    f.degenerate = true;
    f.note += "; degenerate: non-positive slope";
  }
  return f;
}

LargeDeviationFit large_deviation_fit(const ModelAmplitudes& amps, unsigned k, std::span<const double> v_grid,
                                      std::size_t count, std::uint64_t seed, unsigned threads) {
  const auto samples = sample_x(amps, count, seed, threads);
  CompensatedSum total;
  for (double r : amps.r) total.add(r);
  return large_deviation_fit(samples, k, v_grid, total.value());
}

ModelComparison empirical_vs_model(const EmpiricalDistribution& dist, const ModelAmplitudes& amps,
                                   std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("empirical_vs_model: no samples");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double width = (dist.edges.back() - dist.edges.front()) / static_cast<double>(dist.bins());
  const double lo = std::min(dist.edges.front(), *mn);
  const double hi = std::max(dist.edges.back(), *mx);
  const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  std::vector<double> edges(bins + 1);
  for (std::size_t j = 0; j <= bins; ++j) edges[j] = lo + width * static_cast<double>(j);
  edges.back() = std::max(edges.back(), hi);
  const auto model = histogram_from_samples(samples, edges);
  ModelComparison c;
  c.ks = ks_distance(dist, model);
  c.mean_empirical = dist.mean;
  c.mean_model = model.mean;
  c.variance_empirical = dist.variance();
  c.variance_model = model.variance();
  c.variance_predicted = (amps.sum_sq() + amps.tail_sq) / 2.0;
  c.kurtosis_empirical = dist.kurtosis();
  c.kurtosis_model = model.kurtosis();
  return c;
}

}  // namespace kfcl
