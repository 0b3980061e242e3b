#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "kfcl/distribution.hpp"
#include "kfcl/errors.hpp"

using namespace kfcl;

namespace {

const StepSeries& real_series() {
  static const StepSeries s = [] {
    SummandSpec spec(2, DirichletCharacter::from_kronecker(-3), false);
    return cumulative_series(spec, KFreeSieve::build(2, 1'000'000), 1'000'000);
  }();
  return s;
}

StepSeries constant_series(std::int64_t value, std::uint64_t limit) { return StepSeries(2, limit, {1}, {value}); }

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(LogDistribution, ConstantSeriesClosedForm) {
  const auto s = constant_series(1, 1'000'000);
  const double y0 = 1.0;
  const double y1 = 5.0;
  const auto d = exact_log_distribution(s, y0, y1, 17);
  EXPECT_NEAR(d.support_lo, std::exp(-y1 / 4.0), 1e-15);
  EXPECT_NEAR(d.support_hi, std::exp(-y0 / 4.0), 1e-15);
  for (std::size_t j = 0; j < d.bins(); ++j) {
    // phi = e^{-y/4} in [u, v] exactly when y in [4 log(1/v), 4 log(1/u)]
    const double expected = 4.0 * std::log(d.edges[j + 1] / d.edges[j]) / (y1 - y0);
    EXPECT_NEAR(d.masses[j], expected, 1e-13) << j;
  }
  EXPECT_NEAR(d.mean, 4.0 * (std::exp(-y0 / 4.0) - std::exp(-y1 / 4.0)) / (y1 - y0), 1e-15);
}

TEST(LogDistribution, SingleBinAndRange) {
  const auto d = exact_log_distribution(real_series(), std::log(2.0), 10.0, 1);
  ASSERT_EQ(d.bins(), 1U);
  EXPECT_EQ(d.masses[0], 1.0);
  EXPECT_THROW(exact_log_distribution(real_series(), 1.0, 20.0), ValidationError);
  EXPECT_THROW(exact_log_distribution(real_series(), 3.0, 2.0), ValidationError);
}

TEST(LogDistribution, MassesAndMeanAgainstQuadrature) {
  const double y0 = std::log(2.0);
  const double y1 = std::log(1e6);
  const auto d = exact_log_distribution(real_series(), y0, y1);
  EXPECT_EQ(d.bins(), 201U);
  EXPECT_NEAR(sum_of(d.masses), 1.0, 1e-12);
  for (double m : d.masses) EXPECT_GE(m, 0.0);
  // midpoint rule on a 10^6-point y grid
  const int n = 1'000'000;
  const double h = (y1 - y0) / n;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = normalized_phi(real_series(), y0 + (i + 0.5) * h);
    m1 += phi;
    m2 += phi * phi;
  }
  EXPECT_NEAR(d.mean, m1 / n, 1e-3);
  EXPECT_NEAR(d.second_moment, m2 / n, 1e-3);
  // histogram mean with bin midpoints is within half a bin width
  double hist = 0.0;
  for (std::size_t j = 0; j < d.bins(); ++j) hist += d.masses[j] * 0.5 * (d.edges[j] + d.edges[j + 1]);
  EXPECT_NEAR(hist, d.mean, 0.5 * (d.edges[1] - d.edges[0]));
}

TEST(LogDistribution, MixtureAndThreads) {
  const double y0 = std::log(2.0);
  const double mid = 9.3;
  const double y1 = 13.0;
  const auto whole = exact_log_distribution(real_series(), y0, y1, 101);
  const std::vector<EmpiricalDistribution> parts = {
      exact_log_distribution(real_series(), y0, mid, whole.edges),
      exact_log_distribution(real_series(), mid, y1, whole.edges)};
  const auto mixed = mix_distributions(parts);
  for (std::size_t j = 0; j < whole.bins(); ++j) EXPECT_NEAR(mixed.masses[j], whole.masses[j], 1e-14);
  EXPECT_NEAR(mixed.mean, whole.mean, 1e-14);
  const auto threaded = exact_log_distribution(real_series(), y0, y1, 101, 4);
  EXPECT_EQ(threaded.masses, whole.masses);
  EXPECT_EQ(threaded.mean, whole.mean);
}

TEST(KsDistance, BasicProperties) {
  const auto a = exact_log_distribution(real_series(), std::log(2.0), 8.0);
  EXPECT_EQ(ks_distance(a, a), 0.0);
  EmpiricalDistribution p;
  p.edges = {0.0, 0.1};
  p.masses = {1.0};
  EmpiricalDistribution q;
  q.edges = {1.0, 1.1};
  q.masses = {1.0};
  EXPECT_EQ(ks_distance(p, q), 1.0);
  const auto b = exact_log_distribution(real_series(), std::log(2.0), 11.0);
  const auto c = exact_log_distribution(real_series(), std::log(2.0), 13.8);
  const double ab = ks_distance(a, b);
  const double bc = ks_distance(b, c);
  const double ac = ks_distance(a, c);
  EXPECT_LE(ac, ab + bc + 1e-15);
  EXPECT_LE(ab, ac + bc + 1e-15);
  EXPECT_LE(bc, ab + ac + 1e-15);
  EXPECT_GT(ab, 0.0);
  EXPECT_NEAR(ks_distance(a, b), ks_distance(b, a), 1e-15);
}

TEST(VarianceIntegral, ClosedFormsAndAdditivity) {
  EXPECT_EQ(variance_integral(constant_series(0, 1000), 500.0), 0.0);
  for (unsigned k : {2U, 3U}) {
    const StepSeries one(k, 100000, {1}, {1});
    const double x = 54321.5;
    EXPECT_NEAR(variance_integral(one, x), k * (std::pow(2.0, -1.0 / k) - std::pow(x, -1.0 / k)), 1e-14);
  }
  const auto& s = real_series();
  const double whole = variance_integral(s, 1e6);
  const double split = variance_integral(s, 12345.0) + variance_integral(s, 1e6, 12345.0);
  EXPECT_NEAR(split, whole, 1e-10 * whole);
  // oracle: per-integer closed form with S evaluated independently
  double oracle = 0.0;
  for (int n = 2; n < 5000; ++n) {
    const double v = static_cast<double>(s.at(n));
    oracle += v * v * 2.0 * (1.0 / std::sqrt(n) - 1.0 / std::sqrt(n + 1.0));
  }
  EXPECT_NEAR(variance_integral(s, 5000.0), oracle, 1e-12 * oracle);
  EXPECT_THROW(variance_integral(s, 2e6), ValidationError);
}

TEST(BetaK, SyntheticAndReal) {
  EXPECT_EQ(beta_k({}, 2).estimate, 0.0);
  const std::vector<ResidueTerm> one = {{14.0, std::polar(0.3, 1.1)}};
  EXPECT_NEAR(beta_k(one, 2).partial, 2.0 * 0.09, 1e-16);
  // synthetic terms with exact |c| = gamma^{-3/4} at zero-density spacing
  std::vector<ResidueTerm> terms;
  for (double g = 14.0; g < 2000.0; g += 2.0 * std::numbers::pi / std::log(g / (2.0 * std::numbers::pi))) {
    terms.push_back({g, std::polar(std::pow(g, -0.75), g)});
  }
  const auto b = beta_k(terms, 2);
  EXPECT_NEAR(b.decay_exponent, 0.75, 1e-9);
  EXPECT_TRUE(b.converging);
  EXPECT_NEAR(b.tail, b.tail_bound, 1e-12);
  double check = 0.0;
  for (const auto& t : terms) check += 2.0 * std::norm(t.coeff);
  EXPECT_NEAR(b.partial, check, 1e-13);
  EXPECT_EQ(b.partial_sums.size(), terms.size());
  // the remainder sum_{2000 < gamma < 2e6} 2 gamma^{-3/2}; beyond 2e6 adds about 3%
  double rest = 0.0;
  for (double g = terms.back().gamma; g < 2e6;) {
    const double step = 2.0 * std::numbers::pi / std::log(g / (2.0 * std::numbers::pi));
    g += step;
    rest += 2.0 * std::pow(g, -1.5);
  }
  EXPECT_NEAR(b.tail, rest, 0.1 * rest);
}

TEST(GrowthEnvelope, LimitsAndMonotonicity) {
  const auto& s = real_series();
  const double x = 999999.5;
  EXPECT_NEAR(growth_envelope(s, 0.0, 0.1, x).exceed_log_measure, std::log(x) - 2.0, 1e-12);
  EXPECT_EQ(growth_envelope(s, std::numeric_limits<double>::infinity(), 0.1, x).exceed_log_measure, 0.0);
  double prev = INFINITY;
  for (double c : {0.05, 0.1, 0.2, 0.3, 0.4}) {
    const double m = growth_envelope(s, c, 0.1, x).exceed_log_measure;
    EXPECT_LE(m, prev);
    prev = m;
  }
  EXPECT_LE(growth_envelope(s, 0.1, 0.2, x).exceed_log_measure, growth_envelope(s, 0.1, 0.1, x).exceed_log_measure);
}

TEST(GrowthEnvelope, SupAndMeasureOracles) {
  const auto& s = real_series();
  const double x = 200000.5;
  auto g = [](double t) { return std::pow(t, 0.25) * std::pow(std::log(t), 0.6); };
  double sup = std::abs(static_cast<double>(s.at(std::exp(2.0)))) / g(std::exp(2.0));
  for (int n = 8; n < x; ++n) sup = std::max(sup, std::abs(static_cast<double>(s.at(n))) / g(n));
  const auto r = growth_envelope(s, 0.1, 0.1, x);
  EXPECT_NEAR(r.sup_ratio, sup, 1e-14);
  // midpoint sampling of the exceedance indicator in log x
  const int n = 2'000'000;
  const double h = (std::log(x) - 2.0) / n;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double t = std::exp(2.0 + (i + 0.5) * h);
    if (std::abs(static_cast<double>(s.at(t))) >= 0.1 * g(t)) ++hits;
  }
  EXPECT_NEAR(r.exceed_log_measure, hits * h, 2e-3 * std::max(1.0, r.exceed_log_measure));
  const double thr = growth_threshold_for_measure(s, 0.1, x, 0.01);
  EXPECT_LT(growth_envelope(s, thr, 0.1, x).exceed_log_measure, 0.01);
  EXPECT_GE(growth_envelope(s, thr * 0.999, 0.1, x).exceed_log_measure, 0.01);
}

TEST(ConjectureNormalizer, FixedPointAndMonotone) {
  const double x = std::exp(std::exp(std::numbers::e));
  EXPECT_NEAR(conjecture_normalizer(x, 2), std::pow(x, 0.25) * std::exp(0.25), 1e-12 * std::pow(x, 0.25));
  EXPECT_THROW(conjecture_normalizer(16.0, 2), ValidationError);
  double prev = 0.0;
  for (double t = 16.01; t < 1e7; t *= 1.001) {
    const double v = conjecture_normalizer(t, 3);
    EXPECT_GT(v, prev);
    prev = v;
  }
  const auto sweep = normalizer_sweep(real_series(), 999999.5);
  double hi = 0.0;
  double lo = 0.0;
  for (int n = 17; n < 1'000'000; ++n) {
    const double r = static_cast<double>(real_series().at(n)) / conjecture_normalizer(n, 2);
    hi = std::max(hi, r);
    lo = std::min(lo, r);
  }
  EXPECT_NEAR(sweep.max_ratio, hi, 1e-14);
  EXPECT_NEAR(sweep.min_ratio, lo, 1e-14);
  ASSERT_EQ(sweep.checkpoints.size(), 4U);
  EXPECT_DOUBLE_EQ(sweep.running_abs_max.back(), std::max(hi, -lo));
}
