#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "kfcl/errors.hpp"
#include "kfcl/explicit_formula.hpp"

using namespace kfcl;

namespace {

const std::filesystem::path kData = KFCL_TEST_DATA;

const ZeroCatalog& zeta_catalog() {
  static const ZeroCatalog cat = [] {
    const auto raw = parse_zero_file(kData / "zeta_zeros.txt", ZeroFormat::plain, FunctionId::zeta_function());
    std::vector<ZeroRecord> head(raw.records().begin(), raw.records().begin() + static_cast<long>(raw.count(600.0)));
    return enrich_catalog(ZeroCatalog(raw.function(), head, 600.0));
  }();
  return cat;
}

const ZeroCatalog& l3_catalog() {
  static const ZeroCatalog cat = scan_zeros(FunctionId::l_function(DirichletCharacter::from_kronecker(-3)), 0.0, 150.0);
  return cat;
}

struct Fixture {
  SummandSpec spec;
  KFreeSieve sieve;
  StepSeries series;
};

const Fixture& k2q3() {
  static const Fixture f = [] {
    SummandSpec spec(2, DirichletCharacter::from_kronecker(-3), false);
    auto sieve = KFreeSieve::build(2, 200000);
    auto series = cumulative_series(spec, sieve, 200000);
    return Fixture{spec, std::move(sieve), std::move(series)};
  }();
  return f;
}

std::vector<double> half_integer_grid(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(std::floor(lo * std::pow(hi / lo, i / (n - 1.0))) + 0.5);
  return xs;
}

}  // namespace

TEST(ZfValue, CaseTable) {
  const auto chi = DirichletCharacter::from_kronecker(-3);
  const FiniteEulerProduct p(3);
  const cplx rho(0.5, 21.0);
  const cplx d(0.7, -1.3);
  EXPECT_LT(std::abs(zf_value(SummandSpec(2, chi, false), rho, d) - p(rho) / d), 1e-15);
  EXPECT_LT(std::abs(zf_value(SummandSpec(2, chi, true), rho, d) - p(rho / 2.0) / d), 1e-15);
  EXPECT_LT(std::abs(zf_value(SummandSpec(3, chi, false), rho, d) - 1.0 / d), 1e-15);
  EXPECT_LT(std::abs(zf_value(SummandSpec(3, chi, true), rho, d) - p(rho / 3.0) / (d * p(rho))), 1e-15);
  const cplx ratio = zf_value(SummandSpec(4, chi, true), rho, d) / zf_value(SummandSpec(4, chi, false), rho, d);
  EXPECT_LT(std::abs(ratio - p(rho / 4.0) / p(rho)), 1e-14);
  EXPECT_THROW(zf_value(SummandSpec(2, chi, false), rho, 0.0), NumericalError);
}

TEST(ResidueCoefficients, FirstZeroByComposition) {
  const auto& f = k2q3();
  const auto terms = residue_coefficients(f.spec, zeta_catalog(), 15.0);
  ASSERT_EQ(terms.size(), 1U);
  // independent composition of special-module calls
  const auto z = refine_zero(14.134725, FunctionId::zeta_function());
  const cplx rho(0.5, z.gamma);
  const cplx expected = l_function(rho / 2.0, f.spec.character) * FiniteEulerProduct(3)(rho) / (zeta_deriv(rho) * rho);
  EXPECT_LT(std::abs(terms[0].coeff - expected), 1e-12 * std::abs(expected));
}

TEST(ResidueCoefficients, CountsParityAndDecay) {
  const auto& f = k2q3();
  const ZeroCatalog empty(FunctionId::zeta_function(), {}, 100.0);
  EXPECT_TRUE(residue_coefficients(f.spec, empty, 100.0).empty());
  const auto terms = residue_coefficients(f.spec, zeta_catalog(), 500.0);
  EXPECT_EQ(terms.size(), zeta_catalog().count(500.0));
  EXPECT_THROW(residue_coefficients(SummandSpec(3, f.spec.character, false), zeta_catalog(), 100.0), ValidationError);
  EXPECT_THROW(residue_coefficients(f.spec, l3_catalog(), 100.0), ValidationError);
  const auto raw = parse_zero_file(kData / "zeta_zeros.txt", ZeroFormat::plain, FunctionId::zeta_function());
  EXPECT_THROW(residue_coefficients(f.spec, raw, 100.0), DataError);
  const auto decay = coefficient_decay(terms, 2);
  EXPECT_GT(decay.max_scaled, 0.0);
  EXPECT_LT(decay.max_scaled, 5.0);
  EXPECT_LT(decay.slope, 0.0);
  for (const auto& t : terms) EXPECT_GT(std::abs(t.coeff), 0.0);
}

TEST(ResidueCoefficients, ModifiedDiffersByProductRatio) {
  const auto chi = DirichletCharacter::from_kronecker(-3);
  const FiniteEulerProduct p(3);
  const auto a = residue_coefficients(SummandSpec(2, chi, false), zeta_catalog(), 200.0);
  const auto b = residue_coefficients(SummandSpec(2, chi, true), zeta_catalog(), 200.0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx rho(0.5, a[i].gamma);
    EXPECT_LT(std::abs(b[i].coeff / a[i].coeff - p(rho / 2.0) / p(rho)), 1e-12);
  }
}

TEST(ExplicitSum, TrivialCases) {
  EXPECT_EQ(explicit_sum({}, 100.0, 2), 0.0);
  const std::vector<ResidueTerm> one = {{37.5, cplx(1.0, 0.0)}};
  EXPECT_DOUBLE_EQ(explicit_sum(one, 1.0, 2), 2.0);
}

TEST(ExplicitSum, SymmetrizationPermutationAndThreads) {
  auto terms = residue_coefficients(k2q3().spec, zeta_catalog(), 500.0);
  for (double x : {150.5, 2500.5, 99999.5}) {
    // both members of each conjugate pair, summed as complex numbers
    cplx full = 0.0;
    for (const auto& t : terms) {
      const cplx rho(0.5, t.gamma);
      full += t.coeff * std::exp(rho / 2.0 * std::log(x));
      full += std::conj(t.coeff) * std::exp(std::conj(rho) / 2.0 * std::log(x));
    }
    const double sym = explicit_sum(terms, x, 2);
    EXPECT_LT(std::abs(full.imag()), 1e-10);
    EXPECT_NEAR(full.real(), sym, 1e-10);
    EXPECT_EQ(explicit_sum(terms, x, 2, 1), explicit_sum(terms, x, 2, 3));
    auto shuffled = terms;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(3));
    EXPECT_NEAR(explicit_sum(shuffled, x, 2), sym, 1e-12 * std::max(1.0, std::abs(sym)));
  }
}

TEST(ExplicitResidual, NoZerosGivesPartialSum) {
  const auto& f = k2q3();
  for (double x : {10.5, 1000.5}) EXPECT_EQ(explicit_residual(f.series, {}, x), static_cast<double>(f.series.at(x)));
}

TEST(ExplicitResidual, MeanDecreasesWithHeightAndFitsEnvelope) {
  const auto& f = k2q3();
  const auto xs = half_integer_grid(100.0, 10000.0, 100);
  std::vector<double> means;
  std::vector<ResidualSample> calib;
  for (double t : {50.0, 100.0, 200.0, 400.0}) {
    const auto terms = residue_coefficients(f.spec, zeta_catalog(), t);
    double m = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = explicit_residual(f.series, terms, xs[i]);
      m += std::abs(r);
      if (i % 2 == 1) calib.push_back({xs[i], t, std::abs(r)});
    }
    means.push_back(m / static_cast<double>(xs.size()));
  }
  for (std::size_t i = 1; i < means.size(); ++i) EXPECT_LT(means[i], means[i - 1]) << i;
  // envelope fitted on odd grid points, checked at a disjoint point
  const auto model = fit_error_model(calib, 2);
  for (double c : model.c) EXPECT_GT(c, 0.0);
  const auto terms500 = residue_coefficients(f.spec, zeta_catalog(), 500.0);
  EXPECT_LT(std::abs(explicit_residual(f.series, terms500, 1000.5)), error_envelope(model, 1000.5, 500.0));
}

TEST(ErrorEnvelope, Arithmetic) {
  ErrorModel zero = ErrorModel::for_k(2);
  zero.c.fill(0.0);
  EXPECT_EQ(error_envelope(zero, 1e4, 100.0), 0.0);
  const auto unit = ErrorModel::for_k(2);
  EXPECT_DOUBLE_EQ(unit.eps, 0.125);
  EXPECT_EQ(dominant_term(unit, 1e6, 1e2), 1U);  // x log x / T
  EXPECT_NE(dominant_term(unit, 1e2, 1e3), 1U);
  auto no_growth = unit;
  no_growth.c[3] = 0.0;
  double prev = INFINITY;
  for (double t = 10.0; t < 1e5; t *= 1.7) {
    const double e = error_envelope(no_growth, 5000.0, t);
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(GeneratingFunction, MatchesDirichletSeries) {
  const auto chi = DirichletCharacter::from_kronecker(-3);
  for (unsigned k : {2U, 3U}) {
    const auto sieve = KFreeSieve::build(k, 1'000'000);
    for (bool modified : {false, true}) {
      const SummandSpec spec(k, chi, modified);
      const cplx s(2.0, 0.7);
      cplx direct = 0.0;
      for (std::uint64_t n = 1'000'000; n >= 1; --n) {
        const int v = spec.value(n, sieve.is_kfree(n));
        if (v != 0) direct += static_cast<double>(v) * std::exp(-s * std::log(static_cast<double>(n)));
      }
      EXPECT_LT(std::abs(generating_function(spec, s) - direct), 1e-5) << k << modified;
    }
  }
}

TEST(Perron, SmallHeights) {
  const auto& f = k2q3();
  const auto p = perron_integral(f.spec, 1.5, 1000.0);
  EXPECT_NEAR(p.value, 1.0, 1.0 + 1.5 * std::log(1.5) / 1000.0);
  EXPECT_NEAR(p.sigma0, 1.0 + 1.0 / std::log(1.5), 1e-15);
  EXPECT_THROW(perron_integral(f.spec, 100.0, 100.0), ValidationError);
  EXPECT_THROW(perron_integral(f.spec, 100.5, 100.0, 0.9), ValidationError);
  // doubling T shrinks the error on average
  double e1 = 0.0;
  double e2 = 0.0;
  for (double x = 20.5; x < 60.0; x += 4.0) {
    e1 += std::abs(perron_integral(f.spec, x, 100.0).value - static_cast<double>(f.series.at(x)));
    e2 += std::abs(perron_integral(f.spec, x, 200.0).value - static_cast<double>(f.series.at(x)));
  }
  EXPECT_LT(e2, e1);
}

TEST(WindowVariance, MatchesClosedFormAndDecays) {
  const auto terms = residue_coefficients(k2q3().spec, zeta_catalog(), 600.0);
  EXPECT_EQ(window_variance(terms, 1000.0, 2000.0, 0.0, 2), 0.0);
  for (double z : {0.0, 5.0}) {
    // oracle: sum_{m,n} c_m conj(c_n) int_Z^{Z+1} e^{i y (g_m - g_n)/k} dy
    std::vector<ResidueTerm> band;
    for (const auto& t : terms) {
      if (t.gamma > 100.0 && t.gamma <= 200.0) band.push_back(t);
    }
    cplx oracle = 0.0;
    for (const auto& a : band) {
      for (const auto& b : band) {
        const double w = (a.gamma - b.gamma) / 2.0;
        const cplx integral = w == 0.0 ? cplx(1.0)
                                       : (std::polar(1.0, w * (z + 1.0)) - std::polar(1.0, w * z)) / cplx(0.0, w);
        oracle += a.coeff * std::conj(b.coeff) * integral;
      }
    }
    const double v = window_variance(terms, 100.0, 200.0, z, 2);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, oracle.real(), 1e-12 * oracle.real() + 1e-15);
    const double v50 = window_variance(terms, 50.0, 150.0, z, 2);
    const double v100 = window_variance(terms, 100.0, 200.0, z, 2);
    const double v200 = window_variance(terms, 200.0, 300.0, z, 2);
    EXPECT_GT(v50, v200);
    EXPECT_GT(v100, v200);
  }
}
