#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "kfcl/errors.hpp"
#include "kfcl/kfree.hpp"
#include "kfcl/special.hpp"

using namespace kfcl;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<double> kSigmaGrid = {-0.5, 0.0, 0.25, 0.5, 0.75, 1.5};
const std::vector<double> kTGrid = {1.0, 5.0, 14.0, 50.0};

template <class F>
cplx central_difference(F&& f, cplx s, double h) {
  return (f(s + h) - f(s - h)) / (2.0 * h);
}

// log G(1+z) by its Taylor series about 0 (|z| < 1).
cplx log_g1p_taylor(cplx z) {
  cplx sum = 0.5 * z * std::log(2.0 * kPi) - 0.5 * (z + (1.0 + std::numbers::egamma) * z * z);
  cplx zp = z * z * z;
  for (int k = 2; k < 4000; ++k) {
    const cplx term = zp * boost::math::zeta(static_cast<double>(k)) / static_cast<double>(k + 1);
    sum += (k % 2 == 0) ? term : -term;
    if (std::abs(term) < 1e-18) break;
    zp *= z;
  }
  return sum;
}

}  // namespace

TEST(Zeta, ClassicalValues) {
  const mp_complex z2 = zeta_mp(mp_complex(2));
  const mp_real exact = boost::math::constants::pi<mp_real>() * boost::math::constants::pi<mp_real>() / 6;
  EXPECT_LT(static_cast<double>(abs(z2 - exact)), 1e-20);
  EXPECT_NEAR(zeta(2.0).real(), kPi * kPi / 6.0, 1e-14);
  EXPECT_NEAR(zeta(0.0).real(), -0.5, 1e-14);
  EXPECT_NEAR(zeta(-1.0).real(), -1.0 / 12.0, 1e-14);
  EXPECT_NEAR(std::abs(zeta(cplx(0.5, 14.134725141734693))), 0.0, 1e-10);
  EXPECT_THROW(zeta(1.0), PoleError);
}

TEST(Zeta, ExtendedContextAgreesWithDouble) {
  EvalContext ext;
  ext.digits = 30;
  const cplx s(0.3, 27.0);
  EXPECT_LT(std::abs(zeta(s, ext) - zeta(s)), 1e-12);
}

TEST(Zeta, DerivativeMatchesFiniteDifference) {
  const cplx s(2.0, 3.0);
  const auto fd = central_difference([](cplx z) { return zeta(z); }, s, 1e-5);
  EXPECT_LT(std::abs(zeta_deriv(s) - fd), 1e-10);
  EXPECT_NEAR(zeta_deriv(0.0).real(), -0.5 * std::log(2.0 * kPi), 1e-13);
}

TEST(Zeta, PoleProximityWarns) {
  std::vector<std::string> seen;
  set_warning_sink([&](std::string_view m) { seen.emplace_back(m); });
  (void)zeta(cplx(1.0 + 1e-8, 0.0));
  set_warning_sink(nullptr);
  EXPECT_EQ(seen.size(), 1U);
}

TEST(LFunction, ValueAtOne) {
  const auto chi4 = DirichletCharacter::from_kronecker(-4);
  EXPECT_NEAR(std::abs(l_function(1.0, chi4) - kPi / 4.0), 0.0, 1e-12);
  const auto chi3 = DirichletCharacter::from_kronecker(-3);
  EXPECT_NEAR(l_function(1.0, chi3).real(), kPi / (3.0 * std::sqrt(3.0)), 1e-12);
  // alternating-series oracle for chi mod 4
  double alt = 0.0;
  for (int n = 200000; n >= 0; --n) alt += ((n % 2) ? -1.0 : 1.0) / (2.0 * n + 1.0);
  EXPECT_NEAR(l_function(1.0, chi4).real(), alt, 1e-5);
}

TEST(LFunction, MatchesDirichletSeriesAtThree) {
  for (std::int64_t d : {-3, -4, 5, 8}) {
    const auto chi = DirichletCharacter::from_kronecker(d);
    for (cplx s : {cplx(3.0, 0.0), cplx(3.0, 2.0)}) {
      cplx direct = 0.0;
      for (int n = 300000; n >= 1; --n) {
        const int c = chi(static_cast<std::uint64_t>(n));
        if (c != 0) direct += static_cast<double>(c) * std::exp(-s * std::log(static_cast<double>(n)));
      }
      EXPECT_LT(std::abs(l_function(s, chi) - direct), 1e-12) << d;
    }
  }
}

TEST(LFunction, FunctionalEquationResidual) {
  for (std::int64_t d : {-3, -4, 5, 8, -8}) {
    const auto chi = DirichletCharacter::from_kronecker(d);
    const cplx eps = root_number(chi);
    EXPECT_NEAR(std::abs(eps - 1.0), 0.0, 1e-12);
    const double q = static_cast<double>(chi.modulus());
    for (double sigma : kSigmaGrid) {
      for (double t : kTGrid) {
        const cplx s(sigma, t);
        const cplx rhs = eps * std::exp((0.5 - s) * std::log(q)) * delta_ratio(s, chi.parity()) *
                         l_function(1.0 - s, chi);
        EXPECT_LT(std::abs(l_function(s, chi) - rhs), 1e-8) << d << " " << sigma << " " << t;
      }
    }
  }
}

TEST(Zeta, FunctionalEquationResidual) {
  for (double sigma : kSigmaGrid) {
    for (double t : kTGrid) {
      const cplx s(sigma, t);
      EXPECT_LT(std::abs(zeta(s) - delta_ratio(s, 0) * zeta(1.0 - s)), 1e-8) << sigma << " " << t;
    }
  }
}

TEST(Derivatives, MatchFiniteDifferencesAtRandomPoints) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> re(-1.0, 2.0);
  std::uniform_real_distribution<double> im(-100.0, 100.0);
  const auto chi = DirichletCharacter::from_kronecker(-3);
  for (int i = 0; i < 20; ++i) {
    const cplx s(re(rng), im(rng));
    if (std::abs(s - 1.0) < 0.1) continue;
    const auto zd = zeta_with_deriv(s);
    const auto fz = central_difference([](cplx z) { return zeta(z); }, s, 1e-6);
    EXPECT_LT(std::abs(zd.deriv - fz), 1e-6 * std::max(1.0, std::abs(fz))) << s;
    const auto ld = l_with_deriv(s, chi);
    const auto fl = central_difference([&](cplx z) { return l_function(z, chi); }, s, 1e-6);
    EXPECT_LT(std::abs(ld.deriv - fl), 1e-6 * std::max(1.0, std::abs(fl))) << s;
  }
}

TEST(DeltaRatio, BasicIdentities) {
  EXPECT_NEAR(std::abs(delta_ratio(0.5, 0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(delta_ratio(0.5, 1) - 1.0), 0.0, 1e-14);
  for (int delta : {0, 1}) {
    for (cplx s : {cplx(0.3, 2.0), cplx(-0.4, 17.0), cplx(1.7, -40.0)}) {
      EXPECT_LT(std::abs(delta_ratio(s, delta) * delta_ratio(1.0 - s, delta) - 1.0), 1e-12);
    }
  }
  EXPECT_THROW(delta_ratio(3.0, 0), PoleError);
}

TEST(DeltaRatio, StirlingSizeOnTheStrip) {
  // |Delta(sigma+it)| ~ (|t|/2pi)^{1/2-sigma}
  for (double t = 10.0; t <= 1000.0; t *= 1.3) {
    for (double sigma : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      for (int delta : {0, 1}) {
        const double scaled = std::abs(delta_ratio(cplx(sigma, t), delta)) * std::pow(t / (2.0 * kPi), sigma - 0.5);
        EXPECT_GE(scaled, 0.5);
        EXPECT_LE(scaled, 2.0);
      }
    }
  }
}

TEST(HardyZ, RealOnCriticalLine) {
  const auto chi3 = DirichletCharacter::from_kronecker(-3);
  const auto chi4 = DirichletCharacter::from_kronecker(-4);
  for (double t : {3.0, 20.0, 55.5}) {
    const cplx rot_z = std::polar(1.0, hardy_theta(t, 1, 0)) * zeta(cplx(0.5, t));
    EXPECT_LT(std::abs(rot_z.imag()), 1e-10);
    for (const auto* chi : {&chi3, &chi4}) {
      const cplx rot = std::polar(1.0, hardy_theta(t, chi->modulus(), chi->parity())) * l_function(cplx(0.5, t), *chi);
      EXPECT_LT(std::abs(rot.imag()), 1e-10);
    }
  }
}

TEST(FiniteEulerProduct, Examples) {
  EXPECT_NEAR(std::abs(p_product(FiniteEulerProduct(3), 1.0) - 1.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p_product(FiniteEulerProduct(12), 2.0) - 1.5), 0.0, 1e-15);
  EXPECT_THROW(p_product(FiniteEulerProduct(3), cplx(0.0, 2.0 * kPi / std::log(3.0))), PoleError);
}

TEST(FiniteEulerProduct, BoundHoldsOnHalfPlane) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(0.1, 3.0);
  std::uniform_real_distribution<double> im(-200.0, 200.0);
  for (std::uint64_t q : {3U, 4U, 12U, 30U, 105U}) {
    const FiniteEulerProduct p(q);
    for (int i = 0; i < 200; ++i) {
      EXPECT_LE(std::abs(p(cplx(re(rng), im(rng)))), p.bound(0.1) * (1.0 + 1e-12));
    }
  }
}

TEST(FiniteEulerProduct, SeriesFactorStructure) {
  // Dirichlet series of mu^(2) chi and mu^(2) g_chi at s = 2 against the factored forms
  const unsigned k = 2;
  const auto chi = DirichletCharacter::from_kronecker(-3);
  const FiniteEulerProduct p(3);
  const auto sieve = KFreeSieve::build(k, 2'000'000);
  const SummandSpec plain(k, chi, false);
  const SummandSpec mod(k, chi, true);
  for (cplx s : {cplx(2.0, 0.0), cplx(2.0, 1.5)}) {
    cplx f = 0.0;
    cplx g = 0.0;
    for (std::uint64_t n = 2'000'000; n >= 1; --n) {
      const bool kf = sieve.is_kfree(n);
      if (!kf) continue;
      const cplx w = std::exp(-s * std::log(static_cast<double>(n)));
      f += static_cast<double>(plain.value(n, kf)) * w;
      g += static_cast<double>(mod.value(n, kf)) * w;
    }
    const cplx zk = zeta(2.0 * s);
    const cplx f_model = l_function(s, chi) * p(2.0 * s) / zk;
    const cplx g_model = l_function(s, chi) * p(s) / zk;
    EXPECT_LT(std::abs(f - f_model), 1e-5);
    EXPECT_LT(std::abs(g - g_model), 1e-5);
    EXPECT_LT(std::abs(g_model / f_model - p(s) / p(2.0 * s)), 1e-12);
  }
}

TEST(BesselJ0, Values) {
  EXPECT_DOUBLE_EQ(bessel_j0(0.0), 1.0);
  // bisection on the series for the first zero
  double lo = 2.0;
  double hi = 3.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bessel_j0_series(mid) > 0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(lo, 2.404825557695773, 1e-10);
  EXPECT_NEAR(bessel_j0(2.404825557695773), 0.0, 1e-10);
  EXPECT_NEAR(bessel_j0_series(12.0), bessel_j0_asymptotic(12.0), 1e-10);
  for (double z : {0.1, 1.0, 5.5, 11.9, 12.1, 20.0, 75.0, 400.0}) {
    EXPECT_NEAR(bessel_j0(z), boost::math::cyl_bessel_j(0, z), 1e-12) << z;
    EXPECT_DOUBLE_EQ(bessel_j0(-z), bessel_j0(z));
  }
}

TEST(BarnesG, BaseCasesAndRecurrence) {
  EXPECT_NEAR(std::abs(barnes_g(1.0) - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(barnes_g(2.0) - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(barnes_g(3.0) - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(barnes_g(4.0).real(), 2.0, 1e-12);
  EXPECT_NEAR(barnes_g(5.0).real(), 12.0, 1e-11);
  EXPECT_EQ(barnes_g(0.0), cplx(0.0));
  EXPECT_EQ(barnes_g(-2.0), cplx(0.0));
  const double glaisher = 1.28242712910062263687;
  const double g_half = std::pow(2.0, 1.0 / 24.0) * std::exp(0.125) * std::pow(kPi, -0.25) * std::pow(glaisher, -1.5);
  EXPECT_NEAR(barnes_g(0.5).real(), g_half, 1e-13);
  for (cplx s : {cplx(0.7, 0.4), cplx(2.3, -1.1), cplx(-1.6, 0.3)}) {
    EXPECT_LT(std::abs(barnes_g(s + 1.0) - std::exp(log_gamma(s)) * barnes_g(s)), 1e-11 * std::abs(barnes_g(s + 1.0)));
  }
}

TEST(BarnesG, TaylorSeriesOracle) {
  for (cplx z : {cplx(0.3, 0.0), cplx(-0.4, 0.2), cplx(0.1, -0.45), cplx(0.45, 0.3)}) {
    EXPECT_LT(std::abs(log_barnes_g(1.0 + z) - log_g1p_taylor(z)), 1e-12) << z;
  }
}

TEST(AlphaR, Values) {
  EXPECT_DOUBLE_EQ(alpha_r(0.0, 1000).value, 1.0);
  const auto a = alpha_r(-1.0, 100000);
  EXPECT_NEAR(a.value, 6.0 / (kPi * kPi), 1e-5);
  EXPECT_TRUE(a.cutoff_sufficient);
  EXPECT_GT(a.residual_estimate, 0.0);
  EXPECT_FALSE(alpha_r(-1.0, 10).cutoff_sufficient);
  EXPECT_THROW(alpha_r(-1.6, 100), ValidationError);
}

TEST(HkoConstant, Values) {
  EXPECT_NEAR(hko_constant(0.0, 1000).value, 1.0 / (2.0 * kPi), 1e-13);
  const auto h4 = hko_constant(-1.0, 10000);
  const auto h5 = hko_constant(-1.0, 100000);
  EXPECT_GT(h5.value, 0.0);
  EXPECT_LT(std::abs(h4.value / h5.value - 1.0), 1e-3);
  EXPECT_NEAR(h5.value, 3.0 / (kPi * kPi * kPi), 1e-5);
  EXPECT_THROW(hko_constant(-1.5), ValidationError);
}
