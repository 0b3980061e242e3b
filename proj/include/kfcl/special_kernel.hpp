#pragma once

// Precision-generic Euler-Maclaurin and Stirling kernels. Instantiated for
// double and for the 50-digit Boost.Multiprecision types; the public
// double-precision API lives in special.hpp.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>

#include "kfcl/numerics.hpp"

namespace kfcl {

using mp_real = boost::multiprecision::cpp_bin_float_50;
using mp_complex = boost::multiprecision::cpp_complex_50;

namespace detail {

template <class R>
struct complex_of;
template <>
struct complex_of<double> {
  using type = std::complex<double>;
};
template <>
struct complex_of<mp_real> {
  using type = mp_complex;
};
template <class R>
using complex_t = typename complex_of<R>::type;

template <class R>
struct SeriesValue {
  complex_t<R> value;
  complex_t<R> deriv;
  bool converged = true;
};

/// zeta(s, alpha) = sum_{n>=0} (n + alpha)^{-s} and its s-derivative.
/// Direct sum over n < terms, Euler-Maclaurin tail from N = terms + alpha
/// with up to `max_bernoulli` correction terms, stopping once a correction
/// drops below rel_tol relative to the running value.
/// When `regularized`, the leading tail term N^{1-s}/(s-1) is replaced by
/// (N^{1-s} - 1)/(s-1). The difference 1/(s-1) is independent of alpha and
/// cancels in character-weighted sums, which then stay finite at s = 1.
template <class R>
SeriesValue<R> hurwitz_em(const complex_t<R>& s, const R& alpha, std::size_t terms, int max_bernoulli,
                          const R& rel_tol, bool want_deriv, bool regularized = false) {
  using std::abs;
  using std::exp;
  using std::log;
  using C = complex_t<R>;
  SeriesValue<R> out;

  C head(R(0), R(0));
  C dhead(R(0), R(0));
  if constexpr (std::is_same_v<R, double>) {
    const double sigma = s.real();
    const double t = s.imag();
    CompensatedSum re;
    CompensatedSum im;
    CompensatedSum dre;
    CompensatedSum dim;
    for (std::size_t n = 0; n < terms; ++n) {
      const double base = static_cast<double>(n) + alpha;
      const double lb = std::log(base);
      const double mag = std::exp(-sigma * lb);
      const double c = std::cos(t * lb);
      const double sn = std::sin(t * lb);
      re.add(mag * c);
      im.add(-mag * sn);
      if (want_deriv) {
        dre.add(-lb * mag * c);
        dim.add(lb * mag * sn);
      }
    }
    head = C(re.value(), im.value());
    dhead = C(dre.value(), dim.value());
  } else {
    for (std::size_t n = 0; n < terms; ++n) {
      const R base = R(static_cast<double>(n)) + alpha;
      const R lb = log(base);
      const C term = exp(C(-lb * real(s), -lb * imag(s)));
      head += term;
      if (want_deriv) dhead -= term * lb;
    }
  }

  const R big_n = R(static_cast<double>(terms)) + alpha;
  const R ln = log(big_n);
  const C npow = exp(C(-ln * real(s), -ln * imag(s)));  // N^{-s}
  const C one(R(1), R(0));
  const C sm1 = s - one;
  C value = head + npow / R(2);
  C deriv = dhead;
  if (want_deriv) deriv -= npow * ln / R(2);
  if (!regularized) {
    value += npow * big_n / sm1;
    if (want_deriv) deriv += npow * big_n * (C(-ln, R(0)) / sm1 - one / (sm1 * sm1));
  } else {
    // g(u) = (e^{-u L} - 1)/u with u = s - 1, L = log N
    const C w = -sm1 * ln;
    if (abs(w) < R(0.5)) {
      C g(R(0), R(0));
      C gd(R(0), R(0));
      C wp = one;  // w^{n-1}
      C wq = one;  // w^{n-2}
      R fact = R(1);
      for (int n = 1; n < 60; ++n) {
        fact *= R(n);
        g += wp / fact;
        if (n >= 2) {
          gd += wq * R(n - 1) / fact;
          wq *= w;
        }
        wp *= w;
      }
      value += g * (-ln);
      if (want_deriv) deriv += gd * (ln * ln);
    } else {
      const C e = exp(w);
      value += (e - one) / sm1;
      if (want_deriv) deriv += (-(e * ln * sm1) - (e - one)) / (sm1 * sm1);
    }
  }

  // P_j(s) = s (s+1) ... (s+2j-2); w_j = N^{-s-2j+1}
  C poch = s;
  C dpoch = one;
  const R inv_n2 = R(1) / (big_n * big_n);
  C w = npow / big_n;
  R fact = R(2);  // (2j)!
  R prev_mag = R(-1);
  out.converged = false;
  for (int j = 1; j <= max_bernoulli; ++j) {
    const R b = boost::math::bernoulli_b2n<R>(j) / fact;
    const C term = poch * w * b;
    value += term;
    R mag = abs(term);
    R scale = abs(value) > abs(npow) ? abs(value) : abs(npow);
    if (want_deriv) {
      // poch vanishes at s = 0, so the derivative needs its own test
      const C dterm = (dpoch * w - poch * w * ln) * b;
      deriv += dterm;
      if (abs(dterm) > mag) mag = abs(dterm);
      if (abs(deriv) > scale) scale = abs(deriv);
    }
    if (mag <= rel_tol * scale) {
      out.converged = true;
      break;
    }
    if (prev_mag >= R(0) && j > 3 && mag > prev_mag) break;  // asymptotic series started diverging
    prev_mag = mag;
    const R a1 = R(2 * j - 1);
    const R a2 = R(2 * j);
    const C f1 = s + a1;
    const C f2 = s + a2;
    // product rule through two extra factors
    dpoch = (dpoch * f1 + poch) * f2 + poch * f1;
    poch = poch * f1 * f2;
    w *= inv_n2;
    fact *= a2 + R(1);
    fact *= a2 + R(2);
  }
  out.value = value;
  out.deriv = deriv;
  return out;
}

/// Principal-branch log Gamma via upward recurrence and Stirling.
template <class R>
complex_t<R> log_gamma(complex_t<R> z) {
  using std::abs;
  using std::log;
  using C = complex_t<R>;
  const double threshold = std::is_same_v<R, double> ? 15.0 : 40.0;
  const int terms = std::is_same_v<R, double> ? 12 : 40;
  C shift(R(0), R(0));
  while (real(z) < R(threshold)) {
    shift += log(z);
    z += C(R(1), R(0));
  }
  const R half_log_2pi = log(boost::math::constants::two_pi<R>()) / R(2);
  C result = (z - C(R(0.5), R(0))) * log(z) - z + C(half_log_2pi, R(0));
  const C inv = C(R(1), R(0)) / z;
  const C inv2 = inv * inv;
  C p = inv;
  for (int j = 1; j <= terms; ++j) {
    const R coeff = boost::math::bernoulli_b2n<R>(j) / R(static_cast<double>((2 * j) * (2 * j - 1)));
    result += p * coeff;
    p *= inv2;
  }
  return result - shift;
}

}  // namespace detail
}  // namespace kfcl
