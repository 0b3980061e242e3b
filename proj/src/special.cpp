#include "kfcl/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kfcl/errors.hpp"
#include "kfcl/numerics.hpp"

namespace kfcl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDoubleTol = 1e-17;
constexpr int kMpDepth = 160;

std::string fmt(cplx s) {
  std::ostringstream os;
  os.precision(10);
  os << s.real() << (s.imag() < 0 ? "-" : "+") << std::abs(s.imag()) << "i";
  return os.str();
}

mp_complex to_mp(cplx s) { return mp_complex(mp_real(s.real()), mp_real(s.imag())); }
cplx to_double(const mp_complex& z) { return {static_cast<double>(real(z)), static_cast<double>(imag(z))}; }

mp_real mp_tolerance() { return mp_real("1e-52"); }

detail::SeriesValue<double> hurwitz_double(cplx s, double a, const EvalContext& ctx, bool deriv,
                                           bool regularized = false) {
  std::size_t m = ctx.cutoff(s.imag());
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto r = detail::hurwitz_em<double>(s, a, m, ctx.bernoulli_depth, kDoubleTol, deriv, regularized);
    if (r.converged) return r;
    m *= 2;
  }
  throw NumericalError("precision unreachable: Euler-Maclaurin did not converge at s = " + fmt(s));
}

detail::SeriesValue<mp_real> hurwitz_mp(const mp_complex& s, const mp_real& a, const EvalContext& ctx,
                                        bool deriv, bool regularized = false) {
  std::size_t m = 2 * ctx.cutoff(static_cast<double>(imag(s))) + 20;
  for (int attempt = 0; attempt < 3; ++attempt) {
    auto r = detail::hurwitz_em<mp_real>(s, a, m, kMpDepth, mp_tolerance(), deriv, regularized);
    if (r.converged) return r;
    m *= 2;
  }
  throw NumericalError("precision unreachable: extended Euler-Maclaurin did not converge at s = " +
                       fmt(to_double(s)));
}

void check_zeta_pole(cplx s) {
  const double d = std::abs(s - 1.0);
  if (d == 0.0) throw PoleError("zeta: s = 1 is a pole");
  if (d < 1e-6) warn("zeta: evaluating within 1e-6 of the pole at s = 1 (s = " + fmt(s) + ")");
}

bool near_nonpositive_integer(cplx z) {
  if (z.real() > 0.5) return false;
  const double r = std::round(z.real());
  return std::abs(z.imag()) < 1e-14 && std::abs(z.real() - r) < 1e-14 * std::max(1.0, std::abs(r));
}

ValueDeriv l_impl(cplx s, const DirichletCharacter& chi, const EvalContext& ctx, bool deriv) {
  ctx.validate();
  const auto q = chi.modulus();
  const double lq = std::log(static_cast<double>(q));
  if (ctx.extended()) {
    const mp_complex ms = to_mp(s);
    mp_complex h(0);
    mp_complex dh(0);
    for (std::uint64_t a = 1; a < q; ++a) {
      const int c = chi(a);
      if (c == 0) continue;
      const auto r = hurwitz_mp(ms, mp_real(a) / mp_real(q), ctx, deriv, true);
      h += r.value * c;
      dh += r.deriv * c;
    }
    const mp_real mlq = log(mp_real(q));
    const mp_complex qs = exp(-ms * mlq);
    return {to_double(qs * h), to_double(qs * (dh - h * mlq))};
  }
  CompensatedComplexSum h;
  CompensatedComplexSum dh;
  for (std::uint64_t a = 1; a < q; ++a) {
    const int c = chi(a);
    if (c == 0) continue;
    const auto r = hurwitz_double(s, static_cast<double>(a) / static_cast<double>(q), ctx, deriv, true);
    h.add(static_cast<double>(c) * r.value);
    dh.add(static_cast<double>(c) * r.deriv);
  }
  const cplx qs = std::exp(-s * lq);
  return {qs * h.value(), qs * (dh.value() - lq * h.value())};
}

ValueDeriv zeta_impl(cplx s, const EvalContext& ctx, bool deriv) {
  ctx.validate();
  check_zeta_pole(s);
  if (ctx.extended()) {
    const auto r = hurwitz_mp(to_mp(s), mp_real(1), ctx, deriv);
    return {to_double(r.value), to_double(r.deriv)};
  }
  const auto r = hurwitz_double(s, 1.0, ctx, deriv);
  return {r.value, r.deriv};
}

}  // namespace

void EvalContext::validate() const {
  if (digits < 15 || digits > 45) throw ValidationError("precision must be between 15 and 45 digits");
  if (!(em_scale > 0.0) || em_offset < 1) throw ValidationError("Euler-Maclaurin cutoff parameters must be positive");
  if (bernoulli_depth < 4 || bernoulli_depth > 200) throw ValidationError("Bernoulli depth must be in [4, 200]");
}

std::size_t EvalContext::cutoff(double t) const {
  return static_cast<std::size_t>(std::ceil(em_scale * std::abs(t))) + static_cast<std::size_t>(em_offset);
}

cplx zeta(cplx s, const EvalContext& ctx) { return zeta_impl(s, ctx, false).value; }
cplx zeta_deriv(cplx s, const EvalContext& ctx) { return zeta_impl(s, ctx, true).deriv; }
ValueDeriv zeta_with_deriv(cplx s, const EvalContext& ctx) { return zeta_impl(s, ctx, true); }

cplx hurwitz_zeta(cplx s, double a, const EvalContext& ctx) {
  ctx.validate();
  if (!(a > 0.0)) throw ValidationError("hurwitz_zeta: a must be positive");
  check_zeta_pole(s);
  if (ctx.extended()) return to_double(hurwitz_mp(to_mp(s), mp_real(a), ctx, false).value);
  return hurwitz_double(s, a, ctx, false).value;
}

cplx l_function(cplx s, const DirichletCharacter& chi, const EvalContext& ctx) {
  return l_impl(s, chi, ctx, false).value;
}
cplx l_deriv(cplx s, const DirichletCharacter& chi, const EvalContext& ctx) { return l_impl(s, chi, ctx, true).deriv; }
ValueDeriv l_with_deriv(cplx s, const DirichletCharacter& chi, const EvalContext& ctx) {
  return l_impl(s, chi, ctx, true);
}

mp_complex zeta_mp(const mp_complex& s, const EvalContext& ctx) {
  check_zeta_pole(to_double(s));
  return hurwitz_mp(s, mp_real(1), ctx, false).value;
}

mp_complex l_function_mp(const mp_complex& s, const DirichletCharacter& chi, const EvalContext& ctx) {
  const auto q = chi.modulus();
  mp_complex h(0);
  for (std::uint64_t a = 1; a < q; ++a) {
    const int c = chi(a);
    if (c == 0) continue;
    h += hurwitz_mp(s, mp_real(a) / mp_real(q), ctx, false, true).value * c;
  }
  return exp(-s * log(mp_real(q))) * h;
}

cplx log_gamma(cplx z) {
  if (near_nonpositive_integer(z)) throw PoleError("log_gamma: pole at " + fmt(z));
  return detail::log_gamma<double>(z);
}

cplx delta_ratio(cplx s, int delta) {
  if (delta != 0 && delta != 1) throw ValidationError("delta_ratio: delta must be 0 or 1");
  const cplx num = (1.0 - s + static_cast<double>(delta)) / 2.0;
  const cplx den = (s + static_cast<double>(delta)) / 2.0;
  if (near_nonpositive_integer(num) || near_nonpositive_integer(den)) {
    throw PoleError("delta_ratio: Gamma pole at s = " + fmt(s));
  }
  return std::exp((s - 0.5) * std::log(kPi) + log_gamma(num) - log_gamma(den));
}

cplx root_number(const DirichletCharacter& chi) {
  const cplx tau = gauss_sum(chi);
  const cplx i_delta = chi.parity() == 1 ? cplx(0.0, 1.0) : cplx(1.0, 0.0);
  return tau / (i_delta * std::sqrt(static_cast<double>(chi.modulus())));
}

double hardy_theta(double t, std::uint64_t q, int delta) {
  const cplx z((0.5 + delta) / 2.0, t / 2.0);
  return 0.5 * t * std::log(static_cast<double>(q) / kPi) + log_gamma(z).imag();
}

double hardy_z(double t, const DirichletCharacter* chi, const EvalContext& ctx) {
  const cplx s(0.5, t);
  const cplx f = chi == nullptr ? zeta(s, ctx) : l_function(s, *chi, ctx);
  const double th = chi == nullptr ? hardy_theta(t, 1, 0) : hardy_theta(t, chi->modulus(), chi->parity());
  return (std::polar(1.0, th) * f).real();
}

FiniteEulerProduct::FiniteEulerProduct(std::uint64_t q) : q_(q) {
  if (q < 1) throw ValidationError("finite Euler product: q must be >= 1");
  primes_ = distinct_prime_factors(q);
}

cplx FiniteEulerProduct::operator()(cplx s) const {
  cplx prod = 1.0;
  for (const auto p : primes_) {
    const double lp = std::log(static_cast<double>(p));
    const cplx den = 1.0 - std::exp(-s * lp);
    if (std::abs(den) < 1e-9) {
      throw PoleError("P(s): pole of the factor at p = " + std::to_string(p) + " near s = " + fmt(s));
    }
    prod /= den;
  }
  return prod;
}

double FiniteEulerProduct::bound(double sigma0) const {
  if (!(sigma0 > 0.0)) throw ValidationError("P(s) bound: sigma0 must be positive");
  double b = 1.0;
  for (const auto p : primes_) b /= 1.0 - std::pow(static_cast<double>(p), -sigma0);
  return b;
}

cplx p_product(const FiniteEulerProduct& p, cplx s) { return p(s); }

double bessel_j0_series(double z) {
  const long double h = static_cast<long double>(z) * z / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int m = 1; m < 200; ++m) {
    term *= -h / (static_cast<long double>(m) * m);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::max(1.0L, std::fabs(sum))) break;
  }
  return static_cast<double>(sum);
}

double bessel_j0_asymptotic(double z) {
  z = std::abs(z);
  if (z == 0.0) throw ValidationError("bessel_j0_asymptotic: z must be nonzero");
  // b_k = prod_{j<=k} (2j-1)^2 / (k! 8^k); P = sum (-1)^k b_{2k} z^{-2k}, Q = sum (-1)^{k+1} b_{2k+1} z^{-2k-1}
  double p = 0.0;
  double q = 0.0;
  double b = 1.0;
  double zp = 1.0;
  double prev = INFINITY;
  for (int k = 0; k < 60; ++k) {
    const double term = b / zp;
    if (term > prev || term < 1e-18) break;
    prev = term;
    const int r = k % 4;  // sign pattern by order: +P, -Q, -P, +Q
    if (r == 0) p += term;
    if (r == 1) q -= term;
    if (r == 2) p -= term;
    if (r == 3) q += term;
    const double j = k + 1;
    b *= (2.0 * j - 1.0) * (2.0 * j - 1.0) / (8.0 * j);
    zp *= z;
  }
  const double w = z - kPi / 4.0;
  return std::sqrt(2.0 / (kPi * z)) * (p * std::cos(w) - q * std::sin(w));
}

double bessel_j0(double z) {
  z = std::abs(z);
  return z <= 12.0 ? bessel_j0_series(z) : bessel_j0_asymptotic(z);
}

namespace {

// log G(1 + z) for |Re z| <= 1/2 via the Weierstrass product, closed-form tail.
cplx log_g1p_base(cplx z) {
  constexpr double euler_gamma = std::numbers::egamma;
  const double az = std::abs(z);
  const auto n_terms = static_cast<std::size_t>(std::max(64.0, std::ceil(16.0 * az)));
  CompensatedComplexSum s;
  for (std::size_t n = 1; n <= n_terms; ++n) {
    const double nd = static_cast<double>(n);
    const cplx w = z / nd;
    if (std::abs(w) < 0.1) {
      // n (log(1+w) - w + w^2/2) = n sum_{j>=3} (-1)^{j+1} w^j / j
      cplx acc = 0.0;
      cplx wp = w * w * w;
      for (int j = 3; j < 60; ++j) {
        const cplx t = wp / static_cast<double>(j);
        acc += (j % 2 == 1) ? t : -t;
        if (std::abs(t) < 1e-20 * std::abs(acc)) break;
        wp *= w;
      }
      s.add(nd * acc);
    } else {
      s.add(nd * std::log(1.0 + w) - z + z * z / (2.0 * nd));
    }
  }
  // sum_{n > N} = sum_{j>=3} (-1)^{j+1} z^j / j * zeta(j-1, N+1)
  const double big = static_cast<double>(n_terms) + 1.0;
  cplx zp = z * z * z;
  for (int j = 3; j < 200; ++j) {
    const auto hz = detail::hurwitz_em<double>(cplx(j - 1.0, 0.0), big, 0, 30, kDoubleTol, false).value.real();
    const cplx t = zp / static_cast<double>(j) * hz;
    s.add((j % 2 == 1) ? t : -t);
    if (std::abs(t) < 1e-20 * std::max(1.0, std::abs(s.value()))) break;
    zp *= z;
  }
  return 0.5 * z * std::log(2.0 * kPi) - 0.5 * (z + (1.0 + euler_gamma) * z * z) + s.value();
}

}  // namespace

cplx log_barnes_g(cplx s) {
  if (near_nonpositive_integer(s)) throw PoleError("log_barnes_g: G vanishes at " + fmt(s));
  cplx z = s - 1.0;
  CompensatedComplexSum acc;
  while (z.real() > 0.5) {
    acc.add(log_gamma(z));
    z -= 1.0;
  }
  while (z.real() < -0.5) {
    acc.add(-log_gamma(z + 1.0));
    z += 1.0;
  }
  return log_g1p_base(z) + acc.value();
}

cplx barnes_g(cplx s) {
  if (near_nonpositive_integer(s)) return 0.0;
  return std::exp(log_barnes_g(s));
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
  std::vector<std::uint64_t> primes;
  if (n < 2) return primes;
  std::vector<bool> composite(n + 1, false);
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
  }
  return primes;
}

AlphaResult alpha_r(double r, std::uint64_t prime_cutoff, double tolerance) {
  if (prime_cutoff < 2) throw ValidationError("alpha_r: prime cutoff must be >= 2");
  if (!(r > -1.5)) throw ValidationError("alpha_r: r must exceed -3/2");
  const auto primes = primes_up_to(prime_cutoff);
  CompensatedSum log_total;
  double last_log = 0.0;
  for (const auto p : primes) {
    const double inv = 1.0 / static_cast<double>(p);
    // sum_m c_m^2 p^{-m}, c_0 = 1, c_m = c_{m-1} (m - 1 + r) / m
    double c = 1.0;
    double pw = 1.0;
    double inner = 1.0;
    for (int m = 1; m < 20000; ++m) {
      c *= (m - 1 + r) / m;
      pw *= inv;
      const double term = c * c * pw;
      inner += term;
      if (c == 0.0 || (m > r + 2 && term < 1e-18 * inner)) break;
    }
    last_log = r * r * std::log1p(-inv) + std::log(inner);
    log_total.add(last_log);
  }
  AlphaResult out;
  out.prime_cutoff = prime_cutoff;
  out.value = std::exp(log_total.value());
  out.last_factor_deviation = std::abs(std::expm1(last_log));
  const double plast = static_cast<double>(primes.back());
  // log f_p ~ A / p^2 for large p; sum over p > P of 1/p^2 ~ 1 / (P log P)
  const double a = plast * plast * last_log;
  out.residual_estimate = std::abs(a) / (plast * std::log(plast));
  out.cutoff_sufficient = out.last_factor_deviation <= tolerance;
  return out;
}

HkoResult hko_constant(double r, std::uint64_t prime_cutoff) {
  if (!(r > -1.5)) throw ValidationError("hko_constant: r must exceed -3/2");
  HkoResult out;
  out.alpha = alpha_r(r, prime_cutoff);
  out.g_ratio = std::exp(2.0 * log_barnes_g(cplx(r + 2.0)) - log_barnes_g(cplx(2.0 * r + 3.0))).real();
  out.value = out.g_ratio * out.alpha.value / (2.0 * kPi);
  return out;
}

}  // namespace kfcl
