#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "kfcl/characters.hpp"
#include "kfcl/special_kernel.hpp"

namespace kfcl {

using cplx = std::complex<double>;

/// Evaluation knobs. Immutable in use; pass by const reference.
struct EvalContext {
  /// Decimal digits. 15 uses hardware doubles with compensated sums;
  /// 16..45 switches the kernels to 50-digit software floats.
  int digits = 15;
  /// Euler-Maclaurin split point M >= em_scale * |Im s| + em_offset.
  double em_scale = 0.3;
  int em_offset = 20;
  /// Maximum number of Bernoulli correction terms.
  int bernoulli_depth = 40;

  void validate() const;
  [[nodiscard]] bool extended() const { return digits > 15; }
  [[nodiscard]] std::size_t cutoff(double t) const;
};

struct ValueDeriv {
  cplx value;
  cplx deriv;
};

cplx zeta(cplx s, const EvalContext& ctx = {});
cplx zeta_deriv(cplx s, const EvalContext& ctx = {});
ValueDeriv zeta_with_deriv(cplx s, const EvalContext& ctx = {});

/// Hurwitz zeta(s, a) for a > 0.
cplx hurwitz_zeta(cplx s, double a, const EvalContext& ctx = {});

cplx l_function(cplx s, const DirichletCharacter& chi, const EvalContext& ctx = {});
cplx l_deriv(cplx s, const DirichletCharacter& chi, const EvalContext& ctx = {});
ValueDeriv l_with_deriv(cplx s, const DirichletCharacter& chi, const EvalContext& ctx = {});

/// Full-precision variants; ctx.digits is ignored (always 50-digit).
mp_complex zeta_mp(const mp_complex& s, const EvalContext& ctx = {});
mp_complex l_function_mp(const mp_complex& s, const DirichletCharacter& chi, const EvalContext& ctx = {});

/// Principal branch of log Gamma. Throws PoleError at non-positive integers.
cplx log_gamma(cplx z);

/// pi^{s-1/2} Gamma((1-s+delta)/2) / Gamma((s+delta)/2).
cplx delta_ratio(cplx s, int delta);

/// Root-number form of the L functional equation:
/// L(s) = [tau / (i^delta sqrt q)] q^{1/2-s} Delta(s) L(1-s). Returns the
/// bracketed constant.
cplx root_number(const DirichletCharacter& chi);

/// Phase making e^{i theta} L(1/2+it) real: (t/2) log(q/pi) + Im log Gamma((1/2+delta+it)/2).
/// q = 1, delta = 0 gives the Riemann-Siegel theta.
double hardy_theta(double t, std::uint64_t q, int delta);

/// Z(t) = Re(e^{i theta(t)} L(1/2 + it)); chi == nullptr selects zeta.
double hardy_z(double t, const DirichletCharacter* chi, const EvalContext& ctx = {});

class FiniteEulerProduct {
 public:
  explicit FiniteEulerProduct(std::uint64_t q);

  [[nodiscard]] std::uint64_t modulus() const { return q_; }
  [[nodiscard]] const std::vector<std::uint64_t>& primes() const { return primes_; }

  /// prod_{p | q} (1 - p^{-s})^{-1}.
  [[nodiscard]] cplx operator()(cplx s) const;
  /// prod (1 - p^{-sigma0})^{-1}, an upper bound for |P(s)| on Re s >= sigma0 > 0.
  [[nodiscard]] double bound(double sigma0) const;

 private:
  std::uint64_t q_;
  std::vector<std::uint64_t> primes_;
};

cplx p_product(const FiniteEulerProduct& p, cplx s);

double bessel_j0(double z);
double bessel_j0_series(double z);
double bessel_j0_asymptotic(double z);

cplx log_barnes_g(cplx s);
/// G(s); exactly 0 at non-positive integers.
cplx barnes_g(cplx s);

struct AlphaResult {
  double value = 0.0;
  std::uint64_t prime_cutoff = 0;
  /// |f_p - 1| for the last prime included.
  double last_factor_deviation = 0.0;
  /// Estimated relative effect of the omitted primes.
  double residual_estimate = 0.0;
  bool cutoff_sufficient = true;
};

/// alpha(r) = prod_p (1 - 1/p)^{r^2} sum_m (Gamma(m+r)/(m! Gamma(r)))^2 p^{-m},
/// truncated at p <= prime_cutoff.
AlphaResult alpha_r(double r, std::uint64_t prime_cutoff, double tolerance = 1e-6);

struct HkoResult {
  double value = 0.0;
  double g_ratio = 0.0;
  AlphaResult alpha;
};

/// (1/2pi) G(r+2)^2 / G(2r+3) alpha(r), for r > -3/2.
HkoResult hko_constant(double r, std::uint64_t prime_cutoff = 100000);

std::vector<std::uint64_t> primes_up_to(std::uint64_t n);

}  // namespace kfcl
