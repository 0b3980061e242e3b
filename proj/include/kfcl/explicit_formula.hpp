#pragma once

#include <array>
#include <span>
#include <vector>

#include "kfcl/kfree.hpp"
#include "kfcl/special.hpp"
#include "kfcl/zeros.hpp"

namespace kfcl {

/// One zero's contribution: coeff = L(rho/k, chi) Z_f(rho) / rho, rho = 1/2 + i gamma.
struct ResidueTerm {
  double gamma = 0.0;
  cplx coeff;
};

/// The catalog a summand's explicit formula runs over: zeta zeros for even k,
/// L(s, chi) zeros for odd k.
FunctionId required_zero_function(const SummandSpec& spec);

/// Z_f(rho) from the derivative F'(rho) of the catalog function:
///   k even: P(rho)/zeta'(rho)        modified: P(rho/k)/zeta'(rho)
///   k odd:  1/L'(rho)                modified: P(rho/k)/(L'(rho) P(rho))
cplx zf_value(const SummandSpec& spec, cplx rho, cplx deriv);

/// Coefficients for every catalog zero with 0 < gamma < T. Requires the
/// catalog to match required_zero_function(spec) and to carry derivatives.
std::vector<ResidueTerm> residue_coefficients(const SummandSpec& spec, const ZeroCatalog& catalog, double t,
                                              const EvalContext& ctx = {}, unsigned threads = 1);

struct CoefficientDecay {
  double max_scaled = 0.0;  // max |c| gamma^{1/2 + 1/2k}
  double slope = 0.0;       // of log|c| against log gamma
  double slope_se = 0.0;
  double expected_slope = 0.0;  // -(1/2 + 1/2k)
};

CoefficientDecay coefficient_decay(std::span<const ResidueTerm> terms, unsigned k);

/// 2 sum Re(coeff x^{rho/k}), x^{rho/k} = exp((rho/k) log x). Fixed-chunk
/// compensated summation, so the value is independent of `threads`.
double explicit_sum(std::span<const ResidueTerm> terms, double x, unsigned k, unsigned threads = 1);

/// S_f(x) - explicit_sum.
double explicit_residual(const StepSeries& series, std::span<const ResidueTerm> terms, double x, unsigned threads = 1);

/// Constants of 1 + x log x/T + x/(T^{1-eps} log x) + x^eps T^eps + x^{1/2k} (log T)^{1/2}/T^eps.
struct ErrorModel {
  unsigned k = 2;
  double eps = 0.125;
  std::array<double, 5> c{};

  static ErrorModel for_k(unsigned k);
};

std::array<double, 5> envelope_terms(const ErrorModel& model, double x, double t);
double error_envelope(const ErrorModel& model, double x, double t);
/// Index of the largest envelope term.
std::size_t dominant_term(const ErrorModel& model, double x, double t);

struct ResidualSample {
  double x = 0.0;
  double t = 0.0;
  double abs_residual = 0.0;
};

/// Non-negative least squares on relative residuals (rows scaled by
/// 1/(|residual| + 1)), then a common rescale so the envelope covers every
/// calibration sample.
ErrorModel fit_error_model(std::span<const ResidualSample> samples, unsigned k);

/// The Dirichlet series sum f(n) n^{-s}, in closed form:
///   k even: L(s) P(ks)/zeta(ks)      modified: L(s) P(s)/zeta(ks)
///   k odd:  L(s)/L(ks)               modified: L(s) P(s)/(L(ks) P(ks))
cplx generating_function(const SummandSpec& spec, cplx s, const EvalContext& ctx = {});

struct PerronResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double sigma0 = 0.0;
  std::size_t panels = 0;
};

/// (1/2 pi i) int_{sigma0 - iT}^{sigma0 + iT} F(s) x^s / s ds, evaluated as
/// (1/pi) int_0^T Re(F x^s / s) dt over one-period Gauss-Kronrod panels.
/// sigma0 <= 0 selects 1 + 1/log x.
PerronResult perron_integral(const SummandSpec& spec, double x, double t, double sigma0 = 0.0,
                             const EvalContext& ctx = {});

/// int_Z^{Z+1} |sum_{T_lo < gamma <= T_hi} coeff e^{i y gamma/k}|^2 dy by
/// composite Gauss-Legendre quadrature resolving the highest beat frequency.
double window_variance(std::span<const ResidueTerm> terms, double t_lo, double t_hi, double z, unsigned k);

}  // namespace kfcl
