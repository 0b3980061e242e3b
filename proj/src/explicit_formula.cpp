#include "kfcl/explicit_formula.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <future>
#include <numbers>

#include "kfcl/errors.hpp"
#include "kfcl/numerics.hpp"

namespace kfcl {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

FunctionId required_zero_function(const SummandSpec& spec) {
  return spec.k % 2 == 0 ? FunctionId::zeta_function() : FunctionId::l_function(spec.character);
}

cplx zf_value(const SummandSpec& spec, cplx rho, cplx deriv) {
  if (std::abs(deriv) < 1e-12) throw NumericalError("Z_f: derivative below simplicity threshold");
  const FiniteEulerProduct p(spec.character.modulus());
  const double k = spec.k;
  if (spec.k % 2 == 0) {
    return spec.modified ? p(rho / k) / deriv : p(rho) / deriv;
  }
  return spec.modified ? p(rho / k) / (deriv * p(rho)) : 1.0 / deriv;
}

std::vector<ResidueTerm> residue_coefficients(const SummandSpec& spec, const ZeroCatalog& catalog, double t,
                                              const EvalContext& ctx, unsigned threads) {
  const auto want = required_zero_function(spec);
  if (!(catalog.function() == want)) {
    throw ValidationError("residue_coefficients: k = " + std::to_string(spec.k) + " needs a " + want.describe() +
                          " catalog, got " + catalog.function().describe());
  }
  if (t > catalog.height()) throw DataError("residue_coefficients: T beyond catalog height");
  auto recs = catalog.upto(t);
  if (!recs.empty() && recs.back().gamma >= t) recs = recs.first(recs.size() - 1);  // strict gamma < T
  std::vector<ResidueTerm> out(recs.size());
  const double k = spec.k;
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < recs.size(); i += stride) {
      if (!recs[i].deriv) throw DataError("residue_coefficients: catalog not enriched at gamma = " + std::to_string(recs[i].gamma));
      const cplx rho(0.5, recs[i].gamma);
      const cplx l = l_function(rho / k, spec.character, ctx);
      out[i] = ResidueTerm{recs[i].gamma, l * zf_value(spec, rho, *recs[i].deriv) / rho};
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(recs.size(), 1))));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned i = 0; i < threads; ++i) jobs.push_back(std::async(std::launch::async, work, i, threads));
    for (auto& j : jobs) j.get();
  }
  return out;
}

CoefficientDecay coefficient_decay(std::span<const ResidueTerm> terms, unsigned k) {
  CoefficientDecay d;
  d.expected_slope = -(0.5 + 0.5 / k);
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& t : terms) {
    const double a = std::abs(t.coeff);
    d.max_scaled = std::max(d.max_scaled, a * std::pow(t.gamma, -d.expected_slope));
    lx.push_back(std::log(t.gamma));
    ly.push_back(std::log(a));
  }
  if (lx.size() >= 3) {
    const auto fit = fit_line(lx, ly);
    d.slope = fit.coefficients[1];
    d.slope_se = fit.std_errors[1];
  }
  return d;
}

double explicit_sum(std::span<const ResidueTerm> terms, double x, unsigned k, unsigned threads) {
  if (!(x > 0.0)) throw ValidationError("explicit_sum: x must be positive");
  const double lx = std::log(x);
  const double mag = std::exp(lx / (2.0 * k));
  return deterministic_sum(
      terms.size(),
      [&](std::size_t i) {
        const double th = terms[i].gamma * lx / k;
        return 2.0 * mag * (terms[i].coeff.real() * std::cos(th) - terms[i].coeff.imag() * std::sin(th));
      },
      threads, 256);
}

double explicit_residual(const StepSeries& series, std::span<const ResidueTerm> terms, double x, unsigned threads) {
  return static_cast<double>(series.at(x)) - explicit_sum(terms, x, series.k(), threads);
}

ErrorModel ErrorModel::for_k(unsigned k) {
  if (k < 2) throw ValidationError("error model: k must be >= 2");
  ErrorModel m;
  m.k = k;
  m.eps = 1.0 / (4.0 * k);
  m.c.fill(1.0);
  return m;
}

std::array<double, 5> envelope_terms(const ErrorModel& m, double x, double t) {
  if (x < 2.0 || t < 2.0) throw ValidationError("error envelope: x and T must be >= 2");
  const double lx = std::log(x);
  const double e = m.eps;
  return {m.c[0], m.c[1] * x * lx / t, m.c[2] * x / (std::pow(t, 1.0 - e) * lx), m.c[3] * std::pow(x * t, e),
          m.c[4] * std::pow(x, 1.0 / (2.0 * m.k)) * std::sqrt(std::log(t)) / std::pow(t, e)};
}

double error_envelope(const ErrorModel& model, double x, double t) {
  const auto v = envelope_terms(model, x, t);
  CompensatedSum s;
  for (double d : v) s.add(d);
  return s.value();
}

std::size_t dominant_term(const ErrorModel& model, double x, double t) {
  const auto v = envelope_terms(model, x, t);
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

ErrorModel fit_error_model(std::span<const ResidualSample> samples, unsigned k) {
  if (samples.size() < 5) throw DataError("fit_error_model: need at least 5 calibration samples");
  ErrorModel unit = ErrorModel::for_k(k);
  std::vector<double> design;
  std::vector<double> y;
  for (const auto& s : samples) {
    const auto row = envelope_terms(unit, s.x, s.t);
    const double w = 1.0 / (s.abs_residual + 1.0);
    for (double v : row) design.push_back(v * w);
    y.push_back(s.abs_residual * w);
  }
  const auto c = nnls(design, 5, y);
  ErrorModel m = unit;
  const double cmax = *std::max_element(c.begin(), c.end());
  for (std::size_t i = 0; i < 5; ++i) m.c[i] = cmax > 0.0 ? std::max(c[i], 1e-6 * cmax) : 1.0;
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, s.abs_residual / error_envelope(m, s.x, s.t));
  if (scale > 1.0) {
    for (auto& v : m.c) v *= scale;
  }
  return m;
}

cplx generating_function(const SummandSpec& spec, cplx s, const EvalContext& ctx) {
  const FiniteEulerProduct p(spec.character.modulus());
  const double k = spec.k;
  const cplx l = l_function(s, spec.character, ctx);
  if (spec.k % 2 == 0) {
    const cplx z = zeta(k * s, ctx);
    return spec.modified ? l * p(s) / z : l * p(k * s) / z;
  }
  const cplx lk = l_function(k * s, spec.character, ctx);
  return spec.modified ? l * p(s) / (lk * p(k * s)) : l / lk;
}

PerronResult perron_integral(const SummandSpec& spec, double x, double t, double sigma0, const EvalContext& ctx) {
  if (!(x > 1.0)) throw ValidationError("perron_integral: x must exceed 1");
  if (x == std::floor(x)) throw ValidationError("perron_integral: x must not be an integer");
  if (!(t > 0.0)) throw ValidationError("perron_integral: T must be positive");
  const double lx = std::log(x);
  if (sigma0 <= 0.0) sigma0 = 1.0 + 1.0 / lx;
  if (!(sigma0 > 1.0)) throw ValidationError("perron_integral: sigma0 must exceed 1");
  const auto integrand = [&](double u) {
    const cplx s(sigma0, u);
    return (generating_function(spec, s, ctx) * std::exp(s * lx) / s).real();
  };
  // one oscillation of x^{it} per panel, capped so F's own oscillation is resolved for x near 1
  const double period = std::min(2.0 * kPi / lx, 2.0);
  PerronResult out;
  out.sigma0 = sigma0;
  CompensatedSum total;
  CompensatedSum err;
  for (double a = 0.0; a < t; a += period) {
    const double b = std::min(t, a + period);
    double e = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, b, 0, 0.0, &e);
    total.add(v);
    err.add(std::abs(e));
    ++out.panels;
  }
  out.value = total.value() / kPi;
  out.error_estimate = err.value() / kPi;
  if (!std::isfinite(out.value)) throw NumericalError("perron_integral: quadrature did not converge");
  return out;
}

double window_variance(std::span<const ResidueTerm> terms, double t_lo, double t_hi, double z, unsigned k) {
  if (!(t_lo < t_hi)) throw ValidationError("window_variance: need T_lo < T_hi");
  std::vector<ResidueTerm> band;
  for (const auto& term : terms) {
    if (term.gamma > t_lo && term.gamma <= t_hi) band.push_back(term);
  }
  if (band.empty()) return 0.0;
  const double spread = (band.back().gamma - band.front().gamma) / k;
  const auto panels = static_cast<std::size_t>(std::ceil(spread / kPi)) + 4;
  const double h = 1.0 / static_cast<double>(panels);
  using gl = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = gl::abscissa();
  const auto& weights = gl::weights();
  auto sq = [&](double y) {
    cplx s = 0.0;
    for (const auto& term : band) s += term.coeff * std::polar(1.0, y * term.gamma / k);
    return std::norm(s);
  };
  CompensatedSum total;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = z + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      // boost stores the non-negative half of the symmetric rule
      if (nodes[i] == 0.0) {
        total.add(weights[i] * sq(mid) * h / 2.0);
      } else {
        total.add(weights[i] * (sq(mid - nodes[i] * h / 2.0) + sq(mid + nodes[i] * h / 2.0)) * h / 2.0);
      }
    }
  }
  return total.value();
}

}  // namespace kfcl
