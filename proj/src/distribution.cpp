#include "kfcl/distribution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "kfcl/errors.hpp"
#include "kfcl/numerics.hpp"

namespace kfcl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kChunks = 64;

struct Accumulator {
  std::vector<CompensatedSum> mass;
  std::array<CompensatedSum, 4> moment;
};

void check_window(const StepSeries& series, double y0, double y1) {
  if (!(y0 >= 0.0) || !(y1 > y0)) throw ValidationError("log distribution: need Y > y0 >= 0");
  const double top = static_cast<double>(series.limit()) + 1.0;
  if (std::exp(y1) > top * (1.0 + 1e-12)) throw ValidationError("log distribution: e^Y beyond series range");
}

// Calls fn(ya, yb, S) for the constant pieces of S_f(e^y) on [y0, y1).
template <typename Fn>
void for_each_y_piece(const StepSeries& series, double y0, double y1, Fn&& fn) {
  const double xlo = std::exp(y0);
  const double xhi = std::exp(y1);
  series.for_each_piece(xlo, xhi, [&](double a, double b, std::int64_t s) {
    const double ya = a == xlo ? y0 : std::log(a);
    const double yb = b == xhi ? y1 : std::log(b);
    if (yb > ya) fn(ya, yb, s);
  });
}

// y at which S e^{-y/2k} equals v, on the side of the arc where it exists.
double y_at(double s, double v, double two_k) {
  if (s > 0) {
    if (v <= 0) return kInf;
    if (v == kInf) return -kInf;
    return two_k * (std::log(s) - std::log(v));
  }
  if (v >= 0) return kInf;
  if (v == -kInf) return -kInf;
  return two_k * (std::log(-s) - std::log(-v));
}

void accumulate(const StepSeries& series, double y0, double y1, std::span<const double> edges, Accumulator& acc) {
  const double two_k = 2.0 * series.k();
  const std::size_t nb = edges.size() - 1;
  auto bin_of = [&](double v) {
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    return static_cast<std::size_t>(it - (edges.begin() + 1));
  };
  // interior edges only; the outer cells absorb everything beyond them
  auto edge = [&](std::size_t j) { return j == 0 ? -kInf : (j == nb ? kInf : edges[j]); };
  for_each_y_piece(series, y0, y1, [&](double ya, double yb, std::int64_t si) {
    const double s = static_cast<double>(si);
    const double len = yb - ya;
    if (si == 0) {
      acc.mass[bin_of(0.0)].add(len);
      return;
    }
    const double ea = std::exp(-ya / two_k);
    // int_ya^yb (S e^{-y/2k})^m dy
    double sm = 1.0;
    double em = 1.0;
    for (int m = 1; m <= 4; ++m) {
      sm *= s;
      em *= ea;
      acc.moment[m - 1].add(sm * (two_k / m) * em * -std::expm1(-m * len / two_k));
    }
    const double pa = s * ea;
    const double pb = s * std::exp(-yb / two_k);
    std::size_t j0 = bin_of(std::min(pa, pb));
    const std::size_t j1 = bin_of(std::max(pa, pb));
    if (j0 == j1) {
      acc.mass[j0].add(len);
      return;
    }
    for (; j0 <= j1; ++j0) {
      double lo = y_at(s, edge(j0), two_k);
      double hi = y_at(s, edge(j0 + 1), two_k);
      if (lo > hi) std::swap(lo, hi);
      const double m = std::min(hi, yb) - std::max(lo, ya);
      if (m > 0) acc.mass[j0].add(m);
    }
  });
}

EmpiricalDistribution build(const StepSeries& series, double y0, double y1, std::span<const double> edges,
                            unsigned threads) {
  const std::size_t nb = edges.size() - 1;
  std::vector<Accumulator> parts(kChunks);
  const double h = (y1 - y0) / static_cast<double>(kChunks);
  auto run = [&](std::size_t c) {
    parts[c].mass.assign(nb, CompensatedSum{});
    const double a = y0 + static_cast<double>(c) * h;
    const double b = c + 1 == kChunks ? y1 : y0 + static_cast<double>(c + 1) * h;
    accumulate(series, a, b, edges, parts[c]);
  };
  threads = std::max(1U, threads);
  if (threads == 1) {
    for (std::size_t c = 0; c < kChunks; ++c) run(c);
  } else {
    for (std::size_t c0 = 0; c0 < kChunks; c0 += threads) {
      std::vector<std::future<void>> jobs;
      for (std::size_t c = c0; c < std::min(kChunks, c0 + threads); ++c) jobs.push_back(std::async(std::launch::async, run, c));
      for (auto& j : jobs) j.get();
    }
  }
  std::vector<CompensatedSum> mass(nb);
  std::array<CompensatedSum, 4> moment;
  for (const auto& p : parts) {
    for (std::size_t j = 0; j < nb; ++j) mass[j] += p.mass[j];
    for (std::size_t m = 0; m < 4; ++m) moment[m] += p.moment[m];
  }
  EmpiricalDistribution d;
  d.edges.assign(edges.begin(), edges.end());
  d.y0 = y0;
  d.y1 = y1;
  d.measure = y1 - y0;
  d.masses.resize(nb);
  CompensatedSum total;
  for (std::size_t j = 0; j < nb; ++j) total.add(mass[j].value());
  for (std::size_t j = 0; j < nb; ++j) d.masses[j] = mass[j].value() / total.value();
  d.mean = moment[0].value() / d.measure;
  d.second_moment = moment[1].value() / d.measure;
  d.third_moment = moment[2].value() / d.measure;
  d.fourth_moment = moment[3].value() / d.measure;
  return d;
}

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw ValidationError("log distribution: need at least one bin");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw ValidationError("log distribution: edges must be strictly ascending");
  }
}

}  // namespace

double EmpiricalDistribution::cdf(double v) const {
  if (v <= edges.front()) return 0.0;
  if (v >= edges.back()) return 1.0;
  const auto j = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
  CompensatedSum below;
  for (std::size_t i = 0; i < j; ++i) below.add(masses[i]);
  return below.value() + masses[j] * (v - edges[j]) / (edges[j + 1] - edges[j]);
}

double EmpiricalDistribution::kurtosis() const {
  const double m = mean;
  const double central4 = fourth_moment - 4.0 * m * third_moment + 6.0 * m * m * second_moment - 3.0 * m * m * m * m;
  const double v = variance();
  return v > 0.0 ? central4 / (v * v) : 0.0;
}

EmpiricalDistribution exact_log_distribution(const StepSeries& series, double y0, double y1, std::size_t bins,
                                             unsigned threads) {
  check_window(series, y0, y1);
  if (bins == 0) throw ValidationError("log distribution: need at least one bin");
  double lo = kInf;
  double hi = -kInf;
  const double two_k = 2.0 * series.k();
  for_each_y_piece(series, y0, y1, [&](double ya, double yb, std::int64_t si) {
    const double s = static_cast<double>(si);
    const double pa = s * std::exp(-ya / two_k);
    const double pb = s * std::exp(-yb / two_k);
    lo = std::min({lo, pa, pb});
    hi = std::max({hi, pa, pb});
  });
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(bins + 1);
  for (std::size_t j = 0; j <= bins; ++j) edges[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(bins);
  edges.back() = hi;
  auto d = build(series, y0, y1, edges, threads);
  d.support_lo = lo;
  d.support_hi = hi;
  return d;
}

EmpiricalDistribution exact_log_distribution(const StepSeries& series, double y0, double y1,
                                             std::span<const double> edges, unsigned threads) {
  check_window(series, y0, y1);
  check_edges(edges);
  auto d = build(series, y0, y1, edges, threads);
  d.support_lo = kInf;
  d.support_hi = -kInf;
  const double two_k = 2.0 * series.k();
  for_each_y_piece(series, y0, y1, [&](double ya, double yb, std::int64_t si) {
    const double s = static_cast<double>(si);
    d.support_lo = std::min({d.support_lo, s * std::exp(-ya / two_k), s * std::exp(-yb / two_k)});
    d.support_hi = std::max({d.support_hi, s * std::exp(-ya / two_k), s * std::exp(-yb / two_k)});
  });
  return d;
}

EmpiricalDistribution mix_distributions(std::span<const EmpiricalDistribution> parts) {
  if (parts.empty()) throw ValidationError("mix_distributions: nothing to mix");
  EmpiricalDistribution out;
  out.edges = parts.front().edges;
  out.y0 = parts.front().y0;
  out.y1 = parts.front().y1;
  out.support_lo = kInf;
  out.support_hi = -kInf;
  std::vector<CompensatedSum> mass(out.edges.size() - 1);
  CompensatedSum measure;
  std::array<CompensatedSum, 4> moment;
  for (const auto& p : parts) {
    if (p.edges != out.edges) throw ValidationError("mix_distributions: bin edges differ");
    for (std::size_t j = 0; j < mass.size(); ++j) mass[j].add(p.masses[j] * p.measure);
    measure.add(p.measure);
    moment[0].add(p.mean * p.measure);
    moment[1].add(p.second_moment * p.measure);
    moment[2].add(p.third_moment * p.measure);
    moment[3].add(p.fourth_moment * p.measure);
    out.y0 = std::min(out.y0, p.y0);
    out.y1 = std::max(out.y1, p.y1);
    out.support_lo = std::min(out.support_lo, p.support_lo);
    out.support_hi = std::max(out.support_hi, p.support_hi);
  }
  out.measure = measure.value();
  out.masses.resize(mass.size());
  for (std::size_t j = 0; j < mass.size(); ++j) out.masses[j] = mass[j].value() / out.measure;
  out.mean = moment[0].value() / out.measure;
  out.second_moment = moment[1].value() / out.measure;
  out.third_moment = moment[2].value() / out.measure;
  out.fourth_moment = moment[3].value() / out.measure;
  return out;
}

EmpiricalDistribution histogram_from_samples(std::span<const double> samples, std::span<const double> edges) {
  check_edges(edges);
  if (samples.empty()) throw ValidationError("histogram: no samples");
  EmpiricalDistribution d;
  d.edges.assign(edges.begin(), edges.end());
  d.masses.assign(edges.size() - 1, 0.0);
  std::vector<std::size_t> counts(d.masses.size(), 0);
  std::array<CompensatedSum, 4> moment;
  d.support_lo = kInf;
  d.support_hi = -kInf;
  for (double v : samples) {
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
    ++counts[static_cast<std::size_t>(it - (edges.begin() + 1))];
    double p = 1.0;
    for (auto& m : moment) {
      p *= v;
      m.add(p);
    }
    d.support_lo = std::min(d.support_lo, v);
    d.support_hi = std::max(d.support_hi, v);
  }
  const auto n = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < counts.size(); ++j) d.masses[j] = static_cast<double>(counts[j]) / n;
  d.measure = 1.0;
  d.mean = moment[0].value() / n;
  d.second_moment = moment[1].value() / n;
  d.third_moment = moment[2].value() / n;
  d.fourth_moment = moment[3].value() / n;
  return d;
}

double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  std::vector<double> knots = a.edges;
  knots.insert(knots.end(), b.edges.begin(), b.edges.end());
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  double d = 0.0;
  for (double v : knots) d = std::max(d, std::abs(a.cdf(v) - b.cdf(v)));
  return std::min(d, 1.0);
}

double variance_integral(const StepSeries& series, double x_hi, double x_lo) {
  if (!(x_lo >= 1.0) || !(x_hi > x_lo)) throw ValidationError("variance_integral: need 1 <= x_lo < x_hi");
  if (x_hi > static_cast<double>(series.limit()) + 1.0) throw ValidationError("variance_integral: X beyond series range");
  const double inv_k = 1.0 / series.k();
  CompensatedSum total;
  series.for_each_piece(x_lo, x_hi, [&](double a, double b, std::int64_t si) {
    if (si == 0) return;
    const double s = static_cast<double>(si);
    // k (a^{-1/k} - b^{-1/k}), cancellation-free
    total.add(s * s * series.k() * std::pow(a, -inv_k) * -std::expm1(-inv_k * std::log1p((b - a) / a)));
  });
  return total.value();
}

BetaEstimate beta_k(std::span<const ResidueTerm> terms, unsigned k, std::uint64_t modulus) {
  BetaEstimate out;
  out.expected_exponent = 0.5 + 0.5 / k;
  CompensatedSum running;
  for (const auto& t : terms) {
    running.add(2.0 * std::norm(t.coeff));
    out.heights.push_back(t.gamma);
    out.partial_sums.push_back(running.value());
  }
  out.partial = running.value();
  out.estimate = out.partial;
  if (terms.size() < 8) return out;

  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& t : terms) {
    lx.push_back(std::log(t.gamma));
    ly.push_back(std::log(std::abs(t.coeff)));
  }
  out.decay_exponent = -fit_line(lx, ly).coefficients[1];

  // dN = (1/2pi) log(q gamma / 2pi) dgamma; G(u) = int_u^inf gamma^{-1-b} log(c gamma) dgamma
  const double c = static_cast<double>(modulus) / (2.0 * std::numbers::pi);
  auto big_g = [c](double u, double b) { return std::pow(u, -b) * (std::log(c * u) / b + 1.0 / (b * b)); };
  const double top = terms.back().gamma;
  CompensatedSum window;
  for (const auto& t : terms) {
    if (t.gamma > top / 2.0) window.add(2.0 * std::norm(t.coeff));
  }
  auto tail_for = [&](double a) {
    const double b = 2.0 * a - 1.0;
    if (!(b > 0.0)) return kInf;
    return window.value() * big_g(top, b) / (big_g(top / 2.0, b) - big_g(top, b));
  };
  out.tail_bound = tail_for(out.expected_exponent);
  out.tail = out.decay_exponent > 0.5 ? tail_for(out.decay_exponent) : out.tail_bound;
  out.estimate = out.partial + out.tail;
  out.uncertainty = std::abs(out.tail_bound - out.tail);

  const std::size_t n = terms.size();
  const double q1 = out.partial_sums[n / 2 + n / 4] - out.partial_sums[n / 2];
  const double q2 = out.partial_sums[n - 1] - out.partial_sums[n / 2 + n / 4];
  out.converging = out.decay_exponent > 0.5 && q2 <= q1;
  return out;
}

namespace {

double growth_g(double x, double half_k_inv, double p) { return std::pow(x, half_k_inv) * std::pow(std::log(x), p); }

}  // namespace

GrowthReport growth_envelope(const StepSeries& series, double c, double eps, double x_hi) {
  const double e2 = std::exp(2.0);
  if (!(x_hi > e2)) throw ValidationError("growth_envelope: X must exceed e^2");
  if (x_hi > static_cast<double>(series.limit()) + 1.0) throw ValidationError("growth_envelope: X beyond series range");
  if (!(c >= 0.0) || !(eps >= 0.0)) throw ValidationError("growth_envelope: C and eps must be non-negative");
  GrowthReport r;
  r.threshold = c;
  r.eps = eps;
  r.x_hi = x_hi;
  const double hk = 1.0 / (2.0 * series.k());
  const double p = 0.5 + eps;
  CompensatedSum measure;
  series.for_each_piece(e2, x_hi, [&](double a, double b, std::int64_t si) {
    const double s = std::abs(static_cast<double>(si));
    const double ga = growth_g(a, hk, p);
    if (s / ga > r.sup_ratio) {
      r.sup_ratio = s / ga;
      r.argmax = a;
    }
    if (c == kInf) return;
    const double v = c == 0.0 ? kInf : s / c;
    if (ga > v) return;
    if (growth_g(b, hk, p) <= v) {
      measure.add(std::log(b / a));
      return;
    }
    // h(y) = y/2k + p log y - log v is increasing and concave: Newton from the left stays left
    const double lv = std::log(v);
    double y = std::log(a);
    for (int it = 0; it < 60; ++it) {
      const double hval = y * hk + p * std::log(y) - lv;
      const double step = hval / (hk + p / y);
      y -= step;
      if (std::abs(step) <= 1e-15 * y) break;
    }
    measure.add(std::clamp(y - std::log(a), 0.0, std::log(b / a)));
  });
  r.exceed_log_measure = measure.value();
  return r;
}

double growth_threshold_for_measure(const StepSeries& series, double eps, double x_hi, double target) {
  if (!(target > 0.0)) throw ValidationError("growth threshold: target measure must be positive");
  double hi = growth_envelope(series, kInf, eps, x_hi).sup_ratio;
  double lo = 0.0;
  if (growth_envelope(series, lo, eps, x_hi).exceed_log_measure < target) return 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (growth_envelope(series, mid, eps, x_hi).exceed_log_measure < target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double conjecture_normalizer(double x, unsigned k) {
  if (!(x > 16.0)) throw ValidationError("conjecture_normalizer: x must exceed 16");
  if (k < 2) throw ValidationError("conjecture_normalizer: k must be >= 2");
  const double ll = std::log(std::log(x));
  const double kk = k;
  return std::pow(x, 1.0 / (2.0 * kk)) * std::pow(ll, 0.5 - 0.5 / kk) * std::pow(std::log(ll), 0.25 / kk);
}

NormalizerSweep normalizer_sweep(const StepSeries& series, double x_hi) {
  if (!(x_hi > 16.0)) throw ValidationError("normalizer_sweep: X must exceed 16");
  if (x_hi > static_cast<double>(series.limit()) + 1.0) throw ValidationError("normalizer_sweep: X beyond series range");
  NormalizerSweep out;
  double next = 100.0;
  double running = 0.0;
  // every factor increases for x > e^e, so extremes over a piece sit at its left end
  series.for_each_piece(16.0 * (1.0 + 1e-15), x_hi, [&](double a, double, std::int64_t si) {
    while (a > next) {
      out.checkpoints.push_back(next);
      out.running_abs_max.push_back(running);
      next *= 10.0;
    }
    const double ratio = static_cast<double>(si) / conjecture_normalizer(a, series.k());
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.argmax = a;
    }
    if (ratio < out.min_ratio) {
      out.min_ratio = ratio;
      out.argmin = a;
    }
    running = std::max(running, std::abs(ratio));
  });
  while (next <= x_hi) {
    out.checkpoints.push_back(next);
    out.running_abs_max.push_back(running);
    next *= 10.0;
  }
  return out;
}

}  // namespace kfcl
