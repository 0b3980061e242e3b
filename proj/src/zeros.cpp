#include "kfcl/zeros.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>

#include "kfcl/errors.hpp"
#include "kfcl/numerics.hpp"

namespace kfcl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line, std::string_view what) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line) + ": cannot parse " + std::string(what) + " from '" +
                    std::string(field) + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

const DirichletCharacter& FunctionId::character() const {
  if (!chi_) throw ValidationError("zeta has no character");
  return *chi_;
}

std::string FunctionId::describe() const { return chi_ ? "L:" + chi_->describe() : "zeta"; }

ValueDeriv FunctionId::evaluate(cplx s, const EvalContext& ctx) const {
  return chi_ ? l_with_deriv(s, *chi_, ctx) : zeta_with_deriv(s, ctx);
}

double FunctionId::hardy_z(double t, const EvalContext& ctx) const {
  return kfcl::hardy_z(t, chi_ ? &*chi_ : nullptr, ctx);
}

ZeroCatalog::ZeroCatalog(FunctionId fn, std::vector<ZeroRecord> records, std::optional<double> height)
    : fn_(std::move(fn)), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!(records_[i].gamma > 0.0)) throw DataError("zero catalog: ordinates must be positive");
    if (i > 0 && !(records_[i].gamma > records_[i - 1].gamma)) {
      throw DataError("zero catalog: ordinates not strictly increasing at index " + std::to_string(i));
    }
    if (records_[i].deriv && *records_[i].deriv == cplx(0.0)) {
      throw DataError("zero catalog: zero derivative at gamma = " + shortest(records_[i].gamma));
    }
  }
  height_ = height.value_or(records_.empty() ? 0.0 : records_.back().gamma);
  if (!records_.empty() && height_ < records_.back().gamma) throw DataError("zero catalog: height below last ordinate");
}

std::size_t ZeroCatalog::count(double t) const {
  return static_cast<std::size_t>(
      std::upper_bound(records_.begin(), records_.end(), t, [](double v, const ZeroRecord& r) { return v < r.gamma; }) -
      records_.begin());
}

std::span<const ZeroRecord> ZeroCatalog::upto(double t) const { return std::span(records_).first(count(t)); }

bool ZeroCatalog::enriched(double t) const {
  const auto recs = upto(t);
  return std::all_of(recs.begin(), recs.end(), [](const ZeroRecord& r) { return r.deriv.has_value(); });
}

ZeroFormat parse_zero_format(std::string_view name) {
  if (name == "plain") return ZeroFormat::plain;
  if (name == "csv") return ZeroFormat::csv;
  throw ValidationError("unknown zero file format '" + std::string(name) + "' (plain|csv)");
}

ZeroCatalog parse_zero_text(std::string_view text, ZeroFormat format, FunctionId fn) {
  std::vector<ZeroRecord> records;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    ZeroRecord rec;
    if (format == ZeroFormat::plain) {
      rec.gamma = parse_double(line, line_no, "ordinate");
    } else {
      if (!header_seen) {
        std::string compact;
        for (char c : line) {
          if (c != ' ' && c != '\t') compact.push_back(c);
        }
        if (compact != "gamma,dre,dim") {
          throw DataError("line " + std::to_string(line_no) + ": expected header 'gamma,dre,dim'");
        }
        header_seen = true;
        continue;
      }
      const auto c1 = line.find(',');
      const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
      if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
        throw DataError("line " + std::to_string(line_no) + ": expected three comma-separated fields");
      }
      rec.gamma = parse_double(line.substr(0, c1), line_no, "gamma");
      const auto re = trim(line.substr(c1 + 1, c2 - c1 - 1));
      const auto im = trim(line.substr(c2 + 1));
      if (re.empty() != im.empty()) throw DataError("line " + std::to_string(line_no) + ": derivative half missing");
      if (!re.empty()) {
        rec.deriv = cplx(parse_double(re, line_no, "dre"), parse_double(im, line_no, "dim"));
        if (*rec.deriv == cplx(0.0)) throw DataError("line " + std::to_string(line_no) + ": zero derivative");
      }
    }
    if (!(rec.gamma > 0.0)) throw DataError("line " + std::to_string(line_no) + ": ordinate must be positive");
    if (!records.empty() && !(rec.gamma > records.back().gamma)) {
      throw DataError("line " + std::to_string(line_no) + ": ordinates not strictly increasing");
    }
    records.push_back(rec);
  }
  return ZeroCatalog(std::move(fn), std::move(records));
}

ZeroCatalog parse_zero_file(const std::filesystem::path& path, ZeroFormat format, FunctionId fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open zero file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return parse_zero_text(os.str(), format, std::move(fn));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string serialize_zeros(const ZeroCatalog& catalog, ZeroFormat format) {
  std::string out;
  if (format == ZeroFormat::csv) out += "gamma,dre,dim\n";
  for (const auto& r : catalog.records()) {
    out += shortest(r.gamma);
    if (format == ZeroFormat::csv) {
      out += ',';
      if (r.deriv) out += shortest(r.deriv->real()) + "," + shortest(r.deriv->imag());
      else out += ",";
    }
    out += '\n';
  }
  return out;
}

void write_zero_file(const std::filesystem::path& path, const ZeroCatalog& catalog, ZeroFormat format) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out << serialize_zeros(catalog, format);
    if (!out) throw DataError("short write on " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

RefinedZero refine_zero(double gamma0, const FunctionId& fn, const EvalContext& ctx) {
  if (!(gamma0 > 0.0)) throw ValidationError("refine_zero: starting ordinate must be positive");
  double gamma = gamma0;
  for (int it = 1; it <= 50; ++it) {
    const auto v = fn.evaluate(cplx(0.5, gamma), ctx);
    if (std::abs(v.deriv) < 1e-12) {
      throw NumericalError("refine_zero: derivative below 1e-12 near gamma = " + shortest(gamma) +
                           " (possible multiple zero)");
    }
    // d/dgamma F(1/2 + i gamma) = i F'
    const double step = (v.value / (cplx(0.0, 1.0) * v.deriv)).real();
    gamma -= step;
    if (std::abs(gamma - gamma0) > 1.0) {
      throw NumericalError("refine_zero: iteration left the neighbourhood of " + shortest(gamma0));
    }
    if (std::abs(step) <= 1e-13 * std::max(1.0, gamma)) {
      const auto fin = fn.evaluate(cplx(0.5, gamma), ctx);
      RefinedZero out{gamma, fin.deriv, std::abs(fin.value), it};
      if (out.residual >= 1e-10) {
        throw NumericalError("refine_zero: residual " + shortest(out.residual) + " above 1e-10 at gamma = " +
                             shortest(gamma));
      }
      return out;
    }
  }
  throw NumericalError("refine_zero: no convergence in 50 iterations from " + shortest(gamma0));
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  for (unsigned t = 0; t < threads; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    }));
  }
  for (auto& j : jobs) j.get();
}

}  // namespace

ZeroCatalog enrich_catalog(const ZeroCatalog& catalog, const EvalContext& ctx, unsigned threads,
                           std::optional<double> t_limit) {
  const auto recs = catalog.records();
  const std::size_t n = t_limit ? catalog.count(*t_limit) : recs.size();
  std::vector<ZeroRecord> out(recs.begin(), recs.end());
  parallel_for(n, threads, [&](std::size_t i) {
    if (out[i].deriv) return;
    const auto z = refine_zero(recs[i].gamma, catalog.function(), ctx);
    out[i].gamma = z.gamma;
    out[i].deriv = z.deriv;
  });
  return ZeroCatalog(catalog.function(), std::move(out), catalog.height());
}

ZeroCatalog scan_zeros(const FunctionId& fn, double t_lo, double t_hi, const EvalContext& ctx, unsigned threads) {
  if (!(t_lo >= 0.0) || !(t_hi > t_lo)) throw ValidationError("scan_zeros: need 0 <= t_lo < t_hi");
  if (t_hi > 2000.0) throw ValidationError("scan_zeros: computing zeros above height 2000 is not supported");
  const double q = static_cast<double>(fn.modulus());
  std::vector<double> grid;
  for (double t = std::max(t_lo, 0.05); t < t_hi;) {
    grid.push_back(t);
    const double gap = kTwoPi / std::log(std::max(q * t / kTwoPi, 3.0));
    t += std::clamp(gap / 12.0, 0.005, 0.1);
  }
  grid.push_back(t_hi);
  std::vector<double> z(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { z[i] = fn.hardy_z(grid[i], ctx); });
  std::vector<std::pair<double, double>> brackets;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if ((z[i] < 0) != (z[i + 1] < 0) && z[i] != 0.0) brackets.emplace_back(grid[i], grid[i + 1]);
  }
  std::vector<ZeroRecord> records(brackets.size());
  parallel_for(brackets.size(), threads, [&](std::size_t i) {
    const auto f = [&](double t) { return fn.hardy_z(t, ctx); };
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::toms748_solve(f, brackets[i].first, brackets[i].second,
                                                     boost::math::tools::eps_tolerance<double>(50), iters);
    const auto z0 = refine_zero(0.5 * (r.first + r.second), fn, ctx);
    records[i] = ZeroRecord{z0.gamma, z0.deriv, ZeroSource::computed};
  });
  return ZeroCatalog(fn, std::move(records), t_hi);
}

double zero_count_main_term(const FunctionId& fn, double t) {
  const double q = static_cast<double>(fn.modulus());
  const double main = t / kTwoPi * std::log(q * t / (kTwoPi * std::numbers::e));
  return fn.is_zeta() ? main + 0.875 : main;
}

ZeroCountReport zero_count_check(const ZeroCatalog& catalog, double t, double c) {
  if (t < 4.0) throw ValidationError("zero_count_check: T must be >= 4");
  if (t > catalog.height()) {
    throw DataError("zero_count_check: T = " + shortest(t) + " beyond catalog height " + shortest(catalog.height()));
  }
  ZeroCountReport r;
  r.t = t;
  r.count = catalog.count(t);
  r.main_term = zero_count_main_term(catalog.function(), t);
  r.residual = static_cast<double>(r.count) - r.main_term;
  r.bound = c * std::log(static_cast<double>(catalog.function().modulus()) * t);
  r.flagged = std::abs(r.residual) > r.bound;
  return r;
}

double discrete_moment(const ZeroCatalog& catalog, double r, double t) {
  if (t > catalog.height()) throw DataError("discrete_moment: T beyond catalog height");
  CompensatedSum s;
  for (const auto& rec : catalog.upto(t)) {
    if (!rec.deriv) throw DataError("discrete_moment: missing derivative at gamma = " + shortest(rec.gamma));
    s.add(std::pow(std::abs(*rec.deriv), 2.0 * r));
  }
  return s.value();
}

MomentGrowthFit moment_growth_fit(const ZeroCatalog& catalog, double r, std::span<const double> heights,
                                  std::uint64_t prime_cutoff) {
  std::vector<double> hs(heights.begin(), heights.end());
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  if (hs.size() < 4) throw ValidationError("moment_growth_fit: need at least 4 distinct heights");
  if (hs.front() <= kTwoPi * std::numbers::e) throw ValidationError("moment_growth_fit: heights must exceed 2 pi e");
  MomentGrowthFit f;
  f.r = r;
  f.expected_log_power = (r + 1.0) * (r + 1.0);
  std::vector<double> design;
  std::vector<double> y;
  std::vector<double> lt;
  std::vector<double> y_fixed;
  for (double t : hs) {
    const double j = discrete_moment(catalog, r, t);
    if (!(j > 0.0)) throw ValidationError("moment_growth_fit: empty moment at T = " + shortest(t));
    const double l = std::log(t);
    const double ll = std::log(l);
    f.heights.push_back(t);
    f.moments.push_back(j);
    f.ratio_linear.push_back(j / t);
    f.ratio_expected.push_back(j / (t * std::pow(l, f.expected_log_power)));
    design.insert(design.end(), {l, ll, 1.0});
    y.push_back(std::log(j));
    lt.push_back(l);
    y_fixed.push_back(std::log(j) - f.expected_log_power * std::log(std::log(t / kTwoPi)));
  }
  const auto full = least_squares(design, 3, y);
  f.exponent = full.coefficients[0];
  f.log_power = full.coefficients[1];
  const auto fixed = fit_line(lt, y_fixed);
  f.exponent_fixed_power = fixed.coefficients[1];
  f.exponent_fixed_power_se = fixed.std_errors[1];
  f.consistent_with_unit_exponent = std::abs(f.exponent_fixed_power - 1.0) <= 3.0 * f.exponent_fixed_power_se + 0.15;
  CompensatedSum c;
  for (std::size_t i = 0; i < hs.size(); ++i) c.add(y_fixed[i] - lt[i]);
  f.fitted_constant = std::exp(c.value() / static_cast<double>(hs.size()));
  if (r > -1.5) f.predicted_constant = hko_constant(r, prime_cutoff).value;
  f.caveat =
      "heights available here are far below the asymptotic regime; log T and log log T are nearly collinear, so "
      "the free exponent is poorly determined and agreement or disagreement with the predicted growth is not "
      "evidence either way";
  return f;
}

double exceptional_height(const ZeroCatalog& catalog, std::uint64_t n) {
  const double lo = static_cast<double>(n);
  const double hi = lo + 1.0;
  if (hi > catalog.height()) throw DataError("exceptional_height: [n, n+1] beyond catalog height");
  const auto recs = catalog.records();
  auto nearest = [&](double t) {
    auto it = std::lower_bound(recs.begin(), recs.end(), t, [](const ZeroRecord& r, double v) { return r.gamma < v; });
    double d = INFINITY;
    if (it != recs.end()) d = std::min(d, it->gamma - t);
    if (it != recs.begin()) d = std::min(d, t - std::prev(it)->gamma);
    return d;
  };
  std::vector<double> candidates = {lo, hi};
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    const double m = 0.5 * (recs[i].gamma + recs[i + 1].gamma);
    if (recs[i + 1].gamma >= lo && recs[i].gamma <= hi) candidates.push_back(std::clamp(m, lo, hi));
  }
  double best = lo;
  double best_d = -1.0;
  for (double c : candidates) {
    const double d = nearest(c);
    if (d > best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

AssumptionsReport assumptions_probe(std::span<const double> lambdas, std::span<const double> coefficient_abs,
                                    std::span<const double> heights) {
  if (lambdas.size() != coefficient_abs.size()) throw ValidationError("assumptions_probe: size mismatch");
  if (lambdas.size() < 10) throw DataError("assumptions_probe: need at least 10 frequencies");
  if (heights.size() < 3) throw DataError("assumptions_probe: need at least 3 heights");
  if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw ValidationError("assumptions_probe: frequencies unsorted");
  AssumptionsReport rep;
  std::vector<double> lx;
  std::vector<double> ly;
  for (double t : heights) {
    if (t > lambdas.back() + 1e-9) throw DataError("assumptions_probe: height beyond available frequencies");
    if (t <= std::numbers::e) throw ValidationError("assumptions_probe: heights must exceed e");
    CompensatedSum e;
    std::size_t n = 0;
    for (std::size_t i = 0; i < lambdas.size() && lambdas[i] <= t; ++i) {
      e.add(lambdas[i] * lambdas[i] * coefficient_abs[i] * coefficient_abs[i]);
      ++n;
    }
    rep.heights.push_back(t);
    rep.weighted_energy.push_back(e.value());
    rep.counts.push_back(static_cast<double>(n));
    rep.count_constant = std::max(rep.count_constant, static_cast<double>(n) / (t * std::log(t)));
    if (e.value() > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(e.value()));
    }
  }
  if (lx.size() >= 3) {
    const auto fit = fit_line(lx, ly);
    rep.theta = fit.coefficients[1];
    rep.theta_se = fit.std_errors[1];
  }
  const auto top = static_cast<std::uint64_t>(std::floor(lambdas.back()));
  for (std::uint64_t t = 1; t + 1 <= top; ++t) {
    const double a = static_cast<double>(t);
    const auto lo = std::upper_bound(lambdas.begin(), lambdas.end(), a);
    const auto hi = std::upper_bound(lambdas.begin(), lambdas.end(), a + 1.0);
    const auto c = static_cast<std::size_t>(hi - lo);
    rep.max_window_count = std::max(rep.max_window_count, c);
    if (t >= 3) rep.max_window_ratio = std::max(rep.max_window_ratio, static_cast<double>(c) / std::log(a));
  }
  return rep;
}

}  // namespace kfcl
