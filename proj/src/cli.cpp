#include "kfcl/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "kfcl/distribution.hpp"
#include "kfcl/errors.hpp"
#include "kfcl/explicit_formula.hpp"
#include "kfcl/limodel.hpp"
#include "kfcl/numerics.hpp"

namespace kfcl::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kSchemaVersion = "1.0.0";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

Grid parse_grid(const std::string& text, const std::string& what) {
  Grid g;
  char tail = 0;
  unsigned long n = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lu%c", &g.lo, &g.hi, &n, &tail) != 3 || n == 0) {
    throw ValidationError(what + ": expected lo:hi:n, got '" + text + "'");
  }
  g.n = n;
  if (g.n > 1 && !(g.hi > g.lo)) throw ValidationError(what + ": need lo < hi");
  return g;
}

std::vector<double> linear_points(const Grid& g) {
  std::vector<double> v;
  for (std::size_t i = 0; i < g.n; ++i) {
    v.push_back(g.n == 1 ? g.lo : g.lo + (g.hi - g.lo) * static_cast<double>(i) / static_cast<double>(g.n - 1));
  }
  return v;
}

// log-spaced, snapped to half-integers
std::vector<double> half_integer_points(const Grid& g) {
  if (!(g.lo >= 1.0)) throw ValidationError("x-grid: lo must be >= 1");
  std::vector<double> v;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double t = g.n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(g.n - 1);
    const double x = std::floor(g.lo * std::pow(g.hi / g.lo, t)) + 0.5;
    if (v.empty() || x > v.back()) v.push_back(x);
  }
  return v;
}

class Session {
 public:
  Session(RunConfig cfg, std::ostream& out, std::ostream& err) : cfg_(std::move(cfg)), out_(out), err_(err) {}

  const RunConfig& cfg() const { return cfg_; }
  std::ostream& out() { return out_; }

  std::string config_hash() {
    std::string text = cfg_.canonical();
    if (!cfg_.zeros.empty() && fs::exists(cfg_.zeros)) text += "zeros_content=" + hex64(fnv1a64(read_file(cfg_.zeros))) + "\n";
    return hex64(fnv1a64(text));
  }

  json stamp(json j, const std::string& kind, std::vector<std::string> tags) {
    j["kind"] = kind;
    j["config_hash"] = config_hash();
    j["spec"] = cfg_.summand().describe();
    j["tags"] = std::move(tags);
    return j;
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(cfg_.out_dir);
    write_atomic(cfg_.out_dir / name, content);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  const StepSeries& series(std::uint64_t limit = 0) {
    if (limit == 0) limit = cfg_.sieve_limit;
    if (!series_ || series_->limit() != limit) {
      const auto dir = cfg_.resolved_cache_dir();
      fs::create_directories(dir);
      const auto sieve = KFreeSieve::cached(cfg_.k, limit, dir, cfg_.threads);
      series_ = cumulative_series(cfg_.summand(), sieve, limit);
    }
    return *series_;
  }

  ZeroCatalog raw_catalog(const fs::path& override_path = {}) {
    const fs::path path = override_path.empty() ? cfg_.zeros : override_path;
    if (path.empty()) throw ValidationError("no zero file given (--zeros)");
    if (!fs::exists(path)) throw DataError("zero file not found: " + path.string());
    return parse_zero_file(path, format_for(path), cfg_.zero_function());
  }

  /// Catalog enriched up to t, cached by content hash of (zero file, function, t, precision).
  const ZeroCatalog& catalog(double t) {
    if (catalog_ && catalog_->enriched(t)) return *catalog_;
    const auto raw = raw_catalog();
    if (t > raw.height()) {
      throw DataError("T = " + num(t) + " beyond zero catalog height " + num(raw.height()));
    }
    if (raw.enriched(t)) {
      catalog_ = raw;
      return *catalog_;
    }
    const std::string key = read_file(cfg_.zeros) + "|" + raw.function().describe() + "|" + num(t) + "|" +
                            std::to_string(cfg_.ctx.digits) + "|" + num(cfg_.ctx.em_scale);
    const auto dir = cfg_.resolved_cache_dir();
    const auto cached = dir / ("enriched_" + hex64(fnv1a64(key)) + ".csv");
    if (fs::exists(cached)) {
      catalog_ = parse_zero_file(cached, ZeroFormat::csv, raw.function());
    } else {
      catalog_ = enrich_catalog(raw, cfg_.ctx, cfg_.threads, t);
      fs::create_directories(dir);
      write_zero_file(cached, *catalog_, ZeroFormat::csv);
    }
    return *catalog_;
  }

  std::vector<ResidueTerm> terms(double t) {
    cfg_.check_parity();
    return residue_coefficients(cfg_.summand(), catalog(t), t, cfg_.ctx, cfg_.threads);
  }

  ZeroFormat format_for(const fs::path& path) const {
    if (cfg_.zeros_format != "auto") return parse_zero_format(cfg_.zeros_format);
    return path.extension() == ".csv" ? ZeroFormat::csv : ZeroFormat::plain;
  }

 private:
  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<StepSeries> series_;
  std::optional<ZeroCatalog> catalog_;
};

// ---- pipelines shared by the subcommands and `report --run`

json dist_json(const EmpiricalDistribution& d) {
  return json{{"y0", d.y0},
              {"Y", d.y1},
              {"measure", d.measure},
              {"edges", d.edges},
              {"masses", d.masses},
              {"support", {d.support_lo, d.support_hi}},
              {"mean", d.mean},
              {"second_moment", d.second_moment},
              {"third_moment", d.third_moment},
              {"fourth_moment", d.fourth_moment},
              {"variance", d.variance()},
              {"kurtosis", d.kurtosis()}};
}

EmpiricalDistribution dist_from_json(const json& j) {
  try {
    EmpiricalDistribution d;
    d.y0 = j.at("y0").get<double>();
    d.y1 = j.at("Y").get<double>();
    d.measure = j.at("measure").get<double>();
    d.edges = j.at("edges").get<std::vector<double>>();
    d.masses = j.at("masses").get<std::vector<double>>();
    d.support_lo = j.at("support").at(0).get<double>();
    d.support_hi = j.at("support").at(1).get<double>();
    d.mean = j.at("mean").get<double>();
    d.second_moment = j.at("second_moment").get<double>();
    d.third_moment = j.at("third_moment").get<double>();
    d.fourth_moment = j.at("fourth_moment").get<double>();
    if (d.edges.size() != d.masses.size() + 1) throw DataError("distribution artifact: edges and masses disagree");
    return d;
  } catch (const json::exception& e) {
    throw DataError(std::string("distribution artifact: ") + e.what());
  }
}

void run_dist(Session& s, double y_top, std::size_t bins, double y0) {
  const auto& series = s.series();
  const double y_max = std::log(static_cast<double>(series.limit()) + 1.0);
  if (y_top <= 0.0) y_top = std::log(static_cast<double>(series.limit()));
  const auto d = exact_log_distribution(series, y0, y_top, bins, s.cfg().threads);
  json j = dist_json(d);
  if (y_top / 2.0 > y0) {
    j["ks_half_window"] = ks_distance(d, exact_log_distribution(series, y0, y_top / 2.0, bins, s.cfg().threads));
  }
  json stability = json::array();
  for (int e = 5; e <= 7; ++e) {
    const double y = e * std::log(10.0);
    if (y > y_max || y / 2.0 <= y0) continue;
    const auto full = exact_log_distribution(series, y0, y, bins, s.cfg().threads);
    const auto half = exact_log_distribution(series, y0, y / 2.0, bins, s.cfg().threads);
    stability.push_back({{"Y", y}, {"ks_vs_half", ks_distance(full, half)}});
  }
  j["ks_stability"] = stability;
  std::string csv = "lo,hi,mass\n";
  for (std::size_t i = 0; i < d.bins(); ++i) csv += num(d.edges[i]) + "," + num(d.edges[i + 1]) + "," + num(d.masses[i]) + "\n";
  s.write("dist.csv", csv);
  s.write_json("dist.json", s.stamp(j, "dist", {"logarithmic distribution of normalized partial sums"}));
  s.out() << "mean " << num(d.mean) << " variance " << num(d.variance()) << "\n";
}

std::vector<double> decade_points(std::uint64_t limit) {
  std::vector<double> xs;
  for (double x = 1e4; x <= static_cast<double>(limit); x *= 10.0) xs.push_back(x);
  if (xs.empty()) xs.push_back(static_cast<double>(limit));
  return xs;
}

void run_variance(Session& s, std::vector<double> xs) {
  const auto& series = s.series();
  if (xs.empty()) xs = decade_points(series.limit());
  json rows = json::array();
  std::string csv = "X,integral,ratio_to_log_X\n";
  for (double x : xs) {
    const double v = variance_integral(series, x);
    rows.push_back({{"X", x}, {"integral", v}, {"ratio", v / std::log(x)}});
    csv += num(x) + "," + num(v) + "," + num(v / std::log(x)) + "\n";
  }
  // slope of the integral against log X between the last two points
  json j{{"trajectory", rows}};
  if (xs.size() >= 2) {
    const double a = rows[rows.size() - 2]["integral"].get<double>();
    const double b = rows.back()["integral"].get<double>();
    j["increment_slope"] = (b - a) / std::log(xs.back() / xs[xs.size() - 2]);
  }
  s.write("variance.csv", csv);
  s.write_json("variance.json", s.stamp(j, "variance", {"mean square of normalized partial sums"}));
  s.out() << "V(X)/log X at X = " << num(xs.back()) << ": " << num(rows.back()["ratio"].get<double>()) << "\n";
}

void run_growth(Session& s, double c, double eps, double x) {
  const auto& series = s.series();
  if (x <= 0.0) x = static_cast<double>(series.limit());
  const auto g = growth_envelope(series, c, eps, x);
  const double thr = growth_threshold_for_measure(series, eps, x, 0.01);
  const auto sweep = normalizer_sweep(series, x);
  json checkpoints = json::array();
  for (std::size_t i = 0; i < sweep.checkpoints.size(); ++i) {
    checkpoints.push_back({{"X", sweep.checkpoints[i]}, {"running_abs_max", sweep.running_abs_max[i]}});
  }
  json j{{"X", x},
         {"eps", eps},
         {"C", c},
         {"sup_ratio", g.sup_ratio},
         {"argmax", g.argmax},
         {"exceed_log_measure", g.exceed_log_measure},
         {"C_for_measure_0.01", thr},
         {"normalizer", {{"max_ratio", sweep.max_ratio},
                         {"argmax", sweep.argmax},
                         {"min_ratio", sweep.min_ratio},
                         {"argmin", sweep.argmin},
                         {"checkpoints", checkpoints}}}};
  s.write_json("growth.json", s.stamp(j, "growth", {"growth envelope", "exceptional set log-measure"}));
  s.out() << "sup ratio " << num(g.sup_ratio) << " at x = " << num(g.argmax) << "; exceedance log-measure "
          << num(g.exceed_log_measure) << "\n";
}

json beta_json(const BetaEstimate& b) {
  return json{{"partial", b.partial},       {"tail", b.tail},
              {"tail_bound", b.tail_bound}, {"estimate", b.estimate},
              {"uncertainty", b.uncertainty}, {"decay_exponent", b.decay_exponent},
              {"expected_exponent", b.expected_exponent}, {"converging", b.converging},
              {"terms", b.heights.size()}};
}

void run_beta(Session& s, double t) {
  const auto terms = s.terms(t);
  const auto b = beta_k(terms, s.cfg().k, s.cfg().zero_function().modulus());
  std::string csv = "gamma,partial_sum\n";
  for (std::size_t i = 0; i < b.heights.size(); ++i) csv += num(b.heights[i]) + "," + num(b.partial_sums[i]) + "\n";
  json j = beta_json(b);
  j["T"] = t;
  s.write("beta.csv", csv);
  s.write_json("beta.json", s.stamp(j, "beta", {"variance constant from zero coefficients"}));
  s.out() << "beta partial " << num(b.partial) << " + tail " << num(b.tail) << " = " << num(b.estimate) << "\n";
}

ModelAmplitudes amplitudes(Session& s, double t) {
  const auto terms = s.terms(t);
  return model_amplitudes(terms, s.cfg().k, t, s.cfg().zero_function().modulus());
}

void run_model_compare(Session& s, double t, std::size_t count, const fs::path& dist_path) {
  const fs::path path = dist_path.empty() ? s.cfg().out_dir / "dist.json" : dist_path;
  if (!fs::exists(path)) throw DataError("model compare: distribution artifact not found: " + path.string());
  json dj;
  try {
    dj = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(std::string("model compare: ") + e.what());
  }
  const auto dist = dist_from_json(dj);
  const auto amps = amplitudes(s, t);
  const auto samples = sample_x(amps, count, s.cfg().seed, s.cfg().threads);
  const auto c = empirical_vs_model(dist, amps, samples);
  json j{{"T", t},
         {"count", count},
         {"seed", s.cfg().seed},
         {"Y", dist.y1},
         {"ks", c.ks},
         {"mean", {{"empirical", c.mean_empirical}, {"model", c.mean_model}}},
         {"variance", {{"empirical", c.variance_empirical}, {"model", c.variance_model}, {"predicted", c.variance_predicted}}},
         {"kurtosis", {{"empirical", c.kurtosis_empirical}, {"model", c.kurtosis_model}}},
         {"amplitudes", amps.size()},
         {"tail_sq", {amps.tail_sq_lo, amps.tail_sq, amps.tail_sq_hi}}};
  s.write_json("model_compare.json", s.stamp(j, "model_compare", {"random model comparison"}));
  s.out() << "KS(empirical, model) = " << num(c.ks) << "\n";
}

void run_moments(Session& s, std::vector<double> rs, std::vector<double> heights) {
  if (heights.empty()) {
    const double h = s.raw_catalog().height();
    for (double t = 50.0; t <= h; t *= 2.0) heights.push_back(t);
  }
  const double top = *std::max_element(heights.begin(), heights.end());
  const auto& cat = s.catalog(top);
  json fits = json::array();
  for (double r : rs) {
    const auto f = moment_growth_fit(cat, r, heights);
    json fj{{"r", r},
            {"heights", f.heights},
            {"moments", f.moments},
            {"exponent", f.exponent},
            {"log_power", f.log_power},
            {"expected_log_power", f.expected_log_power},
            {"exponent_fixed_power", f.exponent_fixed_power},
            {"exponent_fixed_power_se", f.exponent_fixed_power_se},
            {"consistent_with_unit_exponent", f.consistent_with_unit_exponent},
            {"fitted_constant", f.fitted_constant},
            {"caveat", f.caveat}};
    fj["predicted_constant"] = f.predicted_constant ? json(*f.predicted_constant) : json(nullptr);
    fits.push_back(fj);
  }
  s.write_json("moments.json", s.stamp(json{{"fits", fits}, {"function", cat.function().describe()}}, "moments",
                                       {"discrete moments of derivatives at zeros"}));
  for (const auto& f : fits) s.out() << "r = " << num(f["r"].get<double>()) << ": exponent " << num(f["exponent_fixed_power"].get<double>()) << "\n";
}

const std::vector<std::string> kReportInputs = {"growth.json", "variance.json", "beta.json",
                                                "dist.json",   "model_compare.json", "moments.json"};

void run_report(Session& s) {
  std::vector<std::string> missing;
  for (const auto& name : kReportInputs) {
    if (!fs::exists(s.cfg().out_dir / name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("report: missing upstream artifacts: " + list);
  }
  std::map<std::string, json> in;
  for (const auto& name : kReportInputs) {
    try {
      in[name] = json::parse(read_file(s.cfg().out_dir / name));
    } catch (const json::exception& e) {
      throw DataError("report: " + name + ": " + e.what());
    }
  }
  const std::string hash = s.config_hash();
  for (const auto& [name, j] : in) {
    if (j.value("config_hash", "") != hash) throw DataError("report: " + name + " was produced under a different configuration");
  }
  const auto& var = in["variance.json"];
  const auto& beta = in["beta.json"];
  const double ratio = var["trajectory"].back()["ratio"].get<double>();
  const double b = beta["estimate"].get<double>();
  json report{{"schema_version", kSchemaVersion},
              {"config", s.cfg().canonical()},
              {"growth_envelope", in["growth.json"]},
              {"variance_trajectory", var},
              {"beta", beta},
              {"variance_vs_beta", {{"ratio_at_largest_X", ratio}, {"beta_estimate", b}, {"relative_gap", std::abs(ratio - b) / b}}},
              {"ks_stability", in["dist.json"]["ks_stability"]},
              {"distribution", {{"mean", in["dist.json"]["mean"]}, {"variance", in["dist.json"]["variance"]}, {"Y", in["dist.json"]["Y"]}}},
              {"model_comparison", in["model_compare.json"]},
              {"moment_fits", in["moments.json"]["fits"]}};
  for (const char* key : {"growth_envelope", "variance_trajectory", "beta", "model_comparison"}) {
    report[key].erase("config_hash");
    report[key].erase("spec");
  }
  report = s.stamp(report, "report", {"consolidated report"});
  s.write_json("report.json", report);
  s.out() << (s.cfg().out_dir / "report.json").string() << "\n";
}

std::string usage_hint() { return "Run with --help for usage.\n"; }

}  // namespace

// ---- RunConfig

void RunConfig::validate() const {
  if (k < 2) throw ValidationError("k must be >= 2");
  if (sieve_limit < 1000) throw ValidationError("sieve limit N must be >= 1000");
  if (function != "auto" && function != "zeta" && function != "L") throw ValidationError("--function must be auto, zeta or L");
  if (zeros_format != "auto") parse_zero_format(zeros_format);
  if (threads == 0) throw ValidationError("--threads must be >= 1");
  ctx.validate();
  (void)summand();  // resolves the character or throws
}

FunctionId RunConfig::zero_function() const {
  const bool zeta = function == "auto" ? k % 2 == 0 : function == "zeta";
  if (zeta) return FunctionId::zeta_function();
  return FunctionId::l_function(summand().character);
}

void RunConfig::check_parity() const {
  const bool zeta = zero_function().is_zeta();
  if (k % 2 == 0 && !zeta) throw ValidationError("k = " + std::to_string(k) + " is even: the explicit formula runs over zeta zeros");
  if (k % 2 == 1 && zeta) throw ValidationError("k = " + std::to_string(k) + " is odd: the explicit formula runs over L(s, chi) zeros");
}

SummandSpec RunConfig::summand() const {
  const auto chi = d ? DirichletCharacter::from_kronecker(*d) : character_for_modulus(q);
  if (chi.modulus() != q) {
    throw ValidationError("discriminant " + std::to_string(*d) + " does not have modulus " + std::to_string(q));
  }
  return SummandSpec(k, chi, modified);
}

fs::path RunConfig::resolved_cache_dir() const {
  if (!cache_dir.empty()) return cache_dir;
  if (const char* env = std::getenv("KFCL_CACHE"); env != nullptr && *env != '\0') return env;
  return out_dir / "cache";
}

std::string RunConfig::canonical() const {
  std::map<std::string, std::string> kv{{"k", std::to_string(k)},
                                        {"q", std::to_string(q)},
                                        {"d", d ? std::to_string(*d) : "auto"},
                                        {"modified", modified ? "1" : "0"},
                                        {"function", zero_function().describe()},
                                        {"N", std::to_string(sieve_limit)},
                                        {"precision", std::to_string(ctx.digits)},
                                        {"em_cutoff_scale", num(ctx.em_scale)},
                                        {"seed", std::to_string(seed)}};
  std::string s;
  for (const auto& [key, v] : kv) s += key + "=" + v + "\n";
  return s;
}

void apply_spec_string(RunConfig& cfg, const std::string& text) {
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const std::string key = item.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : item.substr(eq + 1);
    try {
      if (key == "k") {
        cfg.k = static_cast<unsigned>(std::stoul(value));
      } else if (key == "q") {
        cfg.q = std::stoull(value);
      } else if (key == "d") {
        cfg.d = std::stoll(value);
      } else if (key == "modified" && (value.empty() || value == "1" || value == "true")) {
        cfg.modified = true;
      } else if (key == "modified" && (value == "0" || value == "false")) {
        cfg.modified = false;
      } else {
        throw ValidationError("--spec: unknown item '" + item + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ValidationError*>(&e) != nullptr) throw;
      throw ValidationError("--spec: bad value in '" + item + "'");
    }
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + tmp.string());
    f << content;
    if (!f) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---- command line

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-free character sums: partial sums, zeros, explicit formula, limiting distribution and random model"};
  app.name("kfcl");
  app.set_config("--config", "", "key=value file; [section] headers name subcommands; flags win");
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig cfg;
  std::string spec_text;
  std::optional<std::int64_t> d;
  std::string out_dir = cfg.out_dir.string();
  std::string cache_dir;
  std::string zeros_path;
  app.add_option("--k", cfg.k, "k >= 2")->capture_default_str();
  app.add_option("--q", cfg.q, "character modulus")->capture_default_str();
  app.add_option("--d", d, "fundamental discriminant (needed when q is ambiguous, e.g. 8)");
  app.add_flag("--modified", cfg.modified, "use the modified character g_chi");
  app.add_option("--spec", spec_text, "summand as k=2,q=3[,d=-3][,modified]");
  app.add_option("--function", cfg.function, "zero catalog function: auto, zeta or L")->capture_default_str();
  app.add_option("--zeros", zeros_path, "zero file (plain ordinates or csv gamma,dre,dim)");
  app.add_option("--format", cfg.zeros_format, "zero file format: auto, plain or csv")->capture_default_str();
  app.add_option("--N", cfg.sieve_limit, "sieve limit")->capture_default_str();
  app.add_option("--precision", cfg.ctx.digits, "decimal digits for the analytic kernel")->capture_default_str();
  app.add_option("--em-cutoff-scale", cfg.ctx.em_scale, "Euler-Maclaurin split M >= scale |t| + offset")->capture_default_str();
  app.add_option("--out", out_dir, "artifact directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  app.add_option("--cache-dir", cache_dir, "cache directory (default $KFCL_CACHE or <out>/cache)");

  // sieve
  auto* sieve = app.add_subcommand("sieve", "build (or load) the k-free sieve up to N");
  // sum
  auto* sum = app.add_subcommand("sum", "print S_f(x)");
  std::vector<double> sum_x;
  sum->add_option("--x", sum_x, "x (repeatable)")->required();
  // zeros
  auto* zeros = app.add_subcommand("zeros", "zero catalogs");
  zeros->require_subcommand(1);
  std::string zfile;
  double z_t = 0.0;
  double z_lo = 0.0;
  double z_hi = 0.0;
  double z_c = 3.0;
  double z_r = 0.0;
  auto* zingest = zeros->add_subcommand("ingest", "validate a zero file and store it as csv");
  zingest->add_option("file", zfile, "zero file");
  auto* zenrich = zeros->add_subcommand("enrich", "attach derivatives by Newton refinement");
  zenrich->add_option("file", zfile, "zero file");
  zenrich->add_option("--T", z_t, "refine up to this height (default: whole file)");
  auto* zscan = zeros->add_subcommand("scan", "compute zeros from sign changes of the Hardy function");
  zscan->add_option("--lo", z_lo, "lower height")->capture_default_str();
  zscan->add_option("--hi", z_hi, "upper height (<= 2000)")->required();
  auto* zcheck = zeros->add_subcommand("check", "compare the zero count with its main term");
  zcheck->add_option("file", zfile, "zero file");
  zcheck->add_option("--T", z_t, "height")->required();
  zcheck->add_option("--C", z_c, "flag when |residual| > C log(qT)")->capture_default_str();
  auto* zmoments = zeros->add_subcommand("moments", "discrete moment of |F'(rho)|^{2r}");
  zmoments->add_option("file", zfile, "zero file");
  zmoments->add_option("--r", z_r, "exponent r")->required();
  zmoments->add_option("--T", z_t, "height")->required();
  // explicit
  auto* expl = app.add_subcommand("explicit", "explicit formula over zeros: csv x,S_f,explicit,residual,envelope");
  double e_t = 500.0;
  std::string e_grid = "100:10000:100";
  expl->add_option("--T", e_t, "zero height")->capture_default_str();
  expl->add_option("--x-grid", e_grid, "lo:hi:n, log-spaced and snapped to half-integers")->capture_default_str();
  // dist
  auto* dist = app.add_subcommand("dist", "exact log-measure distribution of e^{-y/2k} S_f(e^y)");
  double dist_y = 0.0;
  std::size_t dist_bins = 201;
  double dist_y0 = std::log(2.0);
  dist->add_option("--Y", dist_y, "window end (default log N)");
  dist->add_option("--bins", dist_bins, "bins")->capture_default_str();
  dist->add_option("--y0", dist_y0, "window start")->capture_default_str();
  // variance
  auto* variance = app.add_subcommand("variance", "int_2^X (S_f(x)/x^{1/2k})^2 dx/x");
  std::vector<double> var_x;
  variance->add_option("--X", var_x, "X values (default: decades from 10^4 to N)");
  // growth
  auto* growth = app.add_subcommand("growth", "growth envelope and exceedance log-measure");
  double g_c = 1.0;
  double g_eps = 0.1;
  double g_x = 0.0;
  growth->add_option("--Ctilde", g_c, "threshold constant")->capture_default_str();
  growth->add_option("--eps", g_eps, "epsilon")->capture_default_str();
  growth->add_option("--X", g_x, "upper end (default N)");
  // beta
  auto* beta = app.add_subcommand("beta", "variance constant from the zero coefficients");
  double b_t = 500.0;
  beta->add_option("--T", b_t, "zero height")->capture_default_str();
  // model
  auto* model = app.add_subcommand("model", "random model built from the zero coefficients");
  model->require_subcommand(1);
  double m_t = 500.0;
  std::size_t m_count = 100000;
  model->add_option("--T", m_t, "zero height")->capture_default_str();
  model->add_option("--count", m_count, "Monte Carlo samples")->capture_default_str();
  auto* msample = model->add_subcommand("sample", "draw samples of X");
  auto* mfourier = model->add_subcommand("fourier", "Bessel product transform, optionally against Monte Carlo");
  std::string xi_grid = "0:4:41";
  bool m_mc = false;
  mfourier->add_option("--xi-grid", xi_grid, "lo:hi:n")->capture_default_str();
  mfourier->add_flag("--mc", m_mc, "add the Monte Carlo characteristic function");
  auto* mtail = model->add_subcommand("tail", "tail probabilities, Montgomery bounds, large-deviation fit");
  std::string v_grid = "0.1:1.5:29";
  mtail->add_option("--V-grid", v_grid, "lo:hi:n")->capture_default_str();
  auto* mcompare = model->add_subcommand("compare", "KS and moments: exact distribution against the model");
  std::string m_dist;
  mcompare->add_option("--dist", m_dist, "distribution JSON from `dist` (default <out>/dist.json)");
  // moments
  auto* moments = app.add_subcommand("moments", "moment growth fits over a height grid");
  std::vector<double> mo_r{-1.0, 0.0, 1.0};
  std::vector<double> mo_t;
  moments->add_option("--r", mo_r, "exponents r")->capture_default_str();
  moments->add_option("--T-grid", mo_t, "heights (default 50, 100, 200, ... up to the catalog height)");
  // report
  auto* report = app.add_subcommand("report", "consolidated JSON report from the upstream artifacts");
  bool rep_run = false;
  report->add_flag("--run", rep_run, "run the full pipeline first");
  report->add_option("--T", m_t, "zero height for beta and the model")->capture_default_str();
  report->add_option("--count", m_count, "Monte Carlo samples")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  set_warning_sink([&err](std::string_view m) { err << "warning: " << m << "\n"; });
  struct SinkReset {
    ~SinkReset() { set_warning_sink(nullptr); }
  } reset;

  try {
    if (!spec_text.empty()) apply_spec_string(cfg, spec_text);
    if (d) cfg.d = d;
    cfg.out_dir = out_dir;
    cfg.cache_dir = cache_dir;
    cfg.zeros = zeros_path;
    if (!zfile.empty()) cfg.zeros = zfile;
    cfg.validate();
    Session s(cfg, out, err);

    if (sieve->parsed()) {
      const auto dir = cfg.resolved_cache_dir();
      fs::create_directories(dir);
      const auto sv = KFreeSieve::cached(cfg.k, cfg.sieve_limit, dir, cfg.threads);
      const double density = static_cast<double>(sv.count()) / static_cast<double>(sv.limit());
      json j{{"k", cfg.k}, {"N", cfg.sieve_limit}, {"count", sv.count()}, {"density", density},
             {"expected_density", 1.0 / zeta(static_cast<double>(cfg.k)).real()},
             {"cache_file", KFreeSieve::cache_file_name(cfg.k, cfg.sieve_limit)}};
      s.write_json("sieve.json", s.stamp(j, "sieve", {"k-free sieve"}));
      out << sv.count() << "\n";
    } else if (sum->parsed()) {
      const double top = *std::max_element(sum_x.begin(), sum_x.end());
      if (!(top >= 1.0)) throw ValidationError("sum: x must be >= 1");
      const auto limit = std::max<std::uint64_t>(1000, static_cast<std::uint64_t>(std::floor(top)));
      const auto sv = KFreeSieve::build(cfg.k, limit, cfg.threads);
      for (double x : sum_x) out << partial_sum(cfg.summand(), x, sv) << "\n";
    } else if (zingest->parsed()) {
      const auto cat = s.raw_catalog();
      const std::string name = "zeros_" + hex64(fnv1a64(cat.function().describe())) + ".csv";
      s.write(name, serialize_zeros(cat, ZeroFormat::csv));
      out << cat.size() << " zeros of " << cat.function().describe() << " up to height " << num(cat.height()) << " -> "
          << (cfg.out_dir / name).string() << "\n";
    } else if (zenrich->parsed()) {
      const auto raw = s.raw_catalog();
      const double t = z_t > 0.0 ? z_t : raw.height();
      const auto& cat = s.catalog(t);
      s.write("zeros_enriched.csv", serialize_zeros(cat, ZeroFormat::csv));
      out << cat.count(t) << " zeros enriched up to " << num(t) << "\n";
    } else if (zscan->parsed()) {
      const auto cat = scan_zeros(cfg.zero_function(), z_lo, z_hi, cfg.ctx, cfg.threads);
      s.write("zeros_scan.csv", serialize_zeros(cat, ZeroFormat::csv));
      out << cat.size() << " zeros of " << cat.function().describe() << " in [" << num(z_lo) << ", " << num(z_hi) << "]\n";
    } else if (zcheck->parsed()) {
      const auto r = zero_count_check(s.raw_catalog(), z_t, z_c);
      json j{{"T", r.t}, {"count", r.count}, {"main_term", r.main_term}, {"residual", r.residual},
             {"bound", r.bound}, {"flagged", r.flagged}};
      s.write_json("zero_count.json", s.stamp(j, "zero_count", {"zero counting"}));
      out << "N(T) = " << r.count << ", main term " << num(r.main_term) << ", residual " << num(r.residual)
          << (r.flagged ? " (flagged)" : "") << "\n";
    } else if (zmoments->parsed()) {
      const double m = discrete_moment(s.catalog(z_t), z_r, z_t);
      json j{{"r", z_r}, {"T", z_t}, {"moment", m}};
      s.write_json("zero_moment.json", s.stamp(j, "zero_moment", {"discrete moments of derivatives at zeros"}));
      out << num(m) << "\n";
    } else if (expl->parsed()) {
      const auto xs = half_integer_points(parse_grid(e_grid, "--x-grid"));
      const std::uint64_t limit = std::max<std::uint64_t>(cfg.sieve_limit, static_cast<std::uint64_t>(xs.back()));
      const auto& series = s.series(limit);
      const auto terms = s.terms(e_t);
      // envelope constants come from geometric midpoints of the grid at T/4, T/2, T
      std::vector<ResidualSample> calib;
      for (double frac : {0.25, 0.5, 1.0}) {
        std::vector<ResidueTerm> sub;
        for (const auto& t : terms) {
          if (t.gamma < e_t * frac) sub.push_back(t);
        }
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
          const double x = std::floor(std::sqrt(xs[i] * xs[i + 1])) + 0.5;
          if (x == xs[i] || x == xs[i + 1] || e_t * frac < 2.0) continue;
          calib.push_back({x, e_t * frac, std::abs(explicit_residual(series, sub, x))});
        }
      }
      const auto model_fit = fit_error_model(calib, cfg.k);
      std::string csv = "x,S_f,explicit,residual,envelope\n";
      CompensatedSum mean_abs;
      double max_scaled = 0.0;
      for (double x : xs) {
        const double e = explicit_sum(terms, x, cfg.k, cfg.threads);
        const double sf = static_cast<double>(series.at(x));
        csv += num(x) + "," + num(sf) + "," + num(e) + "," + num(sf - e) + "," + num(error_envelope(model_fit, x, e_t)) + "\n";
        mean_abs.add(std::abs(sf - e));
        max_scaled = std::max(max_scaled, std::abs(sf - e) / std::pow(x, 0.5 / cfg.k));
      }
      const auto decay = coefficient_decay(terms, cfg.k);
      json j{{"T", e_t},
             {"terms", terms.size()},
             {"mean_abs_residual", mean_abs.value() / static_cast<double>(xs.size())},
             {"max_residual_over_x_power", max_scaled},
             {"envelope_constants", model_fit.c},
             {"envelope_eps", model_fit.eps},
             {"coefficient_decay", {{"slope", decay.slope}, {"expected", decay.expected_slope}, {"max_scaled", decay.max_scaled}}}};
      s.write("explicit.csv", csv);
      s.write_json("explicit.json", s.stamp(j, "explicit", {"explicit formula residual"}));
      out << csv;
    } else if (dist->parsed()) {
      run_dist(s, dist_y, dist_bins, dist_y0);
    } else if (variance->parsed()) {
      run_variance(s, var_x);
    } else if (growth->parsed()) {
      run_growth(s, g_c, g_eps, g_x);
    } else if (beta->parsed()) {
      run_beta(s, b_t);
    } else if (msample->parsed()) {
      const auto samples = sample_x(amplitudes(s, m_t), m_count, cfg.seed, cfg.threads);
      std::string csv = "X\n";
      for (double v : samples) csv += num(v) + "\n";
      s.write("model_samples.csv", csv);
      out << samples.size() << " samples -> " << (cfg.out_dir / "model_samples.csv").string() << "\n";
    } else if (mfourier->parsed()) {
      const auto amps = amplitudes(s, m_t);
      std::vector<double> samples;
      if (m_mc) samples = sample_x(amps, m_count, cfg.seed, cfg.threads);
      std::string csv = m_mc ? "xi,truncated,tail_factor,value,mc,mc_se\n" : "xi,truncated,tail_factor,value\n";
      for (double xi : linear_points(parse_grid(xi_grid, "--xi-grid"))) {
        const auto f = fourier_nu(amps, xi);
        csv += num(xi) + "," + num(f.truncated) + "," + num(f.tail_factor) + "," + num(f.value);
        if (m_mc) {
          const auto mc = mc_characteristic(samples, xi);
          csv += "," + num(mc.value) + "," + num(mc.std_error);
        }
        csv += "\n";
      }
      s.write("model_fourier.csv", csv);
      out << csv;
    } else if (mtail->parsed()) {
      const auto amps = amplitudes(s, m_t);
      const auto samples = sample_x(amps, m_count, cfg.seed, cfg.threads);
      const auto vs = linear_points(parse_grid(v_grid, "--V-grid"));
      std::string csv = "V,P,se\n";
      for (double v : vs) {
        const auto p = tail_fraction(samples, v);
        csv += num(v) + "," + num(p.value) + "," + num(p.std_error) + "\n";
      }
      CompensatedSum total;
      for (double r : amps.r) total.add(r);
      const auto ld = large_deviation_fit(samples, cfg.k, vs, total.value());
      json bounds = json::array();
      for (std::size_t kk : {5U, 10U, 20U}) {
        if (kk > amps.size()) continue;
        const auto b = montgomery_bounds(amps, kk);
        const auto bt = montgomery_bounds(amps, kk, false);
        bounds.push_back({{"K", kk}, {"head", b.head}, {"tail_sq", b.tail_sq}, {"upper_threshold", b.upper_threshold},
                          {"upper", b.upper}, {"upper_hi", b.upper_hi}, {"lower_threshold", b.lower_threshold},
                          {"lower", b.lower}, {"lower_lo", b.lower_lo}, {"underflow", b.underflow},
                          {"truncated_upper", bt.upper}, {"truncated_lower", bt.lower},
                          {"mc_upper", tail_fraction(samples, b.upper_threshold).value},
                          {"mc_lower", tail_fraction(samples, b.lower_threshold).value}});
      }
      json j{{"T", m_t}, {"count", m_count}, {"seed", cfg.seed},
             {"large_deviation", {{"power", ld.power}, {"c", ld.c}, {"c_se", ld.c_se}, {"intercept", ld.intercept},
                                  {"r_squared", ld.r_squared}, {"degenerate", ld.degenerate}, {"note", ld.note},
                                  {"points", ld.v.size()}}},
             {"montgomery", bounds}};
      s.write("model_tail.csv", csv);
      s.write_json("model_tail.json", s.stamp(j, "model_tail", {"random model tail"}));
      out << csv;
    } else if (mcompare->parsed()) {
      run_model_compare(s, m_t, m_count, m_dist);
    } else if (moments->parsed()) {
      run_moments(s, mo_r, mo_t);
    } else if (report->parsed()) {
      if (rep_run) {
        run_dist(s, 0.0, 201, std::log(2.0));
        run_variance(s, {});
        run_growth(s, 1.0, 0.1, 0.0);
        run_beta(s, m_t);
        run_model_compare(s, m_t, m_count, {});
        run_moments(s, {-1.0, 0.0, 1.0}, {});
      }
      run_report(s);
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n" << usage_hint();
    return 1;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace kfcl::cli
