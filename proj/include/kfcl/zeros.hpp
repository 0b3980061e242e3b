#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kfcl/characters.hpp"
#include "kfcl/special.hpp"

namespace kfcl {

/// Which function's zeros a catalog holds: zeta, or L(s, chi).
class FunctionId {
 public:
  static FunctionId zeta_function() { return FunctionId(); }
  static FunctionId l_function(DirichletCharacter chi) { return FunctionId(std::move(chi)); }

  [[nodiscard]] bool is_zeta() const { return !chi_.has_value(); }
  [[nodiscard]] const DirichletCharacter& character() const;
  [[nodiscard]] std::uint64_t modulus() const { return chi_ ? chi_->modulus() : 1; }
  [[nodiscard]] int parity() const { return chi_ ? chi_->parity() : 0; }
  /// "zeta" or "L:kronecker:-3"
  [[nodiscard]] std::string describe() const;

  [[nodiscard]] ValueDeriv evaluate(cplx s, const EvalContext& ctx) const;
  [[nodiscard]] double hardy_z(double t, const EvalContext& ctx) const;

  friend bool operator==(const FunctionId& a, const FunctionId& b) { return a.chi_ == b.chi_; }

 private:
  FunctionId() = default;
  explicit FunctionId(DirichletCharacter chi) : chi_(std::move(chi)) {}
  std::optional<DirichletCharacter> chi_;
};

enum class ZeroSource { dataset, computed };

struct ZeroRecord {
  double gamma = 0.0;
  std::optional<cplx> deriv;  // F'(1/2 + i gamma)
  ZeroSource source = ZeroSource::dataset;
};

/// Positive ordinates only, strictly increasing. Complete up to height().
class ZeroCatalog {
 public:
  ZeroCatalog(FunctionId fn, std::vector<ZeroRecord> records, std::optional<double> height = std::nullopt);

  [[nodiscard]] const FunctionId& function() const { return fn_; }
  [[nodiscard]] std::span<const ZeroRecord> records() const { return records_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] bool empty() const { return records_.empty(); }
  /// Height up to which the catalog is taken to be complete (T_max).
  [[nodiscard]] double height() const { return height_; }
  /// #{gamma <= T}
  [[nodiscard]] std::size_t count(double t) const;
  [[nodiscard]] bool enriched(double t) const;
  /// Records with gamma <= t.
  [[nodiscard]] std::span<const ZeroRecord> upto(double t) const;

 private:
  FunctionId fn_;
  std::vector<ZeroRecord> records_;
  double height_ = 0.0;
};

enum class ZeroFormat { plain, csv };

ZeroFormat parse_zero_format(std::string_view name);

/// plain: one ordinate per line, '#' comments and blank lines ignored.
/// csv: header "gamma,dre,dim"; dre/dim may both be empty for unenriched rows.
/// Violations raise DataError naming the 1-based line.
ZeroCatalog parse_zero_text(std::string_view text, ZeroFormat format, FunctionId fn);
ZeroCatalog parse_zero_file(const std::filesystem::path& path, ZeroFormat format, FunctionId fn);

/// Shortest round-trip decimal representation, so parse(serialize(c)) == c.
std::string serialize_zeros(const ZeroCatalog& catalog, ZeroFormat format);
void write_zero_file(const std::filesystem::path& path, const ZeroCatalog& catalog, ZeroFormat format);

struct RefinedZero {
  double gamma = 0.0;
  cplx deriv;
  double residual = 0.0;  // |F(1/2 + i gamma)|
  int iterations = 0;
};

/// Newton iteration on gamma -> F(1/2 + i gamma) using the analytic derivative.
RefinedZero refine_zero(double gamma0, const FunctionId& fn, const EvalContext& ctx = {});

/// Refines every record (up to `t_limit` if given) and attaches derivatives.
/// Records are processed independently; the result does not depend on `threads`.
ZeroCatalog enrich_catalog(const ZeroCatalog& catalog, const EvalContext& ctx = {}, unsigned threads = 1,
                           std::optional<double> t_limit = std::nullopt);

/// Compute-fallback: sign changes of the Hardy function on [t_lo, t_hi]
/// polished by bracketing, then refined. t_hi <= 2000.
ZeroCatalog scan_zeros(const FunctionId& fn, double t_lo, double t_hi, const EvalContext& ctx = {},
                       unsigned threads = 1);

/// Main term of the positive-ordinate count: zeta uses
/// (T/2pi) log(T/2pi e) + 7/8, L uses (T/2pi) log(qT/2pi e).
double zero_count_main_term(const FunctionId& fn, double t);

struct ZeroCountReport {
  double t = 0.0;
  std::size_t count = 0;
  double main_term = 0.0;
  double residual = 0.0;
  double bound = 0.0;  // C log(qT)
  bool flagged = false;
};

ZeroCountReport zero_count_check(const ZeroCatalog& catalog, double t, double c = 3.0);

/// sum_{0 < gamma <= T} |F'(rho)|^{2r}
double discrete_moment(const ZeroCatalog& catalog, double r, double t);

struct MomentGrowthFit {
  double r = 0.0;
  std::vector<double> heights;
  std::vector<double> moments;
  std::vector<double> ratio_linear;    // J / T
  std::vector<double> ratio_expected;  // J / (T (log T)^{(r+1)^2})
  double exponent = 0.0;               // free fit of log J on log T, log log T, 1
  double log_power = 0.0;
  double expected_log_power = 0.0;     // (r+1)^2
  double exponent_fixed_power = 0.0;   // log J - (r+1)^2 log log(T/2pi) ~ a log T + c
  double exponent_fixed_power_se = 0.0;
  bool consistent_with_unit_exponent = false;
  /// J ~ C T (log(T/2pi))^{(r+1)^2}; asymptotically the same C as in T (log T)^{(r+1)^2}
  double fitted_constant = 0.0;
  std::optional<double> predicted_constant;
  std::string caveat;
};

MomentGrowthFit moment_growth_fit(const ZeroCatalog& catalog, double r, std::span<const double> heights,
                                  std::uint64_t prime_cutoff = 100000);

/// Height in [n, n+1] maximizing the distance to the nearest ordinate;
/// candidates are n, n+1 and midpoints of consecutive ordinates.
double exceptional_height(const ZeroCatalog& catalog, std::uint64_t n);

struct AssumptionsReport {
  std::vector<double> heights;
  std::vector<double> weighted_energy;  // sum_{lambda <= T} lambda^2 |r|^2
  double theta = 0.0;                   // slope of log energy vs log T
  double theta_se = 0.0;
  std::vector<double> counts;           // N_lambda(T)
  double count_constant = 0.0;          // max N / (T log T)
  std::size_t max_window_count = 0;     // max_{T} #{T < lambda <= T+1}
  double max_window_ratio = 0.0;        // max of that count / log T over T >= 3
};

/// Tabulates the three frequency/coefficient growth quantities on the grid.
AssumptionsReport assumptions_probe(std::span<const double> lambdas, std::span<const double> coefficient_abs,
                                    std::span<const double> heights);

}  // namespace kfcl
