#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kfcl/kfree.hpp"
#include "kfcl/special.hpp"
#include "kfcl/zeros.hpp"

namespace kfcl::cli {

/// Resolved settings shared by every subcommand.
struct RunConfig {
  unsigned k = 2;
  std::uint64_t q = 3;
  std::optional<std::int64_t> d;  // discriminant, needed when q alone is ambiguous
  bool modified = false;
  std::string function = "auto";  // auto | zeta | L
  std::filesystem::path zeros;
  std::string zeros_format = "auto";  // auto (by extension) | plain | csv
  std::uint64_t sieve_limit = 1'000'000;
  EvalContext ctx;
  std::filesystem::path out_dir = "kfcl_out";
  std::filesystem::path cache_dir;  // empty: $KFCL_CACHE, else <out>/cache
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// k >= 2, N >= 10^3, precision settings in range.
  void validate() const;
  /// The catalog function implied by `function` and k.
  [[nodiscard]] FunctionId zero_function() const;
  /// Raises ValidationError unless the catalog function matches k's parity.
  void check_parity() const;
  [[nodiscard]] SummandSpec summand() const;
  [[nodiscard]] std::filesystem::path resolved_cache_dir() const;
  /// key=value lines, sorted; output and cache locations and thread count
  /// excluded since they do not affect results.
  [[nodiscard]] std::string canonical() const;
};

/// Parses "k=2,q=3,d=-3,modified" into cfg.
void apply_spec_string(RunConfig& cfg, const std::string& text);

/// Writes to a sibling temporary, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 invalid usage or arguments, 2 missing or bad data,
/// 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kfcl::cli
