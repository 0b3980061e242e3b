#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kfcl/characters.hpp"

namespace kfcl {

/// Bit-level indicator of the k-free integers in [0, limit]. Bit 0 is unset.
class KFreeSieve {
 public:
  /// Segmented sieve striding the multiples of p^k. Segments are disjoint
  /// word ranges, so `threads` > 1 processes them concurrently.
  static KFreeSieve build(unsigned k, std::uint64_t limit, unsigned threads = 1);

  [[nodiscard]] unsigned k() const { return k_; }
  [[nodiscard]] std::uint64_t limit() const { return limit_; }
  [[nodiscard]] bool is_kfree(std::uint64_t n) const {
    return (words_[n >> 6] >> (n & 63)) & 1U;
  }
  /// Number of k-free n <= min(upto, limit).
  [[nodiscard]] std::uint64_t count(std::uint64_t upto) const;
  [[nodiscard]] std::uint64_t count() const { return count(limit_); }
  [[nodiscard]] std::span<const std::uint64_t> words() const { return words_; }

  /// Binary cache: 8-byte magic "KFSIEVE1", u64 k, u64 limit, then the
  /// packed little-endian u64 words. 8-byte aligned throughout, so the file
  /// can be mapped directly.
  void save(const std::filesystem::path& path) const;
  static KFreeSieve load(const std::filesystem::path& path);

  /// Load from `dir` if a matching cache exists, else build and store it.
  static KFreeSieve cached(unsigned k, std::uint64_t limit, const std::filesystem::path& dir,
                           unsigned threads = 1);
  static std::string cache_file_name(unsigned k, std::uint64_t limit);

 private:
  KFreeSieve(unsigned k, std::uint64_t limit);

  unsigned k_ = 2;
  std::uint64_t limit_ = 0;
  std::vector<std::uint64_t> words_;
};

/// f = mu^(k) chi, or mu^(k) g_chi when `modified`.
struct SummandSpec {
  SummandSpec(unsigned k, DirichletCharacter character, bool modified);

  unsigned k;
  DirichletCharacter character;
  bool modified;

  /// Summand value given the k-free indicator of n.
  [[nodiscard]] int value(std::uint64_t n, bool kfree) const;
  [[nodiscard]] std::string describe() const;
};

/// Exact S_f(x) = sum_{n <= x} f(n), endpoint included.
std::int64_t partial_sum(const SummandSpec& spec, double x, const KFreeSieve& sieve);

/// S_f as a right-continuous step function. Only jump points are stored:
/// S_f(x) = values[i] for jumps[i] <= x < jumps[i+1], and 0 for x < 1.
class StepSeries {
 public:
  StepSeries(unsigned k, std::uint64_t limit, std::vector<std::uint64_t> jumps, std::vector<std::int64_t> values);

  [[nodiscard]] unsigned k() const { return k_; }
  [[nodiscard]] std::uint64_t limit() const { return limit_; }
  [[nodiscard]] std::span<const std::uint64_t> jumps() const { return jumps_; }
  [[nodiscard]] std::span<const std::int64_t> values() const { return values_; }
  [[nodiscard]] std::size_t size() const { return jumps_.size(); }

  /// S_f(x) for 0 <= x < limit + 1.
  [[nodiscard]] std::int64_t at(double x) const;

  /// Visits maximal constant pieces [a, b) intersected with [lo, hi):
  /// fn(a, b, S). Pieces where S = 0 are included.
  template <typename Fn>
  void for_each_piece(double lo, double hi, Fn&& fn) const;

 private:
  unsigned k_;
  std::uint64_t limit_;
  std::vector<std::uint64_t> jumps_;
  std::vector<std::int64_t> values_;
};

/// Single pass producing S_f(n) for every n <= limit.
StepSeries cumulative_series(const SummandSpec& spec, const KFreeSieve& sieve, std::uint64_t limit);

/// phi(y) = e^{-y/2k} S_f(e^y).
double normalized_phi(const StepSeries& series, double y);

template <typename Fn>
void StepSeries::for_each_piece(double lo, double hi, Fn&& fn) const {
  const double top = static_cast<double>(limit_) + 1.0;
  if (hi > top) hi = top;
  if (!(lo < hi)) return;
  // index of last jump <= lo
  std::size_t i = 0;
  {
    std::size_t a = 0;
    std::size_t b = jumps_.size();
    while (a < b) {
      const std::size_t m = (a + b) / 2;
      if (static_cast<double>(jumps_[m]) <= lo) {
        a = m + 1;
      } else {
        b = m;
      }
    }
    i = a;  // first jump > lo
  }
  double start = lo;
  std::int64_t value = i == 0 ? 0 : values_[i - 1];
  for (; i < jumps_.size(); ++i) {
    const double next = static_cast<double>(jumps_[i]);
    if (next >= hi) break;
    if (next > start) fn(start, next, value);
    start = next;
    value = values_[i];
  }
  fn(start, hi, value);
}

}  // namespace kfcl
