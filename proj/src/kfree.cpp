#include "kfcl/kfree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <limits>
#include <new>

#include "kfcl/errors.hpp"
#include "kfcl/numerics.hpp"

namespace kfcl {

namespace {

constexpr char kMagic[8] = {'K', 'F', 'S', 'I', 'E', 'V', 'E', '1'};
constexpr std::uint64_t kMaxLimit = (std::uint64_t{1} << 62);
constexpr std::uint64_t kSegmentWords = std::uint64_t{1} << 15;

// p^k, or 0 when it exceeds `cap`.
std::uint64_t bounded_power(std::uint64_t p, unsigned k, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (unsigned i = 0; i < k; ++i) {
    if (v > cap / p) return 0;
    v *= p;
  }
  return v;
}

std::vector<std::uint64_t> primes_with_power_below(unsigned k, std::uint64_t limit) {
  // largest r with r^k <= limit
  auto r = static_cast<std::uint64_t>(std::pow(static_cast<double>(limit), 1.0 / k));
  while (r > 1 && bounded_power(r, k, limit) == 0) --r;
  while (bounded_power(r + 1, k, limit) != 0) ++r;
  std::vector<bool> composite(r + 1, false);
  std::vector<std::uint64_t> primes;
  for (std::uint64_t i = 2; i <= r; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t j = i * i; j <= r; j += i) composite[j] = true;
  }
  return primes;
}

}  // namespace

KFreeSieve::KFreeSieve(unsigned k, std::uint64_t limit) : k_(k), limit_(limit) {
  if (k < 2) throw ValidationError("k-free sieve: k must be >= 2");
  if (limit < 1) throw ValidationError("k-free sieve: limit must be >= 1");
  if (limit >= kMaxLimit) throw CapacityError("k-free sieve: limit exceeds 2^62");
  const std::uint64_t words = limit / 64 + 1;
  if (words > words_.max_size()) throw CapacityError("k-free sieve: bit array exceeds addressable memory");
  try {
    words_.assign(words, ~std::uint64_t{0});
  } catch (const std::bad_alloc&) {
    throw CapacityError("k-free sieve: cannot allocate " + std::to_string(words * 8) + " bytes");
  }
}

KFreeSieve KFreeSieve::build(unsigned k, std::uint64_t limit, unsigned threads) {
  KFreeSieve sieve(k, limit);
  auto& w = sieve.words_;
  w[0] &= ~std::uint64_t{1};
  const unsigned tail = static_cast<unsigned>((limit + 1) & 63);
  if (tail != 0) w.back() &= (std::uint64_t{1} << tail) - 1;

  const auto primes = primes_with_power_below(k, limit);
  std::vector<std::uint64_t> powers;
  powers.reserve(primes.size());
  for (auto p : primes) powers.push_back(bounded_power(p, k, limit));

  const std::uint64_t segments = (w.size() + kSegmentWords - 1) / kSegmentWords;
  auto run = [&](std::uint64_t first, std::uint64_t stride) {
    for (std::uint64_t s = first; s < segments; s += stride) {
      const std::uint64_t lo = s * kSegmentWords * 64;
      const std::uint64_t hi = std::min<std::uint64_t>(limit + 1, (s + 1) * kSegmentWords * 64);
      for (auto pk : powers) {
        if (pk >= hi) break;
        for (std::uint64_t m = ((lo + pk - 1) / pk) * pk; m < hi; m += pk) {
          w[m >> 6] &= ~(std::uint64_t{1} << (m & 63));
        }
      }
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(segments, 64))));
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, run, t, threads));
    for (auto& j : jobs) j.get();
  }
  return sieve;
}

std::uint64_t KFreeSieve::count(std::uint64_t upto) const {
  upto = std::min(upto, limit_);
  const std::uint64_t full = (upto + 1) / 64;
  std::uint64_t c = 0;
  for (std::uint64_t i = 0; i < full; ++i) c += static_cast<std::uint64_t>(std::popcount(words_[i]));
  const unsigned rem = static_cast<unsigned>((upto + 1) & 63);
  if (rem != 0) c += static_cast<std::uint64_t>(std::popcount(words_[full] & ((std::uint64_t{1} << rem) - 1)));
  return c;
}

void KFreeSieve::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write sieve cache " + tmp);
    const std::uint64_t k = k_;
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&k), sizeof k);
    out.write(reinterpret_cast<const char*>(&limit_), sizeof limit_);
    out.write(reinterpret_cast<const char*>(words_.data()), static_cast<std::streamsize>(words_.size() * 8));
    if (!out) throw DataError("short write on sieve cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

KFreeSieve KFreeSieve::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open sieve cache " + path.string());
  char magic[8];
  std::uint64_t k = 0;
  std::uint64_t limit = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&k), sizeof k);
  in.read(reinterpret_cast<char*>(&limit), sizeof limit);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError("bad sieve cache header in " + path.string());
  if (k < 2 || k > 64 || limit < 1 || limit >= kMaxLimit) throw DataError("corrupt sieve cache parameters in " + path.string());
  KFreeSieve sieve(static_cast<unsigned>(k), limit);
  in.read(reinterpret_cast<char*>(sieve.words_.data()), static_cast<std::streamsize>(sieve.words_.size() * 8));
  if (!in) throw DataError("truncated sieve cache " + path.string());
  return sieve;
}

std::string KFreeSieve::cache_file_name(unsigned k, std::uint64_t limit) {
  const auto key = "kfree-sieve|k=" + std::to_string(k) + "|N=" + std::to_string(limit);
  return "sieve-" + hex64(fnv1a64(key)) + ".bin";
}

KFreeSieve KFreeSieve::cached(unsigned k, std::uint64_t limit, const std::filesystem::path& dir, unsigned threads) {
  const auto path = dir / cache_file_name(k, limit);
  if (std::filesystem::exists(path)) {
    try {
      auto s = load(path);
      if (s.k() == k && s.limit() == limit) return s;
    } catch (const DataError&) {
      // fall through and rebuild
    }
  }
  auto s = build(k, limit, threads);
  std::filesystem::create_directories(dir);
  s.save(path);
  return s;
}

SummandSpec::SummandSpec(unsigned k_, DirichletCharacter character_, bool modified_)
    : k(k_), character(std::move(character_)), modified(modified_) {
  if (k < 2) throw ValidationError("summand: k must be >= 2");
  if (!character.primitive()) throw ValidationError("summand: character must be primitive");
}

int SummandSpec::value(std::uint64_t n, bool kfree) const {
  if (!kfree) return 0;
  if (!modified) return character(n);
  for (const auto p : character.prime_divisors()) {
    while (n % p == 0) n /= p;
  }
  return character(n);
}

std::string SummandSpec::describe() const {
  return "k=" + std::to_string(k) + ";chi=" + character.describe() + ";modified=" + (modified ? "1" : "0");
}

std::int64_t partial_sum(const SummandSpec& spec, double x, const KFreeSieve& sieve) {
  if (sieve.k() != spec.k) throw ValidationError("partial_sum: sieve k does not match summand k");
  if (!(x >= 1.0)) throw ValidationError("partial_sum: x must be >= 1");
  const auto n_max = static_cast<std::uint64_t>(std::floor(x));
  if (n_max > sieve.limit()) throw ValidationError("partial_sum: sieve too small for x");
  std::int64_t s = 0;
  for (std::uint64_t n = 1; n <= n_max; ++n) s += spec.value(n, sieve.is_kfree(n));
  return s;
}

StepSeries::StepSeries(unsigned k, std::uint64_t limit, std::vector<std::uint64_t> jumps, std::vector<std::int64_t> values)
    : k_(k), limit_(limit), jumps_(std::move(jumps)), values_(std::move(values)) {
  if (jumps_.size() != values_.size()) throw ValidationError("step series: size mismatch");
}

std::int64_t StepSeries::at(double x) const {
  if (x < 0 || x >= static_cast<double>(limit_) + 1.0) throw ValidationError("step series: x out of range");
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), static_cast<std::uint64_t>(std::floor(x)));
  if (it == jumps_.begin()) return 0;
  return values_[static_cast<std::size_t>(it - jumps_.begin()) - 1];
}

StepSeries cumulative_series(const SummandSpec& spec, const KFreeSieve& sieve, std::uint64_t limit) {
  if (sieve.k() != spec.k) throw ValidationError("cumulative_series: sieve k does not match summand k");
  if (limit > sieve.limit()) throw ValidationError("cumulative_series: limit beyond sieve capacity");
  std::vector<std::uint64_t> jumps;
  std::vector<std::int64_t> values;
  const auto expected = static_cast<std::size_t>(0.62 * static_cast<double>(limit)) + 16;
  jumps.reserve(expected);
  values.reserve(expected);
  std::int64_t s = 0;
  for (std::uint64_t n = 1; n <= limit; ++n) {
    const int v = spec.value(n, sieve.is_kfree(n));
    if (v == 0) continue;
    s += v;
    jumps.push_back(n);
    values.push_back(s);
  }
  jumps.shrink_to_fit();
  values.shrink_to_fit();
  return StepSeries(spec.k, limit, std::move(jumps), std::move(values));
}

double normalized_phi(const StepSeries& series, double y) {
  const double x = std::exp(y);
  if (!(y >= 0) || x >= static_cast<double>(series.limit()) + 1.0) {
    throw ValidationError("normalized_phi: y out of series range");
  }
  return std::exp(-y / (2.0 * series.k())) * static_cast<double>(series.at(x));
}

}  // namespace kfcl
