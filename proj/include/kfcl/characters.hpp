#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kfcl {

/// Kronecker symbol (a|n), defined for every integer pair.
int kronecker(std::int64_t a, std::int64_t n);

/// True when d is a fundamental discriminant (d != 1).
bool is_fundamental_discriminant(std::int64_t d);

/// A real (quadratic) non-principal Dirichlet character, stored as its
/// period table. Immutable once built.
class DirichletCharacter {
 public:
  /// The primitive character n -> (d|n) of modulus |d|.
  static DirichletCharacter from_kronecker(std::int64_t d);

  /// Arbitrary modulus q = values.size() >= 3; values[n] is chi(n mod q).
  /// Validates zero pattern, complete multiplicativity, and non-principality;
  /// primitivity is detected, not required.
  static DirichletCharacter from_table(std::vector<int> values);

  [[nodiscard]] std::uint64_t modulus() const { return q_; }
  [[nodiscard]] int parity() const { return delta_; }  // 0 even, 1 odd
  [[nodiscard]] bool primitive() const { return primitive_; }
  /// Discriminant when built from a Kronecker symbol, 0 for table characters.
  [[nodiscard]] std::int64_t discriminant() const { return disc_; }
  [[nodiscard]] std::span<const std::int8_t> values() const { return table_; }
  /// Distinct primes dividing q, ascending.
  [[nodiscard]] const std::vector<std::uint64_t>& prime_divisors() const { return primes_; }

  [[nodiscard]] int operator()(std::uint64_t n) const { return table_[n % q_]; }
  [[nodiscard]] int at(std::int64_t n) const;

  /// Compact textual form: "kronecker:d" or "table:v0,v1,...".
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const DirichletCharacter& a, const DirichletCharacter& b) {
    return a.table_ == b.table_;
  }

 private:
  DirichletCharacter() = default;
  void finish();

  std::uint64_t q_ = 0;
  int delta_ = 0;
  bool primitive_ = false;
  std::int64_t disc_ = 0;
  std::vector<std::int8_t> table_;
  std::vector<std::uint64_t> primes_;
};

/// g_chi: completely multiplicative, chi(p) off primes dividing q, 1 on them.
class ModifiedCharacter {
 public:
  explicit ModifiedCharacter(DirichletCharacter base) : base_(std::move(base)) {}

  [[nodiscard]] const DirichletCharacter& base() const { return base_; }

  /// Strips the q-smooth part of n by repeated division, then looks up chi.
  [[nodiscard]] int operator()(std::uint64_t n) const;

 private:
  DirichletCharacter base_;
};

/// tau(chi) = sum_{n=1}^{q} chi(n) e^{2 pi i n / q}. Throws ValidationError
/// for non-primitive characters.
std::complex<double> gauss_sum(const DirichletCharacter& chi);

/// Parses the config form of a character:
///   "q=<int>, kind=kronecker, d=<disc>"   or   "1,-1,0,..." (value table)
/// A bare "q=<int>" resolves d when exactly one of +-q is a fundamental
/// discriminant.
DirichletCharacter parse_character_spec(std::string_view text);

/// Resolve the unique real primitive character of modulus q, or throw when
/// there are none or two (q = 8 needs an explicit discriminant).
DirichletCharacter character_for_modulus(std::uint64_t q);

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b);
std::vector<std::uint64_t> distinct_prime_factors(std::uint64_t n);

}  // namespace kfcl
