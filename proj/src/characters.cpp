#include "kfcl/characters.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kfcl/errors.hpp"

namespace kfcl {

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    const auto t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::vector<std::uint64_t> distinct_prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

namespace {

int jacobi_odd(std::int64_t a, std::int64_t n) {
  // n odd and positive, 0 <= a < n
  int result = 1;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      const auto r = n & 7;
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if ((a & 3) == 3 && (n & 3) == 3) result = -result;
    a %= n;
  }
  return n == 1 ? result : 0;
}

bool squarefree(std::uint64_t n) {
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % (p * p) == 0) return false;
  }
  return true;
}

std::int64_t parse_int(std::string_view s, std::string_view what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("character spec: cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

int kronecker(std::int64_t a, std::int64_t n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  int result = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) result = -result;
  }
  if ((a & 1) == 0 && (n & 1) == 0) return 0;
  while ((n & 1) == 0) {
    n >>= 1;
    const auto r = ((a % 8) + 8) % 8;
    if (r == 3 || r == 5) result = -result;
  }
  if (n == 1) return result;
  const auto am = ((a % n) + n) % n;
  return result * jacobi_odd(am, n);
}

bool is_fundamental_discriminant(std::int64_t d) {
  if (d == 0 || d == 1) return false;
  const auto m4 = ((d % 4) + 4) % 4;
  const auto ad = static_cast<std::uint64_t>(d < 0 ? -d : d);
  if (m4 == 1) return squarefree(ad);
  if (m4 == 0) {
    const auto m = d / 4;
    const auto mm4 = ((m % 4) + 4) % 4;
    return (mm4 == 2 || mm4 == 3) && squarefree(static_cast<std::uint64_t>(m < 0 ? -m : m));
  }
  return false;
}

DirichletCharacter DirichletCharacter::from_kronecker(std::int64_t d) {
  if (!is_fundamental_discriminant(d)) {
    throw ValidationError("kronecker character: " + std::to_string(d) + " is not a fundamental discriminant");
  }
  DirichletCharacter chi;
  chi.q_ = static_cast<std::uint64_t>(d < 0 ? -d : d);
  chi.disc_ = d;
  chi.table_.resize(chi.q_);
  for (std::uint64_t n = 0; n < chi.q_; ++n) {
    chi.table_[n] = static_cast<std::int8_t>(kronecker(d, static_cast<std::int64_t>(n)));
  }
  chi.finish();
  if (!chi.primitive_) throw ValidationError("kronecker character unexpectedly imprimitive");
  return chi;
}

DirichletCharacter DirichletCharacter::from_table(std::vector<int> values) {
  const auto q = values.size();
  if (q < 3) throw ValidationError("character table: modulus must be >= 3");
  DirichletCharacter chi;
  chi.q_ = q;
  chi.table_.resize(q);
  for (std::size_t n = 0; n < q; ++n) {
    const int v = values[n];
    if (v < -1 || v > 1) throw ValidationError("character table: values must lie in {-1,0,1}");
    const bool unit = gcd_u64(n, q) == 1;
    if ((v == 0) == unit) {
      throw ValidationError("character table: value at " + std::to_string(n) + " inconsistent with gcd(n, q)");
    }
    chi.table_[n] = static_cast<std::int8_t>(v);
  }
  for (std::size_t a = 1; a < q; ++a) {
    for (std::size_t b = a; b < q; ++b) {
      if (chi.table_[(a * b) % q] != chi.table_[a] * chi.table_[b]) {
        throw ValidationError("character table: not completely multiplicative at (" + std::to_string(a) + ", " +
                              std::to_string(b) + ")");
      }
    }
  }
  long long total = 0;
  for (auto v : chi.table_) total += v;
  if (total != 0) throw ValidationError("character table: principal characters are not supported");
  chi.finish();
  return chi;
}

void DirichletCharacter::finish() {
  delta_ = table_[q_ - 1] == 1 ? 0 : 1;
  primes_ = distinct_prime_factors(q_);
  primitive_ = true;
  for (std::uint64_t d = 1; d < q_ && primitive_; ++d) {
    if (q_ % d != 0) continue;
    bool induced = true;
    for (std::uint64_t n = 1; n < q_ && induced; ++n) {
      if (gcd_u64(n, q_) == 1 && n % d == 1 % d && table_[n] != 1) induced = false;
    }
    if (induced) primitive_ = false;
  }
}

int DirichletCharacter::at(std::int64_t n) const {
  const auto q = static_cast<std::int64_t>(q_);
  return table_[static_cast<std::size_t>(((n % q) + q) % q)];
}

std::string DirichletCharacter::describe() const {
  if (disc_ != 0) return "kronecker:" + std::to_string(disc_);
  std::ostringstream os;
  os << "table:";
  for (std::size_t i = 0; i < table_.size(); ++i) os << (i ? "," : "") << static_cast<int>(table_[i]);
  return os.str();
}

int ModifiedCharacter::operator()(std::uint64_t n) const {
  for (const auto p : base_.prime_divisors()) {
    while (n % p == 0) n /= p;
  }
  return base_(n);
}

std::complex<double> gauss_sum(const DirichletCharacter& chi) {
  if (!chi.primitive()) throw ValidationError("gauss_sum: character is not primitive");
  const auto q = chi.modulus();
  double re = 0.0;
  double im = 0.0;
  for (std::uint64_t n = 1; n <= q; ++n) {
    const int v = chi(n);
    if (v == 0) continue;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(n % q) / static_cast<double>(q);
    re += v * std::cos(angle);
    im += v * std::sin(angle);
  }
  return {re, im};
}

DirichletCharacter character_for_modulus(std::uint64_t q) {
  const auto qi = static_cast<std::int64_t>(q);
  const bool neg = is_fundamental_discriminant(-qi);
  const bool pos = is_fundamental_discriminant(qi);
  if (neg && pos) {
    throw ValidationError("modulus " + std::to_string(q) + " carries two real primitive characters; pass d explicitly");
  }
  if (!neg && !pos) throw ValidationError("no real primitive character has modulus " + std::to_string(q));
  return DirichletCharacter::from_kronecker(neg ? -qi : qi);
}

DirichletCharacter parse_character_spec(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ';') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  const bool keyed = std::any_of(parts.begin(), parts.end(), [](const std::string& p) { return p.find('=') != std::string::npos; });
  if (!keyed) {
    std::vector<int> values;
    for (const auto& p : parts) values.push_back(static_cast<int>(parse_int(p, "table value")));
    return DirichletCharacter::from_table(std::move(values));
  }
  std::int64_t q = 0;
  std::int64_t d = 0;
  std::string kind = "kronecker";
  for (const auto& p : parts) {
    if (p.empty()) continue;
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw ValidationError("character spec: expected key=value, got '" + p + "'");
    const auto key = trim(std::string_view(p).substr(0, eq));
    const auto val = std::string_view(p).substr(eq + 1);
    if (key == "q") {
      q = parse_int(val, "q");
    } else if (key == "d") {
      d = parse_int(val, "d");
    } else if (key == "kind") {
      kind = trim(val);
    } else {
      throw ValidationError("character spec: unknown key '" + key + "'");
    }
  }
  if (kind != "kronecker") throw ValidationError("character spec: unsupported kind '" + kind + "'");
  if (d == 0) {
    if (q <= 0) throw ValidationError("character spec: need q or d");
    return character_for_modulus(static_cast<std::uint64_t>(q));
  }
  if (q != 0 && q != (d < 0 ? -d : d)) throw ValidationError("character spec: |d| must equal q");
  return DirichletCharacter::from_kronecker(d);
}

}  // namespace kfcl
