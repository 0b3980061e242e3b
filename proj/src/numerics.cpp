#include "kfcl/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <future>
#include <limits>
#include <mutex>

#include "kfcl/errors.hpp"

namespace kfcl {

double deterministic_sum(std::size_t count, const std::function<double(std::size_t)>& f, unsigned threads,
                         std::size_t chunk) {
  if (count == 0) return 0.0;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<CompensatedSum> partial(chunks);
  auto work = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < chunks; c += stride) {
      const std::size_t lo = c * chunk;
      const std::size_t hi = std::min(count, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) partial[c].add(f(i));
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, work, t, threads));
    for (auto& j : jobs) j.get();
  }
  // pairwise tree over chunk order
  while (partial.size() > 1) {
    std::vector<CompensatedSum> next((partial.size() + 1) / 2);
    for (std::size_t i = 0; i < partial.size(); i += 2) {
      next[i / 2] = partial[i];
      if (i + 1 < partial.size()) next[i / 2] += partial[i + 1];
    }
    partial.swap(next);
  }
  return partial.front().value();
}

LinearFit least_squares(std::span<const double> design, std::size_t cols, std::span<const double> y) {
  const std::size_t rows = y.size();
  if (cols == 0 || design.size() != rows * cols) throw ValidationError("least_squares: design shape mismatch");
  if (rows < cols) throw ValidationError("least_squares: fewer observations than parameters");
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    b(i) = y[i];
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = design[i * cols + j];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < static_cast<Eigen::Index>(cols)) throw ValidationError("least_squares: rank-deficient design");
  const Eigen::VectorXd beta = qr.solve(b);
  const Eigen::VectorXd res = b - a * beta;

  LinearFit fit;
  fit.coefficients.assign(beta.data(), beta.data() + cols);
  const double ss_res = res.squaredNorm();
  fit.residual_rms = std::sqrt(ss_res / static_cast<double>(rows));
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

  fit.std_errors.assign(cols, std::numeric_limits<double>::quiet_NaN());
  if (rows > cols) {
    const double sigma2 = ss_res / static_cast<double>(rows - cols);
    const Eigen::MatrixXd cov = (a.transpose() * a).inverse() * sigma2;
    for (std::size_t j = 0; j < cols; ++j) fit.std_errors[j] = std::sqrt(std::max(0.0, cov(j, j)));
  }
  return fit;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_line: size mismatch");
  std::vector<double> design;
  design.reserve(2 * x.size());
  for (double v : x) {
    design.push_back(1.0);
    design.push_back(v);
  }
  return least_squares(design, 2, y);
}

std::vector<double> nnls(std::span<const double> design, std::size_t cols, std::span<const double> y) {
  const std::size_t rows = y.size();
  if (cols == 0 || design.size() != rows * cols) throw ValidationError("nnls: design shape mismatch");
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    b(i) = y[i];
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = design[i * cols + j];
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
  std::vector<bool> passive(cols, false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < cols; ++j)
      if (passive[j]) idx.push_back(static_cast<Eigen::Index>(j));
    z.setZero(static_cast<Eigen::Index>(cols));
    if (idx.empty()) return;
    Eigen::MatrixXd ap(rows, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
    const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(static_cast<Eigen::Index>(c));
  };

  for (int outer = 0; outer < 3 * static_cast<int>(cols) + 10; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (std::size_t j = 0; j < cols; ++j) {
      if (!passive[j] && w(static_cast<Eigen::Index>(j)) > best_w) {
        best_w = w(static_cast<Eigen::Index>(j));
        best = static_cast<Eigen::Index>(j);
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < 3 * static_cast<int>(cols) + 10; ++inner) {
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      for (std::size_t j = 0; j < cols; ++j)
        if (passive[j] && z(static_cast<Eigen::Index>(j)) <= 0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < cols; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && z(jj) <= 0) alpha = std::min(alpha, x(jj) / (x(jj) - z(jj)));
      }
      x += alpha * (z - x);
      for (std::size_t j = 0; j < cols; ++j)
        if (passive[j] && std::abs(x(static_cast<Eigen::Index>(j))) < 1e-15) passive[j] = false;
    }
  }
  std::vector<double> out(cols);
  for (std::size_t j = 0; j < cols; ++j) out[j] = std::max(0.0, x(static_cast<Eigen::Index>(j)));
  return out;
}

namespace {
std::mutex g_sink_mutex;
std::function<void(std::string_view)> g_sink;
}  // namespace

void set_warning_sink(std::function<void(std::string_view)> sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(std::string_view message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(message.size()), message.data());
  }
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace kfcl
