#pragma once
// Deterministic tensor-product quadrature.
//
// One-dimensional rules (periodic-uniform on the circle, Gauss-Legendre on an
// interval) combine into product grids.  Sums are reduced in a fixed order
// that does not depend on the evaluation schedule: nodes are grouped into
// fixed-size chunks by flat index, each chunk is summed pairwise, and the
// chunk sums are merged pairwise in chunk order.  The result is bit-identical
// for any thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace cartan {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Rule1D {
  enum class Kind { PeriodicUniform, GaussLegendre };
  Kind kind;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::string label;  // stable signature fragment, e.g. "torus:64" or "gl[0,6]:96"
};

// Uniform rule on [0, 2pi).  Raw weights sum to 2pi; the normalized variant
// sums to 1 and is the vol(K)=1 convention used for K-integrals.
inline Rule1D torus_rule(int n, bool normalized = false) {
  if (n < 1) throw std::invalid_argument("torus_rule: need n >= 1");
  Rule1D r;
  r.kind = Rule1D::Kind::PeriodicUniform;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double w = (normalized ? 1.0 : kTwoPi) / double(n);
  for (int j = 0; j < n; ++j) {
    r.nodes[j] = kTwoPi * double(j) / double(n);
    r.weights[j] = w;
  }
  r.label = (normalized ? "ktorus:" : "torus:") + std::to_string(n);
  return r;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// three-term recurrence, then affinely mapped to [a,b].
inline Rule1D gauss_legendre_rule(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: need n >= 1");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre_rule: need a < b");
  Rule1D r;
  r.kind = Rule1D::Kind::GaussLegendre;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess, standard for this iteration.
    double x = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
    double p1 = 0, dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * x * p2 - double(j) * p3) / double(j + 1);
      }
      dp = double(n) * (x * p1 - p2) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = mid - half * x;  // i-th guess is near the upper end in x
    r.nodes[n - 1 - i] = mid + half * x;
    r.weights[i] = half * w;
    r.weights[n - 1 - i] = half * w;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "gl[%g,%g]:%d", a, b, n);
  r.label = buf;
  return r;
}

inline Rule1D radial_rule(int n, double R) { return gauss_legendre_rule(n, 0.0, R); }

// Truncated rule for integrals over the whole line against rapidly decaying
// integrands; R is the truncation radius.
inline Rule1D symmetric_rule(int n, double R) { return gauss_legendre_rule(n, -R, R); }

// Truncation radius for |f| <= C exp(-c |v|^2) with tail below ~1e-12 relative.
inline double gaussian_truncation_radius(double c) {
  if (!(c > 0)) throw std::invalid_argument("gaussian_truncation_radius: need c > 0");
  return 8.0 / std::sqrt(c);
}

struct QuadratureGrid {
  std::vector<Rule1D> factors;
  bool compensated = false;  // Kahan accumulation instead of plain pairwise

  std::int64_t node_count() const {
    std::int64_t n = 1;
    for (const auto& f : factors) n *= std::int64_t(f.nodes.size());
    return n;
  }

  std::string signature() const {
    std::string s;
    for (const auto& f : factors) {
      if (!s.empty()) s += "|";
      s += f.label;
    }
    if (compensated) s += "|kahan";
    return s;
  }
};

namespace detail {

// Pairwise "binary counter" accumulator: push values in index order; partial
// sums at equal levels merge immediately.  Exact pairwise tree, O(log N) state.
struct PairwiseStack {
  std::vector<std::complex<double>> sums;
  std::vector<int> levels;
  void push(std::complex<double> v) {
    int lv = 0;
    while (!levels.empty() && levels.back() == lv) {
      v += sums.back();
      sums.pop_back();
      levels.pop_back();
      ++lv;
    }
    sums.push_back(v);
    levels.push_back(lv);
  }
  std::complex<double> total() const {
    std::complex<double> t{0.0, 0.0};
    for (size_t i = sums.size(); i-- > 0;) t += sums[i];
    return t;
  }
};

struct KahanAcc {
  std::complex<double> sum{0.0, 0.0}, comp{0.0, 0.0};
  void push(std::complex<double> v) {
    std::complex<double> y = v - comp;
    std::complex<double> t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  std::complex<double> total() const { return sum; }
};

inline constexpr std::int64_t kChunk = 4096;

}  // namespace detail

// Integrates F over the grid.  F receives the node coordinates and the
// multi-index; it must return a finite value at every node.
inline std::complex<double> integrate_indexed(
    const QuadratureGrid& grid,
    const std::function<std::complex<double>(const std::vector<double>&,
                                             const std::vector<int>&)>& F,
    int threads = 1) {
  const int dims = int(grid.factors.size());
  if (dims == 0) throw std::invalid_argument("integrate: empty grid");
  const std::int64_t total = grid.node_count();
  const std::int64_t nchunks = (total + detail::kChunk - 1) / detail::kChunk;

  auto run_chunk = [&](std::int64_t chunk) -> std::complex<double> {
    const std::int64_t begin = chunk * detail::kChunk;
    const std::int64_t end = std::min(total, begin + detail::kChunk);
    std::vector<int> idx(dims);
    std::vector<double> coords(dims);
    std::int64_t rem = begin;
    for (int d = dims - 1; d >= 0; --d) {
      const std::int64_t sz = std::int64_t(grid.factors[d].nodes.size());
      idx[d] = int(rem % sz);
      rem /= sz;
    }
    detail::PairwiseStack pw;
    detail::KahanAcc kh;
    for (std::int64_t flat = begin; flat < end; ++flat) {
      double w = 1.0;
      for (int d = 0; d < dims; ++d) {
        coords[d] = grid.factors[d].nodes[idx[d]];
        w *= grid.factors[d].weights[idx[d]];
      }
      std::complex<double> val = w * F(coords, idx);
      if (!std::isfinite(val.real()) || !std::isfinite(val.imag())) {
        std::string at;
        for (int d = 0; d < dims; ++d) at += (d ? "," : "") + std::to_string(idx[d]);
        throw std::runtime_error("integrate: non-finite integrand at node (" + at + ")");
      }
      if (grid.compensated) kh.push(val); else pw.push(val);
      for (int d = dims - 1; d >= 0; --d) {
        if (++idx[d] < int(grid.factors[d].nodes.size())) break;
        idx[d] = 0;
      }
    }
    return grid.compensated ? kh.total() : pw.total();
  };

  std::vector<std::complex<double>> chunk_sums(nchunks);
  if (threads <= 1 || nchunks == 1) {
    for (std::int64_t c = 0; c < nchunks; ++c) chunk_sums[c] = run_chunk(c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex err_mu;
    auto worker = [&]() {
      for (;;) {
        std::int64_t c = next.fetch_add(1);
        if (c >= nchunks || failed.load()) return;
        try {
          chunk_sums[c] = run_chunk(c);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lk(err_mu);
          failed.store(true);
          if (error_msg.empty()) error_msg = e.what();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const int nt = int(std::min<std::int64_t>(threads, nchunks));
    pool.reserve(nt);
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error(error_msg);
  }

  // Chunk order is fixed, so this merge is schedule-independent.
  if (grid.compensated) {
    detail::KahanAcc kh;
    for (auto& s : chunk_sums) kh.push(s);
    return kh.total();
  }
  detail::PairwiseStack pw;
  for (auto& s : chunk_sums) pw.push(s);
  return pw.total();
}

inline std::complex<double> integrate(
    const QuadratureGrid& grid,
    const std::function<std::complex<double>(const std::vector<double>&)>& F,
    int threads = 1) {
  return integrate_indexed(
      grid, [&](const std::vector<double>& x, const std::vector<int>&) { return F(x); },
      threads);
}

enum class DecayClass { CompactBump, Gaussian };

// Test function on the deformation family: (K-angles, p-coordinates, t).
// support_radius bounds the p-support for bumps and the effective support
// for gaussian-class decay (|F| <= C exp(-c |v|^2)).
struct SmoothTestFunction {
  std::function<std::complex<double>(const Eigen::VectorXd& k_angles,
                                     const Eigen::VectorXd& v, double t)>
      eval;
  double support_radius = 0.0;
  DecayClass decay = DecayClass::Gaussian;
};

// C-infinity bump: exp(1 - 1/(1 - (r/R)^2)) inside r < R, zero outside.
// Value 1 at r = 0.
inline double bump_profile(double r, double R) {
  const double u = r / R;
  if (!(u < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

// ---- shipped test functions ----

// exp(-c |v|^2), independent of the K-part and of t.
inline SmoothTestFunction gaussian_function(double c) {
  SmoothTestFunction f;
  f.eval = [c](const Eigen::VectorXd&, const Eigen::VectorXd& v,
               double) -> std::complex<double> {
    return std::exp(-c * v.squaredNorm());
  };
  f.decay = DecayClass::Gaussian;
  f.support_radius = gaussian_truncation_radius(c);
  return f;
}

// bump_profile(|v|, R), independent of the K-part and of t.
inline SmoothTestFunction bump_function(double R) {
  SmoothTestFunction f;
  f.eval = [R](const Eigen::VectorXd&, const Eigen::VectorXd& v,
               double) -> std::complex<double> {
    return bump_profile(v.norm(), R);
  };
  f.decay = DecayClass::CompactBump;
  f.support_radius = R;
  return f;
}

// Multiplies f by the K-character e^{i <modes, k_angles>}.
inline SmoothTestFunction modulated(const SmoothTestFunction& f, std::vector<int> modes) {
  SmoothTestFunction out = f;
  auto inner = f.eval;
  out.eval = [inner, modes](const Eigen::VectorXd& k, const Eigen::VectorXd& v,
                            double t) -> std::complex<double> {
    double phase = 0;
    for (size_t i = 0; i < modes.size() && int(i) < k.size(); ++i) phase += modes[i] * k[i];
    return inner(k, v, t) * std::complex<double>(std::cos(phase), std::sin(phase));
  };
  return out;
}

}  // namespace cartan
