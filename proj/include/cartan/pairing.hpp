#pragma once
// Trace pairings with the projection classes: the t = 0 pairing by
// quadrature, the closed-form character value, the formal degree by the
// top-wedge formula, and the t^{dim p} scaling law.
//
// Weight convention for mu: callers pass integer weight units, one entry per
// torus circle; internally weights live in half-units.  Pairing a weight m
// with a k-coefficient c uses the real compact convention m * c (the i of
// i*t is dropped); formal degrees are reported as magnitudes because the
// overall phase depends on that convention.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "cartan/model.hpp"
#include "cartan/motion_group.hpp"
#include "cartan/quadrature.hpp"
#include "cartan/root_data.hpp"

namespace cartan {

inline WeightVec weight_from_integers(const std::vector<int>& mu) {
  WeightVec w(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) w[i] = 2 * mu[i];
  return w;
}

// Half-spin weight lists: all sums (1/2) sum_j eps_j alpha_j over the
// positive p-weights, split by the parity of the minus signs.
struct HalfSpinWeights {
  std::vector<WeightVec> plus, minus;
};

inline HalfSpinWeights half_spin_weights(const RootDatum& d) {
  const auto& roots = d.delta_p_pos;
  HalfSpinWeights out;
  const size_t n = roots.size();
  for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
    WeightVec w(d.rank, 0);
    int minus = 0;
    for (size_t j = 0; j < n; ++j) {
      int sign = (mask >> j) & 1 ? -1 : 1;
      if (sign < 0) ++minus;
      for (int i = 0; i < d.rank; ++i) {
        if (roots[j][i] % 2 != 0)
          throw std::invalid_argument("half_spin_weights: non-integral half-root");
        w[i] += sign * roots[j][i] / 2;
      }
    }
    (minus % 2 == 0 ? out.plus : out.minus).push_back(w);
  }
  return out;
}

inline std::vector<WeightVec> tensor_with_line(const std::vector<WeightVec>& ws,
                                               const WeightVec& mu_half) {
  std::vector<WeightVec> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(weight_add(w, mu_half));
  return out;
}

// Shared table of profile_momentum_average values keyed on the exact bits of
// v.  Values are deterministic per key, so a racy double-compute is harmless;
// the mutex only guards the map structure.
struct ProfileAverageCache {
  std::map<std::vector<std::uint64_t>, std::complex<double>> table;
  std::mutex mu;
};

namespace detail {

inline std::vector<std::uint64_t> v_bits(const Eigen::VectorXd& v) {
  std::vector<std::uint64_t> key(v.size());
  for (int i = 0; i < v.size(); ++i) std::memcpy(&key[i], &v[i], sizeof(double));
  return key;
}

inline std::complex<double> cached_momentum_average(
    const ReductivePairModel& m, const OperatorProfile& p, const Eigen::VectorXd& v,
    const InverseFourierSpec& spec, const std::shared_ptr<ProfileAverageCache>& cache) {
  if (!cache) return profile_momentum_average(m, p, v, spec);
  std::vector<std::uint64_t> key = v_bits(v);
  {
    std::lock_guard<std::mutex> lock(cache->mu);
    auto it = cache->table.find(key);
    if (it != cache->table.end()) return it->second;
  }
  std::complex<double> val = profile_momentum_average(m, p, v, spec);
  std::lock_guard<std::mutex> lock(cache->mu);
  cache->table.emplace(std::move(key), val);
  return val;
}

}  // namespace detail

struct PairingQuadSpec {
  double gauss_c = 1.0;  // profile g(z) = exp(-c |z|^2); g(0) = 1 for any c
  InverseFourierSpec ift;
  MotionQuadSpec motion;
  int threads = 1;
};

inline OperatorProfile gaussian_block_profile(double c, std::vector<WeightVec> ws,
                                              std::string label) {
  OperatorProfile p;
  p.g = [c](const Eigen::VectorXd& z) -> std::complex<double> {
    return std::exp(-c * z.squaredNorm());
  };
  p.block_weights = std::move(ws);
  p.label = std::move(label);
  return p;
}

// The inverse transform of g id_E as a test function, with the momentum
// averages shared through cache.  The cache must only ever see one g.
inline SmoothTestFunction profile_block_function(const ReductivePairModel& m,
                                                 const OperatorProfile& p,
                                                 const InverseFourierSpec& ift,
                                                 std::shared_ptr<ProfileAverageCache> cache,
                                                 double support_radius) {
  SmoothTestFunction f;
  f.eval = [m, p, ift, cache](const Eigen::VectorXd& k, const Eigen::VectorXd& v,
                              double) -> std::complex<double> {
    return block_character_value(p, k) * detail::cached_momentum_average(m, p, v, ift, cache);
  };
  f.decay = DecayClass::Gaussian;
  f.support_radius = support_radius;
  return f;
}

// Computes the momentum average at every p-node of the motion grid, in
// parallel; afterwards integration over that grid only hits the cache.
inline void prefill_profile_cache(const ReductivePairModel& m, const OperatorProfile& p,
                                  const MotionQuadSpec& motion, const InverseFourierSpec& ift,
                                  const std::shared_ptr<ProfileAverageCache>& cache,
                                  int threads) {
  detail::MotionGrid g = detail::make_motion_grid(m, motion);
  std::vector<Eigen::VectorXd> vs;
  std::vector<int> sizes;
  int np = 1;
  const size_t pstart = g.grid.factors.size() - (g.polar ? 2 : size_t(g.dp));
  for (size_t fi = pstart; fi < g.grid.factors.size(); ++fi) {
    sizes.push_back(int(g.grid.factors[fi].nodes.size()));
    np *= sizes.back();
  }
  for (int flat = 0; flat < np; ++flat) {
    std::vector<double> c(g.rank, 0.0);
    std::vector<double> pc(sizes.size());
    int rem = flat;
    for (int dimi = int(sizes.size()) - 1; dimi >= 0; --dimi) {
      pc[dimi] = g.grid.factors[pstart + dimi].nodes[rem % sizes[dimi]];
      rem /= sizes[dimi];
    }
    for (double x0 : pc) c.push_back(x0);
    Eigen::VectorXd ka(g.rank), v(g.dp);
    double jac;
    g.decode(c, ka, v, jac);
    vs.push_back(v);
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= vs.size()) break;
      detail::cached_momentum_average(m, p, vs[i], ift, cache);
    }
  };
  int nthreads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// tau_x(f+ - f-) for the smoothing pair with hat(f±) = g(z) id_{S± tensor E}:
// inverse transform of each block profile, then the orbital integral, then
// the difference.  The expensive momentum averages are shared through cache
// (both blocks and every mu see the same g), prefilled in parallel over the
// motion grid's p-nodes.
inline std::complex<double> pairing_t0_numeric(
    const ReductivePairModel& m, const RootDatum& d, const std::vector<int>& mu,
    const TorusElement& x, const PairingQuadSpec& spec,
    std::shared_ptr<ProfileAverageCache> cache = nullptr) {
  if (!is_regular(m, x))
    throw std::invalid_argument("pairing_t0_numeric: x is not regular");
  if (int(mu.size()) != d.rank)
    throw std::invalid_argument("pairing_t0_numeric: mu has wrong rank");
  if (!cache) cache = std::make_shared<ProfileAverageCache>();

  WeightVec mu_half = weight_from_integers(mu);
  HalfSpinWeights spin = half_spin_weights(d);
  OperatorProfile plus =
      gaussian_block_profile(spec.gauss_c, tensor_with_line(spin.plus, mu_half), "S+xE");
  OperatorProfile minus =
      gaussian_block_profile(spec.gauss_c, tensor_with_line(spin.minus, mu_half), "S-xE");

  prefill_profile_cache(m, plus, spec.motion, spec.ift, cache, spec.threads);
  SmoothTestFunction fp =
      profile_block_function(m, plus, spec.ift, cache, spec.motion.p_radius);
  SmoothTestFunction fm =
      profile_block_function(m, minus, spec.ift, cache, spec.motion.p_radius);
  std::complex<double> tp = orbital_integral_motion(m, fp, x, spec.motion);
  std::complex<double> tm = orbital_integral_motion(m, fm, x, spec.motion);
  return tp - tm;
}

// The pairing at any t in [0,1]: equal to the t = 0 closed form, which is the
// discrete series character value at x.
inline std::complex<double> pairing_value(const ReductivePairModel& m, const RootDatum& d,
                                          const std::vector<int>& mu, const TorusElement& x,
                                          double t) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("pairing_value: t outside [0,1]");
  if (!is_regular(m, x)) throw std::invalid_argument("pairing_value: x is not regular");
  return discrete_series_character_value(d, weight_from_integers(mu), x);
}

// Pfaffian by recursive expansion along the first row; exact-arithmetic
// friendly for the small antisymmetric matrices that arise here.
inline double pfaffian(const Eigen::MatrixXd& a) {
  const int n = int(a.rows());
  if (n % 2 != 0) return 0.0;
  if (n == 0) return 1.0;
  if (n == 2) return a(0, 1);
  double sum = 0.0;
  for (int j = 1; j < n; ++j) {
    Eigen::MatrixXd sub(n - 2, n - 2);
    int ri = 0;
    for (int r = 1; r < n; ++r) {
      if (r == j) continue;
      int ci = 0;
      for (int c = 1; c < n; ++c) {
        if (c == j) continue;
        sub(ri, ci++) = a(r, c);
      }
      ++ri;
    }
    double sign = (j % 2 == 1) ? 1.0 : -1.0;
    sum += sign * a(0, j) * pfaffian(sub);
  }
  return sum;
}

namespace detail {

// beta_mu(P_i, P_j) = mu([P_i, P_j]) on the orthonormal p-basis, with the
// bracket optionally rescaled by t^2 (the deformed bracket on p).
inline Eigen::MatrixXd beta_matrix(const ReductivePairModel& m, const std::vector<int>& mu,
                                   double t2) {
  const int dp = m.dim_p();
  if (int(mu.size()) != m.torus_rank())
    throw std::invalid_argument("beta_matrix: mu has wrong rank");
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dp, dp);
  for (int i = 0; i < dp; ++i)
    for (int j = i + 1; j < dp; ++j) {
      Eigen::MatrixXd br = t2 * bracket(m.basis_p[i], m.basis_p[j]);
      Eigen::VectorXd kc = k_coords(m, br);
      double val = 0.0;
      for (int b = 0; b < m.torus_rank(); ++b) val += mu[b] * kc[m.torus_idx[b]];
      B(i, j) = val;
      B(j, i) = -val;
    }
  return B;
}

inline double formal_degree_signed(const ReductivePairModel& m, const std::vector<int>& mu,
                                   double t2) {
  const int n = m.dim_p() / 2;
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return fact * pfaffian(beta_matrix(m, mu, t2)) / (n * std::pow(2.0, n));
}

}  // namespace detail

// Magnitude of (1/(n 2^n)) (Lambda^n beta_mu)([p]) against the orthonormal
// volume form in basis_p storage order.
inline double formal_degree(const ReductivePairModel& m, const std::vector<int>& mu) {
  return std::abs(detail::formal_degree_signed(m, mu, 1.0));
}

// Ratio of the formal degree computed with the t-deformed bracket to the
// t = 1 value; equals t^{dim p} by homogeneity, exactly in floating point
// for dyadic t.
inline double l2_scaling(const ReductivePairModel& m, const std::vector<int>& mu, double t) {
  if (!(t > 0)) throw std::invalid_argument("l2_scaling: need t > 0");
  double base = detail::formal_degree_signed(m, mu, 1.0);
  if (base == 0.0)
    throw std::invalid_argument("l2_scaling: formal degree vanishes for this mu");
  return detail::formal_degree_signed(m, mu, t * t) / base;
}

}  // namespace cartan
