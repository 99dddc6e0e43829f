#pragma once
// Deformation family G_t for t in (0,1]: deformed Haar measure in KAK
// coordinates, the deformed orbital integral, its t = 0 limit, and the
// convergence study comparing the two.
//
// KAK coordinates write g = k' exp(t v) k with v in the closed positive
// chamber of a.  The deformed Haar density is Pi_alpha (sinh(t alpha(v))/t)
// over the restricted roots with multiplicity; its t -> 0 limit is the
// Jacobian Pi_alpha alpha(v)^{n_alpha} of the chamber-times-K covering of p,
// whose pushforward onto Lebesgue measure carries the model's
// kak_measure_factor.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cartan/model.hpp"
#include "cartan/quadrature.hpp"
#include "cartan/root_data.hpp"

namespace cartan {

// Pi_alpha (sinh(t alpha(v))/t)^{n_alpha}; one 1/t per root counted with
// multiplicity, which absorbs the t^{-(dim p - dim a)} Haar prefactor.
inline double haar_density_t(const RootDatum& d, const Eigen::VectorXd& v, double t) {
  if (!(t > 0)) throw std::invalid_argument("haar_density_t: need t > 0");
  double out = 1.0;
  for (const auto& [coeffs, mult] : d.restricted_roots) {
    double a = coeffs.dot(v);
    double factor = std::sinh(t * a) / t;
    for (int i = 0; i < mult; ++i) out *= factor;
  }
  return out;
}

inline double haar_density_limit(const RootDatum& d, const Eigen::VectorXd& v) {
  double out = 1.0;
  for (const auto& [coeffs, mult] : d.restricted_roots) {
    double a = coeffs.dot(v);
    for (int i = 0; i < mult; ++i) out *= a;
  }
  return out;
}

struct DeformQuadSpec {
  int k_points = 48;     // conjugating K-factor, per circle
  int a_points = 48;     // Gauss-Legendre per a-axis on (0, a_radius)
  double a_radius = 4.0;
  int threads = 1;
  bool compensated = false;
};

namespace detail {

inline Eigen::VectorXd embed_a(const ReductivePairModel& m, const Eigen::VectorXd& va) {
  Eigen::VectorXd vp = Eigen::VectorXd::Zero(m.dim_p());
  for (int j = 0; j < m.a_rank(); ++j) vp[m.a_idx[j]] = va[j];
  return vp;
}

}  // namespace detail

// Deformed orbital integral
//   int_{G_t} f(g x g^{-1}, t) d_t g
// in KAK coordinates g = k' exp(tv) k.  For torus K the inner factor
// k x k^{-1} equals x, so the k-integral is trivial (vol 1) and the
// conjugated element is exp(t w) exp(-t Ad_x w) x with w = Ad_{k'} v.
// The result is pulled back to (k, v, t) coordinates by polar_factor.
inline std::complex<double> orbital_integral_t(const ReductivePairModel& m,
                                               const RootDatum& d,
                                               const SmoothTestFunction& f,
                                               const TorusElement& x, double t,
                                               const DeformQuadSpec& spec) {
  if (!(t > 0)) throw std::invalid_argument("orbital_integral_t: need t > 0");
  if (!is_regular(m, x)) throw std::invalid_argument("orbital_integral_t: x is not regular");
  const int rank = m.torus_rank(), ar = m.a_rank();

  QuadratureGrid grid;
  for (int i = 0; i < rank; ++i) grid.factors.push_back(torus_rule(spec.k_points, true));
  for (int i = 0; i < ar; ++i)
    grid.factors.push_back(gauss_legendre_rule(spec.a_points, 0.0, spec.a_radius));
  grid.compensated = spec.compensated;

  Eigen::MatrixXd x_mat = torus_matrix(m, x.angles);
  Eigen::MatrixXd ad_x = ad_matrix(m, x_mat);

  auto F = [&](const std::vector<double>& c, const std::vector<int>& idx) -> std::complex<double> {
    Eigen::VectorXd ka(rank), va(ar);
    for (int i = 0; i < rank; ++i) ka[i] = c[i];
    for (int i = 0; i < ar; ++i) va[i] = c[rank + i];
    Eigen::VectorXd w = ad_action(m, torus_matrix(m, ka), detail::embed_a(m, va));
    Eigen::MatrixXd g =
        exp_p(m, w, t) * exp_p(m, (ad_x * w).eval(), -t) * x_mat;
    DeformationPoint pt;
    try {
      pt = polar_factor(m, g, t);
    } catch (const std::exception& e) {
      std::string where = "orbital_integral_t: polar factorization failed at node (";
      for (size_t i = 0; i < idx.size(); ++i)
        where += (i ? "," : "") + std::to_string(idx[i]);
      throw std::runtime_error(where + "): " + e.what());
    }
    return f.eval(angles_of(m, pt.k), pt.v, t) * haar_density_t(d, va, t);
  };
  return integrate_indexed(grid, F, spec.threads);
}

struct LimitQuadSpec {
  int v_points = 64;
  double v_radius = 8.0;
  int threads = 1;
  bool compensated = false;
};

// t = 0 limit of the deformed orbital integral:
//   kak_measure_factor * int_K int_p f(k x k^{-1}, w - Ad_{k x k^{-1}} w, 0) dk dw.
// The measure factor converts the chamber-times-K limit density into plain
// Lebesgue measure on p.  For torus K the outer K-average is trivial.
inline std::complex<double> limit_rhs(const ReductivePairModel& m, const RootDatum& d,
                                      const SmoothTestFunction& f, const TorusElement& x,
                                      const LimitQuadSpec& spec) {
  (void)d;
  if (!is_regular(m, x)) throw std::invalid_argument("limit_rhs: x is not regular");
  const int dp = m.dim_p();
  QuadratureGrid grid;
  for (int i = 0; i < dp; ++i)
    grid.factors.push_back(symmetric_rule(spec.v_points, spec.v_radius));
  grid.compensated = spec.compensated;

  Eigen::MatrixXd ad_x = ad_matrix(m, torus_matrix(m, x.angles));
  Eigen::MatrixXd lin = Eigen::MatrixXd::Identity(dp, dp) - ad_x;
  auto F = [&](const std::vector<double>& c) -> std::complex<double> {
    Eigen::VectorXd w(dp);
    for (int i = 0; i < dp; ++i) w[i] = c[i];
    return f.eval(x.angles, (lin * w).eval(), 0.0);
  };
  return m.kak_measure_factor * integrate(grid, F, spec.threads);
}

struct ConvergenceRow {
  double t = 0.0;
  std::complex<double> value{0.0, 0.0};
  double gap = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;  // schedule order
  std::complex<double> limit{0.0, 0.0};
  double self_convergence = 0.0;     // worst grid-refinement movement observed
  bool tail_monotone = false;        // gaps strictly non-increasing on the tail
  std::string grid_signature;
};

// Runs the schedule against the t = 0 limit.  Self-convergence doubles both
// grid resolutions at the smallest t and at the limit; a non-monotone gap
// tail is reported through tail_monotone, not silently accepted.
inline ConvergenceStudy convergence_study(const ReductivePairModel& m, const RootDatum& d,
                                          const SmoothTestFunction& f, const TorusElement& x,
                                          const std::vector<double>& t_schedule,
                                          const DeformQuadSpec& spec,
                                          const LimitQuadSpec& limit_spec) {
  if (t_schedule.empty())
    throw std::invalid_argument("convergence_study: empty schedule");
  for (size_t i = 0; i < t_schedule.size(); ++i) {
    if (!(t_schedule[i] > 0))
      throw std::invalid_argument("convergence_study: schedule must be positive");
    if (i && !(t_schedule[i] < t_schedule[i - 1]))
      throw std::invalid_argument("convergence_study: schedule must be strictly decreasing");
  }
  ConvergenceStudy out;
  out.limit = limit_rhs(m, d, f, x, limit_spec);
  for (double t : t_schedule) {
    std::complex<double> v = orbital_integral_t(m, d, f, x, t, spec);
    out.rows.push_back({t, v, std::abs(v - out.limit)});
  }

  DeformQuadSpec fine = spec;
  fine.k_points *= 2;
  fine.a_points *= 2;
  LimitQuadSpec lfine = limit_spec;
  lfine.v_points *= 2;
  double t_min = t_schedule.back();
  double moved_t = std::abs(orbital_integral_t(m, d, f, x, t_min, fine) - out.rows.back().value);
  double moved_0 = std::abs(limit_rhs(m, d, f, x, lfine) - out.limit);
  out.self_convergence = std::max(moved_t, moved_0);

  size_t n = out.rows.size();
  size_t tail = std::min<size_t>(4, n);
  out.tail_monotone = true;
  for (size_t i = n - tail + 1; i < n; ++i)
    if (!(out.rows[i].gap < out.rows[i - 1].gap)) out.tail_monotone = false;
  if (n == 1) out.tail_monotone = true;  // degenerate schedule, nothing to compare

  QuadratureGrid sig;
  sig.factors.push_back(torus_rule(spec.k_points, true));
  sig.factors.push_back(gauss_legendre_rule(spec.a_points, 0.0, spec.a_radius));
  sig.factors.push_back(symmetric_rule(limit_spec.v_points, limit_spec.v_radius));
  out.grid_signature = sig.signature();
  return out;
}

}  // namespace cartan
