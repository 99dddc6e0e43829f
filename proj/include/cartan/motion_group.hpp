#pragma once
// Harmonic analysis on the motion group K x| p at t = 0.
//
// K is a torus in every shipped model, so K-elements are angle vectors and
// the group law on the K-part is addition; conjugation fixes the K-part of a
// torus element.  Measure conventions here: dk is vol(K)=1, dv is Lebesgue in
// the orthonormal p-coordinates, and the dual measure dz carries (2pi)^{-dim p}
// so that Fourier inversion has no stray constants.

#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cartan/model.hpp"
#include "cartan/quadrature.hpp"
#include "cartan/root_data.hpp"

namespace cartan {

struct MotionElement {
  Eigen::VectorXd k_angles;
  Eigen::VectorXd v;
};

inline Eigen::VectorXd reduce_angles(Eigen::VectorXd a) {
  for (int i = 0; i < a.size(); ++i) {
    a[i] = std::fmod(a[i], kTwoPi);
    if (a[i] < 0) a[i] += kTwoPi;
  }
  return a;
}

inline MotionElement motion_product(const ReductivePairModel& m,
                                    const MotionElement& a, const MotionElement& b) {
  Eigen::MatrixXd kb_inv = torus_matrix(m, (-b.k_angles).eval());
  return {reduce_angles(a.k_angles + b.k_angles),
          ad_action(m, kb_inv, a.v) + b.v};
}

inline MotionElement motion_inverse(const ReductivePairModel& m, const MotionElement& a) {
  Eigen::MatrixXd ka = torus_matrix(m, a.k_angles);
  return {reduce_angles(-a.k_angles), -ad_action(m, ka, a.v)};
}

// (k,v) (x,0) (k,v)^{-1} = (k x k^{-1}, k x^{-1} v - k v); the K-part is x
// itself since K is a torus.
inline MotionElement motion_conjugate(const ReductivePairModel& m,
                                      const TorusElement& x, const MotionElement& g) {
  Eigen::MatrixXd K = torus_matrix(m, g.k_angles);
  Eigen::MatrixXd Xi = torus_matrix(m, (-x.angles).eval());
  Eigen::VectorXd v = ad_action(m, (K * Xi).eval(), g.v) - ad_action(m, K, g.v);
  return {x.angles, v};
}

// ---- grids over K x p ----

struct MotionQuadSpec {
  int k_points = 64;       // per torus circle (vol-normalized rules)
  int p_points = 96;       // per axis (cartesian) or radial count (polar)
  double p_radius = 8.0;
  bool polar_p = false;    // polar p-sampling, dim p == 2 only
  int angle_points = 32;   // angular count in polar mode
  bool compensated = false;
  int threads = 1;
};

namespace detail {

// Tensor grid over K x p with a node decoder; polar mode carries the r
// Jacobian of dLeb = r dr dphi.
struct MotionGrid {
  QuadratureGrid grid;
  int rank = 0, dp = 0;
  bool polar = false;

  void decode(const std::vector<double>& c, Eigen::VectorXd& k_angles,
              Eigen::VectorXd& v, double& jac) const {
    k_angles.resize(rank);
    for (int i = 0; i < rank; ++i) k_angles[i] = c[i];
    v.resize(dp);
    if (polar) {
      const double r = c[rank], phi = c[rank + 1];
      v[0] = r * std::cos(phi);
      v[1] = r * std::sin(phi);
      jac = r;
    } else {
      for (int i = 0; i < dp; ++i) v[i] = c[rank + i];
      jac = 1.0;
    }
  }
};

inline MotionGrid make_motion_grid(const ReductivePairModel& m, const MotionQuadSpec& s) {
  MotionGrid g;
  g.rank = m.torus_rank();
  g.dp = m.dim_p();
  g.polar = s.polar_p;
  for (int i = 0; i < g.rank; ++i) g.grid.factors.push_back(torus_rule(s.k_points, true));
  if (s.polar_p) {
    if (g.dp != 2) throw std::invalid_argument("polar p-grid needs dim p == 2");
    g.grid.factors.push_back(radial_rule(s.p_points, s.p_radius));
    g.grid.factors.push_back(torus_rule(s.angle_points));
  } else {
    for (int i = 0; i < g.dp; ++i)
      g.grid.factors.push_back(symmetric_rule(s.p_points, s.p_radius));
  }
  g.grid.compensated = s.compensated;
  return g;
}

}  // namespace detail

// Orbital integral against the conjugacy class of the torus element x:
//   (1/det_p(id - x)) * int_K int_p f(k x k^{-1}, v) dk dv.
// Requires regular x.  The K-part of the integrand argument is x (torus K).
inline std::complex<double> orbital_integral_motion(const ReductivePairModel& m,
                                                    const SmoothTestFunction& f,
                                                    const TorusElement& x,
                                                    const MotionQuadSpec& spec) {
  const double det = ad_det_id_minus(m, x.angles);
  if (std::abs(det) < 1e-8)
    throw std::invalid_argument("orbital_integral_motion: x is not regular");
  detail::MotionGrid g = detail::make_motion_grid(m, spec);
  auto F = [&](const std::vector<double>& c) -> std::complex<double> {
    Eigen::VectorXd ka(g.rank), v(g.dp);
    double jac;
    g.decode(c, ka, v, jac);
    (void)ka;  // k x k^{-1} = x for torus K
    return jac * f.eval(x.angles, v, 0.0);
  };
  return integrate(g.grid, F, spec.threads) / det;
}

// Independent route: integrate f over the conjugators,
//   int_K int_p f((k,u)(x,0)(k,u)^{-1}) du dk,
// with the conjugation done by brute-force group products.  Equals the
// orbital integral; no determinant enters.
inline std::complex<double> orbital_integral_motion_orbit(const ReductivePairModel& m,
                                                          const SmoothTestFunction& f,
                                                          const TorusElement& x,
                                                          const MotionQuadSpec& spec) {
  detail::MotionGrid g = detail::make_motion_grid(m, spec);
  MotionElement x0{x.angles, Eigen::VectorXd::Zero(m.dim_p())};
  auto F = [&](const std::vector<double>& c) -> std::complex<double> {
    Eigen::VectorXd ka(g.rank), u(g.dp);
    double jac;
    g.decode(c, ka, u, jac);
    MotionElement gk{ka, u};
    MotionElement conj = motion_product(m, motion_product(m, gk, x0), motion_inverse(m, gk));
    return jac * f.eval(conj.k_angles, conj.v, 0.0);
  };
  return integrate(g.grid, F, spec.threads);
}

// ---- Fourier transform to operator kernels on L^2(K) ----

// Kernel in truncated Fourier modes: rank-dim multi-indices |m_i| <= cutoff,
// flattened row-major.  Composition of kernels is the matrix product.
struct FourierKernel {
  int rank = 0;
  int cutoff = 0;
  Eigen::MatrixXcd modes;
};

inline int mode_side(int rank, int cutoff) {
  int s = 1;
  for (int i = 0; i < rank; ++i) s *= 2 * cutoff + 1;
  return s;
}

inline FourierKernel kernel_compose(const FourierKernel& a, const FourierKernel& b) {
  if (a.rank != b.rank || a.cutoff != b.cutoff)
    throw std::invalid_argument("kernel_compose: incompatible kernels");
  return {a.rank, a.cutoff, a.modes * b.modes};
}

inline double kernel_op_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

struct FourierQuadSpec {
  int k_points = 48;   // kernel sampling per circle; must out-resolve the cutoff
  int p_points = 36;
  double p_radius = 9.0;
  int threads = 1;
};

// f_hat(z)(k1,k2) = int_p f(k1 k2^{-1}, v) e^{i<Ad_{k2} z, v>} dv, sampled on
// a uniform K x K grid and projected onto modes  e^{i(m1 th1 - m2 th2)}.
// Throws if the boundary modes carry relative mass above 1e-8 (cutoff too
// small for the requested accuracy).
inline FourierKernel fourier_transform(const ReductivePairModel& m,
                                       const SmoothTestFunction& f,
                                       const Eigen::VectorXd& z, int cutoff,
                                       const FourierQuadSpec& spec) {
  const int rank = m.torus_rank(), dp = m.dim_p();
  if (z.size() != dp) throw std::invalid_argument("fourier_transform: bad z dimension");
  if (spec.k_points < 2 * cutoff + 2)
    throw std::invalid_argument("fourier_transform: k grid does not resolve the cutoff");
  const int N = spec.k_points;
  const int nk = [&] { int v = 1; for (int i = 0; i < rank; ++i) v *= N; return v; }();

  // p-quadrature factors shared by all kernel entries
  QuadratureGrid pg;
  for (int i = 0; i < dp; ++i) pg.factors.push_back(symmetric_rule(spec.p_points, spec.p_radius));

  auto angles_at = [&](int flat) {
    Eigen::VectorXd a(rank);
    for (int d = rank - 1; d >= 0; --d) {
      a[d] = kTwoPi * double(flat % N) / double(N);
      flat /= N;
    }
    return a;
  };

  Eigen::MatrixXcd kernel(nk, nk);
  for (int j2 = 0; j2 < nk; ++j2) {
    Eigen::VectorXd th2 = angles_at(j2);
    Eigen::VectorXd w2 = ad_action(m, torus_matrix(m, th2), z);
    for (int j1 = 0; j1 < nk; ++j1) {
      Eigen::VectorXd diff = reduce_angles(angles_at(j1) - th2);
      auto F = [&](const std::vector<double>& c) -> std::complex<double> {
        Eigen::VectorXd v(dp);
        double phase = 0;
        for (int i = 0; i < dp; ++i) {
          v[i] = c[i];
          phase += w2[i] * c[i];
        }
        return f.eval(diff, v, 0.0) * std::complex<double>(std::cos(phase), std::sin(phase));
      };
      kernel(j1, j2) = integrate(pg, F, spec.threads);
    }
  }

  // project onto modes; uniform nodes make the projection a plain DFT
  const int side = mode_side(rank, cutoff);
  auto mode_at = [&](int flat) {
    std::vector<int> mv(rank);
    for (int d = rank - 1; d >= 0; --d) {
      mv[d] = flat % (2 * cutoff + 1) - cutoff;
      flat /= 2 * cutoff + 1;
    }
    return mv;
  };
  auto phase_dot = [&](const std::vector<int>& mv, const Eigen::VectorXd& th) {
    double p = 0;
    for (int d = 0; d < rank; ++d) p += mv[d] * th[d];
    return p;
  };

  Eigen::MatrixXcd half(side, nk);
  for (int a = 0; a < side; ++a) {
    std::vector<int> mv = mode_at(a);
    for (int j2 = 0; j2 < nk; ++j2) {
      std::complex<double> s{0, 0};
      for (int j1 = 0; j1 < nk; ++j1) {
        double ph = -phase_dot(mv, angles_at(j1));
        s += kernel(j1, j2) * std::complex<double>(std::cos(ph), std::sin(ph));
      }
      half(a, j2) = s / double(nk);
    }
  }
  FourierKernel out{rank, cutoff, Eigen::MatrixXcd(side, side)};
  for (int b = 0; b < side; ++b) {
    std::vector<int> mv = mode_at(b);
    for (int a = 0; a < side; ++a) {
      std::complex<double> s{0, 0};
      for (int j2 = 0; j2 < nk; ++j2) {
        double ph = phase_dot(mv, angles_at(j2));
        s += half(a, j2) * std::complex<double>(std::cos(ph), std::sin(ph));
      }
      out.modes(a, b) = s / double(nk);
    }
  }

  double max_all = 0, max_boundary = 0;
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      double v = std::abs(out.modes(a, b));
      max_all = std::max(max_all, v);
      std::vector<int> ma = mode_at(a), mb = mode_at(b);
      bool boundary = false;
      for (int d = 0; d < rank; ++d)
        boundary = boundary || std::abs(ma[d]) == cutoff || std::abs(mb[d]) == cutoff;
      if (boundary) max_boundary = std::max(max_boundary, v);
    }
  if (max_all > 0 && max_boundary > 1e-8 * max_all)
    throw std::runtime_error("fourier_transform: mode cutoff too small for requested accuracy");
  return out;
}

// ---- operator-valued profiles and the inverse transform ----

// g(z) id_E with E given by its weight list; g must be Ad(K)-invariant.
struct OperatorProfile {
  std::function<std::complex<double>(const Eigen::VectorXd& z)> g;
  std::vector<WeightVec> block_weights;  // half-units
  std::string label;
};

inline FormalCharacter block_character(int rank, const std::vector<WeightVec>& ws) {
  FormalCharacter c = FormalCharacter::zero(rank);
  for (const auto& w : ws) c.add_term(w, 1);
  return c;
}

inline std::complex<double> block_character_value(const OperatorProfile& p,
                                                  const Eigen::VectorXd& k_angles) {
  std::vector<double> a(k_angles.data(), k_angles.data() + k_angles.size());
  std::complex<double> s{0, 0};
  for (const auto& w : p.block_weights) s += weight_eval(w, a);
  return s;
}

inline void profile_self_check(const ReductivePairModel& m, const OperatorProfile& p) {
  const int dp = m.dim_p();
  for (int i = 1; i <= 4; ++i) {
    Eigen::VectorXd z(dp);
    for (int j = 0; j < dp; ++j) z[j] = std::sin(1.7 * i + 0.9 * j) * 2.0;
    Eigen::VectorXd ang = Eigen::VectorXd::Constant(m.torus_rank(), 0.61 * i);
    Eigen::VectorXd zr = ad_action(m, torus_matrix(m, ang), z);
    std::complex<double> a = p.g(z), b = p.g(zr);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
      throw std::invalid_argument("operator profile: g is not K-invariant");
  }
}

struct InverseFourierSpec {
  int u_points = 32;   // K-average; the integrand is K-invariant up to grid error
  int z_points = 96;   // per axis
  double z_radius = 6.5;
};

// K-averaged momentum integral
//   int_K int_p^ g(z) e^{i<Ad_u z, v>} (2pi)^{-dim p} dz du,
// computed with the phase rewritten as <z, Ad_{u^{-1}} v>.  This is the
// v-profile of the inverse transform; the full value carries chi_E(k).
inline std::complex<double> profile_momentum_average(const ReductivePairModel& m,
                                                     const OperatorProfile& p,
                                                     const Eigen::VectorXd& v,
                                                     const InverseFourierSpec& spec) {
  const int rank = m.torus_rank(), dp = m.dim_p();
  QuadratureGrid grid;
  for (int i = 0; i < rank; ++i) grid.factors.push_back(torus_rule(spec.u_points, true));
  for (int i = 0; i < dp; ++i) grid.factors.push_back(symmetric_rule(spec.z_points, spec.z_radius));

  std::vector<Eigen::VectorXd> wu_cache;  // Ad_{u^{-1}} v per u-node, filled lazily
  const int nu = [&] { int n = 1; for (int i = 0; i < rank; ++i) n *= spec.u_points; return n; }();
  wu_cache.resize(nu);
  std::vector<char> have(nu, 0);
  auto F = [&](const std::vector<double>& c, const std::vector<int>& idx) {
    int uflat = 0;
    for (int d = 0; d < rank; ++d) uflat = uflat * spec.u_points + idx[d];
    if (!have[uflat]) {
      Eigen::VectorXd ua(rank);
      for (int d = 0; d < rank; ++d) ua[d] = c[d];
      wu_cache[uflat] = ad_action(m, torus_matrix(m, (-ua).eval()), v);
      have[uflat] = 1;
    }
    const Eigen::VectorXd& w = wu_cache[uflat];
    Eigen::VectorXd z(dp);
    double phase = 0;
    for (int i = 0; i < dp; ++i) {
      z[i] = c[rank + i];
      phase += z[i] * w[i];
    }
    return p.g(z) * std::complex<double>(std::cos(phase), std::sin(phase));
  };
  double norm = std::pow(kTwoPi, -double(dp));
  return norm * integrate_indexed(grid, F, 1);
}

// Value at (k, v) of the inverse transform of g(z) id_E.
inline std::complex<double> inverse_fourier_of_profile(const ReductivePairModel& m,
                                                       const OperatorProfile& p,
                                                       const Eigen::VectorXd& k_angles,
                                                       const Eigen::VectorXd& v,
                                                       const InverseFourierSpec& spec) {
  return block_character_value(p, k_angles) * profile_momentum_average(m, p, v, spec);
}

// Closed form of the orbital integral of the inverse transform of g id_E:
//   (-1)^{dim p/2} chi_E(x) g(0) / (chi_{S+} - chi_{S-})^2 (x).
inline std::complex<double> prop_tau_closed_form(const RootDatum& d,
                                                 const OperatorProfile& p,
                                                 const TorusElement& x) {
  std::vector<double> ang = angle_list(x);
  std::complex<double> sdiff = spinor_character_difference(d).evaluate(ang);
  if (std::abs(sdiff) < 1e-12)
    throw std::runtime_error("prop_tau_closed_form: x is singular");
  std::complex<double> chi = block_character(d.rank, p.block_weights).evaluate(ang);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(d.dim_p());
  return double(d.sign_dim_p_half()) * chi * p.g(zero) / (sdiff * sdiff);
}

// ---- convolution ----

struct ConvolutionSpec {
  int k_points = 32;
  int v_points = 36;
  double v_radius = 9.0;
};

// (f * g)(k, v) = int_K int_p f(k - km, Ad_{km}(v - vm)) g(km, vm) dvm dkm.
// Returns an evaluator; wrap it in memoize_function for repeated use.
inline SmoothTestFunction convolution(const ReductivePairModel& m,
                                      const SmoothTestFunction& f,
                                      const SmoothTestFunction& g,
                                      const ConvolutionSpec& spec) {
  const int rank = m.torus_rank(), dp = m.dim_p();
  QuadratureGrid grid;
  for (int i = 0; i < rank; ++i) grid.factors.push_back(torus_rule(spec.k_points, true));
  for (int i = 0; i < dp; ++i) grid.factors.push_back(symmetric_rule(spec.v_points, spec.v_radius));

  // Ad matrices per km-node, shared across evaluations
  auto ad_cache = std::make_shared<std::map<std::vector<int>, Eigen::MatrixXd>>();
  auto eval = [m, f, g, grid, rank, dp, ad_cache](const Eigen::VectorXd& k_angles,
                                                  const Eigen::VectorXd& v,
                                                  double) -> std::complex<double> {
    auto F = [&](const std::vector<double>& c, const std::vector<int>& idx) {
      std::vector<int> kidx(idx.begin(), idx.begin() + rank);
      auto it = ad_cache->find(kidx);
      if (it == ad_cache->end()) {
        Eigen::VectorXd km(rank);
        for (int d = 0; d < rank; ++d) km[d] = c[d];
        it = ad_cache->emplace(kidx, ad_matrix(m, torus_matrix(m, km))).first;
      }
      Eigen::VectorXd km_ang(rank), vm(dp);
      for (int d = 0; d < rank; ++d) km_ang[d] = c[d];
      for (int i = 0; i < dp; ++i) vm[i] = c[rank + i];
      Eigen::VectorXd arg = it->second * (v - vm);
      return f.eval(reduce_angles(k_angles - km_ang), arg, 0.0) * g.eval(km_ang, vm, 0.0);
    };
    return integrate_indexed(grid, F, 1);
  };
  SmoothTestFunction out;
  out.eval = eval;
  out.decay = DecayClass::Gaussian;
  out.support_radius = f.support_radius + g.support_radius;
  return out;
}

// Deterministic memo on the exact bits of (k_angles, v, t); single-threaded use.
inline SmoothTestFunction memoize_function(const SmoothTestFunction& f) {
  auto cache = std::make_shared<std::map<std::vector<std::uint64_t>, std::complex<double>>>();
  SmoothTestFunction out = f;
  auto inner = f.eval;
  out.eval = [inner, cache](const Eigen::VectorXd& k, const Eigen::VectorXd& v,
                            double t) -> std::complex<double> {
    std::vector<std::uint64_t> key;
    key.reserve(k.size() + v.size() + 1);
    auto push = [&key](double x) {
      std::uint64_t b;
      std::memcpy(&b, &x, sizeof b);
      key.push_back(b);
    };
    for (int i = 0; i < k.size(); ++i) push(k[i]);
    for (int i = 0; i < v.size(); ++i) push(v[i]);
    push(t);
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    std::complex<double> val = inner(k, v, t);
    (*cache)[key] = val;
    return val;
  };
  return out;
}

}  // namespace cartan
