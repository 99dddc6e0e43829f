#pragma once
// Concrete reductive pair models (G, K) realized as block matrix groups.
//
// A model carries bases of the Cartan decomposition g = k + p, with basis_p
// orthonormal for <A,B> = tr(A^T B)/2, a maximal torus basis inside k and a
// maximal abelian subspace a inside p.  Shipped models: sl2r (SL(2,R)/SO(2))
// and the block-diagonal product sl2r x sl2r.  In both, K is a torus and each
// SL(2) block contributes one rotation angle; code that identifies K-elements
// with angle vectors relies on that.
//
// Deformation-family conventions: phi_t(k, v) = k * exp(t v) identifies
// K x p with the group G_t for t > 0; at t = 0 the family degenerates to the
// semidirect product K x| p with law (k1,v1)(k2,v2) = (k1 k2, k2^{-1} v1 + v2).

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "cartan/quadrature.hpp"

namespace cartan {

struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReductivePairModel {
  std::string name;
  int n = 0;                      // ambient matrix size
  std::vector<int> block_sizes;   // SL blocks down the diagonal, one angle each
  std::vector<Eigen::MatrixXd> basis_k;
  std::vector<Eigen::MatrixXd> basis_p;   // orthonormal for tr(A^T B)/2
  std::vector<int> torus_idx;     // indices into basis_k spanning the torus
  std::vector<int> a_idx;         // indices into basis_p spanning a
  // Pushforward constant of the polar map a+ x K -> p: integrating
  // g(Ad_k v) prod alpha(v)^{n_alpha} over a+ x K (vol(K)=1) equals
  // kak_measure_factor times the Lebesgue integral of g over p.
  double kak_measure_factor = 1.0;

  int dim_k() const { return int(basis_k.size()); }
  int dim_p() const { return int(basis_p.size()); }
  int torus_rank() const { return int(torus_idx.size()); }
  int a_rank() const { return int(a_idx.size()); }
};

inline double p_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return 0.5 * (a.transpose() * b).trace();
}

inline Eigen::MatrixXd p_matrix(const ReductivePairModel& m, const Eigen::VectorXd& v) {
  if (v.size() != m.dim_p()) throw model_error("p-vector has wrong dimension");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m.n, m.n);
  for (int i = 0; i < m.dim_p(); ++i) M += v[i] * m.basis_p[i];
  return M;
}

// Coordinates of M in basis_p; rejects matrices outside the span.
inline Eigen::VectorXd p_coords(const ReductivePairModel& m, const Eigen::MatrixXd& M,
                                double tol = 1e-9) {
  Eigen::VectorXd v(m.dim_p());
  for (int i = 0; i < m.dim_p(); ++i) v[i] = p_inner(m.basis_p[i], M);
  Eigen::MatrixXd R = M - p_matrix(m, v);
  if (R.norm() > tol * std::max(1.0, M.norm()))
    throw model_error(m.name + ": matrix is not in p (residual " + std::to_string(R.norm()) + ")");
  return v;
}

// Coordinates in basis_k, orthonormal for -tr(AB)/2 on so-type blocks.
inline Eigen::VectorXd k_coords(const ReductivePairModel& m, const Eigen::MatrixXd& M,
                                double tol = 1e-9) {
  Eigen::VectorXd v(m.dim_k());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m.n, m.n);
  for (int i = 0; i < m.dim_k(); ++i) {
    v[i] = -0.5 * (m.basis_k[i] * M).trace();
    S += v[i] * m.basis_k[i];
  }
  if ((M - S).norm() > tol * std::max(1.0, M.norm()))
    throw model_error(m.name + ": matrix is not in k");
  return v;
}

inline Eigen::MatrixXd bracket(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a * b - b * a;
}

// exp_G(t v) for v in p-coordinates; scaling-and-squaring via Eigen, with a
// short cut for diagonal arguments (the shipped a-bases are diagonal).
inline Eigen::MatrixXd exp_p(const ReductivePairModel& m, const Eigen::VectorXd& v,
                             double t) {
  Eigen::MatrixXd M = t * p_matrix(m, v);
  bool diag = true;
  for (int i = 0; i < m.n && diag; ++i)
    for (int j = 0; j < m.n; ++j)
      if (i != j && M(i, j) != 0.0) { diag = false; break; }
  if (diag) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(m.n, m.n);
    for (int i = 0; i < m.n; ++i) E(i, i) = std::exp(M(i, i));
    return E;
  }
  return M.exp();
}

// Per-block determinant check for membership in G (real SL blocks).
inline bool in_group(const ReductivePairModel& m, const Eigen::MatrixXd& g,
                     double tol = 1e-10) {
  if (g.rows() != m.n || g.cols() != m.n) return false;
  if (!g.allFinite()) return false;
  int off = 0;
  for (int bs : m.block_sizes) {
    if (std::abs(g.block(off, off, bs, bs).determinant() - 1.0) > tol) return false;
    // rows of this block must vanish outside the block
    for (int i = off; i < off + bs; ++i)
      for (int j = 0; j < m.n; ++j)
        if ((j < off || j >= off + bs) && std::abs(g(i, j)) > tol) return false;
    off += bs;
  }
  return true;
}

inline Eigen::MatrixXd torus_matrix(const ReductivePairModel& m,
                                    const Eigen::VectorXd& angles) {
  if (angles.size() != m.torus_rank()) throw model_error("angle vector has wrong rank");
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(m.n, m.n);
  for (int j = 0; j < m.torus_rank(); ++j)
    K = K * (angles[j] * m.basis_k[m.torus_idx[j]]).exp().eval();
  return K;
}

// Rotation angles of a K-element, one per SL(2) block, in [0, 2pi).
inline Eigen::VectorXd angles_of(const ReductivePairModel& m, const Eigen::MatrixXd& k) {
  Eigen::VectorXd a(int(m.block_sizes.size()));
  int off = 0;
  for (size_t b = 0; b < m.block_sizes.size(); ++b) {
    double th = std::atan2(k(off + 1, off), k(off, off));
    if (th < 0) th += kTwoPi;
    a[int(b)] = th;
    off += m.block_sizes[b];
  }
  return a;
}

// Ad_k acting on p, in basis_p coordinates.
inline Eigen::VectorXd ad_action(const ReductivePairModel& m, const Eigen::MatrixXd& k,
                                 const Eigen::VectorXd& v) {
  return p_coords(m, k * p_matrix(m, v) * k.inverse());
}

inline Eigen::MatrixXd ad_matrix(const ReductivePairModel& m, const Eigen::MatrixXd& k) {
  Eigen::MatrixXd A(m.dim_p(), m.dim_p());
  Eigen::MatrixXd kinv = k.inverse();
  for (int i = 0; i < m.dim_p(); ++i)
    A.col(i) = p_coords(m, k * m.basis_p[i] * kinv);
  return A;
}

// det of (id - Ad_x) on p for a torus element given by angles; the "direct"
// route, no character formula involved.
inline double ad_det_id_minus(const ReductivePairModel& m, const Eigen::VectorXd& angles) {
  Eigen::MatrixXd A = ad_matrix(m, torus_matrix(m, angles));
  return (Eigen::MatrixXd::Identity(m.dim_p(), m.dim_p()) - A).determinant();
}

struct DeformationPoint {
  Eigen::MatrixXd k;   // element of K
  Eigen::VectorXd v;   // p-coordinates
  double t = 0.0;
};

// Splits g in G_t (t > 0) as g = k exp(t v).  Because K is orthogonal and p
// is symmetric, this is the polar decomposition; it is computed from the SVD
// g = U S V^T as k = U V^T and t v-hat = V log(S) V^T, which keeps k
// orthogonal to machine precision even when exp(t v) is badly conditioned.
// Rejects matrices not of this form.
inline DeformationPoint polar_factor(const ReductivePairModel& m,
                                     const Eigen::MatrixXd& g, double t) {
  if (!(t > 0)) throw model_error("polar_factor: need t > 0");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sig = svd.singularValues();
  if (!(sig.minCoeff() > 0)) throw model_error("polar_factor: matrix is singular");
  Eigen::VectorXd logsig = sig.array().log();
  Eigen::MatrixXd V = svd.matrixV() * logsig.asDiagonal() *
                      svd.matrixV().transpose() / t;
  Eigen::VectorXd v = p_coords(m, V);  // throws if log(g^T g)/2 is not in p
  Eigen::MatrixXd k = svd.matrixU() * svd.matrixV().transpose();
  if (!in_group(m, k, 1e-8) || (k.transpose() * k - Eigen::MatrixXd::Identity(m.n, m.n)).norm() > 1e-8)
    throw model_error("polar_factor: matrix is not in the deformed group");
  return {k, v, t};
}

// Product in G_t; the t = 0 branch is the exact semidirect law, no matrix
// exponentials involved beyond the K-factor multiplication.
inline DeformationPoint product_t(const ReductivePairModel& m,
                                  const DeformationPoint& a,
                                  const DeformationPoint& b) {
  if (a.t != b.t) throw model_error("product_t: mismatched deformation parameters");
  if (a.t == 0.0) {
    Eigen::MatrixXd k = a.k * b.k;
    Eigen::VectorXd v = ad_action(m, b.k.inverse(), a.v) + b.v;
    return {k, v, 0.0};
  }
  Eigen::MatrixXd ga = a.k * exp_p(m, a.v, a.t);
  Eigen::MatrixXd gb = b.k * exp_p(m, b.v, b.t);
  return polar_factor(m, ga * gb, a.t);
}

inline DeformationPoint inverse_t(const ReductivePairModel& m, const DeformationPoint& a) {
  if (a.t == 0.0) {
    Eigen::MatrixXd kinv = a.k.inverse();
    return {kinv, -ad_action(m, a.k, a.v), 0.0};
  }
  Eigen::MatrixXd g = a.k * exp_p(m, a.v, a.t);
  return polar_factor(m, g.inverse().eval(), a.t);
}

// ---- shipped models ----

inline ReductivePairModel sl2r_model() {
  ReductivePairModel m;
  m.name = "sl2r";
  m.n = 2;
  m.block_sizes = {2};
  Eigen::MatrixXd J(2, 2), X1(2, 2), X2(2, 2);
  J << 0, -1, 1, 0;    // so(2) generator
  X1 << 1, 0, 0, -1;   // a-direction
  X2 << 0, 1, 1, 0;
  m.basis_k = {J};
  m.basis_p = {X1, X2};
  m.torus_idx = {0};
  m.a_idx = {0};
  m.kak_measure_factor = 1.0 / M_PI;
  return m;
}

// Block-diagonal product of two models; bases embed block-wise, the KAK
// pushforward constant multiplies.
inline ReductivePairModel product_model(const ReductivePairModel& A,
                                        const ReductivePairModel& B,
                                        const std::string& name) {
  ReductivePairModel m;
  m.name = name;
  m.n = A.n + B.n;
  m.block_sizes = A.block_sizes;
  m.block_sizes.insert(m.block_sizes.end(), B.block_sizes.begin(), B.block_sizes.end());
  auto embed = [&](const Eigen::MatrixXd& M, int off) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(m.n, m.n);
    E.block(off, off, M.rows(), M.cols()) = M;
    return E;
  };
  for (const auto& K : A.basis_k) m.basis_k.push_back(embed(K, 0));
  for (const auto& K : B.basis_k) m.basis_k.push_back(embed(K, A.n));
  for (const auto& P : A.basis_p) m.basis_p.push_back(embed(P, 0));
  for (const auto& P : B.basis_p) m.basis_p.push_back(embed(P, A.n));
  for (int i : A.torus_idx) m.torus_idx.push_back(i);
  for (int i : B.torus_idx) m.torus_idx.push_back(i + A.dim_k());
  for (int i : A.a_idx) m.a_idx.push_back(i);
  for (int i : B.a_idx) m.a_idx.push_back(i + A.dim_p());
  m.kak_measure_factor = A.kak_measure_factor * B.kak_measure_factor;
  return m;
}

inline ReductivePairModel sl2r_x_sl2r_model() {
  return product_model(sl2r_model(), sl2r_model(), "sl2r_x_sl2r");
}

// Structural checks every model must satisfy: bracket relations of the Cartan
// decomposition, orthonormal p-basis, even dim p, Ad_k orthogonality, and
// no K-fixed vectors in p (averaged Ad over a torus grid has tiny norm).
inline void model_self_check(const ReductivePairModel& m) {
  if (m.dim_p() % 2 != 0) throw model_error(m.name + ": dim p must be even");
  for (int i = 0; i < m.dim_p(); ++i)
    for (int j = 0; j < m.dim_p(); ++j) {
      double g = p_inner(m.basis_p[i], m.basis_p[j]);
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-12)
        throw model_error(m.name + ": basis_p is not orthonormal");
    }
  auto in_span_k = [&](const Eigen::MatrixXd& M) { (void)k_coords(m, M, 1e-9); };
  auto in_span_p = [&](const Eigen::MatrixXd& M) { (void)p_coords(m, M, 1e-9); };
  for (const auto& a : m.basis_k)
    for (const auto& b : m.basis_k) in_span_k(bracket(a, b));
  for (const auto& a : m.basis_k)
    for (const auto& b : m.basis_p) in_span_p(bracket(a, b));
  for (const auto& a : m.basis_p)
    for (const auto& b : m.basis_p) in_span_k(bracket(a, b));

  Rule1D tr = torus_rule(16, true);
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(m.dim_p(), m.dim_p());
  std::vector<int> idx(m.torus_rank(), 0);
  for (;;) {
    Eigen::VectorXd ang(m.torus_rank());
    double w = 1.0;
    for (int d = 0; d < m.torus_rank(); ++d) {
      ang[d] = tr.nodes[idx[d]];
      w *= tr.weights[idx[d]];
    }
    avg += w * ad_matrix(m, torus_matrix(m, ang));
    int d = m.torus_rank() - 1;
    for (; d >= 0; --d) {
      if (++idx[d] < int(tr.nodes.size())) break;
      idx[d] = 0;
    }
    if (d < 0) break;
  }
  if (avg.norm() > 1e-8)
    throw model_error(m.name + ": p has K-fixed vectors (averaged Ad is nonzero)");
}

}  // namespace cartan
