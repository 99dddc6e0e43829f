#pragma once
// Root data and character formulas over a fixed maximal torus.
//
// A RootDatum records positive roots of the compact factor, of p, their union
// for the full pair, rho of the compact factor, the Weyl group as lattice
// automorphisms with signs, and the restricted roots of the a-action with
// multiplicities.  Everything is lattice-exact (half-unit weight vectors);
// numbers appear only when a character is evaluated at a torus element.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cartan/laurent.hpp"
#include "cartan/model.hpp"

namespace cartan {

struct TorusElement {
  Eigen::VectorXd angles;  // reduced to [0, 2pi) on construction
};

inline TorusElement torus_element(const Eigen::VectorXd& angles) {
  Eigen::VectorXd a = angles;
  for (int i = 0; i < a.size(); ++i) {
    a[i] = std::fmod(a[i], kTwoPi);
    if (a[i] < 0) a[i] += kTwoPi;
  }
  return {a};
}

inline TorusElement torus_element(std::initializer_list<double> angles) {
  Eigen::VectorXd a(static_cast<int>(angles.size()));
  int i = 0;
  for (double x : angles) a[i++] = x;
  return torus_element(a);
}

inline std::vector<double> angle_list(const TorusElement& x) {
  return std::vector<double>(x.angles.data(), x.angles.data() + x.angles.size());
}

struct WeylElement {
  Eigen::MatrixXi action;  // lattice automorphism on half-unit weight vectors
  int sign = 1;            // determinant sign (-1)^{l(w)}
};

struct RootDatum {
  int rank = 0;
  std::vector<WeightVec> delta_k_pos;  // positive roots of (k, t), half-units
  std::vector<WeightVec> delta_p_pos;  // positive weights of (p, t), half-units
  WeightVec rho_k;                     // half the sum of delta_k_pos, half-units
  std::vector<WeylElement> weyl;       // contains the identity
  // restricted roots alpha of the a-action: alpha(v) = dot(coeffs, v) on
  // a-coordinates, with multiplicity n_alpha; only roots entering the
  // KAK density, i.e. the positive ones.
  std::vector<std::pair<Eigen::VectorXd, int>> restricted_roots;

  std::vector<WeightVec> delta_g_pos() const {
    std::vector<WeightVec> all = delta_k_pos;
    all.insert(all.end(), delta_p_pos.begin(), delta_p_pos.end());
    return all;
  }
  // dim p = 2 |Delta+(p,t)| for the equal-rank pairs handled here.
  int dim_p() const { return 2 * int(delta_p_pos.size()); }
  int sign_dim_p_half() const { return (int(delta_p_pos.size()) % 2 == 0) ? 1 : -1; }
};

inline WeightVec apply_weyl(const WeylElement& w, const WeightVec& lam) {
  WeightVec r(lam.size(), 0);
  for (size_t i = 0; i < lam.size(); ++i)
    for (size_t j = 0; j < lam.size(); ++j)
      r[i] += w.action(int(i), int(j)) * lam[j];
  return r;
}

// Alternating Weyl sum:  sum_w sign(w) e^{w lam}.
inline FormalCharacter weyl_alternating_sum(const RootDatum& d, const WeightVec& lam) {
  FormalCharacter s = FormalCharacter::zero(d.rank);
  for (const auto& w : d.weyl) s.add_term(apply_weyl(w, lam), w.sign);
  return s;
}

// prod over roots of (e^{alpha/2} - e^{-alpha/2}); roots given in half-units
// must have even entries only when halved again, which holds since alpha/2
// in half-units is just the entry-wise half of the stored root.
inline FormalCharacter half_sum_product(int rank, const std::vector<WeightVec>& roots) {
  FormalCharacter prod = FormalCharacter::one(rank);
  for (const auto& a : roots) {
    WeightVec h(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] % 2 != 0) throw std::invalid_argument("root with non-integral half");
      h[i] = a[i] / 2;
    }
    FormalCharacter f = FormalCharacter::monomial(rank, h) -
                        FormalCharacter::monomial(rank, weight_neg(h));
    prod = prod * f;
  }
  return prod;
}

inline FormalCharacter spinor_character_difference(const RootDatum& d) {
  return half_sum_product(d.rank, d.delta_p_pos);
}

inline bool is_dominant(const RootDatum& d, const WeightVec& lam) {
  for (const auto& a : d.delta_k_pos) {
    long s = 0;
    for (size_t i = 0; i < lam.size(); ++i) s += long(lam[i]) * a[i];
    if (s < 0) return false;
  }
  return true;
}

// Weyl character formula for the compact factor, as an exact Laurent
// quotient: [sum_w sign(w) e^{w(lam+rho)}] / prod(e^{alpha/2} - e^{-alpha/2}).
inline FormalCharacter weyl_character(const RootDatum& d, const WeightVec& lam) {
  if (int(lam.size()) != d.rank) throw std::invalid_argument("weight rank mismatch");
  if (!is_dominant(d, lam))
    throw std::invalid_argument("weyl_character: weight is not dominant");
  FormalCharacter num = weyl_alternating_sum(d, weight_add(lam, d.rho_k));
  FormalCharacter den = half_sum_product(d.rank, d.delta_k_pos);
  return divide_exact(num, den);
}

struct DetPair {
  double direct;     // det(id - Ad_x) on p, computed from the model
  double character;  // (-1)^{dim p/2} (chi_{S+} - chi_{S-})^2 (x)
};

inline DetPair det_p_id_minus(const ReductivePairModel& m, const RootDatum& d,
                              const TorusElement& x) {
  DetPair r;
  r.direct = ad_det_id_minus(m, x.angles);
  std::complex<double> s = spinor_character_difference(d).evaluate(angle_list(x));
  std::complex<double> val = double(d.sign_dim_p_half()) * s * s;
  if (std::abs(val.imag()) > 1e-9 * std::max(1.0, std::abs(val)))
    throw std::runtime_error("det_p_id_minus: character route is not real");
  r.character = val.real();
  return r;
}

inline bool is_regular(const ReductivePairModel& m, const TorusElement& x,
                       double eps = 1e-8) {
  return std::abs(ad_det_id_minus(m, x.angles)) > eps;
}

// Value at regular x of the t-independent pairing character:
//   (-1)^{dim p/2} sum_w sign(w) e^{w(mu+rho_K)}(x) / prod_{Delta+(g,t)}(e^{a/2}-e^{-a/2})(x).
// Numerator and denominator are exact characters; only the final quotient is
// numeric (the quotient itself is not a Laurent polynomial).
inline std::complex<double> discrete_series_character_value(const RootDatum& d,
                                                            const WeightVec& mu,
                                                            const TorusElement& x) {
  FormalCharacter num = weyl_alternating_sum(d, weight_add(mu, d.rho_k));
  FormalCharacter den = half_sum_product(d.rank, d.delta_g_pos());
  std::vector<double> ang = angle_list(x);
  std::complex<double> dv = den.evaluate(ang);
  if (std::abs(dv) < 1e-12)
    throw std::runtime_error("discrete_series_character_value: x is singular");
  return double(d.sign_dim_p_half()) * num.evaluate(ang) / dv;
}

// ---- data for the shipped models ----

inline RootDatum sl2r_datum() {
  RootDatum d;
  d.rank = 1;
  d.delta_k_pos = {};             // so(2) is abelian
  d.delta_p_pos = {{4}};          // weight 2 on p
  d.rho_k = {0};
  WeylElement id;
  id.action = Eigen::MatrixXi::Identity(1, 1);
  id.sign = 1;
  d.weyl = {id};
  Eigen::VectorXd a1(1);
  a1 << 2.0;                      // alpha(v) = 2 v, multiplicity 1
  d.restricted_roots = {{a1, 1}};
  return d;
}

inline RootDatum product_datum(const RootDatum& A, const RootDatum& B) {
  RootDatum d;
  d.rank = A.rank + B.rank;
  auto pad_a = [&](const WeightVec& w) {
    WeightVec r = w;
    r.resize(d.rank, 0);
    return r;
  };
  auto pad_b = [&](const WeightVec& w) {
    WeightVec r(A.rank, 0);
    r.insert(r.end(), w.begin(), w.end());
    return r;
  };
  for (const auto& w : A.delta_k_pos) d.delta_k_pos.push_back(pad_a(w));
  for (const auto& w : B.delta_k_pos) d.delta_k_pos.push_back(pad_b(w));
  for (const auto& w : A.delta_p_pos) d.delta_p_pos.push_back(pad_a(w));
  for (const auto& w : B.delta_p_pos) d.delta_p_pos.push_back(pad_b(w));
  d.rho_k = weight_add(pad_a(A.rho_k), pad_b(B.rho_k));
  for (const auto& wa : A.weyl)
    for (const auto& wb : B.weyl) {
      WeylElement w;
      w.action = Eigen::MatrixXi::Zero(d.rank, d.rank);
      w.action.topLeftCorner(A.rank, A.rank) = wa.action;
      w.action.bottomRightCorner(B.rank, B.rank) = wb.action;
      w.sign = wa.sign * wb.sign;
      d.weyl.push_back(w);
    }
  int ra = 0, rb = 0;
  for (const auto& [c, n] : A.restricted_roots) ra = std::max<int>(ra, int(c.size()));
  for (const auto& [c, n] : B.restricted_roots) rb = std::max<int>(rb, int(c.size()));
  for (const auto& [c, n] : A.restricted_roots) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ra + rb);
    e.head(c.size()) = c;
    d.restricted_roots.push_back({e, n});
  }
  for (const auto& [c, n] : B.restricted_roots) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ra + rb);
    e.tail(c.size()) = c;
    d.restricted_roots.push_back({e, n});
  }
  return d;
}

inline RootDatum sl2r_x_sl2r_datum() { return product_datum(sl2r_datum(), sl2r_datum()); }

// Rank-1 datum with a nontrivial Weyl group, used by tests to exercise the
// alternating sum, exact division and half-integral spinor weights; it is a
// root datum only, not backed by a shipped matrix model.
inline RootDatum su2_like_datum() {
  RootDatum d;
  d.rank = 1;
  d.delta_k_pos = {{4}};      // compact root 2
  d.delta_p_pos = {{2}, {2}}; // two copies of weight 1 -> spinor halves are 1/2
  d.rho_k = {2};              // rho = 1
  WeylElement id, s;
  id.action = Eigen::MatrixXi::Identity(1, 1);
  id.sign = 1;
  s.action = -Eigen::MatrixXi::Identity(1, 1);
  s.sign = -1;
  d.weyl = {id, s};
  return d;
}

// Consistency checks tying a datum to its model: dim p matches, the density
// exponents sum to dim p - dim a, and the two determinant routes agree on a
// sample of regular elements.
inline void datum_self_check(const ReductivePairModel& m, const RootDatum& d) {
  if (d.rank != m.torus_rank()) throw std::runtime_error("datum/model torus rank mismatch");
  if (d.dim_p() != m.dim_p()) throw std::runtime_error("datum/model dim p mismatch");
  int s = 0;
  for (const auto& [c, n] : d.restricted_roots) {
    if (int(c.size()) != m.a_rank()) throw std::runtime_error("restricted root has wrong rank");
    s += n;
  }
  if (s != m.dim_p() - m.a_rank())
    throw std::runtime_error("restricted multiplicities do not sum to dim p - dim a");
  for (int i = 1; i <= 5; ++i) {
    Eigen::VectorXd ang = Eigen::VectorXd::Constant(m.torus_rank(), 0.37 * i);
    TorusElement x = torus_element(ang);
    DetPair p = det_p_id_minus(m, d, x);
    if (std::abs(p.direct - p.character) > 1e-10 * std::max(1.0, std::abs(p.direct)))
      throw std::runtime_error("determinant routes disagree on datum check");
  }
}

struct ModelBundle {
  ReductivePairModel model;
  RootDatum datum;
};

inline ModelBundle get_bundle(const std::string& id) {
  if (id == "sl2r") return {sl2r_model(), sl2r_datum()};
  if (id == "sl2r_x_sl2r") return {sl2r_x_sl2r_model(), sl2r_x_sl2r_datum()};
  throw std::invalid_argument("unknown model id: " + id +
                              " (available: sl2r, sl2r_x_sl2r)");
}

}  // namespace cartan
