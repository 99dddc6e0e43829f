#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "cartan/motion_group.hpp"
#include "cartan/root_data.hpp"

using namespace cartan;
using cplx = std::complex<double>;

namespace {
constexpr double kPi = 3.14159265358979323846;

MotionElement me(std::initializer_list<double> ka, std::initializer_list<double> v) {
  Eigen::VectorXd a(int(ka.size())), b(int(v.size()));
  int i = 0;
  for (double x : ka) a[i++] = x;
  i = 0;
  for (double x : v) b[i++] = x;
  return {a, b};
}

SmoothTestFunction zero_function() {
  SmoothTestFunction f;
  f.eval = [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
    return cplx(0.0, 0.0);
  };
  f.decay = DecayClass::Gaussian;
  f.support_radius = 1.0;
  return f;
}

}  // namespace

TEST_CASE("the motion product satisfies the semidirect law and inverses cancel") {
  ReductivePairModel m = sl2r_model();
  MotionElement a = me({0.7}, {1.0, -0.5});
  MotionElement b = me({1.9}, {0.2, 0.4});
  MotionElement ab = motion_product(m, a, b);
  REQUIRE(std::abs(ab.k_angles[0] - 2.6) < 1e-14);
  // v-part: rotate a.v by the inverse of b's rotation, then add b.v
  Eigen::MatrixXd kb_inv = torus_matrix(m, Eigen::VectorXd::Constant(1, -1.9));
  Eigen::VectorXd want = ad_action(m, kb_inv, a.v) + b.v;
  REQUIRE((ab.v - want).norm() < 1e-14);

  MotionElement e = motion_product(m, a, motion_inverse(m, a));
  REQUIRE(e.k_angles.norm() < 1e-14);
  REQUIRE(e.v.norm() < 1e-12);

  MotionElement ev = motion_product(m, me({0.0}, {1.0, 2.0}), me({0.0}, {-1.0, -2.0}));
  REQUIRE(ev.v.norm() < 1e-15);
}

TEST_CASE("conjugating the base point leaves it unchanged") {
  ReductivePairModel m = sl2r_model();
  TorusElement x = torus_element({1.1});
  MotionElement c = motion_conjugate(m, x, me({0.0}, {0.0, 0.0}));
  REQUIRE(std::abs(c.k_angles[0] - 1.1) < 1e-14);
  REQUIRE(c.v.norm() < 1e-14);
}

TEST_CASE("conjugation matches the brute-force two-step product") {
  for (const auto& m : {sl2r_model(), sl2r_x_sl2r_model()}) {
    TorusElement x = torus_element(Eigen::VectorXd::Constant(m.torus_rank(), 0.9));
    Eigen::VectorXd ka = Eigen::VectorXd::Constant(m.torus_rank(), 2.3);
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(m.dim_p(), 0.5, 1.7);
    MotionElement g{ka, v};
    MotionElement fast = motion_conjugate(m, x, g);
    MotionElement x0{x.angles, Eigen::VectorXd::Zero(m.dim_p())};
    MotionElement slow =
        motion_product(m, motion_product(m, g, x0), motion_inverse(m, g));
    REQUIRE((fast.k_angles - slow.k_angles).norm() < 1e-12);
    REQUIRE((fast.v - slow.v).norm() < 1e-12);
    // the rotation part of the conjugate is the base point itself
    REQUIRE((fast.k_angles - x.angles).norm() < 1e-14);
  }
}

TEST_CASE("orbital integrals of gaussians have the rank-one closed form") {
  ReductivePairModel m = sl2r_model();
  MotionQuadSpec spec;
  spec.k_points = 32;
  spec.p_points = 40;
  spec.p_radius = 8.0;
  // f(k_phi, v) = e^{i phi} e^{-|v|^2}: the gaussian integrates to pi and the
  // angular factor evaluates at the base point
  SmoothTestFunction f = modulated(gaussian_function(1.0), {1});
  for (double th : {kPi / 3.0, kPi / 2.0, 2.0}) {
    cplx got = orbital_integral_motion(m, f, torus_element({th}), spec);
    cplx want = std::polar(1.0, th) * kPi / (4.0 * std::sin(th) * std::sin(th));
    REQUIRE(std::abs(got - want) < 1e-9 * std::abs(want));
  }
  REQUIRE(std::abs(orbital_integral_motion(m, zero_function(), torus_element({1.0}), spec)) == 0.0);
  REQUIRE_THROWS(orbital_integral_motion(m, f, torus_element({0.0}), spec));
}

TEST_CASE("both orbital routes agree without any determinant correction") {
  ReductivePairModel m = sl2r_model();
  MotionQuadSpec spec;
  spec.k_points = 16;
  spec.p_points = 96;
  spec.p_radius = 8.0;
  TorusElement x = torus_element({1.2});
  // compactly supported entry with the support edge damped below quadrature
  // noise, so the cartesian grid converges
  SmoothTestFunction db;
  db.support_radius = 6.0;
  db.decay = DecayClass::CompactBump;
  db.eval = [b = bump_function(6.0), g = gaussian_function(0.7)](
                const Eigen::VectorXd& k, const Eigen::VectorXd& v, double t) {
    return b.eval(k, v, t) * g.eval(k, v, t);
  };
  for (const SmoothTestFunction& f :
       {gaussian_function(1.0), modulated(gaussian_function(0.7), {2}), db}) {
    cplx a = orbital_integral_motion(m, f, x, spec);
    cplx b = orbital_integral_motion_orbit(m, f, x, spec);
    REQUIRE(std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(a)));
  }
  REQUIRE(std::abs(orbital_integral_motion_orbit(m, zero_function(), x, spec)) == 0.0);
}

// A bump with its edge inside the grid needs the polar chart: the radial rule
// concentrates the edge error in one dimension and converges far faster than
// the tensor grid.
TEST_CASE("true bump functions pass the route identity on converged polar grids") {
  ReductivePairModel m = sl2r_model();
  MotionQuadSpec spec;
  spec.k_points = 8;
  spec.p_points = 384;
  spec.p_radius = 8.0;
  spec.polar_p = true;
  spec.angle_points = 64;
  TorusElement x = torus_element({1.2});
  for (const SmoothTestFunction& f : {bump_function(3.0), bump_function(5.0)}) {
    cplx a = orbital_integral_motion(m, f, x, spec);
    cplx b = orbital_integral_motion_orbit(m, f, x, spec);
    REQUIRE(std::abs(a - b) < 1e-9 * std::abs(b));
  }
}

TEST_CASE("for rotation-independent functions the integral is a plain gaussian moment") {
  ReductivePairModel m = sl2r_model();
  MotionQuadSpec spec;
  spec.k_points = 16;
  spec.p_points = 40;
  spec.p_radius = 8.0;
  TorusElement x = torus_element({0.8});
  SmoothTestFunction f = gaussian_function(1.0);
  cplx a = orbital_integral_motion(m, f, x, spec);
  double det = ad_det_id_minus(m, x.angles);
  REQUIRE(std::abs(a - cplx(kPi / det, 0.0)) < 1e-9);
}

TEST_CASE("orbital integrals are invariant under conjugating the test function") {
  ReductivePairModel m = sl2r_model();
  MotionQuadSpec spec;
  spec.k_points = 32;
  spec.p_points = 40;
  spec.p_radius = 8.0;
  TorusElement x = torus_element({1.9});
  SmoothTestFunction f = modulated(gaussian_function(1.0), {1});
  MotionElement k0 = me({0.63}, {0.0, 0.0});
  SmoothTestFunction fc;
  fc.eval = [m, f, k0](const Eigen::VectorXd& k, const Eigen::VectorXd& v,
                       double t) -> cplx {
    MotionElement g{k, v};
    MotionElement h = motion_product(m, motion_product(m, k0, g),
                                     motion_inverse(m, k0));
    return f.eval(h.k_angles, h.v, t);
  };
  fc.decay = f.decay;
  fc.support_radius = f.support_radius;
  cplx a = orbital_integral_motion(m, f, x, spec);
  cplx b = orbital_integral_motion(m, fc, x, spec);
  REQUIRE(std::abs(a - b) < 1e-8 * std::max(1.0, std::abs(a)));
}

TEST_CASE("transforms of modulated gaussians occupy a single kernel mode") {
  ReductivePairModel m = sl2r_model();
  FourierQuadSpec spec;
  spec.k_points = 16;
  spec.p_points = 64;
  spec.p_radius = 8.0;
  Eigen::VectorXd z(2);
  z << 0.6, -0.3;
  const double wantmag = kPi * std::exp(-z.squaredNorm() / 4.0);

  for (int m0 : {0, 1}) {
    SmoothTestFunction f = modulated(gaussian_function(1.0), {m0});
    FourierKernel K = fourier_transform(m, f, z, 3, spec);
    REQUIRE(K.modes.rows() == 7);
    int hits = 0;
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b)
        if (std::abs(K.modes(a, b)) > 1e-8) {
          ++hits;
          REQUIRE(a == m0 + 3);  // modes run -3..3, flattened with offset 3
          REQUIRE(b == m0 + 3);
          REQUIRE(std::abs(K.modes(a, b) - cplx(wantmag, 0.0)) < 1e-8);
        }
    REQUIRE(hits == 1);
  }
}

TEST_CASE("the zero function transforms to the zero kernel") {
  ReductivePairModel m = sl2r_model();
  FourierQuadSpec spec;
  spec.k_points = 10;
  spec.p_points = 16;
  spec.p_radius = 6.0;
  FourierKernel K = fourier_transform(m, zero_function(), Eigen::VectorXd::Zero(2), 2, spec);
  REQUIRE(K.modes.norm() == 0.0);
}

TEST_CASE("an undersized mode cutoff is rejected rather than silently truncated") {
  ReductivePairModel m = sl2r_model();
  FourierQuadSpec spec;
  spec.k_points = 12;
  spec.p_points = 24;
  spec.p_radius = 7.0;
  SmoothTestFunction f = modulated(gaussian_function(1.0), {2});
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  // the single occupied mode sits exactly on the boundary of cutoff 2
  REQUIRE_THROWS(fourier_transform(m, f, z, 2, spec));
  // k grid must out-resolve the requested cutoff
  FourierQuadSpec tiny = spec;
  tiny.k_points = 6;
  REQUIRE_THROWS(fourier_transform(m, f, z, 3, tiny));
}

TEST_CASE("kernel composition is the matrix product and the norm is spectral") {
  FourierKernel a{1, 1, Eigen::MatrixXcd::Zero(3, 3)};
  FourierKernel b{1, 1, Eigen::MatrixXcd::Zero(3, 3)};
  a.modes(0, 1) = cplx(2.0, 0.0);
  b.modes(1, 2) = cplx(0.0, 3.0);
  FourierKernel ab = kernel_compose(a, b);
  REQUIRE(std::abs(ab.modes(0, 2) - cplx(0.0, 6.0)) < 1e-15);
  REQUIRE(std::abs(ab.modes.norm() - 6.0) < 1e-15);

  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = cplx(3.0, 0.0);
  d(1, 1) = cplx(0.0, 4.0);
  REQUIRE(std::abs(kernel_op_norm(d) - 4.0) < 1e-14);

  FourierKernel c{1, 2, Eigen::MatrixXcd::Zero(5, 5)};
  REQUIRE_THROWS(kernel_compose(a, c));
}

TEST_CASE("momentum averages of the gaussian profile have the closed form") {
  ReductivePairModel m = sl2r_model();
  OperatorProfile p;
  p.g = [](const Eigen::VectorXd& z) { return cplx(std::exp(-z.squaredNorm()), 0.0); };
  p.block_weights = {WeightVec{0}};
  p.label = "test";
  InverseFourierSpec spec{16, 96, 6.5};

  for (double r : {0.0, 1.0, 2.5}) {
    Eigen::VectorXd v(2);
    v << r, 0.0;
    cplx got = profile_momentum_average(m, p, v, spec);
    double want = std::exp(-r * r / 4.0) / (4.0 * kPi);
    REQUIRE(std::abs(got - cplx(want, 0.0)) < 1e-10);
  }
}

TEST_CASE("momentum averages match an independent radial reduction") {
  // reduce the plane integral to a radial one against the cylinder average
  // J(x) = (2 pi)^{-1} int_0^{2pi} cos(x sin(phi)) d phi, evaluated from its
  // integral definition on a separate grid
  ReductivePairModel m = sl2r_model();
  OperatorProfile p;
  p.g = [](const Eigen::VectorXd& z) { return cplx(std::exp(-z.squaredNorm()), 0.0); };
  p.block_weights = {WeightVec{0}};
  p.label = "test";
  InverseFourierSpec spec{16, 96, 6.5};

  Rule1D phi = torus_rule(256, true);
  Rule1D rad = radial_rule(192, 6.5);
  auto bessel0 = [&](double x) {
    double s = 0.0;
    for (size_t j = 0; j < phi.nodes.size(); ++j)
      s += phi.weights[j] * std::cos(x * std::sin(phi.nodes[j]));
    return s;
  };
  for (double vn : {0.7, 1.9}) {
    double radial = 0.0;
    for (size_t j = 0; j < rad.nodes.size(); ++j) {
      double r = rad.nodes[j];
      radial += rad.weights[j] * std::exp(-r * r) * bessel0(r * vn) * r;
    }
    double want = radial / (2.0 * kPi);
    Eigen::VectorXd v(2);
    v << 0.0, vn;
    cplx got = profile_momentum_average(m, p, v, spec);
    REQUIRE(std::abs(got - cplx(want, 0.0)) < 1e-10);
  }
}

TEST_CASE("inverse transforms factor into character times momentum average") {
  ReductivePairModel m = sl2r_model();
  OperatorProfile p;
  p.g = [](const Eigen::VectorXd& z) { return cplx(std::exp(-z.squaredNorm()), 0.0); };
  p.block_weights = {WeightVec{4}};
  p.label = "test";
  InverseFourierSpec spec{8, 48, 6.0};
  Eigen::VectorXd k(1), v(2);
  k << 0.9;
  v << 0.3, 0.4;
  cplx whole = inverse_fourier_of_profile(m, p, k, v, spec);
  cplx parts = block_character_value(p, k) * profile_momentum_average(m, p, v, spec);
  REQUIRE(std::abs(whole - parts) < 1e-15);
  REQUIRE(std::abs(block_character_value(p, k) - std::polar(1.0, 2.0 * 0.9)) < 1e-14);
}

TEST_CASE("profiles that depend on the direction of momentum are rejected") {
  ReductivePairModel m = sl2r_model();
  OperatorProfile bad;
  bad.g = [](const Eigen::VectorXd& z) {
    return cplx(std::exp(-z[0] * z[0] - 2.0 * z[1] * z[1]), 0.0);
  };
  bad.block_weights = {WeightVec{0}};
  bad.label = "aniso";
  REQUIRE_THROWS(profile_self_check(m, bad));

  OperatorProfile good;
  good.g = [](const Eigen::VectorXd& z) { return cplx(std::exp(-z.squaredNorm()), 0.0); };
  good.block_weights = {WeightVec{0}};
  good.label = "radial";
  profile_self_check(m, good);
}

TEST_CASE("the closed form for profile orbital integrals evaluates the known point") {
  RootDatum d = sl2r_datum();
  OperatorProfile p;
  p.g = [](const Eigen::VectorXd& z) { return cplx(std::exp(-z.squaredNorm()), 0.0); };
  p.block_weights = {WeightVec{4}};
  p.label = "E";
  cplx v = prop_tau_closed_form(d, p, torus_element({kPi / 2.0}));
  REQUIRE(std::abs(v - cplx(-0.25, 0.0)) < 1e-14);

  OperatorProfile podd = p;
  podd.g = [](const Eigen::VectorXd& z) {
    return cplx(z[0] * std::exp(-z.squaredNorm()), 0.0);
  };
  cplx vz = prop_tau_closed_form(d, podd, torus_element({kPi / 2.0}));
  REQUIRE(std::abs(vz) == 0.0);

  REQUIRE_THROWS(prop_tau_closed_form(d, p, torus_element({0.0})));
}

TEST_CASE("convolution order does not change orbital integrals") {
  ReductivePairModel m = sl2r_model();
  ConvolutionSpec cs;
  cs.k_points = 12;
  cs.v_points = 16;
  cs.v_radius = 6.5;
  MotionQuadSpec spec;
  spec.k_points = 12;
  spec.p_points = 16;
  spec.p_radius = 6.5;
  SmoothTestFunction f = modulated(gaussian_function(1.0), {1});
  SmoothTestFunction g = modulated(gaussian_function(2.0), {-1});
  SmoothTestFunction fg = memoize_function(convolution(m, f, g, cs));
  SmoothTestFunction gf = memoize_function(convolution(m, g, f, cs));
  TorusElement x = torus_element({kPi / 2.0});
  cplx a = orbital_integral_motion(m, fg, x, spec);
  cplx b = orbital_integral_motion(m, gf, x, spec);
  REQUIRE(std::abs(a - b) < 1e-2 * std::max(1.0, std::abs(a)));
}

TEST_CASE("memoization never changes values") {
  SmoothTestFunction f = modulated(gaussian_function(1.3), {2});
  SmoothTestFunction mf = memoize_function(f);
  Eigen::VectorXd k(1), v(2);
  k << 1.7;
  v << 0.2, -1.1;
  cplx direct = f.eval(k, v, 0.0);
  REQUIRE(mf.eval(k, v, 0.0) == direct);
  REQUIRE(mf.eval(k, v, 0.0) == direct);
}
