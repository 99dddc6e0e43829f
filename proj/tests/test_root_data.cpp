#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <set>

#include "cartan/root_data.hpp"

using namespace cartan;
using cplx = std::complex<double>;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("datum and model agree structurally for both shipped models") {
  datum_self_check(sl2r_model(), sl2r_datum());
  datum_self_check(sl2r_x_sl2r_model(), sl2r_x_sl2r_datum());
}

TEST_CASE("positive weight count pairs off the even-dimensional symmetric part") {
  for (const auto& d : {sl2r_datum(), sl2r_x_sl2r_datum(), su2_like_datum()})
    REQUIRE(int(d.delta_p_pos.size()) * 2 == d.dim_p());
}

TEST_CASE("the Weyl group permutes the compact root system") {
  RootDatum d = su2_like_datum();
  std::set<WeightVec> roots;
  for (const auto& a : d.delta_k_pos) {
    roots.insert(a);
    roots.insert(weight_neg(a));
  }
  for (const auto& w : d.weyl) {
    std::set<WeightVec> image;
    for (const auto& a : roots) image.insert(apply_weyl(w, a));
    REQUIRE(image == roots);
  }
}

TEST_CASE("the half sum of compact roots matches the stored value") {
  for (const auto& d : {sl2r_datum(), sl2r_x_sl2r_datum(), su2_like_datum()}) {
    WeightVec sum(d.rank, 0);
    for (const auto& a : d.delta_k_pos) sum = weight_add(sum, a);
    for (int i = 0; i < d.rank; ++i) {
      REQUIRE(sum[i] % 2 == 0);
      REQUIRE(sum[i] / 2 == d.rho_k[i]);
    }
  }
}

TEST_CASE("abelian torus characters are plain exponentials") {
  // weight m on one circle evaluates to e^{i m theta}
  RootDatum d = sl2r_datum();
  WeightVec m{4};  // weight 2
  FormalCharacter chi = weyl_character(d, m);
  double th = 1.234;
  REQUIRE(std::abs(chi.evaluate({th}) - std::polar(1.0, 2.0 * th)) < 1e-14);

  // two circles: weight (m1, m2) evaluates to e^{i(m1 th1 + m2 th2)}
  RootDatum d2 = sl2r_x_sl2r_datum();
  FormalCharacter chi2 = weyl_character(d2, {2, 6});
  REQUIRE(std::abs(chi2.evaluate({0.3, 0.5}) - std::polar(1.0, 0.3 + 3 * 0.5)) < 1e-14);
}

TEST_CASE("a reducible rotation character matches the matrix trace") {
  // weights {+1, -1} sum to the trace of the rotation by theta
  auto chi = FormalCharacter::monomial(1, {2}) + FormalCharacter::monomial(1, {-2});
  for (double th : {0.2, 1.0, 2.5}) {
    double trace = 2.0 * std::cos(th);
    REQUIRE(std::abs(chi.evaluate({th}) - cplx(trace, 0.0)) < 1e-14);
  }
}

TEST_CASE("the rank-one Weyl character formula reproduces the classical ratio") {
  RootDatum d = su2_like_datum();
  for (int n : {0, 1, 2, 3, 5}) {
    FormalCharacter chi = weyl_character(d, {2 * n});
    REQUIRE(int(chi.terms.size()) == n + 1);
    for (double th : {0.4, 1.3, 2.2}) {
      cplx want(std::sin((n + 1) * th) / std::sin(th), 0.0);
      REQUIRE(std::abs(chi.evaluate({th}) - want) < 1e-12);
      // direct sum of exponentials of the weight string n, n-2, ..., -n
      cplx direct = 0.0;
      for (int j = 0; j <= n; ++j) direct += std::polar(1.0, double(n - 2 * j) * th);
      REQUIRE(std::abs(chi.evaluate({th}) - direct) < 1e-12);
    }
  }
  REQUIRE_THROWS(weyl_character(d, {-2}));
}

TEST_CASE("the spinor character difference is the product over symmetric weights") {
  RootDatum d = sl2r_datum();
  FormalCharacter s = spinor_character_difference(d);
  for (double th : {0.5, 1.1, 2.7}) {
    cplx want(0.0, 2.0 * std::sin(th));
    REQUIRE(std::abs(s.evaluate({th}) - want) < 1e-14);
  }
  // identity is singular for the difference
  REQUIRE(std::abs(s.evaluate({0.0})) < 1e-15);

  // product model: the difference factors
  RootDatum d2 = sl2r_x_sl2r_datum();
  FormalCharacter s2 = spinor_character_difference(d2);
  double a = 0.7, b = 1.9;
  cplx want = cplx(0.0, 2.0 * std::sin(a)) * cplx(0.0, 2.0 * std::sin(b));
  REQUIRE(std::abs(s2.evaluate({a, b}) - want) < 1e-13);
}

TEST_CASE("both determinant routes give the known rank-one values") {
  ReductivePairModel m = sl2r_model();
  RootDatum d = sl2r_datum();

  DetPair p3 = det_p_id_minus(m, d, torus_element({kPi / 3.0}));
  REQUIRE(std::abs(p3.direct - 3.0) < 1e-12);
  REQUIRE(std::abs(p3.character - 3.0) < 1e-12);

  DetPair p2 = det_p_id_minus(m, d, torus_element({kPi / 2.0}));
  REQUIRE(std::abs(p2.direct - 4.0) < 1e-12);
  REQUIRE(std::abs(p2.character - 4.0) < 1e-12);

  DetPair pe = det_p_id_minus(m, d, torus_element({0.0}));
  REQUIRE(std::abs(pe.direct) < 1e-12);
  REQUIRE(std::abs(pe.character) < 1e-12);
}

TEST_CASE("regularity reflects the determinant magnitude") {
  ReductivePairModel m = sl2r_model();
  REQUIRE_FALSE(is_regular(m, torus_element({0.0})));
  REQUIRE(is_regular(m, torus_element({kPi / 2.0})));
  REQUIRE_FALSE(is_regular(m, torus_element({1e-12})));
}

TEST_CASE("the character value at the right angle is minus one half i") {
  RootDatum d = sl2r_datum();
  cplx v = discrete_series_character_value(d, {4}, torus_element({kPi / 2.0}));
  REQUIRE(std::abs(v - cplx(0.0, -0.5)) < 1e-14);
  REQUIRE_THROWS(discrete_series_character_value(d, {4}, torus_element({0.0})));
}

TEST_CASE("character values on the product model factor") {
  RootDatum d = sl2r_datum();
  RootDatum d2 = sl2r_x_sl2r_datum();
  double a = kPi / 2.0, b = kPi / 3.0;
  cplx va = discrete_series_character_value(d, {4}, torus_element({a}));
  cplx vb = discrete_series_character_value(d, {6}, torus_element({b}));
  cplx v = discrete_series_character_value(d2, {4, 6}, torus_element({a, b}));
  REQUIRE(std::abs(v - va * vb) < 1e-13);
}

TEST_CASE("torus elements reduce their angles") {
  TorusElement x = torus_element({kTwoPi + 0.25, -0.25});
  REQUIRE(std::abs(x.angles[0] - 0.25) < 1e-12);
  REQUIRE(std::abs(x.angles[1] - (kTwoPi - 0.25)) < 1e-12);
}
