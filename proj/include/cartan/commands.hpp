#pragma once
// Subcommand implementations.  Each writes its report to the stream and
// returns the process exit code: 0 pass, 1 verification failure.  Usage and
// precondition problems throw config_error, which the entry point maps to
// exit 2.  All output is deterministic for a fixed config in single-threaded
// mode: fixed field order, 17-digit floats, seeded sampling.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cartan/config.hpp"
#include "cartan/deformation.hpp"
#include "cartan/model.hpp"
#include "cartan/motion_group.hpp"
#include "cartan/pairing.hpp"
#include "cartan/quadrature.hpp"
#include "cartan/report_io.hpp"
#include "cartan/root_data.hpp"

namespace cartan {

inline const char* kToolVersion = "cartan 1.0.0";

namespace detail {

// Deterministic angle battery: raw mt19937 draws mapped to [0, 2pi), so the
// sequence is identical on every platform.
inline std::vector<Eigen::VectorXd> sampled_angle_battery(int count, int rank,
                                                          unsigned seed) {
  std::mt19937 gen(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd a(rank);
    for (int j = 0; j < rank; ++j)
      a[j] = kTwoPi * (double(gen()) / 4294967296.0);
    out.push_back(a);
  }
  return out;
}

// x_angles from config, grouped into rank-tuples; falls back to the given
// battery of per-circle angles replicated across circles.
inline std::vector<TorusElement> resolve_x_list(const RunConfig& cfg, int rank,
                                                const std::vector<double>& fallback) {
  std::vector<TorusElement> out;
  if (cfg.x_angles.empty()) {
    for (double th : fallback)
      out.push_back(torus_element(Eigen::VectorXd::Constant(rank, th)));
    return out;
  }
  if (cfg.x_angles.size() % size_t(rank) != 0)
    throw config_error("x_angles length must be a multiple of the torus rank");
  for (size_t i = 0; i < cfg.x_angles.size(); i += rank) {
    Eigen::VectorXd a(rank);
    for (int j = 0; j < rank; ++j) a[j] = cfg.x_angles[i + j];
    out.push_back(torus_element(a));
  }
  return out;
}

inline std::vector<int> resolve_mu(const RunConfig& cfg, int rank) {
  if (int(cfg.mu.size()) != rank)
    throw config_error("mu must have one entry per torus circle");
  return cfg.mu;
}

inline const std::vector<double>& default_theta_battery() {
  static const std::vector<double> b = {kTwoPi / 10.0, kTwoPi / 6.0, kTwoPi / 4.0,
                                        kTwoPi / 3.0};
  return b;
}

inline std::string cell_angles(const TorusElement& x) {
  std::string s;
  for (int i = 0; i < x.angles.size(); ++i) {
    if (i) s += ',';
    s += fmt17(x.angles[i]);
  }
  return s;
}

}  // namespace detail

// ---- det-check ----

inline int cmd_det_check(const RunConfig& cfg, std::ostream& os) {
  ModelBundle b = get_bundle(cfg.model);
  const int rank = b.model.torus_rank();
  const double tol = tolerance_or(cfg, "det", 1e-10);

  if (cfg.x_angles.empty())
    throw config_error("det-check: x_angles must list at least one torus point");
  std::vector<TorusElement> xs = detail::resolve_x_list(cfg, rank, {});

  std::vector<std::string> header;
  for (int j = 0; j < rank; ++j) header.push_back("theta_" + std::to_string(j));
  header.insert(header.end(), {"det_direct", "det_character", "abs_diff", "status"});
  write_csv_row(os, header);

  bool pass = true;
  for (const auto& x : xs) {
    DetPair dp = det_p_id_minus(b.model, b.datum, x);
    double diff = std::abs(dp.direct - dp.character);
    // singular x has det 0; it is reported but excluded from pass/fail
    bool singular = !is_regular(b.model, x);
    if (!singular && diff >= tol) pass = false;
    std::vector<std::string> row;
    for (int j = 0; j < rank; ++j) row.push_back(fmt17(x.angles[j]));
    row.push_back(fmt17(dp.direct));
    row.push_back(fmt17(dp.character));
    row.push_back(fmt17(diff));
    row.push_back(singular ? "singular" : "ok");
    write_csv_row(os, row);
  }
  return pass ? 0 : 1;
}

// ---- prop-tau ----

struct PropTauRow {
  TorusElement x;
  std::complex<double> closed, numeric;
  double diff = 0.0;
};

inline std::vector<PropTauRow> run_prop_tau_battery(
    const ModelBundle& b, const std::vector<int>& mu, const std::vector<TorusElement>& xs,
    const RunConfig& cfg, const std::shared_ptr<ProfileAverageCache>& cache) {
  OperatorProfile prof = gaussian_block_profile(
      cfg.gauss_c, {weight_from_integers(mu)}, "E");
  InverseFourierSpec ift{cfg.grid.u_points, cfg.grid.z_points, cfg.grid.z_radius};
  MotionQuadSpec motion;
  motion.k_points = cfg.grid.k_points;
  motion.p_points = cfg.grid.p_points;
  motion.p_radius = cfg.grid.p_radius;
  motion.threads = cfg.threads;

  for (const auto& x : xs)
    if (!is_regular(b.model, x))
      throw config_error("prop-tau: x is not regular");

  prefill_profile_cache(b.model, prof, motion, ift, cache, cfg.threads);
  SmoothTestFunction f =
      profile_block_function(b.model, prof, ift, cache, motion.p_radius);

  std::vector<PropTauRow> rows;
  for (const auto& x : xs) {
    PropTauRow r;
    r.x = x;
    r.closed = prop_tau_closed_form(b.datum, prof, x);
    r.numeric = orbital_integral_motion(b.model, f, x, motion);
    r.diff = std::abs(r.closed - r.numeric);
    rows.push_back(r);
  }
  return rows;
}

inline int cmd_prop_tau(const RunConfig& cfg, std::ostream& os) {
  ModelBundle b = get_bundle(cfg.model);
  const int rank = b.model.torus_rank();
  const double tol = tolerance_or(cfg, "prop_tau", 1e-6);
  std::vector<int> mu = detail::resolve_mu(cfg, rank);
  std::vector<TorusElement> xs =
      detail::resolve_x_list(cfg, rank, detail::default_theta_battery());

  auto cache = std::make_shared<ProfileAverageCache>();
  std::vector<PropTauRow> rows = run_prop_tau_battery(b, mu, xs, cfg, cache);

  std::vector<std::string> header;
  for (int j = 0; j < rank; ++j) header.push_back("theta_" + std::to_string(j));
  header.insert(header.end(),
                {"re_closed", "im_closed", "re_numeric", "im_numeric", "abs_diff"});
  write_csv_row(os, header);
  bool pass = true;
  for (const auto& r : rows) {
    if (!(r.diff < tol)) pass = false;
    std::vector<std::string> row;
    for (int j = 0; j < rank; ++j) row.push_back(fmt17(r.x.angles[j]));
    row.push_back(fmt17(r.closed.real()));
    row.push_back(fmt17(r.closed.imag()));
    row.push_back(fmt17(r.numeric.real()));
    row.push_back(fmt17(r.numeric.imag()));
    row.push_back(fmt17(r.diff));
    write_csv_row(os, row);
  }
  return pass ? 0 : 1;
}

// ---- verify-limit ----

inline ConvergenceStudy run_limit_study(const ModelBundle& b, const RunConfig& cfg) {
  SmoothTestFunction f = bump_function(cfg.bump_radius);
  std::vector<TorusElement> xs =
      detail::resolve_x_list(cfg, b.model.torus_rank(), {kTwoPi / 4.0});
  if (xs.size() != 1)
    throw config_error("verify-limit: exactly one x required");
  if (!is_regular(b.model, xs[0]))
    throw config_error("verify-limit: x is not regular");
  DeformQuadSpec ds;
  ds.k_points = cfg.grid.k_points;
  ds.a_points = cfg.grid.a_points;
  ds.a_radius = cfg.grid.a_radius;
  ds.threads = cfg.threads;
  LimitQuadSpec ls;
  ls.v_points = cfg.grid.limit_points;
  ls.v_radius = cfg.grid.limit_radius;
  ls.threads = cfg.threads;
  return convergence_study(b.model, b.datum, f, xs[0], cfg.t_schedule, ds, ls);
}

inline int cmd_verify_limit(const RunConfig& cfg, std::ostream& os, std::ostream& err) {
  ModelBundle b = get_bundle(cfg.model);
  const double tol = tolerance_or(cfg, "limit_gap", 1e-3);
  ConvergenceStudy st = run_limit_study(b, cfg);

  write_csv_row(os, {"t", "re", "im", "gap", "grid_signature"});
  for (const auto& r : st.rows)
    write_csv_row(os, {fmt17(r.t), fmt17(r.value.real()), fmt17(r.value.imag()),
                       fmt17(r.gap), st.grid_signature});
  write_csv_row(os, {"0", fmt17(st.limit.real()), fmt17(st.limit.imag()), "0",
                     st.grid_signature});

  if (st.rows.size() < 2) {
    err << "verify-limit: schedule has a single entry; convergence check skipped\n";
    return 0;
  }
  bool pass = st.tail_monotone && st.rows.back().gap < tol;
  return pass ? 0 : 1;
}

// ---- pair ----

struct PairResult {
  std::complex<double> closed, numeric;
  double diff = 0.0;
  std::vector<std::pair<double, std::complex<double>>> t_values;
};

inline PairResult run_pairing(const ModelBundle& b, const std::vector<int>& mu,
                              const TorusElement& x, const RunConfig& cfg,
                              std::shared_ptr<ProfileAverageCache> cache) {
  PairingQuadSpec spec;
  spec.gauss_c = cfg.gauss_c;
  spec.ift = {cfg.grid.u_points, cfg.grid.z_points, cfg.grid.z_radius};
  spec.motion.k_points = cfg.grid.k_points;
  spec.motion.p_points = cfg.grid.p_points;
  spec.motion.p_radius = cfg.grid.p_radius;
  spec.motion.threads = cfg.threads;
  spec.threads = cfg.threads;

  PairResult r;
  r.closed = pairing_value(b.model, b.datum, mu, x, 0.0);
  r.numeric = pairing_t0_numeric(b.model, b.datum, mu, x, spec, cache);
  r.diff = std::abs(r.closed - r.numeric);
  for (double t : {0.0, 0.25, 0.5, 1.0})
    r.t_values.emplace_back(t, pairing_value(b.model, b.datum, mu, x, t));
  return r;
}

inline int cmd_pair(const RunConfig& cfg, std::ostream& os) {
  ModelBundle b = get_bundle(cfg.model);
  const int rank = b.model.torus_rank();
  const double tol = tolerance_or(cfg, "pair", 1e-6);
  std::vector<int> mu = detail::resolve_mu(cfg, rank);
  std::vector<TorusElement> xs = detail::resolve_x_list(cfg, rank, {kTwoPi / 4.0});
  if (xs.size() != 1) throw config_error("pair: exactly one x required");
  if (!is_regular(b.model, xs[0])) throw config_error("pair: x is not regular");

  PairResult r = run_pairing(b, mu, xs[0], cfg, std::make_shared<ProfileAverageCache>());
  bool pass = r.diff < tol;

  JsonWriter w(os);
  w.begin_object();
  w.key("tool_version");
  w.value_string(kToolVersion);
  w.key("model");
  w.value_string(cfg.model);
  w.key("mu");
  w.begin_array();
  for (int m_ : mu) w.value_int(m_);
  w.end_array();
  w.key("x_angles");
  w.begin_array();
  for (int j = 0; j < rank; ++j) w.value_number(xs[0].angles[j]);
  w.end_array();
  w.key("phase_convention");
  w.value_string("weights pair real on the compact torus; formal degrees are magnitudes");
  w.key("closed_form");
  w.value_complex(r.closed);
  w.key("quadrature_t0");
  w.value_complex(r.numeric);
  w.key("abs_diff");
  w.value_number(r.diff);
  w.key("t_values");
  w.begin_array();
  for (const auto& [t, v] : r.t_values) {
    w.begin_object();
    w.key("t");
    w.value_number(t);
    w.key("value");
    w.value_complex(v);
    w.end_object();
  }
  w.end_array();
  w.key("tolerance");
  w.value_number(tol);
  w.key("pass");
  w.value_bool(pass);
  w.end_object();
  w.finish();
  return pass ? 0 : 1;
}

// ---- l2-scaling ----

inline int cmd_l2_scaling(const RunConfig& cfg, std::ostream& os) {
  ModelBundle b = get_bundle(cfg.model);
  const int rank = b.model.torus_rank();
  const double tol = tolerance_or(cfg, "l2", 1e-12);
  std::vector<int> mu = detail::resolve_mu(cfg, rank);
  if (formal_degree(b.model, mu) == 0.0)
    throw config_error("l2-scaling: formal degree vanishes for this mu");
  const int dp = b.model.dim_p();

  write_csv_row(os, {"t", "ratio", "t_power_dim_p", "abs_diff"});
  bool pass = true;
  for (double t : cfg.t_schedule) {
    double ratio = l2_scaling(b.model, mu, t);
    double want = std::pow(t, dp);
    double diff = std::abs(ratio - want);
    if (!(diff < tol)) pass = false;
    write_csv_row(os, {fmt17(t), fmt17(ratio), fmt17(want), fmt17(diff)});
  }
  return pass ? 0 : 1;
}

// ---- report ----

inline int cmd_report(const RunConfig& cfg, std::ostream& os) {
  ModelBundle b = get_bundle(cfg.model);
  const int rank = b.model.torus_rank();
  std::vector<int> mu = detail::resolve_mu(cfg, rank);

  JsonWriter w(os);
  w.begin_object();
  w.key("tool_version");
  w.value_string(kToolVersion);
  w.key("model");
  w.value_string(cfg.model);
  w.key("grid");
  w.begin_object();
  w.key("k_points");
  w.value_int(cfg.grid.k_points);
  w.key("p_points");
  w.value_int(cfg.grid.p_points);
  w.key("p_radius");
  w.value_number(cfg.grid.p_radius);
  w.key("a_points");
  w.value_int(cfg.grid.a_points);
  w.key("a_radius");
  w.value_number(cfg.grid.a_radius);
  w.key("limit_points");
  w.value_int(cfg.grid.limit_points);
  w.key("limit_radius");
  w.value_number(cfg.grid.limit_radius);
  w.key("u_points");
  w.value_int(cfg.grid.u_points);
  w.key("z_points");
  w.value_int(cfg.grid.z_points);
  w.key("z_radius");
  w.value_number(cfg.grid.z_radius);
  w.end_object();

  bool all_pass = true;

  // determinant identity over the seeded battery
  {
    const double tol = tolerance_or(cfg, "det", 1e-10);
    double worst = 0.0;
    int checked = 0;
    for (const auto& a : detail::sampled_angle_battery(100, rank, 20260822u)) {
      TorusElement x = torus_element(a);
      if (!is_regular(b.model, x)) continue;
      DetPair dp = det_p_id_minus(b.model, b.datum, x);
      worst = std::max(worst, std::abs(dp.direct - dp.character));
      ++checked;
    }
    bool pass = checked > 0 && worst < tol;
    all_pass = all_pass && pass;
    w.key("det_check");
    w.begin_object();
    w.key("samples");
    w.value_int(checked);
    w.key("worst_abs_diff");
    w.value_number(worst);
    w.key("tolerance");
    w.value_number(tol);
    w.key("pass");
    w.value_bool(pass);
    w.end_object();
  }

  // closed form vs quadrature pipeline, one shared momentum cache
  auto cache = std::make_shared<ProfileAverageCache>();
  {
    const double tol = tolerance_or(cfg, "prop_tau", 1e-6);
    std::vector<TorusElement> xs =
        detail::resolve_x_list(cfg, rank, detail::default_theta_battery());
    std::vector<PropTauRow> rows = run_prop_tau_battery(b, mu, xs, cfg, cache);
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.diff);
    bool pass = worst < tol;
    all_pass = all_pass && pass;
    w.key("prop_tau");
    w.begin_object();
    w.key("cases");
    w.value_int(long(rows.size()));
    w.key("worst_abs_diff");
    w.value_number(worst);
    w.key("tolerance");
    w.value_number(tol);
    w.key("pass");
    w.value_bool(pass);
    w.end_object();
  }

  // deformation limit
  {
    const double tol = tolerance_or(cfg, "limit_gap", 1e-3);
    ConvergenceStudy st = run_limit_study(b, cfg);
    bool pass = st.tail_monotone && st.rows.back().gap < tol;
    all_pass = all_pass && pass;
    w.key("verify_limit");
    w.begin_object();
    w.key("limit");
    w.value_complex(st.limit);
    w.key("final_gap");
    w.value_number(st.rows.back().gap);
    w.key("tail_monotone");
    w.value_bool(st.tail_monotone);
    w.key("self_convergence");
    w.value_number(st.self_convergence);
    w.key("grid_signature");
    w.value_string(st.grid_signature);
    w.key("tolerance");
    w.value_number(tol);
    w.key("pass");
    w.value_bool(pass);
    w.end_object();
  }

  // pairing at t = 0, reusing the momentum cache (same g, same v-grid)
  {
    const double tol = tolerance_or(cfg, "pair", 1e-6);
    std::vector<TorusElement> xs = detail::resolve_x_list(cfg, rank, {kTwoPi / 4.0});
    if (xs.size() != 1) throw config_error("report: exactly one x required for pairing");
    if (!is_regular(b.model, xs[0]))
      throw config_error("report: pairing x is not regular");
    PairResult r = run_pairing(b, mu, xs[0], cfg, cache);
    bool pass = r.diff < tol;
    all_pass = all_pass && pass;
    w.key("pair");
    w.begin_object();
    w.key("closed_form");
    w.value_complex(r.closed);
    w.key("quadrature_t0");
    w.value_complex(r.numeric);
    w.key("abs_diff");
    w.value_number(r.diff);
    w.key("tolerance");
    w.value_number(tol);
    w.key("pass");
    w.value_bool(pass);
    w.end_object();
  }

  // scaling law
  {
    const double tol = tolerance_or(cfg, "l2", 1e-12);
    const int dp = b.model.dim_p();
    double worst = 0.0;
    for (double t : cfg.t_schedule)
      worst = std::max(worst, std::abs(l2_scaling(b.model, mu, t) - std::pow(t, dp)));
    bool pass = worst < tol;
    all_pass = all_pass && pass;
    w.key("l2_scaling");
    w.begin_object();
    w.key("worst_abs_diff");
    w.value_number(worst);
    w.key("tolerance");
    w.value_number(tol);
    w.key("pass");
    w.value_bool(pass);
    w.end_object();
  }

  w.key("pass");
  w.value_bool(all_pass);
  w.end_object();
  w.finish();
  return all_pass ? 0 : 1;
}

}  // namespace cartan
