// Command line front end.  Subcommands:
//   det-check     determinant identity on the torus, direct vs character route
//   prop-tau      orbital integral of an inverse transform vs its closed form
//   verify-limit  deformed orbital integrals against their t -> 0 limit
//   pair          trace pairing at t = 0, quadrature vs closed form
//   l2-scaling    formal degree ratio against the flat-limit power law
//   report        all of the above in one JSON document
// Exit codes: 0 pass, 1 a verification failed, 2 bad usage or config.

#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cartan/commands.hpp"
#include "cartan/config.hpp"

namespace {

// "--tolerance.name=value" is friendlier than CLI11's option model allows, so
// such args are rewritten to "--tolerance name=value" pairs before parsing.
std::vector<std::string> rewrite_args(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    const std::string prefix = "--tolerance.";
    if (a.rfind(prefix, 0) == 0) {
      std::string rest = a.substr(prefix.size());
      auto eq = rest.find('=');
      if (eq == std::string::npos)
        throw cartan::config_error("expected --tolerance.<name>=<value>: " + a);
      out.push_back("--tolerance");
      out.push_back(rest);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

void apply_tolerance_args(cartan::RunConfig& cfg, const std::vector<std::string>& tols) {
  for (const std::string& t : tols) {
    auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw cartan::config_error("expected <name>=<value> in tolerance: " + t);
    std::string name = t.substr(0, eq);
    std::string val = t.substr(eq + 1);
    try {
      size_t used = 0;
      double v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      cfg.tolerances[name] = v;
    } catch (const std::exception&) {
      throw cartan::config_error("tolerance value is not a number: " + t);
    }
  }
}

int run_command(const std::string& cmd, const cartan::RunConfig& cfg) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (cfg.out_path != "-") {
    file.open(cfg.out_path);
    if (!file) throw cartan::config_error("cannot open output file: " + cfg.out_path);
    os = &file;
  }
  if (cmd == "det-check") return cartan::cmd_det_check(cfg, *os);
  if (cmd == "prop-tau") return cartan::cmd_prop_tau(cfg, *os);
  if (cmd == "verify-limit") return cartan::cmd_verify_limit(cfg, *os, std::cerr);
  if (cmd == "pair") return cartan::cmd_pair(cfg, *os);
  if (cmd == "l2-scaling") return cartan::cmd_l2_scaling(cfg, *os);
  if (cmd == "report") return cartan::cmd_report(cfg, *os);
  throw cartan::config_error("unknown command: " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmonic analysis on reductive pair models and their motion group limits"};
  app.require_subcommand(1);

  std::string config_path, model, out_path, format;
  int threads = -1;
  std::vector<std::string> tolerance_args;
  std::vector<double> x_angles;
  std::vector<int> mu;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--model", model, "model id (sl2r, sl2r_x_sl2r)");
  app.add_option("--out", out_path, "output path, - for stdout");
  app.add_option("--format", format, "output format (csv or json)");
  app.add_option("--threads", threads, "worker thread count");
  app.add_option("--tolerance", tolerance_args,
                 "tolerance override as <name>=<value>, repeatable")
      ->allow_extra_args(false);
  app.add_option("--x", x_angles, "torus angles, rank entries per point");
  app.add_option("--mu", mu, "parameter weight, one integer per circle");

  const char* names[] = {"det-check", "prop-tau", "verify-limit",
                         "pair", "l2-scaling", "report"};
  const char* descs[] = {
      "determinant identity over a sampled torus battery",
      "orbital integrals of inverse transforms vs closed forms",
      "convergence of deformed orbital integrals to the flat limit",
      "t = 0 trace pairing, quadrature vs character value",
      "formal degree ratio vs the dimension power law",
      "run every check and emit one JSON report"};
  for (int i = 0; i < 6; ++i) app.add_subcommand(names[i], descs[i])->fallthrough();

  std::vector<std::string> args;
  try {
    args = rewrite_args(argc, argv);
  } catch (const cartan::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::vector<const char*> cargv;
    cargv.push_back(argv[0]);
    for (const auto& a : args) cargv.push_back(a.c_str());
    app.parse(int(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cartan::RunConfig cfg;
    cfg.threads = cartan::env_default_threads();
    if (!config_path.empty()) cartan::load_config_file(cfg, config_path);
    if (!model.empty()) cfg.model = model;
    if (!out_path.empty()) cfg.out_path = out_path;
    if (!format.empty()) cfg.format = format;
    if (threads > 0) cfg.threads = threads;
    if (!x_angles.empty()) cfg.x_angles = x_angles;
    if (!mu.empty()) cfg.mu = mu;
    apply_tolerance_args(cfg, tolerance_args);
    cartan::validate_config(cfg);

    std::string cmd;
    for (const auto* sub : app.get_subcommands()) cmd = sub->get_name();
    return run_command(cmd, cfg);
  } catch (const cartan::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
