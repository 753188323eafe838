#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

using namespace cgmysv;
using namespace cgmysv::cli;

namespace {

void add_model_options(CLI::App& app, RunConfig& cfg, std::string& model) {
  auto& p = cfg.params;
  app.add_option("--model", model, "cgmysv or cgmy (benchmark)")->check(CLI::IsMember({"cgmysv", "cgmy"}));
  app.add_option("--alpha", p.alpha);
  app.add_option("--lambda-plus", p.lambda_plus);
  app.add_option("--lambda-minus", p.lambda_minus);
  app.add_option("--kappa", p.kappa);
  app.add_option("--eta", p.eta);
  app.add_option("--zeta", p.zeta);
  app.add_option("--rho", p.rho);
  app.add_option("--v0", p.v0);
  app.add_option("--cgmy-c", cfg.cgmy_c, "C of the CGMY benchmark");
  app.add_option("--s0", cfg.env.s0);
  app.add_option("--rate", cfg.env.r);
  app.add_option("--div-yield", cfg.env.q);
  app.add_option("--maturity-days", cfg.maturity_days, "horizon T in days");
  app.add_option("--steps", cfg.steps, "time steps M over the horizon");
  app.add_option("--paths", cfg.paths, "sample paths N");
  app.add_option("--terms", cfg.terms, "series terms J");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CGMYSV simulation, pricing and calibration"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "key = value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string model = "cgmysv";
  int day_count = 252;
  add_model_options(app, cfg, model);
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--out-dir", cfg.out_dir);
  app.add_option("--threads", cfg.threads, "0 = all cores");
  app.add_option("--day-count", day_count)->check(CLI::IsMember({252, 365}));

  std::vector<int> horizons{10, 25, 50, 100};
  std::vector<std::string> specs;
  std::string spec;
  std::vector<int> n_list{100, 1000, 5000, 10000};
  int repeats = 100;
  int points = 1001;
  CalibrateSettings calib;

  auto* simulate = app.add_subcommand("simulate", "write sample paths and per-step moments");
  auto* kstest = app.add_subcommand("kstest", "KS test of simulated L_t against the inverted CDF");
  kstest->add_option("--horizons", horizons, "horizons in days");
  auto* pdf = app.add_subcommand("pdf", "tabulate the density and CDF of L_t");
  pdf->add_option("--horizons", horizons, "horizons in days");
  pdf->add_option("--points", points);
  auto* price = app.add_subcommand("price", "price option specs by FFT and Monte Carlo");
  price->add_option("--option", specs, "\"<style> <right> <strike> [barrier] [days=<d>]\"")->required();
  auto* calibrate = app.add_subcommand("calibrate", "calibrate to an option-chain CSV");
  calibrate->add_option("--chain", calib.chain_file)->required();
  calibrate->add_option("--starts", calib.starts);
  calibrate->add_option("--max-evals", calib.max_evaluations);
  calibrate->add_option("--steps-per-day", calib.steps_per_day, "LSM grid density for American quotes");
  auto* boot = app.add_subcommand("bootstrap", "repeat a Monte Carlo price with independent seeds");
  boot->add_option("--option", spec)->required();
  boot->add_option("--n-list", n_list);
  boot->add_option("--repeats", repeats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  cfg.model = model == "cgmy" ? ModelKind::Cgmy : ModelKind::Cgmysv;
  cfg.day_count = day_count == 365 ? DayCount::Calendar365 : DayCount::Trading252;

  try {
    Outputs out;
    if (*simulate) out = cmd_simulate(cfg);
    else if (*kstest) out = cmd_kstest(cfg, horizons);
    else if (*pdf) out = cmd_pdf(cfg, horizons, points);
    else if (*price) out = cmd_price(cfg, specs);
    else if (*calibrate) out = cmd_calibrate(cfg, calib);
    else if (*boot) out = cmd_bootstrap(cfg, spec, n_list, repeats);
    write_outputs(cfg.out_dir, out);
    for (const auto& [name, table] : out)
      std::cout << cfg.out_dir << '/' << name << " (" << table.rows.size() << " rows)\n";
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
