// Experiment runner CLI.  One subcommand per experiment; reports are written
// as CSV/JSON/SVG under --out and summarized on stdout.
//
// Exit codes: 0 all assertions passed, 1 an assertion failed, 2 usage or
// configuration or budget error.
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "tdlab/tdlab.hpp"

namespace {

void print_summary(const tdlab::ExperimentReport& rep) {
  std::printf("== %s (%s), %.2f s\n", rep.experiment.c_str(), rep.version.c_str(),
              rep.wall_seconds);
  for (const tdlab::FitRow& f : rep.fits)
    std::printf("   fit  %-40s exponent=%s residual=%s\n", f.name.c_str(),
                tdlab::fmt_double(f.exponent).c_str(), tdlab::fmt_double(f.residual_rms).c_str());
  for (const tdlab::Assertion& a : rep.assertions)
    std::printf("   %s %-40s value=%s window=[%s, %s] tol=%s\n", a.passed ? "PASS" : "FAIL",
                a.name.c_str(), tdlab::fmt_double(a.value).c_str(), tdlab::fmt_double(a.lo).c_str(),
                tdlab::fmt_double(a.hi).c_str(), tdlab::fmt_double(a.tolerance).c_str());
  for (const std::string& n : rep.notes) std::printf("   note: %s\n", n.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tdlab: spectral experiments for densities of finite-rank operators on the torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", format = "csv,json";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int budget_seconds = 0;
  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--format", format, "comma list of csv,json,svg")->capture_default_str();
  app.add_option("--budget-seconds", budget_seconds, "abort (exit 2) past this wall-clock budget");

  for (const tdlab::ExperimentEntry& e : tdlab::experiment_registry())
    app.add_subcommand(e.name, "run the " + e.name + " experiment")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    tdlab::ConfigMap user;
    if (!config_path.empty()) user = tdlab::parse_config_file(config_path);
    if (seed_set) user["seed"] = std::to_string(seed);

    tdlab::ExperimentReport rep = tdlab::run_experiment(name, user, budget_seconds);
    print_summary(rep);

    std::istringstream fmts(format);
    std::string f;
    while (std::getline(fmts, f, ',')) {
      if (f == "csv") {
        for (const auto& p : tdlab::emit_csv(rep, out_dir)) std::printf("   wrote %s\n", p.c_str());
      } else if (f == "json") {
        std::printf("   wrote %s\n", tdlab::emit_json(rep, out_dir).c_str());
      } else if (f == "svg") {
        for (const auto& p : tdlab::emit_svg(rep, out_dir)) std::printf("   wrote %s\n", p.c_str());
      } else if (!f.empty()) {
        std::fprintf(stderr, "unknown format: %s\n", f.c_str());
        return 2;
      }
    }
    return rep.exit_code();
  } catch (const tdlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const tdlab::BudgetExceeded& e) {
    std::fprintf(stderr, "budget exceeded: %s\n", e.what());
    return 2;
  } catch (const tdlab::BudgetError& e) {
    std::fprintf(stderr, "budget error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
