// assignflow: run labeling flows on generated or file data, compare label maps.

#include "assignflow/cli.hpp"
#include "assignflow/parallel.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

// Values from the key=value file fill only options absent from the command line.
void apply_config_file(CLI::App &cmd, const std::string &path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::FileError &) {
    throw assignflow::InvalidArgument("cannot read config file '" + path + "'");
  }
  for (const auto &item : items) {
    if (item.name == "++" || item.name == "--") {
      continue;
    }
    CLI::Option *opt = nullptr;
    try {
      opt = cmd.get_option("--" + item.name);
    } catch (const CLI::OptionNotFound &) {
      throw assignflow::InvalidArgument("config file: unknown key '" + item.name + "'");
    }
    if (opt->count() == 0) {
      opt->add_result(item.inputs);
      opt->run_callback();
    }
  }
}

} // namespace

int main(int argc, char **argv) {
  if (const char *threads = std::getenv("ASSIGNFLOW_THREADS")) {
    assignflow::set_thread_limit(std::atoi(threads));
  }

  CLI::App app{"Assignment-flow labeling with geometric integrators"};
  app.require_subcommand(1);

  assignflow::RunConfig cfg;
  std::string config_file;
  auto *run = app.add_subcommand("run", "Integrate a labeling problem and write artifacts");
  auto *scenario = run->add_option("--scenario", cfg.scenario, "signal1d | vertex31 | colorquant")
                       ->check(CLI::IsMember({"signal1d", "vertex31", "colorquant"}))
                       ->capture_default_str();
  run->add_option("--input", cfg.input, "PPM image or CSV features (one row per node)")
      ->excludes(scenario);
  run->add_option("--labels", cfg.labels, "label count k or CSV of label prototypes");
  run->add_option("--rho", cfg.rho, "data scale rho");
  run->add_option("--window", cfg.window, "neighborhood edge length (odd)");
  run->add_option("--integrator", cfg.integrator)
      ->check(CLI::IsMember(assignflow::integrator_names()))
      ->capture_default_str();
  run->add_option("--tau", cfg.tau, "local error tolerance")->capture_default_str();
  run->add_option("--n-tau", cfg.n_tau, "step growth factor threshold")->capture_default_str();
  run->add_option("--h0", cfg.h0, "initial (adaptive) or fixed step size");
  run->add_option("--c", cfg.c, "relinearization control (linear-be)")->capture_default_str();
  run->add_option("--m", cfg.m, "Krylov dimension (expint)")->capture_default_str();
  run->add_option("--T", cfg.horizon, "final time (expint); default reaches entropy < 1e-3");
  run->add_option("--seed", cfg.seed)->capture_default_str();
  run->add_option("--out", cfg.out, "output directory")->capture_default_str();
  run->add_option("--oracle", cfg.oracle, "auto | none | label CSV")->capture_default_str();
  run->add_option("--config", config_file, "key=value file; flags take precedence");

  std::string lhs;
  std::string rhs;
  std::string mask;
  auto *cmp = app.add_subcommand("compare", "Report label differences of two label CSVs");
  cmp->add_option("a", lhs)->required();
  cmp->add_option("b", rhs)->required();
  cmp->add_option("--mask", mask, "difference-mask PPM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      if (!config_file.empty()) {
        apply_config_file(*run, config_file);
      }
      assignflow::run(cfg, std::cout);
    } else {
      const auto report = assignflow::compare(
          lhs, rhs, mask.empty() ? std::nullopt : std::optional<std::filesystem::path>(mask));
      std::cout << "differing " << report.agreement.differing << " of "
                << report.width * report.height << " (fraction "
                << assignflow::format_double(report.agreement.fraction) << ")\n";
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
