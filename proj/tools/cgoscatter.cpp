// Command line experiment runner. Usage:
//   cgoscatter <kind> --config <path> [--seed N] [--out DIR]
// kinds: direct, cgo, carleman, identify, paleywiener, uniqueness.
// Exit codes: 0 pass, 1 numerical failure, 2 config error.

#include "CLI11.hpp"
#include "cgoscatter/cli.hpp"

#include <cstdio>

int main(int argc, char** argv) {
  CLI::App app{"fixed-energy inverse scattering experiment runner"};
  std::string kind, config, out;
  uint64_t seed = 0;
  bool listPots = false;
  app.add_option("kind", kind,
                 "experiment kind: direct cgo carleman identify paleywiener "
                 "uniqueness");
  app.add_option("--config", config, "path to the experiment config file");
  auto* seedOpt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out, "override the output directory");
  app.add_flag("--list-potentials", listPots,
               "print the potential family catalog and exit");
  app.set_version_flag("--version", cgs::kVersion);
  CLI11_PARSE(app, argc, argv);

  if (listPots) {
    for (const auto& f : cgs::listPotentialFamilies())
      std::printf("%-20s %-10s %s\n", f.name.c_str(), f.decayClass.c_str(),
                  f.params.c_str());
    return 0;
  }
  if (kind.empty() || config.empty()) {
    std::fprintf(stderr, "usage: cgoscatter <kind> --config <path> "
                         "[--seed N] [--out DIR]\n");
    return 2;
  }
  try {
    cgs::ExperimentConfig cfg =
        cgs::loadConfig(config, kind, seed, seedOpt->count() > 0, out);
    return cgs::runExperiment(cfg);
  } catch (const cgs::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
