#include <iostream>

#include "commands.hpp"
#include "medie/parallel.hpp"

int main(int argc, char** argv) {
  using namespace medie::cli;
  CLI::App app{"medie: scheme-constrained medical information extraction toolkit", "medie"};
  app.set_version_flag("--version", std::string("medie ") + MEDIE_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  globals.jobs = medie::default_jobs();
  app.add_option("--scheme", globals.scheme, "Scheme file (default: builtin medical scheme)")->envname("MEDIE_SCHEME");
  app.add_option("--seed", globals.seed, "Seed for every random step")->envname("MEDIE_SEED");
  app.add_option("--jobs", globals.jobs, "Parallel document workers (default: available cores)")
      ->envname("MEDIE_JOBS")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", globals.config, "Subcommand configuration file (JSON)")->envname("MEDIE_CONFIG");
  app.add_flag("--strict", globals.strict, "Treat scheme violations as errors (exit 1)")->envname("MEDIE_STRICT");

  auto runners = register_commands(app, globals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    return runners.at(sub)();
  } catch (const StrictFailure& e) {
    std::cerr << "medie " << sub->get_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "medie " << sub->get_name() << ": error: " << e.what() << "\n";
    return 2;
  }
}
