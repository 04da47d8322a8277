#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI/CLI.hpp>

#include "ratlas/pipeline.hpp"

namespace {

void print_summary(const std::string& sub, const ratlas::RunOutcome& o) {
  const auto& rep = o.report;
  std::cout << sub << ": report written to " << o.output_path << "\n";
  if (!rep.at("hypotheses").at("passed").get<bool>()) {
    std::cout << "hypothesis checks FAILED:\n";
    for (const auto& c : rep.at("hypotheses").at("clauses"))
      if (!c.at("passed").get<bool>())
        std::cout << "  - " << c.at("name").get<std::string>() << ": "
                  << c.at("detail").get<std::string>() << "\n";
    return;
  }
  if (sub == "analyze") {
    std::cout << "vertices " << rep.at("graph").at("vertex_count")
              << ", edges " << rep.at("graph").at("edge_count") << ", cycles "
              << rep.at("cycles").at("count") << " (pr "
              << rep.at("cycles").at("pr_count") << "), M "
              << rep.at("band").at("M").dump() << "\n";
  } else if (sub == "candidates") {
    for (const auto& run : rep.at("runs"))
      std::cout << "h=" << run.at("h").get<double>() << ": "
                << run.at("root_count") << " roots (winding "
                << run.at("winding") << ")\n";
  } else if (sub == "resonances") {
    for (const auto& run : rep.at("runs"))
      std::cout << "h=" << run.at("h").get<double>() << ": "
                << run.at("resonance_count") << " resonances among "
                << run.at("eigenvalues").size() << " eigenvalues\n";
  } else if (sub == "verify") {
    for (const auto& run : rep.at("runs"))
      std::cout << "h=" << run.at("h").get<double>() << ": band radius "
                << run.at("band_radius").get<double>()
                << (run.at("empty").get<bool>() ? " EMPTY" : " VIOLATED")
                << "\n";
    std::cout << "band "
              << (rep.at("band_empty").get<bool>() ? "empty at every h"
                                                   : "VIOLATED")
              << "\n";
  } else if (sub == "amplitude") {
    if (rep.contains("bound_checks"))
      for (const auto& bc : rep.at("bound_checks"))
        std::cout << "cycle " << bc.at("cycle") << ": "
                  << bc.at("violations") << "/" << bc.at("checked")
                  << " bound violations\n";
    else
      std::cout << "no pr cycles: amplitudes suppressed\n";
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "resonance-atlas: directed phase-space cycles, cycle-amplitude calculus "
      "and resonance-free band verification for 1D two-level semiclassical "
      "Schrodinger systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 1;
  const std::vector<std::pair<const char*, const char*>> subs = {
      {"analyze", "hypothesis checks, phase graph, cycles, band width"},
      {"amplitude", "|C(E;h)| grids and cycle-amplitude bound checks"},
      {"candidates", "roots of the quantization condition C(E;h)=1"},
      {"resonances", "complex-dilation eigenvalues with classification"},
      {"verify", "resonance-free band verification per h"},
  };
  for (const auto& [name, desc] : subs) {
    auto* sc = app.add_subcommand(name, desc);
    sc->add_option("--config", config_path, "path to the JSON run config")
        ->required();
    sc->add_option("--out", out_dir, "output directory (overrides config)");
    sc->add_option("--jobs", jobs, "maximum concurrent per-h tasks")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const ratlas::RunConfig cfg = ratlas::load_config(config_path);
    const ratlas::RunOutcome outcome =
        ratlas::run_subcommand(sub, cfg, out_dir, jobs);
    print_summary(sub, outcome);
    return outcome.exit_code;
  } catch (const ratlas::ParseError& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const ratlas::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
