#pragma once

#include <nlohmann/json.hpp>

#include "ratlas/config.hpp"

namespace ratlas {

using ordered_json = nlohmann::ordered_json;

// One shared analysis pass: hypotheses, graph, cycles, band width.
struct AnalysisResult {
  HypothesisReport hypotheses;
  PhaseGraph graph;
  std::vector<DirectedCycle> cycles;
  BandWidth band;
};

AnalysisResult analyze_problem(const ProblemConfig& cfg);

// Report builders for the five subcommands. Pure given the config; every
// numeric field carries its tolerance/solver metadata.
ordered_json analyze_report(const RunConfig& cfg);
ordered_json amplitude_report(const RunConfig& cfg);
ordered_json candidates_report(const RunConfig& cfg);
ordered_json resonances_report(const RunConfig& cfg, int jobs = 1);
ordered_json verify_report(const RunConfig& cfg, int jobs = 1);

// FNV-1a hash of the canonical config serialization; names the output
// subdirectory so identical configs land in identical paths.
std::string run_hash(const RunConfig& cfg);

struct RunOutcome {
  int exit_code = 0;          // 0 ok, 1 hypothesis, 2 numerical, 3 band violation
  ordered_json report;
  std::string output_path;    // directory artifacts were written to (may be empty)
};

// Runs a subcommand end to end: report + artifacts under
// <out_dir>/run-<hash>/. out_dir_override empty means config output_dir.
RunOutcome run_subcommand(const std::string& name, const RunConfig& cfg,
                          const std::string& out_dir_override = "", int jobs = 1);

} // namespace ratlas
