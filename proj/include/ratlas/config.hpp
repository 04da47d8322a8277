#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ratlas/potential.hpp"
#include "ratlas/semiclassics.hpp"
#include "ratlas/spectral.hpp"

namespace ratlas {

struct SpectralParams {
  double theta = 0.3;
  double theta_prime = 0.35;
  GridSpec grid;
  double class_tol_factor = 1e-4;  // class_tol = factor * h
};

struct RunConfig {
  ProblemConfig problem;
  std::vector<double> h_list;      // strictly descending, all in (0, 1)
  std::optional<SearchRect> search_rect;  // default derived from the band
  SpectralParams spectral;
  // fraction of the nominal band tested; roots sit at depth
  // 1 - ln|sigma sigma'| / ((2 nu - 1) ln(1/h)) of it, so the default
  // keeps clearance down to h ~ 0.05 for O(1) transfer coefficients
  double safety_c = 0.6;
  double band_M_default = 5.0;     // used when the cycle set is empty
  std::string output_dir = "out";
};

// Strict parser: unknown keys rejected at every level, all invariants
// enforced. ParseError carries line/column; ValidationError names the field.
RunConfig parse_config(const std::string& json_text);

RunConfig load_config(const std::filesystem::path& file);

// Canonical serialization (key-ordered, shortest round-trip floats); the
// basis for the run hash and byte-identical reports.
std::string config_to_json(const RunConfig& cfg);

} // namespace ratlas
