#include <pybind11/pybind11.h>

#include <string>

#include "ratlas/config.hpp"
#include "ratlas/errors.hpp"
#include "ratlas/pipeline.hpp"

namespace py = pybind11;

namespace {

std::string report_for(const std::string& sub, const std::string& config_json, int jobs) {
  const ratlas::RunConfig cfg = ratlas::parse_config(config_json);
  ratlas::ordered_json rep;
  if (sub == "analyze")
    rep = ratlas::analyze_report(cfg);
  else if (sub == "amplitude")
    rep = ratlas::amplitude_report(cfg);
  else if (sub == "candidates")
    rep = ratlas::candidates_report(cfg);
  else if (sub == "resonances")
    rep = ratlas::resonances_report(cfg, jobs);
  else if (sub == "verify")
    rep = ratlas::verify_report(cfg, jobs);
  else
    throw ratlas::ValidationError("unknown subcommand \"" + sub + "\"");
  return rep.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "two-level semiclassical resonance toolkit (core bindings)";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ratlas::ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ratlas::ValidationError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ratlas::Error& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  m.def("report", &report_for, py::arg("subcommand"), py::arg("config_json"),
        py::arg("jobs") = 1,
        "Run one subcommand in memory and return its JSON report as a string.");

  m.def(
      "run",
      [](const std::string& sub, const std::string& config_json,
         const std::string& out_dir, int jobs) {
        const ratlas::RunConfig cfg = ratlas::parse_config(config_json);
        const ratlas::RunOutcome out = ratlas::run_subcommand(sub, cfg, out_dir, jobs);
        return py::make_tuple(out.exit_code, out.report.dump(), out.output_path);
      },
      py::arg("subcommand"), py::arg("config_json"), py::arg("out_dir") = "",
      py::arg("jobs") = 1,
      "Run one subcommand with artifacts; returns (exit_code, report_json, output_path).");

  m.def(
      "canonical_config",
      [](const std::string& config_json) {
        return ratlas::config_to_json(ratlas::parse_config(config_json));
      },
      py::arg("config_json"),
      "Parse, validate and rewrite a config in canonical form.");

  m.def(
      "config_hash",
      [](const std::string& config_json) {
        return ratlas::run_hash(ratlas::parse_config(config_json));
      },
      py::arg("config_json"), "Stable hash of the canonical config.");

  m.attr("__version__") = "0.1.0";
}
