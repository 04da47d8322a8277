#include "ratlas/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "ratlas/log.hpp"

namespace ratlas {

namespace fs = std::filesystem;

namespace {

// deterministic fan-out: fn(i) writes into index i of pre-sized storage
template <typename F>
void parallel_for(int n, int jobs, F&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  const int workers = std::min(jobs, n);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string format_num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// shortest round-trip decimal, shared by JSON and CSV output
std::string csv_num(double x) { return nlohmann::json(x).dump(); }

ordered_json complex_json(complex z) {
  return ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

ordered_json finite_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

ordered_json hypotheses_json(const HypothesisReport& rep) {
  ordered_json j;
  j["passed"] = rep.passed();
  ordered_json arr = ordered_json::array();
  for (const auto& c : rep.clauses)
    arr.push_back(ordered_json{
        {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["clauses"] = arr;
  return j;
}

ordered_json rect_json(const SearchRect& r) {
  return ordered_json{{"re_lo", r.re_lo},
                      {"re_hi", r.re_hi},
                      {"im_lo", r.im_lo},
                      {"im_hi", r.im_hi}};
}

struct Prepared {
  HypothesisReport hypotheses;
  bool ok = false;
  AnalysisResult analysis;
};

Prepared prepare(const RunConfig& rc) {
  Prepared p;
  rc.problem.validate();
  p.hypotheses = check_hypotheses(rc.problem);
  const auto crossing = check_crossing_hypotheses(rc.problem);
  for (const auto& c : crossing.clauses) p.hypotheses.clauses.push_back(c);
  p.ok = p.hypotheses.passed();
  if (p.ok) p.analysis = analyze_problem(rc.problem);
  return p;
}

// unbounded-both-sides characteristic arcs: no vertex, so not in the graph
int count_free_arcs(const ProblemConfig& cfg) {
  const double X = scan_window(cfg);
  const auto crossings =
      find_crossing_points(cfg.V1, cfg.V2, cfg.E0, X, cfg.tol.root_tol);
  int n = 0;
  for (int j : {1, 2}) {
    const auto& V = cfg.branch(j);
    const auto turns = find_turning_points(V, cfg.E0, X, cfg.tol.root_tol);
    if (turns.empty() && crossings.empty() && V.eval(0.0).value < cfg.E0) n += 2;
  }
  return n;
}

double band_value(const Prepared& p, const RunConfig& rc) {
  return p.analysis.band.value_or(rc.band_M_default);
}

SearchRect default_rect(const RunConfig& rc, const Prepared& p, double h) {
  const double M = band_value(p, rc);
  const double band = rc.safety_c * M * h * std::log(1.0 / h);
  const double span = std::max(0.2, 1.1 * band);
  return SearchRect{rc.problem.E0 - span, rc.problem.E0 + span, -span, 0.0};
}

ordered_json report_header(const char* sub, const RunConfig& rc,
                           const Prepared& p) {
  ordered_json rep;
  rep["subcommand"] = sub;
  rep["config_hash"] = run_hash(rc);
  rep["leading_order"] = true;
  rep["config"] = ordered_json::parse(config_to_json(rc));
  rep["hypotheses"] = hypotheses_json(p.hypotheses);
  return rep;
}

ordered_json band_json(const BandWidth& b) {
  ordered_json j;
  j["T_E0"] = b.T_E0 ? ordered_json(*b.T_E0) : ordered_json(nullptr);
  j["M"] = b.M ? ordered_json(*b.M) : ordered_json(nullptr);
  j["arbitrary"] = b.arbitrary;
  ordered_json arg = ordered_json::array();
  for (size_t i : b.argmax_cycles) arg.push_back(i);
  j["argmax_cycles"] = arg;
  return j;
}

ordered_json crossing_constants_json(const ProblemConfig& cfg,
                                     const PhaseGraph& g) {
  ordered_json arr = ordered_json::array();
  for (const auto& v : g.vertices) {
    if (v.kind != VertexKind::Crossing || v.xi < 0.0) continue;
    const CrossingData cd = crossing_constants(cfg, v);
    ordered_json c;
    c["vertex"] = v.id;
    c["x_c"] = cd.x_c;
    c["xi_c"] = cd.xi_c;
    c["slope_gap"] = cd.slope_gap;
    c["steeper_branch"] = cd.steeper_branch;
    c["w"] = complex_json(cd.w_val);
    c["sigma_plus"] = complex_json(cd.sigma_plus);
    c["sigma_minus"] = complex_json(cd.sigma_minus);
    c["abs_sigma_pair"] = std::abs(cd.sigma_plus * cd.sigma_minus);
    c["mu"] = cd.mu;
    arr.push_back(c);
  }
  return arr;
}

struct Artifact {
  std::string name;
  std::string bytes;
};

std::string grid_csv(const PhaseGraph& g, const std::vector<DirectedCycle>& cycles,
                     const ProblemConfig& cfg, double h, const SearchRect& rect,
                     int nre, int nim, double* max_abs, double* min_abs) {
  std::ostringstream os;
  os << "re,im,abs_C\n";
  *max_abs = 0.0;
  *min_abs = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nre; ++i)
    for (int k = 0; k < nim; ++k) {
      const complex E(rect.re_lo + (rect.re_hi - rect.re_lo) * i / (nre - 1),
                      rect.im_lo + (rect.im_hi - rect.im_lo) * k / (nim - 1));
      const double a = std::abs(quantization_function(g, cycles, E, h, cfg));
      *max_abs = std::max(*max_abs, a);
      *min_abs = std::min(*min_abs, a);
      os << csv_num(E.real()) << ',' << csv_num(E.imag()) << ',' << csv_num(a)
         << '\n';
    }
  return os.str();
}

class Stopwatch {
 public:
  explicit Stopwatch(std::string label) : label_(std::move(label)) {}
  ~Stopwatch() {
    const auto dt = std::chrono::steady_clock::now() - t0_;
    std::ostringstream os;
    os << label_ << " took "
       << std::chrono::duration<double>(dt).count() << " s";
    log::info(os.str());
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

} // namespace

AnalysisResult analyze_problem(const ProblemConfig& cfg) {
  AnalysisResult r;
  r.hypotheses = check_hypotheses(cfg);
  r.graph = build_phase_graph(cfg);
  r.cycles = enumerate_directed_cycles(r.graph);
  r.band = band_width(r.cycles, cfg.nu);
  return r;
}

ordered_json analyze_report(const RunConfig& rc) {
  Stopwatch sw("analyze");
  const Prepared p = prepare(rc);
  ordered_json rep = report_header("analyze", rc, p);
  if (!p.ok) return rep;

  const PhaseGraph& g = p.analysis.graph;
  ordered_json graph;
  graph["vertex_count"] = g.vertices.size();
  graph["edge_count"] = g.edges.size();
  graph["tail_count"] = g.tails.size();
  graph["free_arcs"] = count_free_arcs(rc.problem);

  ordered_json verts = ordered_json::array();
  for (const auto& v : g.vertices)
    verts.push_back(ordered_json{
        {"id", v.id},
        {"kind", v.kind == VertexKind::Turning ? "turning" : "crossing"},
        {"x", v.x},
        {"xi", v.xi},
        {"branches", v.branches}});
  graph["vertices"] = verts;

  double max_residual = 0.0;
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges) {
    const double res = hamiltonian_flow_check(rc.problem, g, e);
    max_residual = std::max(max_residual, res);
    edges.push_back(ordered_json{{"id", e.id},
                                 {"branch", e.branch},
                                 {"sign", e.sign},
                                 {"x_lo", e.x_lo},
                                 {"x_hi", e.x_hi},
                                 {"tail", e.tail},
                                 {"head", e.head},
                                 {"time", e.time},
                                 {"action", e.action},
                                 {"flow_residual", res}});
  }
  graph["edges"] = edges;
  graph["max_flow_residual"] = max_residual;

  ordered_json tails = ordered_json::array();
  for (const auto& t : g.tails)
    tails.push_back(ordered_json{{"branch", t.branch},
                                 {"sign", t.sign},
                                 {"vertex", t.vertex},
                                 {"side", t.side},
                                 {"incoming", t.incoming}});
  graph["tails"] = tails;
  rep["graph"] = graph;

  ordered_json cyc;
  cyc["count"] = p.analysis.cycles.size();
  size_t pr = 0;
  ordered_json items = ordered_json::array();
  for (const auto& c : p.analysis.cycles) {
    if (c.is_pr) ++pr;
    items.push_back(ordered_json{{"edges", c.edges},
                                 {"time", c.time},
                                 {"action", c.action},
                                 {"is_pr", c.is_pr}});
  }
  cyc["pr_count"] = pr;
  cyc["items"] = items;
  rep["cycles"] = cyc;

  rep["band"] = band_json(p.analysis.band);
  rep["crossing_constants"] = crossing_constants_json(rc.problem, g);
  rep["tolerances"] = {{"root_tol", rc.problem.tol.root_tol},
                       {"quad_tol", rc.problem.tol.quad_tol},
                       {"newton_tol", rc.problem.tol.newton_tol}};
  return rep;
}

ordered_json amplitude_report(const RunConfig& rc) {
  Stopwatch sw("amplitude");
  const Prepared p = prepare(rc);
  ordered_json rep = report_header("amplitude", rc, p);
  if (!p.ok) return rep;

  const PhaseGraph& g = p.analysis.graph;
  const auto& cycles = p.analysis.cycles;
  size_t pr = 0;
  for (const auto& c : cycles)
    if (c.is_pr) ++pr;
  rep["cycle_count"] = cycles.size();
  rep["pr_count"] = pr;
  rep["crossing_constants"] = crossing_constants_json(rc.problem, g);

  if (pr == 0) {
    // no quantization condition: amplitudes are O(h^(nu-1/2))-suppressed
    const auto amp = propagate_amplitudes(g, cycles, rc.problem.E0,
                                          rc.h_list.front(), rc.problem);
    double max_edge = 0.0;
    for (const auto& [id, a] : amp.edge_amplitude)
      max_edge = std::max(max_edge, std::abs(a));
    rep["suppressed"] = true;
    rep["loop_factor"] = amp.loop_factor
                             ? ordered_json(complex_json(*amp.loop_factor))
                             : ordered_json(nullptr);
    rep["max_edge_amplitude"] = max_edge;
    return rep;
  }

  ordered_json grids = ordered_json::array();
  for (double h : rc.h_list) {
    const SearchRect rect =
        rc.search_rect ? *rc.search_rect : default_rect(rc, p, h);
    double max_abs = 0.0, min_abs = 0.0;
    grid_csv(g, cycles, rc.problem, h, rect, 41, 21, &max_abs, &min_abs);
    grids.push_back(ordered_json{{"h", h},
                                 {"rect", rect_json(rect)},
                                 {"n_re", 41},
                                 {"n_im", 21},
                                 {"file", "amplitude_h" + format_num(h) + ".csv"},
                                 {"max_abs_C", max_abs},
                                 {"min_abs_C", min_abs}});
  }
  rep["grids"] = grids;

  ordered_json bounds = ordered_json::array();
  for (size_t ci = 0; ci < cycles.size(); ++ci) {
    if (!cycles[ci].is_pr) continue;
    const SearchRect rect = rc.search_rect
                                ? *rc.search_rect
                                : default_rect(rc, p, rc.h_list.front());
    std::vector<complex> E_grid;
    for (int i = 0; i < 9; ++i)
      for (int k = 0; k < 5; ++k)
        E_grid.emplace_back(rect.re_lo + (rect.re_hi - rect.re_lo) * i / 8.0,
                            rect.im_lo + (rect.im_hi - rect.im_lo) * k / 4.0);
    const auto bc =
        amplitude_bound_check(g, cycles[ci], E_grid, rc.h_list, rc.problem);
    bounds.push_back(ordered_json{{"cycle", ci},
                                  {"checked", bc.checked},
                                  {"violations", bc.violations},
                                  {"max_ratio", bc.max_ratio}});
  }
  rep["bound_checks"] = bounds;

  if (cycles.size() == 1) {
    // two independent code paths for the same quantity
    double max_rel = 0.0;
    const double h = rc.h_list.front();
    const SearchRect rect =
        rc.search_rect ? *rc.search_rect : default_rect(rc, p, h);
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 5; ++k) {
        const complex E(rect.re_lo + (rect.re_hi - rect.re_lo) * i / 4.0,
                        rect.im_lo + (rect.im_hi - rect.im_lo) * k / 4.0);
        const auto amp = propagate_amplitudes(g, cycles, E, h, rc.problem);
        const complex c = cycle_amplitude(g, cycles[0], E, h, rc.problem);
        if (amp.loop_factor)
          max_rel = std::max(max_rel,
                             std::abs(*amp.loop_factor - c) / std::abs(c));
      }
    rep["loop_vs_cycle_max_rel_diff"] = max_rel;
  }
  return rep;
}

ordered_json candidates_report(const RunConfig& rc) {
  Stopwatch sw("candidates");
  const Prepared p = prepare(rc);
  ordered_json rep = report_header("candidates", rc, p);
  if (!p.ok) return rep;

  const PhaseGraph& g = p.analysis.graph;
  const auto& cycles = p.analysis.cycles;
  rep["band"] = band_json(p.analysis.band);

  bool mismatch = false;
  ordered_json runs = ordered_json::array();
  for (double h : rc.h_list) {
    const SearchRect rect =
        rc.search_rect ? *rc.search_rect : default_rect(rc, p, h);
    const auto res = find_resonance_candidates(g, cycles, h, rect, rc.problem);
    ordered_json run;
    run["h"] = h;
    run["rect"] = rect_json(rect);
    run["winding"] = res.winding;
    run["root_count"] = res.roots.size();
    run["newton_failures"] = res.newton_failures;
    run["newton_tol"] = rc.problem.tol.newton_tol;
    ordered_json roots = ordered_json::array();
    for (complex z : res.roots) roots.push_back(complex_json(z));
    run["roots"] = roots;
    ordered_json spacings = ordered_json::array();
    for (size_t i = 1; i < res.roots.size(); ++i)
      spacings.push_back(res.roots[i].real() - res.roots[i - 1].real());
    run["re_spacings"] = spacings;
    if (p.analysis.band.T_E0)
      run["predicted_re_spacing"] =
          2.0 * std::numbers::pi * h / *p.analysis.band.T_E0;
    if (static_cast<long>(res.roots.size()) != res.winding) mismatch = true;
    runs.push_back(run);
  }
  rep["runs"] = runs;
  rep["count_mismatch"] = mismatch;
  return rep;
}

ordered_json resonances_report(const RunConfig& rc, int jobs) {
  Stopwatch sw("resonances");
  const Prepared p = prepare(rc);
  ordered_json rep = report_header("resonances", rc, p);
  if (!p.ok) return rep;

  const int n = static_cast<int>(rc.h_list.size());
  std::vector<SpectrumResult> results(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int i) {
    const double h = rc.h_list[static_cast<size_t>(i)];
    Stopwatch hsw("resonances h=" + format_num(h));
    const SearchRect window =
        rc.search_rect ? *rc.search_rect : default_rect(rc, p, h);
    results[static_cast<size_t>(i)] = classify_resonances(
        rc.problem, h, window, rc.spectral.theta, rc.spectral.theta_prime,
        rc.spectral.grid, rc.spectral.class_tol_factor * h);
  });

  rep["solver"] = rc.spectral.grid.N <= DiscretizedOperator::dense_limit
                      ? "dense zgeev"
                      : "banded shift-invert";
  rep["grid"] = {{"L", rc.spectral.grid.L}, {"N", rc.spectral.grid.N}};
  ordered_json runs = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    const auto& sr = results[static_cast<size_t>(i)];
    ordered_json run;
    run["h"] = sr.h;
    run["theta"] = sr.theta;
    run["theta_prime"] = sr.theta_prime;
    run["class_tol"] = rc.spectral.class_tol_factor * sr.h;
    run["window"] = rect_json(rc.search_rect ? *rc.search_rect
                                             : default_rect(rc, p, sr.h));
    int res_count = 0;
    ordered_json eigs = ordered_json::array();
    for (const auto& ce : sr.eigenvalues) {
      if (ce.cls == EigClass::Resonance) ++res_count;
      eigs.push_back(ordered_json{{"re", ce.z.real()},
                                  {"im", ce.z.imag()},
                                  {"class", to_string(ce.cls)},
                                  {"displacement", finite_or_null(ce.displacement)}});
    }
    run["resonance_count"] = res_count;
    run["eigenvalues"] = eigs;
    run["file"] = "resonances_h" + format_num(sr.h) + ".csv";
    runs.push_back(run);
  }
  rep["runs"] = runs;
  return rep;
}

ordered_json verify_report(const RunConfig& rc, int jobs) {
  Stopwatch sw("verify");
  const Prepared p = prepare(rc);
  ordered_json rep = report_header("verify", rc, p);
  if (!p.ok) return rep;

  const double M = band_value(p, rc);
  rep["band"] = band_json(p.analysis.band);
  rep["M_used"] = M;
  rep["M_source"] = p.analysis.band.M ? "cycles" : "default";
  rep["safety_c"] = rc.safety_c;
  rep["grid"] = {{"L", rc.spectral.grid.L}, {"N", rc.spectral.grid.N}};
  rep["theta"] = rc.spectral.theta;
  rep["theta_prime"] = rc.spectral.theta_prime;

  const int n = static_cast<int>(rc.h_list.size());
  std::vector<BandTest> tests(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int i) {
    const double h = rc.h_list[static_cast<size_t>(i)];
    Stopwatch hsw("verify h=" + format_num(h));
    tests[static_cast<size_t>(i)] =
        verify_band_empty(rc.problem, {h}, M, rc.safety_c, rc.spectral.grid,
                          rc.spectral.theta, rc.spectral.theta_prime)
            .front();
  });

  bool all_empty = true;
  ordered_json runs = ordered_json::array();
  for (const auto& bt : tests) {
    all_empty = all_empty && bt.empty;
    runs.push_back(ordered_json{
        {"h", bt.h},
        {"band_radius", bt.band_radius},
        {"imag_floor", imag_floor(bt.h, rc.spectral.grid)},
        {"closest_distance", finite_or_null(bt.closest_distance)},
        {"margin", finite_or_null(bt.margin)},
        {"resonance_count", bt.resonance_count},
        {"empty", bt.empty}});
  }
  rep["runs"] = runs;
  rep["band_empty"] = all_empty;
  return rep;
}

std::string run_hash(const RunConfig& cfg) {
  const std::string s = config_to_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << bytes;
}

std::string edges_csv(const PhaseGraph& g) {
  std::ostringstream os;
  os << "id,branch,sign,x_lo,x_hi,tail,head,time,action\n";
  for (const auto& e : g.edges)
    os << e.id << ',' << e.branch << ',' << e.sign << ',' << csv_num(e.x_lo)
       << ',' << csv_num(e.x_hi) << ',' << e.tail << ',' << e.head << ','
       << csv_num(e.time) << ',' << csv_num(e.action) << '\n';
  return os.str();
}

std::string roots_csv(const ordered_json& run) {
  std::ostringstream os;
  os << "re,im\n";
  for (const auto& r : run.at("roots"))
    os << csv_num(r.at("re").get<double>()) << ','
       << csv_num(r.at("im").get<double>()) << '\n';
  return os.str();
}

std::string eigs_csv(const ordered_json& run) {
  std::ostringstream os;
  os << "re,im,class,displacement\n";
  for (const auto& e : run.at("eigenvalues")) {
    os << csv_num(e.at("re").get<double>()) << ','
       << csv_num(e.at("im").get<double>()) << ','
       << e.at("class").get<std::string>() << ',';
    if (e.at("displacement").is_null())
      os << "inf";
    else
      os << csv_num(e.at("displacement").get<double>());
    os << '\n';
  }
  return os.str();
}

} // namespace

RunOutcome run_subcommand(const std::string& name, const RunConfig& cfg,
                          const std::string& out_dir_override, int jobs) {
  RunOutcome out;
  std::vector<Artifact> artifacts;

  if (name == "analyze") {
    out.report = analyze_report(cfg);
    if (out.report.contains("graph")) {
      const Prepared p = prepare(cfg);  // graph for the CSV export
      artifacts.push_back({"analyze_edges.csv", edges_csv(p.analysis.graph)});
    }
  } else if (name == "amplitude") {
    out.report = amplitude_report(cfg);
    if (out.report.contains("grids")) {
      const Prepared p = prepare(cfg);
      for (const auto& gj : out.report.at("grids")) {
        const double h = gj.at("h").get<double>();
        SearchRect rect;
        rect.re_lo = gj.at("rect").at("re_lo").get<double>();
        rect.re_hi = gj.at("rect").at("re_hi").get<double>();
        rect.im_lo = gj.at("rect").at("im_lo").get<double>();
        rect.im_hi = gj.at("rect").at("im_hi").get<double>();
        double mx, mn;
        artifacts.push_back(
            {gj.at("file").get<std::string>(),
             grid_csv(p.analysis.graph, p.analysis.cycles, cfg.problem, h, rect,
                      gj.at("n_re").get<int>(), gj.at("n_im").get<int>(), &mx,
                      &mn)});
      }
    }
  } else if (name == "candidates") {
    out.report = candidates_report(cfg);
    if (out.report.contains("runs"))
      for (const auto& run : out.report.at("runs"))
        artifacts.push_back(
            {"candidates_h" + format_num(run.at("h").get<double>()) + ".csv",
             roots_csv(run)});
  } else if (name == "resonances") {
    out.report = resonances_report(cfg, jobs);
    if (out.report.contains("runs"))
      for (const auto& run : out.report.at("runs"))
        artifacts.push_back({run.at("file").get<std::string>(), eigs_csv(run)});
  } else if (name == "verify") {
    out.report = verify_report(cfg, jobs);
  } else {
    throw ValidationError("unknown subcommand \"" + name + "\"");
  }

  // exit-code policy: 1 hypothesis failure, 2 numerical failure, 3 band hit
  if (!out.report.at("hypotheses").at("passed").get<bool>())
    out.exit_code = 1;
  else if (name == "verify" && !out.report.at("band_empty").get<bool>())
    out.exit_code = 3;
  else if (name == "candidates" && out.report.at("count_mismatch").get<bool>())
    out.exit_code = 2;

  const fs::path base =
      out_dir_override.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir_override);
  const fs::path dir = base / ("run-" + run_hash(cfg));
  fs::create_directories(dir);
  write_file(dir / (name + ".json"), out.report.dump(2) + "\n");
  for (const auto& a : artifacts) write_file(dir / a.name, a.bytes);
  out.output_path = dir.string();
  return out;
}

} // namespace ratlas
