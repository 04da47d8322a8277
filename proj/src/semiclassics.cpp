#include "ratlas/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ratlas/log.hpp"
#include "ratlas/quadrature.hpp"

namespace ratlas {

namespace {
const complex kI(0.0, 1.0);
}

complex CrossingData::omega(double h, double nu) const {
  return kI * mu * std::pow(h, 2.0 * nu - 1.0);
}

complex phase_function(const std::function<double(double)>& V, double x_c, double x,
                       double E0, complex E, double quad_tol) {
  if (x == x_c) return 0.0;
  const double a = std::min(x_c, x), b = std::max(x_c, x);
  const double sgn = x > x_c ? 1.0 : -1.0;
  const auto act = edge_action(V, a, b, E0, quad_tol);
  const auto tim = edge_time(V, a, b, E0, quad_tol);
  return sgn * (act.value + (E - E0) * tim.value);
}

WkbCoefficients wkb_leading_coefficients(const ProblemConfig& cfg,
                                         const PhaseGraph& g, const Edge& e,
                                         double x, double margin) {
  if (!(x > e.x_lo && x < e.x_hi))
    throw TooCloseToVertex("evaluation point outside the open edge interval");
  for (const auto& v : g.vertices)
    if (std::abs(x - v.x) < margin) {
      std::ostringstream os;
      os << "evaluation point x=" << x << " within " << margin
         << " of vertex at x=" << v.x;
      throw TooCloseToVertex(os.str());
    }

  const double v1 = cfg.V1.eval(x).value;
  const double v2 = cfg.V2.eval(x).value;
  const double r0 = cfg.W.r0().eval(x).value;
  const double r1 = cfg.W.r1().eval(x).value;
  const double sgn = e.sign > 0 ? 1.0 : -1.0;  // the -/+ in the coefficient pair

  WkbCoefficients out;
  if (e.branch == 1) {
    const double q = cfg.E0 - v1;
    if (q <= 0.0) throw TooCloseToVertex("E0 - V1 not positive at evaluation point");
    const double quarter = std::pow(q, 0.25);
    out.a = 1.0 / quarter;
    out.b = (r0 - sgn * kI * r1 * std::sqrt(q)) / ((v1 - v2) * quarter);
  } else {
    const double q = cfg.E0 - v2;
    if (q <= 0.0) throw TooCloseToVertex("E0 - V2 not positive at evaluation point");
    const double quarter = std::pow(q, 0.25);
    out.b = 1.0 / quarter;
    out.a = (-r0 - sgn * kI * r1 * std::sqrt(q)) / ((v1 - v2) * quarter);
  }
  return out;
}

CrossingData crossing_constants(const ProblemConfig& cfg, const Vertex& rho) {
  if (rho.kind != VertexKind::Crossing)
    throw ValidationError("crossing constants requested at a non-crossing vertex");
  CrossingData cd;
  cd.vertex_id = rho.id;
  cd.x_c = rho.x;
  cd.xi_c = std::abs(rho.xi);
  if (!(cd.xi_c > 0.0)) throw ValidationError("crossing with vanishing xi");

  const double d1 = cfg.V1.eval(rho.x).derivative;
  const double d2 = cfg.V2.eval(rho.x).derivative;
  cd.steeper_branch = d1 > d2 ? 1 : 2;
  cd.slope_gap = std::abs(d1 - d2);
  if (!(cd.slope_gap > 0.0)) throw TangentialCrossing("zero slope gap at crossing");

  cd.w_val = cfg.W.symbol(rho.x, rho.xi);
  // both vertices of the crossing share the constants of the upper one
  const complex w_up = cfg.W.symbol(rho.x, cd.xi_c);
  cd.sigma_plus = std::polar(1.0, std::numbers::pi / 4.0) / std::sqrt(cd.xi_c) *
                  w_up * std::sqrt(std::numbers::pi / cd.slope_gap);
  cd.sigma_minus = std::conj(cd.sigma_plus);
  cd.mu = std::abs(w_up) / (2.0 * cd.xi_c * cd.slope_gap);
  return cd;
}

BranchData branch_data(const ProblemConfig& cfg, const PhaseGraph& g,
                       const Vertex& rho, int branch) {
  if (rho.kind != VertexKind::Crossing)
    throw ValidationError("branch data requested at a non-crossing vertex");
  const auto& V = cfg.branch(branch);

  // adjacent turning of this branch bounding the component containing x_c
  double left = -std::numeric_limits<double>::infinity();
  double right = std::numeric_limits<double>::infinity();
  for (const auto& v : g.vertices) {
    if (v.kind != VertexKind::Turning || v.branches[0] != branch) continue;
    if (v.x < rho.x) left = std::max(left, v.x);
    if (v.x > rho.x) right = std::min(right, v.x);
  }
  const bool left_bounds =
      std::isfinite(left) && V.eval(0.5 * (left + rho.x)).value < cfg.E0;
  const bool right_bounds =
      std::isfinite(right) && V.eval(0.5 * (rho.x + right)).value < cfg.E0;
  if (left_bounds == right_bounds)
    throw TopologyUnsupported(
        "crossing component must reach exactly one turning point on this branch");

  BranchData bd;
  bd.crossing_vertex = rho.id;
  bd.branch = branch;
  bd.x_turn = left_bounds ? left : right;
  const double a = std::min(rho.x, bd.x_turn), b = std::max(rho.x, bd.x_turn);
  auto value = [&V](double x) { return V.eval(x).value; };
  bd.S = edge_action(value, a, b, cfg.E0, cfg.tol.quad_tol).value;
  bd.T = 2.0 * edge_time(value, a, b, cfg.E0, cfg.tol.quad_tol).value;
  return bd;
}

complex maslov_factor(const BranchData& bd, complex E, double E0, double h) {
  if (!(h > 0.0)) throw ValidationError("h must be positive");
  return -kI * std::exp(kI * (2.0 * bd.S + (E - E0) * bd.T) / h);
}

TransferMatrix transfer_matrix(const CrossingData& cd, int sign, complex E,
                               double h, double nu) {
  (void)E;  // the leading-order entries are E-independent
  if (!(nu > 0.5)) throw ValidationError("nu must exceed 1/2");
  TransferMatrix tm;
  tm.sign = sign >= 0 ? +1 : -1;
  const complex omega = cd.omega(h, nu);
  const complex off = -kI * std::pow(h, nu - 0.5) * std::exp(-omega * std::log(h));
  tm.tau[0][0] = tm.tau[1][1] = 1.0;
  if (tm.sign > 0) {
    tm.tau[0][1] = off * cd.sigma_plus;   // into the steeper branch
    tm.tau[1][0] = off * cd.sigma_minus;
  } else {
    tm.tau[0][1] = off * cd.sigma_minus;  // slots swapped at the lower vertex
    tm.tau[1][0] = off * cd.sigma_plus;
  }
  return tm;
}

namespace {

complex edge_phase(const Edge& e, complex E, double E0, double h) {
  return std::exp(kI * (e.action + (E - E0) * e.time) / h);
}

// factor applied when passing vertex v from edge `in` to edge/tail branch
// `out_branch`: -i at a turning, 1 or the sigma transfer at a crossing
complex vertex_factor(const ProblemConfig& cfg, const Vertex& v, int in_branch,
                      int out_branch, complex /*E*/, double h) {
  if (v.kind == VertexKind::Turning) return -kI;
  if (in_branch == out_branch) return 1.0;
  const CrossingData cd = crossing_constants(cfg, v);
  const complex omega = cd.omega(h, cfg.nu);
  const complex off =
      -kI * std::pow(h, cfg.nu - 0.5) * std::exp(-omega * std::log(h));
  return off * (out_branch == cd.steeper_branch ? cd.sigma_plus : cd.sigma_minus);
}

} // namespace

AmplitudeMap propagate_amplitudes(const PhaseGraph& g,
                                  const std::vector<DirectedCycle>& cycles,
                                  complex E, double h, const ProblemConfig& cfg) {
  if (cycles.size() > 1)
    throw TopologyUnsupported(
        "amplitude propagation handles at most one cycle; use the quantization sum");

  AmplitudeMap out;
  for (size_t i = 0; i < g.tails.size(); ++i)
    if (g.tails[i].incoming) out.tail_amplitude[i] = 0.0;
  for (const auto& e : g.edges) out.edge_amplitude[e.id] = 0.0;

  std::vector<char> on_cycle(g.edges.size(), 0);
  if (cycles.size() == 1) {
    const auto& cyc = cycles.front();
    for (int id : cyc.edges) on_cycle[static_cast<size_t>(id)] = 1;

    // start the walk at the smallest edge id for determinism
    const size_t n = cyc.edges.size();
    size_t start = 0;
    for (size_t i = 1; i < n; ++i)
      if (cyc.edges[i] < cyc.edges[start]) start = i;

    complex alpha = 1.0;
    out.edge_amplitude[cyc.edges[start]] = alpha;
    for (size_t k = 0; k < n; ++k) {
      const Edge& cur = g.edge(cyc.edges[(start + k) % n]);
      const Edge& nxt = g.edge(cyc.edges[(start + k + 1) % n]);
      const Vertex& v = g.vertex(cur.head);
      alpha *= edge_phase(cur, E, g.E0, h) *
               vertex_factor(cfg, v, cur.branch, nxt.branch, E, h);
      if (k + 1 < n) out.edge_amplitude[nxt.id] = alpha;
    }
    out.loop_factor = alpha;  // multiplicative factor after one full loop
  }

  // push into the acyclic remainder until stable (it is a DAG, so at most
  // |edges| sweeps)
  for (size_t sweep = 0; sweep <= g.edges.size(); ++sweep) {
    bool changed = false;
    for (const auto& e : g.edges) {
      if (on_cycle[static_cast<size_t>(e.id)]) continue;
      const Vertex& v = g.vertex(e.tail);
      complex acc = 0.0;
      for (int in_id : g.in_edges(e.tail)) {
        const Edge& in = g.edge(in_id);
        acc += out.edge_amplitude[in.id] * edge_phase(in, E, g.E0, h) *
               vertex_factor(cfg, v, in.branch, e.branch, E, h);
      }
      if (acc != out.edge_amplitude[e.id]) {
        out.edge_amplitude[e.id] = acc;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // outgoing tails collect whatever reaches their attachment vertex
  for (size_t i = 0; i < g.tails.size(); ++i) {
    const Tail& t = g.tails[i];
    if (t.incoming) continue;
    const Vertex& v = g.vertex(t.vertex);
    complex acc = 0.0;
    for (int in_id : g.in_edges(t.vertex)) {
      const Edge& in = g.edge(in_id);
      acc += out.edge_amplitude[in.id] * edge_phase(in, E, g.E0, h) *
             vertex_factor(cfg, v, in.branch, t.branch, E, h);
    }
    out.tail_amplitude[i] = acc;
  }
  return out;
}

complex cycle_amplitude(const PhaseGraph& g, const DirectedCycle& cyc, complex E,
                        double h, const ProblemConfig& cfg) {
  if (!cyc.is_pr) throw NotPrCycle("cycle amplitude is defined for pr cycles");

  complex sigma_product = 1.0;
  double mu_sum = 0.0;
  int switches = 0, turns = 0;
  const size_t n = cyc.edges.size();
  for (size_t k = 0; k < n; ++k) {
    const Edge& cur = g.edge(cyc.edges[k]);
    const Edge& nxt = g.edge(cyc.edges[(k + 1) % n]);
    const Vertex& v = g.vertex(cur.head);
    if (v.kind == VertexKind::Turning) {
      turns++;
      continue;
    }
    if (cur.branch == nxt.branch) continue;
    const CrossingData cd = crossing_constants(cfg, v);
    sigma_product *=
        nxt.branch == cd.steeper_branch ? cd.sigma_plus : cd.sigma_minus;
    mu_sum += cd.mu;
    switches++;
  }
  if (switches != 2)
    throw NotPrCycle("pr cycle must switch branches exactly twice");

  // (-i)^(turns + switches) = 1 for every pr cycle (two of each)
  const complex prefactor = std::pow(-kI, turns + switches);
  const double p = 2.0 * cfg.nu - 1.0;
  const complex hpow =
      std::pow(h, p) * std::exp(-kI * mu_sum * std::pow(h, p) * std::log(h));
  return prefactor * sigma_product * hpow *
         std::exp(kI * (cyc.action + (E - g.E0) * cyc.time) / h);
}

complex quantization_function(const PhaseGraph& g,
                              const std::vector<DirectedCycle>& cycles, complex E,
                              double h, const ProblemConfig& cfg) {
  complex c = 0.0;
  int count = 0;
  for (const auto& cyc : cycles) {
    if (!cyc.is_pr) continue;
    c += cycle_amplitude(g, cyc, E, h, cfg);
    count++;
  }
  if (count == 0) throw NoCycles("quantization requires at least one pr cycle");
  return c;
}

BoundCheckResult amplitude_bound_check(const PhaseGraph& g, const DirectedCycle& cyc,
                                       const std::vector<complex>& E_grid,
                                       const std::vector<double>& h_grid,
                                       const ProblemConfig& cfg) {
  BoundCheckResult res;

  // |sigma sigma'| from the cycle's own crossings
  double sig = 1.0;
  const size_t n = cyc.edges.size();
  for (size_t k = 0; k < n; ++k) {
    const Edge& cur = g.edge(cyc.edges[k]);
    const Edge& nxt = g.edge(cyc.edges[(k + 1) % n]);
    const Vertex& v = g.vertex(cur.head);
    if (v.kind == VertexKind::Crossing && cur.branch != nxt.branch)
      sig *= std::abs(crossing_constants(cfg, v).sigma_plus);
  }
  const double K = sig * 1.01;
  const double p = 2.0 * cfg.nu - 1.0;

  for (double h : h_grid)
    for (complex E : E_grid) {
      const double lhs = std::abs(cycle_amplitude(g, cyc, E, h, cfg));
      const double rhs =
          K * std::pow(h, p) * std::exp(cyc.time * std::abs(E.imag()) / h);
      res.checked++;
      res.max_ratio = std::max(res.max_ratio, lhs / rhs);
      if (lhs > rhs) res.violations++;
    }
  return res;
}

namespace {

// exponential-sum form of C(E;h)-1 for fast evaluation during root search
struct QuantModel {
  std::vector<complex> A;   // per pr cycle
  std::vector<double> T;
  double E0 = 0.0, h = 0.0;

  complex f(complex E) const {
    complex c = -1.0;
    for (size_t i = 0; i < A.size(); ++i)
      c += A[i] * std::exp(kI * (E - E0) * T[i] / h);
    return c;
  }
  complex df(complex E) const {
    complex c = 0.0;
    for (size_t i = 0; i < A.size(); ++i)
      c += A[i] * (kI * T[i] / h) * std::exp(kI * (E - E0) * T[i] / h);
    return c;
  }
};

QuantModel build_model(const PhaseGraph& g, const std::vector<DirectedCycle>& cycles,
                       double h, const ProblemConfig& cfg) {
  QuantModel m;
  m.E0 = g.E0;
  m.h = h;
  for (const auto& cyc : cycles) {
    if (!cyc.is_pr) continue;
    m.A.push_back(cycle_amplitude(g, cyc, g.E0, h, cfg));  // E = E0 reference
    m.T.push_back(cyc.time);
  }
  if (m.A.empty()) throw NoCycles("candidate search requires a pr cycle");
  return m;
}

long contour_winding(const QuantModel& m, const SearchRect& r, int points) {
  std::vector<complex> corners = {
      {r.re_lo, r.im_lo}, {r.re_hi, r.im_lo}, {r.re_hi, r.im_hi}, {r.re_lo, r.im_hi}};
  const int per_side = points / 4;
  double total = 0.0;
  complex prev_f = m.f(corners[0]);
  double max_step = 0.0;
  for (int side = 0; side < 4; ++side) {
    const complex a = corners[static_cast<size_t>(side)];
    const complex b = corners[static_cast<size_t>((side + 1) % 4)];
    for (int k = 1; k <= per_side; ++k) {
      const complex z = a + (b - a) * (static_cast<double>(k) / per_side);
      const complex fz = m.f(z);
      if (std::abs(fz) < 1e-12)
        throw ContourThroughZero("quantization function vanishes on the contour");
      const double d = std::arg(fz / prev_f);
      max_step = std::max(max_step, std::abs(d));
      total += d;
      prev_f = fz;
    }
  }
  if (max_step > std::numbers::pi / 2 && points < 8192)
    return contour_winding(m, r, points * 2);  // phase under-sampled: refine
  return std::lround(total / (2.0 * std::numbers::pi));
}

} // namespace

CandidateSearchResult find_resonance_candidates(
    const PhaseGraph& g, const std::vector<DirectedCycle>& cycles, double h,
    SearchRect rect, const ProblemConfig& cfg) {
  if (!(rect.re_hi > rect.re_lo) || !(rect.im_hi > rect.im_lo))
    throw ValidationError("search rectangle must have positive extent");
  if (rect.im_hi > 1e-12)
    throw ValidationError("search rectangle must lie in the closed lower half-plane");

  const QuantModel model = build_model(g, cycles, h, cfg);

  CandidateSearchResult res;
  SearchRect r = rect;
  try {
    res.winding = contour_winding(model, r, 512);
  } catch (const ContourThroughZero&) {
    // jitter once and retry
    const double eps = 1e-3 * (r.re_hi - r.re_lo);
    r.re_lo -= eps;
    r.re_hi += eps;
    r.im_lo -= eps;
    res.winding = contour_winding(model, r, 512);
  }

  const double width = r.re_hi - r.re_lo, height = r.im_hi - r.im_lo;
  const double diag = std::hypot(width, height);
  const double ntol = cfg.tol.newton_tol;

  enum class Polish { Converged, Escaped, Exhausted };
  auto polish = [&](complex E, std::vector<complex>& sink) {
    for (int it = 0; it < 60; ++it) {
      const complex fe = model.f(E);
      const complex de = model.df(E);
      if (std::abs(de) == 0.0) return Polish::Exhausted;
      const complex step = fe / de;
      E -= step;
      if (std::abs(E.real() - 0.5 * (r.re_lo + r.re_hi)) > 5.0 * diag)
        return Polish::Escaped;
      if (std::abs(step) < ntol) {
        sink.push_back(E);
        return Polish::Converged;
      }
    }
    return Polish::Exhausted;
  };

  // a lattice seed that fails to converge is alarming; a grid seed that
  // leaves the neighborhood just sat outside every basin, so only count
  // the ones that stall
  auto collect = [&](int grid_n) {
    std::vector<complex> found;
    int failures = 0;
    // analytic seeds for the single-cycle case: the roots of A e^{izT/h} = 1
    if (model.A.size() == 1) {
      const complex lnA = std::log(model.A[0]);
      const double T = model.T[0];
      const long k_lo = std::lround((r.re_lo - model.E0) * T / (2 * std::numbers::pi * h)) - 2;
      const long k_hi = std::lround((r.re_hi - model.E0) * T / (2 * std::numbers::pi * h)) + 2;
      for (long k = k_lo; k <= k_hi; ++k) {
        const complex E =
            model.E0 + h * (2.0 * std::numbers::pi * k + kI * lnA) / T;
        if (polish(E, found) != Polish::Converged) failures++;
      }
    }
    for (int i = 0; i < grid_n; ++i)
      for (int j = 0; j < grid_n; ++j) {
        const complex seed(r.re_lo + (i + 0.5) * width / grid_n,
                           r.im_lo + (j + 0.5) * height / grid_n);
        if (polish(seed, found) == Polish::Exhausted) failures++;
      }
    // dedupe and clip to the original rectangle
    std::vector<complex> roots;
    std::sort(found.begin(), found.end(), [](complex a, complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    const double merge_tol = std::max(50.0 * ntol, 1e-10);
    for (complex z : found) {
      if (!rect.contains(z)) continue;
      bool dup = false;
      for (complex w : roots)
        if (std::abs(z - w) < merge_tol) dup = true;
      if (!dup) roots.push_back(z);
    }
    return std::make_pair(roots, failures);
  };

  // lattice seeds alone usually account for the full winding count; the
  // uniform grid is the fallback for multi-cycle models
  auto [roots, failures] = collect(0);
  int grid_n = 8;
  while (static_cast<long>(roots.size()) != res.winding && grid_n <= 64) {
    std::tie(roots, failures) = collect(grid_n);
    grid_n *= 2;
  }
  res.roots = std::move(roots);
  res.newton_failures = failures;
  if (static_cast<long>(res.roots.size()) != res.winding) {
    std::ostringstream os;
    os << "argument principle counts " << res.winding << " roots, polishing found "
       << res.roots.size();
    log::warn(os.str());
  }
  return res;
}

} // namespace ratlas
