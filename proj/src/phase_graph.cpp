#include "ratlas/phase_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ratlas/flow.hpp"
#include "ratlas/log.hpp"
#include "ratlas/quadrature.hpp"

namespace ratlas {

namespace {

constexpr int kScanIntervals = 1000;

// Sign-change bracketing over [-window, window], bisection, then Newton
// polish: bisection leaves ~root_tol in the endpoint and the downstream
// time integral pays sqrt of that, so the root has to sit at rounding
// precision. Exact-zero samples count as a root only when the flanking
// signs differ; where both terms of a difference have underflowed the
// samples are zero without marking anything.
std::vector<double> scan_roots(const std::function<double(double)>& f,
                               const std::function<double(double)>& df,
                               double window, double root_tol) {
  const double step = 2.0 * window / kScanIntervals;
  std::vector<double> xs(kScanIntervals + 1), fs(kScanIntervals + 1);
  for (int i = 0; i <= kScanIntervals; ++i) {
    xs[i] = -window + i * step;
    fs[i] = f(xs[i]);
  }
  std::vector<double> roots;
  int i = 0;
  while (i <= kScanIntervals) {
    if (fs[i] == 0.0) {
      int j = i;
      while (j <= kScanIntervals && fs[j] == 0.0) ++j;
      const double before = (i > 0) ? fs[i - 1] : 0.0;
      const double after = (j <= kScanIntervals) ? fs[j] : 0.0;
      if (before * after < 0.0) {
        roots.push_back(0.5 * (xs[i] + xs[j - 1]));
      } else if (j == i + 1 && before * after > 0.0) {
        // isolated exact zero without a sign change: a tangency, surfaced so
        // the caller's nondegeneracy checks reject it
        roots.push_back(xs[i]);
      }
      i = j;
      continue;
    }
    if (i < kScanIntervals && fs[i] * fs[i + 1] < 0.0) {
      double lo = xs[i], hi = xs[i + 1], flo = fs[i];
      while (hi - lo > root_tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (flo * fm < 0.0)
          hi = mid;
        else
          lo = mid, flo = fm;
      }
      double r = 0.5 * (lo + hi);
      for (int it = 0; it < 4; ++it) {
        const double d = df(r);
        if (d == 0.0) break;
        const double delta = f(r) / d;
        if (!std::isfinite(delta) || std::abs(delta) > step) break;
        r -= delta;
        if (std::abs(delta) <= 1e-15 * std::max(1.0, std::abs(r))) break;
      }
      roots.push_back(r);
    }
    ++i;
  }
  return roots;
}

struct Station {
  double x;
  bool is_crossing;
  int up_vertex;    // vertex id of the xi>0 point (crossing) or the turning
  int down_vertex;  // xi<0 point; equals up_vertex for a turning
};

} // namespace

std::vector<int> PhaseGraph::out_edges(int vertex_id) const {
  std::vector<int> ids;
  for (const auto& e : edges)
    if (e.tail == vertex_id) ids.push_back(e.id);
  return ids;
}

std::vector<int> PhaseGraph::in_edges(int vertex_id) const {
  std::vector<int> ids;
  for (const auto& e : edges)
    if (e.head == vertex_id) ids.push_back(e.id);
  return ids;
}

double scan_window(const ProblemConfig& cfg) {
  const double slope =
      std::min({cfg.V1.min_slope(), cfg.V2.min_slope(), 1.0});
  return std::max({10.0, 40.0 / slope, 2.0 * cfg.sector.R0});
}

std::vector<double> find_turning_points(const PotentialSpec& V, double E0,
                                        double window, double root_tol) {
  auto f = [&V, E0](double x) { return V.eval(x).value - E0; };
  auto df = [&V](double x) { return V.eval(x).derivative; };
  auto roots = scan_roots(f, df, window, root_tol);
  for (double r : roots) {
    const double d = V.eval(r).derivative;
    if (std::abs(d) < root_tol) {
      std::ostringstream os;
      os << "turning point at x=" << r << " has |V'|=" << std::abs(d)
         << " below tolerance";
      throw DegenerateTurningPoint(os.str());
    }
  }
  return roots;
}

std::vector<Vertex> find_crossing_points(const PotentialSpec& V1,
                                         const PotentialSpec& V2, double E0,
                                         double window, double root_tol) {
  auto f = [&](double x) { return V1.eval(x).value - V2.eval(x).value; };
  auto df = [&](double x) { return V1.eval(x).derivative - V2.eval(x).derivative; };
  bool any_nonzero = false;
  for (int i = 0; i <= 100 && !any_nonzero; ++i)
    any_nonzero = f(-window + i * (window / 50.0)) != 0.0;
  if (!any_nonzero)
    throw TangentialCrossing("V1 - V2 vanishes identically on the scan window");
  std::vector<Vertex> out;
  for (double xc : scan_roots(f, df, window, root_tol)) {
    const auto e1 = V1.eval(xc);
    const auto e2 = V2.eval(xc);
    // crossings above the energy shell are inert; hypotheses only constrain
    // the on-shell ones
    if (e1.value - E0 > root_tol) continue;
    if (std::abs(e1.value - E0) <= root_tol) {
      std::ostringstream os;
      os << "crossing at x=" << xc << " lies at the energy level E0";
      throw CrossingAtTurning(os.str());
    }
    if (std::abs(e1.derivative - e2.derivative) < root_tol) {
      std::ostringstream os;
      os << "tangential crossing at x=" << xc;
      throw TangentialCrossing(os.str());
    }
    const double xi = std::sqrt(E0 - e1.value);
    Vertex up{-1, VertexKind::Crossing, xc, xi, {1, 2}};
    Vertex down{-1, VertexKind::Crossing, xc, -xi, {1, 2}};
    out.push_back(up);
    out.push_back(down);
  }
  return out;
}

NontrappingResult check_nontrapping(const PotentialSpec& V, double E0,
                                    double window, double root_tol) {
  std::vector<double> roots;
  try {
    roots = find_turning_points(V, E0, window, root_tol);
  } catch (const DegenerateTurningPoint& e) {
    return {false, e.what()};
  }
  // below-energy components are delimited by the turning points; any
  // bounded one is a well that traps the flow
  std::vector<double> pts = roots;
  pts.insert(pts.begin(), -window);
  pts.push_back(window);
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    if (V.eval(mid).value < E0 && i > 0 && i + 2 < pts.size()) {
      std::ostringstream os;
      os << "bounded well on (" << pts[i] << ", " << pts[i + 1] << ")";
      return {false, os.str()};
    }
  }
  return {true, ""};
}

HypothesisReport check_crossing_hypotheses(const ProblemConfig& cfg) {
  HypothesisReport rep;
  auto add = [&rep](std::string name, bool ok, std::string detail) {
    rep.clauses.push_back({std::move(name), ok, std::move(detail)});
  };
  const double window = scan_window(cfg);
  const double rtol = cfg.tol.root_tol;
  std::ostringstream os;

  std::vector<Vertex> crossings;
  try {
    crossings = find_crossing_points(cfg.V1, cfg.V2, cfg.E0, window, rtol);
  } catch (const Error& e) {
    add("crossings-transversal", false, e.what());
    return rep;
  }
  os << crossings.size() / 2 << " crossing location(s)";
  add("crossings-finite", true, os.str());

  bool transversal = true, elliptic = true;
  for (const auto& v : crossings) {
    const double gap =
        std::abs(cfg.V1.eval(v.x).derivative - cfg.V2.eval(v.x).derivative);
    if (gap <= rtol) transversal = false;
    const complex w = cfg.W.symbol(v.x, v.xi);
    if (std::abs(w) <= 0.0) elliptic = false;
  }
  add("crossings-transversal", transversal, "slope gap positive at each crossing");
  add("interaction-elliptic", elliptic, "|w| > 0 at each crossing vertex");

  const double sep = 1e-12;
  const bool separated =
      std::abs(cfg.V1.limit_left() - cfg.V2.limit_left()) > sep &&
      std::abs(cfg.V1.limit_right() - cfg.V2.limit_right()) > sep;
  add("not-asymptotic", separated, "v1 and v2 limits differ on both sides");

  for (int j : {1, 2}) {
    const auto nt = check_nontrapping(cfg.branch(j), cfg.E0, window, rtol);
    os.str("");
    os << "branch " << j << (nt.ok ? "" : ": " + nt.witness);
    add("non-trapping", nt.ok, os.str());
  }
  return rep;
}

EdgeIntegrals edge_integrals(const std::function<double(double)>& V, double x_lo,
                             double x_hi, double E0, double quad_tol) {
  if (!(x_hi > x_lo)) throw ValidationError("edge interval must have positive length");
  const auto t = edge_time(V, x_lo, x_hi, E0, quad_tol);
  const auto s = edge_action(V, x_lo, x_hi, E0, quad_tol);
  return {t.value, s.value};
}

PhaseGraph build_phase_graph(const ProblemConfig& cfg) {
  cfg.validate();
  const double window = scan_window(cfg);
  const double rtol = cfg.tol.root_tol;

  PhaseGraph g;
  g.E0 = cfg.E0;

  // crossing vertices first (sorted by x, upper before lower), then turnings
  auto crossings = find_crossing_points(cfg.V1, cfg.V2, cfg.E0, window, rtol);
  std::map<double, std::pair<int, int>> crossing_ids;  // x -> (up id, down id)
  for (auto& v : crossings) {
    v.id = static_cast<int>(g.vertices.size());
    g.vertices.push_back(v);
  }
  for (size_t i = 0; i + 1 < crossings.size(); i += 2)
    crossing_ids[crossings[i].x] = {crossings[i].id, crossings[i + 1].id};

  std::map<std::pair<int, double>, int> turning_ids;  // (branch, x) -> id
  for (int j : {1, 2}) {
    const auto& V = cfg.branch(j);
    for (double xt : find_turning_points(V, cfg.E0, window, rtol)) {
      for (const auto& [xc, ids] : crossing_ids)
        if (std::abs(xc - xt) < rtol * 10)
          throw CrossingAtTurning("crossing coincides with a turning point");
      Vertex v{static_cast<int>(g.vertices.size()), VertexKind::Turning, xt, 0.0, {j}};
      g.vertices.push_back(v);
      turning_ids[{j, xt}] = v.id;
    }
  }

  // per branch: components of {V < E0} and the stations on each
  for (int j : {1, 2}) {
    const auto& V = cfg.branch(j);
    auto value = [&V](double x) { return V.eval(x).value; };

    std::vector<double> turns;
    for (const auto& [key, id] : turning_ids)
      if (key.first == j) turns.push_back(key.second);
    std::sort(turns.begin(), turns.end());

    // breakpoints split the line into candidate intervals
    std::vector<double> pts = turns;
    pts.insert(pts.begin(), -window);
    pts.push_back(window);

    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      const double lo = pts[i], hi = pts[i + 1];
      if (value(0.5 * (lo + hi)) >= cfg.E0) continue;  // above energy: no shell

      const bool lo_is_turning = i > 0;
      const bool hi_is_turning = i + 2 < pts.size();
      if (lo_is_turning && hi_is_turning) {
        std::ostringstream os;
        os << "branch " << j << " has a bounded well on (" << lo << ", " << hi
           << ")";
        throw TopologyUnsupported(os.str());
      }

      std::vector<Station> st;
      if (lo_is_turning)
        st.push_back({lo, false, turning_ids[{j, lo}], turning_ids[{j, lo}]});
      for (const auto& [xc, ids] : crossing_ids)
        if (xc > lo && xc < hi) st.push_back({xc, true, ids.first, ids.second});
      if (hi_is_turning)
        st.push_back({hi, false, turning_ids[{j, hi}], turning_ids[{j, hi}]});
      std::sort(st.begin(), st.end(),
                [](const Station& a, const Station& b) { return a.x < b.x; });

      if (st.empty()) continue;  // free component: no vertex to attach anything to

      // bounded edges between consecutive stations, upper then lower
      for (size_t k = 0; k + 1 < st.size(); ++k) {
        const auto& a = st[k];
        const auto& b = st[k + 1];
        const auto integ = edge_integrals(value, a.x, b.x, cfg.E0, cfg.tol.quad_tol);
        Edge up{static_cast<int>(g.edges.size()), j, +1, a.x, b.x,
                a.up_vertex, b.up_vertex, integ.time, integ.action};
        g.edges.push_back(up);
        Edge down{static_cast<int>(g.edges.size()), j, -1, a.x, b.x,
                  b.down_vertex, a.down_vertex, integ.time, integ.action};
        g.edges.push_back(down);
      }

      // tails on the unbounded end(s)
      if (!lo_is_turning) {
        g.tails.push_back({j, +1, st.front().up_vertex, -1, true});
        g.tails.push_back({j, -1, st.front().down_vertex, -1, false});
      }
      if (!hi_is_turning) {
        g.tails.push_back({j, +1, st.back().up_vertex, +1, false});
        g.tails.push_back({j, -1, st.back().down_vertex, +1, true});
      }
    }
  }

  // degree law: crossing 2-in/2-out, turning 1-in/1-out, tails included
  std::vector<int> indeg(g.vertices.size(), 0), outdeg(g.vertices.size(), 0);
  for (const auto& e : g.edges) {
    outdeg[static_cast<size_t>(e.tail)]++;
    indeg[static_cast<size_t>(e.head)]++;
  }
  for (const auto& t : g.tails)
    (t.incoming ? indeg : outdeg)[static_cast<size_t>(t.vertex)]++;
  for (const auto& v : g.vertices) {
    const int want = v.kind == VertexKind::Crossing ? 2 : 1;
    if (indeg[static_cast<size_t>(v.id)] != want ||
        outdeg[static_cast<size_t>(v.id)] != want) {
      std::ostringstream os;
      os << "degree law violated at vertex " << v.id << " (x=" << v.x
         << "): " << indeg[static_cast<size_t>(v.id)] << "-in/"
         << outdeg[static_cast<size_t>(v.id)] << "-out";
      throw TopologyUnsupported(os.str());
    }
  }
  log::info("phase graph: " + std::to_string(g.vertices.size()) + " vertices, " +
            std::to_string(g.edges.size()) + " edges, " +
            std::to_string(g.tails.size()) + " tails");
  return g;
}

double hamiltonian_flow_check(const ProblemConfig& cfg, const PhaseGraph& g,
                              const Edge& e) {
  if (!(e.x_hi > e.x_lo)) return 0.0;
  const auto& V = cfg.branch(e.branch);
  auto dV = [&V](double x) { return V.eval(x).derivative; };

  const Vertex& tail = g.vertex(e.tail);
  const Vertex& head = g.vertex(e.head);
  const double xi_tail =
      tail.kind == VertexKind::Turning
          ? 0.0
          : e.sign * std::sqrt(std::max(0.0, cfg.E0 - V.eval(tail.x).value));
  const double xi_head =
      head.kind == VertexKind::Turning
          ? 0.0
          : e.sign * std::sqrt(std::max(0.0, cfg.E0 - V.eval(head.x).value));

  const double scale = std::max({1.0, std::abs(head.x), std::abs(xi_head)});
  if (head.kind == VertexKind::Turning) {
    const auto p = flow_to_turning(dV, {tail.x, xi_tail, 0.0}, 3.0 * e.time);
    return (std::hypot(p.x - head.x, p.xi) + std::abs(p.t - e.time)) / scale;
  }
  const auto p = flow_endpoint(dV, {tail.x, xi_tail, 0.0}, e.time);
  return std::hypot(p.x - head.x, p.xi - xi_head) / scale;
}

namespace {

bool cycle_is_pr(const PhaseGraph& g, const std::vector<int>& edge_ids) {
  int transitions = 0;
  const size_t n = edge_ids.size();
  for (size_t i = 0; i < n; ++i) {
    const int b0 = g.edge(edge_ids[i]).branch;
    const int b1 = g.edge(edge_ids[(i + 1) % n]).branch;
    if (b0 != b1) transitions++;
  }
  return transitions == 2;
}

} // namespace

std::vector<DirectedCycle> enumerate_directed_cycles(const PhaseGraph& g,
                                                     std::size_t budget) {
  // adjacency sorted by edge id for deterministic output
  std::vector<std::vector<int>> adj(g.vertices.size());
  for (const auto& e : g.edges) adj[static_cast<size_t>(e.tail)].push_back(e.id);

  std::vector<DirectedCycle> cycles;
  std::vector<char> on_path(g.vertices.size(), 0);
  std::vector<int> path_edges;

  // elementary circuits rooted at their smallest vertex id
  for (size_t root = 0; root < g.vertices.size(); ++root) {
    std::function<void(int)> dfs = [&](int v) {
      on_path[static_cast<size_t>(v)] = 1;
      for (int eid : adj[static_cast<size_t>(v)]) {
        const int next = g.edge(eid).head;
        if (static_cast<size_t>(next) == root) {
          path_edges.push_back(eid);
          DirectedCycle c;
          c.edges = path_edges;
          for (int id : c.edges) {
            c.time += g.edge(id).time;
            c.action += g.edge(id).action;
          }
          c.is_pr = cycle_is_pr(g, c.edges);
          cycles.push_back(std::move(c));
          if (cycles.size() > budget)
            throw CycleBudgetExceeded("directed cycle count exceeds budget");
          path_edges.pop_back();
        } else if (static_cast<size_t>(next) > root &&
                   !on_path[static_cast<size_t>(next)]) {
          path_edges.push_back(eid);
          dfs(next);
          path_edges.pop_back();
        }
      }
      on_path[static_cast<size_t>(v)] = 0;
    };
    dfs(static_cast<int>(root));
  }
  return cycles;
}

BandWidth band_width(const std::vector<DirectedCycle>& cycles, double nu) {
  BandWidth out;
  double tmax = 0.0;
  for (const auto& c : cycles)
    if (c.is_pr) tmax = std::max(tmax, c.time);
  if (tmax == 0.0) {
    out.arbitrary = true;
    return out;
  }
  out.T_E0 = tmax;
  out.M = (2.0 * nu - 1.0) / tmax;
  for (size_t i = 0; i < cycles.size(); ++i)
    if (cycles[i].is_pr && cycles[i].time >= tmax - 1e-12)
      out.argmax_cycles.push_back(i);
  return out;
}

} // namespace ratlas
