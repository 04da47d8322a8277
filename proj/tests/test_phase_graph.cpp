#include <algorithm>
#include <cmath>
#include <set>

#include <doctest/doctest.h>

#include "ratlas/phase_graph.hpp"

using namespace ratlas;

namespace {

PotentialSpec pot(std::vector<AnalyticTerm> terms) {
  return PotentialSpec(std::move(terms));
}

InteractionSpec unit_r0() {
  return InteractionSpec(PotentialSpec({AnalyticTerm(TermKind::Constant, 1.0)}),
                         PotentialSpec{});
}

// symmetric crossing: V1 = tanh x, V2 = -tanh x, E0 = 1/2
ProblemConfig case_sym() {
  ProblemConfig p;
  p.V1 = pot({AnalyticTerm(TermKind::ScaledTanh, 1.0)});
  p.V2 = pot({AnalyticTerm(TermKind::ScaledTanh, -1.0)});
  p.W = unit_r0();
  p.E0 = 0.5;
  p.nu = 1.0;
  return p;
}

// non-returning crossing: V1 = tanh 2x, V2 = 0.9 tanh x, E0 = 1/2
ProblemConfig case_open() {
  ProblemConfig p;
  p.V1 = pot({AnalyticTerm(TermKind::ScaledTanh, 1.0, 2.0)});
  p.V2 = pot({AnalyticTerm(TermKind::ScaledTanh, 0.9, 1.0)});
  p.W = unit_r0();
  p.E0 = 0.5;
  p.nu = 1.0;
  return p;
}

// three crossings + two turnings, 16 cycles of which 9 are pr
ProblemConfig case_bump() {
  ProblemConfig p;
  p.V1 = pot({AnalyticTerm(TermKind::ScaledTanh, 1.0)});
  p.V2 = pot({AnalyticTerm(TermKind::ScaledTanh, -1.0),
              AnalyticTerm(TermKind::Gaussian, 1.0, 10.0, 0.5)});
  p.W = unit_r0();
  p.E0 = 0.6;
  p.nu = 1.0;
  return p;
}

constexpr double kX1 = 0.54930614433405485;   // atanh(1/2)
constexpr double kT1 = 0.82418327228601595;   // quarter-cycle time, case_sym
constexpr double kS1 = 0.25110834777886533;   // quarter-cycle action, case_sym

} // namespace

TEST_CASE("symmetric crossing graph: 4 vertices, 4 edges, 1 pr cycle") {
  const PhaseGraph g = build_phase_graph(case_sym());
  REQUIRE(g.vertices.size() == 4);
  REQUIRE(g.edges.size() == 4);
  CHECK(g.tails.size() == 4);

  int crossings = 0, turnings = 0;
  for (const auto& v : g.vertices)
    (v.kind == VertexKind::Crossing ? crossings : turnings)++;
  CHECK(crossings == 2);
  CHECK(turnings == 2);

  for (const auto& v : g.vertices) {
    if (v.kind == VertexKind::Crossing) {
      CHECK(std::abs(v.x) < 1e-10);
      CHECK(std::abs(std::abs(v.xi) - std::sqrt(0.5)) < 1e-12);
    } else {
      CHECK(std::abs(std::abs(v.x) - kX1) < 1e-10);
    }
  }

  for (const auto& e : g.edges) {
    CHECK(std::abs(e.time - kT1) < 1e-8);
    CHECK(std::abs(e.action - kS1) < 1e-8);
  }

  const auto cycles = enumerate_directed_cycles(g);
  REQUIRE(cycles.size() == 1);
  CHECK(cycles[0].is_pr);
  CHECK(cycles[0].edges.size() == 4);
  CHECK(std::abs(cycles[0].time - 4 * kT1) < 1e-7);
  CHECK(std::abs(cycles[0].action - 4 * kS1) < 1e-7);

  // cycle time is the sum of its edge times, to roundoff
  double tsum = 0.0, ssum = 0.0;
  for (int id : cycles[0].edges) {
    tsum += g.edge(id).time;
    ssum += g.edge(id).action;
  }
  CHECK(std::abs(cycles[0].time - tsum) < 1e-12);
  CHECK(std::abs(cycles[0].action - ssum) < 1e-12);
}

TEST_CASE("degree law: crossing vertices 2-in 2-out, turning 1-in 1-out") {
  for (const ProblemConfig& cfg : {case_sym(), case_open(), case_bump()}) {
    const PhaseGraph g = build_phase_graph(cfg);
    for (const auto& v : g.vertices) {
      size_t in = g.in_edges(v.id).size(), out = g.out_edges(v.id).size();
      for (const auto& t : g.tails)
        if (t.vertex == v.id) (t.incoming ? in : out)++;
      const size_t want = v.kind == VertexKind::Crossing ? 2 : 1;
      CHECK(in == want);
      CHECK(out == want);
    }
  }
}

TEST_CASE("non-returning crossing: same counts, no cycles") {
  const PhaseGraph g = build_phase_graph(case_open());
  CHECK(g.vertices.size() == 4);
  CHECK(g.edges.size() == 4);
  CHECK(g.tails.size() == 4);

  std::set<double> turns;
  for (const auto& v : g.vertices)
    if (v.kind == VertexKind::Turning) turns.insert(v.x);
  REQUIRE(turns.size() == 2);
  CHECK(std::abs(*turns.begin() - 0.27465307216702742) < 1e-10);   // atanh(.5)/2
  CHECK(std::abs(*std::next(turns.begin()) - 0.626381484247684) < 1e-10); // atanh(5/9)

  const auto cycles = enumerate_directed_cycles(g);
  CHECK(cycles.empty());

  const BandWidth band = band_width(cycles, 1.0);
  CHECK(band.arbitrary);
  CHECK_FALSE(band.M.has_value());
  CHECK(band.value_or(5.0) == 5.0);
}

TEST_CASE("separated branches: crossing-free graph has no bounded edges") {
  ProblemConfig p = case_sym();
  p.V2 = pot({AnalyticTerm(TermKind::ScaledTanh, 1.0),
              AnalyticTerm(TermKind::Constant, 1.0)}); // V2 = V1 + 1
  const PhaseGraph g = build_phase_graph(p);
  CHECK(g.vertices.size() == 2);
  CHECK(g.edges.empty());
  CHECK(g.tails.size() == 4);
  CHECK(enumerate_directed_cycles(g).empty());
}

TEST_CASE("crossing without turning points: tails only") {
  ProblemConfig p = case_sym();
  p.E0 = 2.0; // above both potentials everywhere
  const PhaseGraph g = build_phase_graph(p);
  CHECK(g.vertices.size() == 2);
  CHECK(g.edges.empty());
  CHECK(g.tails.size() == 8);
  CHECK(enumerate_directed_cycles(g).empty());
}

TEST_CASE("bump configuration: multigraph with 16 cycles, 9 of them pr") {
  const PhaseGraph g = build_phase_graph(case_bump());
  CHECK(g.vertices.size() == 8);
  CHECK(g.edges.size() == 12);
  CHECK(g.tails.size() == 4);

  const auto cycles = enumerate_directed_cycles(g);
  CHECK(cycles.size() == 16);
  int pr = 0;
  for (const auto& c : cycles) {
    CHECK(c.edges.size() == 8);
    if (c.is_pr) pr++;
  }
  CHECK(pr == 9);

  CHECK_THROWS_AS(enumerate_directed_cycles(g, 5), CycleBudgetExceeded);
}

TEST_CASE("parallel-edge multigraph enumerates all four circuits") {
  PhaseGraph g;
  g.vertices.push_back({0, VertexKind::Crossing, 0.0, 1.0, {1, 2}});
  g.vertices.push_back({1, VertexKind::Crossing, 1.0, 1.0, {1, 2}});
  // two parallel edges each way, branch labels 1/2
  g.edges.push_back({0, 1, +1, 0.0, 1.0, 0, 1, 1.0, 1.0});
  g.edges.push_back({1, 2, +1, 0.0, 1.0, 0, 1, 1.0, 1.0});
  g.edges.push_back({2, 1, -1, 0.0, 1.0, 1, 0, 1.0, 1.0});
  g.edges.push_back({3, 2, -1, 0.0, 1.0, 1, 0, 1.0, 1.0});
  const auto cycles = enumerate_directed_cycles(g);
  CHECK(cycles.size() == 4);
  int pr = 0;
  for (const auto& c : cycles)
    if (c.is_pr) pr++;
  // branch sequences: (1,1) no switch, (1,2)/(2,1) two switches, (2,2) none
  CHECK(pr == 2);
}

TEST_CASE("turning and crossing locators") {
  const PotentialSpec V = pot({AnalyticTerm(TermKind::ScaledTanh, 1.0)});
  const auto roots = find_turning_points(V, 0.5, 40.0, 1e-12);
  REQUIRE(roots.size() == 1);
  CHECK(std::abs(roots[0] - kX1) < 1e-10);

  const auto xs = find_crossing_points(
      pot({AnalyticTerm(TermKind::ScaledTanh, 1.0)}),
      pot({AnalyticTerm(TermKind::ScaledTanh, -1.0)}), 0.5, 40.0, 1e-12);
  REQUIRE(xs.size() == 2); // upper and lower phase-space points
  CHECK(std::abs(xs[0].x) < 1e-12);
  CHECK(std::abs(std::abs(xs[0].xi) - std::sqrt(0.5)) < 1e-12);
}

TEST_CASE("degenerate turning point is rejected") {
  const PotentialSpec V = pot({AnalyticTerm(TermKind::SechSquared, 1.0)});
  CHECK_THROWS_AS(find_turning_points(V, 1.0, 40.0, 1e-12),
                  DegenerateTurningPoint);
}

TEST_CASE("tangential crossing is rejected") {
  ProblemConfig p = case_sym();
  p.V2 = p.V1;
  CHECK_THROWS_AS(build_phase_graph(p), TangentialCrossing);
}

TEST_CASE("crossing on the turning set is rejected") {
  ProblemConfig p = case_sym();
  p.E0 = 0.0; // V1(0) = V2(0) = 0 = E0
  CHECK_THROWS_AS(build_phase_graph(p), CrossingAtTurning);
}

TEST_CASE("trapping well below E0 is rejected") {
  const PotentialSpec well = pot({AnalyticTerm(TermKind::Gaussian, -1.0)});
  const NontrappingResult nr = check_nontrapping(well, -0.5, 40.0, 1e-12);
  CHECK_FALSE(nr.ok);
  CHECK_FALSE(nr.witness.empty());

  // vacuously fine: shell of V2 is empty
  const PotentialSpec flat = pot({AnalyticTerm(TermKind::Constant, 0.0)});
  CHECK(check_nontrapping(flat, -0.5, 40.0, 1e-12).ok);

  ProblemConfig p;
  p.V1 = well;
  p.V2 = flat;
  p.W = unit_r0();
  p.E0 = -0.5;
  p.nu = 1.0;
  CHECK_THROWS_AS(build_phase_graph(p), TopologyUnsupported);
}

TEST_CASE("flow check closes every bounded edge") {
  for (const ProblemConfig& cfg : {case_sym(), case_open()}) {
    const PhaseGraph g = build_phase_graph(cfg);
    REQUIRE(!g.edges.empty());
    for (const auto& e : g.edges) {
      const double res = hamiltonian_flow_check(cfg, g, e);
      INFO("edge ", e.id, " residual ", res);
      CHECK(res < 1e-6);
    }
  }
}

TEST_CASE("flow check is exactly zero on a degenerate edge") {
  PhaseGraph g;
  g.E0 = 0.5;
  g.vertices.push_back({0, VertexKind::Crossing, 0.3, 0.1, {1, 2}});
  Edge e;
  e.id = 0;
  e.branch = 1;
  e.sign = +1;
  e.x_lo = e.x_hi = 0.3;
  e.tail = e.head = 0;
  e.time = 0.0;
  const double res = hamiltonian_flow_check(case_sym(), g, e);
  CHECK(res <= 1e-14);
}

TEST_CASE("band width follows the maximal pr cycle time") {
  const PhaseGraph g = build_phase_graph(case_sym());
  const auto cycles = enumerate_directed_cycles(g);
  const BandWidth b1 = band_width(cycles, 1.0);
  REQUIRE(b1.M.has_value());
  REQUIRE(b1.T_E0.has_value());
  CHECK(std::abs(*b1.T_E0 - 4 * kT1) < 1e-7);
  CHECK(std::abs(*b1.M - 1.0 / *b1.T_E0) < 1e-12);
  CHECK_FALSE(b1.arbitrary);
  REQUIRE(b1.argmax_cycles.size() == 1);

  // wider order gap -> wider band, monotone in nu
  const BandWidth b2 = band_width(cycles, 1.5);
  CHECK(*b2.M > *b1.M);
  CHECK(std::abs(*b2.M - 2.0 / *b1.T_E0) < 1e-12);

  const BandWidth b3 = band_width(cycles, 0.6);
  CHECK(*b3.M < *b1.M);
}

TEST_CASE("graph construction is deterministic") {
  const PhaseGraph a = build_phase_graph(case_bump());
  const PhaseGraph b = build_phase_graph(case_bump());
  REQUIRE(a.edges.size() == b.edges.size());
  for (size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].id == b.edges[i].id);
    CHECK(a.edges[i].branch == b.edges[i].branch);
    CHECK(a.edges[i].sign == b.edges[i].sign);
    CHECK(a.edges[i].x_lo == b.edges[i].x_lo);
    CHECK(a.edges[i].x_hi == b.edges[i].x_hi);
    CHECK(a.edges[i].tail == b.edges[i].tail);
    CHECK(a.edges[i].head == b.edges[i].head);
  }
  const auto ca = enumerate_directed_cycles(a);
  const auto cb = enumerate_directed_cycles(b);
  REQUIRE(ca.size() == cb.size());
  for (size_t i = 0; i < ca.size(); ++i)
    CHECK(ca[i].edges == cb[i].edges);
}

TEST_CASE("mirror symmetry of the symmetric case") {
  const PhaseGraph g = build_phase_graph(case_sym());
  double tmin = 1e300, tmax = -1e300;
  for (const auto& e : g.edges) {
    tmin = std::min(tmin, e.time);
    tmax = std::max(tmax, e.time);
  }
  CHECK(tmax - tmin < 1e-10);
}
