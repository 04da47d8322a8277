#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ratlas/potential.hpp"

namespace ratlas {

enum class VertexKind { Turning, Crossing };

struct Vertex {
  int id = -1;
  VertexKind kind = VertexKind::Turning;
  double x = 0.0;
  double xi = 0.0;               // 0 for turning vertices
  std::vector<int> branches;     // {j} for turning, {1,2} for crossing
};

struct Edge {
  int id = -1;
  int branch = 0;                // 1 or 2
  int sign = 0;                  // +1: xi>0, traversed left-to-right; -1: mirror
  double x_lo = 0.0, x_hi = 0.0;
  int tail = -1;                 // vertex where the flow enters the edge
  int head = -1;                 // vertex where it leaves
  double time = 0.0;
  double action = 0.0;
};

// Unbounded component of the energy shell minus the vertex set. Not an edge
// of the graph proper, but it carries the incoming/outgoing bookkeeping the
// amplitude propagation needs.
struct Tail {
  int branch = 0;
  int sign = 0;
  int vertex = -1;     // attachment vertex
  int side = 0;        // -1: extends to -infinity, +1: to +infinity
  bool incoming = false;
};

struct DirectedCycle {
  std::vector<int> edges;  // edge ids in traversal order
  double time = 0.0;
  double action = 0.0;
  bool is_pr = false;
};

struct PhaseGraph {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<Tail> tails;
  double E0 = 0.0;

  const Vertex& vertex(int id) const { return vertices.at(static_cast<size_t>(id)); }
  const Edge& edge(int id) const { return edges.at(static_cast<size_t>(id)); }
  std::vector<int> out_edges(int vertex_id) const;
  std::vector<int> in_edges(int vertex_id) const;
};

struct NontrappingResult {
  bool ok = false;
  std::string witness;  // names the offending well when !ok
};

// Half-width of the x-window that provably contains all roots for the term
// library: max(10, 40/min_slope, 2 R0).
double scan_window(const ProblemConfig& cfg);

// All real solutions of V(x)=E0 in [-window, window], bisection-refined to
// root_tol. Throws DegenerateTurningPoint when |V'| < root_tol at a root.
std::vector<double> find_turning_points(const PotentialSpec& V, double E0,
                                        double window, double root_tol);

// Crossing vertices: for each root x_c of V1-V2 with V1(x_c) < E0, the two
// phase-space points (x_c, +/-sqrt(E0-V1(x_c))). Ids are not yet assigned.
std::vector<Vertex> find_crossing_points(const PotentialSpec& V1,
                                         const PotentialSpec& V2, double E0,
                                         double window, double root_tol);

// True iff no root of V=E0 is degenerate and every component of {V < E0} is
// unbounded.
NontrappingResult check_nontrapping(const PotentialSpec& V, double E0,
                                    double window, double root_tol);

// Transversality, ellipticity and asymptotic separation at every crossing.
HypothesisReport check_crossing_hypotheses(const ProblemConfig& cfg);

struct EdgeIntegrals {
  double time = 0.0;
  double action = 0.0;
};

// time = int dx/(2|xi|), action = int |xi| dx over [x_lo, x_hi]; endpoints may
// be turning points. Rejects non-positive-length intervals.
EdgeIntegrals edge_integrals(const std::function<double(double)>& V, double x_lo,
                             double x_hi, double E0, double quad_tol);

PhaseGraph build_phase_graph(const ProblemConfig& cfg);

// Scaled phase-space distance between exp(time(e) H_p)(tail) and head, the
// independent ODE route against the quadrature time. Near a turning head the
// flow is stopped at the xi=0 crossing and the time mismatch is included.
double hamiltonian_flow_check(const ProblemConfig& cfg, const PhaseGraph& g,
                              const Edge& e);

// All elementary directed cycles, each annotated with time, action and the
// pr flag. Deterministic order: rooted at the smallest vertex id, edges in
// ascending id.
std::vector<DirectedCycle> enumerate_directed_cycles(const PhaseGraph& g,
                                                     std::size_t budget = 1000000);

struct BandWidth {
  std::optional<double> T_E0;  // max pr-cycle time
  std::optional<double> M;     // (2 nu - 1) / T_E0
  bool arbitrary = false;      // no cycles: any fixed width is admissible
  std::vector<size_t> argmax_cycles;  // indices of all cycles attaining T_E0
  double value_or(double fallback) const { return M ? *M : fallback; }
};

BandWidth band_width(const std::vector<DirectedCycle>& cycles, double nu);

} // namespace ratlas
