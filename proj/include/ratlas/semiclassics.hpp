#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ratlas/phase_graph.hpp"

namespace ratlas {

// Connection constants attached to one crossing vertex. sigma_plus is the
// transfer constant into the locally steeper branch, sigma_minus (= its
// conjugate) into the flatter one; both are shared by the upper and lower
// vertex of the same crossing location.
struct CrossingData {
  int vertex_id = -1;
  double x_c = 0.0;
  double xi_c = 0.0;        // |xi| at the crossing, > 0
  complex w_val;            // r0 + i r1 xi at this vertex (signed xi)
  double slope_gap = 0.0;   // steeper minus flatter slope, > 0
  int steeper_branch = 0;   // global branch index with the larger V' at x_c
  complex sigma_plus;
  complex sigma_minus;
  double mu = 0.0;

  complex omega(double h, double nu) const;  // i mu h^(2 nu - 1), purely imaginary
};

// Action/time pair for the arc crossing -> turning -> crossing on one branch:
// S one-way, T round-trip (= the phase-graph time of the two-edge arc).
struct BranchData {
  int crossing_vertex = -1;
  int branch = 0;
  double x_turn = 0.0;
  double S = 0.0;
  double T = 0.0;
};

struct TransferMatrix {
  complex tau[2][2];
  int sign = +1;  // +1 at the upper crossing vertex, -1 at the lower
};

// phi(x) = int_{x_c}^{x} sqrt(E0-V) + (E-E0) int_{x_c}^{x} dx/(2 sqrt(E0-V)).
complex phase_function(const std::function<double(double)>& V, double x_c, double x,
                       double E0, complex E, double quad_tol);

// Leading WKB coefficients of the two-component symbol on an edge at x:
// a = first component (branch 1), b = second (branch 2). On a branch-1 edge a
// is the order-1 coefficient and b the order-h^nu one; mirrored on branch 2.
struct WkbCoefficients {
  complex a;
  complex b;
};

WkbCoefficients wkb_leading_coefficients(const ProblemConfig& cfg,
                                         const PhaseGraph& g, const Edge& e,
                                         double x, double margin = 1e-6);

CrossingData crossing_constants(const ProblemConfig& cfg, const Vertex& rho);

// Arc data for (crossing vertex, branch): locates the turning point reached
// from the crossing along the given branch.
BranchData branch_data(const ProblemConfig& cfg, const PhaseGraph& g,
                       const Vertex& rho, int branch);

// m = -i exp(i (2 S + (E-E0) T) / h): reflection factor for the full arc.
complex maslov_factor(const BranchData& bd, complex E, double E0, double h);

// Leading-order connection matrix at a crossing vertex of the given sign,
// acting on (steeper-branch, flatter-branch) amplitude slots for sign +1 and
// on the swapped slots for sign -1.
TransferMatrix transfer_matrix(const CrossingData& cd, int sign, complex E,
                               double h, double nu);

struct AmplitudeMap {
  std::map<int, complex> edge_amplitude;
  std::map<size_t, complex> tail_amplitude;  // index into graph.tails
  std::optional<complex> loop_factor;
};

// Seeds incoming tails with 0 and (when the graph has exactly one cycle) one
// cycle edge with 1, then pushes amplitudes through crossing and turning
// factors along the orientation. Multi-cycle graphs are rejected.
AmplitudeMap propagate_amplitudes(const PhaseGraph& g,
                                  const std::vector<DirectedCycle>& cycles,
                                  complex E, double h, const ProblemConfig& cfg);

// C_gamma = sigma_1 sigma_2 h^(2nu-1-(omega_1+omega_2)) e^{i(S+(E-E0)T)/h}
// for a pr cycle; sigma_j is the into-branch constant at the crossing where
// the cycle switches onto its branch-j path.
complex cycle_amplitude(const PhaseGraph& g, const DirectedCycle& cyc, complex E,
                        double h, const ProblemConfig& cfg);

// C(E;h) = sum of cycle_amplitude over pr cycles (leading order).
complex quantization_function(const PhaseGraph& g,
                              const std::vector<DirectedCycle>& cycles, complex E,
                              double h, const ProblemConfig& cfg);

struct BoundCheckResult {
  int checked = 0;
  int violations = 0;
  double max_ratio = 0.0;  // max |C_gamma| / (K h^(2nu-1) e^(T |Im E| / h))
};

// |C_gamma(E;h)| <= K h^(2nu-1) e^(T_gamma |Im E|/h) with K = |sigma sigma'| 1.01
// over the grid.
BoundCheckResult amplitude_bound_check(const PhaseGraph& g, const DirectedCycle& cyc,
                                       const std::vector<complex>& E_grid,
                                       const std::vector<double>& h_grid,
                                       const ProblemConfig& cfg);

struct SearchRect {
  double re_lo = 0.0, re_hi = 0.0;
  double im_lo = 0.0, im_hi = 0.0;
  bool contains(complex z) const {
    return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo &&
           z.imag() <= im_hi;
  }
};

struct CandidateSearchResult {
  std::vector<complex> roots;  // sorted by (Re, Im)
  long winding = 0;            // argument-principle zero count on the rectangle
  int newton_failures = 0;
};

// Roots of C(E;h)=1 inside the rectangle: boundary winding count plus
// Newton polishing from a seed grid, deduplicated to newton_tol.
CandidateSearchResult find_resonance_candidates(
    const PhaseGraph& g, const std::vector<DirectedCycle>& cycles, double h,
    SearchRect rect, const ProblemConfig& cfg);

} // namespace ratlas
