#pragma once

#include <vector>

#include "ratlas/potential.hpp"
#include "ratlas/semiclassics.hpp"

namespace ratlas {

struct DilationContour {
  double theta = 0.3;  // uniform dilation x -> x e^{i theta}
};

struct GridSpec {
  double L = 12.0;
  int N = 1600;
  double spacing() const { return 2.0 * L / (N + 1); }
};

// Discretization of the dilated block operator on interior grid points.
// Band storage (general band, kl=ku=5 in interleaved component ordering) is
// always assembled; the dense column-major matrix only up to dense_limit.
struct DiscretizedOperator {
  double h = 0.0;
  double nu = 1.0;
  double theta = 0.0;
  GridSpec grid;
  std::vector<complex> dense;  // 2N x 2N column-major; empty above dense_limit
  std::vector<complex> band;   // (kl+ku+1) x 2N column-major band rows
  static constexpr int kl = 5, ku = 5;
  static constexpr int dense_limit = 2500;  // per-component N

  int dim() const { return 2 * grid.N; }
  bool has_dense() const { return !dense.empty(); }
};

DiscretizedOperator build_dilated_operator(const ProblemConfig& cfg,
                                           DilationContour contour, double h,
                                           GridSpec grid);

// y = A x from the band storage.
void band_matvec(const DiscretizedOperator& op, const complex* x, complex* y);

// All eigenvalues inside the window. Dense path: LAPACK zgeev; banded path:
// shift-invert subspace iteration centered on the window.
std::vector<complex> compute_spectrum(const DiscretizedOperator& op,
                                      SearchRect window);

std::vector<complex> compute_spectrum_dense(const DiscretizedOperator& op,
                                            SearchRect window);

std::vector<complex> compute_spectrum_shift_invert(const DiscretizedOperator& op,
                                                   SearchRect window,
                                                   int subspace = 48,
                                                   int max_iter = 60);

enum class EigClass { Resonance, Continuum, Spurious };

std::string to_string(EigClass c);

struct ClassifiedEigenvalue {
  complex z;              // position in the theta run
  EigClass cls = EigClass::Spurious;
  double displacement = 0.0;  // distance to the nearest theta' eigenvalue
};

struct SpectrumResult {
  std::vector<ClassifiedEigenvalue> eigenvalues;
  double theta = 0.0, theta_prime = 0.0, h = 0.0;
  GridSpec grid;
};

// Two-run classifier: eigenvalues matched across theta and theta' by nearest
// neighbor; stable ones are resonances unless they sit on a rotated
// essential-spectrum ray from a threshold, which makes them continuum.
SpectrumResult classify_resonances(const ProblemConfig& cfg, double h,
                                   SearchRect window, double theta,
                                   double theta_prime, GridSpec grid,
                                   double class_tol = -1.0);

// Discretization noise floor under which imaginary parts are not trusted.
double imag_floor(double h, const GridSpec& grid);

struct BandTest {
  double h = 0.0;
  double band_radius = 0.0;       // c * M * h * log(1/h)
  double closest_distance = 0.0;  // nearest qualifying resonance to E0
  double margin = 0.0;            // closest_distance / band_radius
  bool empty = true;
  int resonance_count = 0;        // classified resonances in the scan window
};

std::vector<BandTest> verify_band_empty(const ProblemConfig& cfg,
                                        const std::vector<double>& h_list,
                                        double M, double c, GridSpec grid,
                                        double theta, double theta_prime);

} // namespace ratlas
