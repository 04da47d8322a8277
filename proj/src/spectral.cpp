#include "ratlas/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "ratlas/log.hpp"

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace ratlas {

namespace {

const complex kI(0.0, 1.0);

// 4th-order centered stencils on offsets -2..2
constexpr double kD2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
constexpr double kD1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};

void check_decay(const PotentialSpec& V, double L, double theta, const char* name) {
  const complex end = L * std::polar(1.0, theta);
  const double dl = std::abs(V.eval(-end).value - V.limit_left());
  const double dr = std::abs(V.eval(end).value - V.limit_right());
  if (dl > 1e-8 || dr > 1e-8) {
    std::ostringstream os;
    os << name << " has not settled to its limit at |x| = " << L
       << " (deviation " << std::max(dl, dr) << "); enlarge L";
    throw ValidationError(os.str());
  }
}

} // namespace

DiscretizedOperator build_dilated_operator(const ProblemConfig& cfg,
                                           DilationContour contour, double h,
                                           GridSpec grid) {
  if (!(h > 0.0) || !(h < 1.0)) throw ValidationError("h must lie in (0, 1)");
  if (grid.N < 200) throw ValidationError("grid needs at least 200 interior points");
  if (!(grid.L > 0.0)) throw ValidationError("grid half-width must be positive");
  if (contour.theta < 0.0 || contour.theta >= cfg.sector.theta0)
    throw ValidationError("dilation angle must lie in [0, theta0)");
  check_decay(cfg.V1, grid.L, contour.theta, "V1");
  check_decay(cfg.V2, grid.L, contour.theta, "V2");

  const int N = grid.N;
  const double dx = grid.spacing();
  if (cfg.E0 > 0.0) {
    const double pts_per_wave = 2.0 * std::numbers::pi * h / (std::sqrt(cfg.E0) * dx);
    if (pts_per_wave < 8.0) {
      std::ostringstream os;
      os << "grid resolves only " << pts_per_wave
         << " points per wavelength at h = " << h << "; refine N";
      log::warn(os.str());
    }
  }

  DiscretizedOperator op;
  op.h = h;
  op.nu = cfg.nu;
  op.theta = contour.theta;
  op.grid = grid;

  const int n = 2 * N;
  const int ldab = op.kl + op.ku + 1;
  op.band.assign(static_cast<size_t>(ldab) * n, 0.0);
  const bool want_dense = N <= op.dense_limit;
  if (want_dense) op.dense.assign(static_cast<size_t>(n) * n, 0.0);

  // comp/grid -> interleaved row for the band, block row for the dense matrix
  auto add = [&](int ci, int i, int cj, int j, complex v) {
    if (v == complex(0.0)) return;
    const int bi = 2 * i + ci, bj = 2 * j + cj;       // interleaved
    op.band[static_cast<size_t>(op.ku + bi - bj) +
            static_cast<size_t>(ldab) * bj] += v;
    if (want_dense) {
      const int di = ci * N + i, dj = cj * N + j;     // block order, col-major
      op.dense[static_cast<size_t>(di) + static_cast<size_t>(n) * dj] += v;
    }
  };

  const complex eith = std::polar(1.0, contour.theta);
  const complex kin = -h * h * std::exp(complex(0.0, -2.0 * contour.theta));
  const complex e_m = std::exp(complex(0.0, -contour.theta));
  const double hnu = std::pow(h, cfg.nu);

  for (int i = 0; i < N; ++i) {
    const complex zi = (-grid.L + (i + 1) * dx) * eith;
    const complex v1 = cfg.V1.eval(zi).value;
    const complex v2 = cfg.V2.eval(zi).value;
    const complex r0 = cfg.W.r0().eval(zi).value;
    const complex r1 = cfg.W.r1().eval(zi).value;

    add(0, i, 0, i, v1);
    add(1, i, 1, i, v2);
    add(0, i, 1, i, hnu * r0);   // W block, multiplication part
    add(1, i, 0, i, hnu * r0);   // its transpose

    for (int k = -2; k <= 2; ++k) {
      const int j = i + k;
      if (j < 0 || j >= N) continue;  // zero-extension boundary
      const complex lap = kin * kD2[k + 2] / (12.0 * dx * dx);
      add(0, i, 0, j, lap);
      add(1, i, 1, j, lap);
      const complex drv = hnu * h * e_m * r1 * kD1[k + 2] / (12.0 * dx);
      add(0, i, 1, j, drv);        // W: r0 + h r1 d/dx, dilated
      add(1, j, 0, i, drv);        // W* block is the exact transpose
    }
  }
  return op;
}

void band_matvec(const DiscretizedOperator& op, const complex* x, complex* y) {
  const int n = op.dim();
  const int ldab = op.kl + op.ku + 1;
  std::fill(y, y + n, complex(0.0));
  for (int j = 0; j < n; ++j) {
    const complex xj = x[j];
    if (xj == complex(0.0)) continue;
    const int lo = std::max(0, j - op.ku), hi = std::min(n - 1, j + op.kl);
    const complex* col = op.band.data() + static_cast<size_t>(ldab) * j;
    for (int i = lo; i <= hi; ++i) y[i] += col[op.ku + i - j] * xj;
  }
}

namespace {

void sort_eigs(std::vector<complex>& v) {
  std::sort(v.begin(), v.end(), [](complex a, complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
}

std::vector<complex> filter_window(const std::vector<complex>& all,
                                   SearchRect window) {
  std::vector<complex> out;
  for (complex z : all)
    if (window.contains(z)) out.push_back(z);
  sort_eigs(out);
  return out;
}

// eigenvalues of a dense col-major matrix (destroyed), optionally with right
// eigenvectors
std::vector<complex> dense_eig(std::vector<complex>& a, int n,
                               std::vector<complex>* vr = nullptr) {
  std::vector<complex> w(static_cast<size_t>(n));
  if (vr) vr->assign(static_cast<size_t>(n) * n, 0.0);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', vr ? 'V' : 'N', n, a.data(), n, w.data(), nullptr,
      1, vr ? vr->data() : nullptr, vr ? n : 1);
  if (info != 0) {
    std::ostringstream os;
    os << "zgeev failed with info = " << info;
    throw EigensolveFailure(os.str());
  }
  return w;
}

} // namespace

std::vector<complex> compute_spectrum_dense(const DiscretizedOperator& op,
                                            SearchRect window) {
  if (!op.has_dense())
    throw EigensolveFailure("dense matrix not assembled at this grid size");
  std::vector<complex> a = op.dense;
  auto w = dense_eig(a, op.dim());
  return filter_window(w, window);
}

std::vector<complex> compute_spectrum_shift_invert(const DiscretizedOperator& op,
                                                   SearchRect window,
                                                   int subspace, int max_iter) {
  const int n = op.dim();
  const int m = std::min(subspace, n);
  const complex sigma(0.5 * (window.re_lo + window.re_hi),
                      0.5 * (window.im_lo + window.im_hi));

  // factor A - sigma I in the expanded band layout zgbtrf expects
  const int kl = op.kl, ku = op.ku;
  const int ldab_src = kl + ku + 1, ldab = 2 * kl + ku + 1;
  std::vector<complex> ab(static_cast<size_t>(ldab) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i)
      ab[static_cast<size_t>(kl + ku + i - j) + static_cast<size_t>(ldab) * j] =
          op.band[static_cast<size_t>(ku + i - j) +
                  static_cast<size_t>(ldab_src) * j];
    ab[static_cast<size_t>(kl + ku) + static_cast<size_t>(ldab) * j] -= sigma;
  }
  std::vector<lapack_int> ipiv(static_cast<size_t>(n));
  lapack_int info =
      LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), ldab, ipiv.data());
  if (info != 0) {
    std::ostringstream os;
    os << "banded factorization failed with info = " << info;
    throw EigensolveFailure(os.str());
  }

  // deterministic start block
  std::mt19937_64 gen(0x5eedULL);
  auto unit = [&gen]() {
    return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
  };
  std::vector<complex> V(static_cast<size_t>(n) * m);
  for (auto& v : V) v = complex(unit(), unit());

  auto mgs = [&](std::vector<complex>& Q) {
    for (int k = 0; k < m; ++k) {
      complex* qk = Q.data() + static_cast<size_t>(n) * k;
      for (int pass = 0; pass < 2; ++pass)
        for (int p = 0; p < k; ++p) {
          const complex* qp = Q.data() + static_cast<size_t>(n) * p;
          complex dot = 0.0;
          for (int i = 0; i < n; ++i) dot += std::conj(qp[i]) * qk[i];
          for (int i = 0; i < n; ++i) qk[i] -= dot * qp[i];
        }
      double nrm = 0.0;
      for (int i = 0; i < n; ++i) nrm += std::norm(qk[i]);
      nrm = std::sqrt(nrm);
      if (nrm < 1e-14) {  // degenerate column: replace and renormalize
        for (int i = 0; i < n; ++i) qk[i] = complex(unit(), unit());
        --k;
        continue;
      }
      for (int i = 0; i < n; ++i) qk[i] /= nrm;
    }
  };
  mgs(V);

  std::vector<complex> AV(static_cast<size_t>(n) * m), H, S, ritz, prev;
  int stable = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, m, ab.data(), ldab,
                          ipiv.data(), V.data(), n);
    if (info != 0) throw EigensolveFailure("banded solve failed");
    mgs(V);

    for (int k = 0; k < m; ++k)
      band_matvec(op, V.data() + static_cast<size_t>(n) * k,
                  AV.data() + static_cast<size_t>(n) * k);
    H.assign(static_cast<size_t>(m) * m, 0.0);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r) {
        complex dot = 0.0;
        const complex* vr = V.data() + static_cast<size_t>(n) * r;
        const complex* ac = AV.data() + static_cast<size_t>(n) * c;
        for (int i = 0; i < n; ++i) dot += std::conj(vr[i]) * ac[i];
        H[static_cast<size_t>(r) + static_cast<size_t>(m) * c] = dot;
      }
    std::vector<complex> Hc = H;
    ritz = dense_eig(Hc, m, &S);

    std::vector<complex> sorted = ritz;
    sort_eigs(sorted);
    if (!prev.empty() && prev.size() == sorted.size()) {
      double delta = 0.0, scale = 1.0;
      for (size_t i = 0; i < sorted.size(); ++i) {
        delta = std::max(delta, std::abs(sorted[i] - prev[i]));
        scale = std::max(scale, std::abs(sorted[i]));
      }
      stable = delta < 1e-10 * scale ? stable + 1 : 0;
      if (stable >= 2) break;
    }
    prev = std::move(sorted);
  }

  // accept ritz pairs with small residual, then clip to the window
  std::vector<complex> out;
  std::vector<complex> x(static_cast<size_t>(n)), ax(static_cast<size_t>(n));
  for (int k = 0; k < m; ++k) {
    std::fill(x.begin(), x.end(), complex(0.0));
    for (int p = 0; p < m; ++p) {
      const complex s = S[static_cast<size_t>(p) + static_cast<size_t>(m) * k];
      const complex* vp = V.data() + static_cast<size_t>(n) * p;
      for (int i = 0; i < n; ++i) x[i] += s * vp[i];
    }
    band_matvec(op, x.data(), ax.data());
    double res = 0.0, nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      res += std::norm(ax[i] - ritz[static_cast<size_t>(k)] * x[i]);
      nrm += std::norm(x[i]);
    }
    if (nrm == 0.0) continue;
    res = std::sqrt(res / nrm);
    if (res < 1e-7 * (1.0 + std::abs(ritz[static_cast<size_t>(k)])))
      out.push_back(ritz[static_cast<size_t>(k)]);
  }
  return filter_window(out, window);
}

std::vector<complex> compute_spectrum(const DiscretizedOperator& op,
                                      SearchRect window) {
  return op.has_dense() ? compute_spectrum_dense(op, window)
                        : compute_spectrum_shift_invert(op, window);
}

std::string to_string(EigClass c) {
  switch (c) {
    case EigClass::Resonance: return "resonance";
    case EigClass::Continuum: return "continuum";
    default: return "spurious";
  }
}

double imag_floor(double h, const GridSpec& grid) {
  const double dx = grid.spacing();
  return std::max(1e-8, 10.0 * dx * dx * dx * dx / (h * h));
}

SpectrumResult classify_resonances(const ProblemConfig& cfg, double h,
                                   SearchRect window, double theta,
                                   double theta_prime, GridSpec grid,
                                   double class_tol) {
  if (!(theta > 0.0) || !(theta_prime > theta))
    throw ValidationError("classification needs 0 < theta < theta_prime");
  if (window.im_hi > 1e-12)
    throw ValidationError("classification window must lie in the closed lower half-plane");
  // the theta-drift of a genuine resonance is set by the grid's dispersion
  // error, the same scale that floors the trustworthy imaginary parts; the
  // h-proportional term keeps fine grids strict
  if (class_tol <= 0.0)
    class_tol = std::max(1e-4 * h, 0.1 * imag_floor(h, grid));

  const auto eigs = compute_spectrum(
      build_dilated_operator(cfg, DilationContour{theta}, h, grid), window);
  const auto eigs_p = compute_spectrum(
      build_dilated_operator(cfg, DilationContour{theta_prime}, h, grid), window);

  std::vector<double> thresholds;
  for (double v : {cfg.V1.limit_left(), cfg.V1.limit_right(), cfg.V2.limit_left(),
                   cfg.V2.limit_right()}) {
    bool dup = false;
    for (double t : thresholds)
      if (std::abs(t - v) < 1e-12) dup = true;
    if (!dup) thresholds.push_back(v);
  }

  constexpr double ray_tol = 0.12;   // radians off the rotated continuum ray
  constexpr double ray_near = 0.02;  // blob around each threshold

  SpectrumResult res;
  res.theta = theta;
  res.theta_prime = theta_prime;
  res.h = h;
  res.grid = grid;
  for (complex z : eigs) {
    ClassifiedEigenvalue ce;
    ce.z = z;
    ce.displacement = std::numeric_limits<double>::infinity();
    for (complex zp : eigs_p)
      ce.displacement = std::min(ce.displacement, std::abs(z - zp));

    bool on_ray = false;
    for (double v : thresholds) {
      const complex w = z - v;
      if (std::abs(w) < ray_near) { on_ray = true; break; }
      if (std::abs(std::arg(w * std::polar(1.0, 2.0 * theta))) < ray_tol) {
        on_ray = true;
        break;
      }
    }
    if (on_ray)
      ce.cls = EigClass::Continuum;
    else if (ce.displacement < class_tol)
      ce.cls = EigClass::Resonance;
    else
      ce.cls = EigClass::Spurious;
    res.eigenvalues.push_back(ce);
  }
  return res;
}

std::vector<BandTest> verify_band_empty(const ProblemConfig& cfg,
                                        const std::vector<double>& h_list,
                                        double M, double c, GridSpec grid,
                                        double theta, double theta_prime) {
  if (!(M > 0.0) || !(c > 0.0) || !(c < 1.0))
    throw ValidationError("band verification needs M > 0 and c in (0, 1)");
  std::vector<BandTest> out;
  for (double h : h_list) {
    BandTest bt;
    bt.h = h;
    bt.band_radius = c * M * h * std::log(1.0 / h);
    const double span = std::max(0.2, 1.05 * bt.band_radius);
    SearchRect window{cfg.E0 - span, cfg.E0 + span, -span, 0.0};
    const auto cls =
        classify_resonances(cfg, h, window, theta, theta_prime, grid);
    const double floor = imag_floor(h, grid);
    bt.closest_distance = std::numeric_limits<double>::infinity();
    for (const auto& ce : cls.eigenvalues) {
      if (ce.cls != EigClass::Resonance) continue;
      bt.resonance_count++;
      if (ce.z.imag() >= -floor) continue;  // below the trust floor
      const double dist = std::abs(ce.z - cfg.E0);
      bt.closest_distance = std::min(bt.closest_distance, dist);
      if (dist < bt.band_radius) bt.empty = false;
    }
    bt.margin = bt.closest_distance / bt.band_radius;
    {
      std::ostringstream os;
      os << "band check h=" << h << " radius=" << bt.band_radius
         << " closest=" << bt.closest_distance << " empty=" << bt.empty;
      log::info(os.str());
    }
    out.push_back(bt);
  }
  return out;
}

} // namespace ratlas
