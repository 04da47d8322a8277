#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ratlas/errors.hpp"

namespace ratlas {

using complex = std::complex<double>;

enum class TermKind { Constant, ScaledTanh, Gaussian, SechSquared };

std::string to_string(TermKind k);
TermKind term_kind_from_string(const std::string& s);

// One analytic building block of a potential: c, a tanh(s(x-b)),
// a exp(-s(x-b)^2) or a sech^2(s(x-b)).  slope s must be positive for the
// non-constant kinds.
struct AnalyticTerm {
  TermKind kind = TermKind::Constant;
  double amplitude = 0.0;
  double slope = 1.0;
  double center = 0.0;

  AnalyticTerm() = default;
  AnalyticTerm(TermKind k, double a, double s = 1.0, double b = 0.0);

  double value(double x) const;
  double derivative(double x) const;
  complex value(const complex& z) const;
  complex derivative(const complex& z) const;

  // half-width of the strip around the real axis in which the term is
  // guaranteed analytic (inf for entire kinds)
  double strip_halfwidth() const;
  // distance from z to the nearest pole (inf for entire kinds)
  double pole_distance(const complex& z) const;

  double limit_left() const;
  double limit_right() const;
};

struct EvalResult {
  double value;
  double derivative;
};
struct EvalResultC {
  complex value;
  complex derivative;
};

// Sum of analytic terms.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  explicit PotentialSpec(std::vector<AnalyticTerm> terms);

  const std::vector<AnalyticTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  EvalResult eval(double x) const;
  // complex evaluation; throws StripViolation near a pole of any term
  EvalResultC eval(const complex& z) const;

  double operator()(double x) const { return eval(x).value; }

  double limit_left() const;
  double limit_right() const;
  double strip_halfwidth() const;  // min over terms
  // smallest slope parameter among non-constant terms (1 if none): sets the
  // scan window for root searches
  double min_slope() const;

 private:
  std::vector<AnalyticTerm> terms_;
};

// Off-diagonal coupling W = r0(x) + i r1(x) h D_x.  Terms must be bounded on
// the real line; the closed term library only admits bounded kinds, the check
// guards future extension.
class InteractionSpec {
 public:
  InteractionSpec() = default;
  InteractionSpec(PotentialSpec r0, PotentialSpec r1);

  const PotentialSpec& r0() const { return r0_; }
  const PotentialSpec& r1() const { return r1_; }

  // symbol w(x, xi) = r0(x) + i r1(x) xi
  complex symbol(double x, double xi) const;

 private:
  PotentialSpec r0_, r1_;
};

struct SectorSpec {
  double theta0 = 0.5;
  double R0 = 5.0;
};

struct Tolerances {
  double root_tol = 1e-12;
  double quad_tol = 1e-10;
  double newton_tol = 1e-10;
};

struct ProblemConfig {
  PotentialSpec V1, V2;
  InteractionSpec W;
  double E0 = 0.0;
  double nu = 1.0;
  SectorSpec sector;
  Tolerances tol;
  bool strict_sector = false;

  // structural validation (nu > 1/2, sane sector); throws ValidationError
  void validate() const;
  const PotentialSpec& branch(int j) const { return j == 1 ? V1 : V2; }
};

struct HypothesisClause {
  std::string name;
  bool passed;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisClause> clauses;
  bool passed() const;
};

// Analyticity / limit-separation hypotheses of the two-level model:
// every clause is reported, failures never throw.
HypothesisReport check_hypotheses(const ProblemConfig& cfg);

} // namespace ratlas
