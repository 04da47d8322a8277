#include "ratlas/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ratlas {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// fraction of the strip half-width we require as clearance from a pole
constexpr double kPoleMargin = 0.1;
}

std::string to_string(TermKind k) {
  switch (k) {
    case TermKind::Constant: return "constant";
    case TermKind::ScaledTanh: return "scaled-tanh";
    case TermKind::Gaussian: return "gaussian";
    case TermKind::SechSquared: return "sech-squared";
  }
  return "?";
}

TermKind term_kind_from_string(const std::string& s) {
  if (s == "constant") return TermKind::Constant;
  if (s == "scaled-tanh") return TermKind::ScaledTanh;
  if (s == "gaussian") return TermKind::Gaussian;
  if (s == "sech-squared") return TermKind::SechSquared;
  throw ValidationError("unknown term kind '" + s + "'");
}

AnalyticTerm::AnalyticTerm(TermKind k, double a, double s, double b)
    : kind(k), amplitude(a), slope(s), center(b) {
  if (kind != TermKind::Constant && !(slope > 0.0))
    throw ValidationError("term slope must be positive");
  if (!std::isfinite(amplitude) || !std::isfinite(slope) || !std::isfinite(center))
    throw ValidationError("term parameters must be finite");
}

double AnalyticTerm::value(double x) const {
  const double u = slope * (x - center);
  switch (kind) {
    case TermKind::Constant: return amplitude;
    case TermKind::ScaledTanh: return amplitude * std::tanh(u);
    case TermKind::Gaussian: return amplitude * std::exp(-u * (x - center));
    case TermKind::SechSquared: {
      const double c = std::cosh(u);
      return amplitude / (c * c);
    }
  }
  return 0.0;
}

double AnalyticTerm::derivative(double x) const {
  const double u = slope * (x - center);
  switch (kind) {
    case TermKind::Constant: return 0.0;
    case TermKind::ScaledTanh: {
      const double c = std::cosh(u);
      return amplitude * slope / (c * c);
    }
    case TermKind::Gaussian:
      return -2.0 * amplitude * slope * (x - center) * std::exp(-u * (x - center));
    case TermKind::SechSquared: {
      const double c = std::cosh(u);
      return -2.0 * amplitude * slope * std::tanh(u) / (c * c);
    }
  }
  return 0.0;
}

complex AnalyticTerm::value(const complex& z) const {
  const complex u = slope * (z - center);
  switch (kind) {
    case TermKind::Constant: return amplitude;
    case TermKind::ScaledTanh: return amplitude * std::tanh(u);
    case TermKind::Gaussian: return amplitude * std::exp(-u * (z - center));
    case TermKind::SechSquared: {
      const complex c = std::cosh(u);
      return amplitude / (c * c);
    }
  }
  return 0.0;
}

complex AnalyticTerm::derivative(const complex& z) const {
  const complex u = slope * (z - center);
  switch (kind) {
    case TermKind::Constant: return 0.0;
    case TermKind::ScaledTanh: {
      const complex c = std::cosh(u);
      return amplitude * slope / (c * c);
    }
    case TermKind::Gaussian:
      return -2.0 * amplitude * slope * (z - center) * std::exp(-u * (z - center));
    case TermKind::SechSquared: {
      const complex c = std::cosh(u);
      return -2.0 * amplitude * slope * std::tanh(u) / (c * c);
    }
  }
  return 0.0;
}

double AnalyticTerm::strip_halfwidth() const {
  switch (kind) {
    case TermKind::Constant:
    case TermKind::Gaussian:
      return kInf;
    case TermKind::ScaledTanh:
    case TermKind::SechSquared:
      // poles of tanh / sech^2 at center + i (2k+1) pi / (2 slope)
      return std::numbers::pi / (2.0 * slope);
  }
  return kInf;
}

double AnalyticTerm::pole_distance(const complex& z) const {
  const double w = strip_halfwidth();
  if (!std::isfinite(w)) return kInf;
  const double dx = z.real() - center;
  const double y = std::abs(z.imag());
  // nearest pole ordinate among (2k+1) w, k >= 0
  const double k = std::floor((y / w - 1.0) / 2.0 + 0.5);
  double dy = kInf;
  for (double kk : {k - 1.0, k, k + 1.0}) {
    if (kk < 0.0) continue;
    dy = std::min(dy, std::abs(y - (2.0 * kk + 1.0) * w));
  }
  if (!std::isfinite(dy)) dy = std::abs(y - w);
  return std::hypot(dx, dy);
}

double AnalyticTerm::limit_left() const {
  switch (kind) {
    case TermKind::Constant: return amplitude;
    case TermKind::ScaledTanh: return -amplitude;
    default: return 0.0;
  }
}

double AnalyticTerm::limit_right() const {
  switch (kind) {
    case TermKind::Constant: return amplitude;
    case TermKind::ScaledTanh: return amplitude;
    default: return 0.0;
  }
}

PotentialSpec::PotentialSpec(std::vector<AnalyticTerm> terms) : terms_(std::move(terms)) {}

EvalResult PotentialSpec::eval(double x) const {
  double v = 0.0, d = 0.0;
  for (const auto& t : terms_) {
    v += t.value(x);
    d += t.derivative(x);
  }
  return {v, d};
}

EvalResultC PotentialSpec::eval(const complex& z) const {
  complex v = 0.0, d = 0.0;
  for (const auto& t : terms_) {
    const double w = t.strip_halfwidth();
    if (std::isfinite(w)) {
      // a pole can be approached from inside the strip as well as outside
      const double dist = t.pole_distance(z);
      if (dist < kPoleMargin * w) {
        std::ostringstream os;
        os << "evaluation at (" << z.real() << ", " << z.imag() << ") within "
           << dist << " of a pole of " << to_string(t.kind)
           << " (strip half-width " << w << ")";
        throw StripViolation(os.str());
      }
    }
    v += t.value(z);
    d += t.derivative(z);
  }
  return {v, d};
}

double PotentialSpec::limit_left() const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.limit_left();
  return v;
}

double PotentialSpec::limit_right() const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.limit_right();
  return v;
}

double PotentialSpec::strip_halfwidth() const {
  double w = kInf;
  for (const auto& t : terms_) w = std::min(w, t.strip_halfwidth());
  return w;
}

double PotentialSpec::min_slope() const {
  double s = kInf;
  for (const auto& t : terms_)
    if (t.kind != TermKind::Constant) s = std::min(s, t.slope);
  return std::isfinite(s) ? s : 1.0;
}

namespace {
bool kind_is_bounded(TermKind k) {
  switch (k) {
    case TermKind::Constant:
    case TermKind::ScaledTanh:
    case TermKind::Gaussian:
    case TermKind::SechSquared:
      return true;
  }
  return false;
}
}

InteractionSpec::InteractionSpec(PotentialSpec r0, PotentialSpec r1)
    : r0_(std::move(r0)), r1_(std::move(r1)) {
  for (const auto* p : {&r0_, &r1_})
    for (const auto& t : p->terms())
      if (!kind_is_bounded(t.kind))
        throw ValidationError("interaction terms must be bounded on the real line");
}

complex InteractionSpec::symbol(double x, double xi) const {
  return complex(r0_.eval(x).value, r1_.eval(x).value * xi);
}

void ProblemConfig::validate() const {
  if (!(nu > 0.5)) throw ValidationError("nu must exceed 1/2");
  if (!(E0 > -kInf) || !std::isfinite(E0)) throw ValidationError("E0 must be finite");
  if (!(sector.theta0 > 0.0) || !(sector.theta0 < std::numbers::pi / 2))
    throw ValidationError("sector angle must lie in (0, pi/2)");
  if (!(sector.R0 > 0.0)) throw ValidationError("sector radius must be positive");
  if (!(tol.root_tol > 0.0) || !(tol.quad_tol > 0.0) || !(tol.newton_tol > 0.0))
    throw ValidationError("tolerances must be positive");
}

bool HypothesisReport::passed() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const HypothesisClause& c) { return c.passed; });
}

HypothesisReport check_hypotheses(const ProblemConfig& cfg) {
  HypothesisReport rep;
  auto add = [&rep](std::string name, bool ok, std::string detail) {
    rep.clauses.push_back({std::move(name), ok, std::move(detail)});
  };
  std::ostringstream os;

  const double w1 = cfg.V1.strip_halfwidth();
  const double w2 = cfg.V2.strip_halfwidth();
  const double wmin = std::min(w1, w2);
  os << "strip half-widths " << w1 << ", " << w2;
  add("analytic-in-strip", wmin > 0.0, os.str());

  // angle under which the strip covers the sector out to R0; informative
  // unless strict_sector is set
  const double implied = std::isfinite(wmin)
                             ? std::atan2(wmin, cfg.sector.R0)
                             : std::numbers::pi / 2;
  os.str("");
  os << "sector angle " << cfg.sector.theta0 << ", strip-implied angle " << implied;
  add("sector-within-strip", cfg.strict_sector ? cfg.sector.theta0 <= implied : true,
      os.str());

  const double v1m = cfg.V1.limit_left(), v1p = cfg.V1.limit_right();
  const double v2m = cfg.V2.limit_left(), v2p = cfg.V2.limit_right();
  os.str("");
  os << "v1 -> (" << v1m << ", " << v1p << "), v2 -> (" << v2m << ", " << v2p << ")";
  add("limits-exist", true, os.str());

  const double sep = 1e-12;
  add("E0-below-or-above-thresholds",
      std::abs(v1m - cfg.E0) > sep && std::abs(v1p - cfg.E0) > sep &&
          std::abs(v2m - cfg.E0) > sep && std::abs(v2p - cfg.E0) > sep,
      "E0 must not equal a limit at infinity");
  add("limits-separated",
      std::abs(v1m - v2m) > sep && std::abs(v1p - v2p) > sep,
      "branch limits must differ on each side");

  bool w_real_bounded = true;
  for (const auto* p : {&cfg.W.r0(), &cfg.W.r1()})
    for (const auto& t : p->terms())
      if (!std::isfinite(t.amplitude)) w_real_bounded = false;
  add("interaction-bounded", w_real_bounded, "coupling terms bounded on the real line");

  return rep;
}

} // namespace ratlas
