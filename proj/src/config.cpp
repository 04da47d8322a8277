#include "ratlas/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ratlas {

using ordered_json = nlohmann::ordered_json;

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) fail("unknown key \"" + it.key() + "\" in " + where);
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double require_number(const json& obj, const std::string& where, const char* key) {
  const json* v = find(obj, key);
  if (!v) fail(where + " is missing required key \"" + key + "\"");
  if (!v->is_number()) fail(where + "." + key + " must be a number");
  return v->get<double>();
}

double number_or(const json& obj, const std::string& where, const char* key,
                 double def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number()) fail(where + "." + key + " must be a number");
  return v->get<double>();
}

AnalyticTerm parse_term(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where + " entries must be objects");
  check_keys(j, where, {"kind", "amplitude", "slope", "center"});
  const json* kind = find(j, "kind");
  if (!kind || !kind->is_string()) fail(where + " needs a string \"kind\"");
  const TermKind k = term_kind_from_string(kind->get<std::string>());
  const double a = require_number(j, where, "amplitude");
  const double s = number_or(j, where, "slope", 1.0);
  const double b = number_or(j, where, "center", 0.0);
  return AnalyticTerm(k, a, s, b);
}

PotentialSpec parse_terms(const json& parent, const std::string& scope,
                          const char* key, bool required) {
  const json* arr = find(parent, key);
  if (!arr) {
    if (required) fail(scope + " is missing required key \"" + key + "\"");
    return PotentialSpec{};
  }
  if (!arr->is_array()) fail(scope + "." + key + " must be an array of terms");
  std::vector<AnalyticTerm> terms;
  for (size_t i = 0; i < arr->size(); ++i)
    terms.push_back(
        parse_term((*arr)[i], scope + "." + key + "[" + std::to_string(i) + "]"));
  return PotentialSpec(std::move(terms));
}

ProblemConfig parse_problem(const json& j) {
  if (!j.is_object()) fail("\"problem\" must be an object");
  check_keys(j, "problem",
             {"V1", "V2", "r0", "r1", "E0", "nu", "sector", "tolerances",
              "strict_sector"});
  ProblemConfig p;
  p.V1 = parse_terms(j, "problem", "V1", true);
  p.V2 = parse_terms(j, "problem", "V2", true);
  p.W = InteractionSpec(parse_terms(j, "problem", "r0", false),
                        parse_terms(j, "problem", "r1", false));
  p.E0 = require_number(j, "problem", "E0");
  p.nu = require_number(j, "problem", "nu");
  if (!(p.nu > 0.5)) fail("nu must exceed 1/2");

  if (const json* s = find(j, "sector")) {
    if (!s->is_object()) fail("problem.sector must be an object");
    check_keys(*s, "problem.sector", {"theta0", "R0"});
    p.sector.theta0 = number_or(*s, "problem.sector", "theta0", p.sector.theta0);
    p.sector.R0 = number_or(*s, "problem.sector", "R0", p.sector.R0);
  }
  if (const json* t = find(j, "tolerances")) {
    if (!t->is_object()) fail("problem.tolerances must be an object");
    check_keys(*t, "problem.tolerances", {"root_tol", "quad_tol", "newton_tol"});
    p.tol.root_tol = number_or(*t, "problem.tolerances", "root_tol", p.tol.root_tol);
    p.tol.quad_tol = number_or(*t, "problem.tolerances", "quad_tol", p.tol.quad_tol);
    p.tol.newton_tol =
        number_or(*t, "problem.tolerances", "newton_tol", p.tol.newton_tol);
  }
  if (const json* f = find(j, "strict_sector")) {
    if (!f->is_boolean()) fail("problem.strict_sector must be a boolean");
    p.strict_sector = f->get<bool>();
  }
  p.validate();
  return p;
}

} // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    const size_t stop = e.byte > 0 ? e.byte - 1 : 0;
    for (size_t i = 0; i < stop && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col << ": " << e.what();
    throw ParseError(os.str());
  }

  if (!j.is_object()) fail("config root must be an object");
  check_keys(j, "config",
             {"problem", "h_list", "search_rect", "spectral", "safety_c",
              "band_M_default", "output_dir"});

  RunConfig rc;
  const json* prob = find(j, "problem");
  if (!prob) fail("config is missing required key \"problem\"");
  rc.problem = parse_problem(*prob);

  const json* hs = find(j, "h_list");
  if (!hs || !hs->is_array() || hs->empty())
    fail("config needs a non-empty \"h_list\" array");
  for (const auto& v : *hs) {
    if (!v.is_number()) fail("h_list entries must be numbers");
    const double h = v.get<double>();
    if (!(h > 0.0) || !(h < 1.0)) fail("h values must lie in (0, 1)");
    rc.h_list.push_back(h);
  }
  for (size_t i = 1; i < rc.h_list.size(); ++i)
    if (!(rc.h_list[i] < rc.h_list[i - 1])) fail("h_list must be descending");

  if (const json* r = find(j, "search_rect")) {
    if (!r->is_object()) fail("search_rect must be an object");
    check_keys(*r, "search_rect", {"re_lo", "re_hi", "im_lo", "im_hi"});
    SearchRect rect;
    rect.re_lo = require_number(*r, "search_rect", "re_lo");
    rect.re_hi = require_number(*r, "search_rect", "re_hi");
    rect.im_lo = require_number(*r, "search_rect", "im_lo");
    rect.im_hi = require_number(*r, "search_rect", "im_hi");
    if (!(rect.re_lo < rect.re_hi) || !(rect.im_lo < rect.im_hi))
      fail("search_rect must have positive extent");
    if (rect.im_hi > 0.0) fail("search_rect must lie in {Im E <= 0}");
    rc.search_rect = rect;
  }

  if (const json* s = find(j, "spectral")) {
    if (!s->is_object()) fail("spectral must be an object");
    check_keys(*s, "spectral", {"theta", "theta_prime", "L", "N", "class_tol_factor"});
    rc.spectral.theta = number_or(*s, "spectral", "theta", rc.spectral.theta);
    rc.spectral.theta_prime =
        number_or(*s, "spectral", "theta_prime", rc.spectral.theta_prime);
    rc.spectral.grid.L = number_or(*s, "spectral", "L", rc.spectral.grid.L);
    if (const json* n = find(*s, "N")) {
      if (!n->is_number_integer()) fail("spectral.N must be an integer");
      rc.spectral.grid.N = n->get<int>();
    }
    rc.spectral.class_tol_factor = number_or(*s, "spectral", "class_tol_factor",
                                             rc.spectral.class_tol_factor);
  }
  if (!(rc.spectral.theta > 0.0) ||
      !(rc.spectral.theta < rc.spectral.theta_prime))
    fail("spectral angles must satisfy 0 < theta < theta_prime");
  if (rc.spectral.theta_prime >= rc.problem.sector.theta0)
    fail("theta_prime must stay below the sector angle theta0");
  if (rc.spectral.grid.N < 200) fail("spectral.N must be at least 200");
  if (!(rc.spectral.grid.L > 0.0)) fail("spectral.L must be positive");
  if (!(rc.spectral.class_tol_factor > 0.0))
    fail("spectral.class_tol_factor must be positive");

  rc.safety_c = number_or(j, "config", "safety_c", rc.safety_c);
  if (!(rc.safety_c > 0.0) || !(rc.safety_c < 1.0))
    fail("safety_c must lie in (0, 1)");
  rc.band_M_default = number_or(j, "config", "band_M_default", rc.band_M_default);
  if (!(rc.band_M_default > 0.0)) fail("band_M_default must be positive");

  if (const json* o = find(j, "output_dir")) {
    if (!o->is_string()) fail("output_dir must be a string");
    rc.output_dir = o->get<std::string>();
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

ordered_json term_to_json(const AnalyticTerm& t) {
  ordered_json j;
  j["kind"] = to_string(t.kind);
  j["amplitude"] = t.amplitude;
  j["slope"] = t.slope;
  j["center"] = t.center;
  return j;
}

ordered_json terms_to_json(const PotentialSpec& p) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : p.terms()) arr.push_back(term_to_json(t));
  return arr;
}

} // namespace

std::string config_to_json(const RunConfig& rc) {
  ordered_json j;
  ordered_json& p = j["problem"];
  p["V1"] = terms_to_json(rc.problem.V1);
  p["V2"] = terms_to_json(rc.problem.V2);
  p["r0"] = terms_to_json(rc.problem.W.r0());
  p["r1"] = terms_to_json(rc.problem.W.r1());
  p["E0"] = rc.problem.E0;
  p["nu"] = rc.problem.nu;
  p["sector"] = {{"theta0", rc.problem.sector.theta0}, {"R0", rc.problem.sector.R0}};
  p["tolerances"] = {{"root_tol", rc.problem.tol.root_tol},
                     {"quad_tol", rc.problem.tol.quad_tol},
                     {"newton_tol", rc.problem.tol.newton_tol}};
  p["strict_sector"] = rc.problem.strict_sector;
  j["h_list"] = rc.h_list;
  if (rc.search_rect) {
    j["search_rect"] = {{"re_lo", rc.search_rect->re_lo},
                        {"re_hi", rc.search_rect->re_hi},
                        {"im_lo", rc.search_rect->im_lo},
                        {"im_hi", rc.search_rect->im_hi}};
  }
  j["spectral"] = {{"theta", rc.spectral.theta},
                   {"theta_prime", rc.spectral.theta_prime},
                   {"L", rc.spectral.grid.L},
                   {"N", rc.spectral.grid.N},
                   {"class_tol_factor", rc.spectral.class_tol_factor}};
  j["safety_c"] = rc.safety_c;
  j["band_M_default"] = rc.band_M_default;
  j["output_dir"] = rc.output_dir;
  return j.dump(2) + "\n";
}

} // namespace ratlas
