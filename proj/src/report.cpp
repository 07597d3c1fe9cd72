#include "splab/report.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace splab {

namespace {

// Infinite interval ends serialize as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string to_string(SeedProfile s) {
  switch (s) {
    case SeedProfile::gaussian: return "gaussian";
    case SeedProfile::sech: return "sech";
    case SeedProfile::file: return "file";
  }
  return "gaussian";
}

SeedProfile seed_profile_from(const std::string& s) {
  if (s == "gaussian") return SeedProfile::gaussian;
  if (s == "sech") return SeedProfile::sech;
  if (s == "file") return SeedProfile::file;
  throw ConfigError("solver: seed_profile must be gaussian, sech or file (got '" + s + "')");
}

json to_json(const Params& prm) {
  return {{"lambda", prm.lambda},   {"mu11", prm.mu11},
          {"mu22", prm.mu22},       {"mu12", prm.mu12},
          {"p", prm.p},             {"kappa", prm.kappa},
          {"positive_part", prm.positive_part}, {"angular_nodes", prm.angular_nodes}};
}

json to_json(const SolverConfig& cfg) {
  return {{"tol", cfg.tol},
          {"max_iter", cfg.max_iter},
          {"damping", cfg.damping},
          {"continuation_steps", cfg.continuation_steps},
          {"min_step", cfg.min_step},
          {"inner_tol", cfg.inner_tol},
          {"descent_tol", cfg.descent_tol},
          {"polish_steps", cfg.polish_steps},
          {"seed_profile", to_string(cfg.seed_profile)},
          {"seed_width", cfg.seed_width},
          {"seed_amplitude", cfg.seed_amplitude},
          {"seed_file", cfg.seed_file}};
}

json to_json(const Ledger& L) { return {{"a", L.a}, {"b", L.b}, {"c", L.c}, {"d", L.d}}; }

json to_json(const SolveReport& rep) {
  json cands = json::array();
  for (const auto& c : rep.candidates)
    cands.push_back({{"label", c.label}, {"energy", number(c.energy)}, {"classification", to_string(c.classification)}});
  const double scale = rep.ledger.scale();
  json trace = json::array();
  for (double t : rep.trace) trace.push_back(number(t));
  return {{"classification", to_string(rep.classification)},
          {"status", rep.status},
          {"energy", number(rep.energy)},
          {"ledger", to_json(rep.ledger)},
          {"residual_sup", number(rep.residual_sup)},
          {"pohozaev_residual", number(rep.pohozaev_residual)},
          {"pohozaev_relative", scale > 0 ? number(rep.pohozaev_residual / scale) : json(nullptr)},
          {"nehari_residual", number(rep.nehari_residual)},
          {"iterations", rep.iterations},
          {"ratio_mean", number(rep.ratio_mean)},
          {"ratio_max_deviation", number(rep.ratio_max_deviation)},
          {"degenerate_hessian", rep.degenerate_hessian},
          {"amplitude", {number(rep.solution.first.values.cwiseAbs().maxCoeff()),
                         number(rep.solution.second.values.cwiseAbs().maxCoeff())}},
          {"candidates", cands},
          {"trace", trace}};
}

json to_json(const AuditOutcome& o) {
  json j = {{"name", o.name}, {"passed", o.passed}, {"measured", number(o.measured)}};
  if (o.kind == AuditOutcome::Kind::near) {
    j["expected"] = number(o.expected);
    j["tolerance"] = number(o.tolerance);
  } else {
    j["interval"] = {number(o.lo), number(o.hi)};
    j["strict"] = o.strict;
  }
  json extras = json::object();
  for (const auto& [k, v] : o.extras) extras[k] = number(v);
  j["extras"] = extras;
  if (!o.notes.empty()) j["notes"] = o.notes;
  return j;
}

void write_pair_csv(const Pair& u, std::ostream& os) {
  os << "r,u1,u2\n";
  const auto& r = u.first.r();
  for (int i = 0; i < u.first.size(); ++i)
    os << format_real(r[i]) << ',' << format_real(u.first.values[i]) << ',' << format_real(u.second.values[i])
       << '\n';
}

void write_audit_csv(const std::vector<AuditOutcome>& audits, std::ostream& os) {
  os << "name,passed,measured,expected,tolerance\n";
  for (const auto& o : audits) {
    os << o.name << ',' << (o.passed ? "true" : "false") << ',' << format_real(o.measured) << ',';
    if (o.kind == AuditOutcome::Kind::near)
      os << format_real(o.expected) << ',' << format_real(o.tolerance);
    else
      os << (o.strict ? "(" : "[") << format_real(o.lo) << ';' << format_real(o.hi) << (o.strict ? ")" : "]") << ",0";
    os << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string slug(const std::string& label) {
  std::string s;
  for (char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
      s += c;
    else if (c == '=')
      s += '-';
    else if (!s.empty() && s.back() != '_')
      s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s.empty() ? "field" : s;
}

}  // namespace splab
