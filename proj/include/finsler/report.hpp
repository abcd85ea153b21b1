#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/checks.hpp"
#include "finsler/registry.hpp"
#include "finsler/version.hpp"

namespace finsler {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string name;
  int dim = 0;
  std::string fText;
  std::optional<std::string> sigmaText;
  std::vector<std::string> constraints;
  std::vector<std::array<double, 2>> xRanges, yRanges;
  double margin = 1e-3;
  int points = 50;
  std::uint64_t seed = 42;
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;  // "default" plus per-check overrides

  double tolerance_for(const std::string& check) const {
    if (auto it = tolerances.find(check); it != tolerances.end()) return it->second;
    if (auto it = tolerances.find("default"); it != tolerances.end()) return it->second;
    return 1e-8;
  }
};

inline RunConfig config_from_entry(const RegistryEntry& entry,
                                   std::vector<std::string> checks) {
  RunConfig cfg;
  cfg.name = entry.name;
  cfg.dim = entry.space.n;
  cfg.fText = entry.fText;
  if (entry.sigma) cfg.sigmaText = entry.sigmaText;
  for (const Expr& c : entry.space.constraints) cfg.constraints.push_back(c.str());
  cfg.xRanges = entry.space.xRange;
  cfg.yRanges = entry.space.yRange;
  cfg.margin = entry.space.margin;
  cfg.checks = std::move(checks);
  return cfg;
}

inline Json to_json(const RunConfig& cfg) {
  Json j;
  j["name"] = cfg.name;
  j["dim"] = cfg.dim;
  j["F"] = cfg.fText;
  if (cfg.sigmaText) j["sigma"] = *cfg.sigmaText;
  Json dom;
  dom["constraints"] = cfg.constraints;
  dom["xRanges"] = cfg.xRanges;
  dom["yRanges"] = cfg.yRanges;
  dom["margin"] = cfg.margin;
  j["domain"] = dom;
  j["points"] = Json{{"count", cfg.points}, {"seed", cfg.seed}};
  j["checks"] = cfg.checks;
  j["tolerances"] = cfg.tolerances;
  return j;
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig cfg;
  cfg.name = j.value("name", std::string("unnamed"));
  cfg.dim = j.at("dim").get<int>();
  cfg.fText = j.at("F").get<std::string>();
  if (j.contains("sigma")) cfg.sigmaText = j.at("sigma").get<std::string>();
  if (j.contains("domain")) {
    const Json& dom = j.at("domain");
    if (dom.contains("constraints"))
      cfg.constraints = dom.at("constraints").get<std::vector<std::string>>();
    if (dom.contains("xRanges"))
      cfg.xRanges = dom.at("xRanges").get<std::vector<std::array<double, 2>>>();
    if (dom.contains("yRanges"))
      cfg.yRanges = dom.at("yRanges").get<std::vector<std::array<double, 2>>>();
    cfg.margin = dom.value("margin", 1e-3);
  }
  if (j.contains("points")) {
    cfg.points = j.at("points").value("count", 50);
    cfg.seed = j.at("points").value("seed", std::uint64_t{42});
  }
  if (j.contains("checks")) cfg.checks = j.at("checks").get<std::vector<std::string>>();
  if (j.contains("tolerances"))
    cfg.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
  return cfg;
}

struct Report {
  Json doc;
  bool allPassed = false;
};

namespace detail {

inline Json outcome_to_json(const CheckOutcome& out) {
  Json j;
  j["name"] = out.name;
  j["maxResidual"] = out.maxResidual;
  j["meanResidual"] = out.meanResidual;
  j["verdict"] = out.verdict;
  j["worstPoint"] = Json{{"x", out.worstPoint.x}, {"y", out.worstPoint.y}};
  Json det = Json::object();
  for (const auto& [key, val] : out.details) det[key] = val;
  j["details"] = det;
  if (!out.notes.empty()) j["notes"] = out.notes;
  return j;
}

}  // namespace detail

/// Execute the requested checks over a seeded sample; deterministic for a
/// given (config, seed), byte-identical report for identical inputs.
inline Report run_report(const RunConfig& cfg) {
  if (cfg.points < 1) throw std::invalid_argument("point count must be at least 1");
  if (cfg.checks.empty()) throw std::invalid_argument("no checks requested");
  for (const std::string& c : cfg.checks) {
    bool known = false;
    for (const std::string& k : known_checks()) known = known || k == c;
    if (!known) throw std::invalid_argument("unknown check '" + c + "'");
    if (check_requires_sigma(c) && !cfg.sigmaText)
      throw std::invalid_argument("check '" + c + "' requires sigma");
  }

  MetricSpace sp;
  sp.n = cfg.dim;
  sp.F = Expr::parse(cfg.fText, cfg.dim);
  for (const std::string& c : cfg.constraints)
    sp.constraints.push_back(Expr::parse(c, cfg.dim));
  sp.xRange = cfg.xRanges;
  sp.yRange = cfg.yRanges;
  sp.margin = cfg.margin;
  if (static_cast<int>(sp.xRange.size()) != cfg.dim ||
      static_cast<int>(sp.yRange.size()) != cfg.dim)
    throw std::invalid_argument("sampling ranges must cover every coordinate");

  std::optional<Expr> sigma;
  if (cfg.sigmaText) {
    sigma = Expr::parse(*cfg.sigmaText, cfg.dim);
    if (sigma->contains_axis(Axis::Y))
      throw std::invalid_argument("sigma must depend on x only");
  }

  std::vector<Point> pts = sample_admissible(sp, cfg.points, cfg.seed);
  std::span<const Point> span(pts);

  // closed forms come from the registry entry of the same name, when present
  const RegistryEntry* entry = nullptr;
  for (const RegistryEntry& e : registry())
    if (e.name == cfg.name) entry = &e;

  Report rep;
  rep.doc["schemaVersion"] = kReportSchemaVersion;
  rep.doc["config"] = to_json(cfg);
  rep.doc["environment"] = Json{{"version", kVersion}, {"seed", cfg.seed}};
  Json warnings = Json::array();
  if (entry)
    for (const std::string& w : entry->warnings) warnings.push_back(w);
  if (cfg.sigmaText)
    warnings.push_back(
        "conformal factors are canonicalized to exp(sigma); printed laws with a "
        "first-power factor are evaluated with the consistent second-power "
        "coefficient");
  rep.doc["warnings"] = warnings;

  Json checks = Json::array();
  bool all = true;
  for (const std::string& name : cfg.checks) {
    double tol = cfg.tolerance_for(name);
    CheckOutcome out;
    if (name == "identities") {
      out = check_identities(sp, span, tol);
    } else if (name == "classify") {
      out = check_classify(sp, sigma, span, tol);
    } else if (name == "conformal-laws") {
      out = check_conformal_laws(sp, *sigma, span, tol);
    } else if (name == "sigma-t") {
      out = check_sigma_t(sp, *sigma, span, tol);
    } else if (name == "necessary-condition") {
      out = check_necessary_condition(sp, *sigma, span, tol);
    } else if (name == "special-forms") {
      out = check_special_forms(sp, span, tol);
    } else if (name == "b-hierarchy") {
      out = check_b_hierarchy(sp, *sigma, span, tol);
    } else if (name == "closed-forms") {
      if (entry) {
        out = check_closed_forms(*entry, span, tol);
      } else {
        out.name = "closed-forms";
        out.notes.push_back("no closed forms registered for this space");
      }
    }
    all = all && out.verdict;
    Json oj = detail::outcome_to_json(out);
    oj["tolerance"] = tol;
    checks.push_back(oj);
  }
  rep.doc["checks"] = checks;
  rep.doc["allPassed"] = all;
  rep.allPassed = all;
  return rep;
}

/// Human-readable rendering derived from the JSON document.
inline std::string render_report(const Json& doc) {
  std::string out;
  out += "report (schema " + doc.at("schemaVersion").dump() + ", version " +
         doc.at("environment").at("version").get<std::string>() + ", seed " +
         doc.at("environment").at("seed").dump() + ")\n";
  out += "space: " + doc.at("config").at("name").get<std::string>() + "  F = " +
         doc.at("config").at("F").get<std::string>() + "\n";
  if (doc.at("config").contains("sigma"))
    out += "sigma: " + doc.at("config").at("sigma").get<std::string>() + "\n";
  for (const auto& w : doc.at("warnings"))
    out += "warning: " + w.get<std::string>() + "\n";
  for (const auto& c : doc.at("checks")) {
    out += (c.at("verdict").get<bool>() ? "[pass] " : "[FAIL] ") +
           c.at("name").get<std::string>() + "  max " + c.at("maxResidual").dump() +
           "  mean " + c.at("meanResidual").dump() + "  tol " +
           c.at("tolerance").dump() + "\n";
    for (const auto& [key, val] : c.at("details").items())
      out += "    " + key + ": " + val.dump() + "\n";
    if (c.contains("notes"))
      for (const auto& nn : c.at("notes")) out += "    note: " + nn.get<std::string>() + "\n";
    out += "    worst point: x = " + c.at("worstPoint").at("x").dump() +
           ", y = " + c.at("worstPoint").at("y").dump() + "\n";
  }
  out += doc.at("allPassed").get<bool>() ? "all requested verdicts hold\n"
                                         : "some verdicts FAILED\n";
  return out;
}

}  // namespace finsler
