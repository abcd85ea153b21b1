// Batch front-end: load a config or registry example, sample admissible
// points, run the selected checks, and emit human-readable plus JSON reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/finsler.hpp"

namespace {

std::vector<std::string> split_checks(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<std::string> default_checks(bool hasSigma) {
  std::vector<std::string> out = {"identities", "classify"};
  if (hasSigma) {
    out.push_back("conformal-laws");
    out.push_back("sigma-t");
    out.push_back("necessary-condition");
  }
  out.push_back("special-forms");
  if (hasSigma) out.push_back("b-hierarchy");
  out.push_back("closed-forms");
  return out;
}

int run_and_print(finsler::RunConfig cfg, const std::string& jsonPath) {
  finsler::Report rep = finsler::run_report(cfg);
  if (!jsonPath.empty()) {
    std::ofstream f(jsonPath);
    if (!f) {
      std::cerr << "cannot write " << jsonPath << "\n";
      return 2;
    }
    f << rep.doc.dump(2) << "\n";
  }
  std::cout << finsler::render_report(rep.doc);
  if (!rep.allPassed) {
    for (const auto& c : rep.doc.at("checks"))
      if (!c.at("verdict").get<bool>())
        std::cerr << "check failed: " << c.at("name").get<std::string>() << "\n";
  }
  return rep.allPassed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finsler " + std::string(finsler::kVersion) +
               " - numerical Finsler tensor engine"};
  app.require_subcommand(1);

  std::string configPath, example, jsonPath, checksList;
  int points = -1;
  long long seed = -1;
  double tol = -1.0;

  CLI::App* run = app.add_subcommand("run", "run checks over sampled points");
  run->add_option("config", configPath, "JSON config file");
  run->add_option("--example", example, "registry example name");
  run->add_option("--points", points, "number of admissible sample points");
  run->add_option("--seed", seed, "sampling seed");
  run->add_option("--tol", tol, "default verdict tolerance");
  run->add_option("--json", jsonPath, "write the JSON report here");
  run->add_option("--checks", checksList, "comma-separated list of checks");

  CLI::App* list = app.add_subcommand("list-examples", "list the built-in catalogue");

  std::string ciExample;
  CLI::App* ci = app.add_subcommand("check-identities",
                                    "run the identity suite on one example");
  ci->add_option("--example", ciExample, "registry example name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const finsler::RegistryEntry& e : finsler::registry()) {
        std::cout << e.name << " (n=" << e.space.n << "): " << e.summary << "\n";
        for (const std::string& w : e.warnings) std::cout << "    warning: " << w << "\n";
      }
      return 0;
    }

    if (ci->parsed()) {
      const finsler::RegistryEntry& e = finsler::registry(ciExample);
      finsler::RunConfig cfg = finsler::config_from_entry(e, {"identities"});
      cfg.points = 20;
      return run_and_print(std::move(cfg), "");
    }

    // run
    if (configPath.empty() == example.empty()) {
      std::cerr << "provide exactly one of: a config file or --example NAME\n";
      return 2;
    }
    finsler::RunConfig cfg;
    if (!example.empty()) {
      const finsler::RegistryEntry& e = finsler::registry(example);
      cfg = finsler::config_from_entry(e, default_checks(e.sigma.has_value()));
    } else {
      std::ifstream f(configPath);
      if (!f) {
        std::cerr << "cannot read " << configPath << "\n";
        return 2;
      }
      finsler::Json j = finsler::Json::parse(f);
      cfg = finsler::config_from_json(j);
      if (cfg.checks.empty()) cfg.checks = default_checks(cfg.sigmaText.has_value());
    }
    if (points > 0) cfg.points = points;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (tol > 0.0) cfg.tolerances["default"] = tol;
    if (!checksList.empty()) cfg.checks = split_checks(checksList);
    return run_and_print(std::move(cfg), jsonPath);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
