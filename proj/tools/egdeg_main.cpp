// egdeg: strata | theta | degree | perturb-trace | verify

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "egdeg/cli.hpp"
#include "egdeg/verify.hpp"

namespace {

using egdeg::CommandResult;

int emit(const CommandResult& res, const std::string& output, bool compact) {
  const std::string text = compact ? res.report.dump() : res.report.dump(2);
  std::cout << text << "\n";
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) {
      std::cerr << "egdeg: cannot write '" << output << "'\n";
      return egdeg::kExitValidation;
    }
    out << text << "\n";
  }
  if (res.report.contains("error")) std::cerr << "egdeg: " << res.report["error"]["message"].get<std::string>() << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant gradient degree: orbit types, strata and the Θ invariant"};
  app.require_subcommand(1);
  app.fallthrough();
  bool compact = false;
  std::string output;
  app.add_flag("--compact", compact, "print single-line JSON");
  app.add_option("-o,--output", output, "also write the report to this file");

  std::string config_path;
  auto config_command = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    return sub;
  };
  auto* strata = config_command("strata", "orbit types of Ω and the components of each stratum");
  auto* theta = config_command("theta", "Θ of the configured map with its recursion trace");
  auto* degree = config_command("degree", "box degree, or intersection numbers per stratum component");
  auto* trace = config_command("perturb-trace", "tubes, radii and partition checks of every perturbation layer");

  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  std::string suite = "all";
  std::uint64_t seed = 1;
  verify->add_option("--suite", suite, "all | axioms | degree | partition")
      ->check(CLI::IsMember(egdeg::suite_names()));
  verify->add_option("--seed", seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return egdeg::kExitValidation;
  }

  if (verify->parsed()) return emit(egdeg::run_verify(suite, seed), output, compact);

  const std::string command = app.get_subcommands().front()->get_name();
  CommandResult res = egdeg::guarded(command, [&] {
    const egdeg::RunConfig cfg = egdeg::RunConfig::from_file(config_path);
    if (output.empty()) output = cfg.output;
    if (strata->parsed()) return egdeg::run_strata(cfg);
    if (theta->parsed()) return egdeg::run_theta(cfg);
    if (degree->parsed()) return egdeg::run_degree(cfg);
    if (trace->parsed()) return egdeg::run_perturb_trace(cfg);
    throw egdeg::Error(egdeg::ErrorCode::ConfigError, "unknown command");
  });
  return emit(res, output, compact);
}
