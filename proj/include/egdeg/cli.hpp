#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egdeg/domain.hpp"
#include "egdeg/errors.hpp"
#include "egdeg/group.hpp"
#include "egdeg/local_map.hpp"
#include "egdeg/map_factory.hpp"
#include "egdeg/numerics.hpp"

namespace egdeg {

inline constexpr const char* kSchema = "egdeg/1";

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerics = 3, kExitVerify = 4 };

/// Parsed and validated run configuration.
///
///   {"group":     {"kind": "cyclic"|"dihedral"|"symmetric", "n": int}
///                 {"kind": "antipodal"|"trivial", "dim": int}
///                 {"kind": "generators", "dim": int, "matrices": [[[..]]], "cap": int}
///                 {"kind": "circle", "weights": [int]},
///    "domain":    domain expression (default {"kind": "full"}),
///    "potential": {"kind": "polynomial", "expr": "..."}
///                 {"kind": "catalog", "name": "..."}
///                 {"kind": "orbit_normal", "point": [..], "epsilon": r}
///                 {"kind": "empty"},
///    "numerics":  {"grid_h", "bbox", "newton_tol", "zero_thresh", "seed",
///                  "max_halvings", "mu": "cubic"|"quintic", "samples"},
///    "box":       {"lo": [..], "hi": [..]},
///    "output":    "path"}
///
/// A catalog potential supplies group, domain and numerics; an explicit
/// numerics block then overrides single fields. Unknown keys are rejected.
struct RunConfig {
  nlohmann::json group_spec;
  GroupPtr group;                    // null for circle groups
  std::vector<int> circle_weights;   // set for circle groups
  DomainExpr domain = DomainExpr::full();
  nlohmann::json potential_spec;
  std::optional<CatalogEntry> catalog_entry;
  Numerics numerics;
  std::optional<std::pair<Vec, Vec>> box;
  std::string output;

  bool is_circle() const { return !circle_weights.empty(); }
  int dim() const;

  /// Throws ConfigError (or the underlying validation error).
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
};

/// The map described by the config. Checks invariance of Ω first and
/// reports a witness point when it fails.
LocalGradientMap build_map(const RunConfig& cfg);

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
};

CommandResult run_strata(const RunConfig& cfg);
CommandResult run_theta(const RunConfig& cfg);
CommandResult run_degree(const RunConfig& cfg);
CommandResult run_perturb_trace(const RunConfig& cfg);
CommandResult run_verify(const std::string& suite, std::uint64_t seed);

/// Runs `body`, turning an Error into an error report with exit 2 or 3.
CommandResult guarded(const std::string& command, const std::function<CommandResult()>& body);

int exit_code_for(const Error& e);

}  // namespace egdeg
