#include <doctest.h>

#include "egdeg/cli.hpp"
#include "egdeg/errors.hpp"

using namespace egdeg;
using nlohmann::json;

namespace {

ErrorCode parse_error(const json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config accepted: " << j.dump());
  return ErrorCode::InvalidArgument;
}

const json kD3 = {{"kind", "dihedral"}, {"n", 3}};
const json kEmpty = {{"kind", "empty"}};

}  // namespace

TEST_CASE("config validation") {
  CHECK(parse_error({{"group", kD3}, {"potential", kEmpty}, {"colour", "blue"}}) == ErrorCode::ConfigError);
  CHECK(parse_error({{"potential", kEmpty}}) == ErrorCode::ConfigError);
  CHECK(parse_error({{"group", {{"kind", "icosahedral"}}}, {"potential", kEmpty}}) == ErrorCode::ConfigError);
  CHECK(parse_error({{"group", {{"kind", "symmetric"}, {"n", 6}}}, {"potential", kEmpty}}) == ErrorCode::ConfigError);
  CHECK(parse_error({{"group", {{"kind", "circle"}, {"weights", {1, 2}}}}, {"potential", kEmpty}}) ==
        ErrorCode::UnsupportedRep);
  CHECK(parse_error({{"group", kD3}, {"potential", kEmpty}, {"numerics", {{"mu", "septic"}}}}) ==
        ErrorCode::ConfigError);
  CHECK(parse_error({{"group", kD3}, {"potential", kEmpty}, {"numerics", {{"grid_h", -0.1}}}}) ==
        ErrorCode::ConfigError);
  CHECK(parse_error({{"group", kD3}, {"potential", {{"kind", "catalog"}, {"name", "z2_line_min"}}}}) ==
        ErrorCode::ConfigError);
  CHECK(parse_error({{"potential", {{"kind", "catalog"}, {"name", "nope"}}}}) == ErrorCode::UnknownName);
  CHECK(parse_error({{"group", kD3}, {"potential", {{"kind", "polynomial"}, {"expr", "x1^^2"}}}}) ==
        ErrorCode::ConfigError);
  CHECK_THROWS_AS(RunConfig::from_file("examples_config/does_not_exist.json"), Error);

  const RunConfig cfg = RunConfig::from_json(
      {{"potential", {{"kind", "catalog"}, {"name", "z2_line_min"}}}, {"numerics", {{"grid_h", 0.05}}}});
  CHECK(cfg.catalog_entry);
  CHECK(cfg.numerics.grid_h == 0.05);
  CHECK(cfg.dim() == 1);
}

TEST_CASE("strata command") {
  const auto res = run_strata(RunConfig::from_file("examples_config/d3_punctured_strata.json"));
  REQUIRE(res.exit_code == kExitOk);
  const json& r = res.report;
  CHECK(r["schema"] == kSchema);
  REQUIRE(r["lattice"].size() == 2);
  CHECK(r["lattice"][0]["orbit_type"] == "(Z2)");
  CHECK(r["lattice"][1]["orbit_type"] == "(e)");
  REQUIRE(r["strata"].size() == 2);
  CHECK(r["strata"][0]["components"].size() == 2);
  CHECK(r["strata"][0]["quotient_labels"].size() == 2);
  CHECK(r["strata"][1]["components"].size() == 6);
  CHECK(r["strata"][1]["quotient_labels"].size() == 1);

  const auto empty = run_strata(RunConfig::from_file("examples_config/empty_domain.json"));
  CHECK(empty.exit_code == kExitOk);
  CHECK(empty.report["lattice"].empty());
}

TEST_CASE("non-invariant domains are rejected with a witness") {
  const auto res = run_strata(RunConfig::from_file("examples_config/not_invariant.json"));
  CHECK(res.exit_code == kExitValidation);
  CHECK(res.report["error"]["code"] == "NotInvariant");
  CHECK(res.report["error"]["witness"].size() == 2);
}

TEST_CASE("theta command") {
  const auto line = run_theta(RunConfig::from_file("examples_config/z2_line_min.json"));
  REQUIRE(line.exit_code == kExitOk);
  CHECK(line.report["matches_expected"] == true);
  CHECK(line.report["theta11"] == 1);

  const auto ring = run_theta(RunConfig::from_file("examples_config/s1_dancer_ring.json"));
  REQUIRE(ring.exit_code == kExitOk);
  CHECK(ring.report["theta11"].is_null());
  REQUIRE(ring.report["entries"].size() == 1);
  CHECK(ring.report["entries"][0]["value"] == 1);
}

TEST_CASE("degree command on a box") {
  const auto res = run_degree(RunConfig::from_file("examples_config/box_degree_3d.json"));
  REQUIRE(res.exit_code == kExitOk);
  CHECK(res.report["degree"] == 0);
  CHECK(res.report["result"]["zeros"] == 2);
}

TEST_CASE("verify command") {
  const auto ok = run_verify("partition", 1);
  CHECK(ok.exit_code == kExitOk);
  CHECK(ok.report["criteria"].size() == 1);
  CHECK(run_verify("bogus", 1).exit_code == kExitValidation);
}

TEST_CASE("exit codes follow the error class") {
  CHECK(exit_code_for(Error(ErrorCode::ConfigError, "")) == kExitValidation);
  CHECK(exit_code_for(Error(ErrorCode::NotInvariant, "")) == kExitValidation);
  CHECK(exit_code_for(Error(ErrorCode::MarginTooSmall, "")) == kExitNumerics);
  CHECK(exit_code_for(Error(ErrorCode::TubeSelectionFailed, "")) == kExitNumerics);
  const auto res = guarded("x", []() -> CommandResult { throw Error(ErrorCode::PartitionViolation, "boom"); });
  CHECK(res.exit_code == kExitNumerics);
  CHECK(res.report["error"]["code"] == "PartitionViolation");
}
