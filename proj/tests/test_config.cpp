#include <sstream>

#include "doctest.h"
#include "kinlim/config.hpp"

using namespace kinlim;

TEST_CASE("a config file fully determines a run") {
  std::istringstream in(R"(
# comment
[run]
branch = vml
seed = 42
[grid]
n_x = 16
n_v = 20
v_max = 5.5
[expansion]
k = 3
t_c = 0.8
theorem_mode = 1
[sweep]
eps = 0.2, 0.1, 0.05
t_end = 0.02
)");
  RunConfig c = parse_config(in);
  CHECK(c.branch == "vml");
  CHECK(c.seed == 42);
  CHECK(c.n_x == 16);
  CHECK(c.n_v == 20);
  CHECK(c.v_max == 5.5);
  CHECK(c.k == 3);
  CHECK(c.t_c == 0.8);
  CHECK(c.theorem_mode);
  REQUIRE(c.eps.size() == 3);
  CHECK(c.eps[1] == 0.1);
  CHECK(c.t_end == 0.02);
  validate_config(c);  // does not throw
}

TEST_CASE("unknown keys are hard errors") {
  std::istringstream in("[grid]\nn_z = 4\n");
  CHECK_THROWS_AS(parse_config(in), ConfigError);
  std::istringstream in2("typo_without_section = 1\n");
  CHECK_THROWS_AS(parse_config(in2), ConfigError);
}

TEST_CASE("malformed values and lines are rejected") {
  std::istringstream bad_num("[grid]\nn_x = four\n");
  CHECK_THROWS_AS(parse_config(bad_num), ConfigError);
  std::istringstream bad_line("[grid]\nn_x 4\n");
  CHECK_THROWS_AS(parse_config(bad_line), ConfigError);
  std::istringstream bad_section("[grid\nn_x = 4\n");
  CHECK_THROWS_AS(parse_config(bad_section), ConfigError);
}

TEST_CASE("validation rejects inconsistent physics settings") {
  RunConfig c;
  validate_config(c);  // defaults are valid

  RunConfig bad = c;
  bad.eps = {0.05, 0.1};  // not descending
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.eps = {0.1, -0.05};
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.eps.clear();
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.t_c = 0.99;  // not below min background temperature 1 - amplitude
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.theorem_mode = true;  // requires k >= 3, default k = 2
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.n_v = 6;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  bad = c;
  bad.branch = "bgk";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("the generated reference documents every key") {
  const std::string ref = config_reference();
  for (const char* key :
       {"run.branch", "grid.n_v", "expansion.t_c", "sweep.eps",
        "background.amplitude", "expansion.theorem_mode"})
    CHECK(ref.find(key) != std::string::npos);
}
