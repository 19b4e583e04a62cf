#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "sfwm/config.hpp"
#include "sfwm/errors.hpp"

using namespace sfwm;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  std::ofstream(name) << text;
  return name;
}

}  // namespace

TEST_CASE("defaults validate") {
  const Config c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.chi.delta == 130.59);
  CHECK(c.instrument.sigma_g == 24.80);
  CHECK(c.variant == BellVariant::PsiPlus);
  CHECK(c.grid().size == 5001);
}

TEST_CASE("unknown keys are named") {
  Config c;
  try {
    c.set("detla", "1.0");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "detla");
  }
}

TEST_CASE("malformed values are named") {
  Config c;
  const std::vector<std::pair<std::string, std::string>> bad{
      {"delta", "abc"}, {"seed", "-3"}, {"schedule", "random"}, {"fit_window", "1700,900"},
      {"variant", "chi+"}, {"fit_weights", "poisson"}, {"stokes_band_nm", "780"}};
  for (const auto& [k, v] : bad) {
    CAPTURE(k, v);
    try {
      c.set(k, v);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == k);
    }
  }
}

TEST_CASE("validation names the offending key") {
  Config c;
  c.set("sigma_g", "-1");
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "sigma_g");
  }
}

TEST_CASE("every listed key is settable") {
  for (const auto& k : Config::keys()) CHECK(!k.empty());
  CHECK(Config::keys().size() > 40);
}

TEST_CASE("key-value file") {
  const auto path = write_temp("cfg_test.conf",
                               "# comment\n"
                               "delta = 120.5\n"
                               "response_poly = 1, 0.001\n"
                               "variant = psi-\n"
                               "\n"
                               "fit_window = 1000, 1600\n");
  Config c;
  c.load_file(path);
  CHECK(c.chi.delta == 120.5);
  CHECK(c.instrument.response_poly == std::vector<double>{1.0, 0.001});
  CHECK(c.variant == BellVariant::PsiMinus);
  CHECK(c.fit_window.lo == 1000.0);
  CHECK(c.fit_window.hi == 1600.0);
  std::remove(path.c_str());
}

TEST_CASE("JSON file") {
  const auto path = write_temp("cfg_test.json",
                               R"({"delta": 99.0, "seed": 42, "schedule": "scan", "response_poly": [2.0, 0.5]})");
  Config c;
  c.load_file(path);
  CHECK(c.chi.delta == 99.0);
  CHECK(c.seed == 42);
  CHECK(c.schedule == "scan");
  CHECK(c.instrument.response_poly == std::vector<double>{2.0, 0.5});
  std::remove(path.c_str());
}

TEST_CASE("file errors") {
  Config c;
  CHECK_THROWS_AS(c.load_file("does_not_exist.conf"), UsageError);
  const auto a = write_temp("cfg_bad.conf", "delta 120\n");
  CHECK_THROWS_AS(c.load_file(a), UsageError);
  const auto b = write_temp("cfg_bad.json", "{\"delta\": [1, [2]]}");
  CHECK_THROWS_AS(c.load_file(b), ConfigError);
  const auto d = write_temp("cfg_bad2.conf", "nonsense = 1\n");
  CHECK_THROWS_AS(c.load_file(d), ConfigError);
  for (const auto& p : {a, b, d}) std::remove(p.c_str());
}

TEST_CASE("variant names") {
  for (auto v : {BellVariant::PsiPlus, BellVariant::PsiMinus, BellVariant::PhiMinus})
    CHECK(parse_variant(variant_name(v)) == v);
  CHECK_THROWS_AS(parse_variant("bell"), UsageError);
}

TEST_CASE("simulation config from settings") {
  Config c;
  c.set("pulses_per_setting", "1000");
  c.set("schedule", "scan");
  const auto sim = c.sim_config(SFWM_DATA_DIR);
  CHECK(sim.schedule.size() == 44);
  CHECK(sim.schedule[0].pulses == 1000);
  CHECK(sim.pump_cm == 1.0e7 / 781.0);
}
