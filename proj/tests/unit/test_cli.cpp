#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "vclust/error.hpp"

using namespace vclust;
using namespace vclust::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vclust_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing names the offending key or line") {
  const auto c = Config::from_string("# comment\nfield = helical  # trailing\nb_expr = \"1 + x1^2\"\nm = 2\n");
  CHECK(c.text("field") == "helical");
  CHECK(c.text("b_expr") == "1 + x1^2");
  CHECK(c.integer("m") == 2);
  CHECK(c.number("h") == doctest::Approx(0.015625));

  CHECK(error_of([] { Config::from_string("bogus = 1\n"); }).find("unknown key 'bogus'") != std::string::npos);
  CHECK(error_of([] { Config::from_string("m = 1\nm = 2\n", "cfg"); }).find("cfg:2") != std::string::npos);
  CHECK(error_of([] { Config::from_string("just words\n", "cfg"); }).find("cfg:1") != std::string::npos);
  CHECK(error_of([] { Config::from_string("m = two\n").integer("m"); }).find("'m'") != std::string::npos);
  CHECK(error_of([] { Config::from_string("field = torus\n").validate("profile"); }).find("'field'") !=
        std::string::npos);
  CHECK(error_of([] { Config::from_string("eps_ladder = 0.1,0.2\n").numbers("eps_ladder"); }).find("eps_ladder") !=
        std::string::npos);
}

TEST_CASE("validation is per command") {
  auto c = Config::from_string("field = identity\nm = 1\n");
  CHECK(error_of([&] { c.validate("solve"); }).find("missing required key 'eps_ladder'") != std::string::npos);
  CHECK(error_of([&] { c.validate("profile"); }).find("not used by 'profile'") != std::string::npos);
  c.set("eps_ladder", "0.2,0.1");
  CHECK_NOTHROW(c.validate("solve"));
  c.set("h", "0");
  CHECK(error_of([&] { c.validate("solve"); }).find("'h'") != std::string::npos);
  CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
}

TEST_CASE("every command key has a schema entry and a flag") {
  for (const auto& name : command_names()) {
    const auto& keys = command_keys(name).keys;
    for (const auto& key : keys) CHECK(!key_spec(key).flag.empty());
    for (const auto& key : command_keys(name).required)
      CHECK(std::find(keys.begin(), keys.end(), key) != keys.end());
  }
}

TEST_CASE("profile command writes deterministic artifacts and a manifest") {
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto dir = scratch("profile" + std::to_string(run));
    auto c = Config::from_string("p = 3\n");
    c.set("out", dir.string());
    REQUIRE(run_command("profile", c) == kOk);
    const auto text = slurp(dir / "profile.json");
    if (run == 0) first = text;
    CHECK(text == first);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["inputs"]["p"] == "3");
    bool listed = false;
    for (const auto& o : manifest["outputs"])
      if (o["path"].get<std::string>().find("profile.json") != std::string::npos) {
        listed = true;
        CHECK(o["sha256"] == sha256_file((dir / "profile.json").string()));
      }
    CHECK(listed);
  }
}

TEST_CASE("failures map to exit codes and are recorded") {
  const auto dir = scratch("fail");
  auto c = Config::from_string("field = identity\nm = 1\n");
  c.set("out", dir.string());
  CHECK(run_command("solve", c) == kConfigError);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["error"]["exit_code"] == kConfigError);

  auto io = Config::from_string("p = 2\n");
  io.set("out", "/proc/vclust_no_such_dir");
  CHECK(run_command("profile", io) == kIoError);
  CHECK(run_command("no_such_command", Config{}) == kConfigError);
}
