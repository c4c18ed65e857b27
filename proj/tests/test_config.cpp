#include <doctest.h>

#include <map>

#include "qlchain/config.hpp"
#include "qlchain/errors.hpp"

using namespace qlchain;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string message_of(const std::string& text) {
  try {
    build_config(parse_config(text));
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("sections, comments and lists") {
  const RawConfig raw = parse_config(
      "length = 12  # sites\n"
      "[bath]\n"
      "gamma = 0.5\n"
      "Ta = 3\n"
      "[ensemble]\n"
      "lengths = 5, 10,20\n");
  CHECK(raw.at("bath.gamma") == "0.5");
  const RunConfig c = build_config(raw);
  CHECK(c.length == 12);
  CHECK(c.bath.gamma == 0.5);
  CHECK(c.bath.Ta == 3.0);
  CHECK(c.lengths == std::vector<int>{5, 10, 20});
}

TEST_CASE("unknown keys are listed") {
  const std::string msg = message_of("bath.gama = 1\nlength = 4\nfoo = 2\n");
  CHECK(msg.find("bath.gama") != std::string::npos);
  CHECK(msg.find("foo") != std::string::npos);
}

TEST_CASE("validation names the offending key") {
  CHECK(message_of("bath.gamma = -1\n").find("bath.gamma") != std::string::npos);
  CHECK(message_of("mass = 2\n").find("mass") != std::string::npos);
  CHECK(message_of("length = abc\n").find("length") != std::string::npos);
  CHECK(message_of("onsite.style = sometimes\n").find("onsite.style") != std::string::npos);
  CHECK(message_of("length = 3\nlength = 4\n").find("twice") != std::string::npos);
}

TEST_CASE("environment overrides") {
  CHECK(env_name("bath.Ta") == "QLCHAIN_BATH_TA");
  const RunConfig c = build_config(parse_config("bath.Ta = 5\n"),
                                   fake_env({{"QLCHAIN_BATH_TA", "7.5"}, {"QLCHAIN_SEED", "42"}}));
  CHECK(c.bath.Ta == 7.5);
  CHECK(c.seed == 42);
}

TEST_CASE("dump round-trips") {
  RunConfig c = build_config(parse_config("coupling.sigma = 0.2\ncoupling.symmetric = yes\nscan.tm = 0.1, 0.3\n"));
  const RunConfig d = build_config(parse_config(dump_config(c)));
  CHECK(dump_config(d) == dump_config(c));
  CHECK(d.coupling.symmetric);
  CHECK(d.tm == std::vector<double>{0.1, 0.3});
}

}
