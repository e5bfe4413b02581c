#include "spdesens/config.hpp"
#include "spdesens/solver.hpp"

#include <doctest.h>

#include <stdexcept>
#include <string>

using namespace spdesens;

namespace {

const std::string kSource = SPDESENS_SOURCE_DIR;

std::string message_of(const std::string& text) {
  try {
    (void)build_config(parse_config_text(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kMinimal = R"(
[space]
d = 2
spectrum = [1, 4]
[noise]
T = 1
dt = 0.1
[initial]
u0 = 1
)";

void same_paths(const Problem& a, const Problem& b) {
  REQUIRE(a.dim() == b.dim());
  CHECK(a.op.eigenvalues() == b.op.eigenvalues());
  CHECK(a.u0 == b.u0);
  CHECK(a.seed == b.seed);
  CHECK(a.horizon == b.horizon);
  CHECK(a.dt == b.dt);
  for (std::uint64_t m = 0; m < 3; ++m) {
    const auto na = a.noise(m);
    const auto nb = b.noise(m);
    CHECK(na.grid() == nb.grid());
    const auto pa = solve_mild(a.op, a.coefficients, a.u0, na);
    const auto pb = solve_mild(b.op, b.coefficients, b.u0, nb);
    CHECK(pa.values() == pb.values());
  }
}

}  // namespace

TEST_CASE("every shipped config parses") {
  for (const char* name : {"free_flow", "ou_jumps", "linear", "nemytskii", "compensated"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(kSource + "/configs/" + name + ".cfg"));
  }
  const auto plan = plan_settings(load_document(kSource + "/configs/plan.cfg"));
  CHECK(plan.n == 2);
  CHECK(plan.q == "3.5");
}

TEST_CASE("configs reproduce the built-in fixtures bit for bit") {
  same_paths(load_config(kSource + "/configs/linear.cfg").problem, fixtures::linear(4));
  same_paths(load_config(kSource + "/configs/nemytskii.cfg").problem, fixtures::nemytskii(8, 0.5, 4));
  same_paths(load_config(kSource + "/configs/compensated.cfg").problem,
             fixtures::compensated_jumps(3.0, 1.0, 0.01));
}

TEST_CASE("minimal config fills defaults") {
  const auto rc = build_config(parse_config_text(kMinimal));
  CHECK(rc.problem.dim() == 2);
  CHECK(rc.p == 2.0);
  CHECK_FALSE(rc.seed_given);
  CHECK(rc.problem.u0 == StateVector::Ones(2));
  CHECK(rc.verify.epsilons.size() == 4);
}

TEST_CASE("value syntax") {
  const auto doc = parse_config_text(R"(
[a]
n = -2.5e-1
r = 7/3
w = quadratic
s = "two words"
l = [1, 2,
     3]
t = (1, 0.5)
c = axis(2)
o = affine { offset = 1, linear = identity }
)");
  CHECK(doc.find("a", "n")->number == -0.25);
  CHECK(doc.find("a", "r")->number == doctest::Approx(7.0 / 3.0));
  CHECK(doc.find("a", "r")->text == "7/3");
  CHECK(doc.find("a", "w")->kind == ConfigValue::Kind::Word);
  CHECK(doc.find("a", "s")->text == "two words");
  CHECK(doc.find("a", "l")->items.size() == 3);
  CHECK(doc.find("a", "t")->kind == ConfigValue::Kind::Tuple);
  CHECK(doc.find("a", "c")->kind == ConfigValue::Kind::Call);
  CHECK(doc.find("a", "o")->fields.size() == 2);
  CHECK(doc.find("a", "missing") == nullptr);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("validation errors name the offending keys") {
  CHECK(message_of(std::string(kMinimal) + "[noise]\nT = 2\n").find("duplicate") != std::string::npos);
  const std::string typo = std::string(kMinimal) + "[norms]\nwindw = 1\npp = 2\n";
  const std::string m = message_of(typo);
  CHECK(m.find("unknown config keys") != std::string::npos);
  CHECK(m.find("[norms] windw") != std::string::npos);
  CHECK(m.find("[norms] pp") != std::string::npos);

  CHECK(message_of("[space]\nd = 2\n[noise]\ndt = 0.1\n[initial]\nu0 = 1\n").find("missing required key 'T' in [noise]") !=
        std::string::npos);
  CHECK_FALSE(message_of("[space]\nd = 2\n[noise]\nT = 1\ndt = 2\n[initial]\nu0 = 1\n").empty());
  CHECK_FALSE(message_of("[space]\nd = 2\n[noise]\nT = 1\ndt = 0.1\n[initial]\nu0 = [1, 2, 3]\n").empty());
  CHECK_FALSE(message_of(std::string(kMinimal) + "[norms]\np = -1\n").empty());
  CHECK_THROWS_AS(parse_config_text("[a]\nx = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(load_config(kSource + "/does/not/exist.cfg"), ConfigError);
}
