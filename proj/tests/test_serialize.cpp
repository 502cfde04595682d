#include <cmath>
#include <string>

#include "doctest.h"
#include "mixcde/errors.hpp"
#include "mixcde/kernel.hpp"
#include "mixcde/rng.hpp"
#include "mixcde/serialize.hpp"
#include "support.hpp"

using namespace mixcde;

TEST_CASE("serialize: mixture parameters round-trip bitwise through JSON") {
  Rng rng(301);
  for (int rep = 0; rep < 10; ++rep) {
    const MixtureTheta t = testing::random_theta(rng, 1 + rep % 3);
    const std::string js = to_json_string(t);
    const MixtureTheta u = theta_from_json_string(js);
    REQUIRE(u.m == t.m);
    CHECK(u.weights == t.weights);
    CHECK(u.sigma_y == t.sigma_y);
    CHECK(u.sigma_x == t.sigma_x);
    for (int j = 0; j < t.m; ++j) {
      CHECK(u.comp[j].beta == t.comp[j].beta);
      CHECK(u.comp[j].mu_x == t.comp[j].mu_x);
      CHECK(u.comp[j].s_y == t.comp[j].s_y);
      CHECK(u.comp[j].s_x == t.comp[j].s_x);
    }
    // A second encode of the decoded value is byte-identical.
    CHECK(to_json_string(u) == js);
  }

  SUBCASE("awkward magnitudes survive") {
    MixtureTheta t = testing::two_component_theta();
    t.comp[0].beta[1] = 1e-300;
    t.comp[1].beta[0] = -9.87654321098765432e17;
    t.sigma_y = 0.1;  // repeating binary fraction
    const MixtureTheta u = theta_from_json_string(to_json_string(t));
    CHECK(u.comp[0].beta[1] == 1e-300);
    CHECK(u.comp[1].beta[0] == -9.87654321098765432e17);
    CHECK(u.sigma_y == 0.1);
  }
  SUBCASE("malformed or invalid payloads throw ParseError") {
    CHECK_THROWS_AS(theta_from_json_string("not json"), ParseError);
    CHECK_THROWS_AS(theta_from_json_string("{\"m\": 1}"), ParseError);  // missing keys
    // Structurally valid JSON whose parameters fail validation.
    MixtureTheta t = testing::two_component_theta();
    std::string js = to_json_string(t);
    const size_t pos = js.find("\"m\":2");
    REQUIRE(pos != std::string::npos);
    js.replace(pos, 5, "\"m\":3");
    CHECK_THROWS(theta_from_json_string(js));
  }
}

TEST_CASE("serialize: bandwidths round-trip") {
  Bandwidths bw;
  bw.h_y = 0.123456789012345678;
  bw.h_x = Eigen::VectorXd(2);
  bw.h_x << 0.3, 1.7e-5;
  const Bandwidths b2 = bandwidths_from_json_string(to_json_string(bw));
  CHECK(b2.h_y == bw.h_y);
  CHECK(b2.h_x == bw.h_x);
  CHECK_THROWS_AS(bandwidths_from_json_string("{\"h_y\": 0.5}"), ParseError);
  CHECK_THROWS_AS(bandwidths_from_json_string("[1,2]"), ParseError);
  // Negative bandwidths parse but fail validation.
  CHECK_THROWS(bandwidths_from_json_string("{\"h_y\": -1.0, \"h_x\": [0.5]}"));
}

TEST_CASE("serialize: dataset CSV round-trip is bitwise") {
  Rng rng(17);
  std::normal_distribution<double> gauss;
  Dataset d;
  d.y = Eigen::VectorXd(25);
  d.x = Eigen::MatrixXd(25, 3);
  for (int i = 0; i < 25; ++i) {
    d.y[i] = std::exp(3.0 * gauss(rng)) * (i % 2 ? 1 : -1);
    for (int k = 0; k < 3; ++k) d.x(i, k) = gauss(rng) / 3.0;
  }
  testing::TempDir dir;
  const std::string path = dir.file("data.csv");
  save_dataset_csv(d, path);

  const std::string text = testing::read_file(path);
  CHECK(text.rfind("# mixcde-dataset v1\n", 0) == 0);
  CHECK(text.find("y,x1,x2,x3\n") != std::string::npos);

  const Dataset d2 = load_dataset_csv(path);
  REQUIRE(d2.n() == 25);
  REQUIRE(d2.d_x() == 3);
  CHECK(d2.y == d.y);
  CHECK(d2.x == d.x);

  // Saving the reloaded dataset reproduces the file byte for byte.
  const std::string path2 = dir.file("data2.csv");
  save_dataset_csv(d2, path2);
  CHECK(testing::read_file(path2) == text);
}

TEST_CASE("serialize: dataset CSV error handling") {
  testing::TempDir dir;
  auto load_text = [&](const std::string& name, const std::string& body) {
    const std::string p = dir.file("") + name;
    testing::write_file(p, body);
    return load_dataset_csv(p);
  };
  CHECK_THROWS_AS(load_dataset_csv(dir.file("missing.csv")), Error);
  CHECK_THROWS_AS(load_text("empty.csv", ""), ParseError);
  CHECK_THROWS_AS(load_text("header.csv", "a,b\n1,2\n"), ParseError);
  CHECK_THROWS_AS(load_text("short.csv", "y,x1\n0.5\n"), ParseError);
  CHECK_THROWS_AS(load_text("long.csv", "y,x1\n0.5,1,2\n"), ParseError);
  CHECK_THROWS_AS(load_text("alpha.csv", "y,x1\n0.5,abc\n"), ParseError);
  // Non-finite values parse but fail dataset validation.
  CHECK_THROWS_AS(load_text("inf.csv", "y,x1\ninf,0.5\n"), DomainError);

  SUBCASE("line numbers point at the offending row") {
    const std::string p = dir.file("late.csv");
    testing::write_file(p, "# mixcde-dataset v1\ny,x1\n0.5,0.25\n0.7,oops\n");
    try {
      load_dataset_csv(p);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.record == 4);
    }
  }
  SUBCASE("comments and blank lines between rows are skipped") {
    const Dataset d = load_text("gaps.csv", "y,x1\n0.5,0.25\n\n# checkpoint\n0.7,0.75\n");
    REQUIRE(d.n() == 2);
    CHECK(d.y[1] == 0.7);
    CHECK(d.x(1, 0) == 0.75);
  }
}
