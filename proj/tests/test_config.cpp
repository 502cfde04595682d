#include <algorithm>
#include <cstdint>
#include <string>

#include "doctest.h"
#include "mixcde/config.hpp"
#include "mixcde/errors.hpp"
#include "support.hpp"

using namespace mixcde;

TEST_CASE("config: sections, comments, and typed getters") {
  const std::string text =
      "# experiment configuration\n"
      "title = \"rate study\"   # trailing comment\n"
      "\n"
      "[mcmc]\n"
      "iters = 5000\n"
      "burnin = 500\n"
      "step = 0.25        # adapted later\n"
      "adapt = true\n"
      "\n"
      "[data]\n"
      "n = 100\n"
      "seed = 18446744073709551615\n"
      "label = \"tab\\tsep \\\"quoted\\\" line\\n\"\n"
      "scale = -1.5e-3\n"
      "dotted.key = 7\n";
  const Config cfg = Config::parse_string(text);

  CHECK(cfg.get_string("title") == "rate study");
  CHECK(cfg.get_int("mcmc.iters") == 5000);
  CHECK(cfg.get_int("mcmc.burnin") == 500);
  CHECK(cfg.get_double("mcmc.step") == 0.25);
  CHECK(cfg.get_bool("mcmc.adapt") == true);
  CHECK(cfg.get_int("data.n") == 100);
  CHECK(cfg.get_uint64("data.seed") == 18446744073709551615ULL);
  CHECK(cfg.get_string("data.label") == "tab\tsep \"quoted\" line\n");
  CHECK(cfg.get_double("data.scale") == -1.5e-3);
  CHECK(cfg.get_int("data.dotted.key") == 7);

  SUBCASE("presence checks and key listing") {
    CHECK(cfg.has("mcmc.iters"));
    CHECK_FALSE(cfg.has("iters"));  // section prefix is part of the key
    const std::vector<std::string> ks = cfg.keys();
    CHECK(ks.size() == 10);
    CHECK(std::find(ks.begin(), ks.end(), "data.dotted.key") != ks.end());
  }
  SUBCASE("fallbacks apply only to missing keys") {
    CHECK(cfg.get_int("mcmc.iters", 9) == 5000);
    CHECK(cfg.get_int("mcmc.missing", 9) == 9);
    CHECK(cfg.get_double("nope", 2.5) == 2.5);
    CHECK(cfg.get_bool("nope", true) == true);
    CHECK(cfg.get_string("nope", "x") == "x");
    CHECK(cfg.get_uint64("nope", 3) == 3);
  }
  SUBCASE("integers parse as doubles but not vice versa") {
    CHECK(cfg.get_double("mcmc.iters") == 5000.0);
    CHECK_THROWS_AS(cfg.get_int("mcmc.step"), ParseError);
  }
  SUBCASE("negative values are not unsigned") {
    const Config c = Config::parse_string("v = -4\n");
    CHECK(c.get_int("v") == -4);
    CHECK_THROWS_AS(c.get_uint64("v"), ParseError);
  }
}

TEST_CASE("config: type mismatches carry the defining line number") {
  const Config cfg = Config::parse_string("a = 1\nb = \"text\"\nc = maybe\n");
  try {
    cfg.get_int("b");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.record == 2);
  }
  try {
    cfg.get_bool("c");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.record == 3);
  }
  // Quoted numerals stay strings.
  CHECK_THROWS_AS(cfg.get_double("b"), ParseError);
  CHECK(cfg.get_string("c") == "maybe");
  CHECK_THROWS_AS(cfg.get_string("missing"), ParseError);
}

TEST_CASE("config: malformed input is rejected with the offending line") {
  auto line_of = [](const std::string& text) -> long {
    try {
      Config::parse_string(text);
    } catch (const ParseError& e) {
      return e.record;
    }
    return -1;
  };
  CHECK(line_of("a = 1\nb = \"oops\n") == 2);          // unterminated string
  CHECK(line_of("a = 1\na = 2\n") == 2);               // duplicate key
  CHECK(line_of("[s]\nk = 1\n[s2\n") == 3);            // missing ']'
  CHECK(line_of("just words\n") == 1);                 // no '='
  CHECK(line_of("k =\n") == 1);                        // missing value
  CHECK(line_of("k = 1 2\n") == 1);                    // space in bare value
  CHECK(line_of("k = \"x\" trailing\n") == 1);         // text after string
  CHECK(line_of("[s] junk\n") == 1);                   // text after section
  CHECK(line_of(".bad = 1\n") == 1);                   // leading dot
  CHECK(line_of("a..b = 1\n") == 1);                   // empty key segment
  CHECK(line_of("k = \"\\q\"\n") == 1);                // unknown escape
  CHECK(line_of("bad key = 1\n") == 1);                // space inside key

  SUBCASE("section prefix applies to duplicates") {
    // Same bare key in different sections is fine.
    const Config c = Config::parse_string("[a]\nk = 1\n[b]\nk = 2\n");
    CHECK(c.get_int("a.k") == 1);
    CHECK(c.get_int("b.k") == 2);
    // Dotted key colliding with a sectioned key is a duplicate.
    CHECK(line_of("a.k = 1\n[a]\nk = 2\n") == 3);
  }
}

TEST_CASE("config: file round trip and missing file") {
  testing::TempDir dir;
  const std::string path = dir.file("run.toml");
  testing::write_file(path, "[run]\nreps = 3\nout = \"results.csv\"\n");
  const Config cfg = Config::parse_file(path);
  CHECK(cfg.get_int("run.reps") == 3);
  CHECK(cfg.get_string("run.out") == "results.csv");
  CHECK_THROWS_AS(Config::parse_file(dir.file("absent.toml")), ParseError);
}
