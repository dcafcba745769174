// File formats: pmf TSV/JSON, covariance JSON, system-spec JSON.
//
// Round trips are checked cell-by-cell at full precision; malformed inputs
// must be rejected with messages naming the offending line or JSON element.

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "pidtri/broja.hpp"
#include "pidtri/catalog.hpp"
#include "pidtri/io.hpp"

using namespace pidtri;

namespace {

// Expects fn() to throw E whose message contains every fragment.
template <typename E = ParseError, typename Fn>
void check_throws_with(Fn&& fn, std::initializer_list<const char*> fragments) {
  try {
    fn();
    FAIL("expected an exception");
  } catch (const E& e) {
    const std::string msg = e.what();
    for (const char* frag : fragments) {
      INFO("message: " << msg);
      REQUIRE(msg.find(frag) != std::string::npos);
    }
  }
}

JointDist3 tsv(const std::string& text, bool normalize = false) {
  std::istringstream in(text);
  return read_pmf_tsv(in, normalize);
}

JointDist3 pmf_json(const std::string& text, bool normalize = false) {
  std::istringstream in(text);
  return read_pmf_json(in, normalize);
}

}  // namespace

TEST_CASE("pmf tsv reading", "[io]") {
  SECTION("comments, blank lines, omitted outcomes, label order") {
    const auto d = tsv(
        "# an AND-flavoured table\n"
        "\n"
        "b a 0 0.5   # inline comment\n"
        "a a 1 0.25\n"
        "a b 0 0.25\n");
    REQUIRE(d.nx() == 2);
    REQUIRE(d.ny() == 2);
    REQUIRE(d.nz() == 2);
    // First appearance wins: x saw "b" before "a".
    REQUIRE(d.alphabet(Role::X).labels() == std::vector<std::string>{"b", "a"});
    REQUIRE(d.alphabet(Role::Y).labels() == std::vector<std::string>{"a", "b"});
    REQUIRE(d.alphabet(Role::Z).labels() == std::vector<std::string>{"0", "1"});
    REQUIRE(d.p(0, 0, 0) == 0.5);
    REQUIRE(d.p(1, 0, 1) == 0.25);
    REQUIRE(d.p(1, 1, 0) == 0.25);
    REQUIRE(d.p(0, 1, 1) == 0.0);  // omitted outcome is zero
  }

  SECTION("field-count errors name the line") {
    check_throws_with([] { tsv("a b 0.5\n"); }, {"line 1", "expected 4 fields"});
    check_throws_with([] { tsv("# ok\na b c 0.5 extra\n"); }, {"line 2", "trailing field"});
  }

  SECTION("bad probabilities name the line") {
    check_throws_with([] { tsv("a b c half\n"); }, {"line 1", "cannot parse probability"});
    check_throws_with([] { tsv("a b c 0.5x\n"); }, {"line 1", "0.5x"});
    check_throws_with([] { tsv("a b c nan\na b d 1.0\n"); }, {"line 1", "not a number"});
    check_throws_with([] { tsv("a b c -0.25\na b d 1.25\n"); }, {"line 1", "negative"});
  }

  SECTION("duplicate outcomes are rejected, naming both lines") {
    check_throws_with([] { tsv("a b c 0.5\n\na b c 0.5\n"); },
                      {"line 3", "repeats outcome (a, b, c)", "line 1"});
  }

  SECTION("empty input") {
    check_throws_with([] { tsv(""); }, {"no outcomes"});
    check_throws_with([] { tsv("# only comments\n\n"); }, {"no outcomes"});
  }

  SECTION("off-normalization is rejected unless normalize is requested") {
    check_throws_with([] { tsv("a b c 0.5\nd e f 0.4\n"); }, {"total mass"});
    const auto d = tsv("a b c 0.5\nd e f 0.4\n", true);
    REQUIRE_THAT(d.p(0, 0, 0), Catch::Matchers::WithinULP(0.5 / 0.9, 2));
  }
}

TEST_CASE("pmf tsv round trip", "[io]") {
  const JointDist3 original = make_system({SystemKind::And, {{"lambda", 0.7}}, {}});
  std::ostringstream out;
  write_pmf_tsv(out, original);
  const JointDist3 back = tsv(out.str());
  REQUIRE(back.nx() == original.nx());
  REQUIRE(back.ny() == original.ny());
  REQUIRE(back.nz() == original.nz());
  for (Role r : {Role::X, Role::Y, Role::Z})
    REQUIRE(back.alphabet(r).labels() == original.alphabet(r).labels());
  for (std::size_t ix = 0; ix < original.nx(); ++ix)
    for (std::size_t iy = 0; iy < original.ny(); ++iy)
      for (std::size_t iz = 0; iz < original.nz(); ++iz)
        REQUIRE(back.p(ix, iy, iz) == original.p(ix, iy, iz));  // bitwise

  SECTION("labels with whitespace cannot be serialized") {
    const JointDist3 bad(Alphabet({"a b"}), Alphabet({"y"}), Alphabet({"z"}), {1.0});
    std::ostringstream sink;
    check_throws_with<std::invalid_argument>([&] { write_pmf_tsv(sink, bad); },
                                             {"a b", "whitespace"});
  }
}

TEST_CASE("pmf json reading", "[io]") {
  SECTION("documented shape with string and integer labels") {
    const auto d = pmf_json(R"({
      "alphabets": {"X": ["off", "on"], "Y": [0, 1], "Z": ["0", "1"]},
      "pmf": [
        {"x": "off", "y": 0, "z": "0", "p": 0.5},
        {"x": "on",  "y": 1, "z": "1", "p": 0.25},
        {"x": "on",  "y": 0, "z": "1", "p": 0.25}
      ]
    })");
    REQUIRE(d.alphabet(Role::X).labels() == std::vector<std::string>{"off", "on"});
    // Integer labels map to their decimal strings.
    REQUIRE(d.alphabet(Role::Y).labels() == std::vector<std::string>{"0", "1"});
    REQUIRE(d.p(0, 0, 0) == 0.5);
    REQUIRE(d.p(1, 1, 1) == 0.25);
    REQUIRE(d.p(1, 0, 1) == 0.25);
    REQUIRE(d.p(0, 1, 0) == 0.0);
    // Alphabet order is authoritative even for outcomes never mentioned.
    REQUIRE(d.nx() * d.ny() * d.nz() == 8);
  }

  SECTION("labels must come from the declared alphabets") {
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": "a", "y": "b", "z": "MISSING", "p": 1.0}]})");
        },
        {"pmf[0].z", "MISSING", "not in alphabet \"Z\""});
  }

  SECTION("structural errors are located") {
    check_throws_with([] { pmf_json("{"); }, {"pmf json"});
    check_throws_with([] { pmf_json("{\"pmf\": []}"); }, {"alphabets"});
    check_throws_with(
        [] { pmf_json(R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]}, "pmf": []})"); },
        {"no outcomes"});
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": "a", "y": "b", "p": 1.0}]})");
        },
        {"pmf[0]", "missing \"z\""});
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": "a", "y": "b", "z": "c", "p": "lots"}]})");
        },
        {"pmf[0].p", "number"});
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": [2.5], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": 2.5, "y": "b", "z": "c", "p": 1.0}]})");
        },
        {"alphabets.X[0]", "string or integer"});
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": ["a", "a"], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": "a", "y": "b", "z": "c", "p": 1.0}]})");
        },
        {"alphabets.X[1]", "repeats label"});
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": "a", "y": "b", "z": "c", "p": 0.5},
                               {"x": "a", "y": "b", "z": "c", "p": 0.5}]})");
        },
        {"pmf[1]", "repeats outcome"});
    check_throws_with(
        [] {
          pmf_json(R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]},
                       "pmf": [{"x": "a", "y": "b", "z": "c", "p": 1.0}], "extra": 1})");
        },
        {"unknown key \"extra\""});
  }

  SECTION("normalization opt-in") {
    const char* text = R"({"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c", "d"]},
                           "pmf": [{"x": "a", "y": "b", "z": "c", "p": 3.0},
                                   {"x": "a", "y": "b", "z": "d", "p": 1.0}]})";
    check_throws_with([&] { pmf_json(text); }, {"total mass"});
    const auto d = pmf_json(text, true);
    REQUIRE(d.p(0, 0, 0) == 0.75);
  }
}

TEST_CASE("pmf json round trip", "[io]") {
  const JointDist3 original = make_system({SystemKind::Dice, {{"alpha", 3}, {"lambda", 0.4}}, {}});
  std::ostringstream out;
  write_pmf_json(out, original);
  std::istringstream in(out.str());
  const JointDist3 back = read_pmf_json(in);
  for (Role r : {Role::X, Role::Y, Role::Z})
    REQUIRE(back.alphabet(r).labels() == original.alphabet(r).labels());
  for (std::size_t ix = 0; ix < original.nx(); ++ix)
    for (std::size_t iy = 0; iy < original.ny(); ++iy)
      for (std::size_t iz = 0; iz < original.nz(); ++iz)
        REQUIRE(back.p(ix, iy, iz) == original.p(ix, iy, iz));
}

TEST_CASE("pmf auto-detection", "[io]") {
  std::istringstream as_json(R"(  {"alphabets": {"X": ["a"], "Y": ["b"], "Z": ["c"]},
                                   "pmf": [{"x": "a", "y": "b", "z": "c", "p": 1.0}]})");
  REQUIRE(read_pmf_auto(as_json).p(0, 0, 0) == 1.0);
  std::istringstream as_tsv("a b c 1.0\n");
  REQUIRE(read_pmf_auto(as_tsv).p(0, 0, 0) == 1.0);
}

TEST_CASE("covariance json", "[io]") {
  SECTION("reads the documented shape") {
    std::istringstream in(R"({"cov": [[1.0, 0.5, 0.3], [0.5, 1.0, 0.2], [0.3, 0.2, 1.0]]})");
    const GaussianCov g = read_cov_json(in);
    REQUIRE(g.cov[0][1] == 0.5);
    REQUIRE(g.cov[2][0] == 0.3);
    REQUIRE(g.correlation(Role::X, Role::Y) == 0.5);
  }

  SECTION("round trip") {
    const GaussianCov g({{{2.0, 0.4, -0.3}, {0.4, 1.5, 0.1}, {-0.3, 0.1, 0.8}}});
    std::ostringstream out;
    write_cov_json(out, g);
    std::istringstream in(out.str());
    const GaussianCov back = read_cov_json(in);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) REQUIRE(back.cov[i][k] == g.cov[i][k]);
  }

  SECTION("shape and validity errors") {
    check_throws_with([] { std::istringstream in("{}"); read_cov_json(in); }, {"cov"});
    check_throws_with([] { std::istringstream in(R"({"cov": [[1, 0], [0, 1]]})"); read_cov_json(in); },
                      {"3 rows"});
    check_throws_with(
        [] {
          std::istringstream in(R"({"cov": [[1, 0, 0], [0, 1, "x"], [0, 0, 1]]})");
          read_cov_json(in);
        },
        {"(1,2)", "number"});
    // Asymmetry is caught by GaussianCov's own validation and reported as a parse error.
    check_throws_with(
        [] {
          std::istringstream in(R"({"cov": [[1, 0.5, 0], [0.1, 1, 0], [0, 0, 1]]})");
          read_cov_json(in);
        },
        {"cov json", "symmetric"});
    // Exact degeneracy keeps its dedicated type so callers can distinguish it.
    std::istringstream degenerate(R"({"cov": [[1, 1, 0], [1, 1, 0], [0, 0, 1]]})");
    REQUIRE_THROWS_AS(read_cov_json(degenerate), DegeneracyError);
  }
}

TEST_CASE("system-spec json", "[io]") {
  SECTION("kind with params") {
    std::istringstream in(R"({"kind": "and", "params": {"lambda": 0.5}})");
    const SystemSpec spec = read_system_json(in);
    REQUIRE(spec.kind == SystemKind::And);
    REQUIRE(spec.params.at("lambda") == 0.5);
    REQUIRE_FALSE(spec.markov.has_value());
    const JointDist3 d = make_system(spec);
    const JointDist3 direct = make_system({SystemKind::And, {{"lambda", 0.5}}, {}});
    for (std::size_t i = 0; i < d.cells(); ++i) REQUIRE(d.probs()[i] == direct.probs()[i]);
  }

  SECTION("kind without params") {
    std::istringstream in(R"({"kind": "triadic"})");
    const SystemSpec spec = read_system_json(in);
    REQUIRE(spec.kind == SystemKind::Triadic);
    REQUIRE(spec.params.empty());
  }

  SECTION("markov tables") {
    std::istringstream in(R"({
      "kind": "markov",
      "markov": {
        "pz": [0.25, 0.75],
        "x_given_z": [[0.9, 0.1], [0.2, 0.8]],
        "y_given_z": [[0.6, 0.4], [0.3, 0.7]]
      }
    })");
    const SystemSpec spec = read_system_json(in);
    REQUIRE(spec.kind == SystemKind::Markov);
    REQUIRE(spec.markov.has_value());
    REQUIRE(spec.markov->pz == std::vector<double>{0.25, 0.75});
    REQUIRE(spec.markov->x_given_z[1][0] == 0.2);
    REQUIRE(spec.markov->y_given_z[0][1] == 0.4);
    REQUIRE_NOTHROW(make_system(spec));
  }

  SECTION("errors") {
    check_throws_with([] { std::istringstream in(R"({"kind": "nand"})"); read_system_json(in); },
                      {"unknown system kind", "nand"});
    check_throws_with([] { std::istringstream in(R"({"params": {}})"); read_system_json(in); },
                      {"\"kind\""});
    check_throws_with(
        [] {
          std::istringstream in(R"({"kind": "and", "params": {"lambda": "big"}})");
          read_system_json(in);
        },
        {"parameter \"lambda\"", "number"});
    check_throws_with(
        [] {
          std::istringstream in(R"({"kind": "markov", "markov": {"pz": [1.0]}})");
          read_system_json(in);
        },
        {"markov", "x_given_z"});
    check_throws_with(
        [] {
          std::istringstream in(R"({"kind": "xor", "typo": 1})");
          read_system_json(in);
        },
        {"unknown key \"typo\""});
  }
}

TEST_CASE("file helpers report unopenable paths", "[io]") {
  check_throws_with([] { read_pmf_file("/nonexistent/pmf.tsv"); },
                    {"cannot open file", "/nonexistent/pmf.tsv"});
  check_throws_with([] { read_cov_file("/nonexistent/cov.json"); }, {"cannot open"});
  check_throws_with([] { read_system_file("/nonexistent/system.json"); }, {"cannot open"});
}
