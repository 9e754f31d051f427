#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "hostpar/io.hpp"
#include "hostpar/reference_models.hpp"
#include "support.hpp"

using namespace hostpar;

TEST_CASE("bundled model files match the builders") {
  for (const auto& m : reference::all()) {
    CAPTURE(m.file);
    const ModelFile built = m.build();
    const ModelFile loaded = load_model(std::filesystem::path(HOSTPAR_MODEL_DIR) / m.file);
    CHECK(loaded.params == built.params);
    CHECK(loaded.name == built.name);
    CHECK(validate(loaded).ok());
  }
}

TEST_CASE("round trip is field-exact") {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 30; ++i) {
    ModelFile f;
    f.params = testing::random_model(gen);
    f.name = "random " + std::to_string(i);
    f.relaxed = i % 2 == 0;
    const ModelFile back = parse_model(model_to_json(f));
    CHECK(back.params == f.params);
    CHECK(back.name == f.name);
    CHECK(back.relaxed == f.relaxed);
    CHECK(params_hash(back.params) == params_hash(f.params));
  }
}

TEST_CASE("params hash distinguishes models") {
  CHECK(params_hash(reference::m1().params) != params_hash(reference::m2().params));
  CHECK(params_hash(reference::m1().params).size() == 16);
  ModelFile renamed = reference::m1();
  renamed.name = "other";
  CHECK(params_hash(renamed.params) == params_hash(reference::m1().params));
}

TEST_CASE("parse errors carry field and line") {
  try {
    load_model(std::filesystem::path(HOSTPAR_TEST_DATA) / "bad_syntax.json");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  const std::string missing = "{\n \"p_AA\": 0.5,\n \"p_AB\": 0.25,\n \"p_BB\": 0.25\n}";
  try {
    parse_model(missing);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "law_A_AA");
  }
  std::string bad_count = model_to_json(reference::m1());
  bad_count.replace(bad_count.find("[[1,1,1.0]]"), 11, "[[-1,1,1.0]]");
  try {
    parse_model(bad_count);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "law_A_BB[0]");
    CHECK(e.line() == 8);
  }
  std::string extra = model_to_json(reference::m1());
  extra.insert(2, "  \"bogus\": 1,\n");
  CHECK_THROWS_AS(parse_model(extra), ParseError);
}

TEST_CASE("normalisation failure names the law") {
  try {
    load_model(std::filesystem::path(HOSTPAR_TEST_DATA) / "bad_norm.json");
    FAIL("expected NormalizationError");
  } catch (const NormalizationError& e) {
    CHECK(e.law() == "law_B");
  }
}

TEST_CASE("csv writers") {
  const ModelFile f = reference::m1();
  const ValidatedModel m = validate(f).value();
  const Trajectory t = simulate_tree(m, 0, 1);
  std::ostringstream out;
  write_trajectory_csv(out, {"simulate", params_hash(f.params), 1}, {t}, derive(m));
  std::istringstream in(out.str());
  std::string header, columns, row, extra;
  std::getline(in, header);
  std::getline(in, columns);
  std::getline(in, row);
  CHECK(header.find("params_hash=" + params_hash(f.params)) != std::string::npos);
  CHECK(header.find("seed=1") != std::string::npos);
  CHECK(columns == "replicate,n,G_star_A,G_star_B,clean_A,clean_B,Z_A,Z_B,W_n,LA_n,L_n,truncated_flag");
  CHECK(row == "0,0,1,0,0,0,1,0,1,1,1,0");
  CHECK_FALSE(std::getline(in, extra));

  PmfVector p(2);
  p.p = {0.25, 0.4, 0.35};
  std::ostringstream pmf;
  write_pmf_csv(pmf, {"exact", "x", std::nullopt}, p);
  CHECK(pmf.str().find("k,probability\n0,0.25\n1,0.4\n2,0.35\n") != std::string::npos);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.123, 0.16000000000000003}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("classify report") {
  const ModelFile f = reference::m1();
  const RegimeReport r = classify(validate(f).value());
  const std::string text = classify_text(f, r);
  CHECK(text.find("bpre_class: supercritical") != std::string::npos);
  CHECK(text.find("L_trivial: true") != std::string::npos);
  CHECK(text.find("mu_0B * mu_1B = 0.75 vs 1") != std::string::npos);
  const std::string json = classify_json(f, r);
  CHECK(json.find("\"L_trivial\": true") != std::string::npos);
}
