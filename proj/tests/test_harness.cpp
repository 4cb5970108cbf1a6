#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ergolab/config.hpp"
#include "ergolab/experiments.hpp"
#include "ergolab/report.hpp"
#include "ergolab/version.hpp"

using namespace ergolab;

namespace {

report::Report run(const std::string& kind, const std::string& text, std::size_t samples = 0) {
  experiments::RunOptions opt;
  opt.samples = samples;
  opt.config_text = text;
  return experiments::run_experiment(kind, config::parse_config_text(text), opt);
}

std::size_t count_anchor(const report::Report& rep, const std::string& anchor) {
  std::size_t n = 0;
  for (const auto& r : rep.records)
    if (r.claim_anchor == anchor) ++n;
  return n;
}

const report::CheckRecord* first_anchor(const report::Report& rep, const std::string& anchor) {
  for (const auto& r : rep.records)
    if (r.claim_anchor == anchor) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("config text parses into nested blocks with ordered entries") {
  const std::string text =
      "# leading comment\n"
      "seed 42\n"
      "grid 10 20   # trailing comment\n"
      "ratio 13/64\n"
      "name alpha\n"
      "\n"
      "outer one two {\n"
      "  key a b\n"
      "  inner {\n"
      "    depth 3\n"
      "  }\n"
      "  key c\n"
      "}\n";
  const auto root = config::parse_config_text(text);

  CHECK(root.name == "root");
  CHECK(root.has("seed"));
  CHECK_FALSE(root.has("missing"));
  CHECK(root.integer("seed") == 42);
  CHECK(root.integers("grid") == std::vector<long long>{10, 20});
  CHECK(root.rational("ratio") == Rational(Integer(13), Integer(64)));
  CHECK(root.value("name") == "alpha");
  CHECK(root.value_or("absent", "fallback") == "fallback");
  CHECK(root.integer_or("absent", 7) == 7);
  CHECK(root.find("missing") == nullptr);

  CHECK_THROWS_AS(root.value("grid"), std::invalid_argument);
  CHECK_THROWS_AS(root.value_or("grid", "x"), std::invalid_argument);
  CHECK_THROWS_AS(root.integer("name"), std::invalid_argument);
  CHECK_THROWS_AS(root.values("missing"), std::invalid_argument);

  REQUIRE(root.children.size() == 1);
  const auto& outer = root.child("outer");
  CHECK(outer.args == std::vector<std::string>{"one", "two"});
  CHECK(outer.values("key") == std::vector<std::string>{"a", "b"});
  CHECK(outer.entries.size() == 2);
  CHECK(outer.child("inner").integer("depth") == 3);
  CHECK(root.find_child("nothing") == nullptr);
  CHECK_THROWS_AS(root.child("nothing"), std::invalid_argument);
  CHECK(root.children_named("outer").size() == 1);
  CHECK(outer.children_named("inner").size() == 1);
}

TEST_CASE("config parse errors carry the offending line") {
  CHECK_THROWS_WITH(config::parse_config_text("a 1\n}\n"),
                    Catch::Matchers::ContainsSubstring("(line 2)"));
  CHECK_THROWS_WITH(config::parse_config_text("outer {\nkey 1\n"),
                    Catch::Matchers::ContainsSubstring("unclosed"));
  CHECK_THROWS_WITH(config::parse_config_text("{\n"),
                    Catch::Matchers::ContainsSubstring("block without a name"));
  CHECK_THROWS_AS(config::parse_config_text("x {\n}\n}\n"), std::invalid_argument);
}

TEST_CASE("claim index names every anchor exactly once") {
  const auto& table = report::claim_index();
  CHECK(table.size() == 36);
  std::set<std::string> seen;
  for (const auto& [anchor, description] : table) {
    CHECK(seen.insert(anchor).second);
    CHECK_FALSE(description.empty());
  }
  CHECK(report::known_anchor("markov.rank.full"));
  CHECK(report::known_anchor("report.determinism.rerun"));
  CHECK_FALSE(report::known_anchor("nope"));
}

TEST_CASE("reports refuse records with unknown anchors") {
  report::Report rep;
  rep.kind = "markov-verify";
  report::CheckRecord r;
  r.claim_anchor = "bogus.anchor";
  rep.records.push_back(r);
  CHECK_THROWS_AS(report::validate_anchors(rep), std::logic_error);
  std::ostringstream os;
  CHECK_THROWS_AS(report::write_csv(rep, os), std::logic_error);
  CHECK_THROWS_AS(report::write_json(rep, os), std::logic_error);
}

TEST_CASE("doubles are printed with full round-trip precision") {
  CHECK(report::format_double(0.5) == "0.5");
  CHECK(report::format_double(2.0) == "2");
  CHECK(report::format_double(0.125) == "0.125");
  CHECK(report::format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(report::format_double(0.0) == "0");
}

TEST_CASE("csv serialization is a fixed byte layout") {
  report::Report rep;
  rep.kind = "markov-verify";
  rep.seed = 7;

  report::CheckRecord a;
  a.claim_anchor = "entropy.beta.one-bit";
  a.kind = "markov-verify";
  a.exact = true;
  a.value = 1.0;
  a.expected = 1.0;
  a.tolerance = 0.0;
  a.pass = true;
  rep.records.push_back(a);

  report::CheckRecord b;
  b.claim_anchor = "poisson.measure.formula";
  b.kind = "poisson-measure";
  b.exact = false;
  b.value = 0.25;
  b.expected = 0.5;
  b.tolerance = 0.125;
  b.pass = false;
  b.note = "csv drops notes";
  rep.records.push_back(b);

  std::ostringstream os;
  report::write_csv(rep, os);
  CHECK(os.str() ==
        "claim_anchor,kind,exact_flag,value,expected,tolerance,verdict,seed\n"
        "entropy.beta.one-bit,markov-verify,exact,1,1,0,pass,7\n"
        "poisson.measure.formula,poisson-measure,mc,0.25,0.5,0.125,fail,7\n");

  std::ostringstream again;
  report::write_csv(rep, again);
  CHECK(again.str() == os.str());
}

TEST_CASE("json serialization round-trips through a parser") {
  report::Report rep;
  rep.kind = "pentropy";
  rep.seed = 11;
  rep.base = "bit";
  rep.config_text = "column bernoulli {\n}\n";

  report::CheckRecord r;
  r.claim_anchor = "pentropy.bernoulli.constant";
  r.kind = "pentropy";
  r.exact = true;
  r.value = 1.0;
  r.expected = 1.0;
  r.tolerance = 1e-12;
  r.pass = true;
  r.note = "j=1";
  rep.records.push_back(r);
  r.note.clear();
  r.pass = false;
  rep.records.push_back(r);

  std::ostringstream os;
  report::write_json(rep, os, false);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j["config"]["kind"] == "pentropy");
  CHECK(j["config"]["seed"] == 11);
  CHECK(j["config"]["base"] == "bit");
  CHECK(j["config"]["text"] == rep.config_text);
  REQUIRE(j["records"].size() == 2);
  CHECK(j["records"][0]["claim_anchor"] == "pentropy.bernoulli.constant");
  CHECK(j["records"][0]["verdict"] == "pass");
  CHECK(j["records"][0]["note"] == "j=1");
  CHECK_FALSE(j["records"][1].contains("note"));
  CHECK(j["records"][1]["verdict"] == "fail");
  CHECK(j["meta"]["version"] == std::string(kVersion));
  CHECK_FALSE(j["meta"].contains("timestamp"));

  std::ostringstream twice;
  report::write_json(rep, twice, false);
  CHECK(twice.str() == os.str());

  std::ostringstream stamped;
  report::write_json(rep, stamped, true);
  const auto js = nlohmann::json::parse(stamped.str());
  const std::string ts = js["meta"]["timestamp"];
  CHECK(ts.size() == 20);
  CHECK(ts.back() == 'Z');
}

TEST_CASE("the shipped claim table matches the built-in index") {
  std::ifstream in(std::string(ERGOLAB_SOURCE_DIR) + "/docs/claims.csv");
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "anchor,description");
  const auto& table = report::claim_index();
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    REQUIRE(i < table.size());
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(line.substr(0, comma) == table[i].first);
    CHECK(line.substr(comma + 1) == "\"" + table[i].second + "\"");
    ++i;
  }
  CHECK(i == table.size());
}

TEST_CASE("markov experiment emits the expected record families") {
  const auto rep = run("markov-verify", "grid 50\na 1/4\nwindows 2\n");
  CHECK(rep.kind == "markov-verify");
  CHECK(rep.seed == 12345);
  CHECK(rep.base == "bit");
  CHECK(rep.all_pass());
  CHECK(count_anchor(rep, "markov.kernel.grid-identities") == 1);
  CHECK(count_anchor(rep, "markov.transfer.constants-fixed") == 1);
  CHECK(count_anchor(rep, "markov.transfer.determinant") == 1);
  CHECK(count_anchor(rep, "entropy.separation.xi-lt-beta") == 1);
  CHECK(count_anchor(rep, "entropy.beta.one-bit") == 1);
  CHECK(count_anchor(rep, "markov.intertwine.exact") == 1);
  CHECK(count_anchor(rep, "markov.rank.full") == 1);
  CHECK(count_anchor(rep, "markov.rank.det-power") == 1);
  CHECK(count_anchor(rep, "markov.chain.blocks") == 0);

  const auto chained =
      run("markov-verify", "grid 20\na 1/3\nwindows 2\nchain {\na 1/3\nblocks 2\nwindow 2\n}\n");
  CHECK(chained.all_pass());
  CHECK(count_anchor(chained, "markov.chain.blocks") == 1);
  CHECK(count_anchor(chained, "markov.chain.entropy-split") == 1);
}

TEST_CASE("module failures become failed records instead of aborting the run") {
  const auto rep = run("markov-verify", "grid 10\na 3/2\nwindows 2\n");
  CHECK_FALSE(rep.all_pass());
  const auto* bad = first_anchor(rep, "markov.transfer.constants-fixed");
  REQUIRE(bad != nullptr);
  CHECK_FALSE(bad->pass);
  CHECK(bad->note.rfind("invalid-parameters:", 0) == 0);

  const auto capped = run("markov-verify", "grid 10\na 1/4\nwindows 13\n");
  const auto* cap = first_anchor(capped, "markov.intertwine.exact");
  REQUIRE(cap != nullptr);
  CHECK_FALSE(cap->pass);
  CHECK(cap->note.rfind("cap-exceeded:", 0) == 0);

  const auto unsettled =
      run("rankone-disjoint", "rule {\nL j\nr 2\nstages 3\n}\nverify 3\n");
  const auto* ns = first_anchor(unsettled, "rankone.disjoint.premise");
  REQUIRE(ns != nullptr);
  CHECK_FALSE(ns->pass);
  CHECK(ns->note.rfind("not-settled:", 0) == 0);
}

TEST_CASE("rank-one build experiment checks the construction invariants") {
  const auto path = (std::filesystem::temp_directory_path() / "ergolab_tower.csv").string();
  const auto rep = run("rankone-build",
                       "stages {\nstage 2 1 1\n}\nexport_tower 1 " + path + "\n");
  CHECK(rep.all_pass());
  CHECK(count_anchor(rep, "rankone.heights.recurrence") == 1);
  CHECK(count_anchor(rep, "rankone.tower.measure") == 1);
  CHECK(count_anchor(rep, "rankone.tower.measure-monotone") == 1);
  CHECK(count_anchor(rep, "rankone.dynamics.measure-preserving") == 1);
  CHECK(count_anchor(rep, "rankone.dynamics.invertible") == 1);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header, row;
  REQUIRE(std::getline(in, header));
  CHECK(header == "lo_num,lo_den,hi_num,hi_den");
  REQUIRE(std::getline(in, row));
  CHECK(row == "0,1,1,1");
  in.close();
  std::remove(path.c_str());

  CHECK_THROWS_AS(run("rankone-build", "grid 5\n"), std::invalid_argument);
}

TEST_CASE("rank-one disjointness experiment covers premise and control") {
  const auto rep = run("rankone-disjoint",
                       "rule {\nL j\nr 2\nstages 3\n}\nverify 1 2\n"
                       "control {\nstages 3\nj 1\nL 1\n}\n");
  CHECK(rep.all_pass());
  CHECK(count_anchor(rep, "rankone.disjoint.premise") == 2);
  CHECK(count_anchor(rep, "rankone.disjoint.control") == 1);
  const auto* control = first_anchor(rep, "rankone.disjoint.control");
  CHECK(control->value == 0.0);

  CHECK_THROWS_AS(run("rankone-disjoint", "stages {\nstage 2 0 0\n}\n"),
                  std::invalid_argument);
}

TEST_CASE("poisson measure experiment pairs each formula with a sampler") {
  const auto rep = run("poisson-measure",
                       "event {\nfactor 0 1/8 0\n}\n"
                       "event {\nfactor 0 1/8 1\nfactor 1/4 3/8 0\n}\n",
                       4000);
  CHECK(rep.all_pass());
  CHECK(count_anchor(rep, "poisson.measure.formula") == 2);
  CHECK(count_anchor(rep, "poisson.measure.mc-4sigma") == 2);
  CHECK(count_anchor(rep, "poisson.measure.additivity") == 1);
  CHECK(count_anchor(rep, "poisson.measure.normalization") == 1);

  CHECK_THROWS_AS(run("poisson-measure", "samples 10\n", 10), std::invalid_argument);
}

TEST_CASE("poisson independence experiment emits identity and sampler records") {
  const auto rep = run("poisson-independence",
                       "A 0 1/8\nB 1/4 3/8\nk 0\nm 0\n", 4000);
  CHECK(rep.all_pass());
  CHECK(count_anchor(rep, "poisson.independence.product-identity") == 1);
  CHECK(count_anchor(rep, "poisson.independence.mc-4sigma") == 1);
  const auto* identity = first_anchor(rep, "poisson.independence.product-identity");
  CHECK(identity->value == 0.0);
}

TEST_CASE("pentropy experiment runs all three column types") {
  const auto rep = run("pentropy",
                       "column bernoulli {\nletters 1/2 1/2\nL j\nj 1 2\n}\n"
                       "column rotation {\nangle 13/64\ncuts 0 1/2\nL j\nj 1 2 3\n}\n"
                       "column suspension {\nrule {\nL j\nr 2\nstages 4\n}\n"
                       "A 0 1/4\nk 0\nL j\nj 1 2\n}\n");
  CHECK(rep.all_pass());
  CHECK(count_anchor(rep, "pentropy.bernoulli.constant") == 2);
  CHECK(count_anchor(rep, "pentropy.rotation.bound") == 3);
  CHECK(count_anchor(rep, "pentropy.suspension.exactflag") == 2);
  CHECK(count_anchor(rep, "pentropy.suspension.constant") == 2);

  const auto coarse = run("pentropy",
                          "column bernoulli {\nletters 1/4 1/4 1/4 1/4\ncells 0 0 1 1\nL j\nj 1\n}\n");
  CHECK(coarse.all_pass());
  const auto* rec = first_anchor(coarse, "pentropy.bernoulli.constant");
  CHECK(rec->value == Catch::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(run("pentropy", "grid 5\n"), std::invalid_argument);
  CHECK_THROWS_AS(run("pentropy", "column {\nj 1\n}\n"), std::invalid_argument);
  CHECK_THROWS_AS(run("pentropy", "column weird {\nj 1\n}\n"), std::invalid_argument);
}

TEST_CASE("unknown experiment kinds are rejected") {
  CHECK_THROWS_AS(run("frobnicate", "grid 5\n"), std::invalid_argument);
}

TEST_CASE("reports carry the options they were produced under") {
  experiments::RunOptions opt;
  opt.seed = 999;
  opt.base = LogBase::natural;
  opt.config_text = "a 1/4\nwindows 2\ngrid 5\n";
  const auto rep = experiments::run_experiment(
      "markov-verify", config::parse_config_text(opt.config_text), opt);
  CHECK(rep.seed == 999);
  CHECK(rep.base == "nat");
  CHECK(rep.config_text == opt.config_text);
  CHECK(rep.all_pass());
}
