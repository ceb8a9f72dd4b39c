#include <doctest.h>

#include "odapsim/scenario.hpp"
#include "test_helpers.hpp"

using namespace odapsim;

namespace {

// Fig. 2 constants for the bundled reference scenario.
struct ProfileRow {
  const char* machine;
  const char* fragment;
  std::int64_t read_bytes;   // 0 = no read
  std::int64_t update_bytes; // 0 = no update
};

constexpr ProfileRow kProfileRows[] = {
    {"M1", "F1", 540, 286}, {"M1", "F3", 0, 110},   {"M1", "F4", 90, 220},
    {"M1", "F5", 54, 110},  {"M1", "F8", 720, 220}, {"M2", "F2", 180, 66},
    {"M2", "F4", 45, 132},  {"M2", "F5", 180, 110}, {"M2", "F7", 315, 110},
    {"M2", "F8", 540, 110}, {"M3", "F1", 315, 55},  {"M3", "F2", 45, 330},
    {"M3", "F3", 360, 330}, {"M3", "F5", 315, 110}, {"M3", "F6", 225, 55},
    {"M3", "F7", 90, 0},    {"M3", "F8", 0, 220},
};

} // namespace

TEST_CASE("bundled scenario matches the reference allocation and profiles") {
  const Scenario sc = testutil::case_study();

  CHECK(sc.catalog.k() == 8);
  CHECK(sc.databases == std::vector<std::string>{"DB1", "DB2", "DB3"});

  // Hosting: DB1 {F1,F5,F8}, DB2 {F4,F7,F8}, DB3 {F2,F3,F5,F6,F7}.
  auto hosted_on = [&](const std::string& db) {
    std::vector<std::string> out;
    for (const Fragment& f : sc.catalog.fragments) {
      const auto dbs = sc.catalog.hosting_dbs(sc.catalog.index_of(f.id));
      if (std::find(dbs.begin(), dbs.end(), db) != dbs.end()) out.push_back(f.id);
    }
    return out;
  };
  CHECK(hosted_on("DB1") == std::vector<std::string>{"F1", "F5", "F8"});
  CHECK(hosted_on("DB2") == std::vector<std::string>{"F4", "F7", "F8"});
  CHECK(hosted_on("DB3") == std::vector<std::string>{"F2", "F3", "F5", "F6", "F7"});

  // Primary of replicated fragments is the lowest-numbered hosting database.
  CHECK(sc.catalog.fragments[sc.catalog.index_of("F5")].primary_db == "DB1");
  CHECK(sc.catalog.fragments[sc.catalog.index_of("F7")].primary_db == "DB2");
  CHECK(sc.catalog.fragments[sc.catalog.index_of("F8")].primary_db == "DB1");

  for (const ProfileRow& row : kProfileRows) {
    const QueryProfile& p = sc.machines[sc.machine_index(row.machine)];
    const int frag = sc.catalog.index_of(row.fragment);
    REQUIRE(frag >= 0);
    if (row.read_bytes > 0) {
      REQUIRE(p.reads.count(frag) == 1);
      CHECK(p.reads.at(frag) == row.read_bytes);
    } else {
      CHECK(p.reads.count(frag) == 0);
    }
    if (row.update_bytes > 0) {
      REQUIRE(p.updates.count(frag) == 1);
      CHECK(p.updates.at(frag) == row.update_bytes);
    } else {
      CHECK(p.updates.count(frag) == 0);
    }
  }
  // No profile entries beyond the table.
  CHECK(sc.machines[0].reads.size() + sc.machines[0].updates.size() == 9);
  CHECK(sc.machines[1].reads.size() + sc.machines[1].updates.size() == 10);
  CHECK(sc.machines[2].reads.size() + sc.machines[2].updates.size() == 12);

  // Workflow: 8 + 5 bobbins, 19 pieces per cut, 85 target.
  REQUIRE(sc.workflow.inputs.size() == 2);
  CHECK(sc.workflow.inputs[0].product_class == "bob1");
  CHECK(sc.workflow.inputs[0].count == 8);
  CHECK(sc.workflow.inputs[1].product_class == "bob2");
  CHECK(sc.workflow.inputs[1].count == 5);
  for (const Stage& st : sc.workflow.stages) CHECK(st.output_multiplicity == 19);
  CHECK(sc.workflow.target_count == 85);
  CHECK(sc.workflow.producible_outputs() == 95);

  CHECK(sc.topology.clusters.size() == 3);
  CHECK(sc.topology.link_rate_bps == doctest::Approx(10e6));
}

TEST_CASE("scenario round-trips through serialization") {
  const Scenario sc = testutil::case_study();
  const Scenario reloaded = load_scenario(save_scenario(sc), "roundtrip");
  CHECK(sc == reloaded);

  const Scenario small = testutil::small_scenario();
  CHECK(small == load_scenario(save_scenario(small), "roundtrip"));
}

TEST_CASE("zero-fragment scenario is valid and degenerate") {
  const Scenario sc = load_scenario(testutil::zero_fragment_scenario_text(), "zero");
  CHECK(sc.catalog.k() == 0);
  const DistributionPattern empty = DistributionPattern::all_database(0);
  CHECK(empty.size() == 0);
  CHECK(empty.index() == 0);
}

TEST_CASE("validation rejects broken scenarios") {
  const std::string base = testutil::small_scenario_text();

  SUBCASE("unknown replica database") {
    std::string text = base;
    const auto pos = text.find("\"replica_dbs\": [\"DBb\"]");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"replica_dbs\": [\"DBb\"]").size(),
                 "\"replica_dbs\": [\"DB9\"]");
    CHECK_THROWS_AS(load_scenario(text, "bad"), ValidationError);
    CHECK_THROWS_WITH_AS(load_scenario(text, "bad"),
                         doctest::Contains("replica_db 'DB9'"), ValidationError);
  }
  SUBCASE("primary listed in replicas") {
    std::string text = base;
    const auto pos = text.find("\"replica_dbs\": [\"DBb\"]");
    text.replace(pos, std::string("\"replica_dbs\": [\"DBb\"]").size(),
                 "\"replica_dbs\": [\"DBa\"]");
    CHECK_THROWS_AS(load_scenario(text, "bad"), ValidationError);
  }
  SUBCASE("unknown key rejected") {
    std::string text = base;
    const auto pos = text.find("\"replication\"");
    text.insert(pos, "\"surprise\": 1,\n  ");
    CHECK_THROWS_WITH_AS(load_scenario(text, "bad"), doctest::Contains("unknown key"),
                         ValidationError);
  }
  SUBCASE("infeasible target count") {
    std::string text = base;
    const auto pos = text.find("\"target_count\": 2");
    // shape yields 2*3 = 6 part1 but only 2 raw2: at most 2 outputs.
    text.replace(pos, std::string("\"target_count\": 2").size(), "\"target_count\": 3");
    CHECK_THROWS_WITH_AS(load_scenario(text, "bad"), doctest::Contains("producible"),
                         ValidationError);
  }
  SUBCASE("zero payload") {
    std::string text = base;
    const auto pos = text.find("\"payload_bytes\": 1000");
    text.replace(pos, std::string("\"payload_bytes\": 1000").size(), "\"payload_bytes\": 0");
    CHECK_THROWS_AS(load_scenario(text, "bad"), ValidationError);
  }
  SUBCASE("malformed text is a parse error with location") {
    CHECK_THROWS_WITH_AS(load_scenario("{ nope", "broken.json"),
                         doctest::Contains("broken.json"), ParseError);
  }
}

TEST_CASE("pattern spec parsing") {
  const FragmentCatalog& catalog = testutil::case_study().catalog;

  SUBCASE("mixed placement") {
    const auto p = DistributionPattern::from_spec("!F1 !F2 !F3 !F4 !F5 F6 !F7 F8", catalog);
    CHECK(p.bit_string() == "00000101");
    CHECK(p.index() == 160); // F6 and F8 on the product
    CHECK(p.on_product(5));
    CHECK(p.on_product(7));
    CHECK_FALSE(p.on_product(0));
  }
  SUBCASE("all negated is the all-database pattern") {
    const auto p =
        DistributionPattern::from_spec("!F1 !F2 !F3 !F4 !F5 !F6 !F7 !F8", catalog);
    CHECK(p.all_on_database());
    CHECK(p == DistributionPattern::all_database(8));
  }
  SUBCASE("all plain is the all-product pattern") {
    const auto p = DistributionPattern::from_spec("F1 F2 F3 F4 F5 F6 F7 F8", catalog);
    CHECK(p.all_on_product());
    CHECK(p.index() == 255);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(DistributionPattern::from_spec("F1 F2", catalog), ParseError);
    CHECK_THROWS_AS(
        DistributionPattern::from_spec("F1 F1 F3 F4 F5 F6 F7 F8", catalog), ParseError);
    CHECK_THROWS_AS(
        DistributionPattern::from_spec("F1 F2 F3 F4 F5 F6 F7 F9", catalog), ParseError);
  }
  SUBCASE("lenient form fills unmentioned fragments with the database side") {
    const auto p = DistributionPattern::from_spec_lenient("F7", catalog);
    CHECK(p.bit_string() == "00000010");
    CHECK(DistributionPattern::from_spec_lenient("ODA", catalog).all_on_database());
    CHECK(DistributionPattern::from_spec_lenient("ODAP", catalog).all_on_product());
  }
  SUBCASE("spec string round trip") {
    const auto p = DistributionPattern::from_index(8, 160);
    CHECK(DistributionPattern::from_spec(p.spec_string(catalog), catalog) == p);
  }
}
