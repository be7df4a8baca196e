#include "doctest.h"

#include <algorithm>
#include <set>

#include "abp/goal_graph.hpp"
#include "abp/spec_io.hpp"
#include "abp/validator.hpp"

#include "support/fixtures.hpp"
#include "support/random_specs.hpp"

using namespace abp;
using namespace abp::test;

namespace {

std::set<std::string> object_ids(const std::vector<ObjectRef>& refs) {
    std::set<std::string> ids;
    for (const auto& ref : refs) ids.insert(ref.object);
    return ids;
}

}  // namespace

TEST_SUITE_BEGIN("spec-io");

TEST_CASE("fixture parses to the worked example") {
    AbpSpec spec = pizza_spec();
    CHECK(spec.name == "pizza-delivery");
    REQUIRE(spec.agents.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(spec.agents[i].id == "a" + std::to_string(i + 1));
    CHECK(spec.goals.size() == 5);
    CHECK(object_ids(spec.start_objects) == std::set<std::string>{"order"});
    CHECK(object_ids(spec.end_objects) ==
          std::set<std::string>{"customerNotice", "fullfilledOrder"});

    const AgentSpec* a3 = spec.find_agent("a3");
    REQUIRE(a3);
    REQUIRE(a3->triggers.size() == 1);
    CHECK(a3->triggers[0] == ObjectRef{"checkedOrder", {"OK"}});
}

TEST_CASE("missing required key is a syntax error naming the key") {
    AssembleResult result = parse_spec(
        R"({"name":"x","objects":[],"goals":[],"start_objects":[],"end_objects":[]})");
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].code == SpecErrorCode::Syntax);
    CHECK(result.errors[0].token == "agents");
}

TEST_CASE("malformed document carries line and column") {
    AssembleResult result = parse_spec("{\n  \"name\": \"x\",\n  !!!\n}");
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].code == SpecErrorCode::Syntax);
    REQUIRE(result.errors[0].pos.has_value());
    CHECK(result.errors[0].pos->line == 3);
}

TEST_CASE("resolution errors get best-effort positions") {
    std::string text = read_fixture("pizza.abp.json");
    const std::string needle = "\"goal\": \"AcquireOrder\"";
    size_t at = text.find(needle);
    REQUIRE(at != std::string::npos);
    text.replace(at, needle.size(), "\"goal\": \"MissingGoal\"");

    AssembleResult result = parse_spec(text);
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].code == SpecErrorCode::UnknownGoalRef);
    CHECK(result.errors[0].token == "MissingGoal");
    REQUIRE(result.errors[0].pos.has_value());
    CHECK(result.errors[0].pos->line > 1);
}

TEST_CASE("serialize then parse is the identity") {
    AbpSpec spec = pizza_spec();
    AssembleResult reparsed = parse_spec(serialize_spec(spec));
    REQUIRE(reparsed.ok());
    CHECK(*reparsed.spec == spec);
}

TEST_CASE("serialization is deterministic and canonically sorted") {
    AbpSpec spec = pizza_spec();
    CHECK(serialize_spec(spec) == serialize_spec(spec));

    AbpSpec shuffled = spec;
    std::reverse(shuffled.agents.begin(), shuffled.agents.end());
    std::reverse(shuffled.goals.begin(), shuffled.goals.end());
    // Canonical order comes back through assembly of raw parts.
    SpecParts parts;
    parts.name = shuffled.name;
    parts.objects = shuffled.objects;
    parts.goals = shuffled.goals;
    parts.agents = shuffled.agents;
    parts.start_objects = shuffled.start_objects;
    parts.end_objects = shuffled.end_objects;
    parts.resource_objects = shuffled.resource_objects;
    parts.capabilities = shuffled.capabilities;
    AssembleResult result = assemble_spec(std::move(parts));
    REQUIRE(result.ok());
    CHECK(serialize_spec(*result.spec) == serialize_spec(spec));
}

TEST_CASE("the shipped fixture is byte-canonical") {
    std::string text = read_fixture("pizza.abp.json");
    CHECK(serialize_spec(parse_or_die(text)) == text);
}

TEST_CASE("slash notation grammar") {
    CHECK(*parse_slash_ref("order") == ObjectRef{"order", {}});
    CHECK(*parse_slash_ref("checkedOrder/OK") == ObjectRef{"checkedOrder", {"OK"}});
    CHECK(*parse_slash_ref("checkedOrder/OK|KO") ==
          ObjectRef{"checkedOrder", {"KO", "OK"}});
    CHECK(*parse_slash_ref("  order  ") == ObjectRef{"order", {}});
    CHECK_FALSE(parse_slash_ref(""));
    CHECK_FALSE(parse_slash_ref("/OK"));
    CHECK_FALSE(parse_slash_ref("x/"));
    CHECK_FALSE(parse_slash_ref("x/A||B"));
}

TEST_CASE("import synthesizes the worked example") {
    AssembleResult result = import_agent_table(pizza_rows());
    REQUIRE(result.ok());
    const AbpSpec& spec = *result.spec;

    CHECK(spec.agents.size() == 5);
    CHECK(spec.goals.size() == 5);
    CHECK(object_ids(spec.start_objects) == std::set<std::string>{"order"});
    CHECK(object_ids(spec.end_objects) ==
          std::set<std::string>{"customerNotice", "fullfilledOrder"});

    // a1's untagged final picks up the tag alphabet the triggers demand.
    CHECK(spec.find_agent("a1")->finals[0] == ObjectRef{"checkedOrder", {"KO", "OK"}});
    CHECK(spec.find_object("checkedOrder")->variants ==
          std::set<std::string>{"KO", "OK"});
    REQUIRE(spec.find_goal("AcquireOrder")->split.has_value());
    CHECK(*spec.find_goal("AcquireOrder")->split == BranchType::Xor);
    CHECK_FALSE(spec.find_goal("CookedPizza")->split.has_value());

    GoalGraph graph = build_goal_graph(spec);
    ValidationReport report = validate_spec(spec, graph);
    CHECK(report.verdict == Verdict::Valid);
    CHECK(report.findings.empty());
}

TEST_CASE("import of a single row infers a one-agent chain") {
    AssembleResult result = import_agent_table(
        {{"a1", "AcquireOrder", {"order"}, {"checkedOrder"}, "AcquireOrder"}});
    REQUIRE(result.ok());
    CHECK(result.spec->agents.size() == 1);
    CHECK(result.spec->goals.size() == 1);
    CHECK(object_ids(result.spec->start_objects) == std::set<std::string>{"order"});
    CHECK(object_ids(result.spec->end_objects) ==
          std::set<std::string>{"checkedOrder"});
}

TEST_CASE("import rejects duplicate ids and mixed final tagging") {
    auto rows = pizza_rows();
    rows.push_back(rows[0]);
    AssembleResult dup = import_agent_table(rows);
    REQUIRE_FALSE(dup.ok());
    CHECK(dup.errors[0].code == SpecErrorCode::DuplicateAgentId);

    AssembleResult mixed = import_agent_table({
        {"a1", "", {"order"}, {"checkedOrder"}, "G1"},
        {"a2", "", {"checkedOrder/OK"}, {"checkedOrder/OK"}, "G2"},
    });
    REQUIRE_FALSE(mixed.ok());
    CHECK(std::any_of(mixed.errors.begin(), mixed.errors.end(), [](const SpecError& e) {
        return e.code == SpecErrorCode::ConflictingVariantUse &&
               e.token == "checkedOrder";
    }));
}

TEST_CASE("import never invents identifiers") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        AbpSpec generated = random_spec(seed);
        std::vector<AgentTableRow> rows;
        std::set<std::string> input_tokens;
        for (const auto& agent : generated.agents) {
            AgentTableRow row;
            row.agent_id = agent.id;
            row.goal = agent.goal;
            input_tokens.insert(agent.id);
            input_tokens.insert(agent.goal);
            for (const auto& ref : agent.triggers) {
                row.trigger_objects.push_back(to_string(ref));
                input_tokens.insert(ref.object);
                for (const auto& tag : ref.tags) input_tokens.insert(tag);
            }
            for (const auto& ref : agent.finals) {
                row.final_objects.push_back(to_string(ref));
                input_tokens.insert(ref.object);
                for (const auto& tag : ref.tags) input_tokens.insert(tag);
            }
            rows.push_back(std::move(row));
        }
        AssembleResult result = import_agent_table(rows);
        REQUIRE(result.ok());
        for (const auto& object : result.spec->objects) {
            CHECK(input_tokens.count(object.id));
            for (const auto& tag : object.variants) CHECK(input_tokens.count(tag));
        }
        for (const auto& goal : result.spec->goals) CHECK(input_tokens.count(goal.id));
        for (const auto& agent : result.spec->agents) CHECK(input_tokens.count(agent.id));
        for (const auto& ref : result.spec->start_objects)
            CHECK(input_tokens.count(ref.object));
        for (const auto& ref : result.spec->end_objects)
            CHECK(input_tokens.count(ref.object));
    }
}

TEST_CASE("csv reader mirrors the table") {
    CsvResult csv = parse_agent_table_csv(read_fixture("pizza.abp.csv"));
    REQUIRE(csv.ok());
    REQUIRE(csv.rows.size() == 5);
    CHECK(csv.rows[0].agent_id == "a1");
    CHECK(csv.rows[0].competences == "Get&CheckOrder");
    CHECK(csv.rows[2].trigger_objects == std::vector<std::string>{"checkedOrder/OK"});
    CHECK(csv.rows[4].goal == "PizzaDelivered");

    CsvResult bad_header = parse_agent_table_csv("Agent,Stuff\n");
    CHECK_FALSE(bad_header.ok());
    CsvResult bad_row = parse_agent_table_csv(
        "Agent ID,Competences,Trigger objects,Final objects,Goal\na1,x\n");
    CHECK_FALSE(bad_row.ok());
    CHECK(bad_row.errors[0].pos->line == 2);
}

TEST_CASE("csv list cells split on semicolons") {
    CsvResult csv = parse_agent_table_csv(
        "Agent ID,Competences,Trigger objects,Final objects,Goal\n"
        "b1,Fan,seed,left;right,Forked\n");
    REQUIRE(csv.ok());
    CHECK(csv.rows[0].final_objects == std::vector<std::string>{"left", "right"});
}

TEST_CASE("random specs round-trip through the document format") {
    for (uint64_t seed = 100; seed < 130; ++seed) {
        AbpSpec spec = random_spec(seed);
        AssembleResult reparsed = parse_spec(serialize_spec(spec));
        REQUIRE(reparsed.ok());
        CHECK(*reparsed.spec == spec);
    }
}

TEST_SUITE_END();
