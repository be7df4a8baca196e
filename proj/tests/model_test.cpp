#include "doctest.h"

#include <algorithm>

#include "abp/engine.hpp"
#include "abp/model.hpp"

#include "support/fixtures.hpp"

using namespace abp;

namespace {

SpecParts pizza_parts() {
    SpecParts parts;
    parts.name = "pizza-delivery";
    parts.objects = {
        {"checkedOrder", ObjectKind::Document, {"KO", "OK"}, false},
        {"customerNotice", ObjectKind::Message, {}, false},
        {"fullfilledOrder", ObjectKind::Record, {}, false},
        {"order", ObjectKind::Document, {}, false},
        {"pizzaDone", ObjectKind::Record, {}, true},
        {"pizzaSchedule", ObjectKind::Record, {}, false},
    };
    parts.goals = {
        {"AcquireOrder", {{"checkedOrder", {"KO", "OK"}}}, BranchType::Xor, {}},
        {"CookedPizza", {{"pizzaDone", {}}}, {}, {}},
        {"CustomerAlerted", {{"customerNotice", {}}}, {}, {}},
        {"KitchenAlerted", {{"pizzaSchedule", {}}}, {}, {}},
        {"PizzaDelivered", {{"fullfilledOrder", {}}}, {}, {}},
    };
    const std::set<Capability> caps{Capability::Create, Capability::Read};
    parts.agents = {
        {"a1", caps, {{"order", {}}}, {}, {{"checkedOrder", {"KO", "OK"}}},
         "AcquireOrder", "stub"},
        {"a2", caps, {{"checkedOrder", {"KO"}}}, {}, {{"customerNotice", {}}},
         "CustomerAlerted", "stub"},
        {"a3", caps, {{"checkedOrder", {"OK"}}}, {}, {{"pizzaSchedule", {}}},
         "KitchenAlerted", "stub"},
        {"a4", caps, {{"pizzaSchedule", {}}}, {}, {{"pizzaDone", {}}},
         "CookedPizza", "stub"},
        {"a5", caps, {{"pizzaDone", {}}}, {}, {{"fullfilledOrder", {}}},
         "PizzaDelivered", "stub"},
    };
    parts.start_objects = {{"order", {}}};
    parts.end_objects = {{"customerNotice", {}}, {"fullfilledOrder", {}}};
    parts.capabilities = caps;
    return parts;
}

bool has_error(const std::vector<SpecError>& errors, SpecErrorCode code,
               const std::string& token) {
    return std::any_of(errors.begin(), errors.end(), [&](const SpecError& e) {
        return e.code == code && e.token == token;
    });
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("exactly five capabilities, names round-trip") {
    CHECK(all_capabilities.size() == 5);
    for (Capability cap : all_capabilities)
        CHECK(capability_from_string(to_string(cap)) == cap);
    CHECK_FALSE(capability_from_string("EXECUTE"));
    CHECK_FALSE(capability_from_string("create"));
}

TEST_CASE("ref_matches follows the variant constraint") {
    const ObjectRef ok{"checkedOrder", {"OK"}};
    const ObjectRef any{"checkedOrder", {}};

    CHECK(ref_matches(ok, "checkedOrder", std::string("OK")));
    CHECK(ref_matches(any, "checkedOrder", std::string("KO")));
    CHECK_FALSE(ref_matches(ok, "order", std::nullopt));
    CHECK_FALSE(ref_matches(ok, "checkedOrder", std::nullopt));
    CHECK_FALSE(ref_matches(ok, "checkedOrder", std::string("KO")));
    CHECK(ref_matches(any, "checkedOrder", std::nullopt));
}

TEST_CASE("ref_matches is monotone: widening never unmatches") {
    SplitMix64 rng{2024};
    const std::vector<std::string> tags{"A", "B", "C", "D"};
    for (int round = 0; round < 200; ++round) {
        ObjectRef ref{"x", {}};
        for (const auto& tag : tags)
            if (rng.next() % 2) ref.tags.insert(tag);
        if (ref.tags.empty()) ref.tags.insert("A");
        std::optional<std::string> instance_tag;
        if (rng.next() % 3) instance_tag = tags[rng.next() % tags.size()];

        if (ref_matches(ref, "x", instance_tag)) {
            ObjectRef wider = ref;
            wider.tags.insert(tags[rng.next() % tags.size()]);
            CHECK(ref_matches(wider, "x", instance_tag));
            CHECK(ref_matches(ObjectRef{"x", {}}, "x", instance_tag));
        }
    }
}

TEST_CASE("refs_compatible overlaps constraints") {
    CHECK(refs_compatible({"w", {"A"}}, {"w", {"A", "B"}}));
    CHECK(refs_compatible({"w", {}}, {"w", {"A"}}));
    CHECK_FALSE(refs_compatible({"w", {"A"}}, {"w", {"B"}}));
    CHECK_FALSE(refs_compatible({"w", {"A"}}, {"v", {"A"}}));
}

TEST_CASE("release_tag_options") {
    const ObjectType w{"w", ObjectKind::Document, {"A", "B"}, false};
    const ObjectType plain{"p", ObjectKind::Document, {}, false};

    auto open = release_tag_options({"w", {}}, w);
    REQUIRE(open.size() == 2);
    CHECK(*open[0] == "A");
    CHECK(*open[1] == "B");

    auto narrowed = release_tag_options({"w", {"B"}}, w);
    REQUIRE(narrowed.size() == 1);
    CHECK(*narrowed[0] == "B");

    auto untagged = release_tag_options({"p", {}}, plain);
    REQUIRE(untagged.size() == 1);
    CHECK_FALSE(untagged[0].has_value());
}

TEST_CASE("assemble_spec accepts the worked example") {
    AssembleResult result = assemble_spec(pizza_parts());
    REQUIRE(result.ok());
    CHECK(result.spec->agents.size() == 5);
    CHECK(result.spec->goals.size() == 5);
    CHECK(result.spec->objects.size() == 6);
    CHECK(result.spec->find_agent("a3")->goal == "KitchenAlerted");
    CHECK(result.spec->find_object("pizzaDone")->physical);
}

TEST_CASE("assemble_spec canonicalizes input order") {
    SpecParts parts = pizza_parts();
    std::reverse(parts.agents.begin(), parts.agents.end());
    std::reverse(parts.objects.begin(), parts.objects.end());
    AssembleResult result = assemble_spec(std::move(parts));
    REQUIRE(result.ok());
    CHECK(*result.spec == *assemble_spec(pizza_parts()).spec);
    CHECK(result.spec->agents.front().id == "a1");
    CHECK(result.spec->agents.back().id == "a5");
}

TEST_CASE("empty spec reports the boundary, not duplicates") {
    AssembleResult result = assemble_spec(SpecParts{});
    REQUIRE_FALSE(result.ok());
    CHECK(has_error(result.errors, SpecErrorCode::InvalidField, "start_objects"));
    for (const auto& error : result.errors) {
        CHECK(error.code != SpecErrorCode::DuplicateId);
        if (error.token == "start_objects")
            CHECK(error.message == "OS must be non-empty");
    }
}

TEST_CASE("dangling goal reference names agent and goal") {
    SpecParts parts = pizza_parts();
    parts.agents.push_back({"a9",
                            {Capability::Read},
                            {{"order", {}}},
                            {},
                            {{"pizzaDone", {}}},
                            "NoSuchGoal",
                            "stub"});
    AssembleResult result = assemble_spec(std::move(parts));
    REQUIRE_FALSE(result.ok());
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].code == SpecErrorCode::UnknownGoalRef);
    CHECK(result.errors[0].token == "NoSuchGoal");
    CHECK(result.errors[0].where == "agent a9");
}

TEST_CASE("duplicate ids and undeclared variants are flagged") {
    SpecParts parts = pizza_parts();
    parts.objects.push_back({"order", ObjectKind::Document, {}, false});
    parts.agents[1].triggers = {{"checkedOrder", {"MAYBE"}}};
    parts.goals[1].objects.push_back({"ghost", {}});
    AssembleResult result = assemble_spec(std::move(parts));
    REQUIRE_FALSE(result.ok());
    CHECK(has_error(result.errors, SpecErrorCode::DuplicateId, "order"));
    CHECK(has_error(result.errors, SpecErrorCode::UndeclaredVariant, "MAYBE"));
    CHECK(has_error(result.errors, SpecErrorCode::UnknownObjectRef, "ghost"));
}

TEST_CASE("start objects produced by agents need the override") {
    SpecParts parts = pizza_parts();
    parts.agents[4].finals.push_back({"order", {}});
    AssembleResult rejected = assemble_spec(parts);
    REQUIRE_FALSE(rejected.ok());
    CHECK(has_error(rejected.errors, SpecErrorCode::StartOverlap, "order"));

    parts.allow_start_production = true;
    CHECK(assemble_spec(std::move(parts)).ok());
}

TEST_CASE("agent field invariants") {
    SpecParts parts = pizza_parts();
    parts.agents[0].capabilities.clear();
    parts.agents[1].triggers.clear();
    parts.agents[2].finals.clear();
    parts.agents[3].resources = parts.agents[3].triggers;
    AssembleResult result = assemble_spec(std::move(parts));
    REQUIRE_FALSE(result.ok());
    CHECK(has_error(result.errors, SpecErrorCode::InvalidField, "a1"));
    CHECK(has_error(result.errors, SpecErrorCode::InvalidField, "a2"));
    CHECK(has_error(result.errors, SpecErrorCode::InvalidField, "a3"));
    CHECK(has_error(result.errors, SpecErrorCode::InvalidField, "pizzaSchedule"));
}

TEST_CASE("assemble_spec is total: spec xor errors") {
    SplitMix64 rng{7};
    const std::vector<std::string> pool{"", "x", "y", "x"};
    for (int round = 0; round < 100; ++round) {
        SpecParts parts;
        auto pick = [&] { return pool[rng.next() % pool.size()]; };
        for (int i = 0; i < 3; ++i) {
            if (rng.next() % 2)
                parts.objects.push_back({pick(), ObjectKind::Document, {}, false});
            if (rng.next() % 2)
                parts.goals.push_back({pick(), {{pick(), {}}}, {}, {}});
            if (rng.next() % 2)
                parts.agents.push_back({pick(),
                                        {Capability::Create},
                                        {{pick(), {}}},
                                        {},
                                        {{pick(), {}}},
                                        pick(),
                                        "stub"});
        }
        if (rng.next() % 2) parts.start_objects.push_back({pick(), {}});
        if (rng.next() % 2) parts.end_objects.push_back({pick(), {}});

        AssembleResult result = assemble_spec(std::move(parts));
        CHECK(result.ok() == result.errors.empty());
    }
}

TEST_CASE("scope is the union of the three ref lists") {
    AgentSpec agent{"a",
                    {Capability::Read},
                    {{"x", {}}, {"y", {"A"}}},
                    {{"r", {}}},
                    {{"z", {}}, {"x", {}}},
                    "g",
                    "stub"};
    auto scope = agent.scope();
    CHECK(scope.size() == 4);
    CHECK(std::is_sorted(scope.begin(), scope.end()));
}

TEST_SUITE_END();
