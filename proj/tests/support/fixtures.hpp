#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "abp/model.hpp"
#include "abp/spec_io.hpp"

namespace abp::test {

inline std::string fixture_path(const std::string& name) {
    return std::string(ABP_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::string read_fixture(const std::string& name) {
    return read_file(fixture_path(name));
}

inline AbpSpec parse_or_die(const std::string& text) {
    AssembleResult result = parse_spec(text);
    if (!result.ok()) {
        std::string message = "spec does not parse:";
        for (const auto& error : result.errors) message += "\n  " + to_string(error);
        throw std::runtime_error(message);
    }
    return *result.spec;
}

inline AbpSpec load_fixture_spec(const std::string& name) {
    return parse_or_die(read_fixture(name));
}

inline AbpSpec pizza_spec() { return load_fixture_spec("pizza.abp.json"); }

inline std::vector<AgentTableRow> pizza_rows() {
    return {
        {"a1", "Get&CheckOrder", {"order"}, {"checkedOrder"}, "AcquireOrder"},
        {"a2", "InformingCustomer", {"checkedOrder/KO"}, {"customerNotice"},
         "CustomerAlerted"},
        {"a3", "InformingKitchen", {"checkedOrder/OK"}, {"pizzaSchedule"},
         "KitchenAlerted"},
        {"a4", "CookPizza", {"pizzaSchedule"}, {"pizzaDone"}, "CookedPizza"},
        {"a5", "Delivering", {"pizzaDone"}, {"fullfilledOrder"}, "PizzaDelivered"},
    };
}

inline AbpSpec assemble_or_die(SpecParts parts) {
    AssembleResult result = assemble_spec(std::move(parts));
    if (!result.ok()) {
        std::string message = "spec does not assemble:";
        for (const auto& error : result.errors) message += "\n  " + to_string(error);
        throw std::runtime_error(message);
    }
    return *result.spec;
}

// XOR diamond with a rejoin: a1 releases w tagged A or B, the matching branch
// agent releases the shared object `joined`, a4 carries it to the end.
inline AbpSpec xor_rejoin_diamond() {
    SpecParts parts;
    parts.name = "xor-rejoin-diamond";
    parts.objects = {
        {"seed", ObjectKind::Document, {}, false},
        {"w", ObjectKind::Document, {"A", "B"}, false},
        {"joined", ObjectKind::Document, {}, false},
        {"done", ObjectKind::Document, {}, false},
    };
    parts.goals = {
        {"G1", {{"w", {"A", "B"}}}, BranchType::Xor, std::nullopt},
        {"G4", {{"joined", {}}}, std::nullopt, BranchType::Xor},
        {"G5", {{"done", {}}}, std::nullopt, std::nullopt},
    };
    parts.agents = {
        {"a1", {Capability::Create, Capability::Read}, {{"seed", {}}}, {},
         {{"w", {"A", "B"}}}, "G1", "stub"},
        {"a2", {Capability::Create, Capability::Read}, {{"w", {"A"}}}, {},
         {{"joined", {}}}, "G4", "stub"},
        {"a3", {Capability::Create, Capability::Read}, {{"w", {"B"}}}, {},
         {{"joined", {}}}, "G4", "stub"},
        {"a4", {Capability::Create, Capability::Read}, {{"joined", {}}}, {},
         {{"done", {}}}, "G5", "stub"},
    };
    parts.start_objects = {{"seed", {}}};
    parts.end_objects = {{"done", {}}};
    parts.capabilities = {Capability::Create, Capability::Read};
    return assemble_or_die(std::move(parts));
}

}  // namespace abp::test
