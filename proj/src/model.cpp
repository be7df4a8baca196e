#include "abp/model.hpp"

#include <algorithm>
#include <sstream>

namespace abp {

std::string to_string(Capability c) {
    switch (c) {
        case Capability::Create: return "CREATE";
        case Capability::Read: return "READ";
        case Capability::Update: return "UPDATE";
        case Capability::Delete: return "DELETE";
        case Capability::Archive: return "ARCHIVE";
    }
    return "?";
}

std::optional<Capability> capability_from_string(const std::string& s) {
    for (Capability c : all_capabilities)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::string to_string(ObjectKind k) {
    switch (k) {
        case ObjectKind::Document: return "document";
        case ObjectKind::Message: return "message";
        case ObjectKind::Record: return "record";
    }
    return "?";
}

std::optional<ObjectKind> object_kind_from_string(const std::string& s) {
    if (s == "document") return ObjectKind::Document;
    if (s == "message") return ObjectKind::Message;
    if (s == "record") return ObjectKind::Record;
    return std::nullopt;
}

std::string to_string(BranchType t) {
    switch (t) {
        case BranchType::And: return "AND";
        case BranchType::Or: return "OR";
        case BranchType::Xor: return "XOR";
    }
    return "?";
}

std::optional<BranchType> branch_type_from_string(const std::string& s) {
    if (s == "AND") return BranchType::And;
    if (s == "OR") return BranchType::Or;
    if (s == "XOR") return BranchType::Xor;
    return std::nullopt;
}

std::string to_string(const ObjectRef& ref) {
    if (ref.is_any()) return ref.object;
    std::string out = ref.object + "/";
    bool first = true;
    for (const auto& tag : ref.tags) {
        if (!first) out += "|";
        out += tag;
        first = false;
    }
    return out;
}

std::vector<ObjectRef> AgentSpec::scope() const {
    std::vector<ObjectRef> all;
    all.insert(all.end(), triggers.begin(), triggers.end());
    all.insert(all.end(), resources.begin(), resources.end());
    all.insert(all.end(), finals.begin(), finals.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& items, const std::string& id) {
    for (const auto& item : items)
        if (item.id == id) return &item;
    return nullptr;
}

}  // namespace

const ObjectType* AbpSpec::find_object(const std::string& id) const {
    return find_by_id(objects, id);
}

const GoalSpec* AbpSpec::find_goal(const std::string& id) const {
    return find_by_id(goals, id);
}

const AgentSpec* AbpSpec::find_agent(const std::string& id) const {
    return find_by_id(agents, id);
}

bool ref_matches(const ObjectRef& ref, const std::string& type_id,
                 const std::optional<std::string>& tag) {
    if (ref.object != type_id) return false;
    if (ref.is_any()) return true;
    return tag.has_value() && ref.tags.count(*tag) > 0;
}

bool refs_compatible(const ObjectRef& a, const ObjectRef& b) {
    if (a.object != b.object) return false;
    if (a.is_any() || b.is_any()) return true;
    for (const auto& tag : a.tags)
        if (b.tags.count(tag)) return true;
    return false;
}

std::vector<std::optional<std::string>> release_tag_options(
    const ObjectRef& ref, const ObjectType& type) {
    std::vector<std::optional<std::string>> options;
    const std::set<std::string>& tags = ref.is_any() ? type.variants : ref.tags;
    if (tags.empty()) {
        options.push_back(std::nullopt);
        return options;
    }
    for (const auto& tag : tags) options.emplace_back(tag);
    return options;
}

std::string to_string(SpecErrorCode code) {
    switch (code) {
        case SpecErrorCode::Syntax: return "SyntaxError";
        case SpecErrorCode::UnknownObjectRef: return "UnknownObjectRef";
        case SpecErrorCode::UnknownGoalRef: return "UnknownGoalRef";
        case SpecErrorCode::DuplicateId: return "DuplicateId";
        case SpecErrorCode::UndeclaredVariant: return "UndeclaredVariant";
        case SpecErrorCode::InvalidField: return "InvalidField";
        case SpecErrorCode::StartOverlap: return "StartOverlap";
        case SpecErrorCode::DuplicateAgentId: return "DuplicateAgentId";
        case SpecErrorCode::ConflictingVariantUse: return "ConflictingVariantUse";
    }
    return "?";
}

std::string to_string(const SpecError& err) {
    std::ostringstream out;
    out << to_string(err.code);
    if (!err.token.empty()) out << " '" << err.token << "'";
    if (!err.where.empty()) out << " (" << err.where << ")";
    if (err.pos) out << " at " << err.pos->line << ":" << err.pos->column;
    out << ": " << err.message;
    return out.str();
}

namespace {

struct Assembler {
    SpecParts parts;
    std::vector<SpecError> errors;

    void error(SpecErrorCode code, std::string token, std::string where,
               std::string message) {
        errors.push_back({code, std::move(token), std::move(where),
                          std::move(message), std::nullopt});
    }

    void check_duplicates() {
        auto dup_check = [&](auto& items, const std::string& section) {
            std::set<std::string> seen;
            for (const auto& item : items) {
                if (!seen.insert(item.id).second)
                    error(SpecErrorCode::DuplicateId, item.id, section,
                          "duplicate identifier");
            }
        };
        dup_check(parts.objects, "objects");
        dup_check(parts.goals, "goals");
        dup_check(parts.agents, "agents");
    }

    void check_ref(const ObjectRef& ref, const std::string& where) {
        const ObjectType* type = nullptr;
        for (const auto& obj : parts.objects)
            if (obj.id == ref.object) { type = &obj; break; }
        if (!type) {
            error(SpecErrorCode::UnknownObjectRef, ref.object, where,
                  "reference to undeclared object");
            return;
        }
        for (const auto& tag : ref.tags) {
            if (!type->variants.count(tag))
                error(SpecErrorCode::UndeclaredVariant, tag,
                      where + ", ref " + ref.object,
                      "variant tag not declared on object '" + ref.object + "'");
        }
    }

    void check_refs(const std::vector<ObjectRef>& refs, const std::string& where) {
        for (const auto& ref : refs) check_ref(ref, where);
    }

    void check_agent(const AgentSpec& agent) {
        const std::string where = "agent " + agent.id;
        if (agent.capabilities.empty())
            error(SpecErrorCode::InvalidField, agent.id, where,
                  "capability set must be non-empty");
        if (agent.triggers.empty())
            error(SpecErrorCode::InvalidField, agent.id, where,
                  "trigger list must be non-empty");
        if (agent.finals.empty())
            error(SpecErrorCode::InvalidField, agent.id, where,
                  "final list must be non-empty");
        check_refs(agent.triggers, where + " triggers");
        check_refs(agent.resources, where + " resources");
        check_refs(agent.finals, where + " finals");

        bool goal_known = false;
        for (const auto& g : parts.goals)
            if (g.id == agent.goal) { goal_known = true; break; }
        if (!goal_known)
            error(SpecErrorCode::UnknownGoalRef, agent.goal, where,
                  "agent goal is not declared");

        // The three lists play distinct roles; the same ref may not appear
        // in two of them.
        auto overlap = [&](const std::vector<ObjectRef>& a,
                           const std::vector<ObjectRef>& b,
                           const std::string& what) {
            for (const auto& ra : a)
                for (const auto& rb : b)
                    if (ra == rb)
                        error(SpecErrorCode::InvalidField, to_string(ra), where,
                              "ref listed in both " + what);
        };
        overlap(agent.triggers, agent.resources, "triggers and resources");
        overlap(agent.triggers, agent.finals, "triggers and finals");
        overlap(agent.resources, agent.finals, "resources and finals");
    }

    void check_goal(const GoalSpec& goal) {
        const std::string where = "goal " + goal.id;
        if (goal.objects.empty())
            error(SpecErrorCode::InvalidField, goal.id, where,
                  "goal object set must be non-empty");
        check_refs(goal.objects, where);
    }

    void check_boundaries() {
        if (parts.start_objects.empty())
            error(SpecErrorCode::InvalidField, "start_objects", "spec",
                  "OS must be non-empty");
        if (parts.end_objects.empty())
            error(SpecErrorCode::InvalidField, "end_objects", "spec",
                  "OE must be non-empty");
        check_refs(parts.start_objects, "start_objects");
        check_refs(parts.end_objects, "end_objects");
        check_refs(parts.resource_objects, "resource_objects");

        if (!parts.allow_start_production) {
            std::set<std::string> start_ids;
            for (const auto& ref : parts.start_objects) start_ids.insert(ref.object);
            for (const auto& agent : parts.agents)
                for (const auto& fin : agent.finals)
                    if (start_ids.count(fin.object))
                        error(SpecErrorCode::StartOverlap, fin.object,
                              "agent " + agent.id,
                              "start object produced by an agent final "
                              "(set allow_start_production to permit)");
        }
    }

    AssembleResult run() {
        check_duplicates();
        for (const auto& goal : parts.goals) check_goal(goal);
        for (const auto& agent : parts.agents) check_agent(agent);
        check_boundaries();

        if (!errors.empty()) return {std::nullopt, std::move(errors)};

        AbpSpec spec;
        spec.name = std::move(parts.name);
        spec.objects = std::move(parts.objects);
        spec.goals = std::move(parts.goals);
        spec.agents = std::move(parts.agents);
        spec.start_objects = std::move(parts.start_objects);
        spec.end_objects = std::move(parts.end_objects);
        spec.resource_objects = std::move(parts.resource_objects);
        spec.capabilities = std::move(parts.capabilities);
        spec.allow_start_production = parts.allow_start_production;

        auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
        std::sort(spec.objects.begin(), spec.objects.end(), by_id);
        std::sort(spec.goals.begin(), spec.goals.end(), by_id);
        std::sort(spec.agents.begin(), spec.agents.end(), by_id);
        for (auto& goal : spec.goals) {
            std::sort(goal.objects.begin(), goal.objects.end());
            goal.objects.erase(
                std::unique(goal.objects.begin(), goal.objects.end()),
                goal.objects.end());
        }
        return {std::move(spec), {}};
    }
};

}  // namespace

AssembleResult assemble_spec(SpecParts parts) {
    Assembler assembler{std::move(parts), {}};
    return assembler.run();
}

}  // namespace abp
