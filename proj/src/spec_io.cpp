#include "abp/spec_io.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "abp/goal_graph.hpp"

namespace abp {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

SourcePos pos_of_offset(const std::string& text, size_t offset) {
    SourcePos pos{1, 1};
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++pos.line;
            pos.column = 1;
        } else {
            ++pos.column;
        }
    }
    return pos;
}

std::optional<SourcePos> find_token(const std::string& text, const std::string& token) {
    if (token.empty()) return std::nullopt;
    size_t at = text.find("\"" + token + "\"");
    if (at == std::string::npos) at = text.find(token);
    if (at == std::string::npos) return std::nullopt;
    return pos_of_offset(text, at);
}

struct DocReader {
    const std::string& text;
    std::vector<SpecError> errors;

    void syntax(const std::string& token, const std::string& where,
                const std::string& message) {
        errors.push_back({SpecErrorCode::Syntax, token, where, message,
                          find_token(text, token)});
    }

    std::optional<ObjectRef> read_ref(const json& value, const std::string& where) {
        if (!value.is_object() || !value.contains("object") ||
            !value["object"].is_string()) {
            syntax("object", where, "ref must be an object with an \"object\" key");
            return std::nullopt;
        }
        ObjectRef ref;
        ref.object = value["object"].get<std::string>();
        if (value.contains("variant")) {
            const json& variant = value["variant"];
            if (variant.is_string()) {
                std::string tag = variant.get<std::string>();
                if (tag != "any") ref.tags.insert(tag);
            } else if (variant.is_array()) {
                for (const auto& tag : variant) {
                    if (!tag.is_string()) {
                        syntax(ref.object, where, "variant tags must be strings");
                        return std::nullopt;
                    }
                    ref.tags.insert(tag.get<std::string>());
                }
            } else {
                syntax(ref.object, where,
                       "variant must be \"any\", a tag or a tag array");
                return std::nullopt;
            }
        }
        return ref;
    }

    std::vector<ObjectRef> read_refs(const json& value, const std::string& where) {
        std::vector<ObjectRef> refs;
        if (!value.is_array()) {
            syntax("", where, "expected an array of refs");
            return refs;
        }
        for (const auto& entry : value)
            if (auto ref = read_ref(entry, where)) refs.push_back(*ref);
        return refs;
    }

    std::string read_string(const json& obj, const std::string& key,
                            const std::string& where, const std::string& fallback,
                            bool required) {
        if (!obj.contains(key)) {
            if (required) syntax(key, where, "missing required key \"" + key + "\"");
            return fallback;
        }
        if (!obj[key].is_string()) {
            syntax(key, where, "\"" + key + "\" must be a string");
            return fallback;
        }
        return obj[key].get<std::string>();
    }

    std::set<Capability> read_capabilities(const json& value, const std::string& where) {
        std::set<Capability> caps;
        if (!value.is_array()) {
            syntax("capabilities", where, "capabilities must be an array");
            return caps;
        }
        for (const auto& entry : value) {
            if (!entry.is_string()) {
                syntax("capabilities", where, "capability names must be strings");
                continue;
            }
            auto cap = capability_from_string(entry.get<std::string>());
            if (!cap) {
                syntax(entry.get<std::string>(), where,
                       "unknown capability (expected CREATE, READ, UPDATE, DELETE "
                       "or ARCHIVE)");
                continue;
            }
            caps.insert(*cap);
        }
        return caps;
    }

    SpecParts read(const json& doc) {
        SpecParts parts;
        for (const std::string key :
             {"objects", "goals", "agents", "start_objects", "end_objects"}) {
            if (!doc.contains(key))
                syntax(key, "document", "missing required key \"" + key + "\"");
        }
        if (!errors.empty()) return parts;

        parts.name = read_string(doc, "name", "document", "", false);
        if (doc.contains("allow_start_production") &&
            doc["allow_start_production"].is_boolean())
            parts.allow_start_production = doc["allow_start_production"].get<bool>();

        if (doc["objects"].is_array()) {
            for (const auto& entry : doc["objects"]) {
                ObjectType object;
                object.id = read_string(entry, "id", "objects", "", true);
                const std::string where = "object " + object.id;
                std::string kind = read_string(entry, "kind", where, "document", false);
                if (auto parsed = object_kind_from_string(kind)) {
                    object.kind = *parsed;
                } else {
                    syntax(kind, where, "unknown object kind");
                }
                if (entry.contains("variants")) {
                    if (!entry["variants"].is_array()) {
                        syntax(object.id, where, "variants must be an array");
                    } else {
                        for (const auto& tag : entry["variants"])
                            if (tag.is_string())
                                object.variants.insert(tag.get<std::string>());
                    }
                }
                if (entry.contains("physical") && entry["physical"].is_boolean())
                    object.physical = entry["physical"].get<bool>();
                parts.objects.push_back(std::move(object));
            }
        } else {
            syntax("objects", "document", "objects must be an array");
        }

        if (doc["goals"].is_array()) {
            for (const auto& entry : doc["goals"]) {
                GoalSpec goal;
                goal.id = read_string(entry, "id", "goals", "", true);
                const std::string where = "goal " + goal.id;
                if (entry.contains("objects"))
                    goal.objects = read_refs(entry["objects"], where);
                else
                    syntax(goal.id, where, "missing required key \"objects\"");
                for (const char* key : {"split", "merge"}) {
                    if (!entry.contains(key)) continue;
                    if (!entry[key].is_string()) {
                        syntax(key, where, "split/merge must be AND, OR or XOR");
                        continue;
                    }
                    auto type = branch_type_from_string(entry[key].get<std::string>());
                    if (!type) {
                        syntax(entry[key].get<std::string>(), where,
                               "split/merge must be AND, OR or XOR");
                        continue;
                    }
                    (std::string(key) == "split" ? goal.split : goal.merge) = *type;
                }
                parts.goals.push_back(std::move(goal));
            }
        } else {
            syntax("goals", "document", "goals must be an array");
        }

        if (doc["agents"].is_array()) {
            for (const auto& entry : doc["agents"]) {
                AgentSpec agent;
                agent.id = read_string(entry, "id", "agents", "", true);
                const std::string where = "agent " + agent.id;
                if (entry.contains("capabilities"))
                    agent.capabilities = read_capabilities(entry["capabilities"], where);
                else
                    agent.capabilities = {Capability::Create, Capability::Read};
                if (entry.contains("triggers"))
                    agent.triggers = read_refs(entry["triggers"], where + " triggers");
                else
                    syntax(agent.id, where, "missing required key \"triggers\"");
                if (entry.contains("resources"))
                    agent.resources = read_refs(entry["resources"], where + " resources");
                if (entry.contains("finals"))
                    agent.finals = read_refs(entry["finals"], where + " finals");
                else
                    syntax(agent.id, where, "missing required key \"finals\"");
                agent.goal = read_string(entry, "goal", where, "", true);
                agent.behavior = read_string(entry, "behavior", where, "stub", false);
                parts.agents.push_back(std::move(agent));
            }
        } else {
            syntax("agents", "document", "agents must be an array");
        }

        parts.start_objects = read_refs(doc["start_objects"], "start_objects");
        parts.end_objects = read_refs(doc["end_objects"], "end_objects");
        if (doc.contains("resource_objects"))
            parts.resource_objects = read_refs(doc["resource_objects"], "resource_objects");

        if (doc.contains("capabilities")) {
            parts.capabilities = read_capabilities(doc["capabilities"], "document");
        } else {
            for (const auto& agent : parts.agents)
                parts.capabilities.insert(agent.capabilities.begin(),
                                          agent.capabilities.end());
        }
        return parts;
    }
};

}  // namespace

AssembleResult parse_spec(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        SpecError error{SpecErrorCode::Syntax, "", "document", err.what(),
                        pos_of_offset(text, err.byte > 0 ? err.byte - 1 : 0)};
        return {std::nullopt, {error}};
    }
    if (!doc.is_object()) {
        SpecError error{SpecErrorCode::Syntax, "", "document",
                        "top level must be an object", pos_of_offset(text, 0)};
        return {std::nullopt, {error}};
    }

    DocReader reader{text, {}};
    SpecParts parts = reader.read(doc);
    if (!reader.errors.empty()) return {std::nullopt, std::move(reader.errors)};

    AssembleResult result = assemble_spec(std::move(parts));
    for (auto& error : result.errors)
        if (!error.pos) error.pos = find_token(text, error.token);
    return result;
}

namespace {

ordered_json ref_to_json(const ObjectRef& ref) {
    ordered_json out;
    out["object"] = ref.object;
    if (ref.is_any()) {
        out["variant"] = "any";
    } else if (ref.tags.size() == 1) {
        out["variant"] = *ref.tags.begin();
    } else {
        out["variant"] = ref.tags;  // sorted by set order
    }
    return out;
}

ordered_json refs_to_json(const std::vector<ObjectRef>& refs) {
    ordered_json out = ordered_json::array();
    for (const auto& ref : refs) out.push_back(ref_to_json(ref));
    return out;
}

ordered_json caps_to_json(const std::set<Capability>& caps) {
    ordered_json out = ordered_json::array();
    for (Capability cap : caps) out.push_back(to_string(cap));
    return out;
}

}  // namespace

std::string serialize_spec(const AbpSpec& spec) {
    ordered_json doc;
    doc["name"] = spec.name;

    ordered_json objects = ordered_json::array();
    for (const auto& object : spec.objects) {
        ordered_json entry;
        entry["id"] = object.id;
        entry["kind"] = to_string(object.kind);
        entry["variants"] = object.variants;
        entry["physical"] = object.physical;
        objects.push_back(std::move(entry));
    }
    doc["objects"] = std::move(objects);

    ordered_json goals = ordered_json::array();
    for (const auto& goal : spec.goals) {
        ordered_json entry;
        entry["id"] = goal.id;
        entry["objects"] = refs_to_json(goal.objects);
        if (goal.split) entry["split"] = to_string(*goal.split);
        if (goal.merge) entry["merge"] = to_string(*goal.merge);
        goals.push_back(std::move(entry));
    }
    doc["goals"] = std::move(goals);

    ordered_json agents = ordered_json::array();
    for (const auto& agent : spec.agents) {
        ordered_json entry;
        entry["id"] = agent.id;
        entry["capabilities"] = caps_to_json(agent.capabilities);
        entry["triggers"] = refs_to_json(agent.triggers);
        entry["resources"] = refs_to_json(agent.resources);
        entry["finals"] = refs_to_json(agent.finals);
        entry["goal"] = agent.goal;
        entry["behavior"] = agent.behavior;
        agents.push_back(std::move(entry));
    }
    doc["agents"] = std::move(agents);

    doc["start_objects"] = refs_to_json(spec.start_objects);
    doc["end_objects"] = refs_to_json(spec.end_objects);
    doc["resource_objects"] = refs_to_json(spec.resource_objects);
    doc["capabilities"] = caps_to_json(spec.capabilities);
    if (spec.allow_start_production) doc["allow_start_production"] = true;

    return doc.dump(2) + "\n";
}

std::optional<ObjectRef> parse_slash_ref(const std::string& text) {
    auto trim = [](std::string s) {
        size_t begin = s.find_first_not_of(" \t");
        size_t end = s.find_last_not_of(" \t");
        if (begin == std::string::npos) return std::string();
        return s.substr(begin, end - begin + 1);
    };
    std::string cell = trim(text);
    if (cell.empty()) return std::nullopt;

    ObjectRef ref;
    size_t slash = cell.find('/');
    if (slash == std::string::npos) {
        ref.object = cell;
        if (ref.object.find('|') != std::string::npos) return std::nullopt;
        return ref;
    }
    ref.object = trim(cell.substr(0, slash));
    if (ref.object.empty()) return std::nullopt;
    std::string tags = cell.substr(slash + 1);
    std::istringstream stream(tags);
    std::string tag;
    while (std::getline(stream, tag, '|')) {
        tag = trim(tag);
        if (tag.empty()) return std::nullopt;
        ref.tags.insert(tag);
    }
    if (ref.tags.empty()) return std::nullopt;
    return ref;
}

namespace {

struct TableImporter {
    const std::vector<AgentTableRow>& rows;
    const ImportOptions& options;
    std::vector<SpecError> errors;

    void error(SpecErrorCode code, const std::string& token, const std::string& where,
               const std::string& message) {
        errors.push_back({code, token, where, message, std::nullopt});
    }

    AssembleResult run() {
        if (rows.empty()) {
            error(SpecErrorCode::InvalidField, "rows", "table",
                  "agent table must be non-empty");
            return {std::nullopt, std::move(errors)};
        }

        std::set<std::string> ids;
        for (const auto& row : rows)
            if (!ids.insert(row.agent_id).second)
                error(SpecErrorCode::DuplicateAgentId, row.agent_id, "table",
                      "duplicate agent id");

        // Collect refs; infer each object's tag alphabet from every mention.
        struct Usage {
            std::set<std::string> tags;
            bool tagged_final = false;
            bool untagged_final = false;
        };
        std::map<std::string, Usage> usage;
        auto scan = [&](const std::vector<std::string>& cells, bool is_final,
                        const std::string& where) {
            std::vector<ObjectRef> refs;
            for (const auto& cell : cells) {
                auto ref = parse_slash_ref(cell);
                if (!ref) {
                    error(SpecErrorCode::Syntax, cell, where,
                          "cannot parse slash-notation ref");
                    continue;
                }
                Usage& u = usage[ref->object];
                u.tags.insert(ref->tags.begin(), ref->tags.end());
                if (is_final) (ref->tags.empty() ? u.untagged_final : u.tagged_final) =
                    true;
                refs.push_back(std::move(*ref));
            }
            return refs;
        };

        std::map<std::string, std::vector<ObjectRef>> triggers, finals;
        for (const auto& row : rows) {
            triggers[row.agent_id] =
                scan(row.trigger_objects, false, "agent " + row.agent_id + " triggers");
            finals[row.agent_id] =
                scan(row.final_objects, true, "agent " + row.agent_id + " finals");
        }

        for (const auto& [object, u] : usage) {
            if (u.tagged_final && u.untagged_final)
                error(SpecErrorCode::ConflictingVariantUse, object, "table",
                      "object appears both tagged and untagged in final columns");
        }
        if (!errors.empty()) return {std::nullopt, std::move(errors)};

        SpecParts parts;
        parts.name = options.name;

        for (const auto& [object, u] : usage) {
            ObjectType type;
            type.id = object;
            auto kind = options.object_kinds.find(object);
            if (kind != options.object_kinds.end()) type.kind = kind->second;
            type.variants = u.tags;
            type.physical = options.physical_objects.count(object) > 0;
            parts.objects.push_back(std::move(type));
        }

        // An untagged final of a variant-carrying object means the behavior
        // chooses a tag at release time: resolve it to the full alphabet.
        auto resolve_final = [&](ObjectRef ref) {
            const Usage& u = usage[ref.object];
            if (ref.tags.empty() && !u.tags.empty()) ref.tags = u.tags;
            return ref;
        };

        std::map<std::string, std::vector<std::string>> goal_agents;
        for (const auto& row : rows) {
            AgentSpec agent;
            agent.id = row.agent_id;
            auto caps = options.agent_capabilities.find(row.agent_id);
            agent.capabilities = caps != options.agent_capabilities.end()
                                     ? caps->second
                                     : options.default_capabilities;
            agent.triggers = triggers[row.agent_id];
            for (const auto& ref : finals[row.agent_id])
                agent.finals.push_back(resolve_final(ref));
            agent.goal = row.goal;
            goal_agents[row.goal].push_back(row.agent_id);
            parts.agents.push_back(std::move(agent));
        }

        for (const auto& [goal_id, producer_ids] : goal_agents) {
            GoalSpec goal;
            goal.id = goal_id;
            for (const auto& agent_id : producer_ids)
                for (const auto& ref : finals[agent_id])
                    goal.objects.push_back(resolve_final(ref));
            std::sort(goal.objects.begin(), goal.objects.end());
            goal.objects.erase(std::unique(goal.objects.begin(), goal.objects.end()),
                               goal.objects.end());
            if (producer_ids.size() > 1) goal.merge = BranchType::And;
            parts.goals.push_back(std::move(goal));
        }

        // Boundary inference is object-level: a trigger object no agent
        // produces starts the process, a final object no agent consumes
        // ends it.
        std::set<std::string> triggered, produced;
        for (const auto& [agent, refs] : triggers)
            for (const auto& ref : refs) triggered.insert(ref.object);
        for (const auto& [agent, refs] : finals)
            for (const auto& ref : refs) produced.insert(ref.object);
        for (const auto& object : triggered)
            if (!produced.count(object)) parts.start_objects.push_back({object, {}});
        for (const auto& object : produced)
            if (!triggered.count(object)) parts.end_objects.push_back({object, {}});

        for (const auto& agent : parts.agents)
            parts.capabilities.insert(agent.capabilities.begin(),
                                      agent.capabilities.end());

        AssembleResult result = assemble_spec(std::move(parts));
        if (!result.ok()) return result;

        // Declare the split type wherever the derived graph has a real split.
        AbpSpec& spec = *result.spec;
        std::map<std::string, std::vector<const AgentSpec*>> outgoing;
        for (const auto& agent : spec.agents) {
            auto resolved = derive_trigger_goal(spec, agent);
            if (resolved.goal) outgoing[*resolved.goal].push_back(&agent);
        }
        for (auto& goal : spec.goals) {
            auto it = outgoing.find(goal.id);
            if (it != outgoing.end() && it->second.size() > 1)
                goal.split = infer_split(it->second);
        }
        return result;
    }
};

}  // namespace

AssembleResult import_agent_table(const std::vector<AgentTableRow>& rows,
                                  const ImportOptions& options) {
    TableImporter importer{rows, options, {}};
    return importer.run();
}

CsvResult parse_agent_table_csv(const std::string& text) {
    CsvResult result;
    auto trim = [](std::string s) {
        size_t begin = s.find_first_not_of(" \t\r");
        size_t end = s.find_last_not_of(" \t\r");
        if (begin == std::string::npos) return std::string();
        return s.substr(begin, end - begin + 1);
    };
    auto split = [&](const std::string& line, char sep) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream stream(line);
        while (std::getline(stream, cell, sep)) cells.push_back(trim(cell));
        if (!line.empty() && line.back() == sep) cells.push_back("");
        return cells;
    };

    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (!saw_header) {
            auto header = split(line, ',');
            const std::vector<std::string> expected = {
                "Agent ID", "Competences", "Trigger objects", "Final objects", "Goal"};
            if (header != expected) {
                result.errors.push_back(
                    {SpecErrorCode::Syntax, line, "csv",
                     "header must be \"Agent ID,Competences,Trigger objects,"
                     "Final objects,Goal\"",
                     SourcePos{line_no, 1}});
                return result;
            }
            saw_header = true;
            continue;
        }
        auto cells = split(line, ',');
        if (cells.size() != 5) {
            result.errors.push_back({SpecErrorCode::Syntax, line, "csv",
                                     "expected 5 comma-separated cells",
                                     SourcePos{line_no, 1}});
            continue;
        }
        AgentTableRow row;
        row.agent_id = cells[0];
        row.competences = cells[1];
        for (auto& ref : split(cells[2], ';'))
            if (!ref.empty()) row.trigger_objects.push_back(ref);
        for (auto& ref : split(cells[3], ';'))
            if (!ref.empty()) row.final_objects.push_back(ref);
        row.goal = cells[4];
        result.rows.push_back(std::move(row));
    }
    if (!saw_header)
        result.errors.push_back({SpecErrorCode::Syntax, "", "csv",
                                 "empty document", SourcePos{1, 1}});
    return result;
}

}  // namespace abp
