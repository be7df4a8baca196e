#include "abp/export.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace abp {

namespace {

using ordered_json = nlohmann::ordered_json;

bool plain_dot_id(const std::string& id) {
    if (id.empty() || std::isdigit(static_cast<unsigned char>(id.front()))) return false;
    for (char c : id)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

std::string dot_id(const std::string& id) {
    if (plain_dot_id(id)) return id;
    std::string quoted = "\"";
    for (char c : id) {
        if (c == '"' || c == '\\') quoted += '\\';
        quoted += c;
    }
    return quoted + "\"";
}

std::string edge_label(const AgentSpec& agent) {
    std::vector<std::string> groups;
    for (const auto& ref : agent.triggers) {
        if (ref.is_any()) continue;
        std::string group;
        for (const auto& tag : ref.tags) {
            if (!group.empty()) group += "|";
            group += tag;
        }
        groups.push_back(std::move(group));
    }
    std::string label = agent.id;
    if (!groups.empty()) {
        label += " [";
        for (size_t i = 0; i < groups.size(); ++i) {
            if (i) label += ",";
            label += groups[i];
        }
        label += "]";
    }
    return label;
}

}  // namespace

std::string to_dot(const GoalGraph& graph, const AbpSpec& spec,
                   const DotOptions& options) {
    std::set<std::string> fired;
    if (options.highlight) {
        for (const auto& event : options.highlight->events)
            if (const auto* af = std::get_if<AgentFiredEvent>(&event))
                fired.insert(af->agent);
    }

    std::ostringstream out;
    out << "digraph " << dot_id(spec.name.empty() ? "abp" : spec.name) << " {\n";
    out << "  rankdir=" << options.rankdir << ";\n";
    out << "  " << dot_id(GoalGraph::start_node) << " [shape=point];\n";
    out << "  " << dot_id(GoalGraph::end_node) << " [shape=doublecircle];\n";
    for (const auto& node : graph.nodes) {
        if (node == GoalGraph::start_node || node == GoalGraph::end_node) continue;
        out << "  " << dot_id(node) << " [shape=ellipse];\n";
    }

    std::set<std::string> released;
    if (options.show_objects) {
        for (const auto& edge : graph.edges) {
            const AgentSpec* agent = spec.find_agent(edge.agent);
            for (const auto& ref : agent->finals) released.insert(ref.object);
        }
        for (const auto& object : released)
            out << "  " << dot_id("obj_" + object) << " [shape=box, label="
                << dot_id(object) << "];\n";
    }

    for (const auto& edge : graph.edges) {
        const AgentSpec* agent = spec.find_agent(edge.agent);
        out << "  " << dot_id(edge.from) << " -> " << dot_id(edge.to)
            << " [label=\"" << edge_label(*agent) << "\"";
        if (fired.count(edge.agent)) out << ", color=red, penwidth=2";
        out << "];\n";
    }

    if (options.show_objects) {
        for (const auto& edge : graph.edges) {
            const AgentSpec* agent = spec.find_agent(edge.agent);
            std::set<std::string> seen;
            for (const auto& ref : agent->finals) {
                if (!seen.insert(ref.object).second) continue;
                out << "  " << dot_id(edge.to) << " -> " << dot_id("obj_" + ref.object)
                    << " [style=dashed, arrowhead=open];\n";
            }
        }
    }
    out << "}\n";
    return out.str();
}

namespace {

bool goal_site(const std::string& site) { return site.rfind("goal:", 0) == 0; }

ordered_json header_to_json(const TraceHeader& header) {
    ordered_json out;
    out["spec"] = header.spec_name;
    out["policy"] = header.policy;
    if (header.seed) out["seed"] = *header.seed;
    return out;
}

struct EventWriter {
    ordered_json operator()(const SeededEvent& e) const {
        return {{"event", "Seeded"}, {"instances", e.instances}};
    }
    ordered_json operator()(const ChoiceMadeEvent& e) const {
        ordered_json out{{"event", "ChoiceMade"}, {"site", e.site},
                         {"options", e.options}};
        if (goal_site(e.site))
            out["picked"] = e.picked;
        else
            out["picked"] = e.picked.empty() ? "" : e.picked.front();
        return out;
    }
    ordered_json operator()(const AgentFiredEvent& e) const {
        return {{"event", "AgentFired"},
                {"agent", e.agent},
                {"consumed", e.consumed},
                {"released", e.released}};
    }
    ordered_json operator()(const GoalAchievedEvent& e) const {
        return {{"event", "GoalAchieved"},
                {"goal", e.goal},
                {"agents", e.agents},
                {"instances", e.instances}};
    }
    ordered_json operator()(const WarningEvent& e) const {
        return {{"event", "Warning"}, {"site", e.site}, {"message", e.message}};
    }
    ordered_json operator()(const CompletedEvent& e) const {
        return {{"event", "Completed"}, {"end", e.end_instances}};
    }
    ordered_json operator()(const DeadlockedEvent& e) const {
        return {{"event", "Deadlocked"},
                {"unfired", e.unfired_agents},
                {"available", e.available_instances}};
    }
    ordered_json operator()(const StepLimitEvent& e) const {
        return {{"event", "StepLimit"}, {"limit", e.limit}};
    }
};

std::vector<std::string> string_list(const ordered_json& value) {
    std::vector<std::string> out;
    for (const auto& entry : value) out.push_back(entry.get<std::string>());
    return out;
}

TraceEvent event_from_json(const ordered_json& value) {
    const std::string kind = value.at("event").get<std::string>();
    if (kind == "Seeded") return SeededEvent{string_list(value.at("instances"))};
    if (kind == "ChoiceMade") {
        ChoiceMadeEvent event;
        event.site = value.at("site").get<std::string>();
        event.options = string_list(value.at("options"));
        const auto& picked = value.at("picked");
        if (picked.is_array())
            event.picked = string_list(picked);
        else
            event.picked = {picked.get<std::string>()};
        return event;
    }
    if (kind == "AgentFired")
        return AgentFiredEvent{value.at("agent").get<std::string>(),
                               string_list(value.at("consumed")),
                               string_list(value.at("released"))};
    if (kind == "GoalAchieved")
        return GoalAchievedEvent{value.at("goal").get<std::string>(),
                                 string_list(value.at("agents")),
                                 string_list(value.at("instances"))};
    if (kind == "Warning")
        return WarningEvent{value.at("site").get<std::string>(),
                            value.at("message").get<std::string>()};
    if (kind == "Completed") return CompletedEvent{string_list(value.at("end"))};
    if (kind == "Deadlocked")
        return DeadlockedEvent{string_list(value.at("unfired")),
                               string_list(value.at("available"))};
    if (kind == "StepLimit") return StepLimitEvent{value.at("limit").get<int>()};
    throw AbpError("unknown trace event kind '" + kind + "'");
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace) {
    std::ostringstream out;
    out << header_to_json(trace.header).dump() << "\n";
    for (const auto& event : trace.events)
        out << std::visit(EventWriter{}, event).dump() << "\n";
    return out.str();
}

Trace trace_from_jsonl(const std::string& text) {
    Trace trace;
    std::istringstream stream(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        ordered_json value;
        try {
            value = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& err) {
            throw AbpError(std::string("bad trace line: ") + err.what());
        }
        if (!saw_header) {
            trace.header.spec_name = value.at("spec").get<std::string>();
            trace.header.policy = value.at("policy").get<std::string>();
            if (value.contains("seed"))
                trace.header.seed = value["seed"].get<uint64_t>();
            saw_header = true;
            continue;
        }
        trace.events.push_back(event_from_json(value));
    }
    if (!saw_header) throw AbpError("trace document has no header line");
    return trace;
}

nlohmann::ordered_json report_to_json(const ValidationReport& report) {
    ordered_json out;
    out["verdict"] = to_string(report.verdict);
    ordered_json findings = ordered_json::array();
    for (const auto& finding : report.findings) {
        ordered_json entry;
        entry["code"] = to_string(finding.code);
        entry["severity"] = finding.severity == Severity::Error ? "error" : "warning";
        entry["subject"] = finding.subject;
        entry["message"] = finding.message;
        entry["related"] = finding.related;
        findings.push_back(std::move(entry));
    }
    out["findings"] = std::move(findings);
    return out;
}

std::string report_to_table(const ValidationReport& report) {
    std::ostringstream out;
    out << "spec: " << report.spec_name << "\n";
    out << "verdict: " << to_string(report.verdict) << "\n";
    if (report.findings.empty()) return out.str();

    size_t code_width = 4, subject_width = 7;
    for (const auto& finding : report.findings) {
        code_width = std::max(code_width, to_string(finding.code).size());
        subject_width = std::max(subject_width, finding.subject.size());
    }
    auto pad = [](const std::string& s, size_t width) {
        return s + std::string(width - s.size(), ' ');
    };
    out << pad("code", code_width) << "  " << pad("subject", subject_width)
        << "  message\n";
    for (const auto& finding : report.findings) {
        out << pad(to_string(finding.code), code_width) << "  "
            << pad(finding.subject, subject_width) << "  " << finding.message;
        if (!finding.related.empty()) {
            out << " (related:";
            for (const auto& id : finding.related) out << " " << id;
            out << ")";
        }
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json store_to_json(const ObjectStore& store) {
    ordered_json out;
    ordered_json instances = ordered_json::array();
    for (const auto& instance : store.instances()) {
        ordered_json entry;
        entry["id"] = instance.id;
        entry["type"] = instance.type;
        if (instance.variant) entry["variant"] = *instance.variant;
        entry["payload"] = instance.payload;
        entry["producer"] = instance.provenance.producer;
        entry["step"] = instance.provenance.step;
        entry["state"] = to_string(instance.state);
        instances.push_back(std::move(entry));
    }
    out["instances"] = std::move(instances);

    ordered_json archive = ordered_json::array();
    for (const auto& entry : store.archive_log()) {
        ordered_json item;
        item["step"] = entry.step;
        item["reason"] = entry.reason;
        item["instance"] = entry.snapshot.id;
        item["state"] = to_string(entry.snapshot.state);
        archive.push_back(std::move(item));
    }
    out["archive"] = std::move(archive);
    return out;
}

}  // namespace abp
