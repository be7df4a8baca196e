#pragma once

#include <string>

#include "json.hpp"

#include "abp/engine.hpp"
#include "abp/goal_graph.hpp"
#include "abp/object_store.hpp"
#include "abp/validator.hpp"

namespace abp {

struct DotOptions {
    bool show_objects = false;       // dashed satellite boxes for released objects
    std::string rankdir = "LR";      // LR or TB
    const Trace* highlight = nullptr;  // colors fired agent edges
};

// Deterministic Graphviz text: goal nodes as ellipses, Start as a point,
// End as a double circle, one solid edge per agent labelled with its id and
// any trigger variant constraints. Options never change the topology.
std::string to_dot(const GoalGraph& graph, const AbpSpec& spec,
                   const DotOptions& options = {});

// One JSON object per line: header first, then every event.
std::string trace_to_jsonl(const Trace& trace);
Trace trace_from_jsonl(const std::string& text);  // throws AbpError

nlohmann::ordered_json report_to_json(const ValidationReport& report);
std::string report_to_table(const ValidationReport& report);

nlohmann::ordered_json store_to_json(const ObjectStore& store);

}  // namespace abp
