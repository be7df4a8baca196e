#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "abp/model.hpp"

namespace abp {

struct UnknownGoalError : AbpError {
    using AbpError::AbpError;
};

// One arc of the goal-sequencing graph: the agent fires once its source goal's
// objects are ready and its firing contributes to the target goal.
struct GoalEdge {
    std::string from;
    std::string agent;
    std::string to;

    friend bool operator==(const GoalEdge&, const GoalEdge&) = default;
    friend bool operator<(const GoalEdge& a, const GoalEdge& b) {
        return std::tie(a.agent, a.from, a.to) < std::tie(b.agent, b.from, b.to);
    }
};

struct AmbiguousTrigger {
    std::string agent;
    std::vector<std::string> candidates;  // sorted goal ids
};

struct GoalGraph {
    static constexpr const char* start_node = "Start";
    static constexpr const char* end_node = "End";

    std::vector<std::string> nodes;  // Start, goals sorted by id, End
    std::vector<GoalEdge> edges;     // sorted by agent id
    std::map<std::string, std::string> trigger_map;  // agent -> source goal
    std::vector<std::pair<std::string, std::string>> pre;  // direct, deduped

    // Agents whose triggers resolve to no goal and are not start-satisfiable;
    // they get no edge and the validator reports the starvation.
    std::vector<std::string> detached_agents;
    std::vector<AmbiguousTrigger> ambiguous;

    bool has_node(const std::string& id) const;
};

// Resolution of one agent's source goal from its trigger objects.
struct TriggerGoalResolution {
    std::optional<std::string> goal;       // resolved source (may be Start)
    std::vector<std::string> candidates;   // >1 when ambiguous
    bool detached = false;
};

// A declared goal is a candidate when every trigger ref either matches its
// object set or is start-satisfiable, and at least one ref matches the goal
// proper. No candidate and all refs in OS resolves to Start.
TriggerGoalResolution derive_trigger_goal(const AbpSpec& spec,
                                          const AgentSpec& agent);

// Default split classification when a goal declares none: XOR when the
// outgoing agents' trigger constraints are pairwise variant-disjoint on every
// shared object, AND otherwise.
BranchType infer_split(const std::vector<const AgentSpec*>& outgoing);

GoalGraph build_goal_graph(const AbpSpec& spec);

// The direct relation is exactly the edge projection; pass transitive_closure
// to get its closure instead.
std::vector<std::pair<std::string, std::string>> derive_precedence(
    const GoalGraph& graph, bool transitive_closure = false);

struct GoalClassification {
    std::string goal;
    BranchType split = BranchType::And;
    std::vector<std::string> outgoing;  // agent ids, sorted
    BranchType merge = BranchType::And;
    std::vector<std::string> incoming;  // agent ids, sorted
};

// Singleton or empty agent sets are sequences and report AND regardless of
// the declared type. Throws UnknownGoalError for ids outside the graph.
GoalClassification classify_goal(const GoalGraph& graph, const AbpSpec& spec,
                                 const std::string& goal_id);

struct LayerResult {
    std::vector<std::vector<std::string>> layers;  // topological, each sorted
    std::vector<std::string> cycle;  // witness g1..gk,g1 when cyclic

    bool acyclic() const { return cycle.empty(); }
};

// Kahn layering over Start plus the declared goals (End is satisfied by
// objects, not agents, and stays out of the ordering). A cycle is a return
// value, not a failure.
LayerResult check_acyclic(const GoalGraph& graph);

}  // namespace abp
