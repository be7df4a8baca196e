#include "abp/goal_graph.hpp"

#include <algorithm>
#include <set>

namespace abp {

bool GoalGraph::has_node(const std::string& id) const {
    return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

namespace {

bool matches_some(const ObjectRef& ref, const std::vector<ObjectRef>& pool) {
    for (const auto& other : pool)
        if (refs_compatible(ref, other)) return true;
    return false;
}

}  // namespace

TriggerGoalResolution derive_trigger_goal(const AbpSpec& spec,
                                          const AgentSpec& agent) {
    TriggerGoalResolution res;
    for (const auto& goal : spec.goals) {
        bool all_covered = true;
        bool any_in_goal = false;
        for (const auto& trig : agent.triggers) {
            if (matches_some(trig, goal.objects)) {
                any_in_goal = true;
            } else if (!matches_some(trig, spec.start_objects)) {
                all_covered = false;
                break;
            }
        }
        if (all_covered && any_in_goal) res.candidates.push_back(goal.id);
    }
    std::sort(res.candidates.begin(), res.candidates.end());

    if (res.candidates.size() == 1) {
        res.goal = res.candidates.front();
        return res;
    }
    if (res.candidates.size() > 1) return res;

    bool all_start = true;
    for (const auto& trig : agent.triggers)
        if (!matches_some(trig, spec.start_objects)) { all_start = false; break; }
    if (all_start && !agent.triggers.empty()) {
        res.goal = GoalGraph::start_node;
    } else {
        res.detached = true;
    }
    return res;
}

BranchType infer_split(const std::vector<const AgentSpec*>& outgoing) {
    if (outgoing.size() < 2) return BranchType::And;
    // XOR only when every pair is separated by disjoint variant constraints
    // on a shared trigger object (one released instance wakes at most one
    // branch). Branches triggering on distinct objects are parallel.
    for (size_t i = 0; i < outgoing.size(); ++i) {
        for (size_t j = i + 1; j < outgoing.size(); ++j) {
            bool exclusive = false;
            for (const auto& ra : outgoing[i]->triggers) {
                for (const auto& rb : outgoing[j]->triggers) {
                    if (ra.object != rb.object) continue;
                    if (!ra.is_any() && !rb.is_any() && !refs_compatible(ra, rb))
                        exclusive = true;
                }
            }
            if (!exclusive) return BranchType::And;
        }
    }
    return BranchType::Xor;
}

GoalGraph build_goal_graph(const AbpSpec& spec) {
    GoalGraph graph;
    graph.nodes.push_back(GoalGraph::start_node);
    for (const auto& goal : spec.goals) graph.nodes.push_back(goal.id);
    graph.nodes.push_back(GoalGraph::end_node);

    for (const auto& agent : spec.agents) {
        TriggerGoalResolution res = derive_trigger_goal(spec, agent);
        if (res.goal) {
            graph.edges.push_back({*res.goal, agent.id, agent.goal});
            graph.trigger_map[agent.id] = *res.goal;
        } else if (res.candidates.size() > 1) {
            graph.ambiguous.push_back({agent.id, res.candidates});
        } else {
            graph.detached_agents.push_back(agent.id);
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end());

    std::set<std::pair<std::string, std::string>> pre;
    for (const auto& edge : graph.edges) pre.insert({edge.from, edge.to});
    graph.pre.assign(pre.begin(), pre.end());
    return graph;
}

std::vector<std::pair<std::string, std::string>> derive_precedence(
    const GoalGraph& graph, bool transitive_closure) {
    if (!transitive_closure) return graph.pre;

    std::map<std::string, std::set<std::string>> next;
    for (const auto& [from, to] : graph.pre) next[from].insert(to);

    // BFS closure from each source node.
    std::set<std::pair<std::string, std::string>> closure;
    for (const auto& [src, direct] : next) {
        std::vector<std::string> stack(direct.begin(), direct.end());
        std::set<std::string> seen;
        while (!stack.empty()) {
            std::string node = stack.back();
            stack.pop_back();
            if (!seen.insert(node).second) continue;
            closure.insert({src, node});
            auto it = next.find(node);
            if (it != next.end())
                stack.insert(stack.end(), it->second.begin(), it->second.end());
        }
    }
    return {closure.begin(), closure.end()};
}

GoalClassification classify_goal(const GoalGraph& graph, const AbpSpec& spec,
                                 const std::string& goal_id) {
    if (!graph.has_node(goal_id))
        throw UnknownGoalError("unknown goal '" + goal_id + "'");

    GoalClassification cls;
    cls.goal = goal_id;
    for (const auto& edge : graph.edges) {
        if (edge.from == goal_id) cls.outgoing.push_back(edge.agent);
        if (edge.to == goal_id) cls.incoming.push_back(edge.agent);
    }
    std::sort(cls.outgoing.begin(), cls.outgoing.end());
    std::sort(cls.incoming.begin(), cls.incoming.end());

    const GoalSpec* declared = spec.find_goal(goal_id);
    if (cls.outgoing.size() > 1) {
        if (declared && declared->split) {
            cls.split = *declared->split;
        } else {
            std::vector<const AgentSpec*> outgoing;
            for (const auto& id : cls.outgoing)
                outgoing.push_back(spec.find_agent(id));
            cls.split = infer_split(outgoing);
        }
    }
    if (cls.incoming.size() > 1 && declared)
        cls.merge = declared->merge_or_default();
    return cls;
}

LayerResult check_acyclic(const GoalGraph& graph) {
    // Ordering runs over Start and the declared goals; End is excluded.
    std::vector<std::string> nodes;
    for (const auto& node : graph.nodes)
        if (node != GoalGraph::end_node) nodes.push_back(node);

    std::map<std::string, std::set<std::string>> next;
    std::map<std::string, int> in_degree;
    for (const auto& node : nodes) in_degree[node] = 0;
    for (const auto& [from, to] : graph.pre) {
        if (!in_degree.count(from) || !in_degree.count(to)) continue;
        if (next[from].insert(to).second) ++in_degree[to];
    }

    LayerResult result;
    std::set<std::string> placed;
    std::vector<std::string> frontier;
    for (const auto& node : nodes)
        if (in_degree[node] == 0) frontier.push_back(node);

    while (!frontier.empty()) {
        std::sort(frontier.begin(), frontier.end());
        result.layers.push_back(frontier);
        std::vector<std::string> following;
        for (const auto& node : frontier) {
            placed.insert(node);
            for (const auto& succ : next[node])
                if (--in_degree[succ] == 0) following.push_back(succ);
        }
        frontier = std::move(following);
    }

    if (placed.size() == nodes.size()) return result;

    // The residue contains a cycle; find one with a DFS back edge.
    result.layers.clear();
    std::vector<std::string> path;
    std::set<std::string> on_path, done;
    auto dfs = [&](auto&& self, const std::string& node) -> bool {
        path.push_back(node);
        on_path.insert(node);
        for (const auto& succ : next[node]) {
            if (placed.count(succ) || done.count(succ)) continue;
            if (on_path.count(succ)) {
                auto begin = std::find(path.begin(), path.end(), succ);
                result.cycle.assign(begin, path.end());
                result.cycle.push_back(succ);
                return true;
            }
            if (self(self, succ)) return true;
        }
        on_path.erase(node);
        done.insert(node);
        path.pop_back();
        return false;
    };
    for (const auto& node : nodes) {
        if (placed.count(node) || done.count(node)) continue;
        if (dfs(dfs, node)) break;
    }
    return result;
}

}  // namespace abp
