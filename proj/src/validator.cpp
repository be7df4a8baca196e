#include "abp/validator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace abp {

std::string to_string(FindingCode code) {
    switch (code) {
        case FindingCode::DeadAgent: return "E-DEAD-AGENT";
        case FindingCode::RedundantObject: return "W-REDUNDANT-OBJECT";
        case FindingCode::Cycle: return "E-CYCLE";
        case FindingCode::GoalMismatch: return "E-GOAL-MISMATCH";
        case FindingCode::UnreachableEnd: return "E-UNREACHABLE-END";
        case FindingCode::Covering: return "E-COVERING";
        case FindingCode::CoveringSlack: return "W-COVERING-SLACK";
        case FindingCode::SplitInconsistent: return "W-SPLIT-INCONSISTENT";
        case FindingCode::PhysicalNoRecord: return "W-PHYSICAL-NO-RECORD";
        case FindingCode::AmbiguousTrigger: return "E-AMBIGUOUS-TRIGGER";
    }
    return "?";
}

Severity severity_of(FindingCode code) {
    switch (code) {
        case FindingCode::RedundantObject:
        case FindingCode::CoveringSlack:
        case FindingCode::SplitInconsistent:
        case FindingCode::PhysicalNoRecord:
            return Severity::Warning;
        default:
            return Severity::Error;
    }
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Valid: return "valid";
        case Verdict::ValidWithWarnings: return "valid-with-warnings";
        case Verdict::Invalid: return "invalid";
    }
    return "?";
}

namespace {

using Atom = std::pair<std::string, std::optional<std::string>>;

void add_release_atoms(std::set<Atom>& atoms, const ObjectRef& ref,
                       const AbpSpec& spec) {
    const ObjectType* type = spec.find_object(ref.object);
    if (!type) return;
    for (const auto& tag : release_tag_options(ref, *type))
        atoms.insert({ref.object, tag});
}

bool ref_satisfiable(const ObjectRef& ref, const std::set<Atom>& atoms) {
    for (const auto& [object, tag] : atoms)
        if (ref_matches(ref, object, tag)) return true;
    return false;
}

// Alive agents and the atoms they can put into play, computed as a fixpoint
// from the start objects: an agent is alive iff every trigger is satisfiable
// from the atoms of OS plus the finals of alive agents.
struct Liveness {
    std::set<std::string> alive;
    std::set<Atom> available;
};

Liveness compute_liveness(const AbpSpec& spec) {
    Liveness result;
    for (const auto& ref : spec.start_objects)
        add_release_atoms(result.available, ref, spec);

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& agent : spec.agents) {
            if (result.alive.count(agent.id)) continue;
            bool ready = true;
            for (const auto& trig : agent.triggers)
                if (!ref_satisfiable(trig, result.available)) { ready = false; break; }
            if (!ready) continue;
            result.alive.insert(agent.id);
            for (const auto& fin : agent.finals)
                add_release_atoms(result.available, fin, spec);
            changed = true;
        }
    }
    return result;
}

struct Checker {
    const AbpSpec& spec;
    const GoalGraph& graph;
    Liveness live;
    std::vector<Finding> findings;

    void add(FindingCode code, std::string subject, std::string message,
             std::vector<std::string> related = {}) {
        findings.push_back({code, severity_of(code), std::move(subject),
                            std::move(message), std::move(related)});
    }

    void check_dead_agents() {
        for (const auto& agent : spec.agents) {
            if (live.alive.count(agent.id)) continue;
            std::vector<std::string> starved;
            for (const auto& trig : agent.triggers)
                if (!ref_satisfiable(trig, live.available))
                    starved.push_back(to_string(trig));
            std::ostringstream msg;
            msg << "agent can never wake up: trigger";
            for (const auto& ref : starved) msg << " '" << ref << "'";
            msg << " neither start-provided nor producible by a live agent";
            add(FindingCode::DeadAgent, agent.id, msg.str(), starved);
        }
    }

    void check_redundant_objects() {
        std::set<std::string> resource_ids;
        for (const auto& ref : spec.resource_objects)
            resource_ids.insert(ref.object);

        for (const auto& object : spec.objects) {
            std::set<Atom> produced;
            std::vector<std::string> producers;
            for (const auto& agent : spec.agents) {
                for (const auto& fin : agent.finals) {
                    if (fin.object != object.id) continue;
                    add_release_atoms(produced, fin, spec);
                    producers.push_back(agent.id);
                }
            }
            if (produced.empty()) continue;

            auto consumed_by = [&](const std::vector<ObjectRef>& refs) {
                for (const auto& ref : refs)
                    for (const auto& [obj, tag] : produced)
                        if (ref_matches(ref, obj, tag)) return true;
                return false;
            };

            bool used = consumed_by(spec.end_objects) || resource_ids.count(object.id);
            for (const auto& agent : spec.agents) {
                if (used) break;
                if (!live.alive.count(agent.id)) continue;
                used = consumed_by(agent.triggers) || consumed_by(agent.resources);
            }
            if (!used) {
                std::sort(producers.begin(), producers.end());
                producers.erase(std::unique(producers.begin(), producers.end()),
                                producers.end());
                add(FindingCode::RedundantObject, object.id,
                    "object is released but no live agent consumes it and it is "
                    "not a terminal or resource object",
                    producers);
            }
        }
    }

    void check_cycle() {
        LayerResult layers = check_acyclic(graph);
        if (layers.acyclic()) return;
        std::ostringstream msg;
        msg << "goal precedence contains a cycle:";
        for (const auto& goal : layers.cycle) msg << " " << goal;
        add(FindingCode::Cycle, layers.cycle.front(), msg.str(), layers.cycle);
    }

    void check_goal_mismatch() {
        for (const auto& agent : spec.agents) {
            const GoalSpec* goal = spec.find_goal(agent.goal);
            if (!goal) continue;
            bool contributes = false;
            for (const auto& fin : agent.finals) {
                for (const auto& ref : goal->objects)
                    if (refs_compatible(fin, ref)) { contributes = true; break; }
                if (contributes) break;
            }
            if (!contributes)
                add(FindingCode::GoalMismatch, agent.id,
                    "no final object of the agent contributes to its goal's "
                    "object set",
                    {agent.goal});
        }
    }

    void check_unreachable_end() {
        std::set<std::string> reachable{GoalGraph::start_node};
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& edge : graph.edges) {
                if (reachable.count(edge.from) && !reachable.count(edge.to)) {
                    reachable.insert(edge.to);
                    grew = true;
                }
            }
        }
        std::set<Atom> producible;
        for (const auto& edge : graph.edges) {
            if (!reachable.count(edge.from)) continue;
            const AgentSpec* agent = spec.find_agent(edge.agent);
            for (const auto& fin : agent->finals)
                add_release_atoms(producible, fin, spec);
        }
        for (const auto& ref : spec.end_objects)
            if (ref_satisfiable(ref, producible)) return;

        std::vector<std::string> ends;
        for (const auto& ref : spec.end_objects) ends.push_back(ref.object);
        std::sort(ends.begin(), ends.end());
        add(FindingCode::UnreachableEnd, GoalGraph::end_node,
            "no end object is producible by an agent reachable from Start", ends);
    }

    void check_covering() {
        std::map<Capability, std::vector<std::string>> used_by;
        for (const auto& agent : spec.agents)
            for (Capability c : agent.capabilities)
                used_by[c].push_back(agent.id);

        for (const auto& [cap, agents] : used_by) {
            if (!spec.capabilities.count(cap))
                add(FindingCode::Covering, to_string(cap),
                    "capability used by agents but missing from the process "
                    "capability set",
                    agents);
        }
        for (Capability cap : spec.capabilities) {
            if (!used_by.count(cap))
                add(FindingCode::CoveringSlack, to_string(cap),
                    "declared process capability is exercised by no agent");
        }
    }

    void check_split_consistency() {
        for (const auto& goal : spec.goals) {
            if (!goal.split || *goal.split != BranchType::Xor) continue;
            std::vector<const AgentSpec*> outgoing;
            for (const auto& edge : graph.edges)
                if (edge.from == goal.id) outgoing.push_back(spec.find_agent(edge.agent));
            for (size_t i = 0; i < outgoing.size(); ++i) {
                for (size_t j = i + 1; j < outgoing.size(); ++j) {
                    for (const auto& ra : outgoing[i]->triggers) {
                        for (const auto& rb : outgoing[j]->triggers) {
                            if (ra.object != rb.object || !refs_compatible(ra, rb))
                                continue;
                            add(FindingCode::SplitInconsistent, goal.id,
                                "XOR split, but agents '" + outgoing[i]->id +
                                    "' and '" + outgoing[j]->id +
                                    "' can both become ready from one '" +
                                    ra.object + "' instance",
                                {outgoing[i]->id, outgoing[j]->id, ra.object});
                        }
                    }
                }
            }
        }
    }

    void check_physical_kinds() {
        for (const auto& object : spec.objects) {
            if (object.physical && object.kind != ObjectKind::Record)
                add(FindingCode::PhysicalNoRecord, object.id,
                    "physical object should be mirrored by a record, not a " +
                        to_string(object.kind));
        }
    }

    void check_ambiguous_triggers() {
        for (const auto& amb : graph.ambiguous) {
            std::ostringstream msg;
            msg << "trigger objects are satisfiable by more than one goal:";
            for (const auto& goal : amb.candidates) msg << " " << goal;
            add(FindingCode::AmbiguousTrigger, amb.agent, msg.str(), amb.candidates);
        }
    }

    ValidationReport run() {
        check_dead_agents();
        check_redundant_objects();
        check_cycle();
        check_goal_mismatch();
        check_unreachable_end();
        check_covering();
        check_split_consistency();
        check_physical_kinds();
        check_ambiguous_triggers();

        std::sort(findings.begin(), findings.end(),
                  [](const Finding& a, const Finding& b) {
                      auto ka = std::make_tuple(a.severity == Severity::Warning,
                                                to_string(a.code), a.subject);
                      auto kb = std::make_tuple(b.severity == Severity::Warning,
                                                to_string(b.code), b.subject);
                      return ka < kb;
                  });

        ValidationReport report;
        report.spec_name = spec.name;
        report.findings = std::move(findings);
        report.verdict = Verdict::Valid;
        for (const auto& finding : report.findings) {
            if (finding.severity == Severity::Error) {
                report.verdict = Verdict::Invalid;
                break;
            }
            report.verdict = Verdict::ValidWithWarnings;
        }
        return report;
    }
};

}  // namespace

ValidationReport validate_spec(const AbpSpec& spec, const GoalGraph& graph) {
    Checker checker{spec, graph, compute_liveness(spec), {}};
    return checker.run();
}

std::string explain_finding(std::string_view code) {
    static const std::map<std::string_view, std::string_view> catalog = {
        {"E-DEAD-AGENT",
         "Core consistency rule. Every trigger object of an agent must either "
         "be a start object or be producible as a final object of some agent "
         "that can itself run; otherwise the agent can never wake up and the "
         "process silently loses that branch. Starvation propagates: an agent "
         "feeding only on the finals of dead agents is dead too. Fix by adding "
         "a producer for the starved trigger, widening its variant constraint, "
         "or seeding the object at process start."},
        {"W-REDUNDANT-OBJECT",
         "Core consistency rule. An object that agents release but that no "
         "live agent's trigger or resource consumes, and that is not a "
         "terminal object, plays no role in the process. Either wire a "
         "consumer to it, add it to the end objects, or drop it from the "
         "producing agents' final sets."},
        {"E-CYCLE",
         "Extended structural check. Goals form a strict partial order under "
         "the derived precedence relation, and execution (fire-at-most-once "
         "per case) cannot honor a cyclic ordering. Break the cycle by "
         "splitting a goal or removing the back-arc agent."},
        {"E-GOAL-MISMATCH",
         "Extended structural check, derived from the rule that an agent's "
         "firing achieves its goal through the objects it releases. An agent "
         "whose finals share nothing with its goal's object set can never "
         "contribute to that goal, so the declaration and the derived graph "
         "disagree. Align the agent's finals or its goal."},
        {"E-UNREACHABLE-END",
         "Extended structural check. Following the agent arcs from the start "
         "objects, no agent that could ever run releases any declared end "
         "object, so no case can terminate successfully. Check the chain of "
         "triggers between start and end."},
        {"E-COVERING",
         "Core consistency rule of the process tuple: the agents' capability "
         "sets must cover the declared process capabilities, and an agent "
         "exercising an undeclared capability means the process requirement "
         "list is incomplete. Add the capability to the process set."},
        {"W-COVERING-SLACK",
         "Extended structural check. A declared process capability that no "
         "agent exercises is harmless but suggests a stale requirement or a "
         "missing agent. Remove it or add the agent that needs it."},
        {"W-SPLIT-INCONSISTENT",
         "Extended structural check. A goal declared as an exclusive (XOR) "
         "split should have its outgoing agents discriminated by disjoint "
         "variant constraints; when two of them can become ready from the "
         "same instance, the exclusivity is enforced only by the run-time "
         "choice policy rather than by the data. Narrow the variant "
         "constraints if data-driven branching was intended."},
        {"W-PHYSICAL-NO-RECORD",
         "Extended structural check. An object marked as the digital image "
         "of a physical entity is conventionally kept as a database record "
         "created in parallel with the physical object; a document or "
         "message kind is suspicious. Change the kind or clear the flag."},
        {"E-AMBIGUOUS-TRIGGER",
         "Extended structural check. The source goal of an agent is derived "
         "from its trigger objects, and that derivation must be unique; when "
         "several goals' object sets satisfy the same trigger set, the graph "
         "arc cannot be placed. Disambiguate the goals' object sets or the "
         "agent's variant constraints."},
    };
    auto it = catalog.find(code);
    if (it == catalog.end())
        throw UnknownCodeError("unknown finding code '" + std::string(code) + "'");
    return std::string(it->second);
}

}  // namespace abp
