#include "abp/engine.hpp"

#include <algorithm>
#include <sstream>

namespace abp {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Seeded: return "seeded";
        case PolicyKind::Scripted: return "scripted";
        case PolicyKind::ExhaustiveProbe: return "exhaustive-probe";
    }
    return "?";
}

std::string to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Running: return "running";
        case RunStatus::Completed: return "completed";
        case RunStatus::Deadlocked: return "deadlock";
        case RunStatus::StepLimit: return "step-limit";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ChoicePolicy
// ---------------------------------------------------------------------------

ChoicePolicy ChoicePolicy::seeded(uint64_t seed) {
    ChoicePolicy policy;
    policy.kind_ = PolicyKind::Seeded;
    policy.seed_ = seed;
    policy.rng_.state = seed;
    return policy;
}

ChoicePolicy ChoicePolicy::scripted(std::vector<Decision> decisions) {
    ChoicePolicy policy;
    policy.kind_ = PolicyKind::Scripted;
    policy.script_ = std::move(decisions);
    return policy;
}

ChoicePolicy ChoicePolicy::probe(std::vector<size_t> prefix) {
    ChoicePolicy policy;
    policy.kind_ = PolicyKind::ExhaustiveProbe;
    policy.prefix_ = std::move(prefix);
    return policy;
}

std::optional<uint64_t> ChoicePolicy::seed() const {
    if (kind_ == PolicyKind::Seeded) return seed_;
    return std::nullopt;
}

bool ChoicePolicy::fully_consumed() const {
    return kind_ != PolicyKind::Scripted || cursor_ == script_.size();
}

size_t ChoicePolicy::next_index(const std::string& site, size_t cardinality) {
    size_t index = 0;
    switch (kind_) {
        case PolicyKind::Seeded:
            index = static_cast<size_t>(rng_.next() % cardinality);
            break;
        case PolicyKind::ExhaustiveProbe:
            index = consults_.size() < prefix_.size() ? prefix_[consults_.size()] : 0;
            break;
        case PolicyKind::Scripted:
            throw AbpError("scripted policies resolve decisions by content");
    }
    consults_.push_back({site, cardinality, index});
    return index;
}

size_t ChoicePolicy::choose_one(const std::string& site,
                                const std::vector<std::string>& options) {
    if (kind_ != PolicyKind::Scripted) return next_index(site, options.size());

    if (cursor_ >= script_.size())
        throw PolicyExhaustedError("no scripted decision left for site '" + site + "'");
    const Decision& decision = script_[cursor_++];
    if (decision.site != site)
        throw PolicyExhaustedError("scripted decision for site '" + decision.site +
                                   "' but site '" + site + "' requires a choice");
    if (decision.pick.size() != 1)
        throw PolicyExhaustedError("site '" + site + "' requires exactly one pick");
    auto it = std::find(options.begin(), options.end(), decision.pick.front());
    if (it == options.end())
        throw PolicyExhaustedError("pick '" + decision.pick.front() +
                                   "' is not an option at site '" + site + "'");
    return static_cast<size_t>(it - options.begin());
}

std::vector<size_t> ChoicePolicy::choose_subset(
    const std::string& site, const std::vector<std::string>& options) {
    const size_t k = options.size();
    if (kind_ != PolicyKind::Scripted) {
        const uint64_t space = (uint64_t{1} << k) - 1;  // non-empty subsets
        uint64_t mask = 0;
        if (kind_ == PolicyKind::Seeded) {
            mask = 1 + rng_.next() % space;
            consults_.push_back({site, static_cast<size_t>(space),
                                 static_cast<size_t>(mask - 1)});
        } else {
            size_t index =
                consults_.size() < prefix_.size() ? prefix_[consults_.size()] : 0;
            consults_.push_back({site, static_cast<size_t>(space), index});
            mask = index + 1;
        }
        std::vector<size_t> picked;
        for (size_t bit = 0; bit < k; ++bit)
            if (mask & (uint64_t{1} << bit)) picked.push_back(bit);
        return picked;
    }

    if (cursor_ >= script_.size())
        throw PolicyExhaustedError("no scripted decision left for site '" + site + "'");
    const Decision& decision = script_[cursor_++];
    if (decision.site != site)
        throw PolicyExhaustedError("scripted decision for site '" + decision.site +
                                   "' but site '" + site + "' requires a choice");
    if (decision.pick.empty())
        throw PolicyExhaustedError("site '" + site + "' requires a non-empty subset");
    std::vector<size_t> picked;
    for (const auto& name : decision.pick) {
        auto it = std::find(options.begin(), options.end(), name);
        if (it == options.end())
            throw PolicyExhaustedError("pick '" + name + "' is not an option at site '" +
                                       site + "'");
        picked.push_back(static_cast<size_t>(it - options.begin()));
    }
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    return picked;
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

RunStatus Trace::status() const {
    if (events.empty()) return RunStatus::Running;
    const TraceEvent& last = events.back();
    if (std::holds_alternative<CompletedEvent>(last)) return RunStatus::Completed;
    if (std::holds_alternative<DeadlockedEvent>(last)) return RunStatus::Deadlocked;
    if (std::holds_alternative<StepLimitEvent>(last)) return RunStatus::StepLimit;
    return RunStatus::Running;
}

std::vector<Decision> trace_choices(const Trace& trace) {
    std::vector<Decision> decisions;
    for (const auto& event : trace.events)
        if (const auto* choice = std::get_if<ChoiceMadeEvent>(&event))
            decisions.push_back({choice->site, choice->picked});
    return decisions;
}

// ---------------------------------------------------------------------------
// Behaviors
// ---------------------------------------------------------------------------

std::string BehaviorContext::release(const ObjectRef& final_ref) {
    const ObjectType* type = spec.find_object(final_ref.object);
    if (!type) throw AbpError("final ref to undeclared object '" + final_ref.object + "'");
    auto options = release_tag_options(final_ref, *type);
    size_t index = 0;
    if (options.size() >= 2) {
        std::vector<std::string> tags;
        tags.reserve(options.size());
        for (const auto& tag : options) tags.push_back(*tag);
        const std::string site = "agent:" + agent.id + ":" + final_ref.object;
        index = policy.choose_one(site, tags);
        events.push_back(ChoiceMadeEvent{site, tags, {tags[index]}});
    }
    std::string id = store.create(agent.id, step, final_ref.object, options[index]);
    released.push_back(id);
    return id;
}

BehaviorRegistry::BehaviorRegistry() {
    behaviors_["stub"] = [](BehaviorContext& ctx) {
        for (const auto& fin : ctx.agent.finals) ctx.release(fin);
    };
}

void BehaviorRegistry::add(std::string name, Behavior behavior) {
    behaviors_[std::move(name)] = std::move(behavior);
}

const Behavior& BehaviorRegistry::get(const std::string& name) const {
    auto it = behaviors_.find(name);
    if (it == behaviors_.end())
        throw UnknownBehaviorError("no behavior bound to '" + name + "'");
    return it->second;
}

const BehaviorRegistry& default_behaviors() {
    static const BehaviorRegistry registry;
    return registry;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

// Injective assignment of trigger refs to distinct available instances,
// deterministic: refs in declared order take the earliest feasible instance.
bool match_triggers_from(const std::vector<ObjectRef>& refs, size_t at,
                         const std::vector<const ObjectInstance*>& pool,
                         std::vector<bool>& used,
                         std::vector<const ObjectInstance*>& out) {
    if (at == refs.size()) return true;
    for (size_t i = 0; i < pool.size(); ++i) {
        if (used[i] || !ref_matches(refs[at], *pool[i])) continue;
        used[i] = true;
        out.push_back(pool[i]);
        if (match_triggers_from(refs, at + 1, pool, used, out)) return true;
        out.pop_back();
        used[i] = false;
    }
    return false;
}

std::optional<std::vector<const ObjectInstance*>> match_triggers(
    const AgentSpec& agent, const std::vector<const ObjectInstance*>& pool) {
    std::vector<bool> used(pool.size(), false);
    std::vector<const ObjectInstance*> out;
    if (match_triggers_from(agent.triggers, 0, pool, used, out)) return out;
    return std::nullopt;
}

BranchType effective_split(const ExecutionState& state, const std::string& goal,
                           const std::vector<std::string>& outgoing) {
    if (outgoing.size() < 2) return BranchType::And;
    const GoalSpec* declared = state.spec->find_goal(goal);
    if (declared && declared->split) return *declared->split;
    std::vector<const AgentSpec*> agents;
    for (const auto& id : outgoing) agents.push_back(state.spec->find_agent(id));
    return infer_split(agents);
}

std::vector<std::string> outgoing_agents(const GoalGraph& graph,
                                         const std::string& goal) {
    std::vector<std::string> out;
    for (const auto& edge : graph.edges)
        if (edge.from == goal) out.push_back(edge.agent);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

ExecutionState init_state(const AbpSpec& spec, const GoalGraph& graph,
                          ChoicePolicy policy, int step_limit, bool force,
                          const BehaviorRegistry* behaviors) {
    if (!force) {
        ValidationReport report = validate_spec(spec, graph);
        if (report.verdict == Verdict::Invalid) {
            std::ostringstream msg;
            msg << "spec '" << spec.name << "' is invalid:";
            for (const auto& finding : report.findings) {
                if (finding.severity != Severity::Error) continue;
                msg << " [" << to_string(finding.code) << " " << finding.subject << "]";
            }
            throw InvalidSpecError(msg.str());
        }
    }

    ExecutionState state;
    state.spec = &spec;
    state.graph = &graph;
    state.behaviors = behaviors ? behaviors : &default_behaviors();
    state.store = ObjectStore(spec);
    state.policy = std::move(policy);
    state.step_limit = step_limit;
    state.trace.header = {spec.name, to_string(state.policy.kind()),
                          state.policy.seed()};

    SeededEvent seeded;
    for (const auto& ref : spec.start_objects) {
        const ObjectType* type = spec.find_object(ref.object);
        auto options = release_tag_options(ref, *type);
        size_t index = 0;
        if (options.size() >= 2) {
            std::vector<std::string> tags;
            for (const auto& tag : options) tags.push_back(*tag);
            const std::string site = "agent:start:" + ref.object;
            index = state.policy.choose_one(site, tags);
            state.trace.events.push_back(ChoiceMadeEvent{site, tags, {tags[index]}});
        }
        seeded.instances.push_back(state.store.seed(ref.object, options[index], 0));
    }
    state.trace.events.push_back(std::move(seeded));
    return state;
}

std::vector<std::string> ready_agents(const ExecutionState& state) {
    std::vector<std::string> ready;
    auto pool = state.store.available();
    for (const auto& agent : state.spec->agents) {
        if (state.fired.count(agent.id) || state.disabled.count(agent.id)) continue;
        // Agents without a derived source goal (detached or ambiguous) never
        // fire; the validator reports them.
        if (!state.graph->trigger_map.count(agent.id)) continue;
        if (match_triggers(agent, pool)) ready.push_back(agent.id);
    }
    return ready;
}

namespace {

struct StepRollback {
    ObjectStore store;
    std::set<std::string> fired, achieved, disabled, warned;
    std::map<std::string, std::vector<std::string>> released_by;
    int step_no;
};

std::vector<TraceEvent> evaluate_quiescence(ExecutionState& state) {
    std::vector<TraceEvent> events;
    std::vector<std::string> end_instances;
    for (const auto& instance : state.store.instances()) {
        if (instance.provenance.producer == "start") continue;
        if (instance.state != InstanceState::Available &&
            instance.state != InstanceState::Archived)
            continue;
        for (const auto& ref : state.spec->end_objects) {
            if (ref_matches(ref, instance)) {
                end_instances.push_back(instance.id);
                break;
            }
        }
    }
    if (!end_instances.empty()) {
        state.status = RunStatus::Completed;
        events.push_back(CompletedEvent{std::move(end_instances)});
        return events;
    }

    DeadlockedEvent deadlock;
    for (const auto& agent : state.spec->agents)
        if (!state.fired.count(agent.id) && !state.disabled.count(agent.id))
            deadlock.unfired_agents.push_back(agent.id);
    for (const auto* instance : state.store.available())
        deadlock.available_instances.push_back(instance->id);
    state.status = RunStatus::Deadlocked;
    events.push_back(std::move(deadlock));
    return events;
}

std::vector<std::string> select_agents(ExecutionState& state,
                                       const std::vector<std::string>& ready,
                                       std::vector<TraceEvent>& events) {
    std::map<std::string, std::vector<std::string>> by_goal;
    for (const auto& id : ready) by_goal[state.graph->trigger_map.at(id)].push_back(id);

    std::vector<std::string> selected;
    for (auto& [goal, candidates] : by_goal) {
        std::sort(candidates.begin(), candidates.end());
        auto outgoing = outgoing_agents(*state.graph, goal);
        switch (effective_split(state, goal, outgoing)) {
            case BranchType::And:
                selected.insert(selected.end(), candidates.begin(), candidates.end());
                break;
            case BranchType::Or: {
                std::vector<size_t> picked;
                if (candidates.size() == 1) {
                    picked.push_back(0);
                } else {
                    const std::string site = "goal:" + goal;
                    picked = state.policy.choose_subset(site, candidates);
                    std::vector<std::string> names;
                    for (size_t index : picked) names.push_back(candidates[index]);
                    events.push_back(ChoiceMadeEvent{site, candidates, names});
                }
                for (size_t index : picked) selected.push_back(candidates[index]);
                break;
            }
            case BranchType::Xor: {
                size_t index = 0;
                if (candidates.size() > 1) {
                    const std::string site = "goal:" + goal;
                    index = state.policy.choose_one(site, candidates);
                    events.push_back(
                        ChoiceMadeEvent{site, candidates, {candidates[index]}});
                }
                selected.push_back(candidates[index]);
                // The unchosen siblings of this goal never fire in this case.
                for (const auto& agent : outgoing)
                    if (agent != candidates[index]) state.disabled.insert(agent);
                break;
            }
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

void fire_agent(ExecutionState& state, const AgentSpec& agent, int current_step,
                std::vector<TraceEvent>& events) {
    auto match = match_triggers(agent, state.store.available());
    if (!match) return;  // a sibling consumed the tokens; eligible again later

    std::vector<std::string> consumed;
    for (const auto* instance : *match) {
        state.store.consume(instance->id);
        consumed.push_back(instance->id);
    }
    for (const auto& ref : agent.resources) {
        for (const auto* instance : state.store.available()) {
            if (ref_matches(ref, *instance)) {
                state.store.read(agent.id, instance->id);
                break;
            }
        }
    }

    BehaviorContext ctx{*state.spec, agent,        state.store, state.policy,
                        current_step, events, {}};
    state.behaviors->get(agent.behavior)(ctx);

    state.fired.insert(agent.id);
    auto& released = state.released_by[agent.id];
    released.insert(released.end(), ctx.released.begin(), ctx.released.end());
    events.push_back(AgentFiredEvent{agent.id, std::move(consumed),
                                     std::move(ctx.released)});
}

void achieve_goals(ExecutionState& state, std::vector<TraceEvent>& events) {
    for (const auto& goal : state.spec->goals) {
        std::vector<std::string> incoming;
        for (const auto& edge : state.graph->edges)
            if (edge.to == goal.id) incoming.push_back(edge.agent);
        if (incoming.empty()) continue;
        std::sort(incoming.begin(), incoming.end());

        const BranchType merge =
            incoming.size() > 1 ? goal.merge_or_default() : BranchType::And;

        // Contributing agents: incoming, fired, with a released instance
        // matching the goal's object set.
        std::vector<std::string> contributing;
        std::vector<std::string> instances;
        for (const auto& agent : incoming) {
            if (!state.fired.count(agent)) continue;
            auto it = state.released_by.find(agent);
            if (it == state.released_by.end()) continue;
            bool contributes = false;
            for (const auto& id : it->second) {
                const ObjectInstance* instance = state.store.find(id);
                for (const auto& ref : goal.objects) {
                    if (ref_matches(ref, *instance)) {
                        instances.push_back(id);
                        contributes = true;
                        break;
                    }
                }
            }
            if (contributes) contributing.push_back(agent);
        }

        if (!state.achieved.count(goal.id)) {
            bool holds = false;
            if (merge == BranchType::And) {
                holds = true;
                for (const auto& agent : incoming)
                    if (!state.fired.count(agent)) { holds = false; break; }
                if (holds) {
                    for (const auto& ref : goal.objects) {
                        bool matched = false;
                        for (const auto& instance : state.store.instances()) {
                            if (instance.provenance.producer == "start") continue;
                            if (ref_matches(ref, instance)) { matched = true; break; }
                        }
                        if (!matched) { holds = false; break; }
                    }
                }
            } else {
                holds = !contributing.empty();
            }
            if (!holds) continue;
            state.achieved.insert(goal.id);
            events.push_back(GoalAchievedEvent{goal.id, contributing, instances});
        }

        if (merge == BranchType::Xor && contributing.size() > 1 &&
            !state.warned_goals.count(goal.id)) {
            state.warned_goals.insert(goal.id);
            std::ostringstream msg;
            msg << "XOR merge expects exactly one incoming agent, but";
            for (const auto& agent : contributing) msg << " " << agent;
            msg << " all fired";
            events.push_back(WarningEvent{"goal:" + goal.id, msg.str()});
        }
    }
}

}  // namespace

std::vector<TraceEvent> step(ExecutionState& state) {
    if (state.status != RunStatus::Running)
        throw AbpError("step on a terminal run (" + to_string(state.status) + ")");

    std::vector<std::string> ready = ready_agents(state);
    if (ready.empty()) {
        auto events = evaluate_quiescence(state);
        state.trace.events.insert(state.trace.events.end(), events.begin(),
                                  events.end());
        return events;
    }

    StepRollback rollback{state.store,    state.fired,        state.achieved,
                          state.disabled, state.warned_goals, state.released_by,
                          state.step_no};
    std::vector<TraceEvent> events;
    const int current_step = state.step_no + 1;
    try {
        std::vector<std::string> selected = select_agents(state, ready, events);
        for (const auto& id : selected)
            fire_agent(state, *state.spec->find_agent(id), current_step, events);
        state.store.archive_consumed(current_step);
        achieve_goals(state, events);
    } catch (...) {
        // CapabilityViolation and policy errors abort the step atomically;
        // the policy's own cursor/rng state is not rewound.
        state.store = std::move(rollback.store);
        state.fired = std::move(rollback.fired);
        state.achieved = std::move(rollback.achieved);
        state.disabled = std::move(rollback.disabled);
        state.warned_goals = std::move(rollback.warned);
        state.released_by = std::move(rollback.released_by);
        state.step_no = rollback.step_no;
        throw;
    }

    state.step_no = current_step;
    if (state.step_no >= state.step_limit) {
        state.status = RunStatus::StepLimit;
        events.push_back(StepLimitEvent{state.step_limit});
    }
    state.trace.events.insert(state.trace.events.end(), events.begin(), events.end());
    return events;
}

Trace run(ExecutionState& state) {
    while (state.status == RunStatus::Running) step(state);
    if (!state.policy.fully_consumed())
        throw PolicyLeftoverError("scripted policy has unused decisions at termination");
    return state.trace;
}

std::vector<Trace> enumerate_runs(const AbpSpec& spec, const GoalGraph& graph,
                                  const EnumerationBounds& bounds) {
    if (spec.agents.size() > bounds.max_agents)
        throw BoundsExceededError("spec has " + std::to_string(spec.agents.size()) +
                                  " agents, enumeration bound is " +
                                  std::to_string(bounds.max_agents));

    std::vector<Trace> traces;
    std::vector<size_t> prefix;
    while (true) {
        ExecutionState state = init_state(spec, graph, ChoicePolicy::probe(prefix),
                                          bounds.max_steps, /*force=*/true);
        traces.push_back(run(state));
        if (traces.size() > bounds.max_runs)
            throw BoundsExceededError("enumeration exceeds " +
                                      std::to_string(bounds.max_runs) + " runs");

        const auto& consults = state.policy.consults();
        size_t backtrack = consults.size();
        while (backtrack > 0 &&
               consults[backtrack - 1].chosen + 1 >= consults[backtrack - 1].cardinality)
            --backtrack;
        if (backtrack == 0) break;
        prefix.clear();
        for (size_t i = 0; i + 1 < backtrack; ++i) prefix.push_back(consults[i].chosen);
        prefix.push_back(consults[backtrack - 1].chosen + 1);
    }
    return traces;
}

Trace replay_trace(const AbpSpec& spec, const GoalGraph& graph,
                   const Trace& original, const BehaviorRegistry* behaviors) {
    int step_limit = 1 << 20;
    if (original.status() == RunStatus::StepLimit)
        step_limit = std::get<StepLimitEvent>(original.events.back()).limit;

    ExecutionState state =
        init_state(spec, graph, ChoicePolicy::scripted(trace_choices(original)),
                   step_limit, /*force=*/true, behaviors);
    Trace trace = run(state);
    trace.header = original.header;
    return trace;
}

}  // namespace abp
