#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "abp/goal_graph.hpp"
#include "abp/model.hpp"
#include "abp/object_store.hpp"
#include "abp/validator.hpp"

namespace abp {

struct InvalidSpecError : AbpError {
    using AbpError::AbpError;
};

struct PolicyExhaustedError : AbpError {
    using AbpError::AbpError;
};

struct PolicyLeftoverError : AbpError {
    using AbpError::AbpError;
};

struct BoundsExceededError : AbpError {
    using AbpError::AbpError;
};

struct UnknownBehaviorError : AbpError {
    using AbpError::AbpError;
};

// ---------------------------------------------------------------------------
// Choice policy
// ---------------------------------------------------------------------------

// splitmix64: 64-bit state advanced by the golden-gamma constant, output a
// bijective scramble of the state. Chosen for portability: seeds reproduce
// the same runs on any implementation of this trace format.
struct SplitMix64 {
    uint64_t state = 0;

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

enum class PolicyKind { Seeded, Scripted, ExhaustiveProbe };

std::string to_string(PolicyKind kind);

// One scripted decision. Sites are "agent:<aID>:<object>" for variant picks
// (including "agent:start:<object>" for seeding picks) and "goal:<gID>" for
// OR/XOR branch picks.
struct Decision {
    std::string site;
    std::vector<std::string> pick;

    friend bool operator==(const Decision&, const Decision&) = default;
    friend bool operator<(const Decision& a, const Decision& b) {
        return std::tie(a.site, a.pick) < std::tie(b.site, b.pick);
    }
};

struct ProbeConsult {
    std::string site;
    size_t cardinality = 0;
    size_t chosen = 0;
};

// Resolves nondeterminism: variant selection at release time, XOR single
// picks and OR subset picks. Consulted only for real choices (2+ options).
class ChoicePolicy {
  public:
    static ChoicePolicy seeded(uint64_t seed);
    static ChoicePolicy scripted(std::vector<Decision> decisions);
    static ChoicePolicy probe(std::vector<size_t> prefix);

    PolicyKind kind() const { return kind_; }
    std::optional<uint64_t> seed() const;

    size_t choose_one(const std::string& site,
                      const std::vector<std::string>& options);
    std::vector<size_t> choose_subset(const std::string& site,
                                      const std::vector<std::string>& options);

    // Scripted policies must end exactly spent.
    bool fully_consumed() const;
    const std::vector<ProbeConsult>& consults() const { return consults_; }

  private:
    ChoicePolicy() = default;

    size_t next_index(const std::string& site, size_t cardinality);

    PolicyKind kind_ = PolicyKind::Seeded;
    uint64_t seed_ = 0;
    SplitMix64 rng_;
    std::vector<Decision> script_;
    size_t cursor_ = 0;
    std::vector<size_t> prefix_;
    std::vector<ProbeConsult> consults_;
};

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

enum class RunStatus { Running, Completed, Deadlocked, StepLimit };

std::string to_string(RunStatus status);

struct TraceHeader {
    std::string spec_name;
    std::string policy;
    std::optional<uint64_t> seed;

    friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct SeededEvent {
    std::vector<std::string> instances;
    friend bool operator==(const SeededEvent&, const SeededEvent&) = default;
};

struct ChoiceMadeEvent {
    std::string site;
    std::vector<std::string> options;
    std::vector<std::string> picked;
    friend bool operator==(const ChoiceMadeEvent&, const ChoiceMadeEvent&) = default;
};

struct AgentFiredEvent {
    std::string agent;
    std::vector<std::string> consumed;
    std::vector<std::string> released;
    friend bool operator==(const AgentFiredEvent&, const AgentFiredEvent&) = default;
};

struct GoalAchievedEvent {
    std::string goal;
    std::vector<std::string> agents;     // contributing, sorted
    std::vector<std::string> instances;  // the goal's object set, by instance
    friend bool operator==(const GoalAchievedEvent&, const GoalAchievedEvent&) = default;
};

struct WarningEvent {
    std::string site;
    std::string message;
    friend bool operator==(const WarningEvent&, const WarningEvent&) = default;
};

struct CompletedEvent {
    std::vector<std::string> end_instances;
    friend bool operator==(const CompletedEvent&, const CompletedEvent&) = default;
};

struct DeadlockedEvent {
    std::vector<std::string> unfired_agents;
    std::vector<std::string> available_instances;
    friend bool operator==(const DeadlockedEvent&, const DeadlockedEvent&) = default;
};

struct StepLimitEvent {
    int limit = 0;
    friend bool operator==(const StepLimitEvent&, const StepLimitEvent&) = default;
};

using TraceEvent =
    std::variant<SeededEvent, ChoiceMadeEvent, AgentFiredEvent, GoalAchievedEvent,
                 WarningEvent, CompletedEvent, DeadlockedEvent, StepLimitEvent>;

struct Trace {
    TraceHeader header;
    std::vector<TraceEvent> events;

    RunStatus status() const;

    friend bool operator==(const Trace&, const Trace&) = default;
};

// The trace's ChoiceMade events as a scripted policy.
std::vector<Decision> trace_choices(const Trace& trace);

// ---------------------------------------------------------------------------
// Behaviors
// ---------------------------------------------------------------------------

struct BehaviorContext {
    const AbpSpec& spec;
    const AgentSpec& agent;
    ObjectStore& store;
    ChoicePolicy& policy;
    int step;
    std::vector<TraceEvent>& events;
    std::vector<std::string> released;

    // CREATE one instance for a final ref, consulting the policy when the
    // ref leaves the variant open.
    std::string release(const ObjectRef& final_ref);
};

using Behavior = std::function<void(BehaviorContext&)>;

class BehaviorRegistry {
  public:
    BehaviorRegistry();  // ships the default "stub"
    void add(std::string name, Behavior behavior);
    const Behavior& get(const std::string& name) const;

  private:
    std::map<std::string, Behavior> behaviors_;
};

const BehaviorRegistry& default_behaviors();

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct ExecutionState {
    const AbpSpec* spec = nullptr;
    const GoalGraph* graph = nullptr;
    const BehaviorRegistry* behaviors = nullptr;
    ObjectStore store;
    ChoicePolicy policy = ChoicePolicy::seeded(0);
    std::set<std::string> fired;
    std::set<std::string> achieved;
    std::set<std::string> disabled;      // XOR-unchosen siblings
    std::set<std::string> warned_goals;  // XOR-merge over-firing reported
    std::map<std::string, std::vector<std::string>> released_by;
    int step_no = 0;
    int step_limit = 0;
    RunStatus status = RunStatus::Running;
    Trace trace;
};

// Seeds one instance per start-object ref. Refuses invalid specs unless
// forced.
ExecutionState init_state(const AbpSpec& spec, const GoalGraph& graph,
                          ChoicePolicy policy, int step_limit = 1000,
                          bool force = false,
                          const BehaviorRegistry* behaviors = nullptr);

// Agents not yet fired and not disabled whose every trigger ref matches a
// distinct available instance (injective matching).
std::vector<std::string> ready_agents(const ExecutionState& state);

// One engine step: evaluate readiness (terminal when empty), apply split
// semantics per trigger goal, fire the selection in ascending agent order,
// then recompute achieved goals per merge condition. A CapabilityViolation
// from a behavior aborts the whole step atomically.
std::vector<TraceEvent> step(ExecutionState& state);

// Steps to a terminal status and returns the trace.
Trace run(ExecutionState& state);

struct EnumerationBounds {
    size_t max_agents = 12;
    int max_steps = 64;
    size_t max_runs = 4096;
};

// Depth-first exploration of every choice point; returns all maximal traces
// in canonical order, one per distinct choice sequence.
std::vector<Trace> enumerate_runs(const AbpSpec& spec, const GoalGraph& graph,
                                  const EnumerationBounds& bounds = {});

// Re-executes a trace's choices as a scripted policy. The returned trace
// carries the original header (policy provenance) over a freshly derived
// event stream.
Trace replay_trace(const AbpSpec& spec, const GoalGraph& graph,
                   const Trace& original,
                   const BehaviorRegistry* behaviors = nullptr);

}  // namespace abp
