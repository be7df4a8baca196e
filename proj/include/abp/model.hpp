#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace abp {

struct AbpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Capabilities (CRUDA)
// ---------------------------------------------------------------------------

enum class Capability { Create, Read, Update, Delete, Archive };

inline constexpr std::array<Capability, 5> all_capabilities = {
    Capability::Create, Capability::Read, Capability::Update,
    Capability::Delete, Capability::Archive};

std::string to_string(Capability c);
std::optional<Capability> capability_from_string(const std::string& s);

enum class ObjectKind { Document, Message, Record };

std::string to_string(ObjectKind k);
std::optional<ObjectKind> object_kind_from_string(const std::string& s);

// Split and merge conditions share the same alphabet.
enum class BranchType { And, Or, Xor };

std::string to_string(BranchType t);
std::optional<BranchType> branch_type_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ObjectType {
    std::string id;
    ObjectKind kind = ObjectKind::Document;
    std::set<std::string> variants;
    bool physical = false;  // digital image of a physical entity

    friend bool operator==(const ObjectType&, const ObjectType&) = default;
};

// A reference to an object type with a variant constraint.
// An empty tag set means "any": it matches every instance of the object,
// including instances that carry no variant tag at all.
struct ObjectRef {
    std::string object;
    std::set<std::string> tags;

    bool is_any() const { return tags.empty(); }

    friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
    friend bool operator<(const ObjectRef& a, const ObjectRef& b) {
        if (a.object != b.object) return a.object < b.object;
        return a.tags < b.tags;
    }
};

std::string to_string(const ObjectRef& ref);  // slash notation

struct GoalSpec {
    std::string id;
    std::vector<ObjectRef> objects;  // sorted, unique
    // Absent means "use the inferred default" (see infer_split in goal_graph):
    // XOR when the outgoing agents' triggers are variant-disjoint, AND
    // otherwise; merge defaults to AND.
    std::optional<BranchType> split;
    std::optional<BranchType> merge;

    BranchType merge_or_default() const { return merge.value_or(BranchType::And); }

    friend bool operator==(const GoalSpec&, const GoalSpec&) = default;
};

struct AgentSpec {
    std::string id;
    std::set<Capability> capabilities;
    std::vector<ObjectRef> triggers;   // OT: consumed on firing
    std::vector<ObjectRef> resources;  // OR: read-only
    std::vector<ObjectRef> finals;     // OF: released on firing
    std::string goal;
    std::string behavior = "stub";

    // O_a = OT u OR u OF, derived, never stored.
    std::vector<ObjectRef> scope() const;

    friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

struct AbpSpec {
    std::string name;
    std::vector<ObjectType> objects;  // sorted by id
    std::vector<GoalSpec> goals;      // sorted by id
    std::vector<AgentSpec> agents;    // sorted by id
    std::vector<ObjectRef> start_objects;     // OS
    std::vector<ObjectRef> end_objects;       // OE
    std::vector<ObjectRef> resource_objects;  // OR (process level)
    std::set<Capability> capabilities;        // C (process level)
    // By default start objects are never produced by agents; set to permit it.
    bool allow_start_production = false;

    const ObjectType* find_object(const std::string& id) const;
    const GoalSpec* find_goal(const std::string& id) const;
    const AgentSpec* find_agent(const std::string& id) const;

    friend bool operator==(const AbpSpec&, const AbpSpec&) = default;
};

// ---------------------------------------------------------------------------
// Matching rules
// ---------------------------------------------------------------------------

// True iff the ref names this object and the instance tag satisfies the
// ref's constraint. "any" matches everything, including untagged instances.
bool ref_matches(const ObjectRef& ref, const std::string& type_id,
                 const std::optional<std::string>& tag);

// True iff some instance could satisfy both refs: same object and the
// constraints overlap ("any" overlaps everything).
bool refs_compatible(const ObjectRef& a, const ObjectRef& b);

// The tags a released instance of `ref` may carry: the ref's own tags when
// constrained, the type's declared variants for an "any" ref on a
// variant-carrying object, and the untagged instance otherwise.
std::vector<std::optional<std::string>> release_tag_options(
    const ObjectRef& ref, const ObjectType& type);

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

enum class SpecErrorCode {
    Syntax,
    UnknownObjectRef,
    UnknownGoalRef,
    DuplicateId,
    UndeclaredVariant,
    InvalidField,
    StartOverlap,
    DuplicateAgentId,
    ConflictingVariantUse,
};

std::string to_string(SpecErrorCode code);

struct SourcePos {
    int line = 0;
    int column = 0;
    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

struct SpecError {
    SpecErrorCode code;
    std::string token;  // offending identifier, may be empty
    std::string where;  // structural location, e.g. "agent a9"
    std::string message;
    std::optional<SourcePos> pos;
};

std::string to_string(const SpecError& err);

struct SpecParts {
    std::string name;
    std::vector<ObjectType> objects;
    std::vector<GoalSpec> goals;
    std::vector<AgentSpec> agents;
    std::vector<ObjectRef> start_objects;
    std::vector<ObjectRef> end_objects;
    std::vector<ObjectRef> resource_objects;
    std::set<Capability> capabilities;
    bool allow_start_production = false;
};

// Exactly one of spec/errors is populated.
struct AssembleResult {
    std::optional<AbpSpec> spec;
    std::vector<SpecError> errors;

    bool ok() const { return spec.has_value(); }
};

// Referential checks only: ids unique, every ref resolves, every constrained
// tag is declared, boundary sets non-empty, start objects not produced by
// agents unless allowed. Semantic checks live in the validator.
AssembleResult assemble_spec(SpecParts parts);

}  // namespace abp
