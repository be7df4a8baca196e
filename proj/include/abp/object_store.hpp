#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abp/model.hpp"

namespace abp {

struct CapabilityViolation : AbpError {
    using AbpError::AbpError;
};

struct NotAvailableError : AbpError {
    using AbpError::AbpError;
};

struct UnknownInstanceError : AbpError {
    using AbpError::AbpError;
};

using Payload = std::map<std::string, std::string>;

enum class InstanceState { Available, Consumed, Archived, Deleted };

std::string to_string(InstanceState s);

struct Provenance {
    std::string producer;  // agent id or "start"
    int step = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ObjectInstance {
    std::string id;  // "<type>#<seq>", sequence is store-global
    std::string type;
    std::optional<std::string> variant;
    Payload payload;
    Provenance provenance;
    InstanceState state = InstanceState::Available;

    friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

inline bool ref_matches(const ObjectRef& ref, const ObjectInstance& instance) {
    return ref_matches(ref, instance.type, instance.variant);
}

struct ArchiveEntry {
    int step = 0;
    ObjectInstance snapshot;
    std::string reason;

    friend bool operator==(const ArchiveEntry&, const ArchiveEntry&) = default;
};

// Runtime pool of object instances. Mutated only through the guarded CRUDA
// operations and the engine's token moves; value copies act as snapshots.
class ObjectStore {
  public:
    ObjectStore() = default;
    explicit ObjectStore(const AbpSpec& spec);

    // Guarded CRUDA operations. The capability check precedes every mutation,
    // so a CapabilityViolation leaves the store untouched.
    std::string create(const std::string& actor, int step, const std::string& type,
                       std::optional<std::string> variant, Payload payload = {});
    Payload read(const std::string& actor, const std::string& id) const;
    void update(const std::string& actor, const std::string& id, const Payload& patch);
    void destroy(const std::string& actor, int step, const std::string& id);
    void archive(const std::string& actor, int step, const std::string& id);

    // Engine-internal token moves; not capability operations.
    std::string seed(const std::string& type, std::optional<std::string> variant,
                     int step);
    void consume(const std::string& id);
    void archive_consumed(int step);  // end-of-step sweep

    const ObjectInstance* find(const std::string& id) const;
    std::vector<const ObjectInstance*> available() const;
    const std::vector<ObjectInstance>& instances() const { return instances_; }
    const std::vector<ArchiveEntry>& archive_log() const { return archive_; }

    ObjectStore snapshot() const { return *this; }

    friend bool operator==(const ObjectStore&, const ObjectStore&) = default;

  private:
    ObjectInstance& require(const std::string& id);
    ObjectInstance& require_available(const std::string& id);
    void guard(const std::string& actor, Capability op) const;
    std::string add_instance(const std::string& producer, int step,
                             const std::string& type,
                             std::optional<std::string> variant, Payload payload);

    std::vector<ObjectInstance> instances_;  // creation order
    std::vector<ArchiveEntry> archive_;      // append-only
    std::map<std::string, std::set<Capability>> actor_caps_;
    int next_seq_ = 1;
};

// Uniform surface over the typed operations: CREATE takes a NewInstance,
// the others an instance id.
struct NewInstance {
    std::string type;
    std::optional<std::string> variant;
    Payload payload;
};

using OperationTarget = std::variant<std::string, NewInstance>;

struct OperationOutcome {
    std::string instance_id;
    std::optional<Payload> value;  // set for READ
};

OperationOutcome apply_operation(ObjectStore& store, const std::string& actor,
                                 Capability op, const OperationTarget& target,
                                 int step);

}  // namespace abp
