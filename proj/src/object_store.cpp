#include "abp/object_store.hpp"

namespace abp {

std::string to_string(InstanceState s) {
    switch (s) {
        case InstanceState::Available: return "available";
        case InstanceState::Consumed: return "consumed";
        case InstanceState::Archived: return "archived";
        case InstanceState::Deleted: return "deleted";
    }
    return "?";
}

ObjectStore::ObjectStore(const AbpSpec& spec) {
    for (const auto& agent : spec.agents)
        actor_caps_[agent.id] = agent.capabilities;
}

void ObjectStore::guard(const std::string& actor, Capability op) const {
    auto it = actor_caps_.find(actor);
    if (it == actor_caps_.end() || !it->second.count(op))
        throw CapabilityViolation("agent '" + actor + "' lacks the " +
                                  to_string(op) + " capability");
}

ObjectInstance& ObjectStore::require(const std::string& id) {
    for (auto& instance : instances_)
        if (instance.id == id) return instance;
    throw UnknownInstanceError("unknown instance '" + id + "'");
}

ObjectInstance& ObjectStore::require_available(const std::string& id) {
    ObjectInstance& instance = require(id);
    if (instance.state != InstanceState::Available)
        throw NotAvailableError("instance '" + id + "' is " +
                                to_string(instance.state));
    return instance;
}

std::string ObjectStore::add_instance(const std::string& producer, int step,
                                      const std::string& type,
                                      std::optional<std::string> variant,
                                      Payload payload) {
    ObjectInstance instance;
    instance.id = type + "#" + std::to_string(next_seq_++);
    instance.type = type;
    instance.variant = std::move(variant);
    instance.payload = std::move(payload);
    instance.provenance = {producer, step};
    instances_.push_back(std::move(instance));
    return instances_.back().id;
}

std::string ObjectStore::create(const std::string& actor, int step,
                                const std::string& type,
                                std::optional<std::string> variant,
                                Payload payload) {
    guard(actor, Capability::Create);
    return add_instance(actor, step, type, std::move(variant), std::move(payload));
}

Payload ObjectStore::read(const std::string& actor, const std::string& id) const {
    guard(actor, Capability::Read);
    for (const auto& instance : instances_) {
        if (instance.id != id) continue;
        if (instance.state != InstanceState::Available)
            throw NotAvailableError("instance '" + id + "' is " +
                                    to_string(instance.state));
        return instance.payload;
    }
    throw UnknownInstanceError("unknown instance '" + id + "'");
}

void ObjectStore::update(const std::string& actor, const std::string& id,
                         const Payload& patch) {
    guard(actor, Capability::Update);
    ObjectInstance& instance = require_available(id);
    for (const auto& [key, value] : patch) instance.payload[key] = value;
}

void ObjectStore::destroy(const std::string& actor, int step, const std::string& id) {
    guard(actor, Capability::Delete);
    ObjectInstance& instance = require_available(id);
    instance.state = InstanceState::Deleted;
    archive_.push_back({step, instance, "deleted by " + actor});
}

void ObjectStore::archive(const std::string& actor, int step, const std::string& id) {
    guard(actor, Capability::Archive);
    ObjectInstance& instance = require_available(id);
    instance.state = InstanceState::Archived;
    archive_.push_back({step, instance, "archived by " + actor});
}

std::string ObjectStore::seed(const std::string& type,
                              std::optional<std::string> variant, int step) {
    return add_instance("start", step, type, std::move(variant), {});
}

void ObjectStore::consume(const std::string& id) {
    ObjectInstance& instance = require_available(id);
    instance.state = InstanceState::Consumed;
}

void ObjectStore::archive_consumed(int step) {
    for (auto& instance : instances_) {
        if (instance.state != InstanceState::Consumed) continue;
        instance.state = InstanceState::Archived;
        archive_.push_back({step, instance, "consumed"});
    }
}

const ObjectInstance* ObjectStore::find(const std::string& id) const {
    for (const auto& instance : instances_)
        if (instance.id == id) return &instance;
    return nullptr;
}

std::vector<const ObjectInstance*> ObjectStore::available() const {
    std::vector<const ObjectInstance*> out;
    for (const auto& instance : instances_)
        if (instance.state == InstanceState::Available) out.push_back(&instance);
    return out;
}

OperationOutcome apply_operation(ObjectStore& store, const std::string& actor,
                                 Capability op, const OperationTarget& target,
                                 int step) {
    if (op == Capability::Create) {
        const auto* spec = std::get_if<NewInstance>(&target);
        if (!spec) throw AbpError("CREATE needs a new-instance description");
        return {store.create(actor, step, spec->type, spec->variant, spec->payload),
                std::nullopt};
    }
    const auto* id = std::get_if<std::string>(&target);
    if (!id) throw AbpError(to_string(op) + " needs an instance id");
    switch (op) {
        case Capability::Read: return {*id, store.read(actor, *id)};
        case Capability::Update: store.update(actor, *id, {}); return {*id, {}};
        case Capability::Delete: store.destroy(actor, step, *id); return {*id, {}};
        case Capability::Archive: store.archive(actor, step, *id); return {*id, {}};
        default: throw AbpError("unhandled operation");
    }
}

}  // namespace abp
