#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "abp/model.hpp"

namespace abp {

// Parses the canonical .abp.json document. Resolution errors carry source
// positions: exact for document syntax errors, best-effort (first occurrence
// of the offending token) for reference errors.
AssembleResult parse_spec(const std::string& text);

// Deterministic canonical form: fixed key order, objects/goals/agents sorted
// by id, variant sets sorted. Byte-identical across runs for equal specs.
std::string serialize_spec(const AbpSpec& spec);

// One row of the tabular agent representation.
struct AgentTableRow {
    std::string agent_id;
    std::string competences;  // free text, not carried into the spec
    std::vector<std::string> trigger_objects;  // slash notation
    std::vector<std::string> final_objects;
    std::string goal;
};

struct ImportOptions {
    std::string name = "imported-process";
    std::set<Capability> default_capabilities{Capability::Create, Capability::Read};
    std::map<std::string, std::set<Capability>> agent_capabilities;
    std::map<std::string, ObjectKind> object_kinds;
    std::set<std::string> physical_objects;
};

// Synthesizes a full spec from the table alone: object types and variants
// from the slash notation, goals from the goal column (objects = union of
// the producing agents' finals), OS as trigger objects nobody produces, OE
// as final objects nobody consumes, split/merge per the default rules.
AssembleResult import_agent_table(const std::vector<AgentTableRow>& rows,
                                  const ImportOptions& options = {});

struct CsvResult {
    std::vector<AgentTableRow> rows;
    std::vector<SpecError> errors;

    bool ok() const { return errors.empty(); }
};

// Header "Agent ID,Competences,Trigger objects,Final objects,Goal";
// list cells separate refs with ';'.
CsvResult parse_agent_table_csv(const std::string& text);

// "objectId", "objectId/TAG" or "objectId/TAG1|TAG2".
std::optional<ObjectRef> parse_slash_ref(const std::string& text);

}  // namespace abp
