#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "abp/goal_graph.hpp"
#include "abp/model.hpp"

namespace abp {

struct UnknownCodeError : AbpError {
    using AbpError::AbpError;
};

enum class FindingCode {
    DeadAgent,          // E-DEAD-AGENT
    RedundantObject,    // W-REDUNDANT-OBJECT
    Cycle,              // E-CYCLE
    GoalMismatch,       // E-GOAL-MISMATCH
    UnreachableEnd,     // E-UNREACHABLE-END
    Covering,           // E-COVERING
    CoveringSlack,      // W-COVERING-SLACK
    SplitInconsistent,  // W-SPLIT-INCONSISTENT
    PhysicalNoRecord,   // W-PHYSICAL-NO-RECORD
    AmbiguousTrigger,   // E-AMBIGUOUS-TRIGGER
};

enum class Severity { Error, Warning };

std::string to_string(FindingCode code);
Severity severity_of(FindingCode code);

struct Finding {
    FindingCode code;
    Severity severity;
    std::string subject;  // agent, object, goal or capability id
    std::string message;
    std::vector<std::string> related;

    friend bool operator==(const Finding&, const Finding&) = default;
};

enum class Verdict { Valid, ValidWithWarnings, Invalid };

std::string to_string(Verdict v);

struct ValidationReport {
    std::string spec_name;
    std::vector<Finding> findings;  // sorted by (severity, code, subject)
    Verdict verdict = Verdict::Valid;

    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

// Runs the full check catalog. All problems are findings; the verdict is
// invalid iff an error-severity finding exists.
ValidationReport validate_spec(const AbpSpec& spec, const GoalGraph& graph);

// Fixed explanation paragraph for a finding code string such as
// "E-DEAD-AGENT". Throws UnknownCodeError for unknown codes.
std::string explain_finding(std::string_view code);

}  // namespace abp
