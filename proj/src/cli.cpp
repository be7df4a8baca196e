#include "abp/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "abp/engine.hpp"
#include "abp/export.hpp"
#include "abp/goal_graph.hpp"
#include "abp/spec_io.hpp"
#include "abp/validator.hpp"

namespace abp {

namespace {

constexpr int exit_ok = 0;
constexpr int exit_warnings = 1;
constexpr int exit_invalid = 2;
constexpr int exit_io = 3;

std::optional<std::string> read_file(const std::string& path, std::ostream& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err << "cannot read '" << path << "'\n";
        return std::nullopt;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool write_file(const std::string& path, const std::string& content,
                std::ostream& err) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        err << "cannot write '" << path << "'\n";
        return false;
    }
    out << content;
    return true;
}

std::optional<AbpSpec> load_spec(const std::string& path, std::ostream& err) {
    auto text = read_file(path, err);
    if (!text) return std::nullopt;
    AssembleResult result = parse_spec(*text);
    if (!result.ok()) {
        for (const auto& error : result.errors) err << to_string(error) << "\n";
        return std::nullopt;
    }
    return std::move(result.spec);
}

std::optional<std::vector<Decision>> load_scenario(const std::string& path,
                                                   std::ostream& err) {
    auto text = read_file(path, err);
    if (!text) return std::nullopt;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::parse_error& ex) {
        err << "scenario: " << ex.what() << "\n";
        return std::nullopt;
    }
    if (!doc.is_array()) {
        err << "scenario must be a JSON array of {\"site\", \"pick\"}\n";
        return std::nullopt;
    }
    std::vector<Decision> decisions;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("site") || !entry.contains("pick")) {
            err << "scenario entries need \"site\" and \"pick\"\n";
            return std::nullopt;
        }
        Decision decision;
        decision.site = entry["site"].get<std::string>();
        if (entry["pick"].is_array()) {
            for (const auto& pick : entry["pick"])
                decision.pick.push_back(pick.get<std::string>());
        } else {
            decision.pick.push_back(entry["pick"].get<std::string>());
        }
        decisions.push_back(std::move(decision));
    }
    return decisions;
}

std::string describe_choices(const Trace& trace) {
    std::ostringstream out;
    bool first = true;
    for (const auto& decision : trace_choices(trace)) {
        if (!first) out << ", ";
        out << decision.site << "=";
        for (size_t i = 0; i < decision.pick.size(); ++i) {
            if (i) out << "+";
            out << decision.pick[i];
        }
        first = false;
    }
    return out.str();
}

int simulate_exit_code(RunStatus status) {
    switch (status) {
        case RunStatus::Completed: return exit_ok;
        case RunStatus::StepLimit: return exit_warnings;
        default: return exit_invalid;
    }
}

void print_run_summary(const Trace& trace, std::ostream& out) {
    out << "status: " << to_string(trace.status()) << "\n";
    std::ostringstream fired;
    for (const auto& event : trace.events)
        if (const auto* af = std::get_if<AgentFiredEvent>(&event))
            fired << " " << af->agent;
    out << "fired:" << fired.str() << "\n";
    std::string choices = describe_choices(trace);
    if (!choices.empty()) out << "choices: " << choices << "\n";
    for (const auto& event : trace.events) {
        if (const auto* done = std::get_if<CompletedEvent>(&event)) {
            out << "end:";
            for (const auto& id : done->end_instances) out << " " << id;
            out << "\n";
        }
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"agent-based process toolkit"};
    app.require_subcommand(1);

    std::string spec_path, dot_path, trace_path, scenario_path, csv_path, out_path;
    uint64_t seed = 0;
    int max_steps = 1000;
    bool closure = false, show_objects = false, as_json = false, force = false;

    auto* validate = app.add_subcommand("validate", "check a spec and print findings");
    validate->add_option("spec", spec_path)->required();
    validate->add_flag("--json", as_json, "machine-readable report");

    auto* graph_cmd = app.add_subcommand("graph", "derive the goal graph");
    graph_cmd->add_option("spec", spec_path)->required();
    graph_cmd->add_option("--dot", dot_path, "write DOT here ('-' for stdout)");
    graph_cmd->add_flag("--closure", closure, "print the transitive precedence");
    graph_cmd->add_flag("--show-objects", show_objects,
                        "render released objects as satellite boxes");

    auto* simulate = app.add_subcommand("simulate", "run one case");
    simulate->add_option("spec", spec_path)->required();
    auto* seed_opt =
        simulate->add_option("--seed", seed, "choice policy seed")->envname("ABP_SEED");
    auto* scenario_opt =
        simulate->add_option("--scenario", scenario_path, "scripted decision file");
    seed_opt->excludes(scenario_opt);
    simulate->add_option("--max-steps", max_steps);
    simulate->add_option("--trace", trace_path, "write the JSONL trace here");
    simulate->add_flag("--force", force, "run even if validation fails");

    auto* enumerate = app.add_subcommand("enumerate", "list all maximal runs");
    enumerate->add_option("spec", spec_path)->required();
    enumerate->add_option("--max-steps", max_steps);

    auto* import = app.add_subcommand("import-table", "synthesize a spec from a CSV table");
    import->add_option("csv", csv_path)->required();
    import->add_option("-o,--output", out_path, "write the spec here (default stdout)");

    std::vector<const char*> argv;
    argv.push_back("abp");
    for (const auto& arg : args) argv.push_back(arg.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) {  // --help
            out << app.help();
            return exit_ok;
        }
        err << ex.what() << "\n";
        return exit_io;
    }

    if (*validate) {
        auto spec = load_spec(spec_path, err);
        if (!spec) return exit_io;
        GoalGraph graph = build_goal_graph(*spec);
        ValidationReport report = validate_spec(*spec, graph);
        if (as_json)
            out << report_to_json(report).dump(2) << "\n";
        else
            out << report_to_table(report);
        switch (report.verdict) {
            case Verdict::Valid: return exit_ok;
            case Verdict::ValidWithWarnings: return exit_warnings;
            case Verdict::Invalid: return exit_invalid;
        }
    }

    if (*graph_cmd) {
        auto spec = load_spec(spec_path, err);
        if (!spec) return exit_io;
        GoalGraph graph = build_goal_graph(*spec);
        if (!dot_path.empty()) {
            DotOptions options;
            options.show_objects = show_objects;
            std::string dot = to_dot(graph, *spec, options);
            if (dot_path == "-") {
                out << dot;
            } else if (!write_file(dot_path, dot, err)) {
                return exit_io;
            }
        }
        if (dot_path.empty() || closure) {
            for (const auto& [from, to] : derive_precedence(graph, closure))
                out << from << " -> " << to << "\n";
        }
        return exit_ok;
    }

    if (*simulate) {
        auto spec = load_spec(spec_path, err);
        if (!spec) return exit_io;
        GoalGraph graph = build_goal_graph(*spec);
        ChoicePolicy policy = ChoicePolicy::seeded(seed);
        if (!scenario_path.empty()) {
            auto decisions = load_scenario(scenario_path, err);
            if (!decisions) return exit_io;
            policy = ChoicePolicy::scripted(std::move(*decisions));
        }
        try {
            ExecutionState state =
                init_state(*spec, graph, std::move(policy), max_steps, force);
            Trace trace = run(state);
            print_run_summary(trace, out);
            if (!trace_path.empty()) {
                std::string jsonl = trace_to_jsonl(trace);
                if (trace_path == "-") {
                    out << jsonl;
                } else if (!write_file(trace_path, jsonl, err)) {
                    return exit_io;
                }
            }
            return simulate_exit_code(trace.status());
        } catch (const AbpError& ex) {
            err << ex.what() << "\n";
            return exit_invalid;
        }
    }

    if (*enumerate) {
        auto spec = load_spec(spec_path, err);
        if (!spec) return exit_io;
        GoalGraph graph = build_goal_graph(*spec);
        try {
            EnumerationBounds bounds;
            bounds.max_steps = max_steps;
            std::vector<Trace> traces = enumerate_runs(*spec, graph, bounds);
            for (size_t i = 0; i < traces.size(); ++i) {
                out << "run " << (i + 1) << ": " << to_string(traces[i].status());
                std::string choices = describe_choices(traces[i]);
                if (!choices.empty()) out << " choices: " << choices;
                for (const auto& event : traces[i].events)
                    if (const auto* done = std::get_if<CompletedEvent>(&event)) {
                        out << " end:";
                        for (const auto& id : done->end_instances) out << " " << id;
                    }
                out << "\n";
            }
            out << "total runs: " << traces.size() << "\n";
            return exit_ok;
        } catch (const AbpError& ex) {
            err << ex.what() << "\n";
            return exit_invalid;
        }
    }

    if (*import) {
        auto text = read_file(csv_path, err);
        if (!text) return exit_io;
        CsvResult csv = parse_agent_table_csv(*text);
        if (!csv.ok()) {
            for (const auto& error : csv.errors) err << to_string(error) << "\n";
            return exit_io;
        }
        AssembleResult result = import_agent_table(csv.rows);
        if (!result.ok()) {
            for (const auto& error : result.errors) err << to_string(error) << "\n";
            return exit_invalid;
        }
        std::string document = serialize_spec(*result.spec);
        if (out_path.empty()) {
            out << document;
        } else if (!write_file(out_path, document, err)) {
            return exit_io;
        }
        return exit_ok;
    }

    return exit_io;
}

}  // namespace abp
