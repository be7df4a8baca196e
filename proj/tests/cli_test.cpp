#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "abp/cli.hpp"
#include "abp/engine.hpp"
#include "abp/export.hpp"
#include "abp/spec_io.hpp"

#include "support/fixtures.hpp"

using namespace abp;
using namespace abp::test;

namespace {

struct CliRun {
    int exit_code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempFile {
    std::string path;

    explicit TempFile(const std::string& name, const std::string& content = "") {
        path = std::string("/tmp/abp_cli_test_") + name;
        if (!content.empty()) {
            std::ofstream file(path, std::ios::binary);
            file << content;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("validate: exit codes follow the verdict") {
    CliRun valid = cli({"validate", fixture_path("pizza.abp.json")});
    CHECK(valid.exit_code == 0);
    CHECK(valid.out.find("verdict: valid") != std::string::npos);
    CHECK(valid.err.empty());

    CliRun invalid = cli({"validate", fixture_path("broken-dead-agent.abp.json")});
    CHECK(invalid.exit_code == 2);
    CHECK(invalid.out.find("E-DEAD-AGENT") != std::string::npos);

    AbpSpec warned = pizza_spec();
    warned.capabilities.insert(Capability::Archive);  // slack: declared, unused
    TempFile file("warned.json", serialize_spec(warned));
    CliRun warnings = cli({"validate", file.path});
    CHECK(warnings.exit_code == 1);
    CHECK(warnings.out.find("W-COVERING-SLACK") != std::string::npos);
}

TEST_CASE("validate --json emits the report shape") {
    CliRun run = cli({"validate", fixture_path("pizza.abp.json"), "--json"});
    CHECK(run.exit_code == 0);
    auto doc = nlohmann::json::parse(run.out);
    CHECK(doc["verdict"] == "valid");
    CHECK(doc["findings"].empty());
}

TEST_CASE("missing and malformed files exit 3") {
    CliRun missing = cli({"validate", "/tmp/abp_no_such_file.json"});
    CHECK(missing.exit_code == 3);
    CHECK(missing.out.empty());
    CHECK(!missing.err.empty());

    TempFile bad("bad.json", "{ not json");
    CliRun malformed = cli({"graph", bad.path});
    CHECK(malformed.exit_code == 3);
    CHECK(malformed.err.find("SyntaxError") != std::string::npos);
}

TEST_CASE("graph: precedence listing and dot output") {
    CliRun listing = cli({"graph", fixture_path("pizza.abp.json")});
    CHECK(listing.exit_code == 0);
    CHECK(listing.out.find("Start -> AcquireOrder\n") != std::string::npos);
    CHECK(listing.out.find("KitchenAlerted -> CookedPizza\n") != std::string::npos);

    CliRun closure = cli({"graph", fixture_path("pizza.abp.json"), "--closure"});
    CHECK(closure.out.find("AcquireOrder -> PizzaDelivered\n") != std::string::npos);

    CliRun dot = cli({"graph", fixture_path("pizza.abp.json"), "--dot", "-"});
    CHECK(dot.out.find("digraph") != std::string::npos);
    CHECK(dot.out.find("[label=\"a3 [OK]\"]") != std::string::npos);

    TempFile out_file("graph.dot");
    CliRun to_file =
        cli({"graph", fixture_path("pizza.abp.json"), "--dot", out_file.path});
    CHECK(to_file.exit_code == 0);
    CHECK(read_file(out_file.path).find("digraph") != std::string::npos);
}

TEST_CASE("simulate: seeded run writes a loadable trace") {
    TempFile trace_file("run.jsonl");
    CliRun run = cli({"simulate", fixture_path("pizza.abp.json"), "--seed", "7",
                      "--trace", trace_file.path});
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("status: completed") != std::string::npos);

    Trace trace = trace_from_jsonl(read_file(trace_file.path));
    CHECK(trace.header.seed == 7);
    CHECK(trace.status() == RunStatus::Completed);
}

TEST_CASE("simulate: scenario file scripts the run") {
    TempFile scenario("scenario.json",
                      R"([{"site": "agent:a1:checkedOrder", "pick": "KO"}])");
    CliRun run = cli({"simulate", fixture_path("pizza.abp.json"), "--scenario",
                      scenario.path});
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("fired: a1 a2\n") != std::string::npos);
    CHECK(run.out.find("customerNotice#") != std::string::npos);
}

TEST_CASE("simulate: step limit exits 1, invalid spec exits 2") {
    CliRun limited = cli({"simulate", fixture_path("pizza.abp.json"), "--seed",
                          "1", "--max-steps", "1"});
    CHECK(limited.exit_code == 1);
    CHECK(limited.out.find("status: step-limit") != std::string::npos);

    CliRun invalid =
        cli({"simulate", fixture_path("broken-dead-agent.abp.json")});
    CHECK(invalid.exit_code == 2);
    CHECK(!invalid.err.empty());

    CliRun forced = cli({"simulate", fixture_path("broken-dead-agent.abp.json"),
                         "--force", "--seed", "3"});
    CHECK(forced.exit_code == 2);  // deadlock
    CHECK(forced.out.find("status: deadlock") != std::string::npos);
}

TEST_CASE("enumerate prints both outcomes") {
    CliRun run = cli({"enumerate", fixture_path("pizza.abp.json")});
    CHECK(run.exit_code == 0);
    CHECK(run.out.find("total runs: 2\n") != std::string::npos);
    CHECK(run.out.find("customerNotice#") != std::string::npos);
    CHECK(run.out.find("fullfilledOrder#") != std::string::npos);
    CHECK(run.err.empty());
}

TEST_CASE("import-table mirrors the csv fixture") {
    TempFile out_file("imported.json");
    CliRun run = cli({"import-table", fixture_path("pizza.abp.csv"), "-o",
                      out_file.path});
    CHECK(run.exit_code == 0);

    AbpSpec imported = parse_or_die(read_file(out_file.path));
    CHECK(imported.agents.size() == 5);
    CHECK(imported.goals.size() == 5);

    CliRun validate_run = cli({"validate", out_file.path});
    CHECK(validate_run.exit_code == 0);
}

TEST_CASE("import-table rejects bad tables") {
    TempFile dup("dup.csv",
                 "Agent ID,Competences,Trigger objects,Final objects,Goal\n"
                 "a1,X,order,checkedOrder,G1\n"
                 "a1,Y,checkedOrder,notice,G2\n");
    CliRun duplicated = cli({"import-table", dup.path});
    CHECK(duplicated.exit_code == 2);
    CHECK(duplicated.err.find("DuplicateAgentId") != std::string::npos);

    TempFile bad("bad.csv", "Agent,Stuff\na1,x\n");
    CliRun malformed = cli({"import-table", bad.path});
    CHECK(malformed.exit_code == 3);
}

TEST_CASE("exactly one subcommand is required") {
    CliRun nothing = cli({});
    CHECK(nothing.exit_code == 3);
    CliRun unknown = cli({"frobnicate"});
    CHECK(unknown.exit_code == 3);
}

TEST_SUITE_END();
