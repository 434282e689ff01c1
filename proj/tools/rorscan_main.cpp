// rorscan command line: scans a contract for read-only reentrancy against an
// offline chain snapshot (or a remote endpoint) and reports confirmed paths.
//
// Exit codes: 0 clean run with no findings, 2 findings present, 1 error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rorscan/rorscan.hpp"

namespace {

struct DetectArgs {
    std::string snapshot;
    std::string target;
    std::string builders;
    std::string rpc_url;
    std::size_t max_txs = 1000;
    std::size_t txs_per_entry = 300;
    std::uint64_t budget = 5000;
    std::uint64_t seed = 1;
    std::string boundary_mode = "on";
    bool no_fund_fuzz = false;
    bool no_input_fuzz = false;
    bool analyze_only = false;
    std::string format = "text";
    std::string trace_out;
    std::string graph_out;
    std::string fuzz_log;
};

int run_detect(const DetectArgs& args) {
    rorscan::RunConfig config;
    config.target = rorscan::Address::from_hex(args.target);
    config.snapshot_path = args.snapshot;
    if (!args.builders.empty()) config.builders_path = args.builders;
    if (!args.rpc_url.empty()) config.rpc_url = args.rpc_url;
    config.max_txs = args.max_txs;
    config.txs_per_entry = args.txs_per_entry;
    config.budget = args.budget;
    config.seed = args.seed;
    config.boundary_on = args.boundary_mode != "off";
    config.fund_fuzz = !args.no_fund_fuzz;
    config.input_fuzz = !args.no_input_fuzz;
    config.analyze_only = args.analyze_only;
    config.format = args.format;
    if (!args.trace_out.empty()) config.trace_out = args.trace_out;
    if (!args.graph_out.empty()) config.graph_out = args.graph_out;
    if (!args.fuzz_log.empty()) config.fuzz_log = args.fuzz_log;

    rorscan::Report report = rorscan::run_pipeline(config);
    std::cout << rorscan::render_report(report, config.format);
    return report.findings.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"read-only reentrancy scanner for contract snapshots"};
    app.require_subcommand(1);

    DetectArgs args;
    CLI::App* detect = app.add_subcommand("detect", "scan one contract for read-only reentrancy");
    detect->add_option("--snapshot", args.snapshot, "chain snapshot file (JSON)");
    detect->add_option("--target", args.target, "contract address to scan (0x hex)")->required();
    detect->add_option("--builders", args.builders, "standalone builder dataset file");
    detect->add_option("--rpc-url", args.rpc_url, "remote chain endpoint instead of a snapshot");
    detect->add_option("--max-txs", args.max_txs, "latest transactions replayed per contract");
    detect->add_option("--txs-per-entry", args.txs_per_entry,
                       "historical seeds per entry function");
    detect->add_option("--budget", args.budget, "verification budget (verify calls)");
    detect->add_option("--seed", args.seed, "rng seed for mutation");
    detect->add_option("--boundary-mode", args.boundary_mode, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    detect->add_flag("--no-fund-fuzz", args.no_fund_fuzz, "disable fund mutation");
    detect->add_flag("--no-input-fuzz", args.no_input_fuzz, "disable input mutation");
    detect->add_flag("--analyze-only", args.analyze_only, "stop after static analysis");
    detect->add_option("--format", args.format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    detect->add_option("--trace-out", args.trace_out, "write replayed traces as JSON lines");
    detect->add_option("--graph-out", args.graph_out, "write dependency graphs as DOT");
    detect->add_option("--fuzz-log", args.fuzz_log, "write one JSON line per fuzz case");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints usage or help
        return code == 0 ? 0 : 1;
    }

    try {
        if (detect->parsed()) return run_detect(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
