#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rorscan/remote.hpp"
#include "rorscan/verifier.hpp"

namespace rorscan {

struct RunConfig {
    Address target;
    std::string snapshot_path;
    std::optional<std::string> builders_path;
    std::optional<std::string> rpc_url;
    std::size_t max_txs{1000};        // latest transactions replayed per contract
    std::size_t txs_per_entry{300};   // historical seeds per entry function
    std::uint64_t budget{5000};       // verify calls per run
    std::uint64_t seed{1};
    bool boundary_on{true};           // off = empty builder set, all contracts unsafe
    bool fund_fuzz{true};
    bool input_fuzz{true};
    bool analyze_only{false};
    std::string format{"text"};       // text | json
    std::optional<std::string> trace_out;
    std::optional<std::string> graph_out;
    std::optional<std::string> fuzz_log;
};

struct RankedFn {
    UsageStats stats;
    std::string dapp;
    bool is_view{false};
};

struct StageTimings {
    double boundary_ms{0};
    double collect_ms{0};
    double analysis_ms{0};
    double verify_ms{0};
};

struct Report {
    static constexpr int schema_version = 1;

    RunConfig config;
    std::string target_dapp;
    std::size_t txs_replayed{0};
    std::size_t reverted{0};
    std::vector<RankedFn> ranking;
    std::vector<CandidateEntry> candidates;
    std::vector<RorFinding> findings;
    CampaignStats campaign;
    StageTimings timings;  // rendered in text output only; varies run to run
};

namespace pipeline_detail {

inline double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

inline std::unique_ptr<std::ofstream> open_sink(const std::optional<std::string>& path,
                                                const char* what) {
    if (!path) return nullptr;
    auto out = std::make_unique<std::ofstream>(*path);
    if (!*out) throw Error(std::string("cannot open ") + what + " file " + *path);
    return out;
}

}  // namespace pipeline_detail

/// Runs the four detection stages against an already constructed store:
/// boundary identification, contextual data collection, cross-application
/// static analysis, and reentrancy verification.
inline Report run_pipeline_on(const ChainStore& base_store, const RunConfig& config) {
    using pipeline_detail::ms_since;
    using pipeline_detail::open_sink;

    CachedStore store(base_store);
    Report report;
    report.config = config;

    // Stage 1: application boundaries.
    auto t0 = std::chrono::steady_clock::now();
    std::vector<BuilderEntry> builders;
    if (config.boundary_on) {
        builders = config.builders_path ? load_builders(*config.builders_path)
                                        : store.builders();
    }
    BoundaryResolver boundaries(store, std::move(builders));
    if (!store.is_contract(config.target))
        throw LookupError("target " + config.target.to_hex() + " is not a contract in this store");
    report.target_dapp = boundaries.resolve(config.target).label();
    report.timings.boundary_ms = ms_since(t0);

    // Stage 2: contextual data collection via replay.
    t0 = std::chrono::steady_clock::now();
    auto trace_sink = open_sink(config.trace_out, "trace-out");
    ContextDataset ds = collect_contextual_data(store, boundaries, config.target,
                                                config.max_txs, trace_sink.get());
    report.txs_replayed = ds.traces.size();
    report.reverted = ds.reverted_count;
    report.timings.collect_ms = ms_since(t0);

    // Stage 3: cross-application static analysis.
    t0 = std::chrono::steady_clock::now();
    std::vector<ManipulableFn> manipulable = find_manipulable_functions(store, boundaries, ds);
    std::vector<FnRef> fn_refs;
    for (const auto& m : manipulable) fn_refs.push_back(m.fn);
    std::vector<UsageStats> ranked = rank_manipulable(store, ds, fn_refs);
    for (const auto& s : ranked) {
        RankedFn rf;
        rf.stats = s;
        rf.dapp = boundaries.resolve(s.fn.contract).label();
        for (const auto& m : manipulable)
            if (m.fn == s.fn) rf.is_view = m.is_view;
        report.ranking.push_back(std::move(rf));
    }

    auto graph_sink = open_sink(config.graph_out, "graph-out");
    if (graph_sink) write_inter_dapp_flow_dot(*graph_sink, boundaries, ds);

    for (const auto& s : ranked) {
        const ManipulableFn* m = nullptr;
        for (const auto& cand : manipulable)
            if (cand.fn == s.fn) m = &cand;
        if (!m) continue;
        // The manipulable function's application: all contracts resolving to
        // the same known label, or just the contract itself when unknown.
        std::vector<const ContractEntry*> dapp_contracts;
        for (const auto& addr : store.contract_addresses()) {
            bool in_dapp = addr == m->fn.contract ||
                           boundaries.same_dapp(m->fn.contract, addr) == DAppVerdict::Same;
            if (in_dapp) dapp_contracts.push_back(store.contract(addr));
        }
        IntraDAppGraph graph = build_intra_dapp_graph(dapp_contracts, m->fn, m->dapp.label());
        if (graph_sink) write_intra_dapp_dot(*graph_sink, graph);
        for (auto& cand : candidate_entries(store, graph, *m, s.importance()))
            report.candidates.push_back(std::move(cand));
    }
    report.timings.analysis_ms = ms_since(t0);

    // Stage 4: verification by multi-function fuzzing.
    t0 = std::chrono::steady_clock::now();
    if (!config.analyze_only) {
        auto fuzz_sink = open_sink(config.fuzz_log, "fuzz-log");
        CampaignConfig cc;
        cc.txs_per_entry = config.txs_per_entry;
        cc.budget = config.budget;
        cc.seed = config.seed;
        cc.toggles = MutationToggles{config.fund_fuzz, config.input_fuzz};
        report.findings = run_campaign(store, boundaries, report.candidates, cc,
                                       &report.campaign, fuzz_sink.get());
    }
    report.timings.verify_ms = ms_since(t0);
    return report;
}

/// Loads the configured data source (snapshot file, or remote endpoint when
/// --rpc-url is given) and runs the pipeline.
inline Report run_pipeline(const RunConfig& config) {
    if (config.rpc_url) {
        RemoteStore remote(*config.rpc_url);
        return run_pipeline_on(remote, config);
    }
    if (config.snapshot_path.empty())
        throw Error("no data source: provide --snapshot or --rpc-url");
    ChainSnapshot snapshot = load_snapshot(config.snapshot_path);
    SnapshotStore store(snapshot);
    return run_pipeline_on(store, config);
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace pipeline_detail {

inline nlohmann::ordered_json fn_json(const FnRef& fn) {
    return {{"address", fn.contract.to_hex()}, {"function", fn.name}};
}

inline nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["target"] = c.target.to_hex();
    j["snapshot"] = c.snapshot_path;
    j["builders"] = c.builders_path ? json(*c.builders_path) : json();
    j["rpc_url"] = c.rpc_url ? json(*c.rpc_url) : json();
    j["max_txs"] = c.max_txs;
    j["txs_per_entry"] = c.txs_per_entry;
    j["budget"] = c.budget;
    j["seed"] = c.seed;
    j["boundary_mode"] = c.boundary_on ? "on" : "off";
    j["fund_fuzz"] = c.fund_fuzz;
    j["input_fuzz"] = c.input_fuzz;
    j["analyze_only"] = c.analyze_only;
    j["format"] = c.format;
    j["trace_out"] = c.trace_out ? json(*c.trace_out) : json();
    j["graph_out"] = c.graph_out ? json(*c.graph_out) : json();
    j["fuzz_log"] = c.fuzz_log ? json(*c.fuzz_log) : json();
    return j;
}

inline nlohmann::ordered_json finding_json(const RorFinding& f) {
    nlohmann::ordered_json j;
    j["entry_fn"] = fn_json(f.entry_fn);
    j["entry_fn"]["dapp"] = f.entry_dapp;
    j["victim_fn"] = fn_json(f.victim_fn);
    j["victim_fn"]["dapp"] = f.victim_dapp;
    j["manipulable_fn"] = fn_json(f.manipulable_fn);
    j["manipulable_fn"]["dapp"] = f.manipulable_dapp;
    j["manipulable_fn"]["view"] = f.manipulable_is_view;
    j["hijack_site"] = {{"contract", f.hijack_site.contract.to_hex()},
                        {"function", f.hijack_site.function},
                        {"statement", f.hijack_site.ordinal}};
    j["overlap_slots"] = nlohmann::ordered_json::array();
    for (const auto& s : f.overlap_slots) {
        nlohmann::ordered_json slot;
        slot["address"] = s.contract.to_hex();
        slot["slot"] = u256_to_hex(s.slot);
        slot["var"] = s.var;
        if (s.key) slot["key"] = u256_to_hex(*s.key);
        j["overlap_slots"].push_back(slot);
    }
    const FuzzCase& w = f.witness_entry_tx;
    j["witness_entry_tx"] = {
        {"hash", w.tx.hash.to_hex()},
        {"sender", w.tx.sender.to_hex()},
        {"to", w.tx.to.to_hex()},
        {"value", u256_to_hex(w.tx.value)},
        {"calldata", calldata_to_hex(w.tx.calldata)},
        {"lineage", w.synthesized ? "synthesized" : "historical"},
        {"seed_tx", w.seed_tx ? json(w.seed_tx->to_hex()) : json()},
        {"mutation", w.mutation.label.empty() ? "none" : w.mutation.label},
        {"rng_draws", w.rng_draws},
    };
    j["witness_victim_tx"] = f.witness_victim_tx.to_hex();
    j["narrative"] = f.narrative;
    return j;
}

}  // namespace pipeline_detail

/// Stable machine-readable rendering. Key order is fixed and timings are
/// omitted, so identical runs (same snapshot, config and seed) render to
/// identical bytes.
inline std::string render_report_json(const Report& report) {
    using pipeline_detail::config_json;
    using pipeline_detail::finding_json;
    using pipeline_detail::fn_json;
    nlohmann::ordered_json j;
    j["schema_version"] = Report::schema_version;
    j["config"] = config_json(report.config);
    j["target"] = {{"address", report.config.target.to_hex()}, {"dapp", report.target_dapp}};
    j["dataset"] = {{"transactions_replayed", report.txs_replayed},
                    {"reverted", report.reverted}};
    j["manipulable"] = nlohmann::ordered_json::array();
    for (const auto& r : report.ranking) {
        nlohmann::ordered_json m = fn_json(r.stats.fn);
        m["dapp"] = r.dapp;
        m["view"] = r.is_view;
        m["counts"] = {{"invoke", r.stats.c_invoke},
                       {"read", r.stats.c_read},
                       {"write", r.stats.c_write}};
        m["importance"] = r.stats.importance();
        j["manipulable"].push_back(m);
    }
    j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : report.candidates) {
        nlohmann::ordered_json cand;
        cand["entry"] = fn_json(c.entry_fn);
        cand["manipulable"] = fn_json(c.manipulable_fn);
        cand["shared_state"] = c.shared_state;
        cand["importance"] = c.importance;
        cand["origin_txs"] = nlohmann::ordered_json::array();
        for (const auto& h : c.origin_txs) cand["origin_txs"].push_back(h.to_hex());
        j["candidates"].push_back(cand);
    }
    j["findings"] = nlohmann::ordered_json::array();
    for (const auto& f : report.findings) j["findings"].push_back(finding_json(f));
    j["campaign"] = {{"verify_calls", report.campaign.verify_calls},
                     {"cases_built", report.campaign.cases_built},
                     {"budget_exhausted", report.campaign.budget_exhausted}};
    return j.dump(2) + "\n";
}

/// Human rendering: summary tables plus one attack narrative per finding,
/// in attack order (entry call, control transfer, reentry, stale read,
/// post-hoc update).
inline std::string render_report_text(const Report& report) {
    std::ostringstream os;
    os << "read-only reentrancy scan of " << report.config.target.to_hex() << " ("
       << report.target_dapp << ")\n";
    os << "  boundary mode " << (report.config.boundary_on ? "on" : "off") << ", seed "
       << report.config.seed << ", budget " << report.config.budget << "\n\n";

    os << "dataset: " << report.txs_replayed << " transactions replayed, " << report.reverted
       << " reverted\n\n";

    os << "manipulable functions (by importance):\n";
    if (report.ranking.empty()) os << "  none\n";
    for (const auto& r : report.ranking) {
        os << "  " << r.stats.importance() << "  " << r.stats.fn.to_string() << " [" << r.dapp
           << "]" << (r.is_view ? " view" : "") << "  invoke=" << r.stats.c_invoke
           << " read=" << r.stats.c_read << " write=" << r.stats.c_write << "\n";
    }
    os << "\ncandidate entry functions:\n";
    if (report.candidates.empty()) os << "  none\n";
    for (const auto& c : report.candidates) {
        os << "  " << c.entry_fn.to_string() << " <- " << c.manipulable_fn.name << " via {";
        bool first = true;
        for (const auto& v : c.shared_state) {
            if (!first) os << ", ";
            os << v;
            first = false;
        }
        os << "} importance " << c.importance << "\n";
    }

    os << "\nfindings: " << report.findings.size() << "\n";
    std::size_t n = 1;
    for (const auto& f : report.findings) {
        os << "\n[" << n++ << "] entry " << f.entry_fn.name << " (" << f.entry_dapp
           << ") -> victim " << f.victim_fn.name << " (" << f.victim_dapp
           << "), manipulable " << f.manipulable_fn.name
           << (f.manipulable_is_view ? " [view]" : "") << "\n";
        for (std::size_t i = 0; i < f.narrative.size(); ++i)
            os << "    " << (i + 1) << ". " << f.narrative[i] << "\n";
    }

    if (!report.config.analyze_only)
        os << "\ncampaign: " << report.campaign.verify_calls << " verify calls over "
           << report.campaign.cases_built << " cases"
           << (report.campaign.budget_exhausted ? " (budget exhausted)" : "") << "\n";

    os << "\ntimings: boundary " << report.timings.boundary_ms << " ms, collect "
       << report.timings.collect_ms << " ms, analysis " << report.timings.analysis_ms
       << " ms, verify " << report.timings.verify_ms << " ms\n";
    return os.str();
}

inline std::string render_report(const Report& report, const std::string& format) {
    if (format == "json") return render_report_json(report);
    return render_report_text(report);
}

}  // namespace rorscan
