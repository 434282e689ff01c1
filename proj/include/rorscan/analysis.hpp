#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rorscan/vm.hpp"

namespace rorscan {

struct TraceEntry {
    TransactionRecord tx;  // origin transaction
    ExecutionTrace trace;
};

/// Replayed history of one victim contract with boundary labels attached.
struct ContextDataset {
    Address victim_contract;
    DAppIdentity victim_dapp;
    std::vector<TraceEntry> traces;
    std::size_t reverted_count{0};
};

/// Replays up to `limit` most recent transactions of the victim contract,
/// newest first, keeping every trace; reverted replays stay in, flagged via
/// their outcome. When `trace_sink` is set, each trace is appended to it as
/// line-delimited JSON: one header line per transaction, one record per line.
inline ContextDataset collect_contextual_data(const ChainStore& store,
                                              const BoundaryResolver& boundaries,
                                              const Address& victim, std::size_t limit,
                                              std::ostream* trace_sink = nullptr) {
    ContextDataset ds;
    ds.victim_contract = victim;
    ds.victim_dapp = boundaries.resolve(victim);
    for (const auto& tx : fetch_transactions_of(store, victim, limit)) {
        Executor vm(store, boundaries);
        ExecutionTrace trace = vm.replay(tx);
        if (!trace.outcome.success) ++ds.reverted_count;
        if (trace_sink) {
            nlohmann::json header;
            header["tx"] = tx.hash.to_hex();
            header["outcome"] = trace.outcome.success ? "success" : "revert";
            if (!trace.outcome.success) header["reason"] = trace.outcome.revert_reason;
            *trace_sink << header.dump() << "\n";
            for (const auto& r : trace.records) *trace_sink << record_to_json(r).dump() << "\n";
        }
        ds.traces.push_back(TraceEntry{tx, std::move(trace)});
    }
    return ds;
}

/// A function of another application observed in the victim's call chains.
struct ManipulableFn {
    FnRef fn;
    DAppIdentity dapp;
    bool is_view{false};
    std::vector<Hash32> origin_txs;  // transactions whose traces exposed it
};

namespace analysis_detail {

/// Rule-4 safety: a same-DApp callee counts as safe when its writes are
/// access-controlled. Pure views are openly callable and never safe here,
/// even though their (vacuous) access-control flag is true.
inline bool rule4_safe(const FunctionMeta& meta) {
    return meta.guarded_write && !meta.writes.empty();
}

inline std::optional<std::string> invoked_function_name(const ChainStore& store,
                                                        const ContextRecord& rec) {
    const ContractEntry* callee = store.contract(rec.invoke.callee);
    if (!callee) return std::nullopt;
    if (rec.invoke.selector) {
        const FunctionDef* fn = callee->ir.find_by_selector(*rec.invoke.selector);
        if (!fn) return std::nullopt;
        return fn->name;
    }
    // Native transfer: attribute to the recipient's fallback when it has one.
    const FunctionDef* fb = callee->ir.find_function("fallback");
    if (fb && fb->visibility == Visibility::Public) return fb->name;
    return std::nullopt;
}

}  // namespace analysis_detail

/// Functions of other applications appearing in the replayed call chains,
/// either as invoke targets or as frames of read/write records. Call-chain
/// subtrees under safe same-DApp callees (cross-contract pruning) are
/// excluded from discovery. Deterministic order: (contract, name).
inline std::vector<ManipulableFn> find_manipulable_functions(const ChainStore& store,
                                                             const BoundaryResolver& boundaries,
                                                             const ContextDataset& ds) {
    using analysis_detail::invoked_function_name;
    using analysis_detail::rule4_safe;

    std::map<FnRef, ManipulableFn> found;
    auto note = [&](const FnRef& fn, const Hash32& origin) {
        auto [it, inserted] = found.try_emplace(fn);
        if (inserted) {
            it->second.fn = fn;
            it->second.dapp = boundaries.resolve(fn.contract);
            const ContractEntry* ce = store.contract(fn.contract);
            const FunctionMeta* meta = ce ? ce->meta->try_of(fn.name) : nullptr;
            it->second.is_view = meta && meta->is_view;
        }
        if (it->second.origin_txs.empty() || !(it->second.origin_txs.back() == origin))
            it->second.origin_txs.push_back(origin);
    };

    for (const auto& entry : ds.traces) {
        bool skipping = false;
        int skip_depth = 0;
        for (const auto& rec : entry.trace.records) {
            if (skipping) {
                if (rec.depth > skip_depth) continue;
                skipping = false;
            }
            if (rec.op == TraceOp::Invoke) {
                auto fn_name = invoked_function_name(store, rec);
                if (!fn_name) continue;
                FnRef callee{rec.invoke.callee, *fn_name};
                if (callee.contract == ds.victim_contract) continue;  // never its own functions
                bool cross = boundaries.same_dapp(ds.victim_contract, callee.contract) ==
                             DAppVerdict::Different;
                if (cross) {
                    note(callee, entry.tx.hash);
                } else {
                    const ContractEntry* ce = store.contract(callee.contract);
                    const FunctionMeta* meta = ce ? ce->meta->try_of(callee.name) : nullptr;
                    if (meta && rule4_safe(*meta)) {
                        skipping = true;
                        skip_depth = rec.depth;
                    }
                }
            } else {
                if (rec.frame.contract != ds.victim_contract &&
                    boundaries.same_dapp(ds.victim_contract, rec.frame.contract) ==
                        DAppVerdict::Different)
                    note(rec.frame, entry.tx.hash);
            }
        }
    }

    std::vector<ManipulableFn> out;
    for (auto& [fn, m] : found) out.push_back(std::move(m));
    return out;
}

/// Usage counts of one function over a dataset. Importance is the plain sum
/// of invoke, read and write counts.
struct UsageStats {
    FnRef fn;
    std::uint64_t c_invoke{0};
    std::uint64_t c_read{0};
    std::uint64_t c_write{0};

    std::uint64_t importance() const { return c_invoke + c_read + c_write; }
};

/// Aggregates usage counts over all trace records: invokes count toward the
/// invoked function, reads and writes toward the frame they fired in.
/// Sorted by importance descending; ties break lexicographically on
/// (contract address, function name).
inline std::vector<UsageStats> rank_manipulable(const ChainStore& store,
                                                const ContextDataset& ds,
                                                const std::vector<FnRef>& fns) {
    std::map<FnRef, UsageStats> stats;
    for (const auto& fn : fns) stats[fn] = UsageStats{fn, 0, 0, 0};

    for (const auto& entry : ds.traces) {
        for (const auto& rec : entry.trace.records) {
            if (rec.op == TraceOp::Invoke) {
                auto fn_name = analysis_detail::invoked_function_name(store, rec);
                if (!fn_name) continue;
                auto it = stats.find(FnRef{rec.invoke.callee, *fn_name});
                if (it != stats.end()) ++it->second.c_invoke;
            } else {
                auto it = stats.find(rec.frame);
                if (it == stats.end()) continue;
                if (rec.op == TraceOp::Read)
                    ++it->second.c_read;
                else
                    ++it->second.c_write;
            }
        }
    }

    std::vector<UsageStats> out;
    for (const auto& [fn, s] : stats) out.push_back(s);
    std::stable_sort(out.begin(), out.end(), [](const UsageStats& a, const UsageStats& b) {
        if (a.importance() != b.importance()) return a.importance() > b.importance();
        return a.fn < b.fn;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Intra-DApp implicit-dependency graph
// ---------------------------------------------------------------------------

struct DepEdge {
    FnRef reader;
    FnRef writer;
    std::string var;

    friend bool operator==(const DepEdge&, const DepEdge&) = default;
    friend auto operator<=>(const DepEdge&, const DepEdge&) = default;
};

enum class PruneRule { AccessControl, NonReentrant, CrossContract };

inline const char* prune_rule_name(PruneRule r) {
    switch (r) {
        case PruneRule::AccessControl: return "access-control";
        case PruneRule::NonReentrant: return "non-reentrant";
        case PruneRule::CrossContract: return "cross-contract";
    }
    return "?";
}

struct PrunedEdge {
    DepEdge edge;
    PruneRule rule;
};

struct IntraDAppGraph {
    std::string dapp_label;
    std::optional<FnRef> anchor;  // the manipulable function, when given
    std::vector<FnRef> nodes;     // public functions of the DApp's contracts
    std::vector<DepEdge> edges;   // surviving implicit-dependency edges
    std::vector<PrunedEdge> pruned;
    std::vector<FnRef> safe_nodes;  // access-controlled state modifiers (rule 4)
};

/// Builds the implicit-dependency graph over the given contracts of one
/// application, one edge reader -> writer per shared state variable, then
/// prunes: edges whose writer's writes to that variable are access
/// controlled; edges whose reader and writer both carry the reentrancy
/// guard in one contract; and out-edges of functions marked safe by
/// cross-contract pruning.
inline IntraDAppGraph build_intra_dapp_graph(const std::vector<const ContractEntry*>& contracts,
                                             std::optional<FnRef> manipulable = std::nullopt,
                                             std::string dapp_label = {}) {
    using analysis_detail::rule4_safe;
    IntraDAppGraph g;
    g.dapp_label = std::move(dapp_label);
    g.anchor = manipulable;

    for (const ContractEntry* ce : contracts) {
        std::vector<const FunctionDef*> fns;
        for (const auto& fn : ce->ir.functions)
            if (fn.visibility == Visibility::Public) fns.push_back(&fn);
        std::sort(fns.begin(), fns.end(),
                  [](const FunctionDef* a, const FunctionDef* b) { return a->name < b->name; });

        for (const FunctionDef* fn : fns) {
            FnRef ref{ce->ir.address, fn->name};
            g.nodes.push_back(ref);
            if (rule4_safe(ce->meta->of(fn->name))) g.safe_nodes.push_back(ref);
        }

        for (const FunctionDef* reader : fns) {
            const FunctionMeta& rm = ce->meta->of(reader->name);
            for (const FunctionDef* writer : fns) {
                if (reader == writer) continue;
                const FunctionMeta& wm = ce->meta->of(writer->name);
                for (const auto& var : rm.reads) {
                    if (!wm.writes.count(var)) continue;
                    DepEdge edge{FnRef{ce->ir.address, reader->name},
                                 FnRef{ce->ir.address, writer->name}, var};
                    if (wm.write_guarded.at(var)) {
                        g.pruned.push_back({edge, PruneRule::AccessControl});
                    } else if (rm.non_reentrant && wm.non_reentrant) {
                        g.pruned.push_back({edge, PruneRule::NonReentrant});
                    } else if (rule4_safe(rm)) {
                        g.pruned.push_back({edge, PruneRule::CrossContract});
                    } else {
                        g.edges.push_back(edge);
                    }
                }
            }
        }
    }
    return g;
}

/// A potential entry function paired with the manipulable function whose
/// dependency edges exposed it.
struct CandidateEntry {
    FnRef entry_fn;
    FnRef manipulable_fn;
    std::set<std::string> shared_state;
    std::uint64_t importance{0};
    std::vector<Hash32> origin_txs;
    bool manipulable_is_view{false};
    std::string dapp_label;
};

/// Writers of surviving edges reachable from the manipulable anchor; only
/// public non-view writers qualify. Reachability follows edges transitively
/// (a reached writer's own reads can expose further writers).
inline std::vector<CandidateEntry> candidate_entries(const ChainStore& store,
                                                     const IntraDAppGraph& graph,
                                                     const ManipulableFn& manipulable,
                                                     std::uint64_t importance) {
    std::map<FnRef, std::set<std::string>> reached;  // writer -> shared vars
    std::set<FnRef> frontier{manipulable.fn};
    std::set<FnRef> visited{manipulable.fn};
    while (!frontier.empty()) {
        std::set<FnRef> next;
        for (const auto& edge : graph.edges) {
            if (!frontier.count(edge.reader)) continue;
            reached[edge.writer].insert(edge.var);
            if (visited.insert(edge.writer).second) next.insert(edge.writer);
        }
        frontier = std::move(next);
    }

    std::vector<CandidateEntry> out;
    for (const auto& [writer, vars] : reached) {
        if (writer == manipulable.fn) continue;
        const ContractEntry* ce = store.contract(writer.contract);
        if (!ce) continue;
        const FunctionDef* fn = ce->ir.find_function(writer.name);
        if (!fn || fn->visibility != Visibility::Public) continue;
        if (ce->meta->of(writer.name).is_view) continue;
        CandidateEntry cand;
        cand.entry_fn = writer;
        cand.manipulable_fn = manipulable.fn;
        cand.shared_state = vars;
        cand.importance = importance;
        cand.origin_txs = manipulable.origin_txs;
        cand.manipulable_is_view = manipulable.is_view;
        cand.dapp_label = graph.dapp_label;
        out.push_back(std::move(cand));
    }
    std::sort(out.begin(), out.end(), [](const CandidateEntry& a, const CandidateEntry& b) {
        return a.entry_fn < b.entry_fn;
    });
    return out;
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

inline void write_intra_dapp_dot(std::ostream& os, const IntraDAppGraph& g) {
    os << "digraph intra_dapp {\n";
    os << "  label=\"" << (g.dapp_label.empty() ? "unknown" : g.dapp_label) << "\";\n";
    auto node_id = [](const FnRef& f) {
        return "\"" + f.contract.to_hex().substr(2, 8) + ":" + f.name + "\"";
    };
    for (const auto& n : g.nodes) {
        os << "  " << node_id(n);
        bool safe = std::find(g.safe_nodes.begin(), g.safe_nodes.end(), n) != g.safe_nodes.end();
        bool anchored = g.anchor && *g.anchor == n;
        if (anchored)
            os << " [shape=doubleoctagon]";
        else if (safe)
            os << " [style=filled fillcolor=gray85]";
        os << ";\n";
    }
    for (const auto& e : g.edges)
        os << "  " << node_id(e.reader) << " -> " << node_id(e.writer) << " [label=\"" << e.var
           << "\"];\n";
    for (const auto& p : g.pruned)
        os << "  " << node_id(p.edge.reader) << " -> " << node_id(p.edge.writer)
           << " [style=dashed color=gray label=\"" << p.edge.var << " ("
           << prune_rule_name(p.rule) << ")\"];\n";
    os << "}\n";
}

/// Inter-application flow observed in a dataset: invoke edges between
/// contracts, grouped by resolved application and weighted by count.
inline void write_inter_dapp_flow_dot(std::ostream& os, const BoundaryResolver& boundaries,
                                      const ContextDataset& ds) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
    auto label_of = [&](const Address& a) {
        DAppIdentity id = boundaries.resolve(a);
        return id.known() ? *id.dapp_name : "unknown:" + a.to_hex().substr(2, 8);
    };
    for (const auto& entry : ds.traces)
        for (const auto& rec : entry.trace.records)
            if (rec.op == TraceOp::Invoke)
                ++edges[{label_of(rec.frame.contract), label_of(rec.invoke.callee)}];
    os << "digraph inter_dapp_flow {\n";
    for (const auto& [pair, count] : edges)
        os << "  \"" << pair.first << "\" -> \"" << pair.second << "\" [label=\"" << count
           << "\"];\n";
    os << "}\n";
}

}  // namespace rorscan
