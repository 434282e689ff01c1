#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "rorscan/analysis.hpp"
#include "rorscan/store.hpp"
#include "rorscan/vm.hpp"
#include "fixture_path.hpp"

namespace testutil {

using namespace rorscan;

inline json fixture_json(const std::string& name) {
    std::ifstream in(fixture(name));
    if (!in) throw std::runtime_error("missing fixture " + name);
    return json::parse(in);
}

// oracle-vault scenario cast
inline const Address kPool = Address::from_hex("0x1000000000000000000000000000000000000001");
inline const Address kOracle = Address::from_hex("0x1000000000000000000000000000000000000002");
inline const Address kVault = Address::from_hex("0x2000000000000000000000000000000000000001");
inline const Address kAlice = Address::from_hex("0xa11ce00000000000000000000000000000000001");
inline const Address kAsset = Address::from_hex("0xaaaa000000000000000000000000000000000001");

// join-pool refund scenario cast
inline const Address kPeriphery = Address::from_hex("0x3000000000000000000000000000000000000001");
inline const Address kVault8 = Address::from_hex("0x4000000000000000000000000000000000000001");
inline const Address kCarol = Address::from_hex("0xcaa0000000000000000000000000000000000001");

inline Hash32 test_hash(std::uint64_t n) {
    Hash32 h;
    for (int i = 0; i < 8; ++i) h.bytes[31 - i] = (std::uint8_t)(n >> (8 * i));
    h.bytes[0] = 0x7e;  // test-local namespace, clear of fixture hashes
    return h;
}

/// Builds a transaction against a snapshot contract, encoding arguments
/// through the target function's ABI.
inline TransactionRecord make_tx(const ChainSnapshot& snap, std::uint64_t salt,
                                 const Address& sender, const Address& to,
                                 const std::string& fn_name, std::vector<U256> words = {},
                                 U256 value = U256{}) {
    const ContractEntry& ce = snap.contracts.at(to);
    const FunctionDef* fn = ce.ir.find_function(fn_name);
    if (!fn) throw std::runtime_error("no function " + fn_name);
    std::vector<ArgValue> args;
    for (const auto& w : words) {
        ArgValue a;
        a.word = w;
        args.push_back(a);
    }
    TransactionRecord tx;
    tx.hash = test_hash(salt);
    tx.sender = sender;
    tx.to = to;
    tx.value = value;
    tx.calldata = encode_calldata(*fn, args);
    tx.block_number = 1000 + salt;
    tx.timestamp = 100000 + salt;
    return tx;
}

inline std::string serialize_trace(const ExecutionTrace& trace) {
    std::ostringstream os;
    for (const auto& r : trace.records) os << record_to_json(r).dump() << "\n";
    os << (trace.outcome.success ? "success" : "revert:" + trace.outcome.revert_reason);
    if (trace.outcome.return_value) os << " ret=" << u256_to_hex(*trace.outcome.return_value);
    os << "\n";
    for (const auto& [k, v] : trace.state_overlay)
        os << k.contract.to_hex() << ":" << u256_to_hex(k.slot) << "=" << u256_to_hex(v) << "\n";
    for (const auto& [a, v] : trace.balance_overlay)
        os << a.to_hex() << "~" << u256_to_hex(v) << "\n";
    for (const auto& h : trace.hijack_points)
        os << "hijack@" << h.seq << " " << h.site.function << "#" << h.site.ordinal << "->"
           << h.recipient.to_hex() << "\n";
    return os.str();
}

/// Mirrors the pipeline's analysis stage: manipulable discovery, ranking,
/// per-application graphs, candidate derivation.
inline std::vector<CandidateEntry> derive_candidates(const ChainStore& store,
                                                     const BoundaryResolver& boundaries,
                                                     const ContextDataset& ds) {
    auto manipulable = find_manipulable_functions(store, boundaries, ds);
    std::vector<FnRef> refs;
    for (const auto& m : manipulable) refs.push_back(m.fn);
    auto ranked = rank_manipulable(store, ds, refs);

    std::vector<CandidateEntry> out;
    for (const auto& stats : ranked) {
        const ManipulableFn* m = nullptr;
        for (const auto& cand : manipulable)
            if (cand.fn == stats.fn) m = &cand;
        if (!m) throw std::runtime_error("ranked function missing from manipulable set");
        std::vector<const ContractEntry*> dapp_contracts;
        for (const auto& addr : store.contract_addresses()) {
            if (addr == m->fn.contract ||
                boundaries.same_dapp(m->fn.contract, addr) == DAppVerdict::Same)
                dapp_contracts.push_back(store.contract(addr));
        }
        IntraDAppGraph g = build_intra_dapp_graph(dapp_contracts, m->fn, m->dapp.label());
        for (auto& c : candidate_entries(store, g, *m, stats.importance()))
            out.push_back(std::move(c));
    }
    return out;
}

/// Records of one trace matching an operation, as (frame fn, var/callee) pairs.
inline int count_records(const ExecutionTrace& trace, TraceOp op) {
    int n = 0;
    for (const auto& r : trace.records)
        if (r.op == op) ++n;
    return n;
}

inline bool has_invoke(const ExecutionTrace& trace, const Address& callee,
                       const std::string& fn) {
    for (const auto& r : trace.records)
        if (r.op == TraceOp::Invoke && r.invoke.callee == callee && r.invoke.callee_fn &&
            *r.invoke.callee_fn == fn)
            return true;
    return false;
}

inline bool has_read(const ExecutionTrace& trace, const Address& target,
                     const std::string& var) {
    for (const auto& r : trace.records)
        if (r.op == TraceOp::Read && r.target == target && r.slot.var == var) return true;
    return false;
}

}  // namespace testutil
