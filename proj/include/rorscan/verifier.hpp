#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "rorscan/analysis.hpp"

namespace rorscan {

/// Designated attacker address substituted into address parameters.
inline Address attacker_sentinel() {
    return Address::from_hex("0xbadbadbadbadbadbadbadbadbadbadbadbadbad0");
}

struct Mutation {
    enum class Kind { None, Fund, Input };
    Kind kind{Kind::None};
    std::string label;     // e.g. "fund:double", "input:2:sender"
    int param_index{-1};   // for input mutants
};

/// One candidate transaction for the entry function: a historical or
/// synthesized seed, possibly with one mutation applied.
struct FuzzCase {
    TransactionRecord tx;
    bool synthesized{false};
    std::optional<Hash32> seed_tx;  // the historical seed this derives from
    Mutation mutation;
    std::uint64_t rng_draws{0};  // random draws consumed building this case
    std::size_t index{0};        // position in the candidate list
};

/// Counting wrapper so each case can record how much randomness it used.
class DrawCounter {
  public:
    explicit DrawCounter(std::uint64_t seed) : engine_(seed) {}

    U256 random_word() {
        ++draws_;
        U256 w;
        for (auto& l : w.limb) l = engine_();
        return w;
    }

    std::size_t pick(std::size_t n) {
        ++draws_;
        return n == 0 ? 0 : (std::size_t)(engine_() % n);
    }

    std::uint64_t draws() const { return draws_; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t draws_{0};
};

struct MutationToggles {
    bool fund{true};
    bool input{true};
};

namespace verifier_detail {

inline constexpr std::size_t kMaxMutantsPerSeed = 32;

inline Hash32 synthetic_hash(const FnRef& fn, const Hash32& origin, std::uint64_t salt) {
    // Deterministic pseudo-hash for synthesized seeds; never collides with
    // fixture hashes in practice and never leaves the current run.
    Hash32 h;
    std::uint64_t acc = splitmix64(salt ^ 0x5eedf00dull);
    for (auto b : origin.bytes) acc = splitmix64(acc ^ b);
    for (auto b : fn.contract.bytes) acc = splitmix64(acc ^ b);
    for (char c : fn.name) acc = splitmix64(acc ^ (std::uint8_t)c);
    for (std::size_t i = 0; i < 32; ++i) {
        acc = splitmix64(acc);
        h.bytes[i] = (std::uint8_t)(acc & 0xff);
    }
    return h;
}

inline std::vector<ArgValue> decode_args_or_empty(const FunctionDef& fn, const Calldata& data) {
    try {
        return decode_calldata_args(fn, data);
    } catch (const ReplayError&) {
        return std::vector<ArgValue>(fn.params.size());
    }
}

}  // namespace verifier_detail

/// Builds the candidate transaction list for one entry function. Historical
/// transactions of the function seed the list when they exist (newest first,
/// up to `txs_per_entry`); otherwise one transaction is synthesized from the
/// ABI using the origin transaction's environment (same caller, block and
/// timestamp, zero-valued arguments). Each seed is then expanded:
///   funds, when payable: value in {0, v/2, 2v, 10v, random word};
///   inputs, per parameter: uint {0, 1, max, random}, address {origin
///   sender, zero, attacker sentinel, random known contract}, bool flipped;
/// capped at 32 mutants per seed. Mutations preserve type validity.
inline std::vector<FuzzCase> build_candidate_list(const ChainStore& store,
                                                  const CandidateEntry& candidate,
                                                  const TransactionRecord& tx_o,
                                                  std::size_t txs_per_entry,
                                                  const MutationToggles& toggles,
                                                  DrawCounter& rng) {
    const ContractEntry* ce = store.contract(candidate.entry_fn.contract);
    if (!ce) throw LookupError("unknown contract " + candidate.entry_fn.contract.to_hex());
    const FunctionDef* fn = ce->ir.find_function(candidate.entry_fn.name);
    if (!fn) throw LookupError("unknown entry function " + candidate.entry_fn.to_string());
    AbiSpec abi = abi_of(ce->ir, fn->name);

    std::vector<FuzzCase> cases;
    std::uint64_t draws_before = rng.draws();
    auto push_case = [&](TransactionRecord tx, bool synthesized,
                         std::optional<Hash32> seed_hash, Mutation m) {
        FuzzCase fc;
        fc.tx = std::move(tx);
        fc.synthesized = synthesized;
        fc.seed_tx = seed_hash;
        fc.mutation = std::move(m);
        fc.rng_draws = rng.draws() - draws_before;
        draws_before = rng.draws();
        fc.index = cases.size();
        cases.push_back(std::move(fc));
    };

    // Seeds: the function's own history, else one ABI-synthesized case.
    std::vector<TransactionRecord> seeds;
    for (const auto& tx : store.transactions_of(candidate.entry_fn.contract,
                                                std::numeric_limits<std::size_t>::max())) {
        auto sel = calldata_selector(tx.calldata);
        if (sel && *sel == fn->selector) seeds.push_back(tx);
        if (seeds.size() >= txs_per_entry) break;
    }
    if (seeds.empty()) {
        TransactionRecord tx;
        tx.hash = verifier_detail::synthetic_hash(candidate.entry_fn, tx_o.hash, 0);
        tx.sender = tx_o.sender;
        tx.to = candidate.entry_fn.contract;
        tx.block_number = tx_o.block_number;
        tx.timestamp = tx_o.timestamp;
        std::vector<ArgValue> zero_args(fn->params.size());
        tx.calldata = encode_calldata(*fn, zero_args);
        push_case(std::move(tx), true, std::nullopt, Mutation{});
        seeds.push_back(cases.back().tx);
    } else {
        for (const auto& s : seeds) push_case(s, false, s.hash, Mutation{});
    }

    // Mutants, grouped per seed, appended after all seeds.
    std::uint64_t salt = 1;
    for (const auto& seed : seeds) {
        std::size_t produced = 0;
        auto derive = [&](Mutation m, auto&& change) {
            if (produced >= verifier_detail::kMaxMutantsPerSeed) return;
            TransactionRecord tx = seed;
            change(tx);
            tx.hash = verifier_detail::synthetic_hash(candidate.entry_fn, seed.hash, salt++);
            push_case(std::move(tx), false, seed.hash, std::move(m));
            ++produced;
        };

        if (toggles.fund && abi.payable) {
            const U256 v = seed.value;
            derive(Mutation{Mutation::Kind::Fund, "fund:zero", -1},
                   [&](TransactionRecord& tx) { tx.value = U256{}; });
            derive(Mutation{Mutation::Kind::Fund, "fund:half", -1},
                   [&](TransactionRecord& tx) { tx.value = v / U256{2}; });
            derive(Mutation{Mutation::Kind::Fund, "fund:double", -1},
                   [&](TransactionRecord& tx) { tx.value = v * U256{2}; });
            derive(Mutation{Mutation::Kind::Fund, "fund:10x", -1},
                   [&](TransactionRecord& tx) { tx.value = v * U256{10}; });
            U256 random_value = rng.random_word();
            derive(Mutation{Mutation::Kind::Fund, "fund:random", -1},
                   [&](TransactionRecord& tx) { tx.value = random_value; });
        }

        if (toggles.input && !fn->params.empty()) {
            std::vector<ArgValue> base = verifier_detail::decode_args_or_empty(*fn, seed.calldata);
            auto with_arg = [&](std::size_t i, const U256& value, const std::string& label) {
                std::vector<ArgValue> args = base;
                args[i].word = value;
                Calldata data = encode_calldata(*fn, args);
                derive(Mutation{Mutation::Kind::Input, "input:" + std::to_string(i) + ":" + label,
                                (int)i},
                       [&](TransactionRecord& tx) { tx.calldata = data; });
            };
            std::vector<Address> contracts = store.contract_addresses();
            for (std::size_t i = 0; i < fn->params.size(); ++i) {
                switch (fn->params[i].kind) {
                    case ParamKind::Uint256: {
                        with_arg(i, U256{}, "zero");
                        with_arg(i, U256::one(), "one");
                        with_arg(i, U256::max(), "max");
                        with_arg(i, rng.random_word(), "random");
                        break;
                    }
                    case ParamKind::AddressParam: {
                        with_arg(i, tx_o.sender.to_word(), "sender");
                        with_arg(i, U256{}, "zero");
                        with_arg(i, attacker_sentinel().to_word(), "attacker");
                        if (!contracts.empty())
                            with_arg(i, contracts[rng.pick(contracts.size())].to_word(),
                                     "contract");
                        break;
                    }
                    case ParamKind::Bool: {
                        with_arg(i, base[i].word.is_zero() ? U256::one() : U256{}, "flip");
                        break;
                    }
                    case ParamKind::Bytes:
                        break;  // no bytes mutation schedule
                }
            }
        }
    }
    return cases;
}

/// One confirmed read-only reentrancy witness.
struct OverlapSlot {
    Address contract;
    U256 slot;
    std::string var;
    std::optional<U256> key;

    friend bool operator==(const OverlapSlot&, const OverlapSlot&) = default;
    friend auto operator<=>(const OverlapSlot&, const OverlapSlot&) = default;
};

struct RorFinding {
    FnRef entry_fn;
    std::string entry_dapp;
    FnRef victim_fn;
    std::string victim_dapp;
    FnRef manipulable_fn;
    std::string manipulable_dapp;
    bool manipulable_is_view{false};
    SiteRef hijack_site;
    std::vector<OverlapSlot> overlap_slots;
    FuzzCase witness_entry_tx;
    Hash32 witness_victim_tx;
    std::vector<std::string> narrative;

    /// Deduplication identity for campaign results.
    std::string dedup_key() const {
        std::string k = entry_fn.to_string() + "|" + victim_fn.to_string();
        for (const auto& s : overlap_slots)
            k += "|" + s.contract.to_hex() + ":" + u256_to_hex(s.slot);
        return k;
    }
};

namespace verifier_detail {

inline FnRef function_of_tx(const ChainStore& store, const TransactionRecord& tx) {
    const ContractEntry* ce = store.contract(tx.to);
    if (!ce) return FnRef{tx.to, "?"};
    auto sel = calldata_selector(tx.calldata);
    const FunctionDef* fn = sel ? ce->ir.find_by_selector(*sel) : nullptr;
    return FnRef{tx.to, fn ? fn->name : "?"};
}

inline std::vector<std::string> build_narrative(const RorFinding& f,
                                                const Address& hijack_recipient) {
    std::vector<std::string> steps;
    steps.push_back("attacker calls entry function " + f.entry_fn.name + " of " +
                    f.entry_fn.contract.to_hex() + " (" + f.entry_dapp + ") with transaction " +
                    f.witness_entry_tx.tx.hash.to_hex());
    steps.push_back("control flow transfers to " + hijack_recipient.to_hex() + " at " +
                    f.hijack_site.function + " statement " +
                    std::to_string(f.hijack_site.ordinal) + " before state is fully updated");
    steps.push_back("attacker reenters victim function " + f.victim_fn.name + " of " +
                    f.victim_fn.contract.to_hex() + " (" + f.victim_dapp + ") by replaying " +
                    f.witness_victim_tx.to_hex() +
                    " (sent by its original sender, who holds positions in both applications;"
                    " a single-attacker exploit would route this call through its own contract)");
    std::string slots;
    for (const auto& s : f.overlap_slots) {
        if (!slots.empty()) slots += ", ";
        slots += s.var + " (slot " + u256_to_hex(s.slot) + " of " + s.contract.to_hex() + ")";
        if (s.key) slots += "[key " + u256_to_hex(*s.key) + "]";
    }
    steps.push_back("the victim reads stale state through " + f.manipulable_fn.name + ": " +
                    slots);
    steps.push_back("after control returns, the entry transaction updates those same slots,"
                    " confirming the values the victim consumed were stale");
    return steps;
}

}  // namespace verifier_detail

/// Replays one fuzz case with a hook that injects the origin transaction at
/// every hijack point. Confirms a finding when the injected transaction
/// succeeds and the entry transaction later writes state it read, with the
/// overlap in a different application than the victim's. The first
/// overlapping hijack point wins; reverts are negative outcomes, not errors.
inline std::optional<RorFinding> verify(const ChainStore& store,
                                        const BoundaryResolver& boundaries,
                                        const CandidateEntry& candidate, const FuzzCase& fc,
                                        const TransactionRecord& tx_o) {
    struct HookResult {
        HijackPoint point;
        bool success{false};
        std::set<SlotKey> reads;
    };
    std::vector<HookResult> hook_results;

    Executor vm(store, boundaries);
    HijackHook hook = [&](HijackContext& ctx) {
        ExecutionTrace nested = ctx.run_nested(tx_o);
        hook_results.push_back(
            HookResult{ctx.point(), nested.outcome.success, reads_of(nested)});
        return HookDecision::Proceed;
    };
    ExecutionTrace trace = vm.replay_with_hijack(fc.tx, hook);

    for (const auto& hr : hook_results) {
        if (!hr.success) continue;
        std::set<SlotKey> written = state_diff(trace, hr.point.seq);
        std::vector<OverlapSlot> overlap;
        for (const auto& cell : written) {
            if (!hr.reads.count(cell)) continue;
            if (boundaries.same_dapp(tx_o.to, cell.contract) != DAppVerdict::Different)
                continue;  // stale state must live outside the victim application
            OverlapSlot os{cell.contract, cell.slot, "?", std::nullopt};
            for (const auto& rec : trace.records) {
                if (rec.op == TraceOp::Write && rec.seq > hr.point.seq &&
                    rec.target == cell.contract && rec.slot.slot == cell.slot) {
                    os.var = rec.slot.var;
                    os.key = rec.slot.key;
                    break;
                }
            }
            overlap.push_back(std::move(os));
        }
        if (overlap.empty()) continue;

        RorFinding f;
        f.entry_fn = candidate.entry_fn;
        f.entry_dapp = boundaries.resolve(candidate.entry_fn.contract).label();
        f.victim_fn = verifier_detail::function_of_tx(store, tx_o);
        f.victim_dapp = boundaries.resolve(tx_o.to).label();
        f.manipulable_fn = candidate.manipulable_fn;
        f.manipulable_dapp = boundaries.resolve(candidate.manipulable_fn.contract).label();
        f.manipulable_is_view = candidate.manipulable_is_view;
        f.hijack_site = hr.point.site;
        f.overlap_slots = std::move(overlap);
        f.witness_entry_tx = fc;
        f.witness_victim_tx = tx_o.hash;
        f.narrative = verifier_detail::build_narrative(f, hr.point.recipient);
        return f;
    }
    return std::nullopt;
}

struct CampaignConfig {
    std::size_t txs_per_entry{300};
    std::uint64_t budget{5000};  // number of verify calls
    std::uint64_t seed{1};
    MutationToggles toggles;
};

struct CampaignStats {
    std::uint64_t verify_calls{0};
    std::uint64_t cases_built{0};
    bool budget_exhausted{false};
};

/// Runs verification over candidates in importance order. For each
/// candidate, every origin transaction is paired with every fuzz case until
/// a finding is confirmed or the budget runs out; findings are deduplicated
/// by (entry, victim, overlap). Deterministic for a fixed seed.
inline std::vector<RorFinding> run_campaign(const ChainStore& store,
                                            const BoundaryResolver& boundaries,
                                            const std::vector<CandidateEntry>& candidates,
                                            const CampaignConfig& config,
                                            CampaignStats* stats_out = nullptr,
                                            std::ostream* fuzz_log = nullptr) {
    std::vector<RorFinding> findings;
    std::set<std::string> seen;
    CampaignStats stats;
    DrawCounter rng(config.seed);

    for (const auto& candidate : candidates) {
        bool found_for_candidate = false;
        for (const auto& origin : candidate.origin_txs) {
            if (found_for_candidate || stats.budget_exhausted) break;
            auto tx_o = store.transaction(origin);
            if (!tx_o) continue;
            std::vector<FuzzCase> cases = build_candidate_list(
                store, candidate, *tx_o, config.txs_per_entry, config.toggles, rng);
            stats.cases_built += cases.size();
            for (const auto& fc : cases) {
                if (stats.verify_calls >= config.budget) {
                    stats.budget_exhausted = true;
                    break;
                }
                ++stats.verify_calls;
                auto finding = verify(store, boundaries, candidate, fc, *tx_o);
                if (fuzz_log) {
                    nlohmann::json line;
                    line["candidate"] = candidate.entry_fn.to_string();
                    line["origin_tx"] = origin.to_hex();
                    line["case"] = fc.index;
                    line["seed_tx"] = fc.seed_tx ? fc.seed_tx->to_hex() : "synthesized";
                    line["mutation"] = fc.mutation.label.empty() ? "none" : fc.mutation.label;
                    line["rng_draws"] = fc.rng_draws;
                    line["finding"] = finding.has_value();
                    *fuzz_log << line.dump() << "\n";
                }
                if (finding) {
                    if (seen.insert(finding->dedup_key()).second)
                        findings.push_back(std::move(*finding));
                    found_for_candidate = true;
                    break;
                }
            }
        }
        if (stats.budget_exhausted) break;
    }
    if (stats_out) *stats_out = stats;
    return findings;
}

}  // namespace rorscan
