#include <catch2/catch.hpp>

#include "rorscan/boundary.hpp"
#include "rorscan/vm.hpp"
#include "helpers.hpp"

using namespace rorscan;
using namespace testutil;

namespace {

struct OracleScenario {
    ChainSnapshot snap;
    SnapshotStore store;
    BoundaryResolver boundaries;

    OracleScenario()
        : snap(load_snapshot(fixture("pool_oracle_vault.json"))),
          store(snap),
          boundaries(store, snap.builders) {}

    TransactionRecord decrease_tx() const {
        return snap.transactions.at(
            Hash32::from_hex("0x000000000000000000000000000000000000000000000000000000000000a003"));
    }
};

}  // namespace

TEST_CASE("the oracle-vault decrease replays successfully with cross-application records") {
    OracleScenario f;
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(f.decrease_tx());

    REQUIRE(trace.outcome.success);
    CHECK(trace.outcome.return_value == U256{6000});
    CHECK(has_invoke(trace, kOracle, "getPrice"));
    CHECK(has_invoke(trace, kVault, "getFunds"));
    CHECK(has_read(trace, kVault, "balance"));
    CHECK(has_read(trace, kVault, "totalToken"));
    // The stale-read half is a static call; records carry the flag.
    for (const auto& r : trace.records)
        if (r.op == TraceOp::Invoke && r.invoke.callee_fn == "getFunds")
            CHECK(r.invoke.static_call);
    // Target application labels are attached to every record.
    for (const auto& r : trace.records)
        if (r.target == kVault) CHECK(r.target_dapp == DAppIdentity::named("vaultDApp"));
}

TEST_CASE("decrease from a non-allowed sender reverts with the require message") {
    OracleScenario f;
    TransactionRecord tx = make_tx(f.snap, 1, Address::from_hex("0xb0b0000000000000000000000000000000000001"),
                                   kPool, "decrease", {U256{3}, kAsset.to_word()});
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE_FALSE(trace.outcome.success);
    CHECK(trace.outcome.revert_reason == "Wrong user!");
    CHECK(trace.state_overlay.empty());
    CHECK(trace.balance_overlay.empty());
}

TEST_CASE("nested direct call into a locked contract reverts") {
    json doc;
    doc["contracts"]["0x1111000000000000000000000000000000000001"] = {
        {"creation",
         {{"deploy_tx", "0x0000000000000000000000000000000000000000000000000000000000001a01"},
          {"creator", "0xb000000000000000000000000000000000000001"}}},
        {"ir",
         {{"state_vars", {{{"name", "x"}, {"slot", 0}}}},
          {"functions",
           {{{"name", "outer"},
             {"guards", {"nonreentrant"}},
             {"body",
              {{{"op", "call"},
                {"target", "0x1111000000000000000000000000000000000001"},
                {"fn", "inner"},
                {"args", json::array()}}}}},
            {{"name", "inner"},
             {"guards", {"nonreentrant"}},
             {"body", {{{"op", "write"}, {"var", "x"}, {"value", "1"}}}}}}}}}};
    doc["transactions"]["0x0000000000000000000000000000000000000000000000000000000000001a01"] = {
        {"sender", "0xb000000000000000000000000000000000000001"},
        {"to", nullptr}, {"calldata", "0x"}, {"block", 1}, {"timestamp", 1}};
    ChainSnapshot snap = load_snapshot_json(doc);
    SnapshotStore store(snap);
    BoundaryResolver boundaries(store, {});
    Executor vm(store, boundaries);

    TransactionRecord tx = make_tx(snap, 2, kAlice,
                                   Address::from_hex("0x1111000000000000000000000000000000000001"),
                                   "outer");
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE_FALSE(trace.outcome.success);
    CHECK_THAT(trace.outcome.revert_reason, Catch::Contains("reentrant"));

    // Calling inner directly at top level works: the lock is per execution.
    TransactionRecord ok = make_tx(snap, 3, kAlice,
                                   Address::from_hex("0x1111000000000000000000000000000000000001"),
                                   "inner");
    CHECK(vm.replay(ok).outcome.success);
}

TEST_CASE("exitVault exposes exactly one hijack point at the native transfer") {
    OracleScenario f;
    TransactionRecord tx = make_tx(f.snap, 4, kAlice, kVault, "exitVault");
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(tx);

    REQUIRE(trace.outcome.success);
    REQUIRE(trace.hijack_points.size() == 1);
    const HijackPoint& hp = trace.hijack_points[0];
    CHECK(hp.site.contract == kVault);
    CHECK(hp.site.function == "exitVault");
    CHECK(hp.recipient == kAlice);

    // Writes after the transfer: balance and rate, nothing else.
    std::set<SlotKey> diff = state_diff(trace, hp.seq);
    CHECK(diff == std::set<SlotKey>{SlotKey{kVault, U256{0}}, SlotKey{kVault, U256{2}}});

    // After the last event there is nothing.
    CHECK(state_diff(trace, trace.records.back().seq).empty());
}

TEST_CASE("functions without controllable call sites expose no hijack points") {
    OracleScenario f;
    TransactionRecord tx = make_tx(f.snap, 5, kAlice, kPool, "decrease",
                                   {U256{3}, kAsset.to_word()});
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE(trace.outcome.success);
    CHECK(trace.hijack_points.empty());  // all call targets are state-derived
}

TEST_CASE("the join-pool refund hijack point appears only when the remaining-balance branch runs") {
    ChainSnapshot snap = load_snapshot(fixture("join_pool_refund.json"));
    SnapshotStore store(snap);
    BoundaryResolver boundaries(store, snap.builders);
    Executor vm(store, boundaries);

    const Address dave = Address::from_hex("0xda0e000000000000000000000000000000000001");
    // Exact cost: no remainder, no refund, no hijack point.
    TransactionRecord exact = make_tx(snap, 6, dave, kVault8, "joinPool",
                                      {kAsset.to_word()}, U256{1000});
    ExecutionTrace t1 = vm.replay(exact);
    REQUIRE(t1.outcome.success);
    CHECK(t1.hijack_points.empty());

    // Overpayment: the refund inside handleRemaining is the hijack point.
    TransactionRecord over = make_tx(snap, 7, dave, kVault8, "joinPool",
                                     {kAsset.to_word()}, U256{2000});
    ExecutionTrace t2 = vm.replay(over);
    REQUIRE(t2.outcome.success);
    REQUIRE(t2.hijack_points.size() == 1);
    CHECK(t2.hijack_points[0].site.function == "handleRemaining");
    // Refund moved the remainder back to the sender.
    CHECK(t2.balance_overlay.at(dave) == U256{0xe8d4a51000ull} - U256{1000});
}

TEST_CASE("hijack hook reenters the victim with outer locks held") {
    OracleScenario f;
    TransactionRecord entry = make_tx(f.snap, 8, kAlice, kVault, "exitVault");
    TransactionRecord tx_o = f.decrease_tx();

    int hook_calls = 0;
    ExecutionTrace nested_result;
    HijackHook hook = [&](HijackContext& ctx) {
        ++hook_calls;
        nested_result = ctx.run_nested(tx_o);
        return HookDecision::Proceed;
    };
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay_with_hijack(entry, hook);

    REQUIRE(trace.outcome.success);
    CHECK(hook_calls == 1);
    // The nested victim run succeeds: its nonReentrant guard is on another
    // contract, so the held Vault lock does not trip it.
    REQUIRE(nested_result.outcome.success);
    // And it saw the stale balance: 6000/3 * 3 = 6000.
    CHECK(nested_result.outcome.return_value == U256{6000});
    CHECK(reads_of(nested_result).count(SlotKey{kVault, U256{0}}));

    // Hook effects persisted: the victim's write shows in the final overlay.
    U256 paid_slot = map_element_slot(U256{2}, kAlice.to_word());
    CHECK(trace.state_overlay.count(SlotKey{kPool, paid_slot}));
}

TEST_CASE("hijack hook injecting a same-contract reentry is blocked by the lock") {
    ChainSnapshot snap = load_snapshot(fixture("neg_rule3_nonreentrant.json"));
    SnapshotStore store(snap);
    BoundaryResolver boundaries(store, snap.builders);

    TransactionRecord entry = make_tx(snap, 9, kAlice, kVault, "exitVault");
    TransactionRecord tx_o = snap.transactions.at(
        Hash32::from_hex("0x000000000000000000000000000000000000000000000000000000000000a003"));

    ExecutionTrace nested_result;
    HijackHook hook = [&](HijackContext& ctx) {
        nested_result = ctx.run_nested(tx_o);
        return HookDecision::Proceed;
    };
    Executor vm(store, boundaries);
    ExecutionTrace trace = vm.replay_with_hijack(entry, hook);

    REQUIRE(trace.outcome.success);  // the entry itself completes
    // The reentering victim dies inside getFunds: nonReentrant + locked Vault.
    REQUIRE_FALSE(nested_result.outcome.success);
    CHECK_THAT(nested_result.outcome.revert_reason, Catch::Contains("reentrant"));
}

TEST_CASE("aborting the hook rolls the whole execution back") {
    OracleScenario f;
    TransactionRecord entry = make_tx(f.snap, 10, kAlice, kVault, "exitVault");
    HijackHook hook = [&](HijackContext&) { return HookDecision::Abort; };
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay_with_hijack(entry, hook);
    CHECK_FALSE(trace.outcome.success);
    CHECK(trace.state_overlay.empty());
}

TEST_CASE("view-only transactions read but never write") {
    OracleScenario f;
    TransactionRecord tx = make_tx(f.snap, 11, kAlice, kVault, "getRate");
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE(trace.outcome.success);
    CHECK(trace.outcome.return_value == U256{2000});
    CHECK(count_records(trace, TraceOp::Read) > 0);
    CHECK(count_records(trace, TraceOp::Write) == 0);
    CHECK(trace.state_overlay.empty());
}

TEST_CASE("reads_of collects the victim's stale reads") {
    OracleScenario f;
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(f.decrease_tx());
    std::set<SlotKey> reads = reads_of(trace);
    CHECK(reads.count(SlotKey{kVault, U256{0}}));
    CHECK(reads.count(SlotKey{kVault, U256{1}}));
    CHECK(reads_of(ExecutionTrace{}).empty());
}

TEST_CASE("reverted traces have empty diffs and overlays") {
    OracleScenario f;
    TransactionRecord bad = make_tx(f.snap, 12, Address::from_hex("0xb0b0000000000000000000000000000000000001"),
                                    kVault, "exitVault");
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(bad);
    REQUIRE_FALSE(trace.outcome.success);
    CHECK(state_diff(trace, 0).empty());
    CHECK(trace.state_overlay.empty());
    CHECK(trace.balance_overlay.empty());
}

TEST_CASE("success overlay equals the sequential application of write records") {
    OracleScenario f;
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(f.decrease_tx());
    REQUIRE(trace.outcome.success);
    std::map<SlotKey, U256> rebuilt;
    for (const auto& r : trace.records)
        if (r.op == TraceOp::Write) rebuilt[SlotKey{r.target, r.slot.slot}] = r.slot.value;
    CHECK(rebuilt == trace.state_overlay);
}

TEST_CASE("replay is deterministic: identical traces and overlays") {
    OracleScenario f;
    for (std::uint64_t salt = 0; salt < 5; ++salt) {
        TransactionRecord tx =
            salt % 2 == 0 ? f.decrease_tx() : make_tx(f.snap, 13 + salt, kAlice, kVault, "exitVault");
        Executor vm1(f.store, f.boundaries);
        Executor vm2(f.store, f.boundaries);
        CHECK(serialize_trace(vm1.replay(tx)) == serialize_trace(vm2.replay(tx)));
    }
}

TEST_CASE("top-level errors: unknown selector and malformed calldata") {
    OracleScenario f;
    Executor vm(f.store, f.boundaries);

    TransactionRecord tx = make_tx(f.snap, 20, kAlice, kPool, "decrease",
                                   {U256{3}, kAsset.to_word()});
    tx.calldata[0] ^= 0xff;  // clobber the selector
    CHECK_THROWS_AS(vm.replay(tx), ReplayError);

    TransactionRecord short_tx = make_tx(f.snap, 21, kAlice, kPool, "decrease",
                                         {U256{3}, kAsset.to_word()});
    short_tx.calldata.resize(10);
    CHECK_THROWS_AS(vm.replay(short_tx), ReplayError);

    TransactionRecord to_eoa = short_tx;
    to_eoa.to = kAlice;
    CHECK_THROWS_AS(vm.replay(to_eoa), LookupError);
}

TEST_CASE("native transfer runs the recipient's payable fallback") {
    json doc;
    auto deploy = [&](const std::string& addr, json ir, const std::string& tx_tail) {
        std::string h = "0x00000000000000000000000000000000000000000000000000000000000" + tx_tail;
        doc["contracts"][addr] = {
            {"creation", {{"deploy_tx", h}, {"creator", "0xb000000000000000000000000000000000000001"}}},
            {"ir", std::move(ir)}};
        doc["transactions"][h] = {{"sender", "0xb000000000000000000000000000000000000001"},
                                  {"to", nullptr}, {"calldata", "0x"},
                                  {"block", 1}, {"timestamp", 1}};
    };
    deploy("0x2222000000000000000000000000000000000001",
           {{"state_vars", json::array()},
            {"functions",
             {{{"name", "sendOut"},
               {"params", {{{"name", "who"}, {"type", "address"}}}},
               {"body", {{{"op", "transfer"}, {"to", "who"}, {"amount", "50"}}}}}}}},
           "2a201");
    deploy("0x2222000000000000000000000000000000000002",
           {{"state_vars", {{{"name", "pokes"}, {"slot", 0}}}},
            {"functions",
             {{{"name", "fallback"},
               {"payable", true},
               {"body", {{{"op", "write"}, {"var", "pokes"}, {"value", "(add (state pokes) 1)"}}}}}}}},
           "2a202");
    doc["balances"]["0x2222000000000000000000000000000000000001"] = "0x1000";
    ChainSnapshot snap = load_snapshot_json(doc);
    SnapshotStore store(snap);
    BoundaryResolver boundaries(store, {});
    Executor vm(store, boundaries);

    const Address sink = Address::from_hex("0x2222000000000000000000000000000000000002");
    TransactionRecord tx = make_tx(snap, 22, kAlice,
                                   Address::from_hex("0x2222000000000000000000000000000000000001"),
                                   "sendOut", {sink.to_word()});
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE(trace.outcome.success);
    CHECK(trace.state_overlay.at(SlotKey{sink, U256{0}}) == U256{1});  // fallback ran
    CHECK(trace.balance_overlay.at(sink) == U256{50});
    // The transfer target came from a parameter: a hijack point.
    REQUIRE(trace.hijack_points.size() == 1);
    // Fallback frames attribute their records to the fallback function.
    CHECK(has_read(trace, sink, "pokes"));
}

TEST_CASE("static context forbids writes, transfers and value calls") {
    json doc;
    auto deploy = [&](const std::string& addr, json ir, const std::string& tx_tail) {
        std::string h = "0x00000000000000000000000000000000000000000000000000000000000" + tx_tail;
        doc["contracts"][addr] = {
            {"creation", {{"deploy_tx", h}, {"creator", "0xb000000000000000000000000000000000000001"}}},
            {"ir", std::move(ir)}};
        doc["transactions"][h] = {{"sender", "0xb000000000000000000000000000000000000001"},
                                  {"to", nullptr}, {"calldata", "0x"},
                                  {"block", 1}, {"timestamp", 1}};
    };
    deploy("0x3333000000000000000000000000000000000001",
           {{"state_vars", json::array()},
            {"functions",
             {{{"name", "probe"},
               {"body",
                {{{"op", "call"},
                  {"target", "0x3333000000000000000000000000000000000002"},
                  {"fn", "mutate"},
                  {"static", true}}}}}}}},
           "3a301");
    deploy("0x3333000000000000000000000000000000000002",
           {{"state_vars", {{{"name", "x"}, {"slot", 0}}}},
            {"functions",
             {{{"name", "mutate"},
               {"body", {{{"op", "write"}, {"var", "x"}, {"value", "7"}}}}}}}},
           "3a302");
    ChainSnapshot snap = load_snapshot_json(doc);
    SnapshotStore store(snap);
    BoundaryResolver boundaries(store, {});
    Executor vm(store, boundaries);

    TransactionRecord tx = make_tx(snap, 23, kAlice,
                                   Address::from_hex("0x3333000000000000000000000000000000000001"),
                                   "probe");
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE_FALSE(trace.outcome.success);
    CHECK_THAT(trace.outcome.revert_reason, Catch::Contains("static"));
}

TEST_CASE("insufficient balance reverts the transfer") {
    OracleScenario f;
    // Vault holds 0xf4240; drain attempts beyond that revert. Craft a
    // snapshot variant in memory by replaying against a poor contract.
    json doc = fixture_json("pool_oracle_vault.json");
    doc["balances"]["0x2000000000000000000000000000000000000001"] = "0x1";
    ChainSnapshot snap = load_snapshot_json(doc);
    SnapshotStore store(snap);
    BoundaryResolver boundaries(store, snap.builders);
    Executor vm(store, boundaries);
    TransactionRecord tx = make_tx(snap, 24, kAlice, kVault, "exitVault");
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE_FALSE(trace.outcome.success);
    CHECK_THAT(trace.outcome.revert_reason, Catch::Contains("insufficient balance"));
}

TEST_CASE("non-payable functions reject value") {
    OracleScenario f;
    TransactionRecord tx = make_tx(f.snap, 25, kAlice, kVault, "getRate", {}, U256{5});
    Executor vm(f.store, f.boundaries);
    ExecutionTrace trace = vm.replay(tx);
    REQUIRE_FALSE(trace.outcome.success);
    CHECK_THAT(trace.outcome.revert_reason, Catch::Contains("non-payable"));
}
