#include <catch2/catch.hpp>

#include "rorscan/remote.hpp"
#include "helpers.hpp"

using namespace rorscan;
using namespace testutil;

TEST_CASE("remote store answers every operation like the snapshot store") {
    ChainSnapshot snap = load_snapshot(fixture("pool_oracle_vault.json"));
    SnapshotRpcServer server(snap);
    server.start();
    RemoteStore remote(server.url());
    SnapshotStore local(snap);

    // Contract lookup, including the parsed IR and creation record.
    const ContractEntry* ce = remote.contract(kVault);
    REQUIRE(ce != nullptr);
    CHECK(ce->ir.find_function("exitVault") != nullptr);
    CHECK(ce->creation.creator == local.contract(kVault)->creation.creator);
    CHECK(remote.contract(kAlice) == nullptr);
    CHECK(remote.is_contract(kPool));

    // Transactions, history ordering, internal lists.
    Hash32 a3 = Hash32::from_hex(
        "0x000000000000000000000000000000000000000000000000000000000000a003");
    auto tx = remote.transaction(a3);
    REQUIRE(tx.has_value());
    CHECK(tx->sender == kAlice);
    CHECK(tx->calldata == local.transaction(a3)->calldata);

    auto remote_txs = remote.transactions_of(kPool, 2);
    auto local_txs = local.transactions_of(kPool, 2);
    REQUIRE(remote_txs.size() == local_txs.size());
    for (std::size_t i = 0; i < remote_txs.size(); ++i)
        CHECK(remote_txs[i].hash == local_txs[i].hash);

    Hash32 deploy = snap.contracts.at(kPool).creation.deploy_tx_hash;
    CHECK(remote.internal_transactions(deploy).empty());
    Hash32 unknown{};
    unknown.bytes[0] = 0xde;
    CHECK_THROWS_AS(remote.internal_transactions(unknown), LookupError);

    // Storage, balances, builders, address enumeration.
    CHECK(remote.storage(kVault, U256{0}) == U256{0x1770});
    CHECK(remote.storage(kVault, U256{99}) == U256{0});
    CHECK(remote.balance(kVault) == local.balance(kVault));
    CHECK(remote.builders().size() == 2);
    CHECK(remote.contract_addresses() == local.contract_addresses());

    server.stop();
}

TEST_CASE("remote stores compose with the storage cache") {
    ChainSnapshot snap = load_snapshot(fixture("pool_oracle_vault.json"));
    SnapshotRpcServer server(snap);
    server.start();
    RemoteStore remote(server.url());
    CachedStore cached(remote);

    CHECK(cached.storage(kVault, U256{2}) == U256{0x7d0});
    CHECK(cached.backend_storage_reads() == 1);
    CHECK(cached.storage(kVault, U256{2}) == U256{0x7d0});
    CHECK(cached.backend_storage_reads() == 1);  // served locally

    server.stop();
}

TEST_CASE("transport failures surface as rpc errors") {
    RemoteStore remote("http://127.0.0.1:1");  // nothing listens there
    CHECK_THROWS_AS(remote.storage(kVault, U256{0}), RpcError);
}

TEST_CASE("a full detection run works over the wire") {
    ChainSnapshot snap = load_snapshot(fixture("pool_oracle_vault.json"));
    SnapshotRpcServer server(snap);
    server.start();
    RemoteStore remote(server.url());
    CachedStore store(remote);
    BoundaryResolver boundaries(store, store.builders());

    ContextDataset ds = collect_contextual_data(store, boundaries, kPool, 1000);
    auto candidates = derive_candidates(store, boundaries, ds);
    REQUIRE(candidates.size() == 1);
    CampaignConfig cc;
    auto findings = run_campaign(store, boundaries, candidates, cc);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].entry_fn.name == "exitVault");

    server.stop();
}
