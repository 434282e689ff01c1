#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "rorscan/snapshot.hpp"

namespace rorscan {

/// Read-only chain data source. Implementations: SnapshotStore (offline
/// files, the default) and RemoteStore (JSON-RPC, opt-in via --rpc-url).
/// All methods are safe for concurrent callers.
class ChainStore {
  public:
    virtual ~ChainStore() = default;

    virtual bool is_contract(const Address& addr) const = 0;
    virtual const ContractEntry* contract(const Address& addr) const = 0;
    virtual std::optional<TransactionRecord> transaction(const Hash32& hash) const = 0;
    virtual bool has_transaction(const Hash32& hash) const = 0;
    virtual std::vector<InternalTxEntry> internal_transactions(const Hash32& hash) const = 0;
    virtual std::vector<TransactionRecord> transactions_of(const Address& addr,
                                                           std::size_t limit) const = 0;
    virtual U256 storage(const Address& addr, const U256& slot) const = 0;
    virtual U256 balance(const Address& addr) const = 0;
    virtual std::vector<BuilderEntry> builders() const = 0;
    virtual std::vector<Address> contract_addresses() const = 0;
};

/// Newest-first transaction order: block number, then timestamp, then hash,
/// all descending. Same-block ordering beyond the timestamp is arbitrary but
/// fixed, so every run sees the same history.
inline bool newer_than(const TransactionRecord& a, const TransactionRecord& b) {
    if (a.block_number != b.block_number) return a.block_number > b.block_number;
    if (a.timestamp != b.timestamp) return a.timestamp > b.timestamp;
    return a.hash > b.hash;
}

class SnapshotStore final : public ChainStore {
  public:
    explicit SnapshotStore(const ChainSnapshot& snap) : snap_(snap) {}

    bool is_contract(const Address& addr) const override { return snap_.is_contract(addr); }

    const ContractEntry* contract(const Address& addr) const override {
        return snap_.find_contract(addr);
    }

    std::optional<TransactionRecord> transaction(const Hash32& hash) const override {
        auto it = snap_.transactions.find(hash);
        if (it == snap_.transactions.end()) return std::nullopt;
        return it->second;
    }

    bool has_transaction(const Hash32& hash) const override {
        return snap_.transactions.count(hash) > 0;
    }

    std::vector<InternalTxEntry> internal_transactions(const Hash32& hash) const override {
        if (!has_transaction(hash))
            throw LookupError("unknown transaction hash " + hash.to_hex());
        auto it = snap_.internal_txs.find(hash);
        if (it == snap_.internal_txs.end()) return {};
        return it->second;
    }

    std::vector<TransactionRecord> transactions_of(const Address& addr,
                                                   std::size_t limit) const override {
        std::vector<TransactionRecord> out;
        for (const auto& [hash, tx] : snap_.transactions)
            if (tx.to == addr) out.push_back(tx);
        std::sort(out.begin(), out.end(), newer_than);
        if (out.size() > limit) out.resize(limit);
        return out;
    }

    U256 storage(const Address& addr, const U256& slot) const override {
        auto it = snap_.storage.find(SlotKey{addr, slot});
        return it == snap_.storage.end() ? U256{} : it->second;
    }

    U256 balance(const Address& addr) const override {
        auto it = snap_.balances.find(addr);
        return it == snap_.balances.end() ? U256{} : it->second;
    }

    std::vector<BuilderEntry> builders() const override { return snap_.builders; }

    std::vector<Address> contract_addresses() const override {
        std::vector<Address> out;
        for (const auto& [addr, entry] : snap_.contracts) out.push_back(addr);
        return out;
    }

  private:
    const ChainSnapshot& snap_;
};

/// Storage-caching wrapper. The first fetch of a (contract, slot) pair reads
/// the backing store; later fetches are served locally. Counters expose the
/// number of backend reads so the cache contract is testable.
class CachedStore final : public ChainStore {
  public:
    explicit CachedStore(const ChainStore& backing) : backing_(backing) {}

    bool is_contract(const Address& addr) const override { return backing_.is_contract(addr); }
    const ContractEntry* contract(const Address& addr) const override {
        return backing_.contract(addr);
    }
    std::optional<TransactionRecord> transaction(const Hash32& hash) const override {
        return backing_.transaction(hash);
    }
    bool has_transaction(const Hash32& hash) const override {
        return backing_.has_transaction(hash);
    }
    std::vector<InternalTxEntry> internal_transactions(const Hash32& hash) const override {
        return backing_.internal_transactions(hash);
    }
    std::vector<TransactionRecord> transactions_of(const Address& addr,
                                                   std::size_t limit) const override {
        return backing_.transactions_of(addr, limit);
    }

    U256 storage(const Address& addr, const U256& slot) const override {
        SlotKey key{addr, slot};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        U256 value = backing_.storage(addr, slot);
        backend_storage_reads_.fetch_add(1, std::memory_order_relaxed);
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(key, value).first->second;
    }

    U256 balance(const Address& addr) const override { return backing_.balance(addr); }
    std::vector<BuilderEntry> builders() const override { return backing_.builders(); }
    std::vector<Address> contract_addresses() const override {
        return backing_.contract_addresses();
    }

    std::uint64_t backend_storage_reads() const {
        return backend_storage_reads_.load(std::memory_order_relaxed);
    }

  private:
    const ChainStore& backing_;
    mutable std::mutex mutex_;
    mutable std::map<SlotKey, U256> cache_;
    mutable std::atomic<std::uint64_t> backend_storage_reads_{0};
};

// --- Chain data operations -------------------------------------------------

/// The contract's first transaction: its deployment transaction.
inline TransactionRecord fetch_deployment_tx(const ChainStore& store, const Address& addr) {
    const ContractEntry* ce = store.contract(addr);
    if (!ce) throw LookupError("unknown contract " + addr.to_hex());
    auto tx = store.transaction(ce->creation.deploy_tx_hash);
    if (!tx)
        throw LookupError("dangling reference: deploy_tx " +
                          ce->creation.deploy_tx_hash.to_hex() + " of contract " +
                          addr.to_hex());
    return *tx;
}

/// Internal transactions of a known transaction, in execution order; empty
/// when it created no nested calls. Unknown hashes raise LookupError.
inline std::vector<InternalTxEntry> fetch_internal_tx_list(const ChainStore& store,
                                                           const Hash32& hash) {
    return store.internal_transactions(hash);
}

/// Most recent `limit` transactions sent to `addr`, newest first.
inline std::vector<TransactionRecord> fetch_transactions_of(const ChainStore& store,
                                                            const Address& addr,
                                                            std::size_t limit) {
    return store.transactions_of(addr, limit);
}

/// Storage word at (addr, slot); absent storage reads as zero.
inline U256 fetch_storage(const ChainStore& store, const Address& addr, const U256& slot) {
    return store.storage(addr, slot);
}

}  // namespace rorscan
