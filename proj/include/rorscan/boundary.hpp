#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "rorscan/store.hpp"

namespace rorscan {

/// Which application a contract belongs to. Unknown means the resolved
/// builder is absent from the builder dataset (or the address is an EOA);
/// unknown contracts are treated as unsafe by every downstream consumer.
struct DAppIdentity {
    std::optional<std::string> dapp_name;

    bool known() const { return dapp_name.has_value(); }
    static DAppIdentity unknown() { return {}; }
    static DAppIdentity named(std::string name) { return { std::move(name) }; }

    std::string label() const { return dapp_name ? *dapp_name : std::string("unknown"); }

    friend bool operator==(const DAppIdentity&, const DAppIdentity&) = default;
};

enum class DAppVerdict { Same, Different };

/// Raised when a factory chain revisits an address. Impossible on real
/// chains, but snapshot files are hand-authored.
struct CycleError : Error {
    using Error::Error;
};

/// Resolves the application boundary of contracts through creation lineage:
/// follow the deployment transaction; while its internal transaction list
/// contains a create entry for the current address, hop to the factory
/// contract and repeat; otherwise the recorded creator is the builder.
class BoundaryResolver {
  public:
    BoundaryResolver(const ChainStore& store, std::vector<BuilderEntry> builders)
        : store_(store) {
        for (auto& b : builders) builder_index_.emplace(b.builder, std::move(b.dapp_name));
    }

    /// Root builder of a contract. Unknown contracts raise LookupError.
    Address find_builder(const Address& contract_addr) const {
        std::set<Address> visited;
        Address current = contract_addr;
        while (true) {
            if (!visited.insert(current).second)
                throw CycleError("creation lineage of " + contract_addr.to_hex() +
                                 " revisits " + current.to_hex());
            const ContractEntry* ce = store_.contract(current);
            if (!ce) throw LookupError("unknown contract " + current.to_hex());
            TransactionRecord deploy_tx = fetch_deployment_tx(store_, current);
            auto internal = fetch_internal_tx_list(store_, deploy_tx.hash);
            const InternalTxEntry* create_entry = nullptr;
            for (const auto& e : internal) {
                if (e.kind == InternalTxEntry::Kind::Create && e.to == current) {
                    create_entry = &e;
                    break;
                }
            }
            if (!create_entry) return ce->creation.creator;
            current = create_entry->from;  // the factory contract
        }
    }

    /// DApp of an address. EOAs and contracts whose builder is not in the
    /// dataset resolve to Unknown. Memoized per resolver.
    DAppIdentity resolve(const Address& addr) const {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = memo_.find(addr);
            if (it != memo_.end()) return it->second;
        }
        DAppIdentity id = DAppIdentity::unknown();
        if (store_.is_contract(addr)) {
            Address builder = find_builder(addr);
            auto it = builder_index_.find(builder);
            if (it != builder_index_.end()) id = DAppIdentity::named(it->second);
        }
        std::lock_guard<std::mutex> lock(mutex_);
        return memo_.emplace(addr, std::move(id)).first->second;
    }

    /// Conservative comparison: Same only when both sides resolve to the
    /// same known DApp; any Unknown yields Different.
    DAppVerdict same_dapp(const Address& a, const Address& b) const {
        DAppIdentity da = resolve(a);
        DAppIdentity db = resolve(b);
        if (da.known() && db.known() && *da.dapp_name == *db.dapp_name)
            return DAppVerdict::Same;
        return DAppVerdict::Different;
    }

    bool empty_builder_set() const { return builder_index_.empty(); }

  private:
    const ChainStore& store_;
    std::map<Address, std::string> builder_index_;
    mutable std::mutex mutex_;
    mutable std::map<Address, DAppIdentity> memo_;
};

}  // namespace rorscan
