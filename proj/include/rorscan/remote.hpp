#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rorscan/store.hpp"

namespace rorscan {

/// Transport or protocol failure talking to a remote chain endpoint.
struct RpcError : Error {
    using Error::Error;
};

namespace rpc_detail {

inline json tx_to_json(const TransactionRecord& tx) {
    json j;
    j["hash"] = tx.hash.to_hex();
    j["sender"] = tx.sender.to_hex();
    j["to"] = tx.to.to_hex();
    j["value"] = u256_to_hex(tx.value);
    j["calldata"] = calldata_to_hex(tx.calldata);
    j["block"] = tx.block_number;
    j["timestamp"] = tx.timestamp;
    return j;
}

inline TransactionRecord tx_from_json(const json& j) {
    TransactionRecord tx;
    tx.hash = Hash32::from_hex(j.at("hash").get<std::string>());
    tx.sender = Address::from_hex(j.at("sender").get<std::string>());
    tx.to = Address::from_hex(j.at("to").get<std::string>());
    tx.value = u256_from_string(j.at("value").get<std::string>());
    tx.calldata = calldata_from_hex(j.at("calldata").get<std::string>());
    tx.block_number = j.at("block").get<std::uint64_t>();
    tx.timestamp = j.at("timestamp").get<std::uint64_t>();
    return tx;
}

}  // namespace rpc_detail

/// Serves a loaded snapshot over the JSON-RPC protocol described in
/// docs/rpc-protocol.md. Used by tests and by anyone who wants to point
/// --rpc-url at a snapshot hosted elsewhere.
class SnapshotRpcServer {
  public:
    explicit SnapshotRpcServer(const ChainSnapshot& snap) : store_(snap) {
        server_.Post("/", [this](const httplib::Request& req, httplib::Response& res) {
            res.set_content(handle(req.body).dump(), "application/json");
        });
    }

    ~SnapshotRpcServer() { stop(); }

    /// Binds to an ephemeral localhost port and serves in the background.
    int start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw RpcError("cannot bind local rpc server");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  private:
    json handle(const std::string& body) const {
        json req;
        try {
            req = json::parse(body);
        } catch (const json::parse_error& e) {
            return error_response(json(), -32700, e.what());
        }
        json id = req.value("id", json());
        try {
            json result = dispatch(req.at("method").get<std::string>(),
                                   req.value("params", json::object()));
            json res;
            res["jsonrpc"] = "2.0";
            res["id"] = id;
            res["result"] = result;
            return res;
        } catch (const LookupError& e) {
            return error_response(id, -32001, e.what());
        } catch (const std::exception& e) {
            return error_response(id, -32000, e.what());
        }
    }

    static json error_response(const json& id, int code, const std::string& message) {
        json res;
        res["jsonrpc"] = "2.0";
        res["id"] = id;
        res["error"] = {{"code", code}, {"message", message}};
        return res;
    }

    json dispatch(const std::string& method, const json& params) const {
        if (method == "chain_contract") {
            Address addr = Address::from_hex(params.at("address").get<std::string>());
            const ContractEntry* ce = store_.contract(addr);
            if (!ce) return json();
            json j;
            j["creation"] = {{"deploy_tx", ce->creation.deploy_tx_hash.to_hex()},
                             {"creator", ce->creation.creator.to_hex()}};
            j["ir"] = ce->ir_doc;
            return j;
        }
        if (method == "chain_contractAddresses") {
            json out = json::array();
            for (const auto& a : store_.contract_addresses()) out.push_back(a.to_hex());
            return out;
        }
        if (method == "chain_transaction") {
            Hash32 h = Hash32::from_hex(params.at("hash").get<std::string>());
            auto tx = store_.transaction(h);
            return tx ? rpc_detail::tx_to_json(*tx) : json();
        }
        if (method == "chain_internalTxs") {
            Hash32 h = Hash32::from_hex(params.at("hash").get<std::string>());
            json out = json::array();
            for (const auto& e : store_.internal_transactions(h)) {
                out.push_back({{"kind", e.kind == InternalTxEntry::Kind::Create ? "create" : "call"},
                               {"from", e.from.to_hex()},
                               {"to", e.to.to_hex()},
                               {"value", u256_to_hex(e.value)}});
            }
            return out;
        }
        if (method == "chain_transactionsOf") {
            Address addr = Address::from_hex(params.at("address").get<std::string>());
            std::size_t limit = params.at("limit").get<std::size_t>();
            json out = json::array();
            for (const auto& tx : store_.transactions_of(addr, limit))
                out.push_back(rpc_detail::tx_to_json(tx));
            return out;
        }
        if (method == "chain_storageAt") {
            Address addr = Address::from_hex(params.at("address").get<std::string>());
            U256 slot = u256_from_string(params.at("slot").get<std::string>());
            return u256_to_hex(store_.storage(addr, slot));
        }
        if (method == "chain_balanceOf") {
            Address addr = Address::from_hex(params.at("address").get<std::string>());
            return u256_to_hex(store_.balance(addr));
        }
        if (method == "chain_builders") {
            json out = json::array();
            for (const auto& b : store_.builders())
                out.push_back({{"builder", b.builder.to_hex()}, {"dapp", b.dapp_name}});
            return out;
        }
        throw LookupError("unknown rpc method '" + method + "'");
    }

    SnapshotStore store_;
    httplib::Server server_;
    std::thread thread_;
    int port_{0};
};

/// Chain data over a remote JSON-RPC endpoint, mirroring the snapshot store
/// operation for operation. Contract IR documents are fetched once and
/// parsed into a local cache; storage stays uncached here because callers
/// wrap any store in CachedStore.
class RemoteStore final : public ChainStore {
  public:
    /// `url` is e.g. "http://127.0.0.1:8545"; a trailing path is honored.
    explicit RemoteStore(const std::string& url) {
        auto scheme_end = url.find("://");
        std::string rest = scheme_end == std::string::npos ? url : url.substr(scheme_end + 3);
        auto slash = rest.find('/');
        host_port_ = "http://" + (slash == std::string::npos ? rest : rest.substr(0, slash));
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    }

    bool is_contract(const Address& addr) const override { return contract(addr) != nullptr; }

    const ContractEntry* contract(const Address& addr) const override {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (absent_.count(addr)) return nullptr;
            auto it = entries_.find(addr);
            if (it != entries_.end()) return &it->second;
        }
        json result = call("chain_contract", {{"address", addr.to_hex()}});
        std::lock_guard<std::mutex> lock(mutex_);
        if (result.is_null()) {
            absent_.insert(addr);
            return nullptr;
        }
        ContractEntry ce;
        ce.creation.deploy_tx_hash =
            Hash32::from_hex(result.at("creation").at("deploy_tx").get<std::string>());
        ce.creation.creator =
            Address::from_hex(result.at("creation").at("creator").get<std::string>());
        ce.ir = parse_contract(result.at("ir"));
        if (ce.ir.address.is_zero()) ce.ir.address = addr;
        ce.meta = std::make_shared<const ContractMetaTable>(ce.ir);
        ce.ir_doc = result.at("ir");
        return &entries_.emplace(addr, std::move(ce)).first->second;
    }

    std::optional<TransactionRecord> transaction(const Hash32& hash) const override {
        json result = call("chain_transaction", {{"hash", hash.to_hex()}});
        if (result.is_null()) return std::nullopt;
        return rpc_detail::tx_from_json(result);
    }

    bool has_transaction(const Hash32& hash) const override {
        return transaction(hash).has_value();
    }

    std::vector<InternalTxEntry> internal_transactions(const Hash32& hash) const override {
        json result = call("chain_internalTxs", {{"hash", hash.to_hex()}});
        std::vector<InternalTxEntry> out;
        for (const auto& e : result) {
            InternalTxEntry ie;
            ie.kind = e.at("kind").get<std::string>() == "create" ? InternalTxEntry::Kind::Create
                                                                  : InternalTxEntry::Kind::Call;
            ie.from = Address::from_hex(e.at("from").get<std::string>());
            ie.to = Address::from_hex(e.at("to").get<std::string>());
            ie.value = u256_from_string(e.at("value").get<std::string>());
            out.push_back(ie);
        }
        return out;
    }

    std::vector<TransactionRecord> transactions_of(const Address& addr,
                                                   std::size_t limit) const override {
        json result = call("chain_transactionsOf", {{"address", addr.to_hex()}, {"limit", limit}});
        std::vector<TransactionRecord> out;
        for (const auto& t : result) out.push_back(rpc_detail::tx_from_json(t));
        return out;
    }

    U256 storage(const Address& addr, const U256& slot) const override {
        json result =
            call("chain_storageAt", {{"address", addr.to_hex()}, {"slot", u256_to_hex(slot)}});
        return u256_from_string(result.get<std::string>());
    }

    U256 balance(const Address& addr) const override {
        json result = call("chain_balanceOf", {{"address", addr.to_hex()}});
        return u256_from_string(result.get<std::string>());
    }

    std::vector<BuilderEntry> builders() const override {
        json result = call("chain_builders", json::object());
        std::vector<BuilderEntry> out;
        for (const auto& b : result)
            out.push_back(BuilderEntry{Address::from_hex(b.at("builder").get<std::string>()),
                                       b.at("dapp").get<std::string>()});
        return out;
    }

    std::vector<Address> contract_addresses() const override {
        json result = call("chain_contractAddresses", json::object());
        std::vector<Address> out;
        for (const auto& a : result) out.push_back(Address::from_hex(a.get<std::string>()));
        return out;
    }

  private:
    json call(const std::string& method, json params) const {
        json req;
        req["jsonrpc"] = "2.0";
        req["id"] = next_id_.fetch_add(1, std::memory_order_relaxed);
        req["method"] = method;
        req["params"] = std::move(params);
        httplib::Client client(host_port_);
        client.set_connection_timeout(5, 0);
        auto res = client.Post(path_, req.dump(), "application/json");
        if (!res)
            throw RpcError("rpc transport failure calling " + method + " on " + host_port_);
        if (res->status != 200)
            throw RpcError("rpc http status " + std::to_string(res->status) + " from " +
                           host_port_);
        json body = json::parse(res->body);
        if (body.contains("error")) {
            const auto& err = body.at("error");
            int code = err.value("code", 0);
            std::string message = err.value("message", std::string("rpc error"));
            if (code == -32001) throw LookupError(message);
            throw RpcError(message);
        }
        return body.at("result");
    }

    std::string host_port_;
    std::string path_;
    mutable std::mutex mutex_;
    mutable std::map<Address, ContractEntry> entries_;
    mutable std::set<Address> absent_;
    mutable std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace rorscan
