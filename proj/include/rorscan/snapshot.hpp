#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rorscan/ir.hpp"
#include "rorscan/ir_meta.hpp"
#include "rorscan/types.hpp"

namespace rorscan {

struct TransactionRecord {
    Hash32 hash;
    Address sender;
    Address to;  // zero address = contract creation
    U256 value;
    Calldata calldata;
    std::uint64_t block_number{0};
    std::uint64_t timestamp{0};

    bool is_creation() const { return to.is_zero(); }
};

struct InternalTxEntry {
    enum class Kind { Call, Create };
    Kind kind{Kind::Call};
    Address from;
    Address to;
    U256 value;
};

struct CreationInfo {
    Hash32 deploy_tx_hash;
    Address creator;
};

struct BuilderEntry {
    Address builder;
    std::string dapp_name;
};

struct ContractEntry {
    ContractIR ir;
    CreationInfo creation;
    std::shared_ptr<const ContractMetaTable> meta;
    json ir_doc;  // original IR document, kept for re-serving over RPC
};

/// Immutable offline world state. Loaded once, then shared read-only;
/// replay-time writes live in VM-private overlays, never here.
struct ChainSnapshot {
    std::map<Address, ContractEntry> contracts;
    std::map<Hash32, TransactionRecord> transactions;
    std::map<Hash32, std::vector<InternalTxEntry>> internal_txs;
    std::map<SlotKey, U256> storage;
    std::map<Address, U256> balances;
    std::vector<BuilderEntry> builders;

    bool is_contract(const Address& a) const { return contracts.count(a) > 0; }

    const ContractEntry* find_contract(const Address& a) const {
        auto it = contracts.find(a);
        return it == contracts.end() ? nullptr : &it->second;
    }
};

namespace snapshot_detail {

inline std::string line_of_offset(const std::string& text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline U256 word_field(const json& j, const std::string& ctx) {
    try {
        if (j.is_string()) return u256_from_string(j.get<std::string>());
        if (j.is_number_unsigned()) return U256{j.get<std::uint64_t>()};
    } catch (const std::invalid_argument& e) {
        throw ParseError(ctx + ": " + e.what());
    }
    throw ParseError(ctx + ": expected a 0x-hex string or unsigned integer");
}

/// Storage keys come in three spellings: a raw "0x..." slot, a state
/// variable name, or "var[0xKEY]" for one element of an address-keyed map.
inline U256 resolve_storage_key(const std::string& key, const ContractIR* ir,
                                const std::string& ctx) {
    if (key.size() > 2 && key[0] == '0' && (key[1] == 'x' || key[1] == 'X'))
        return word_field(json(key), ctx);
    auto lb = key.find('[');
    std::string var = lb == std::string::npos ? key : key.substr(0, lb);
    if (!ir)
        throw ParseError(ctx + ": named storage key '" + key +
                         "' needs a contract with an IR document");
    const StateVar* sv = ir->find_var(var);
    if (!sv)
        throw ParseError(ctx + ": unknown state variable '" + var + "'");
    if (lb == std::string::npos) {
        if (sv->kind == StateVarKind::AddressKeyedMap)
            throw ParseError(ctx + ": map variable '" + var + "' needs a [key]");
        return sv->slot;
    }
    if (key.back() != ']')
        throw ParseError(ctx + ": malformed storage key '" + key + "'");
    if (sv->kind != StateVarKind::AddressKeyedMap)
        throw ParseError(ctx + ": scalar variable '" + var + "' does not take a [key]");
    std::string key_text = key.substr(lb + 1, key.size() - lb - 2);
    U256 key_word;
    if (key_text.size() == 42)
        key_word = Address::from_hex(key_text).to_word();
    else
        key_word = word_field(json(key_text), ctx);
    return map_element_slot(sv->slot, key_word);
}

inline Calldata resolve_calldata(const json& j, const Address& to,
                                 const std::map<Address, ContractEntry>& contracts,
                                 const std::string& ctx) {
    if (j.is_string()) return calldata_from_hex(j.get<std::string>(), ctx.c_str());
    if (!j.is_object() || !j.contains("function"))
        throw ParseError(ctx + ": calldata must be 0x-hex or {\"function\", \"args\"}");
    auto it = contracts.find(to);
    if (it == contracts.end())
        throw ParseError(ctx + ": structured calldata targets unknown contract " + to.to_hex());
    const std::string fn_name = j.at("function").get<std::string>();
    const FunctionDef* fn = it->second.ir.find_function(fn_name);
    if (!fn)
        throw ParseError(ctx + ": contract " + to.to_hex() + " has no function '" + fn_name + "'");
    std::vector<ArgValue> args;
    std::size_t idx = 0;
    for (const auto& a : j.value("args", json::array())) {
        ArgValue v;
        if (idx < fn->params.size() && fn->params[idx].kind == ParamKind::Bytes) {
            v.is_blob = true;
            Calldata blob = calldata_from_hex(a.get<std::string>(), ctx.c_str());
            v.blob.assign(blob.begin(), blob.end());
        } else {
            v.word = word_field(a, ctx);
        }
        args.push_back(std::move(v));
        ++idx;
    }
    try {
        return encode_calldata(*fn, args);
    } catch (const ParseError& e) {
        throw ParseError(ctx + ": " + e.what());
    }
}

}  // namespace snapshot_detail

/// Loads a snapshot document. All cross-references must resolve: every
/// contract's deployment transaction must exist, every IR reference must
/// parse, named storage keys must name declared variables. Dangling
/// references raise LookupError naming the missing hash or address.
inline ChainSnapshot load_snapshot_json(const json& doc,
                                        const std::filesystem::path& base_dir = {}) {
    using namespace snapshot_detail;
    if (!doc.is_object()) throw ParseError("snapshot: top level must be a JSON object");

    ChainSnapshot snap;

    const json contracts_doc = doc.value("contracts", json::object());
    const json transactions_doc = doc.value("transactions", json::object());
    const json internal_doc = doc.value("internal_txs", json::object());
    const json storage_doc = doc.value("storage", json::object());
    const json balances_doc = doc.value("balances", json::object());

    for (const auto& [addr_hex, entry] : contracts_doc.items()) {
        const std::string ctx = "snapshot contracts/" + addr_hex;
        Address addr = Address::from_hex(addr_hex);
        ContractEntry ce;
        if (!entry.contains("creation"))
            throw ParseError(ctx + ": missing creation record");
        const auto& cr = entry.at("creation");
        ce.creation.deploy_tx_hash = Hash32::from_hex(cr.at("deploy_tx").get<std::string>());
        ce.creation.creator = Address::from_hex(cr.at("creator").get<std::string>());
        json ir_doc;
        if (entry.contains("ir")) {
            ir_doc = entry.at("ir");
        } else if (entry.contains("ir_ref")) {
            std::filesystem::path p = base_dir / entry.at("ir_ref").get<std::string>();
            std::ifstream in(p);
            if (!in)
                throw ParseError(ctx + ": cannot open ir_ref file " + p.string());
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            try {
                ir_doc = json::parse(text);
            } catch (const json::parse_error& e) {
                throw ParseError(ctx + ": ir_ref " + p.string() + ": " + e.what() + " (" +
                                 line_of_offset(text, e.byte) + ")");
            }
        } else {
            throw ParseError(ctx + ": needs an inline 'ir' or an 'ir_ref' path");
        }
        ce.ir = parse_contract(ir_doc);
        if (ce.ir.address.is_zero())
            ce.ir.address = addr;
        else if (ce.ir.address != addr)
            throw ParseError(ctx + ": IR document address " + ce.ir.address.to_hex() +
                             " does not match the contract key");
        ce.meta = std::make_shared<const ContractMetaTable>(ce.ir);
        ce.ir_doc = std::move(ir_doc);
        snap.contracts.emplace(addr, std::move(ce));
    }

    for (const auto& [hash_hex, t] : transactions_doc.items()) {
        const std::string ctx = "snapshot transactions/" + hash_hex;
        TransactionRecord tx;
        tx.hash = Hash32::from_hex(hash_hex);
        tx.sender = Address::from_hex(t.at("sender").get<std::string>());
        if (t.contains("to") && !t.at("to").is_null())
            tx.to = Address::from_hex(t.at("to").get<std::string>());
        tx.value = t.contains("value") ? word_field(t.at("value"), ctx) : U256{};
        tx.block_number = t.value("block", 0ull);
        tx.timestamp = t.value("timestamp", 0ull);
        if (t.contains("calldata"))
            tx.calldata = resolve_calldata(t.at("calldata"), tx.to, snap.contracts, ctx);
        snap.transactions.emplace(tx.hash, std::move(tx));
    }

    for (const auto& [hash_hex, list] : internal_doc.items()) {
        const std::string ctx = "snapshot internal_txs/" + hash_hex;
        Hash32 h = Hash32::from_hex(hash_hex);
        if (!snap.transactions.count(h))
            throw LookupError(ctx + ": dangling reference: no such transaction " + hash_hex);
        std::vector<InternalTxEntry> entries;
        for (const auto& e : list) {
            InternalTxEntry ie;
            std::string kind = e.at("kind").get<std::string>();
            if (kind == "call") {
                ie.kind = InternalTxEntry::Kind::Call;
            } else if (kind == "create") {
                ie.kind = InternalTxEntry::Kind::Create;
            } else {
                throw ParseError(ctx + ": unknown internal tx kind '" + kind + "'");
            }
            ie.from = Address::from_hex(e.at("from").get<std::string>());
            ie.to = Address::from_hex(e.at("to").get<std::string>());
            if (e.contains("value")) ie.value = word_field(e.at("value"), ctx);
            entries.push_back(ie);
        }
        snap.internal_txs.emplace(h, std::move(entries));
    }

    for (const auto& [addr_hex, cells] : storage_doc.items()) {
        Address addr = Address::from_hex(addr_hex);
        const ContractEntry* ce = snap.find_contract(addr);
        for (const auto& [key, value] : cells.items()) {
            const std::string ctx = "snapshot storage/" + addr_hex + "/" + key;
            U256 slot = resolve_storage_key(key, ce ? &ce->ir : nullptr, ctx);
            snap.storage[SlotKey{addr, slot}] = word_field(value, ctx);
        }
    }

    for (const auto& [addr_hex, value] : balances_doc.items()) {
        snap.balances[Address::from_hex(addr_hex)] =
            word_field(value, "snapshot balances/" + addr_hex);
    }

    for (const auto& b : doc.value("builders", json::array())) {
        BuilderEntry be;
        be.builder = Address::from_hex(b.at("builder").get<std::string>());
        be.dapp_name = b.at("dapp").get<std::string>();
        for (const auto& prev : snap.builders)
            if (prev.builder == be.builder)
                throw ParseError("snapshot builders: duplicate builder " + be.builder.to_hex() +
                                 " (merge same-project entries into one item)");
        snap.builders.push_back(std::move(be));
    }

    for (const auto& [addr, ce] : snap.contracts) {
        if (!snap.transactions.count(ce.creation.deploy_tx_hash))
            throw LookupError("snapshot contracts/" + addr.to_hex() +
                              ": dangling reference: deploy_tx " +
                              ce.creation.deploy_tx_hash.to_hex() +
                              " is not in transactions");
    }

    return snap;
}

/// Loads a snapshot file; parse failures report line and column.
inline ChainSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open snapshot file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("snapshot " + path.string() + ": " + e.what() + " (" +
                         snapshot_detail::line_of_offset(text, e.byte) + ")");
    }
    return load_snapshot_json(doc, path.parent_path());
}

/// Reads a standalone builders file: a JSON array of {builder, dapp}.
inline std::vector<BuilderEntry> load_builders(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open builders file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("builders " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw ParseError("builders file must be a JSON array");
    std::vector<BuilderEntry> out;
    for (const auto& b : doc) {
        BuilderEntry be;
        be.builder = Address::from_hex(b.at("builder").get<std::string>());
        be.dapp_name = b.at("dapp").get<std::string>();
        out.push_back(std::move(be));
    }
    return out;
}

}  // namespace rorscan
