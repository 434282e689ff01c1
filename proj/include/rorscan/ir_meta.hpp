#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rorscan/ir.hpp"

namespace rorscan {

/// Syntactic provenance of a call/transfer target expression. Classification
/// priority when several sources appear: parameter > sender > state > constant.
enum class TargetKind { Constant, ParameterDerived, SenderDerived, StateDerived };

inline const char* target_kind_name(TargetKind k) {
    switch (k) {
        case TargetKind::Constant: return "constant";
        case TargetKind::ParameterDerived: return "parameter-derived";
        case TargetKind::SenderDerived: return "sender-derived";
        case TargetKind::StateDerived: return "state-derived";
    }
    return "?";
}

/// One external call or native transfer site. Identified by the defining
/// function and the statement's pre-order ordinal within it.
struct CallSiteMeta {
    std::string def_fn;
    int ordinal{-1};
    TargetKind target_kind{TargetKind::Constant};
    bool static_call{false};
    bool native_transfer{false};

    friend bool operator==(const CallSiteMeta&, const CallSiteMeta&) = default;
};

/// Static facts about one function. Reads/writes are var-granular and
/// transitive over same-contract internal calls; cross-contract effects are
/// observed dynamically, not here.
struct FunctionMeta {
    std::set<std::string> reads;
    std::set<std::string> writes;
    std::vector<CallSiteMeta> call_sites;
    std::map<std::string, bool> write_guarded;  // per written var: all writes dominated
    bool guarded_write{true};   // all writes dominated by access control (vacuous if none)
    bool non_reentrant{false};
    bool payable{false};
    bool has_params{false};
    bool is_view{true};  // no writes, no transfers, no non-static calls
};

namespace meta_detail {

struct Provenance {
    bool from_param{false};
    bool from_sender{false};
    bool from_state{false};

    Provenance operator|(const Provenance& o) const {
        return {from_param || o.from_param, from_sender || o.from_sender,
                from_state || o.from_state};
    }
};

inline TargetKind classify(const Provenance& p) {
    if (p.from_param) return TargetKind::ParameterDerived;
    if (p.from_sender) return TargetKind::SenderDerived;
    if (p.from_state) return TargetKind::StateDerived;
    return TargetKind::Constant;
}

/// True when the expression pins msg.sender by equality to a privileged
/// value: a literal or a scalar state variable read. Map membership checks
/// do not qualify. Conjunctions qualify when either side does.
inline bool privileged_sender_check(const Expr& e) {
    if (e.op == ExprOp::And)
        return privileged_sender_check(e.args[0]) || privileged_sender_check(e.args[1]);
    if (e.op != ExprOp::Eq) return false;
    const Expr* sender = nullptr;
    const Expr* other = nullptr;
    if (e.args[0].op == ExprOp::MsgSender) {
        sender = &e.args[0];
        other = &e.args[1];
    } else if (e.args[1].op == ExprOp::MsgSender) {
        sender = &e.args[1];
        other = &e.args[0];
    }
    if (!sender) return false;
    return other->op == ExprOp::Literal ||
           (other->op == ExprOp::State && other->args.empty());
}

struct Walker {
    explicit Walker(const ContractIR& c) : contract(c) {}

    const ContractIR& contract;
    FunctionMeta out;
    std::map<std::string, Provenance> locals;

    void expr_effects(const Expr& e, Provenance& prov) {
        switch (e.op) {
            case ExprOp::Literal:
                break;
            case ExprOp::MsgSender:
                prov.from_sender = true;
                break;
            case ExprOp::MsgValue:
                break;
            case ExprOp::Local: {
                auto it = locals.find(e.name);
                if (it != locals.end()) prov = prov | it->second;
                break;
            }
            case ExprOp::State:
                out.reads.insert(e.name);
                prov.from_state = true;
                for (const auto& a : e.args) expr_effects(a, prov);
                break;
            default:
                for (const auto& a : e.args) expr_effects(a, prov);
                break;
        }
    }

    Provenance expr_provenance(const Expr& e) {
        Provenance p;
        expr_effects(e, p);
        return p;
    }

    void walk_fn(const FunctionDef& fn, bool privileged,
                 std::map<std::string, Provenance> frame_locals) {
        std::swap(locals, frame_locals);
        for (const auto& p : fn.params)
            locals[p.name] = Provenance{true, false, false};
        if (fn.guards.access) {
            (void)expr_provenance(*fn.guards.access);
            privileged = true;
        }
        walk_block(fn.body, privileged);
        std::swap(locals, frame_locals);
    }

    void walk_block(const Block& body, bool privileged) {
        for (const auto& st : body) {
            switch (st.op) {
                case StmtOp::Require: {
                    (void)expr_provenance(st.cond_or_value);
                    if (privileged_sender_check(st.cond_or_value)) privileged = true;
                    break;
                }
                case StmtOp::Let:
                    locals[st.into] = expr_provenance(st.cond_or_value);
                    break;
                case StmtOp::ReadState: {
                    out.reads.insert(st.var);
                    Provenance p{false, false, true};
                    if (st.key) p = p | expr_provenance(*st.key);
                    locals[st.into] = p;
                    break;
                }
                case StmtOp::WriteState: {
                    if (st.key) (void)expr_provenance(*st.key);
                    (void)expr_provenance(st.cond_or_value);
                    out.writes.insert(st.var);
                    auto [it, inserted] = out.write_guarded.emplace(st.var, privileged);
                    if (!inserted) it->second = it->second && privileged;
                    break;
                }
                case StmtOp::Call: {
                    CallSiteMeta site;
                    site.def_fn = current_fn;
                    site.ordinal = st.ordinal;
                    site.static_call = st.static_call;
                    site.target_kind = classify(expr_provenance(st.target));
                    out.call_sites.push_back(site);
                    for (const auto& a : st.call_args) (void)expr_provenance(a);
                    if (st.call_value) (void)expr_provenance(*st.call_value);
                    if (!st.static_call) out.is_view = false;
                    if (!st.into.empty()) locals[st.into] = Provenance{};
                    break;
                }
                case StmtOp::InternalCall: {
                    const FunctionDef* callee = contract.find_function(st.callee);
                    for (const auto& a : st.call_args) (void)expr_provenance(a);
                    std::string saved_fn = current_fn;
                    current_fn = callee->name;
                    walk_fn(*callee, privileged, {});
                    current_fn = saved_fn;
                    if (!st.into.empty()) locals[st.into] = Provenance{};
                    break;
                }
                case StmtOp::NativeTransfer: {
                    CallSiteMeta site;
                    site.def_fn = current_fn;
                    site.ordinal = st.ordinal;
                    site.native_transfer = true;
                    site.target_kind = classify(expr_provenance(st.target));
                    out.call_sites.push_back(site);
                    (void)expr_provenance(st.cond_or_value);
                    out.is_view = false;
                    break;
                }
                case StmtOp::Return:
                    if (st.has_return_value) (void)expr_provenance(st.cond_or_value);
                    break;
                case StmtOp::If: {
                    (void)expr_provenance(st.cond_or_value);
                    // A privileged check inside a branch does not dominate
                    // statements after the If; branch walks get a copy.
                    walk_block(st.then_block, privileged);
                    walk_block(st.else_block, privileged);
                    break;
                }
            }
        }
    }

    std::string current_fn;
};

}  // namespace meta_detail

/// Static facts for `fn`, a sound over-approximation of its dynamic behavior.
/// Raises LookupError for unknown functions.
inline FunctionMeta function_meta(const ContractIR& contract, std::string_view fn_name) {
    const FunctionDef* fn = contract.find_function(fn_name);
    if (!fn)
        throw LookupError("contract " + contract.address.to_hex() + " has no function '" +
                          std::string(fn_name) + "'");
    meta_detail::Walker w(contract);
    w.current_fn = fn->name;
    w.walk_fn(*fn, false, {});
    FunctionMeta meta = std::move(w.out);
    meta.non_reentrant = fn->guards.non_reentrant;
    meta.payable = fn->payable;
    meta.has_params = !fn->params.empty();
    if (!meta.writes.empty()) meta.is_view = false;
    meta.guarded_write = true;
    for (const auto& [var, guarded] : meta.write_guarded)
        meta.guarded_write = meta.guarded_write && guarded;
    return meta;
}

/// True iff every state write in `fn` is dominated by an access-control
/// guard or an equivalent msg.sender equality require. Vacuously true for
/// functions without writes.
inline bool is_access_controlled(const ContractIR& contract, std::string_view fn_name) {
    return function_meta(contract, fn_name).guarded_write;
}

struct AbiSpec {
    Selector selector;
    std::vector<ParamKind> param_kinds;
    bool payable{false};
};

/// ABI of a public function; internal functions have no external ABI.
inline AbiSpec abi_of(const ContractIR& contract, std::string_view fn_name) {
    const FunctionDef* fn = contract.find_function(fn_name);
    if (!fn)
        throw LookupError("contract " + contract.address.to_hex() + " has no function '" +
                          std::string(fn_name) + "'");
    if (fn->visibility != Visibility::Public)
        throw LookupError("function '" + std::string(fn_name) +
                          "' is internal and has no ABI");
    AbiSpec abi;
    abi.selector = fn->selector;
    for (const auto& p : fn->params) abi.param_kinds.push_back(p.kind);
    abi.payable = fn->payable;
    return abi;
}

/// Per-contract meta table with a site-classification index for the VM.
class ContractMetaTable {
  public:
    explicit ContractMetaTable(const ContractIR& contract) {
        for (const auto& fn : contract.functions) {
            FunctionMeta m = function_meta(contract, fn.name);
            for (const auto& site : m.call_sites)
                sites_.emplace(std::make_pair(site.def_fn, site.ordinal), site);
            metas_.emplace(fn.name, std::move(m));
        }
    }

    const FunctionMeta& of(const std::string& fn_name) const {
        auto it = metas_.find(fn_name);
        if (it == metas_.end())
            throw LookupError("no meta for function '" + fn_name + "'");
        return it->second;
    }

    const FunctionMeta* try_of(const std::string& fn_name) const {
        auto it = metas_.find(fn_name);
        return it == metas_.end() ? nullptr : &it->second;
    }

    /// Classification of the call/transfer site at `ordinal` inside `def_fn`.
    const CallSiteMeta& site(const std::string& def_fn, int ordinal) const {
        auto it = sites_.find({def_fn, ordinal});
        if (it == sites_.end())
            throw LookupError("no call site at ordinal " + std::to_string(ordinal) +
                              " of '" + def_fn + "'");
        return it->second;
    }

  private:
    std::map<std::string, FunctionMeta> metas_;
    std::map<std::pair<std::string, int>, CallSiteMeta> sites_;
};

}  // namespace rorscan
