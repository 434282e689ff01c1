#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rorscan/boundary.hpp"
#include "rorscan/store.hpp"

namespace rorscan {

enum class TraceOp { Read, Write, Invoke };

/// Storage cell reference carried by read/write records: the physical slot
/// plus the variable identity it was derived from, so dumps and reports can
/// name cells without reversing the slot derivation.
struct SlotRef {
    std::string var;
    std::optional<U256> key;
    U256 slot;
    U256 value;  // value read or written
};

/// Callee reference carried by invoke records.
struct InvokeDetail {
    Address callee;
    std::optional<Selector> selector;       // absent for native transfers
    std::optional<std::string> callee_fn;   // resolved function name, when known
    bool static_call{false};
    bool native_transfer{false};
};

/// One observed operation: a cross-referenced <<address, dapp>, operation>
/// record enriched with slot/callee detail, the emitting frame, the frame
/// depth and a monotone sequence number.
struct ContextRecord {
    TraceOp op{TraceOp::Read};
    Address target;            // contract operated on (callee for invokes)
    DAppIdentity target_dapp;
    SlotRef slot;              // read/write only
    InvokeDetail invoke;       // invoke only
    FnRef frame;               // public function whose frame emitted the event
    int depth{1};              // call-frame depth (entry function = 1)
    std::uint64_t seq{0};
};

/// A call or transfer statement site, identified by its defining function
/// and pre-order statement ordinal.
struct SiteRef {
    Address contract;
    std::string function;
    int ordinal{-1};

    friend bool operator==(const SiteRef&, const SiteRef&) = default;
    friend auto operator<=>(const SiteRef&, const SiteRef&) = default;
};

/// An execution point where control passes to an externally chosen target:
/// a call or native transfer whose target is parameter- or sender-derived.
struct HijackPoint {
    std::uint64_t seq{0};  // seq of the corresponding invoke record
    SiteRef site;
    Address recipient;
};

struct Outcome {
    bool success{false};
    std::optional<U256> return_value;
    std::string revert_reason;

    static Outcome ok(std::optional<U256> ret) { return {true, ret, {}}; }
    static Outcome reverted(std::string reason) { return {false, std::nullopt, std::move(reason)}; }
};

struct ExecutionTrace {
    std::vector<ContextRecord> records;
    Outcome outcome;
    std::map<SlotKey, U256> state_overlay;    // empty on revert
    std::map<Address, U256> balance_overlay;  // empty on revert
    std::vector<HijackPoint> hijack_points;
};

enum class HookDecision { Proceed, Abort };

class Executor;

/// Context handed to a hijack hook. The hook may run nested transactions
/// against the live in-flight state; a reverted nested transaction leaves
/// no effects, a successful one persists into the continuing execution.
class HijackContext {
  public:
    HijackContext(Executor& exec, const HijackPoint& point) : exec_(exec), point_(point) {}

    const HijackPoint& point() const { return point_; }
    ExecutionTrace run_nested(const TransactionRecord& tx);

  private:
    Executor& exec_;
    const HijackPoint& point_;
};

using HijackHook = std::function<HookDecision(HijackContext&)>;

namespace vm_detail {

struct RevertSignal {
    std::string reason;
};

struct AbortSignal {};

struct ReturnSignal {
    std::optional<U256> value;
};

struct LocalValue {
    U256 word;
    std::vector<std::uint8_t> blob;
    bool is_blob{false};
};

}  // namespace vm_detail

/// Deterministic transaction interpreter over the contract IR and a chain
/// store. One instance executes one transaction at a time; instances over
/// the same snapshot are independent and may run in parallel. Execution is
/// gas-free: nothing aborts on resource limits.
///
/// Revert semantics: a require failure, guard violation or nested-call
/// failure unwinds the whole transaction (IR v1 has no success-flag checks)
/// and rolls the overlays back to empty.
///
/// Reentrancy locks are per contract. A nested call into a non-reentrant
/// function of a locked contract reverts; transactions injected by a hijack
/// hook run with the outer locks still held, which is exactly what makes
/// cross-application reentry possible while same-contract reentry fails.
class Executor {
  public:
    Executor(const ChainStore& store, const BoundaryResolver& boundaries)
        : store_(store), boundaries_(boundaries) {}

    /// Replays one transaction against the snapshot plus a private overlay.
    ExecutionTrace replay(const TransactionRecord& tx) { return run(tx, nullptr); }

    /// Replay that pauses at every hijack point and runs the hook against
    /// the live state. Hook effects persist into the continuing execution.
    ExecutionTrace replay_with_hijack(const TransactionRecord& tx, HijackHook hook) {
        return run(tx, &hook);
    }

  private:
    friend class HijackContext;

    struct Frame {
        const ContractIR* contract{nullptr};
        const ContractMetaTable* meta{nullptr};
        Address self;
        std::string public_fn;  // attribution: internal calls share this
        Address sender;
        U256 value;
        bool static_ctx{false};
    };

    struct LockGuard {
        Executor& exec;
        Address addr;
        bool engaged{false};

        LockGuard(Executor& e, const Address& a, bool want) : exec(e), addr(a) {
            if (!want) return;
            if (!exec.locks_.insert(addr).second)
                throw vm_detail::RevertSignal{"reentrant call into locked contract " +
                                              addr.to_hex()};
            engaged = true;
        }
        ~LockGuard() {
            if (engaged) exec.locks_.erase(addr);
        }
    };

    ExecutionTrace run(const TransactionRecord& tx, const HijackHook* hook) {
        overlay_.clear();
        balance_overlay_.clear();
        locks_.clear();
        seq_ = 0;
        depth_ = 0;
        hook_ = hook;
        in_hook_ = false;
        ExecutionTrace trace;
        current_ = &trace;
        try {
            std::optional<U256> ret = execute_transaction(tx);
            trace.outcome = Outcome::ok(ret);
            trace.state_overlay = overlay_;
            trace.balance_overlay = balance_overlay_;
        } catch (const vm_detail::RevertSignal& r) {
            trace.outcome = Outcome::reverted(r.reason);
        } catch (const vm_detail::AbortSignal&) {
            trace.outcome = Outcome::reverted("aborted by hijack hook");
        }
        current_ = nullptr;
        return trace;
    }

    /// Nested transaction for hijack hooks: runs against the live overlay,
    /// with current locks held; reverted runs restore the pre-run state.
    ExecutionTrace run_nested(const TransactionRecord& tx) {
        auto overlay_cp = overlay_;
        auto balances_cp = balance_overlay_;
        ExecutionTrace nested;
        ExecutionTrace* saved = current_;
        int saved_depth = depth_;
        bool saved_in_hook = in_hook_;
        current_ = &nested;
        depth_ = 0;
        in_hook_ = true;  // no hooks inside hook-injected transactions
        try {
            std::optional<U256> ret = execute_transaction(tx);
            nested.outcome = Outcome::ok(ret);
            nested.state_overlay = overlay_;
            nested.balance_overlay = balance_overlay_;
        } catch (const vm_detail::RevertSignal& r) {
            nested.outcome = Outcome::reverted(r.reason);
            overlay_ = std::move(overlay_cp);
            balance_overlay_ = std::move(balances_cp);
        } catch (const ReplayError& e) {
            nested.outcome = Outcome::reverted(e.what());
            overlay_ = std::move(overlay_cp);
            balance_overlay_ = std::move(balances_cp);
        }
        current_ = saved;
        depth_ = saved_depth;
        in_hook_ = saved_in_hook;
        return nested;
    }

    std::optional<U256> execute_transaction(const TransactionRecord& tx) {
        const ContractEntry* ce = store_.contract(tx.to);
        if (!ce) throw LookupError("transaction target " + tx.to.to_hex() + " is not a known contract");
        auto sel = calldata_selector(tx.calldata);
        if (!sel) throw ReplayError("malformed calldata: missing selector");
        const FunctionDef* fn = ce->ir.find_by_selector(*sel);
        if (!fn)
            throw ReplayError("unknown selector " + sel->to_hex() + " on contract " +
                              tx.to.to_hex());
        std::vector<ArgValue> args = decode_calldata_args(*fn, tx.calldata);
        return call_public(tx.to, *fn, args, tx.sender, tx.value, /*static_call=*/false,
                           /*parent_static=*/false);
    }

    std::optional<U256> call_public(const Address& callee_addr, const FunctionDef& fn,
                                    const std::vector<ArgValue>& args, const Address& sender,
                                    const U256& value, bool static_call, bool parent_static) {
        const ContractEntry* ce = store_.contract(callee_addr);
        bool static_ctx = parent_static || static_call;
        if (!value.is_zero()) {
            if (static_ctx)
                throw vm_detail::RevertSignal{"value transfer in static context"};
            if (!fn.payable)
                throw vm_detail::RevertSignal{"non-payable function " + fn.name +
                                              " received value"};
            move_balance(sender, callee_addr, value);
        }

        Frame frame;
        frame.contract = &ce->ir;
        frame.meta = ce->meta.get();
        frame.self = callee_addr;
        frame.public_fn = fn.name;
        frame.sender = sender;
        frame.value = value;
        frame.static_ctx = static_ctx;

        LockGuard lock(*this, callee_addr, fn.guards.non_reentrant);
        ++depth_;
        struct DepthGuard {
            int& d;
            ~DepthGuard() { --d; }
        } dg{depth_};

        std::map<std::string, vm_detail::LocalValue> locals;
        bind_params(fn, args, locals);
        check_access_guard(fn, frame, locals);
        return execute_function_body(fn, frame, locals);
    }

    void bind_params(const FunctionDef& fn, const std::vector<ArgValue>& args,
                     std::map<std::string, vm_detail::LocalValue>& locals) {
        for (std::size_t i = 0; i < fn.params.size(); ++i) {
            vm_detail::LocalValue v;
            if (fn.params[i].kind == ParamKind::Bytes) {
                v.is_blob = true;
                v.blob = args[i].blob;
            } else {
                v.word = args[i].word;
            }
            locals[fn.params[i].name] = std::move(v);
        }
    }

    void check_access_guard(const FunctionDef& fn, Frame& frame,
                            std::map<std::string, vm_detail::LocalValue>& locals) {
        if (!fn.guards.access) return;
        if (eval(*fn.guards.access, frame, fn, locals).is_zero())
            throw vm_detail::RevertSignal{"access denied for " + fn.name};
    }

    std::optional<U256> execute_function_body(
        const FunctionDef& fn, Frame& frame,
        std::map<std::string, vm_detail::LocalValue>& locals) {
        try {
            execute_block(fn.body, frame, fn, locals);
        } catch (const vm_detail::ReturnSignal& r) {
            return r.value;
        }
        return std::nullopt;
    }

    void execute_block(const Block& body, Frame& frame, const FunctionDef& def_fn,
                       std::map<std::string, vm_detail::LocalValue>& locals) {
        for (const auto& st : body) execute_statement(st, frame, def_fn, locals);
    }

    void execute_statement(const Statement& st, Frame& frame, const FunctionDef& def_fn,
                           std::map<std::string, vm_detail::LocalValue>& locals) {
        switch (st.op) {
            case StmtOp::Require: {
                if (eval(st.cond_or_value, frame, def_fn, locals).is_zero())
                    throw vm_detail::RevertSignal{st.message};
                break;
            }
            case StmtOp::Let: {
                locals[st.into] = vm_detail::LocalValue{
                    eval(st.cond_or_value, frame, def_fn, locals), {}, false};
                break;
            }
            case StmtOp::ReadState: {
                std::optional<U256> key;
                if (st.key) key = eval(*st.key, frame, def_fn, locals);
                U256 v = read_state(frame, st.var, key);
                locals[st.into] = vm_detail::LocalValue{v, {}, false};
                break;
            }
            case StmtOp::WriteState: {
                std::optional<U256> key;
                if (st.key) key = eval(*st.key, frame, def_fn, locals);
                U256 v = eval(st.cond_or_value, frame, def_fn, locals);
                write_state(frame, st.var, key, v);
                break;
            }
            case StmtOp::Call:
                execute_call(st, frame, def_fn, locals);
                break;
            case StmtOp::InternalCall:
                execute_internal_call(st, frame, def_fn, locals);
                break;
            case StmtOp::NativeTransfer:
                execute_transfer(st, frame, def_fn, locals);
                break;
            case StmtOp::Return: {
                vm_detail::ReturnSignal r;
                if (st.has_return_value)
                    r.value = eval(st.cond_or_value, frame, def_fn, locals);
                throw r;
            }
            case StmtOp::If: {
                bool cond = !eval(st.cond_or_value, frame, def_fn, locals).is_zero();
                execute_block(cond ? st.then_block : st.else_block, frame, def_fn, locals);
                break;
            }
        }
    }

    void execute_call(const Statement& st, Frame& frame, const FunctionDef& def_fn,
                      std::map<std::string, vm_detail::LocalValue>& locals) {
        Address target = Address::from_word(eval(st.target, frame, def_fn, locals));
        Selector sel = st.selector ? *st.selector : Selector::of_name(st.callee);
        U256 value = st.call_value ? eval(*st.call_value, frame, def_fn, locals) : U256{};
        if (frame.static_ctx && !st.static_call && !value.is_zero())
            throw vm_detail::RevertSignal{"value call in static context"};

        std::vector<ArgValue> args;
        for (const auto& a : st.call_args) {
            ArgValue v;
            v.word = eval(a, frame, def_fn, locals);
            args.push_back(v);
        }

        const ContractEntry* callee_entry = store_.contract(target);
        std::optional<std::string> callee_fn_name;
        const FunctionDef* callee_fn = nullptr;
        if (callee_entry) {
            callee_fn = callee_entry->ir.find_by_selector(sel);
            if (callee_fn) callee_fn_name = callee_fn->name;
        }
        emit_invoke(frame, target, sel, callee_fn_name, st.static_call, false);
        std::uint64_t invoke_seq = seq_ - 1;

        std::optional<U256> ret;
        if (callee_entry) {
            const FunctionDef* entry_fn = callee_fn;
            if (!entry_fn) {
                entry_fn = callee_entry->ir.find_function("fallback");
                if (!entry_fn || entry_fn->visibility != Visibility::Public)
                    throw vm_detail::RevertSignal{"unknown selector " + sel.to_hex() +
                                                  " on contract " + target.to_hex()};
                if (!entry_fn->params.empty())
                    throw vm_detail::RevertSignal{"fallback of " + target.to_hex() +
                                                  " must take no parameters"};
                args.clear();
            }
            // Blob-typed callee params receive the raw 32-byte word.
            for (std::size_t i = 0; i < entry_fn->params.size() && i < args.size(); ++i) {
                if (entry_fn->params[i].kind == ParamKind::Bytes) {
                    Calldata w;
                    append_word(w, args[i].word);
                    args[i].is_blob = true;
                    args[i].blob.assign(w.begin(), w.end());
                }
            }
            if (args.size() != entry_fn->params.size())
                throw vm_detail::RevertSignal{"call to " + entry_fn->name + " with " +
                                              std::to_string(args.size()) + " args, expected " +
                                              std::to_string(entry_fn->params.size())};
            ret = call_public(target, *entry_fn, args, frame.self, value, st.static_call,
                              frame.static_ctx);
        } else {
            // Target without code: pure value movement, call succeeds empty.
            if (!value.is_zero()) {
                if (frame.static_ctx)
                    throw vm_detail::RevertSignal{"value transfer in static context"};
                move_balance(frame.self, target, value);
            }
        }
        if (!st.into.empty())
            locals[st.into] = vm_detail::LocalValue{ret.value_or(U256{}), {}, false};

        maybe_hijack(frame, def_fn, st.ordinal, invoke_seq, target);
    }

    void execute_internal_call(const Statement& st, Frame& frame, const FunctionDef& def_fn,
                               std::map<std::string, vm_detail::LocalValue>& locals) {
        const FunctionDef* callee = frame.contract->find_function(st.callee);
        if (!callee)
            throw vm_detail::RevertSignal{"internal call to undefined function " + st.callee};
        std::vector<ArgValue> args;
        for (const auto& a : st.call_args) {
            ArgValue v;
            v.word = eval(a, frame, def_fn, locals);
            args.push_back(v);
        }
        // Internal calls run in the caller's frame: same msg.sender/value,
        // same attribution, no invoke record, fresh local scope.
        LockGuard lock(*this, frame.self, callee->guards.non_reentrant);
        std::map<std::string, vm_detail::LocalValue> callee_locals;
        bind_params(*callee, args, callee_locals);
        check_access_guard(*callee, frame, callee_locals);
        std::optional<U256> ret;
        try {
            execute_block(callee->body, frame, *callee, callee_locals);
        } catch (const vm_detail::ReturnSignal& r) {
            ret = r.value;
        }
        if (!st.into.empty())
            locals[st.into] = vm_detail::LocalValue{ret.value_or(U256{}), {}, false};
    }

    void execute_transfer(const Statement& st, Frame& frame, const FunctionDef& def_fn,
                          std::map<std::string, vm_detail::LocalValue>& locals) {
        if (frame.static_ctx)
            throw vm_detail::RevertSignal{"native transfer in static context"};
        Address target = Address::from_word(eval(st.target, frame, def_fn, locals));
        U256 amount = eval(st.cond_or_value, frame, def_fn, locals);
        emit_invoke(frame, target, std::nullopt, std::nullopt, false, true);
        std::uint64_t invoke_seq = seq_ - 1;

        const ContractEntry* recipient = store_.contract(target);
        const FunctionDef* fallback =
            recipient ? recipient->ir.find_function("fallback") : nullptr;
        if (recipient && fallback && fallback->visibility == Visibility::Public) {
            call_public(target, *fallback, {}, frame.self, amount, false, frame.static_ctx);
        } else {
            move_balance(frame.self, target, amount);
        }
        maybe_hijack(frame, def_fn, st.ordinal, invoke_seq, target);
    }

    void maybe_hijack(Frame& frame, const FunctionDef& def_fn, int ordinal,
                      std::uint64_t invoke_seq, const Address& recipient) {
        const CallSiteMeta& site = frame.meta->site(def_fn.name, ordinal);
        if (site.target_kind != TargetKind::ParameterDerived &&
            site.target_kind != TargetKind::SenderDerived)
            return;
        if (site.static_call) return;
        current_->hijack_points.push_back(
            HijackPoint{invoke_seq, SiteRef{frame.self, def_fn.name, ordinal}, recipient});
        if (hook_ && *hook_ && !in_hook_) {
            HijackContext ctx(*this, current_->hijack_points.back());
            if ((*hook_)(ctx) == HookDecision::Abort) throw vm_detail::AbortSignal{};
        }
    }

    // ---- state access ----

    const StateVar& resolve_var(Frame& frame, const std::string& var) {
        const StateVar* sv = frame.contract->find_var(var);
        if (!sv)
            throw vm_detail::RevertSignal{"undeclared state variable " + var};
        return *sv;
    }

    U256 slot_of(const StateVar& sv, const std::optional<U256>& key) {
        return key ? map_element_slot(sv.slot, *key) : sv.slot;
    }

    U256 read_state(Frame& frame, const std::string& var, const std::optional<U256>& key) {
        const StateVar& sv = resolve_var(frame, var);
        U256 slot = slot_of(sv, key);
        U256 value;
        auto it = overlay_.find(SlotKey{frame.self, slot});
        if (it != overlay_.end())
            value = it->second;
        else
            value = store_.storage(frame.self, slot);  // zero when absent
        emit_rw(TraceOp::Read, frame, var, key, slot, value);
        return value;
    }

    void write_state(Frame& frame, const std::string& var, const std::optional<U256>& key,
                     const U256& value) {
        if (frame.static_ctx)
            throw vm_detail::RevertSignal{"state write in static context"};
        const StateVar& sv = resolve_var(frame, var);
        U256 slot = slot_of(sv, key);
        overlay_[SlotKey{frame.self, slot}] = value;
        emit_rw(TraceOp::Write, frame, var, key, slot, value);
    }

    U256 account_balance(const Address& addr) {
        auto it = balance_overlay_.find(addr);
        return it != balance_overlay_.end() ? it->second : store_.balance(addr);
    }

    void move_balance(const Address& from, const Address& to, const U256& amount) {
        if (amount.is_zero()) return;
        U256 src = account_balance(from);
        if (src < amount)
            throw vm_detail::RevertSignal{"insufficient balance in " + from.to_hex()};
        balance_overlay_[from] = src - amount;
        balance_overlay_[to] = account_balance(to) + amount;
    }

    // ---- record emission ----

    void emit_rw(TraceOp op, Frame& frame, const std::string& var,
                 const std::optional<U256>& key, const U256& slot, const U256& value) {
        ContextRecord rec;
        rec.op = op;
        rec.target = frame.self;
        rec.target_dapp = boundaries_.resolve(frame.self);
        rec.slot = SlotRef{var, key, slot, value};
        rec.frame = FnRef{frame.self, frame.public_fn};
        rec.depth = depth_;
        rec.seq = seq_++;
        current_->records.push_back(std::move(rec));
    }

    void emit_invoke(Frame& frame, const Address& callee, std::optional<Selector> sel,
                     std::optional<std::string> callee_fn, bool static_call, bool native) {
        ContextRecord rec;
        rec.op = TraceOp::Invoke;
        rec.target = callee;
        rec.target_dapp = boundaries_.resolve(callee);
        rec.invoke = InvokeDetail{callee, sel, std::move(callee_fn), static_call, native};
        rec.frame = FnRef{frame.self, frame.public_fn};
        rec.depth = depth_;
        rec.seq = seq_++;
        current_->records.push_back(std::move(rec));
    }

    // ---- expression evaluation ----

    U256 eval(const Expr& e, Frame& frame, const FunctionDef& def_fn,
              std::map<std::string, vm_detail::LocalValue>& locals) {
        auto truthy = [](const U256& v) { return !v.is_zero(); };
        switch (e.op) {
            case ExprOp::Literal:
                return e.literal;
            case ExprOp::MsgSender:
                return frame.sender.to_word();
            case ExprOp::MsgValue:
                return frame.value;
            case ExprOp::Local: {
                auto it = locals.find(e.name);
                if (it == locals.end())
                    throw vm_detail::RevertSignal{"local '" + e.name +
                                                  "' not set on this path in " + def_fn.name};
                if (it->second.is_blob)
                    throw vm_detail::RevertSignal{"bytes parameter '" + e.name +
                                                  "' used in an expression"};
                return it->second.word;
            }
            case ExprOp::State: {
                std::optional<U256> key;
                if (!e.args.empty()) key = eval(e.args[0], frame, def_fn, locals);
                return read_state(frame, e.name, key);
            }
            case ExprOp::Not:
                return truthy(eval(e.args[0], frame, def_fn, locals)) ? U256{} : U256::one();
            default:
                break;
        }
        U256 a = eval(e.args[0], frame, def_fn, locals);
        // Short-circuit booleans before evaluating the right side.
        if (e.op == ExprOp::And && !truthy(a)) return U256{};
        if (e.op == ExprOp::Or && truthy(a)) return U256::one();
        U256 b = eval(e.args[1], frame, def_fn, locals);
        switch (e.op) {
            case ExprOp::Add: return a + b;
            case ExprOp::Sub: return a - b;
            case ExprOp::Mul: return a * b;
            case ExprOp::Div: return a / b;
            case ExprOp::Mod: return a % b;
            case ExprOp::Eq: return a == b ? U256::one() : U256{};
            case ExprOp::Ne: return a != b ? U256::one() : U256{};
            case ExprOp::Lt: return a < b ? U256::one() : U256{};
            case ExprOp::Gt: return a > b ? U256::one() : U256{};
            case ExprOp::Le: return a <= b ? U256::one() : U256{};
            case ExprOp::Ge: return a >= b ? U256::one() : U256{};
            case ExprOp::And: return truthy(b) ? U256::one() : U256{};
            case ExprOp::Or: return truthy(b) ? U256::one() : U256{};
            case ExprOp::Shl: return b.fits_u64() && b.low64() < 256 ? a << (unsigned)b.low64() : U256{};
            case ExprOp::Shr: return b.fits_u64() && b.low64() < 256 ? a >> (unsigned)b.low64() : U256{};
            case ExprOp::BitAnd: return a & b;
            case ExprOp::BitOr: return a | b;
            default:
                throw vm_detail::RevertSignal{"unsupported expression"};
        }
    }

    const ChainStore& store_;
    const BoundaryResolver& boundaries_;
    std::map<SlotKey, U256> overlay_;
    std::map<Address, U256> balance_overlay_;
    std::set<Address> locks_;
    ExecutionTrace* current_{nullptr};
    std::uint64_t seq_{0};
    int depth_{0};
    const HijackHook* hook_{nullptr};
    bool in_hook_{false};
};

inline ExecutionTrace HijackContext::run_nested(const TransactionRecord& tx) {
    return exec_.run_nested(tx);
}

/// Storage cells written strictly after `after_seq`. Reverted traces have
/// no surviving writes, so the answer is empty.
inline std::set<SlotKey> state_diff(const ExecutionTrace& trace, std::uint64_t after_seq) {
    std::set<SlotKey> out;
    if (!trace.outcome.success) return out;
    for (const auto& r : trace.records)
        if (r.op == TraceOp::Write && r.seq > after_seq)
            out.insert(SlotKey{r.target, r.slot.slot});
    return out;
}

/// All storage cells carried by read records.
inline std::set<SlotKey> reads_of(const ExecutionTrace& trace) {
    std::set<SlotKey> out;
    for (const auto& r : trace.records)
        if (r.op == TraceOp::Read) out.insert(SlotKey{r.target, r.slot.slot});
    return out;
}

/// Line format of the --trace-out event log: one record per line.
inline nlohmann::json record_to_json(const ContextRecord& r) {
    nlohmann::json j;
    j["seq"] = r.seq;
    j["depth"] = r.depth;
    j["op"] = r.op == TraceOp::Read ? "read" : r.op == TraceOp::Write ? "write" : "invoke";
    j["target"] = {{"address", r.target.to_hex()}, {"dapp", r.target_dapp.label()}};
    j["frame"] = {{"address", r.frame.contract.to_hex()}, {"fn", r.frame.name}};
    if (r.op == TraceOp::Invoke) {
        nlohmann::json d;
        d["callee"] = r.invoke.callee.to_hex();
        if (r.invoke.selector) d["selector"] = r.invoke.selector->to_hex();
        if (r.invoke.callee_fn) d["fn"] = *r.invoke.callee_fn;
        d["static"] = r.invoke.static_call;
        d["native"] = r.invoke.native_transfer;
        j["detail"] = d;
    } else {
        nlohmann::json d;
        d["var"] = r.slot.var;
        if (r.slot.key) d["key"] = u256_to_hex(*r.slot.key);
        d["slot"] = u256_to_hex(r.slot.slot);
        d["value"] = u256_to_hex(r.slot.value);
        j["detail"] = d;
    }
    return j;
}

}  // namespace rorscan
