#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rorscan/types.hpp"

namespace rorscan {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Expressions
//
// Expressions are pure word computations over locals, parameters, contract
// state, msg.sender, msg.value and literals. The document form is a prefix
// S-expression string, e.g. "(div (state balance) (state totalToken))".
// ---------------------------------------------------------------------------

enum class ExprOp {
    Literal,     // constant word
    Local,       // local or parameter, by name
    MsgSender,
    MsgValue,
    State,       // state read: (state var) or (state var key-expr)
    Add, Sub, Mul, Div, Mod,
    Eq, Ne, Lt, Gt, Le, Ge,
    And, Or, Not,
    Shl, Shr, BitAnd, BitOr,
};

struct Expr {
    ExprOp op{ExprOp::Literal};
    U256 literal;                       // Literal
    std::string name;                   // Local / State variable name
    std::vector<Expr> args;             // operands; State key is args[0]
};

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Statement;
using Block = std::vector<Statement>;

enum class StmtOp {
    Require,        // cond, message
    Let,            // name := expr
    ReadState,      // into := state var[key]
    WriteState,     // state var[key] := expr
    Call,           // external call: target word, selector, args, value, static
    InternalCall,   // same-contract call by name; runs in the caller's frame
    NativeTransfer, // native funds to target expression
    Return,         // optional value
    If,             // cond, then-block, else-block
};

struct Statement {
    StmtOp op{StmtOp::Return};
    Expr cond_or_value;            // Require cond | Let/Write value | Return value | If cond | Transfer amount
    std::string message;           // Require revert reason
    std::string var;               // ReadState/WriteState state var; Let/ReadState destination is `into`
    std::optional<Expr> key;       // map key for ReadState/WriteState
    std::string into;              // destination local for Let/ReadState/Call/InternalCall
    Expr target;                   // Call target address / NativeTransfer recipient
    std::string callee;            // Call/InternalCall function name ("" when selector given)
    std::optional<Selector> selector;  // explicit selector override for Call
    std::vector<Expr> call_args;
    std::optional<Expr> call_value;    // funds attached to Call (default 0)
    bool static_call{false};
    Block then_block;
    Block else_block;
    bool has_return_value{false};

    /// Pre-order ordinal within the defining function's statement tree;
    /// assigned at parse time and used as the call-site identity.
    int ordinal{-1};
};

// ---------------------------------------------------------------------------
// Functions and contracts
// ---------------------------------------------------------------------------

enum class ParamKind { Uint256, AddressParam, Bool, Bytes };

struct Param {
    std::string name;
    ParamKind kind{ParamKind::Uint256};
};

enum class Visibility { Public, Internal };

struct Guards {
    bool non_reentrant{false};
    std::optional<Expr> access;  // allowed-caller expression, checked at entry
};

struct FunctionDef {
    std::string name;
    Selector selector;
    std::vector<Param> params;
    Visibility visibility{Visibility::Public};
    bool payable{false};
    Guards guards;
    Block body;
};

enum class StateVarKind { Scalar, AddressKeyedMap };

struct StateVar {
    std::string name;
    U256 slot;
    StateVarKind kind{StateVarKind::Scalar};
};

struct ContractIR {
    Address address;
    std::vector<StateVar> state_vars;
    std::vector<FunctionDef> functions;

    const StateVar* find_var(std::string_view name) const {
        for (const auto& v : state_vars)
            if (v.name == name) return &v;
        return nullptr;
    }

    const FunctionDef* find_function(std::string_view name) const {
        for (const auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }

    const FunctionDef* find_by_selector(Selector sel) const {
        for (const auto& f : functions)
            if (f.visibility == Visibility::Public && f.selector == sel) return &f;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// S-expression parsing
// ---------------------------------------------------------------------------

namespace sexpr {

struct Node {
    bool is_list{false};
    std::string atom;
    std::vector<Node> items;
};

inline Node parse(std::string_view src, const std::string& ctx) {
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' ||
                                    src[pos] == '\n' || src[pos] == '\r'))
            ++pos;
    };
    auto fail = [&](const std::string& why) -> void {
        throw ParseError(ctx + ": " + why + " in expression '" + std::string(src) + "'");
    };

    std::function<Node()> parse_one = [&]() -> Node {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end");
        if (src[pos] == '(') {
            ++pos;
            Node n;
            n.is_list = true;
            while (true) {
                skip_ws();
                if (pos >= src.size()) fail("missing ')'");
                if (src[pos] == ')') {
                    ++pos;
                    break;
                }
                n.items.push_back(parse_one());
            }
            if (n.items.empty()) fail("empty list");
            return n;
        }
        if (src[pos] == ')') fail("unexpected ')'");
        std::size_t start = pos;
        while (pos < src.size() && src[pos] != ' ' && src[pos] != '\t' &&
               src[pos] != '\n' && src[pos] != '\r' && src[pos] != '(' &&
               src[pos] != ')')
            ++pos;
        Node n;
        n.atom = std::string(src.substr(start, pos - start));
        return n;
    };

    Node root = parse_one();
    skip_ws();
    if (pos != src.size()) fail("trailing input");
    return root;
}

}  // namespace sexpr

// ---------------------------------------------------------------------------
// IR document parsing
// ---------------------------------------------------------------------------

namespace ir_detail {

/// Identifier binding environment used while parsing one function.
struct BindEnv {
    const ContractIR* contract{nullptr};
    std::set<std::string> named;  // params + locals bound so far
    std::string ctx;

    bool is_bound(const std::string& n) const { return named.count(n) > 0; }
};

inline bool looks_numeric(const std::string& a) {
    if (a.empty()) return false;
    if (a.size() > 2 && a[0] == '0' && (a[1] == 'x' || a[1] == 'X')) return true;
    return a[0] >= '0' && a[0] <= '9';
}

inline Expr build_expr(const sexpr::Node& n, BindEnv& env);

inline Expr build_nary(ExprOp op, const sexpr::Node& n, BindEnv& env,
                       std::size_t min_args, std::size_t max_args) {
    std::size_t argc = n.items.size() - 1;
    if (argc < min_args || argc > max_args)
        throw ParseError(env.ctx + ": operator '" + n.items[0].atom +
                         "' takes " + std::to_string(min_args) +
                         (max_args == min_args ? "" : ".." + std::to_string(max_args)) +
                         " operands");
    Expr e;
    e.op = op;
    for (std::size_t i = 1; i < n.items.size(); ++i)
        e.args.push_back(build_expr(n.items[i], env));
    return e;
}

inline Expr build_expr(const sexpr::Node& n, BindEnv& env) {
    if (!n.is_list) {
        const std::string& a = n.atom;
        Expr e;
        if (a == "msg.sender") {
            e.op = ExprOp::MsgSender;
        } else if (a == "msg.value") {
            e.op = ExprOp::MsgValue;
        } else if (a == "true") {
            e.op = ExprOp::Literal;
            e.literal = U256::one();
        } else if (a == "false") {
            e.op = ExprOp::Literal;
        } else if (looks_numeric(a)) {
            e.op = ExprOp::Literal;
            try {
                e.literal = u256_from_string(a);
            } catch (const std::invalid_argument& ex) {
                throw ParseError(env.ctx + ": " + ex.what());
            }
        } else {
            if (!env.is_bound(a))
                throw ParseError(env.ctx + ": unbound identifier '" + a +
                                 "' (locals and parameters only; state reads use (state " +
                                 a + "))");
            e.op = ExprOp::Local;
            e.name = a;
        }
        return e;
    }

    const std::string& head = n.items[0].atom;
    if (head == "state") {
        if (n.items.size() < 2 || n.items.size() > 3 || n.items[1].is_list)
            throw ParseError(env.ctx + ": (state var [key]) expected");
        const std::string& var = n.items[1].atom;
        const StateVar* sv = env.contract->find_var(var);
        if (!sv)
            throw ParseError(env.ctx + ": unbound identifier: state variable '" + var +
                             "' is not declared");
        Expr e;
        e.op = ExprOp::State;
        e.name = var;
        if (n.items.size() == 3) {
            if (sv->kind != StateVarKind::AddressKeyedMap)
                throw ParseError(env.ctx + ": scalar state variable '" + var +
                                 "' does not take a key");
            e.args.push_back(build_expr(n.items[2], env));
        } else if (sv->kind == StateVarKind::AddressKeyedMap) {
            throw ParseError(env.ctx + ": map state variable '" + var + "' needs a key");
        }
        return e;
    }

    static const std::map<std::string, ExprOp> binops = {
        {"add", ExprOp::Add},   {"sub", ExprOp::Sub},     {"mul", ExprOp::Mul},
        {"div", ExprOp::Div},   {"mod", ExprOp::Mod},     {"eq", ExprOp::Eq},
        {"ne", ExprOp::Ne},     {"lt", ExprOp::Lt},       {"gt", ExprOp::Gt},
        {"le", ExprOp::Le},     {"ge", ExprOp::Ge},       {"and", ExprOp::And},
        {"or", ExprOp::Or},     {"shl", ExprOp::Shl},     {"shr", ExprOp::Shr},
        {"bitand", ExprOp::BitAnd}, {"bitor", ExprOp::BitOr},
    };
    if (auto it = binops.find(head); it != binops.end())
        return build_nary(it->second, n, env, 2, 2);
    if (head == "not") return build_nary(ExprOp::Not, n, env, 1, 1);

    throw ParseError(env.ctx + ": unknown operator '" + head + "'");
}

inline Expr parse_expr(const json& j, BindEnv& env) {
    if (j.is_string())
        return build_expr(sexpr::parse(j.get<std::string>(), env.ctx), env);
    if (j.is_number_unsigned()) {
        Expr e;
        e.op = ExprOp::Literal;
        e.literal = U256{j.get<std::uint64_t>()};
        return e;
    }
    throw ParseError(env.ctx + ": expression must be an S-expression string or unsigned integer");
}

}  // namespace ir_detail

/// Parses one contract IR document. All state variables and locals referenced
/// by function bodies must be declared; violations raise ParseError.
inline ContractIR parse_contract(const json& doc);

namespace ir_detail {

inline ParamKind param_kind_from(const std::string& s, const std::string& ctx) {
    if (s == "uint256" || s == "uint") return ParamKind::Uint256;
    if (s == "address") return ParamKind::AddressParam;
    if (s == "bool") return ParamKind::Bool;
    if (s == "bytes") return ParamKind::Bytes;
    throw ParseError(ctx + ": unknown parameter type '" + s + "'");
}

inline const char* param_kind_name(ParamKind k) {
    switch (k) {
        case ParamKind::Uint256: return "uint256";
        case ParamKind::AddressParam: return "address";
        case ParamKind::Bool: return "bool";
        case ParamKind::Bytes: return "bytes";
    }
    return "?";
}

inline Statement parse_statement(const json& j, BindEnv& env, int& ordinal);

inline Block parse_block(const json& j, BindEnv& env, int& ordinal) {
    if (!j.is_array())
        throw ParseError(env.ctx + ": statement block must be an array");
    Block b;
    for (const auto& s : j) b.push_back(parse_statement(s, env, ordinal));
    return b;
}

inline Statement parse_statement(const json& j, BindEnv& env, int& ordinal) {
    if (!j.is_object() || !j.contains("op"))
        throw ParseError(env.ctx + ": statement must be an object with an 'op' field");
    const std::string op = j.at("op").get<std::string>();
    Statement st;
    st.ordinal = ordinal++;

    auto bind_into = [&](const std::string& field) {
        std::string name = j.at(field).get<std::string>();
        env.named.insert(name);
        return name;
    };
    auto state_var = [&](const std::string& name) -> const StateVar* {
        const StateVar* sv = env.contract->find_var(name);
        if (!sv)
            throw ParseError(env.ctx + ": unbound identifier: state variable '" + name +
                             "' is not declared");
        return sv;
    };
    auto parse_key_field = [&](const StateVar* sv) -> std::optional<Expr> {
        if (j.contains("key")) {
            if (sv->kind != StateVarKind::AddressKeyedMap)
                throw ParseError(env.ctx + ": scalar state variable '" + sv->name +
                                 "' does not take a key");
            return parse_expr(j.at("key"), env);
        }
        if (sv->kind == StateVarKind::AddressKeyedMap)
            throw ParseError(env.ctx + ": map state variable '" + sv->name + "' needs a key");
        return std::nullopt;
    };

    if (op == "require") {
        st.op = StmtOp::Require;
        st.cond_or_value = parse_expr(j.at("cond"), env);
        st.message = j.value("msg", std::string("requirement failed"));
    } else if (op == "let") {
        st.op = StmtOp::Let;
        st.cond_or_value = parse_expr(j.at("value"), env);
        st.into = bind_into("name");
    } else if (op == "read") {
        st.op = StmtOp::ReadState;
        st.var = j.at("var").get<std::string>();
        st.key = parse_key_field(state_var(st.var));
        st.into = bind_into("into");
    } else if (op == "write") {
        st.op = StmtOp::WriteState;
        st.var = j.at("var").get<std::string>();
        st.key = parse_key_field(state_var(st.var));
        st.cond_or_value = parse_expr(j.at("value"), env);
    } else if (op == "call") {
        st.op = StmtOp::Call;
        st.target = parse_expr(j.at("target"), env);
        if (j.contains("selector"))
            st.selector = Selector::from_hex(j.at("selector").get<std::string>());
        else
            st.callee = j.at("fn").get<std::string>();
        for (const auto& a : j.value("args", json::array()))
            st.call_args.push_back(parse_expr(a, env));
        if (j.contains("value")) st.call_value = parse_expr(j.at("value"), env);
        st.static_call = j.value("static", false);
        if (j.contains("into")) st.into = bind_into("into");
    } else if (op == "icall") {
        st.op = StmtOp::InternalCall;
        st.callee = j.at("fn").get<std::string>();
        for (const auto& a : j.value("args", json::array()))
            st.call_args.push_back(parse_expr(a, env));
        if (j.contains("into")) st.into = bind_into("into");
    } else if (op == "transfer") {
        st.op = StmtOp::NativeTransfer;
        st.target = parse_expr(j.at("to"), env);
        st.cond_or_value = parse_expr(j.at("amount"), env);
    } else if (op == "return") {
        st.op = StmtOp::Return;
        if (j.contains("value")) {
            st.cond_or_value = parse_expr(j.at("value"), env);
            st.has_return_value = true;
        }
    } else if (op == "if") {
        st.op = StmtOp::If;
        st.cond_or_value = parse_expr(j.at("cond"), env);
        // Bindings made inside a branch stay visible to later statements;
        // execution guards against reading ones the taken path never set.
        st.then_block = parse_block(j.at("then"), env, ordinal);
        if (j.contains("else")) st.else_block = parse_block(j.at("else"), env, ordinal);
    } else {
        throw ParseError(env.ctx + ": unknown statement op '" + op + "'");
    }
    return st;
}

inline void check_icall_acyclic(const ContractIR& c) {
    // IR v1 has no loops; reject internal-call recursion up front.
    enum class Mark { None, InProgress, Done };
    std::map<std::string, Mark> marks;
    std::function<void(const FunctionDef&)> visit_fn;
    std::function<void(const Block&, const FunctionDef&)> visit_block =
        [&](const Block& b, const FunctionDef& f) {
            for (const auto& st : b) {
                if (st.op == StmtOp::InternalCall) {
                    const FunctionDef* callee = c.find_function(st.callee);
                    if (!callee)
                        throw ParseError("contract " + c.address.to_hex() + ": function '" +
                                         f.name + "' calls undefined function '" + st.callee + "'");
                    visit_fn(*callee);
                } else if (st.op == StmtOp::If) {
                    visit_block(st.then_block, f);
                    visit_block(st.else_block, f);
                }
            }
        };
    visit_fn = [&](const FunctionDef& f) {
        Mark& m = marks[f.name];
        if (m == Mark::Done) return;
        if (m == Mark::InProgress)
            throw ParseError("contract " + c.address.to_hex() +
                             ": recursive internal call through '" + f.name + "'");
        m = Mark::InProgress;
        visit_block(f.body, f);
        m = Mark::Done;
    };
    for (const auto& f : c.functions) visit_fn(f);
}

}  // namespace ir_detail

inline ContractIR parse_contract(const json& doc) {
    using namespace ir_detail;
    if (!doc.is_object()) throw ParseError("contract IR must be a JSON object");

    ContractIR c;
    if (doc.contains("address"))
        c.address = Address::from_hex(doc.at("address").get<std::string>());

    std::set<std::string> var_names;
    std::set<std::string> slot_hexes;
    for (const auto& v : doc.value("state_vars", json::array())) {
        StateVar sv;
        sv.name = v.at("name").get<std::string>();
        const auto& slot = v.at("slot");
        sv.slot = slot.is_string() ? u256_from_string(slot.get<std::string>())
                                   : U256{slot.get<std::uint64_t>()};
        std::string kind = v.value("kind", std::string("scalar"));
        if (kind == "scalar") {
            sv.kind = StateVarKind::Scalar;
        } else if (kind == "map") {
            sv.kind = StateVarKind::AddressKeyedMap;
        } else {
            throw ParseError("contract " + c.address.to_hex() + ": unknown state var kind '" +
                             kind + "'");
        }
        if (!var_names.insert(sv.name).second)
            throw ParseError("contract " + c.address.to_hex() + ": duplicate state var '" +
                             sv.name + "'");
        if (!slot_hexes.insert(u256_to_hex(sv.slot)).second)
            throw ParseError("contract " + c.address.to_hex() + ": duplicate slot for '" +
                             sv.name + "'");
        c.state_vars.push_back(std::move(sv));
    }

    std::set<std::string> fn_names;
    std::set<std::string> selectors;
    for (const auto& f : doc.value("functions", json::array())) {
        FunctionDef fn;
        fn.name = f.at("name").get<std::string>();
        if (!fn_names.insert(fn.name).second)
            throw ParseError("contract " + c.address.to_hex() + ": duplicate function '" +
                             fn.name + "'");
        fn.selector = f.contains("selector")
                          ? Selector::from_hex(f.at("selector").get<std::string>())
                          : Selector::of_name(fn.name);
        std::string vis = f.value("visibility", std::string("public"));
        if (vis == "public") {
            fn.visibility = Visibility::Public;
        } else if (vis == "internal") {
            fn.visibility = Visibility::Internal;
        } else {
            throw ParseError("function " + fn.name + ": unknown visibility '" + vis + "'");
        }
        if (fn.visibility == Visibility::Public &&
            !selectors.insert(fn.selector.to_hex()).second)
            throw ParseError("contract " + c.address.to_hex() + ": selector collision on '" +
                             fn.name + "'");
        fn.payable = f.value("payable", false);

        BindEnv env;
        env.contract = &c;
        env.ctx = "contract " + c.address.to_hex() + ", function " + fn.name;
        for (const auto& p : f.value("params", json::array())) {
            Param param;
            param.name = p.at("name").get<std::string>();
            param.kind = param_kind_from(p.at("type").get<std::string>(), env.ctx);
            if (!env.named.insert(param.name).second)
                throw ParseError(env.ctx + ": duplicate parameter '" + param.name + "'");
            fn.params.push_back(std::move(param));
        }
        for (const auto& g : f.value("guards", json::array())) {
            if (g.is_string()) {
                if (g.get<std::string>() == "nonreentrant")
                    fn.guards.non_reentrant = true;
                else
                    throw ParseError(env.ctx + ": unknown guard '" + g.get<std::string>() + "'");
            } else if (g.is_object() && g.contains("access")) {
                fn.guards.access = parse_expr(g.at("access"), env);
            } else {
                throw ParseError(env.ctx + ": guard must be \"nonreentrant\" or {\"access\": expr}");
            }
        }
        int ordinal = 0;
        fn.body = parse_block(f.value("body", json::array()), env, ordinal);
        c.functions.push_back(std::move(fn));
    }

    ir_detail::check_icall_acyclic(c);
    return c;
}

// ---------------------------------------------------------------------------
// Calldata
//
// Canonical calldata is a 4-byte selector followed by one 32-byte word per
// uint256/address/bool parameter; a bytes parameter is a length word followed
// by its content padded to whole words. No dynamic offsets.
// ---------------------------------------------------------------------------

struct ArgValue {
    U256 word;                       // uint/address/bool value
    std::vector<std::uint8_t> blob;  // bytes value
    bool is_blob{false};
};

using Calldata = std::vector<std::uint8_t>;

inline void append_word(Calldata& out, const U256& w) {
    for (int i = 31; i >= 0; --i)
        out.push_back((std::uint8_t)((w >> (unsigned)(8 * i)).low64() & 0xff));
}

inline U256 word_at(const Calldata& data, std::size_t offset) {
    U256 w;
    for (std::size_t i = 0; i < 32; ++i)
        w = (w << 8) | U256{(std::uint64_t)data[offset + i]};
    return w;
}

inline Calldata encode_calldata(const FunctionDef& fn, const std::vector<ArgValue>& args) {
    if (args.size() != fn.params.size())
        throw ParseError("function " + fn.name + " expects " +
                         std::to_string(fn.params.size()) + " arguments, got " +
                         std::to_string(args.size()));
    Calldata out(fn.selector.bytes.begin(), fn.selector.bytes.end());
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (fn.params[i].kind == ParamKind::Bytes) {
            const auto& blob = args[i].blob;
            append_word(out, U256{(std::uint64_t)blob.size()});
            for (std::size_t b = 0; b < blob.size(); ++b) out.push_back(blob[b]);
            while (out.size() % 32 != 4) out.push_back(0);
        } else {
            append_word(out, args[i].word);
        }
    }
    return out;
}

inline std::vector<ArgValue> decode_calldata_args(const FunctionDef& fn, const Calldata& data) {
    std::size_t pos = 4;
    std::vector<ArgValue> args;
    auto need = [&](std::size_t n) {
        if (pos + n > data.size())
            throw ReplayError("malformed calldata for " + fn.name + ": expected " +
                              std::to_string(n) + " more bytes at offset " +
                              std::to_string(pos));
    };
    for (const auto& p : fn.params) {
        ArgValue v;
        if (p.kind == ParamKind::Bytes) {
            need(32);
            U256 len = word_at(data, pos);
            pos += 32;
            if (!len.fits_u64() || len.low64() > data.size())
                throw ReplayError("malformed calldata for " + fn.name + ": bad bytes length");
            std::size_t n = (std::size_t)len.low64();
            std::size_t padded = (n + 31) / 32 * 32;
            need(padded);
            v.is_blob = true;
            v.blob.assign(data.begin() + (long)pos, data.begin() + (long)(pos + n));
            pos += padded;
        } else {
            need(32);
            v.word = word_at(data, pos);
            pos += 32;
        }
        args.push_back(std::move(v));
    }
    if (pos != data.size())
        throw ReplayError("malformed calldata for " + fn.name + ": " +
                          std::to_string(data.size() - pos) + " trailing bytes");
    return args;
}

inline Calldata calldata_from_hex(std::string_view s, const char* what = "calldata") {
    if (s.size() < 2 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X') || s.size() % 2 != 0)
        throw ParseError(std::string(what) + " must be 0x-prefixed even-length hex");
    Calldata out;
    for (std::size_t i = 2; i < s.size(); i += 2) {
        int hi = detail::hex_digit(s[i]);
        int lo = detail::hex_digit(s[i + 1]);
        if (hi < 0 || lo < 0)
            throw ParseError(std::string(what) + " has non-hex digit");
        out.push_back((std::uint8_t)((hi << 4) | lo));
    }
    return out;
}

inline std::string calldata_to_hex(const Calldata& data) {
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    for (auto b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

inline std::optional<Selector> calldata_selector(const Calldata& data) {
    if (data.size() < 4) return std::nullopt;
    Selector s;
    std::copy(data.begin(), data.begin() + 4, s.bytes.begin());
    return s;
}

}  // namespace rorscan
