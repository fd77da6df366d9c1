#include "lqcheck/types.hpp"

#include <algorithm>

#include "lqcheck/error.hpp"

namespace lqcheck::types {

namespace {

using lang::ExprKind;
using lang::ExprPtr;
using lang::PrefixKind;
using lang::ProcessPtr;
using lang::ProcKind;
using Env = std::map<std::string, VarType>;

std::string type_name(VarType t) {
    switch (t) {
    case VarType::Bool:
        return "bool";
    case VarType::Nat:
        return "nat";
    case VarType::Qubit:
        return "qubit";
    }
    return "?";
}

VarType type_of(const ExprPtr& e, const Env& env) {
    switch (e->kind) {
    case ExprKind::Var: {
        auto it = env.find(e->name);
        if (it == env.end()) {
            throw TypeError("unbound variable '" + e->name + "'");
        }
        return it->second;
    }
    case ExprKind::Bool:
        return VarType::Bool;
    case ExprKind::Nat:
        return VarType::Nat;
    case ExprKind::Qubit:
        return VarType::Qubit;
    case ExprKind::Not:
        if (type_of(e->lhs, env) != VarType::Bool) {
            throw TypeError("'not' expects a bool in " + lang::print_expr(e));
        }
        return VarType::Bool;
    case ExprKind::Or:
        if (type_of(e->lhs, env) != VarType::Bool || type_of(e->rhs, env) != VarType::Bool) {
            throw TypeError("'or' expects bools in " + lang::print_expr(e));
        }
        return VarType::Bool;
    case ExprKind::Le:
        if (type_of(e->lhs, env) != VarType::Nat || type_of(e->rhs, env) != VarType::Nat) {
            throw TypeError("'<=' expects nats in " + lang::print_expr(e));
        }
        return VarType::Bool;
    case ExprKind::Eq: {
        auto a = type_of(e->lhs, env);
        auto b = type_of(e->rhs, env);
        if (a != b) {
            throw TypeError("'=' compares " + type_name(a) + " with " + type_name(b) + " in " + lang::print_expr(e));
        }
        return VarType::Bool;
    }
    }
    throw TypeError("malformed expression");
}

// Name of a qubit-typed expression (a register qubit or a qubit variable).
std::string qubit_ref(const ExprPtr& e, const Env& env, const std::string& where) {
    if (type_of(e, env) != VarType::Qubit || (e->kind != ExprKind::Qubit && e->kind != ExprKind::Var)) {
        throw TypeError("expected a qubit in " + where + ", got " + lang::print_expr(e));
    }
    return e->name;
}

QubitSet qubit_refs(const std::vector<ExprPtr>& es, const Env& env, const std::string& where) {
    QubitSet out;
    for (const auto& e : es) {
        auto q = qubit_ref(e, env, where);
        if (!out.insert(q).second) {
            throw TypeError("qubit '" + q + "' repeated in " + where);
        }
    }
    return out;
}

std::string diff_names(const QubitSet& a, const QubitSet& b) {
    std::vector<std::string> d;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d));
    QubitSet s(d.begin(), d.end());
    return to_string(s);
}

QubitSet infer(const ProcessPtr& p, const Env& env) {
    switch (p->kind) {
    case ProcKind::Nil:
        return qubit_refs(p->discard, env, "nil discard list");
    case ProcKind::Prefix: {
        const auto& pre = p->prefix;
        std::string where = lang::print_prefix(pre);
        switch (pre.kind) {
        case PrefixKind::Tau:
        case PrefixKind::TauPair:
            return infer(p->left, env);
        case PrefixKind::Sop: {
            auto sigma = infer(p->left, env);
            auto args = qubit_refs(pre.args, env, where);
            if (!pre.op->op.trace_preserving()) {
                throw TypeError("superoperator '" + pre.op->name + "' is not trace-preserving in " + where);
            }
            for (const auto& q : args) {
                if (!sigma.count(q)) {
                    throw TypeError("qubit '" + q + "' is not owned at " + where);
                }
            }
            return sigma;
        }
        case PrefixKind::Meas: {
            auto args = qubit_refs(pre.args, env, where);
            Env inner = env;
            inner[pre.var] = VarType::Nat;
            auto sigma = infer(p->left, inner);
            for (const auto& q : args) {
                if (!sigma.count(q)) {
                    throw TypeError("qubit '" + q + "' is not owned at " + where);
                }
            }
            return sigma;
        }
        case PrefixKind::Recv: {
            Env inner = env;
            if (pre.channel_type.is_quantum()) {
                inner[pre.var] = VarType::Qubit;
                auto sigma = infer(p->left, inner);
                if (!sigma.erase(pre.var)) {
                    throw TypeError("received qubit '" + pre.var + "' is neither used nor discarded after " + where);
                }
                return sigma;
            }
            inner[pre.var] = pre.channel_type.kind == lang::ChannelType::Kind::Bool ? VarType::Bool : VarType::Nat;
            return infer(p->left, inner);
        }
        case PrefixKind::Send: {
            auto sigma = infer(p->left, env);
            if (pre.channel_type.is_quantum()) {
                auto q = qubit_ref(pre.value, env, where);
                if (sigma.count(q)) {
                    throw TypeError("qubit '" + q + "' is still used after being sent in " + where);
                }
                sigma.insert(q);
                return sigma;
            }
            auto t = type_of(pre.value, env);
            bool ok = pre.channel_type.kind == lang::ChannelType::Kind::Bool ? t == VarType::Bool
                                                                             : (t == VarType::Nat || t == VarType::Bool);
            if (!ok) {
                throw TypeError("cannot send a " + type_name(t) + " on channel '" + pre.channel + "' of type " +
                                lang::to_string(pre.channel_type));
            }
            if (pre.value->kind == ExprKind::Nat && !pre.channel_type.admits(lang::Value{pre.value->nat_value})) {
                throw TypeError("value " + lang::print_expr(pre.value) + " outside the range of channel '" + pre.channel + "'");
            }
            return sigma;
        }
        }
        break;
    }
    case ProcKind::Ite: {
        if (type_of(p->cond, env) != VarType::Bool) {
            throw TypeError("condition " + lang::print_expr(p->cond) + " is not a bool");
        }
        auto a = infer(p->left, env);
        auto b = infer(p->right, env);
        if (a != b) {
            throw TypeError("branches of 'if " + lang::print_expr(p->cond) + "' own different qubits: " + diff_names(a, b));
        }
        return a;
    }
    case ProcKind::Sum: {
        auto a = infer(p->left, env);
        auto b = infer(p->right, env);
        if (a != b) {
            throw TypeError("branches of a choice own different qubits: " + diff_names(a, b));
        }
        return a;
    }
    case ProcKind::Par: {
        auto a = infer(p->left, env);
        auto b = infer(p->right, env);
        for (const auto& q : a) {
            if (b.count(q)) {
                throw TypeError("no-cloning violation: qubit '" + q + "' is owned by both parallel components");
            }
        }
        a.insert(b.begin(), b.end());
        return a;
    }
    case ProcKind::Restrict:
        return infer(p->left, env);
    }
    throw TypeError("malformed process");
}

void initial_tags(const ProcessPtr& p, std::set<lang::Tag>& out) {
    switch (p->kind) {
    case ProcKind::Prefix:
        out.insert(p->prefix.tag);
        if (p->prefix.kind == PrefixKind::TauPair) {
            out.insert(p->prefix.tag2);
        }
        break;
    case ProcKind::Ite:
    case ProcKind::Sum:
    case ProcKind::Par:
        initial_tags(p->left, out);
        initial_tags(p->right, out);
        break;
    case ProcKind::Restrict:
        initial_tags(p->left, out);
        break;
    case ProcKind::Nil:
        break;
    }
}

void lint(const ProcessPtr& p, std::vector<std::string>& out) {
    if (p->kind == ProcKind::Sum) {
        std::set<lang::Tag> a;
        std::set<lang::Tag> b;
        initial_tags(p->left, a);
        initial_tags(p->right, b);
        for (const auto& t : a) {
            if (b.count(t)) {
                out.push_back("choice branches share initial tag '" + t.name + "' in " + lang::print_process(p));
            }
        }
    }
    if (p->left) {
        lint(p->left, out);
    }
    if (p->right) {
        lint(p->right, out);
    }
}

}  // namespace

std::string to_string(const QubitSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& q : s) {
        out += (first ? "" : ", ") + q;
        first = false;
    }
    return out + "}";
}

QubitSet typecheck(const lang::ProcessPtr& p, const std::map<std::string, VarType>& env) { return infer(p, env); }

QubitSet owned_qubits(const lang::ProcessPtr& p) { return infer(p, {}); }

std::set<std::string> uic(const lang::ProcessPtr& p) {
    std::set<std::string> out;
    switch (p->kind) {
    case ProcKind::Nil:
        break;
    case ProcKind::Prefix:
        if (p->prefix.kind == PrefixKind::Recv && p->prefix.channel_type.is_quantum()) {
            out.insert(p->prefix.channel);
        }
        out.merge(uic(p->left));
        break;
    case ProcKind::Ite:
    case ProcKind::Sum:
    case ProcKind::Par:
        out.merge(uic(p->left));
        out.merge(uic(p->right));
        break;
    case ProcKind::Restrict: {
        out = uic(p->left);
        for (const auto& c : p->channels) {
            out.erase(c);
        }
        break;
    }
    }
    return out;
}

bool input_restricted(const lang::ProcessPtr& p) { return uic(p).empty(); }

ConfigType type_support(const std::vector<lang::ProcessPtr>& procs, const std::vector<std::string>& reg) {
    ConfigType t;
    t.sigma_rho = QubitSet(reg.begin(), reg.end());
    if (procs.empty()) {
        t.wildcard = true;
        return t;
    }
    bool first = true;
    for (const auto& p : procs) {
        auto sigma = owned_qubits(p);
        for (const auto& q : sigma) {
            if (!t.sigma_rho.count(q)) {
                throw TypeError("process owns qubit '" + q + "' outside the register");
            }
        }
        if (first) {
            t.sigma_p = sigma;
            first = false;
        } else if (sigma != t.sigma_p) {
            throw TypeError("distribution support has heterogeneous types " + to_string(t.sigma_p) + " and " +
                            to_string(sigma));
        }
    }
    return t;
}

std::vector<std::string> determinism_lint(const lang::ProcessPtr& p) {
    std::vector<std::string> out;
    lint(p, out);
    return out;
}

}  // namespace lqcheck::types
