#include "lqcheck/ast.hpp"

#include <functional>
#include <sstream>

#include "lqcheck/error.hpp"

namespace lqcheck::lang {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6U) + (seed >> 2U));
}

std::size_t hash_str(const std::string& s) { return std::hash<std::string>{}(s); }

std::size_t hash_prefix(const Prefix& p) {
    std::size_t h = mix(static_cast<std::size_t>(p.kind) + 17, hash_str(p.tag.name));
    h = mix(h, hash_str(p.tag2.name));
    h = mix(h, hash_str(p.channel));
    h = mix(h, hash_str(p.var));
    if (p.value) {
        h = mix(h, p.value->hash);
    }
    if (p.op) {
        h = mix(h, hash_str(p.op->name));
    }
    if (p.meas) {
        h = mix(h, hash_str(p.meas->name));
    }
    for (const auto& a : p.args) {
        h = mix(h, a->hash);
    }
    return h;
}

bool equal_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!equal(*a[i], *b[i])) {
            return false;
        }
    }
    return true;
}

bool same_op(const std::shared_ptr<const OpDef>& a, const std::shared_ptr<const OpDef>& b) {
    if (a == b) {
        return true;
    }
    if (!a || !b || a->name != b->name || a->op.kraus().size() != b->op.kraus().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a->op.kraus().size(); ++i) {
        if (a->op.kraus()[i] != b->op.kraus()[i]) {
            return false;
        }
    }
    return true;
}

bool same_meas(const std::shared_ptr<const MeasDef>& a, const std::shared_ptr<const MeasDef>& b) {
    if (a == b) {
        return true;
    }
    if (!a || !b || a->name != b->name || a->meas.size() != b->meas.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a->meas.size(); ++i) {
        if (a->meas.outcomes()[i] != b->meas.outcomes()[i]) {
            return false;
        }
    }
    return true;
}

bool equal_prefix(const Prefix& a, const Prefix& b) {
    if (a.kind != b.kind || a.tag != b.tag || a.tag2 != b.tag2 || a.channel != b.channel || a.var != b.var ||
        !(a.channel_type == b.channel_type)) {
        return false;
    }
    if (static_cast<bool>(a.value) != static_cast<bool>(b.value) || (a.value && !equal(*a.value, *b.value))) {
        return false;
    }
    return same_op(a.op, b.op) && same_meas(a.meas, b.meas) && equal_exprs(a.args, b.args);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

int level_of(const Process& p) {
    switch (p.kind) {
    case ProcKind::Sum:
        return 0;
    case ProcKind::Par:
        return 1;
    case ProcKind::Restrict:
        return 2;
    default:
        return 3;
    }
}

void print_proc(std::ostream& os, const ProcessPtr& p, int ctx) {
    bool wrap = level_of(*p) < ctx;
    if (wrap) {
        os << "(";
    }
    switch (p->kind) {
    case ProcKind::Nil: {
        std::vector<std::string> qs;
        for (const auto& e : p->discard) {
            qs.push_back(print_expr(e));
        }
        os << "nil[" << join(qs, ", ") << "]";
        break;
    }
    case ProcKind::Prefix:
        os << print_prefix(p->prefix) << " . ";
        print_proc(os, p->left, 3);
        break;
    case ProcKind::Ite:
        os << "if " << print_expr(p->cond) << " then ";
        print_proc(os, p->left, 3);
        os << " else ";
        print_proc(os, p->right, 3);
        break;
    case ProcKind::Sum:
        print_proc(os, p->left, 0);
        os << " + ";
        print_proc(os, p->right, 1);
        break;
    case ProcKind::Par:
        print_proc(os, p->left, 1);
        os << " || ";
        print_proc(os, p->right, 2);
        break;
    case ProcKind::Restrict:
        print_proc(os, p->left, 2);
        os << " \\ {" << join(p->channels, ", ") << "}";
        break;
    }
    if (wrap) {
        os << ")";
    }
}

void collect_tags(const ProcessPtr& p, std::set<Tag>& out) {
    if (p->kind == ProcKind::Prefix) {
        out.insert(p->prefix.tag);
        if (p->prefix.kind == PrefixKind::TauPair) {
            out.insert(p->prefix.tag2);
        }
    }
    if (p->left) {
        collect_tags(p->left, out);
    }
    if (p->right) {
        collect_tags(p->right, out);
    }
}

std::string type_name(const Value& v) {
    if (std::holds_alternative<bool>(v)) {
        return "bool";
    }
    if (std::holds_alternative<Nat>(v)) {
        return "nat";
    }
    return "qubit";
}

}  // namespace

std::string to_string(const Scheduler& s) {
    if (s.second) {
        return "(" + s.first.name + "," + s.second->name + ")";
    }
    return s.first.name;
}

std::string to_string(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) {
        return *b ? "true" : "false";
    }
    if (const auto* n = std::get_if<Nat>(&v)) {
        return std::to_string(*n);
    }
    return std::get<QubitName>(v).name;
}

std::vector<Value> ChannelType::values() const {
    std::vector<Value> out;
    if (kind == Kind::Bool) {
        out.emplace_back(false);
        out.emplace_back(true);
    } else if (kind == Kind::Nat) {
        for (Nat n = lo; n <= hi; ++n) {
            out.emplace_back(n);
        }
    }
    return out;
}

bool ChannelType::admits(const Value& v) const {
    switch (kind) {
    case Kind::Qubit:
        return std::holds_alternative<QubitName>(v);
    case Kind::Bool:
        return std::holds_alternative<bool>(v);
    case Kind::Nat:
        if (const auto* n = std::get_if<Nat>(&v)) {
            return *n >= lo && *n <= hi;
        }
        return false;
    }
    return false;
}

std::string to_string(const ChannelType& t) {
    switch (t.kind) {
    case ChannelType::Kind::Qubit:
        return "qubit";
    case ChannelType::Kind::Bool:
        return "bool";
    case ChannelType::Kind::Nat:
        if (t.lo == 0 && t.hi == 1) {
            return "bit";
        }
        return "nat(" + std::to_string(t.lo) + ".." + std::to_string(t.hi) + ")";
    }
    return "?";
}

ExprPtr Expr::var(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->name = std::move(name);
    e->hash = mix(1, hash_str(e->name));
    return e;
}

ExprPtr Expr::literal(const Value& v) {
    auto e = std::make_shared<Expr>();
    if (const auto* b = std::get_if<bool>(&v)) {
        e->kind = ExprKind::Bool;
        e->bool_value = *b;
        e->hash = mix(2, *b ? 1 : 0);
    } else if (const auto* n = std::get_if<Nat>(&v)) {
        e->kind = ExprKind::Nat;
        e->nat_value = *n;
        e->hash = mix(3, static_cast<std::size_t>(*n));
    } else {
        e->kind = ExprKind::Qubit;
        e->name = std::get<QubitName>(v).name;
        e->hash = mix(4, hash_str(e->name));
    }
    return e;
}

ExprPtr Expr::negate(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Not;
    e->hash = mix(5, a->hash);
    e->lhs = std::move(a);
    return e;
}

ExprPtr Expr::binary(ExprKind kind, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->hash = mix(mix(static_cast<std::size_t>(kind) + 6, a->hash), b->hash);
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}

bool equal(const Expr& a, const Expr& b) {
    if (&a == &b) {
        return true;
    }
    if (a.kind != b.kind || a.hash != b.hash) {
        return false;
    }
    switch (a.kind) {
    case ExprKind::Var:
    case ExprKind::Qubit:
        return a.name == b.name;
    case ExprKind::Bool:
        return a.bool_value == b.bool_value;
    case ExprKind::Nat:
        return a.nat_value == b.nat_value;
    case ExprKind::Not:
        return equal(*a.lhs, *b.lhs);
    default:
        return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    }
}

Prefix Prefix::tau(Tag t) {
    Prefix p;
    p.kind = PrefixKind::Tau;
    p.tag = std::move(t);
    return p;
}

Prefix Prefix::tau_pair(Tag a, Tag b) {
    Prefix p;
    p.kind = PrefixKind::TauPair;
    p.tag = std::move(a);
    p.tag2 = std::move(b);
    return p;
}

Prefix Prefix::recv(Tag t, std::string channel, ChannelType type, std::string var) {
    Prefix p;
    p.kind = PrefixKind::Recv;
    p.tag = std::move(t);
    p.channel = std::move(channel);
    p.channel_type = type;
    p.var = std::move(var);
    return p;
}

Prefix Prefix::send(Tag t, std::string channel, ChannelType type, ExprPtr value) {
    Prefix p;
    p.kind = PrefixKind::Send;
    p.tag = std::move(t);
    p.channel = std::move(channel);
    p.channel_type = type;
    p.value = std::move(value);
    return p;
}

Prefix Prefix::sop(Tag t, std::shared_ptr<const OpDef> op, std::vector<ExprPtr> args) {
    Prefix p;
    p.kind = PrefixKind::Sop;
    p.tag = std::move(t);
    p.op = std::move(op);
    p.args = std::move(args);
    return p;
}

Prefix Prefix::measure(Tag t, std::shared_ptr<const MeasDef> meas, std::vector<ExprPtr> args, std::string var) {
    Prefix p;
    p.kind = PrefixKind::Meas;
    p.tag = std::move(t);
    p.meas = std::move(meas);
    p.args = std::move(args);
    p.var = std::move(var);
    return p;
}

ProcessPtr Process::nil(std::vector<ExprPtr> discard) {
    auto p = std::make_shared<Process>();
    p->kind = ProcKind::Nil;
    std::size_t h = 11;
    for (const auto& e : discard) {
        h = mix(h, e->hash);
    }
    p->hash = h;
    p->discard = std::move(discard);
    return p;
}

ProcessPtr Process::make_prefix(Prefix pre, ProcessPtr cont) {
    auto p = std::make_shared<Process>();
    p->kind = ProcKind::Prefix;
    p->hash = mix(mix(12, hash_prefix(pre)), cont->hash);
    p->prefix = std::move(pre);
    p->left = std::move(cont);
    return p;
}

ProcessPtr Process::ite(ExprPtr cond, ProcessPtr then_p, ProcessPtr else_p) {
    auto p = std::make_shared<Process>();
    p->kind = ProcKind::Ite;
    p->hash = mix(mix(mix(13, cond->hash), then_p->hash), else_p->hash);
    p->cond = std::move(cond);
    p->left = std::move(then_p);
    p->right = std::move(else_p);
    return p;
}

ProcessPtr Process::sum(ProcessPtr a, ProcessPtr b) {
    auto p = std::make_shared<Process>();
    p->kind = ProcKind::Sum;
    p->hash = mix(mix(14, a->hash), b->hash);
    p->left = std::move(a);
    p->right = std::move(b);
    return p;
}

ProcessPtr Process::par(ProcessPtr a, ProcessPtr b) {
    auto p = std::make_shared<Process>();
    p->kind = ProcKind::Par;
    p->hash = mix(mix(15, a->hash), b->hash);
    p->left = std::move(a);
    p->right = std::move(b);
    return p;
}

ProcessPtr Process::restrict(ProcessPtr inner, std::vector<std::string> channels) {
    auto p = std::make_shared<Process>();
    p->kind = ProcKind::Restrict;
    std::set<std::string> uniq(channels.begin(), channels.end());
    p->channels.assign(uniq.begin(), uniq.end());
    std::size_t h = mix(16, inner->hash);
    for (const auto& c : p->channels) {
        h = mix(h, hash_str(c));
    }
    p->hash = h;
    p->left = std::move(inner);
    return p;
}

bool equal(const Process& a, const Process& b) {
    if (&a == &b) {
        return true;
    }
    if (a.kind != b.kind || a.hash != b.hash) {
        return false;
    }
    switch (a.kind) {
    case ProcKind::Nil:
        return equal_exprs(a.discard, b.discard);
    case ProcKind::Prefix:
        return equal_prefix(a.prefix, b.prefix) && equal(*a.left, *b.left);
    case ProcKind::Ite:
        return equal(*a.cond, *b.cond) && equal(*a.left, *b.left) && equal(*a.right, *b.right);
    case ProcKind::Sum:
    case ProcKind::Par:
        return equal(*a.left, *b.left) && equal(*a.right, *b.right);
    case ProcKind::Restrict:
        return a.channels == b.channels && equal(*a.left, *b.left);
    }
    return false;
}

bool equal(const ProcessPtr& a, const ProcessPtr& b) { return equal(*a, *b); }

int compare(const ProcessPtr& a, const ProcessPtr& b) {
    if (equal(a, b)) {
        return 0;
    }
    if (a->hash != b->hash) {
        return a->hash < b->hash ? -1 : 1;
    }
    auto ta = print_process(a);
    auto tb = print_process(b);
    if (ta != tb) {
        return ta < tb ? -1 : 1;
    }
    // Same text, different operator matrices under the same name.
    return a.get() < b.get() ? -1 : 1;
}

ExprPtr substitute(const ExprPtr& e, const std::string& x, const Value& v) {
    switch (e->kind) {
    case ExprKind::Var:
        return e->name == x ? Expr::literal(v) : e;
    case ExprKind::Bool:
    case ExprKind::Nat:
    case ExprKind::Qubit:
        return e;
    case ExprKind::Not: {
        auto a = substitute(e->lhs, x, v);
        return a == e->lhs ? e : Expr::negate(a);
    }
    default: {
        auto a = substitute(e->lhs, x, v);
        auto b = substitute(e->rhs, x, v);
        return (a == e->lhs && b == e->rhs) ? e : Expr::binary(e->kind, a, b);
    }
    }
}

namespace {

std::vector<ExprPtr> substitute_all(const std::vector<ExprPtr>& es, const std::string& x, const Value& v, bool& changed) {
    std::vector<ExprPtr> out;
    out.reserve(es.size());
    for (const auto& e : es) {
        out.push_back(substitute(e, x, v));
        changed = changed || out.back() != e;
    }
    return out;
}

}  // namespace

ProcessPtr substitute(const ProcessPtr& p, const std::string& x, const Value& v) {
    switch (p->kind) {
    case ProcKind::Nil: {
        bool changed = false;
        auto d = substitute_all(p->discard, x, v, changed);
        return changed ? Process::nil(std::move(d)) : p;
    }
    case ProcKind::Prefix: {
        Prefix pre = p->prefix;
        bool changed = false;
        pre.args = substitute_all(pre.args, x, v, changed);
        if (pre.value) {
            auto nv = substitute(pre.value, x, v);
            changed = changed || nv != pre.value;
            pre.value = nv;
        }
        ProcessPtr cont = p->left;
        if (!(pre.binds() && pre.var == x)) {
            cont = substitute(p->left, x, v);
            changed = changed || cont != p->left;
        }
        return changed ? Process::make_prefix(std::move(pre), cont) : p;
    }
    case ProcKind::Ite: {
        auto c = substitute(p->cond, x, v);
        auto a = substitute(p->left, x, v);
        auto b = substitute(p->right, x, v);
        return (c == p->cond && a == p->left && b == p->right) ? p : Process::ite(c, a, b);
    }
    case ProcKind::Sum:
    case ProcKind::Par: {
        auto a = substitute(p->left, x, v);
        auto b = substitute(p->right, x, v);
        if (a == p->left && b == p->right) {
            return p;
        }
        return p->kind == ProcKind::Sum ? Process::sum(a, b) : Process::par(a, b);
    }
    case ProcKind::Restrict: {
        auto a = substitute(p->left, x, v);
        return a == p->left ? p : Process::restrict(a, p->channels);
    }
    }
    return p;
}

std::set<std::string> free_vars(const ExprPtr& e) {
    std::set<std::string> out;
    if (e->kind == ExprKind::Var) {
        out.insert(e->name);
    }
    if (e->lhs) {
        out.merge(free_vars(e->lhs));
    }
    if (e->rhs) {
        out.merge(free_vars(e->rhs));
    }
    return out;
}

std::set<std::string> free_vars(const ProcessPtr& p) {
    std::set<std::string> out;
    switch (p->kind) {
    case ProcKind::Nil:
        for (const auto& e : p->discard) {
            out.merge(free_vars(e));
        }
        break;
    case ProcKind::Prefix: {
        for (const auto& e : p->prefix.args) {
            out.merge(free_vars(e));
        }
        if (p->prefix.value) {
            out.merge(free_vars(p->prefix.value));
        }
        auto inner = free_vars(p->left);
        if (p->prefix.binds()) {
            inner.erase(p->prefix.var);
        }
        out.merge(inner);
        break;
    }
    case ProcKind::Ite:
        out.merge(free_vars(p->cond));
        [[fallthrough]];
    case ProcKind::Sum:
    case ProcKind::Par:
        out.merge(free_vars(p->left));
        out.merge(free_vars(p->right));
        break;
    case ProcKind::Restrict:
        out.merge(free_vars(p->left));
        break;
    }
    return out;
}

std::set<Tag> tags_of(const ProcessPtr& p) {
    std::set<Tag> out;
    collect_tags(p, out);
    return out;
}

std::size_t size_of(const ProcessPtr& p) {
    std::size_t n = 1;
    if (p->left) {
        n += size_of(p->left);
    }
    if (p->right) {
        n += size_of(p->right);
    }
    return n;
}

std::string print_expr(const ExprPtr& e) {
    switch (e->kind) {
    case ExprKind::Var:
    case ExprKind::Qubit:
        return e->name;
    case ExprKind::Bool:
        return e->bool_value ? "true" : "false";
    case ExprKind::Nat:
        return std::to_string(e->nat_value);
    case ExprKind::Not:
        return "(not " + print_expr(e->lhs) + ")";
    case ExprKind::Or:
        return "(" + print_expr(e->lhs) + " or " + print_expr(e->rhs) + ")";
    case ExprKind::Le:
        return "(" + print_expr(e->lhs) + " <= " + print_expr(e->rhs) + ")";
    case ExprKind::Eq:
        return "(" + print_expr(e->lhs) + " = " + print_expr(e->rhs) + ")";
    }
    return "?";
}

std::string print_prefix(const Prefix& p) {
    std::vector<std::string> args;
    for (const auto& a : p.args) {
        args.push_back(print_expr(a));
    }
    switch (p.kind) {
    case PrefixKind::Tau:
        return p.tag.name + ":tau";
    case PrefixKind::TauPair:
        return "(" + p.tag.name + "," + p.tag2.name + "):tau";
    case PrefixKind::Recv:
        return p.tag.name + ":" + p.channel + "?" + p.var;
    case PrefixKind::Send:
        return p.tag.name + ":" + p.channel + "!" + print_expr(p.value);
    case PrefixKind::Sop:
        return p.tag.name + ":" + p.op->name + "(" + join(args, ", ") + ")";
    case PrefixKind::Meas: {
        std::string lhs = join(args, ", ");
        return p.tag.name + ":meas " + p.meas->name + "(" + lhs + (lhs.empty() ? "> " : " > ") + p.var + ")";
    }
    }
    return "?";
}

std::string print_process(const ProcessPtr& p) {
    std::ostringstream os;
    print_proc(os, p, 0);
    return os.str();
}

Value eval_expr(const ExprPtr& e, const std::map<std::string, Value>& bindings) {
    switch (e->kind) {
    case ExprKind::Var: {
        auto it = bindings.find(e->name);
        if (it == bindings.end()) {
            throw SemanticsError("unbound variable '" + e->name + "'");
        }
        return it->second;
    }
    case ExprKind::Bool:
        return e->bool_value;
    case ExprKind::Nat:
        return e->nat_value;
    case ExprKind::Qubit:
        return QubitName{e->name};
    case ExprKind::Not: {
        auto v = eval_expr(e->lhs, bindings);
        if (!std::holds_alternative<bool>(v)) {
            throw SemanticsError("'not' applied to a " + type_name(v));
        }
        return !std::get<bool>(v);
    }
    case ExprKind::Or: {
        auto a = eval_expr(e->lhs, bindings);
        auto b = eval_expr(e->rhs, bindings);
        if (!std::holds_alternative<bool>(a) || !std::holds_alternative<bool>(b)) {
            throw SemanticsError("'or' applied to non-boolean operands");
        }
        return std::get<bool>(a) || std::get<bool>(b);
    }
    case ExprKind::Le: {
        auto a = eval_expr(e->lhs, bindings);
        auto b = eval_expr(e->rhs, bindings);
        if (!std::holds_alternative<Nat>(a) || !std::holds_alternative<Nat>(b)) {
            throw SemanticsError("'<=' applied to non-natural operands");
        }
        return std::get<Nat>(a) <= std::get<Nat>(b);
    }
    case ExprKind::Eq: {
        auto a = eval_expr(e->lhs, bindings);
        auto b = eval_expr(e->rhs, bindings);
        if (a.index() != b.index()) {
            throw SemanticsError("'=' compares a " + type_name(a) + " with a " + type_name(b));
        }
        return a == b;
    }
    }
    throw SemanticsError("malformed expression");
}

}  // namespace lqcheck::lang
