#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lqcheck/qmath.hpp"

namespace lqcheck::lang {

struct Tag {
    std::string name;

    auto operator<=>(const Tag&) const = default;
};

struct Scheduler {
    Tag first;
    std::optional<Tag> second;

    static Scheduler single(Tag t) { return {std::move(t), std::nullopt}; }
    static Scheduler pair(Tag a, Tag b) { return {std::move(a), std::move(b)}; }
    bool is_pair() const { return second.has_value(); }

    auto operator<=>(const Scheduler&) const = default;
};

std::string to_string(const Scheduler& s);

using Nat = std::uint64_t;

struct QubitName {
    std::string name;

    auto operator<=>(const QubitName&) const = default;
};

using Value = std::variant<bool, Nat, QubitName>;

std::string to_string(const Value& v);

struct ChannelType {
    enum class Kind { Qubit, Nat, Bool };

    Kind kind = Kind::Nat;
    Nat lo = 0;
    Nat hi = 0;

    static ChannelType qubit() { return {Kind::Qubit, 0, 0}; }
    static ChannelType nat(Nat lo, Nat hi) { return {Kind::Nat, lo, hi}; }
    static ChannelType bit() { return {Kind::Nat, 0, 1}; }
    static ChannelType boolean() { return {Kind::Bool, 0, 0}; }

    bool is_quantum() const { return kind == Kind::Qubit; }
    // Finite classical value set; empty for quantum channels.
    std::vector<Value> values() const;
    bool admits(const Value& v) const;

    bool operator==(const ChannelType&) const = default;
};

std::string to_string(const ChannelType& t);

enum class ExprKind { Var, Bool, Nat, Qubit, Not, Or, Le, Eq };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
public:
    ExprKind kind = ExprKind::Bool;
    std::string name;
    bool bool_value = false;
    Nat nat_value = 0;
    ExprPtr lhs;
    ExprPtr rhs;
    std::size_t hash = 0;

    static ExprPtr var(std::string name);
    static ExprPtr literal(const Value& v);
    static ExprPtr negate(ExprPtr e);
    static ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b);
};

bool equal(const Expr& a, const Expr& b);

struct OpDef {
    std::string name;
    qmath::Superoperator op;
};

struct MeasDef {
    std::string name;
    qmath::Measurement meas;
};

enum class PrefixKind { Tau, TauPair, Recv, Send, Sop, Meas };

struct Prefix {
    PrefixKind kind = PrefixKind::Tau;
    Tag tag;
    Tag tag2;
    std::string channel;
    ChannelType channel_type;
    std::string var;
    ExprPtr value;
    std::shared_ptr<const OpDef> op;
    std::shared_ptr<const MeasDef> meas;
    std::vector<ExprPtr> args;

    static Prefix tau(Tag t);
    static Prefix tau_pair(Tag a, Tag b);
    static Prefix recv(Tag t, std::string channel, ChannelType type, std::string var);
    static Prefix send(Tag t, std::string channel, ChannelType type, ExprPtr value);
    static Prefix sop(Tag t, std::shared_ptr<const OpDef> op, std::vector<ExprPtr> args);
    static Prefix measure(Tag t, std::shared_ptr<const MeasDef> meas, std::vector<ExprPtr> args, std::string var);

    bool binds() const { return kind == PrefixKind::Recv || kind == PrefixKind::Meas; }
};

enum class ProcKind { Nil, Prefix, Ite, Sum, Par, Restrict };

class Process;
using ProcessPtr = std::shared_ptr<const Process>;

class Process {
public:
    ProcKind kind = ProcKind::Nil;
    std::vector<ExprPtr> discard;
    Prefix prefix;
    ExprPtr cond;
    ProcessPtr left;
    ProcessPtr right;
    std::vector<std::string> channels;
    std::size_t hash = 0;

    static ProcessPtr nil(std::vector<ExprPtr> discard = {});
    static ProcessPtr make_prefix(Prefix p, ProcessPtr cont);
    static ProcessPtr ite(ExprPtr cond, ProcessPtr then_p, ProcessPtr else_p);
    static ProcessPtr sum(ProcessPtr a, ProcessPtr b);
    static ProcessPtr par(ProcessPtr a, ProcessPtr b);
    static ProcessPtr restrict(ProcessPtr p, std::vector<std::string> channels);
};

bool equal(const Process& a, const Process& b);
bool equal(const ProcessPtr& a, const ProcessPtr& b);

// Total order used for canonical support ordering.
int compare(const ProcessPtr& a, const ProcessPtr& b);

ExprPtr substitute(const ExprPtr& e, const std::string& x, const Value& v);
ProcessPtr substitute(const ProcessPtr& p, const std::string& x, const Value& v);

std::set<std::string> free_vars(const ExprPtr& e);
std::set<std::string> free_vars(const ProcessPtr& p);

std::set<Tag> tags_of(const ProcessPtr& p);

std::size_t size_of(const ProcessPtr& p);

std::string print_expr(const ExprPtr& e);
std::string print_prefix(const Prefix& p);
std::string print_process(const ProcessPtr& p);

Value eval_expr(const ExprPtr& e, const std::map<std::string, Value>& bindings = {});

}  // namespace lqcheck::lang
