#include "lqcheck/plts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <unordered_map>

#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::plts {

namespace {

using lang::PrefixKind;
using lang::ProcKind;
using lang::Process;

std::size_t qubit_index(const Register& reg, const std::string& name) {
    auto it = std::find(reg.begin(), reg.end(), name);
    if (it == reg.end()) {
        throw SemanticsError("qubit '" + name + "' is not in the register");
    }
    return static_cast<std::size_t>(it - reg.begin());
}

std::vector<std::size_t> qubit_positions(const std::vector<lang::ExprPtr>& args, const Register& reg) {
    std::vector<std::size_t> out;
    for (const auto& a : args) {
        auto v = lang::eval_expr(a);
        const auto* q = std::get_if<lang::QubitName>(&v);
        if (!q) {
            throw SemanticsError("expected a qubit, got " + lang::to_string(v));
        }
        out.push_back(qubit_index(reg, q->name));
    }
    return out;
}

Value normalize_send(const lang::Prefix& pre) {
    auto v = lang::eval_expr(pre.value);
    if (pre.channel_type.kind == lang::ChannelType::Kind::Nat) {
        if (const auto* b = std::get_if<bool>(&v)) {
            v = lang::Nat{*b ? 1U : 0U};
        }
    }
    if (!pre.channel_type.admits(v)) {
        throw SemanticsError("value " + lang::to_string(v) + " not admitted by channel '" + pre.channel + "' of type " +
                             lang::to_string(pre.channel_type));
    }
    return v;
}

std::vector<Branch> wrap(const std::vector<Branch>& bs, const std::function<ProcessPtr(const ProcessPtr&)>& f) {
    std::vector<Branch> out;
    out.reserve(bs.size());
    for (const auto& b : bs) {
        out.push_back({b.kraus, f(b.next)});
    }
    return out;
}

void collect(const ProcessPtr& p, const Register& reg, std::vector<Move>& out);

void collect_prefix(const ProcessPtr& p, const Register& reg, std::vector<Move>& out) {
    const auto& pre = p->prefix;
    auto single = Scheduler::single(pre.tag);
    switch (pre.kind) {
    case PrefixKind::Tau:
        out.push_back({single, Action::tau(), {{{}, p->left}}});
        return;
    case PrefixKind::TauPair:
        out.push_back({Scheduler::pair(pre.tag, pre.tag2), Action::tau(), {{{}, p->left}}});
        return;
    case PrefixKind::Sop: {
        auto pos = qubit_positions(pre.args, reg);
        std::vector<qmath::Matrix> ks;
        for (const auto& k : pre.op->op.kraus()) {
            ks.push_back(qmath::pad(k, pos, reg.size()));
        }
        out.push_back({single, Action::tau(), {{std::move(ks), p->left}}});
        return;
    }
    case PrefixKind::Meas: {
        auto pos = qubit_positions(pre.args, reg);
        Move m{single, Action::tau(), {}};
        const auto& outcomes = pre.meas->meas.outcomes();
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            m.branches.push_back({{qmath::pad(outcomes[i], pos, reg.size())},
                                  lang::substitute(p->left, pre.var, Value{static_cast<lang::Nat>(i)})});
        }
        out.push_back(std::move(m));
        return;
    }
    case PrefixKind::Send:
        out.push_back({single, Action::send(pre.channel, normalize_send(pre)), {{{}, p->left}}});
        return;
    case PrefixKind::Recv: {
        std::vector<Value> values;
        if (pre.channel_type.is_quantum()) {
            auto owned = types::owned_qubits(p);
            for (const auto& q : reg) {
                if (!owned.count(q)) {
                    values.emplace_back(lang::QubitName{q});
                }
            }
        } else {
            values = pre.channel_type.values();
        }
        for (const auto& v : values) {
            out.push_back({single, Action::recv(pre.channel, v), {{{}, lang::substitute(p->left, pre.var, v)}}});
        }
        return;
    }
    }
}

bool excluded_receive(const Move& m, const types::QubitSet& sibling) {
    if (m.action.kind != Action::Kind::Recv) {
        return false;
    }
    const auto* q = std::get_if<lang::QubitName>(&m.action.value);
    return q && sibling.count(q->name);
}

void collect_par(const ProcessPtr& p, const Register& reg, std::vector<Move>& out) {
    std::vector<Move> lm;
    std::vector<Move> rm;
    collect(p->left, reg, lm);
    collect(p->right, reg, rm);
    std::optional<types::QubitSet> owned_l;
    std::optional<types::QubitSet> owned_r;
    const auto& right = p->right;
    const auto& left = p->left;
    for (const auto& m : lm) {
        if (m.action.kind == Action::Kind::Recv) {
            if (!owned_r) {
                owned_r = types::owned_qubits(right);
            }
            if (excluded_receive(m, *owned_r)) {
                continue;
            }
        }
        out.push_back({m.scheduler, m.action, wrap(m.branches, [&](const ProcessPtr& n) { return Process::par(n, right); })});
    }
    for (const auto& m : rm) {
        if (m.action.kind == Action::Kind::Recv) {
            if (!owned_l) {
                owned_l = types::owned_qubits(left);
            }
            if (excluded_receive(m, *owned_l)) {
                continue;
            }
        }
        out.push_back({m.scheduler, m.action, wrap(m.branches, [&](const ProcessPtr& n) { return Process::par(left, n); })});
    }
    // Synchronizations: the sender's tag comes first in the pair.
    for (const auto& a : lm) {
        for (const auto& b : rm) {
            if (a.scheduler.is_pair() || b.scheduler.is_pair() || a.action.channel != b.action.channel ||
                a.action.value != b.action.value) {
                continue;
            }
            if (a.action.kind == Action::Kind::Send && b.action.kind == Action::Kind::Recv) {
                out.push_back({Scheduler::pair(a.scheduler.first, b.scheduler.first), Action::tau(),
                               {{{}, Process::par(a.branches.front().next, b.branches.front().next)}}});
            } else if (a.action.kind == Action::Kind::Recv && b.action.kind == Action::Kind::Send) {
                out.push_back({Scheduler::pair(b.scheduler.first, a.scheduler.first), Action::tau(),
                               {{{}, Process::par(a.branches.front().next, b.branches.front().next)}}});
            }
        }
    }
}

void collect(const ProcessPtr& p, const Register& reg, std::vector<Move>& out) {
    switch (p->kind) {
    case ProcKind::Nil:
        return;
    case ProcKind::Prefix:
        collect_prefix(p, reg, out);
        return;
    case ProcKind::Ite: {
        auto v = lang::eval_expr(p->cond);
        const auto* b = std::get_if<bool>(&v);
        if (!b) {
            throw SemanticsError("condition " + lang::print_expr(p->cond) + " is not a bool");
        }
        collect(*b ? p->left : p->right, reg, out);
        return;
    }
    case ProcKind::Sum:
        collect(p->left, reg, out);
        collect(p->right, reg, out);
        return;
    case ProcKind::Par:
        collect_par(p, reg, out);
        return;
    case ProcKind::Restrict: {
        std::vector<Move> inner;
        collect(p->left, reg, inner);
        for (auto& m : inner) {
            if (m.action.kind != Action::Kind::Tau &&
                std::find(p->channels.begin(), p->channels.end(), m.action.channel) != p->channels.end()) {
                continue;
            }
            const auto& chans = p->channels;
            out.push_back({m.scheduler, m.action, wrap(m.branches, [&](const ProcessPtr& n) { return Process::restrict(n, chans); })});
        }
        return;
    }
    }
}

bool same_branches(const Move& a, const Move& b) {
    if (a.branches.size() != b.branches.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
        const auto& x = a.branches[i];
        const auto& y = b.branches[i];
        if (x.kraus.size() != y.kraus.size() || !lang::equal(x.next, y.next)) {
            return false;
        }
        for (std::size_t k = 0; k < x.kraus.size(); ++k) {
            if (!qmath::approx_eq(x.kraus[k], y.kraus[k], 0.0)) {
                return false;
            }
        }
    }
    return true;
}

std::string describe(const Move& m) {
    std::string s = lang::to_string(m.scheduler) + ":" + to_string(m.action) + " ->";
    for (const auto& b : m.branches) {
        s += " [" + lang::print_process(b.next) + "]";
    }
    return s;
}

std::vector<Move> checked_moves(const ProcessPtr& p, const Register& reg) {
    std::vector<Move> raw;
    collect(p, reg, raw);
    std::vector<Move> out;
    for (auto& m : raw) {
        bool dup = false;
        for (const auto& o : out) {
            if (o.scheduler != m.scheduler) {
                continue;
            }
            bool both_recv = o.action.kind == Action::Kind::Recv && m.action.kind == Action::Kind::Recv &&
                             o.action.channel == m.action.channel;
            if (both_recv && o.action.value != m.action.value) {
                continue;
            }
            if (o.action == m.action && same_branches(o, m)) {
                dup = true;
                break;
            }
            throw DeterminismError("non-deterministic process: scheduler " + lang::to_string(m.scheduler) +
                                   " enables both " + describe(o) + " and " + describe(m));
        }
        if (!dup) {
            out.push_back(std::move(m));
        }
    }
    return out;
}

struct CacheEntry {
    ProcessPtr proc;
    Register reg;
    std::shared_ptr<const std::vector<Move>> moves;
};

class MoveCache {
public:
    std::shared_ptr<const std::vector<Move>> get(const ProcessPtr& p, const Register& reg) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto range = map_.equal_range(p->hash);
            for (auto it = range.first; it != range.second; ++it) {
                if (it->second.reg == reg && lang::equal(it->second.proc, p)) {
                    return it->second.moves;
                }
            }
        }
        auto moves = std::make_shared<const std::vector<Move>>(checked_moves(p, reg));
        std::lock_guard<std::mutex> lock(mu_);
        if (map_.size() > 200000) {
            map_.clear();
        }
        map_.emplace(p->hash, CacheEntry{p, reg, moves});
        return moves;
    }

private:
    std::mutex mu_;
    std::unordered_multimap<std::size_t, CacheEntry> map_;
};

MoveCache& cache() {
    static MoveCache c;
    return c;
}

const Move* find_move(const std::vector<Move>& moves, const Scheduler& s, const Action& mu) {
    for (const auto& m : moves) {
        if (m.scheduler == s && m.action == mu) {
            return &m;
        }
    }
    return nullptr;
}

}  // namespace

std::string to_string(const Action& a) {
    switch (a.kind) {
    case Action::Kind::Tau:
        return "tau";
    case Action::Kind::Send:
        return a.channel + "!" + lang::to_string(a.value);
    case Action::Kind::Recv:
        return a.channel + "?" + lang::to_string(a.value);
    }
    return "?";
}

Action parse_action(const std::string& text, const Register& reg) {
    if (text == "tau") {
        return Action::tau();
    }
    auto pos = text.find_first_of("!?");
    if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size()) {
        throw UsageError("malformed action '" + text + "'");
    }
    std::string chan = text.substr(0, pos);
    std::string v = text.substr(pos + 1);
    Value value;
    if (v == "true" || v == "false") {
        value = v == "true";
    } else if (std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        value = static_cast<lang::Nat>(std::stoull(v));
    } else if (std::find(reg.begin(), reg.end(), v) != reg.end()) {
        value = lang::QubitName{v};
    } else {
        throw UsageError("unknown value '" + v + "' in action '" + text + "'");
    }
    return text[pos] == '!' ? Action::send(chan, value) : Action::recv(chan, value);
}

Scheduler parse_scheduler(const std::string& text) {
    if (!text.empty() && text.front() == '(') {
        auto comma = text.find(',');
        if (comma == std::string::npos || text.back() != ')') {
            throw UsageError("malformed scheduler '" + text + "'");
        }
        return Scheduler::pair(lang::Tag{text.substr(1, comma - 1)}, lang::Tag{text.substr(comma + 1, text.size() - comma - 2)});
    }
    if (text.empty()) {
        throw UsageError("empty scheduler");
    }
    return Scheduler::single(lang::Tag{text});
}

std::vector<Move> process_moves(const ProcessPtr& p, const Register& reg) { return *cache().get(p, reg); }

ProbDist ProbDist::point(Register reg, qmath::DensityOperator rho, ProcessPtr proc) {
    ProbDist d(std::move(reg));
    d.add(1.0, std::move(rho), std::move(proc));
    return d;
}

double ProbDist::mass() const {
    double m = 0.0;
    for (const auto& e : entries_) {
        m += e.weight;
    }
    return m;
}

void ProbDist::add(double weight, qmath::DensityOperator rho, ProcessPtr proc) {
    entries_.push_back({weight, std::move(rho), std::move(proc)});
}

ProbDist ProbDist::canonical(double eps) const {
    ProbDist out(reg_);
    for (const auto& e : entries_) {
        bool merged = false;
        for (auto& o : out.entries_) {
            if (lang::equal(o.proc, e.proc) && qmath::approx_eq(o.rho, e.rho, eps)) {
                o.weight += e.weight;
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.entries_.push_back(e);
        }
    }
    std::erase_if(out.entries_, [](const Entry& e) { return e.weight <= kWeightFloor; });
    std::vector<std::pair<std::string, Entry>> keyed;
    for (auto& e : out.entries_) {
        keyed.emplace_back(state_digest(e.rho.mat()), std::move(e));
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        int c = lang::compare(a.second.proc, b.second.proc);
        if (c != 0) {
            return c < 0;
        }
        return a.first < b.first;
    });
    out.entries_.clear();
    for (auto& [k, e] : keyed) {
        out.entries_.push_back(std::move(e));
    }
    return out;
}

ProbDist ProbDist::scaled(double factor) const {
    ProbDist out(reg_);
    for (const auto& e : entries_) {
        out.add(e.weight * factor, e.rho, e.proc);
    }
    return out;
}

bool approx_eq(const ProbDist& a, const ProbDist& b, double eps) {
    if (a.entries().size() != b.entries().size()) {
        return false;
    }
    for (const auto& x : a.entries()) {
        bool found = false;
        for (const auto& y : b.entries()) {
            if (lang::equal(x.proc, y.proc) && std::abs(x.weight - y.weight) <= eps && qmath::approx_eq(x.rho, y.rho, eps)) {
                found = true;
                break;
            }
        }
        if (!found) {
            return false;
        }
    }
    return true;
}

ProbDist initial_distribution(const lang::Program& program) {
    ProbDist d(program.qubits);
    for (const auto& s : program.initial) {
        d.add(s.weight, s.rho, program.main);
    }
    return d.canonical();
}

ProbDist apply_move(const Move& m, const qmath::DensityOperator& rho, const Register& reg, double eps) {
    ProbDist out(reg);
    for (const auto& b : m.branches) {
        if (b.kraus.empty()) {
            out.add(1.0, rho, b.next);
            continue;
        }
        qmath::Matrix acc = qmath::Matrix::Zero(rho.mat().rows(), rho.mat().cols());
        for (const auto& k : b.kraus) {
            acc += k * rho.mat() * k.adjoint();
        }
        qmath::DensityOperator sigma(std::move(acc));
        double w = sigma.trace();
        if (w <= eps) {
            continue;
        }
        out.add(w, sigma * (1.0 / w), b.next);
    }
    return out.canonical(eps);
}

std::vector<Transition> conf_moves(const Configuration& c, const Register& reg, double eps) {
    std::vector<Transition> out;
    for (const auto& m : process_moves(c.proc, reg)) {
        auto target = apply_move(m, c.rho, reg, eps);
        if (!target.empty()) {
            out.push_back({m.scheduler, m.action, std::move(target)});
        }
    }
    return out;
}

ProbDist bot_step(const Configuration& c, const Register& reg, const Scheduler& s, const Action& mu, double eps) {
    auto moves = process_moves(c.proc, reg);
    const Move* m = find_move(moves, s, mu);
    if (!m) {
        return ProbDist(reg);
    }
    return apply_move(*m, c.rho, reg, eps);
}

ProbDist scheduled_step(const ProbDist& d, const Scheduler& s, const Action& mu, double eps) {
    ProbDist out(d.reg());
    for (const auto& e : d.entries()) {
        auto moves = cache().get(e.proc, d.reg());
        const Move* m = find_move(*moves, s, mu);
        if (!m) {
            continue;
        }
        auto target = apply_move(*m, e.rho, d.reg(), eps);
        for (const auto& sub : target.entries()) {
            out.add(e.weight * sub.weight, sub.rho, sub.proc);
        }
    }
    return out.canonical(eps);
}

std::vector<ProbDist> unscheduled_successors(const ProbDist& d, const Action& mu, const UnscheduledOptions& opts,
                                             double eps) {
    std::vector<std::vector<ProbDist>> options;
    std::size_t combos = 1;
    for (const auto& e : d.entries()) {
        std::vector<ProbDist> choices;
        auto moves = cache().get(e.proc, d.reg());
        for (const auto& m : *moves) {
            if (m.action != mu) {
                continue;
            }
            auto target = apply_move(m, e.rho, d.reg(), eps);
            bool seen = std::any_of(choices.begin(), choices.end(), [&](const ProbDist& c) { return approx_eq(c, target, eps); });
            if (!seen) {
                choices.push_back(std::move(target));
            }
        }
        if (choices.empty() || !opts.progress_only) {
            choices.emplace_back(d.reg());
        }
        combos *= choices.size();
        if (combos > opts.cap) {
            throw SemanticsError("unscheduled successor enumeration exceeds the cap of " + std::to_string(opts.cap));
        }
        options.push_back(std::move(choices));
    }
    std::vector<ProbDist> out;
    std::vector<std::size_t> idx(options.size(), 0);
    while (true) {
        ProbDist acc(d.reg());
        for (std::size_t i = 0; i < options.size(); ++i) {
            for (const auto& sub : options[i][idx[i]].entries()) {
                acc.add(d.entries()[i].weight * sub.weight, sub.rho, sub.proc);
            }
        }
        auto c = acc.canonical(eps);
        bool seen = std::any_of(out.begin(), out.end(), [&](const ProbDist& o) { return approx_eq(o, c, eps); });
        if (!seen) {
            out.push_back(std::move(c));
        }
        std::size_t k = 0;
        while (k < idx.size()) {
            if (++idx[k] < options[k].size()) {
                break;
            }
            idx[k] = 0;
            ++k;
        }
        if (k == idx.size()) {
            break;
        }
    }
    return out;
}

std::set<Label> enabled(const ProbDist& d) {
    std::set<Label> out;
    for (const auto& e : d.entries()) {
        auto moves = cache().get(e.proc, d.reg());
        for (const auto& m : *moves) {
            out.emplace(m.scheduler, m.action);
        }
    }
    return out;
}

std::string state_digest(const qmath::Matrix& m) {
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&](long long v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<std::uint64_t>((v >> (8 * i)) & 0xff);
            h *= 1099511628211ULL;
        }
    };
    feed(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            feed(std::llround(m(i, j).real() * 1e9));
            feed(std::llround(m(i, j).imag() * 1e9));
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace lqcheck::plts
