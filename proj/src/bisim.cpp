#include "lqcheck/bisim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::bisim {

namespace {

struct Failure {
    std::vector<Label> trace;  // reversed
    MismatchKind kind = MismatchKind::Env;
    std::string detail;
    qmath::Matrix left;
    qmath::Matrix right;
};

double env_diff(const qmath::Matrix& a, const qmath::Matrix& b) {
    if (a.rows() != b.rows()) {
        return std::abs(a.trace().real() - b.trace().real());
    }
    return qmath::max_abs_diff(a, b);
}

class Checker {
public:
    explicit Checker(double eps) : eps_(eps) {}

    std::optional<Failure> check(const QuantumDist& d, const QuantumDist& t, std::size_t depth) {
        std::size_t seen = max_depth_.load();
        while (depth > seen && !max_depth_.compare_exchange_weak(seen, depth)) {
        }
        std::string key = qlts::digest(d) + "|" + qlts::digest(t);
        if (known(key, d, t)) {
            return std::nullopt;
        }
        ++visited_;
        if (auto f = local(d, t)) {
            return f;
        }
        std::set<Label> labels = qlts::enabled_q(d);
        labels.merge(qlts::enabled_q(t));
        for (const auto& l : labels) {
            if (auto f = step(d, t, l, depth)) {
                return f;
            }
        }
        remember(key, d, t);
        return std::nullopt;
    }

    std::optional<Failure> check_root(const QuantumDist& d, const QuantumDist& t, unsigned threads) {
        if (threads <= 1) {
            return check(d, t, 0);
        }
        ++visited_;
        if (auto f = local(d, t)) {
            return f;
        }
        std::set<Label> label_set = qlts::enabled_q(d);
        label_set.merge(qlts::enabled_q(t));
        std::vector<Label> labels(label_set.begin(), label_set.end());
        std::vector<std::optional<Failure>> results(labels.size());
        std::vector<std::exception_ptr> errors(labels.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < labels.size(); i = next++) {
                try {
                    results[i] = step(d, t, labels[i], 0);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < std::min<std::size_t>(threads, labels.size()); ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (errors[i]) {
                std::rethrow_exception(errors[i]);
            }
            if (results[i]) {
                return results[i];
            }
        }
        return std::nullopt;
    }

    std::size_t visited() const { return visited_; }
    std::size_t max_depth() const { return max_depth_; }

private:
    std::optional<Failure> step(const QuantumDist& d, const QuantumDist& t, const Label& l, std::size_t depth) {
        auto nd = qlts::qdist_step(d, l.first, l.second, eps_);
        auto nt = qlts::qdist_step(t, l.first, l.second, eps_);
        auto f = check(nd, nt, depth + 1);
        if (f) {
            f->trace.push_back(l);
        }
        return f;
    }

    std::optional<Failure> local(const QuantumDist& d, const QuantumDist& t) const {
        if (d.empty() && t.empty()) {
            return std::nullopt;
        }
        if (d.empty() != t.empty()) {
            return Failure{{}, MismatchKind::OneSided,
                           std::string("only the ") + (d.empty() ? "right" : "left") + " side can move",
                           qlts::env(d).mat(), qlts::env(t).mat()};
        }
        auto od = qlts::owned(d);
        auto ot = qlts::owned(t);
        if (od != ot) {
            return Failure{{}, MismatchKind::Type,
                           "processes own " + types::to_string(od) + " and " + types::to_string(ot),
                           qlts::env(d).mat(), qlts::env(t).mat()};
        }
        auto ed = qlts::env(d);
        auto et = qlts::env(t);
        if (!qmath::approx_eq(ed, et, eps_)) {
            return Failure{{}, MismatchKind::Env, "environments differ", ed.mat(), et.mat()};
        }
        return std::nullopt;
    }

    bool known(const std::string& key, const QuantumDist& d, const QuantumDist& t) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = memo_.find(key);
        if (it == memo_.end()) {
            return false;
        }
        return std::any_of(it->second.begin(), it->second.end(), [&](const auto& p) {
            return qlts::approx_eq(p.first, d, eps_) && qlts::approx_eq(p.second, t, eps_);
        });
    }

    void remember(const std::string& key, const QuantumDist& d, const QuantumDist& t) {
        std::lock_guard<std::mutex> lock(mu_);
        memo_[key].emplace_back(d, t);
    }

    double eps_;
    std::mutex mu_;
    std::unordered_map<std::string, std::vector<std::pair<QuantumDist, QuantumDist>>> memo_;
    std::atomic<std::size_t> visited_{0};
    std::atomic<std::size_t> max_depth_{0};
};

std::set<std::string> unrestricted_inputs(const QuantumDist& d) {
    std::set<std::string> out;
    for (const auto& e : d.entries()) {
        out.merge(types::uic(e.proc));
    }
    return out;
}

std::string join(const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) {
        out += (out.empty() ? "" : ", ") + x;
    }
    return out;
}

}  // namespace

std::string to_string(MismatchKind k) {
    switch (k) {
    case MismatchKind::None:
        return "none";
    case MismatchKind::Env:
        return "env-mismatch";
    case MismatchKind::OneSided:
        return "one-sided-move";
    case MismatchKind::Type:
        return "type-mismatch";
    }
    return "?";
}

Verdict ground_bisim(const QuantumDist& d, const QuantumDist& t, const Options& opts) {
    auto start = std::chrono::steady_clock::now();
    types::type_distribution(d);
    types::type_distribution(t);
    if (d.reg() != t.reg() && !d.empty() && !t.empty()) {
        throw TypeError("distributions are over different registers");
    }
    Verdict v;
    auto inputs = unrestricted_inputs(d);
    inputs.merge(unrestricted_inputs(t));
    if (inputs.empty()) {
        v.theorem_basis = "input-restricted: ground bisimilarity is fully abstract";
    } else {
        v.theorem_basis = "ground-only (unrestricted quantum inputs on " + join(inputs) + ")";
        v.warnings.push_back("inputs are not input-restricted; the verdict covers ground bisimilarity only");
    }
    Checker checker(opts.eps);
    auto f = checker.check_root(d, t, opts.threads);
    if (f) {
        v.equivalent = false;
        v.witness.assign(f->trace.rbegin(), f->trace.rend());
        v.mismatch = f->kind;
        v.detail = f->detail;
        v.env_mismatch = EnvMismatch{f->left, f->right, env_diff(f->left, f->right)};
    }
    v.stats.pairs_visited = checker.visited();
    v.stats.max_depth = checker.max_depth();
    v.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
}

std::pair<QuantumDist, QuantumDist> replay(const QuantumDist& d, const QuantumDist& t, const std::vector<Label>& trace,
                                           double eps) {
    auto a = d;
    auto b = t;
    for (const auto& l : trace) {
        a = qlts::qdist_step(a, l.first, l.second, eps);
        b = qlts::qdist_step(b, l.first, l.second, eps);
    }
    return {a, b};
}

Verdict superop_probe(const QuantumDist& d, const QuantumDist& t, const std::vector<Probe>& probes, const Options& opts) {
    auto start = std::chrono::steady_clock::now();
    Verdict v = ground_bisim(d, t, opts);
    if (!v.equivalent) {
        v.probe = "identity";
        return v;
    }
    Stats total = v.stats;
    for (const auto& p : probes) {
        auto pv = ground_bisim(qlts::apply_env_superop(p.op, p.qubits, d, opts.eps),
                               qlts::apply_env_superop(p.op, p.qubits, t, opts.eps), opts);
        total.pairs_visited += pv.stats.pairs_visited;
        total.max_depth = std::max(total.max_depth, pv.stats.max_depth);
        if (!pv.equivalent) {
            pv.probe = p.name;
            pv.stats = total;
            pv.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            return pv;
        }
    }
    v.stats = total;
    v.stats.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!probes.empty()) {
        v.warnings.push_back("all probes passed; a finite probe set does not establish closure under every superoperator");
    }
    return v;
}

}  // namespace lqcheck::bisim
