#include "lqcheck/qlts.hpp"

#include <algorithm>

#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::qlts {

namespace {

std::vector<std::size_t> positions_of(const Register& reg, const std::set<std::string>& names) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < reg.size(); ++i) {
        if (names.count(reg[i])) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace

QuantumDist QuantumDist::point(Register reg, qmath::DensityOperator weight, ProcessPtr proc) {
    QuantumDist d(std::move(reg));
    d.add(std::move(proc), std::move(weight));
    return d;
}

void QuantumDist::add(ProcessPtr proc, qmath::DensityOperator weight) {
    entries_.push_back({std::move(proc), std::move(weight)});
}

qmath::DensityOperator QuantumDist::mass() const {
    auto m = qmath::DensityOperator::zero(reg_.size());
    for (const auto& e : entries_) {
        m += e.weight;
    }
    return m;
}

double QuantumDist::total_trace() const {
    double t = 0.0;
    for (const auto& e : entries_) {
        t += e.weight.trace();
    }
    return t;
}

QuantumDist canonicalize(const QuantumDist& d, double eps) {
    std::vector<QEntry> merged;
    for (const auto& e : d.entries()) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const QEntry& m) { return lang::equal(m.proc, e.proc); });
        if (it == merged.end()) {
            merged.push_back(e);
        } else {
            it->weight += e.weight;
        }
    }
    std::erase_if(merged, [&](const QEntry& e) { return e.weight.trace() <= eps; });
    std::sort(merged.begin(), merged.end(), [](const QEntry& a, const QEntry& b) { return lang::compare(a.proc, b.proc) < 0; });
    QuantumDist out(d.reg());
    for (auto& e : merged) {
        out.add(std::move(e.proc), std::move(e.weight));
    }
    if (out.total_trace() > 1.0 + eps) {
        throw SemanticsError("quantum distribution has total trace " + lang::format_real(out.total_trace()) + " > 1");
    }
    return out;
}

bool approx_eq(const QuantumDist& a, const QuantumDist& b, double eps) {
    if (a.entries().size() != b.entries().size()) {
        return false;
    }
    for (const auto& x : a.entries()) {
        auto it = std::find_if(b.entries().begin(), b.entries().end(), [&](const QEntry& y) { return lang::equal(x.proc, y.proc); });
        if (it == b.entries().end() || !qmath::approx_eq(x.weight, it->weight, eps)) {
            return false;
        }
    }
    return true;
}

std::string digest(const QuantumDist& d) {
    std::vector<std::string> parts;
    for (const auto& e : d.entries()) {
        parts.push_back(std::to_string(e.proc->hash) + ":" + plts::state_digest(e.weight.mat()));
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (const auto& p : parts) {
        out += p + ";";
    }
    return out;
}

QuantumDist qdist_step(const QuantumDist& d, const Scheduler& s, const Action& mu, double eps) {
    QuantumDist out(d.reg());
    for (const auto& e : d.entries()) {
        for (const auto& m : plts::process_moves(e.proc, d.reg())) {
            if (m.scheduler != s || m.action != mu) {
                continue;
            }
            for (const auto& b : m.branches) {
                if (b.kraus.empty()) {
                    out.add(b.next, e.weight);
                    continue;
                }
                qmath::Matrix acc = qmath::Matrix::Zero(e.weight.mat().rows(), e.weight.mat().cols());
                for (const auto& k : b.kraus) {
                    acc += k * e.weight.mat() * k.adjoint();
                }
                out.add(b.next, qmath::DensityOperator(std::move(acc)));
            }
            break;
        }
    }
    return canonicalize(out, eps);
}

std::set<std::string> owned(const QuantumDist& d) {
    if (d.empty()) {
        return {};
    }
    return types::owned_qubits(d.entries().front().proc);
}

qmath::DensityOperator env(const QuantumDist& d) {
    if (d.empty()) {
        return qmath::DensityOperator::scalar(0.0);
    }
    return qmath::partial_trace(d.mass(), positions_of(d.reg(), owned(d)), qmath::TraceMode::Drop);
}

QuantumDist alpha(const plts::ProbDist& d, double eps) {
    QuantumDist out(d.reg());
    for (const auto& e : d.entries()) {
        out.add(e.proc, e.rho * e.weight);
    }
    return canonicalize(out, eps);
}

plts::ProbDist gamma(const QuantumDist& d) {
    plts::ProbDist out(d.reg());
    for (const auto& e : d.entries()) {
        double w = e.weight.trace();
        out.add(w, e.weight * (1.0 / w), e.proc);
    }
    return out.canonical();
}

QuantumDist apply_env_superop(const qmath::Superoperator& e, const std::vector<std::string>& qubits, const QuantumDist& d,
                              double eps) {
    if (e.n_qubits() != qubits.size()) {
        throw UsageError("superoperator acts on " + std::to_string(e.n_qubits()) + " qubits but " +
                         std::to_string(qubits.size()) + " were given");
    }
    auto own = owned(d);
    std::vector<std::size_t> pos;
    for (const auto& q : qubits) {
        if (own.count(q)) {
            throw UsageError("superoperator touches process-owned qubit '" + q + "'");
        }
        auto it = std::find(d.reg().begin(), d.reg().end(), q);
        if (it == d.reg().end()) {
            throw UsageError("qubit '" + q + "' is not in the register");
        }
        pos.push_back(static_cast<std::size_t>(it - d.reg().begin()));
    }
    auto padded = qmath::pad(e, pos, d.reg().size());
    QuantumDist out(d.reg());
    for (const auto& x : d.entries()) {
        out.add(x.proc, qmath::apply(padded, x.weight));
    }
    return canonicalize(out, eps);
}

std::set<Label> enabled_q(const QuantumDist& d) {
    std::set<Label> out;
    for (const auto& e : d.entries()) {
        for (const auto& m : plts::process_moves(e.proc, d.reg())) {
            out.emplace(m.scheduler, m.action);
        }
    }
    return out;
}

QuantumDist initial_qdist(const lang::Program& program, double eps) {
    return alpha(plts::initial_distribution(program), eps);
}

std::string to_string(const QuantumDist& d) {
    if (d.empty()) {
        return "eps";
    }
    std::string out;
    for (const auto& e : d.entries()) {
        if (!out.empty()) {
            out += " (+) ";
        }
        out += "delta<tr=" + lang::format_real(e.weight.trace()) + ", " + plts::state_digest(e.weight.mat()) + "> " +
               lang::print_process(e.proc);
    }
    return out;
}

}  // namespace lqcheck::qlts
