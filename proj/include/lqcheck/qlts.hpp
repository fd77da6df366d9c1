#pragma once

#include <set>
#include <string>
#include <vector>

#include "lqcheck/plts.hpp"

namespace lqcheck::qlts {

using plts::Action;
using plts::Label;
using plts::Register;
using lang::ProcessPtr;
using lang::Scheduler;

struct QEntry {
    ProcessPtr proc;
    qmath::DensityOperator weight;
};

// A finite map from processes to partial density operators over the full register.
class QuantumDist {
public:
    QuantumDist() = default;
    explicit QuantumDist(Register reg) : reg_(std::move(reg)) {}

    static QuantumDist point(Register reg, qmath::DensityOperator weight, ProcessPtr proc);

    const Register& reg() const { return reg_; }
    const std::vector<QEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    void add(ProcessPtr proc, qmath::DensityOperator weight);

    qmath::DensityOperator mass() const;
    double total_trace() const;

private:
    Register reg_;
    std::vector<QEntry> entries_;
};

// Merges equal processes, drops entries with trace at most eps and sorts the support.
QuantumDist canonicalize(const QuantumDist& d, double eps = qmath::kDefaultEps);

bool approx_eq(const QuantumDist& a, const QuantumDist& b, double eps = qmath::kDefaultEps);

// Digest over the rounded support; equal digests are still confirmed with approx_eq.
std::string digest(const QuantumDist& d);

QuantumDist qdist_step(const QuantumDist& d, const Scheduler& s, const Action& mu, double eps = qmath::kDefaultEps);

// Qubits owned by the support processes; empty for the empty distribution.
std::set<std::string> owned(const QuantumDist& d);

// Partial trace of the mass over the owned qubits; scalar 0 for the empty distribution.
qmath::DensityOperator env(const QuantumDist& d);

QuantumDist alpha(const plts::ProbDist& d, double eps = qmath::kDefaultEps);
plts::ProbDist gamma(const QuantumDist& d);

QuantumDist apply_env_superop(const qmath::Superoperator& e, const std::vector<std::string>& qubits, const QuantumDist& d,
                              double eps = qmath::kDefaultEps);

std::set<Label> enabled_q(const QuantumDist& d);

QuantumDist initial_qdist(const lang::Program& program, double eps = qmath::kDefaultEps);

std::string to_string(const QuantumDist& d);

}  // namespace lqcheck::qlts
