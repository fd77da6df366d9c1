#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lqcheck/ast.hpp"
#include "lqcheck/program.hpp"
#include "lqcheck/qmath.hpp"

namespace lqcheck::plts {

using lang::ProcessPtr;
using lang::Scheduler;
using lang::Value;
using Register = std::vector<std::string>;

inline constexpr double kWeightFloor = 1e-12;

struct Action {
    enum class Kind { Tau, Send, Recv };

    Kind kind = Kind::Tau;
    std::string channel;
    Value value = false;

    static Action tau() { return {}; }
    static Action send(std::string c, Value v) { return {Kind::Send, std::move(c), std::move(v)}; }
    static Action recv(std::string c, Value v) { return {Kind::Recv, std::move(c), std::move(v)}; }

    auto operator<=>(const Action&) const = default;
};

std::string to_string(const Action& a);

// Parses "tau", "c!v" or "c?v"; qubit names are recognised from `reg`.
Action parse_action(const std::string& text, const Register& reg);
Scheduler parse_scheduler(const std::string& text);

using Label = std::pair<Scheduler, Action>;

// One outcome of a move: Kraus operators over the full register (empty means identity)
// and the continuation.
struct Branch {
    std::vector<qmath::Matrix> kraus;
    ProcessPtr next;
};

// A transition of a process independent of the quantum state.
struct Move {
    Scheduler scheduler;
    Action action;
    std::vector<Branch> branches;
};

// All transitions of a closed process; checks that the process is deterministic.
std::vector<Move> process_moves(const ProcessPtr& p, const Register& reg);

struct Configuration {
    qmath::DensityOperator rho;
    ProcessPtr proc;
};

struct Entry {
    double weight = 0.0;
    qmath::DensityOperator rho;
    ProcessPtr proc;
};

class ProbDist {
public:
    ProbDist() = default;
    explicit ProbDist(Register reg) : reg_(std::move(reg)) {}

    static ProbDist point(Register reg, qmath::DensityOperator rho, ProcessPtr proc);

    const Register& reg() const { return reg_; }
    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    double mass() const;

    // Adds an entry without canonicalizing.
    void add(double weight, qmath::DensityOperator rho, ProcessPtr proc);

    // Merges equal configurations, prunes weights at the floor and sorts the support.
    ProbDist canonical(double eps = qmath::kDefaultEps) const;

    ProbDist scaled(double factor) const;

private:
    Register reg_;
    std::vector<Entry> entries_;
};

bool approx_eq(const ProbDist& a, const ProbDist& b, double eps = qmath::kDefaultEps);

ProbDist initial_distribution(const lang::Program& program);

struct Transition {
    Scheduler scheduler;
    Action action;
    ProbDist target;
};

std::vector<Transition> conf_moves(const Configuration& c, const Register& reg, double eps = qmath::kDefaultEps);

// Applies one move to a configuration; the result is canonical.
ProbDist apply_move(const Move& m, const qmath::DensityOperator& rho, const Register& reg, double eps = qmath::kDefaultEps);

ProbDist bot_step(const Configuration& c, const Register& reg, const Scheduler& s, const Action& mu,
                  double eps = qmath::kDefaultEps);

ProbDist scheduled_step(const ProbDist& d, const Scheduler& s, const Action& mu, double eps = qmath::kDefaultEps);

struct UnscheduledOptions {
    std::size_t cap = 4096;
    // When set, an element only deadlocks if it has no move with the action.
    bool progress_only = false;
};

std::vector<ProbDist> unscheduled_successors(const ProbDist& d, const Action& mu, const UnscheduledOptions& opts = {},
                                             double eps = qmath::kDefaultEps);

std::set<Label> enabled(const ProbDist& d);

// Digest of a density matrix on a rounded grid, used for hashing and output.
std::string state_digest(const qmath::Matrix& m);

}  // namespace lqcheck::plts
