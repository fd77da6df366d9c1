#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqcheck/plts.hpp"
#include "lqcheck/qlts.hpp"

namespace lqcheck::bisim {

using plts::Action;
using plts::Label;
using qlts::QuantumDist;

enum class MismatchKind { None, Env, OneSided, Type };

std::string to_string(MismatchKind k);

struct EnvMismatch {
    qmath::Matrix left;
    qmath::Matrix right;
    double max_abs_diff = 0.0;
};

struct Stats {
    std::size_t pairs_visited = 0;
    std::size_t max_depth = 0;
    double wall_ms = 0.0;
};

struct Verdict {
    bool equivalent = true;
    std::string theorem_basis;
    std::vector<Label> witness;
    MismatchKind mismatch = MismatchKind::None;
    std::string detail;
    std::optional<EnvMismatch> env_mismatch;
    // Name of the probe that refuted the pair, when produced by superop_probe.
    std::string probe;
    std::vector<std::string> warnings;
    Stats stats;
};

struct Options {
    double eps = qmath::kDefaultEps;
    unsigned threads = 1;
};

Verdict ground_bisim(const QuantumDist& d, const QuantumDist& t, const Options& opts = {});

// Steps both distributions along a trace.
std::pair<QuantumDist, QuantumDist> replay(const QuantumDist& d, const QuantumDist& t, const std::vector<Label>& trace,
                                           double eps = qmath::kDefaultEps);

struct Probe {
    std::string name;
    qmath::Superoperator op;
    std::vector<std::string> qubits;
};

// Ground bisimilarity after the identity and each probe applied to the environment.
// A pass is evidence only; a failure refutes labelled bisimilarity.
Verdict superop_probe(const QuantumDist& d, const QuantumDist& t, const std::vector<Probe>& probes,
                      const Options& opts = {});

enum class ReplayMode { Scheduled, Unscheduled };

struct ScheduleEntry {
    // No scheduler means any scheduler enabled with the action.
    std::optional<lang::Scheduler> scheduler;
    // No action means the single action enabled for the scheduler.
    std::optional<Action> action;
};

// Comma-separated entries of the form `s`, `s:action` or `*:action`.
std::vector<ScheduleEntry> parse_schedule(const std::string& text, const plts::Register& reg);

// Labels of `d` matching the entry.
std::vector<Label> resolve_entry(const ScheduleEntry& e, const std::set<Label>& enabled);
std::string to_string(const ScheduleEntry& e);

struct StepReport {
    std::size_t step = 0;
    ScheduleEntry entry;
    // Distinct masses over all runs, including deadlocking choices.
    std::vector<double> masses;
    // Distinct masses over runs where every element able to perform the action does so.
    std::vector<double> progress_masses;
    std::size_t count = 0;
    std::vector<std::string> notes;

    double min() const;
    double max() const;
    double progress_min() const;
    double progress_max() const;
};

struct ReplayOptions {
    ReplayMode mode = ReplayMode::Scheduled;
    std::size_t cap = 4096;
    double eps = qmath::kDefaultEps;
};

// Puts every support element in parallel with `context` and replays the schedule.
std::vector<StepReport> context_replay(const plts::ProbDist& d, const lang::ProcessPtr& context,
                                       const std::vector<ScheduleEntry>& schedule, const ReplayOptions& opts = {});

std::string verdict_json(const Verdict& v, int indent = 2);
std::string replay_json(const std::vector<StepReport>& reports, int indent = 2);
std::string format_number(double v);

}  // namespace lqcheck::bisim
