#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lqcheck/bisim.hpp"
#include "lqcheck/program.hpp"
#include "lqcheck/qlts.hpp"

namespace lqcheck::corpus {

// Embedded DSL programs, by key.
std::vector<std::string> source_keys();
const std::string& source(std::string_view key);
lang::Program load(std::string_view key);

// Teleportation program for the input state a|0> + b|1>.
std::string teleport_source(qmath::Complex a, qmath::Complex b);

// Initial distribution of the program's states paired with the named definition.
plts::ProbDist start(const lang::Program& prog, const std::string& definition);
qlts::QuantumDist qstart(const lang::Program& prog, const std::string& definition);

// Trace of every transition with action `a` over all reachable quantum distributions.
std::vector<double> action_masses(const qlts::QuantumDist& root, const plts::Action& a,
                                  double eps = qmath::kDefaultEps);

// Every reachable quantum distribution from `root` (root included).
std::vector<qlts::QuantumDist> reachable(const qlts::QuantumDist& root, double eps = qmath::kDefaultEps);

struct Check {
    std::string what;
    bool pass = false;
    std::string observed;
};

struct Result {
    std::string name;
    std::vector<Check> checks;

    bool pass() const;
};

struct Entry {
    std::string name;
    std::string description;
    std::function<Result(const bisim::Options&)> run;
    // The pair compared by ground bisimilarity, when the entry has one.
    std::function<std::pair<qlts::QuantumDist, qlts::QuantumDist>()> pair;
    std::vector<bisim::Probe> probes;
};

const std::vector<Entry>& entries();
const Entry* find(std::string_view name);

}  // namespace lqcheck::corpus
