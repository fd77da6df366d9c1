#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lqcheck/ast.hpp"
#include "lqcheck/qmath.hpp"

namespace lqcheck::lang {

struct WeightedState {
    double weight = 1.0;
    qmath::DensityOperator rho;
};

struct Program {
    std::map<std::string, ChannelType> channels;
    std::vector<std::string> qubits;
    std::map<std::string, std::shared_ptr<const OpDef>> superops;
    std::map<std::string, std::shared_ptr<const MeasDef>> measurements;
    std::vector<std::pair<std::string, ProcessPtr>> definitions;
    std::string main_name;
    ProcessPtr main;
    std::vector<WeightedState> initial;

    ProcessPtr definition(const std::string& name) const;
};

// Declarations of `base` (channels, qubits, custom operators, definitions) are in scope
// while parsing `text` when a base is given.
Program parse(std::string_view text, const Program* base = nullptr);

// Parses a single process expression against the declarations of `decls`.
ProcessPtr parse_process(std::string_view text, const Program& decls);

std::string print_program(const Program& program);
std::string format_real(double v);

std::shared_ptr<const OpDef> builtin_superop(const std::string& name);
std::shared_ptr<const MeasDef> builtin_measurement(const std::string& name);
std::shared_ptr<const MeasDef> coin_measurement(double p);

bool is_keyword(std::string_view word);

}  // namespace lqcheck::lang
