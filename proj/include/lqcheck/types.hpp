#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lqcheck/ast.hpp"

namespace lqcheck::plts {
class ProbDist;
}

namespace lqcheck::qlts {
class QuantumDist;
}

namespace lqcheck::types {

using QubitSet = std::set<std::string>;

enum class VarType { Bool, Nat, Qubit };

struct ConfigType {
    QubitSet sigma_rho;
    QubitSet sigma_p;
    bool wildcard = false;

    bool operator==(const ConfigType&) const = default;
};

std::string to_string(const QubitSet& s);

// Unique Σ with Σ ⊢ P. `env` types the free variables of P.
QubitSet typecheck(const lang::ProcessPtr& p, const std::map<std::string, VarType>& env = {});

// Σ for a closed process; same as typecheck but rejects free variables.
QubitSet owned_qubits(const lang::ProcessPtr& p);

std::set<std::string> uic(const lang::ProcessPtr& p);
bool input_restricted(const lang::ProcessPtr& p);

ConfigType type_support(const std::vector<lang::ProcessPtr>& procs, const std::vector<std::string>& reg);
ConfigType type_distribution(const plts::ProbDist& d);
ConfigType type_distribution(const qlts::QuantumDist& d);

// Lint: a syntactic choice point whose branches share a tag that could fire on both sides.
std::vector<std::string> determinism_lint(const lang::ProcessPtr& p);

}  // namespace lqcheck::types
