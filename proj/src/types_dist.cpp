#include "lqcheck/error.hpp"
#include "lqcheck/plts.hpp"
#include "lqcheck/qlts.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::types {

namespace {

void check_dim(const qmath::DensityOperator& rho, std::size_t n) {
    if (rho.n_qubits() != n) {
        throw TypeError("state acts on " + std::to_string(rho.n_qubits()) + " qubits but the register has " +
                        std::to_string(n));
    }
}

}  // namespace

ConfigType type_distribution(const plts::ProbDist& d) {
    std::vector<lang::ProcessPtr> procs;
    for (const auto& e : d.entries()) {
        check_dim(e.rho, d.reg().size());
        procs.push_back(e.proc);
    }
    return type_support(procs, d.reg());
}

ConfigType type_distribution(const qlts::QuantumDist& d) {
    std::vector<lang::ProcessPtr> procs;
    for (const auto& e : d.entries()) {
        check_dim(e.weight, d.reg().size());
        procs.push_back(e.proc);
    }
    return type_support(procs, d.reg());
}

}  // namespace lqcheck::types
