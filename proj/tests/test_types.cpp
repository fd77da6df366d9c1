#include "doctest.h"
#include "lqcheck/corpus.hpp"
#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

using namespace lqcheck;
using types::QubitSet;

namespace {

const char* const kDecls = R"(
channel c : qubit
channel o : bit
channel n : nat(0..3)
qubits q r
superop Half = [[0.5, 0], [0, 0.5]]
proc Dummy = nil[]
)";

lang::ProcessPtr proc(const std::string& text) { return lang::parse_process(text, lang::parse(kDecls)); }

}  // namespace

TEST_CASE("lottery typing") {
    auto prog = corpus::load("quantum_lottery");
    CHECK(types::owned_qubits(prog.definition("Pr")) == QubitSet{"q"});
    CHECK(types::owned_qubits(prog.definition("An")).empty());
    CHECK(types::owned_qubits(prog.main) == QubitSet{"q"});
    CHECK(types::uic(prog.main) == std::set<std::string>{"c"});
    CHECK_FALSE(types::input_restricted(prog.main));
}

TEST_CASE("coin flipping is input-restricted") {
    auto prog = corpus::load("qcf");
    CHECK(types::input_restricted(prog.definition("QCF")));
    CHECK(types::owned_qubits(prog.definition("QCF")) == QubitSet{"q"});
    CHECK(types::owned_qubits(prog.definition("FairCoin")) == QubitSet{"q"});
}

TEST_CASE("corpus specifications match their implementations") {
    auto alix = corpus::load("alix");
    CHECK(types::owned_qubits(alix.definition("Attack")) == types::owned_qubits(alix.definition("UnfairCoin")));
    auto sdc = corpus::load("sdc");
    CHECK(types::owned_qubits(sdc.definition("Main")) == QubitSet{"q0", "q1"});
    CHECK(types::owned_qubits(sdc.definition("Spec")) == QubitSet{"q0", "q1"});
    auto tel = corpus::load("teleportation");
    CHECK(types::owned_qubits(tel.definition("Main")) == QubitSet{"q0", "q1", "q2"});
    CHECK(types::owned_qubits(tel.definition("Spec")) == QubitSet{"q0", "q1", "q2"});
}

TEST_CASE("well-typed processes") {
    CHECK(types::owned_qubits(proc("t:H(q) . t:c!q . nil[]")) == QubitSet{"q"});
    CHECK(types::owned_qubits(proc("t:c?x . t:H(x) . nil[x]")).empty());
    CHECK(types::owned_qubits(proc("t:meas M01(q > x) . if x = 0 then nil[q] else nil[q]")) == QubitSet{"q"});
    CHECK(types::owned_qubits(proc("t:c!q . nil[] || t:c!r . nil[]")) == QubitSet{"q", "r"});
    CHECK(types::owned_qubits(proc("(t,u):tau . t:o!true . nil[]")).empty());
}

TEST_CASE("linearity violations") {
    CHECK_THROWS_AS(types::owned_qubits(proc("t:c!q . nil[] || t:c!q . nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("nil[q] || nil[q]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:c!q . t:c!q . nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:H(q) . nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("nil[q] + nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:c?x . nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:Half(q) . nil[q]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:meas M01(q > x) . if x = 0 then nil[q] else nil[]")), TypeError);
}

TEST_CASE("value typing") {
    CHECK_THROWS_AS(types::owned_qubits(proc("t:n!7 . nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:o!q . nil[q]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:c!1 . nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:o?x . if x then nil[] else nil[]")), TypeError);
    CHECK_THROWS_AS(types::owned_qubits(proc("t:o!y . nil[]")), TypeError);
    CHECK_NOTHROW(types::owned_qubits(proc("t:o?x . if x <= 0 then nil[] else nil[]")));
}

TEST_CASE("open definitions type under an environment") {
    auto p = proc("t:o!y . nil[x]");
    CHECK(types::typecheck(p, {{"y", types::VarType::Nat}, {"x", types::VarType::Qubit}}) == QubitSet{"x"});
}

TEST_CASE("distribution typing") {
    auto a = proc("nil[q]");
    auto b = proc("nil[r]");
    auto t = types::type_support({a, a}, {"q", "r"});
    CHECK(t.sigma_p == QubitSet{"q"});
    CHECK(t.sigma_rho == QubitSet{"q", "r"});
    CHECK_THROWS_AS(types::type_support({a, b}, {"q", "r"}), TypeError);
    CHECK(types::type_support({}, {"q"}).wildcard);
    CHECK_THROWS_AS(types::type_support({a}, {"r"}), TypeError);
}

TEST_CASE("determinism lint") {
    CHECK(types::determinism_lint(proc("t:o!0 . nil[] + t:o!1 . nil[]")).size() == 1);
    CHECK(types::determinism_lint(proc("t1:o!0 . nil[] + t2:o!1 . nil[]")).empty());
}
