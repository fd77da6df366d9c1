#include "lqcheck/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::corpus {

namespace {

using bisim::Options;
using plts::Action;
using qmath::Complex;

const char* const kBob = R"(
proc Bob = t:AtoB?x . t:meas coin(1/2)(> g) .
  (if g = 0 then t:meas Mpm(x > p) else t:meas M01(x > p)) .
  t:guess!g . t:witness?w . t:secret?s .
  (tb:b!(g = s) . nil[] || tc:cheat!(not (g = s or p = w)) . nil[] || nil[x])
)";

const char* const kCoinHeader = R"(-- Quantum coin flipping
channel AtoB : qubit
channel guess, secret, witness, a, b, cheat : bit
)";

std::string coin_program(const std::string& body) { return std::string(kCoinHeader) + body + kBob; }

std::map<std::string, std::string, std::less<>> build_sources() {
    std::map<std::string, std::string, std::less<>> s;
    s["quantum_lottery"] = R"(-- Quantum lottery
channel c : qubit
channel a, b : bit
qubits q
state |0>

proc Pr = (t1:X(q) . t3:c!q . nil[]) + (t2:H(q) . t3:c!q . nil[])
proc An = t4:c?x . t4:meas M01(x > y) . if y = 0 then t5:a!1 . nil[x] else t6:b!1 . nil[x]
proc QL = Pr || An
)";
    const char* source_procs = R"(
proc P = t0:c!q . nil[]
)";
    s["sources_01"] = std::string("-- Uniform mixture of |0> and |1>\nchannel c : qubit\nqubits q\nstate 1/2 : |0>\nstate 1/2 : |1>\n") +
                      source_procs;
    s["sources_pm"] = std::string("-- Uniform mixture of |+> and |->\nchannel c : qubit\nqubits q\nstate 1/2 : |+>\nstate 1/2 : |->\n") +
                      source_procs;
    s["sources_maxmixed"] = std::string("-- Maximally mixed source\nchannel c : qubit\nqubits q\nstate maxmixed(1)\n") + source_procs;
    s["broken_nondet_context"] = R"(-- Observer measuring the received qubit in one of two bases
proc Rest = (if y = 0 then t4:tau . nil[] else nil[]) || nil[x]
proc Ctx = t1:c?x . ((t2:meas M01(x > y) . Rest) + (t3:meas Mpmi(x > y) . Rest))
)";
    s["ftl"] = R"(-- Entangled pair measured by two parties
channel c : bit
qubits q1 q2
state |PhiPlus>

proc A01 = t0:meas M01(q1 > x) . nil[q1]
proc Apm = t0:meas Mpm(q1 > x) . nil[q1]
proc B = (t1:meas M01(q2 > y) . t1:c!y . nil[q2]) + (t2:meas Mpmi(q2 > y) . t2:c!y . nil[q2])
proc Main01 = A01 || B
proc MainPm = Apm || B
)";
    s["ftl_context"] = R"(-- Observer of the announced outcome
proc Ctx = t5:c?x . if x = 0 then t6:tau . nil[] else nil[]
)";
    s["sdc"] = R"(-- Superdense coding
channel c : qubit
channel out : nat(0..3)
qubits q0 q1
state |PhiPlus>

proc A = (t0:I(q0) . t:c!q0 . nil[]) + (t1:X(q0) . t:c!q0 . nil[])
       + (t2:Z(q0) . t:c!q0 . nil[]) + (t3:ZX(q0) . t:c!q0 . nil[])
proc B = t:c?x . t:CNOT(x, q1) . t:H(x) . t:meas M01_2(x, q1 > y) . t:out!y . nil[x, q1]
proc Spec = (t0:tau . (t,t):tau . t:tau^3 . t:out!0 . nil[q0, q1])
          + (t1:tau . (t,t):tau . t:tau^3 . t:out!1 . nil[q0, q1])
          + (t2:tau . (t,t):tau . t:tau^3 . t:out!2 . nil[q0, q1])
          + (t3:tau . (t,t):tau . t:tau^3 . t:out!3 . nil[q0, q1])
proc Main = (A || B) \ {c}
)";
    s["teleportation"] = teleport_source(1.0, 0.0);
    s["qcf"] = coin_program(R"(qubits q
state |0>

proc Alice = t:meas coin(1/2)(> s) .
  (if s = 0 then t:H(q) . t:meas M01(q > w) else t:I(q) . t:meas Mpm(q > w)) .
  t:AtoB!q . t:guess?g . t:witness!w . t:secret!s . ta:a!(g = s) . nil[]
proc FairCoin = t:meas coin(1/2)(> x) . t:tau^2 . (t,t):tau . t:tau^2 . (t,t):tau^3 .
  (ta:a!x . nil[] || tb:b!x . nil[] || tc:cheat!0 . nil[] || nil[q])
)") + "proc QCF = (Alice || Bob) \\ {AtoB, guess, secret, witness}\n";
    s["alison"] = coin_program(R"(qubits q
state |0>

proc Alison = t:meas coin(1/2)(> s) .
  (if s = 0 then t:H(q) . t:meas M01(q > w) else t:I(q) . t:meas Mpm(q > w)) .
  t:AtoB!q . t:guess?g . t:witness!w .
  (if g = 0 then t:secret!1 . ta:a!0 . nil[] else t:secret!0 . ta:a!0 . nil[])
proc LeakyUnfairCoin = t:meas coin(3/4)(> x) . t:tau^2 . (t,t):tau . t:tau^2 . (t,t):tau^3 .
  (ta:a!0 . nil[] || tb:b!0 . nil[] || tc:cheat!x . nil[] || nil[q])
)") + "proc Attack = (Alison || Bob) \\ {AtoB, guess, secret, witness}\n";
    s["alix"] = coin_program(R"(qubits q q'
state |00>

proc Alix = t:H(q) . t:CNOT(q, q') . t:AtoB!q . t:guess?g .
  (if g = 0 then t:meas Mpm(q' > w) else t:meas M01(q' > w)) . t:witness!w .
  (if g = 0 then t:secret!1 . ta:a!0 . nil[q'] else t:secret!0 . ta:a!0 . nil[q'])
proc UnfairCoin = t:tau^2 . (t,t):tau . t:tau^2 . (t,t):tau . t:tau . (t,t):tau^2 .
  (ta:a!0 . nil[] || tb:b!0 . nil[] || tc:cheat!0 . nil[] || nil[q, q'])
)") + "proc Attack = (Alix || Bob) \\ {AtoB, guess, secret, witness}\n";
    s["alice_confidentiality"] = R"(-- Alice's two ways of encoding a secret bit
channel AtoB : qubit
qubits q
state |0>

proc Alice0 = t:H(q) . t:meas M01(q > w) . t:AtoB!q . nil[]
proc Alice1 = t:I(q) . t:meas Mpm(q > w) . t:AtoB!q . nil[]
)";
    s["superopneed"] = R"(-- Measuring a received qubit in two different bases
channel inq : qubit
channel c : bit
qubits q
state |i>

proc P = t:inq?x . t:meas M01(x > y) . t:c!y . nil[x]
proc Q = t:inq?x . t:meas Mpm(x > y) . t:c!y . nil[x]
)";
    return s;
}

const std::map<std::string, std::string, std::less<>>& sources() {
    static const auto s = build_sources();
    return s;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string num(double v) { return bisim::format_number(v); }

std::string masses_text(const std::vector<double>& ms) {
    std::string out = "{";
    for (std::size_t i = 0; i < ms.size(); ++i) {
        out += (i ? ", " : "") + num(ms[i]);
    }
    return out + "}";
}

Check bisim_check(const std::string& what, const qlts::QuantumDist& d, const qlts::QuantumDist& t, const Options& o,
                  bool expect = true) {
    auto v = bisim::ground_bisim(d, t, o);
    std::string obs = v.equivalent ? "equivalent" : "not equivalent (" + bisim::to_string(v.mismatch) + ")";
    obs += ", " + std::to_string(v.stats.pairs_visited) + " pairs";
    return {what, v.equivalent == expect, obs};
}

lang::Program context_program(std::string_view key, const lang::Program& base) {
    return lang::parse(source(key), &base);
}

// Largest mass over scheduled wildcard runs, and the reachable mass sets.
std::vector<bisim::StepReport> replay(const plts::ProbDist& d, const lang::ProcessPtr& ctx, const std::string& schedule,
                                      bisim::ReplayMode mode, double eps) {
    bisim::ReplayOptions ro;
    ro.mode = mode;
    ro.eps = eps;
    return bisim::context_replay(d, ctx, bisim::parse_schedule(schedule, d.reg()), ro);
}

bool all_equal(const std::vector<double>& ms, double v, double tol) {
    return !ms.empty() && std::all_of(ms.begin(), ms.end(), [&](double m) { return near(m, v, tol); });
}

bool same_set(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!near(a[i], b[i], tol)) {
            return false;
        }
    }
    return true;
}

qlts::QuantumDist step_trace(qlts::QuantumDist d, const std::string& schedule) {
    for (const auto& e : bisim::parse_schedule(schedule, d.reg())) {
        auto labels = bisim::resolve_entry(e, qlts::enabled_q(d));
        if (labels.size() != 1) {
            throw UsageError("schedule entry " + bisim::to_string(e) + " does not select a single transition");
        }
        d = qlts::qdist_step(d, labels.front().first, labels.front().second);
    }
    return d;
}

Result run_quantum_lottery(const Options& o) {
    Result r{"quantum_lottery", {}};
    auto prog = load("quantum_lottery");
    auto sigma = types::owned_qubits(prog.main);
    r.checks.push_back({"typing {q} |- QL", sigma == types::QubitSet{"q"}, types::to_string(sigma)});
    auto root = start(prog, "QL");
    auto en = plts::enabled(root);
    std::set<plts::Label> expect{{lang::Scheduler::single({"t1"}), Action::tau()}, {lang::Scheduler::single({"t2"}), Action::tau()}};
    r.checks.push_back({"root enables only t1 and t2", en == expect, std::to_string(en.size()) + " labels"});
    auto d = start(prog, "QL");
    for (const auto& e : bisim::parse_schedule("t2,(t3,t4),t4", d.reg())) {
        auto labels = bisim::resolve_entry(e, plts::enabled(d));
        d = labels.empty() ? plts::ProbDist(d.reg()) : plts::scheduled_step(d, labels.front().first, labels.front().second, o.eps);
    }
    auto a = plts::scheduled_step(d, lang::Scheduler::single({"t5"}), Action::send("a", lang::Nat{1}), o.eps);
    auto b = plts::scheduled_step(d, lang::Scheduler::single({"t6"}), Action::send("b", lang::Nat{1}), o.eps);
    r.checks.push_back({"t2,(t3,t4),t4 splits 1/2 over a!1 and b!1", near(a.mass(), 0.5, o.eps) && near(b.mass(), 0.5, o.eps),
                        "a!1 " + num(a.mass()) + ", b!1 " + num(b.mass())});
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> sources_pair() {
    return {qstart(load("sources_01"), "P"), qstart(load("sources_pm"), "P")};
}

Result run_sources_01_vs_pm(const Options& o) {
    Result r{"sources_01_vs_pm", {}};
    auto [d01, dpm] = sources_pair();
    r.checks.push_back(bisim_check("alpha(D01) ~ alpha(Dpm)", d01, dpm, o));
    return r;
}

Result run_sources_vs_maxmixed(const Options& o) {
    Result r{"sources_vs_maxmixed", {}};
    auto [d01, dpm] = sources_pair();
    auto mm = qstart(load("sources_maxmixed"), "P");
    r.checks.push_back(bisim_check("alpha(D01) ~ delta<I/2>", d01, mm, o));
    r.checks.push_back(bisim_check("alpha(Dpm) ~ delta<I/2>", dpm, mm, o));
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> ftl_pair() {
    auto prog = load("ftl");
    return {qstart(prog, "Main01"), qstart(prog, "MainPm")};
}

Result run_ftl_scheduled(const Options& o) {
    Result r{"ftl_scheduled", {}};
    auto [a, b] = ftl_pair();
    r.checks.push_back(bisim_check("A01 || B ~ Apm || B", a, b, o));
    return r;
}

Result run_ftl_unscheduled_replay(const Options& o) {
    Result r{"ftl_unscheduled_replay", {}};
    auto prog = load("ftl");
    auto ctx = context_program("ftl_context", prog).main;
    auto after = [&](const std::string& def) {
        return plts::scheduled_step(start(prog, def), lang::Scheduler::single({"t0"}), Action::tau(), o.eps);
    };
    auto r01 = replay(after("Main01"), ctx, "*:tau,*:tau,*:tau", bisim::ReplayMode::Unscheduled, o.eps).back();
    auto rpm = replay(after("MainPm"), ctx, "*:tau,*:tau,*:tau", bisim::ReplayMode::Unscheduled, o.eps).back();
    r.checks.push_back({"A01 || B reaches mass 3/4", near(r01.progress_max(), 0.75, o.eps) && near(r01.max(), 0.75, o.eps),
                        "progress " + masses_text(r01.progress_masses)});
    r.checks.push_back({"Apm || B always ends with mass 1/2", all_equal(rpm.progress_masses, 0.5, o.eps) && near(rpm.max(), 0.5, o.eps),
                        "progress " + masses_text(rpm.progress_masses)});
    return r;
}

Result run_broken_nondet_replay(const Options& o) {
    Result r{"broken_nondet_replay", {}};
    auto p01 = load("sources_01");
    auto ppm = load("sources_pm");
    auto ctx = context_program("broken_nondet_context", p01).main;
    const std::string sched = "*:tau,*:tau,*:tau";
    auto u01 = replay(start(p01, "P"), ctx, sched, bisim::ReplayMode::Unscheduled, o.eps).back();
    auto upm = replay(start(ppm, "P"), ctx, sched, bisim::ReplayMode::Unscheduled, o.eps).back();
    r.checks.push_back({"unscheduled D01 reaches mass 3/4", near(u01.max(), 0.75, o.eps) && near(u01.progress_max(), 0.75, o.eps),
                        "progress " + masses_text(u01.progress_masses)});
    r.checks.push_back({"unscheduled Dpm always ends with mass 1/2", all_equal(upm.progress_masses, 0.5, o.eps),
                        "progress " + masses_text(upm.progress_masses)});
    auto s01 = replay(start(p01, "P"), ctx, sched, bisim::ReplayMode::Scheduled, o.eps).back();
    auto spm = replay(start(ppm, "P"), ctx, sched, bisim::ReplayMode::Scheduled, o.eps).back();
    r.checks.push_back({"scheduled mass sets coincide with max 1/2",
                        same_set(s01.masses, spm.masses, o.eps) && near(s01.max(), 0.5, o.eps),
                        masses_text(s01.masses) + " vs " + masses_text(spm.masses)});
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> sdc_pair() {
    auto prog = load("sdc");
    return {qstart(prog, "Main"), qstart(prog, "Spec")};
}

Result run_sdc(const Options& o) {
    Result r{"sdc", {}};
    auto [main, spec] = sdc_pair();
    r.checks.push_back(bisim_check("SDC ~ Spec on |PhiPlus>", main, spec, o));
    for (lang::Nat n = 0; n < 4; ++n) {
        std::string tn = "t" + std::to_string(n);
        auto d = step_trace(main, tn + ",(t,t),t,t,t");
        auto out = qlts::qdist_step(d, lang::Scheduler::single({"t"}), Action::send("out", n), o.eps);
        r.checks.push_back({"choice " + tn + " outputs " + std::to_string(n) + " with probability 1",
                            near(out.total_trace(), 1.0, o.eps), num(out.total_trace())});
    }
    return r;
}

std::vector<std::pair<Complex, Complex>> teleport_inputs() {
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<std::pair<Complex, Complex>> out{{1.0, 0.0}, {0.0, 1.0}, {h, h}, {h, Complex(0.0, h)}};
    std::mt19937_64 rng(20240607);
    std::normal_distribution<double> g;
    for (int i = 0; i < 10; ++i) {
        Complex a(g(rng), g(rng));
        Complex b(g(rng), g(rng));
        double n = std::sqrt(std::norm(a) + std::norm(b));
        out.emplace_back(a / n, b / n);
    }
    return out;
}

Result run_teleportation(const Options& o) {
    Result r{"teleportation", {}};
    int idx = 0;
    for (auto [a, b] : teleport_inputs()) {
        auto prog = lang::parse(teleport_source(a, b));
        auto main = qstart(prog, "Main");
        auto spec = qstart(prog, "Spec");
        auto label = "psi#" + std::to_string(idx++);
        r.checks.push_back(bisim_check(label + ": Tel ~ Spec", main, spec, o));
        auto dprime = step_trace(main, "t,t,t");
        std::vector<qmath::Vector> psi;
        for (auto [x, y] : std::vector<std::pair<Complex, Complex>>{{a, b}, {b, a}, {a, -b}, {b, -a}}) {
            qmath::Vector v(2);
            v << x, y;
            psi.push_back(v);
        }
        bool ok = dprime.entries().size() == 4;
        for (const auto& e : dprime.entries()) {
            bool matched = false;
            for (int n = 0; n < 4 && !matched; ++n) {
                auto basis = qmath::outer(qmath::ket(std::string(1, n >> 1 ? '1' : '0') + (n & 1 ? "1" : "0"))).mat();
                qmath::Matrix expect = 0.25 * qmath::tensor(basis, qmath::Matrix(psi[n] * psi[n].adjoint()));
                matched = qmath::approx_eq(e.weight.mat(), expect, o.eps);
            }
            ok = ok && matched;
        }
        r.checks.push_back({label + ": D' = (+)_n 1/4 |n><n| (x) |psi_n><psi_n|", ok,
                            std::to_string(dprime.entries().size()) + " entries"});
    }
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> qcf_pair() {
    auto prog = load("qcf");
    return {qstart(prog, "QCF"), qstart(prog, "FairCoin")};
}

Result run_qcf_correctness(const Options& o) {
    Result r{"qcf_correctness", {}};
    auto [qcf, fair] = qcf_pair();
    r.checks.push_back(bisim_check("QCF ~ FairCoin", qcf, fair, o));
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> confidentiality_pair() {
    auto prog = load("alice_confidentiality");
    return {qstart(prog, "Alice0"), qstart(prog, "Alice1")};
}

Result run_qcf_alice_confidentiality(const Options& o) {
    Result r{"qcf_alice_confidentiality", {}};
    auto [a0, a1] = confidentiality_pair();
    r.checks.push_back(bisim_check("Alice0 ~ Alice1", a0, a1, o));
    auto prog = load("alice_confidentiality");
    auto target = lang::parse_process("t:AtoB!q . nil[]", prog);
    qmath::Matrix half = qmath::Matrix::Identity(2, 2) * 0.5;
    for (const auto& [name, d] : {std::pair{"Alice0", a0}, std::pair{"Alice1", a1}}) {
        auto after = step_trace(d, "t,t");
        bool ok = after.entries().size() == 1 && lang::equal(after.entries().front().proc, target) &&
                  qmath::approx_eq(after.entries().front().weight.mat(), half, o.eps);
        r.checks.push_back({std::string(name) + " reaches delta<I/2> AtoB!q after two steps", ok, qlts::to_string(after)});
    }
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> alison_pair() {
    auto prog = load("alison");
    return {qstart(prog, "Attack"), qstart(prog, "LeakyUnfairCoin")};
}

Check cheat_check(const qlts::QuantumDist& root, double expect, double eps) {
    auto ms = action_masses(root, Action::send("cheat", lang::Nat{1}), eps);
    bool ok;
    if (expect == 0.0) {
        ok = std::all_of(ms.begin(), ms.end(), [&](double m) { return m <= eps; });
    } else {
        ok = all_equal(ms, expect, eps);
    }
    return {"probability of cheat!1 is " + num(expect), ok, std::to_string(ms.size()) + " transitions, masses " + masses_text(ms)};
}

Result run_alison_attack(const Options& o) {
    Result r{"alison_attack", {}};
    auto [attack, spec] = alison_pair();
    r.checks.push_back(bisim_check("(Alison || Bob) ~ LeakyUnfairCoin", attack, spec, o));
    r.checks.push_back(cheat_check(attack, 0.25, o.eps));
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> alix_pair() {
    auto prog = load("alix");
    return {qstart(prog, "Attack"), qstart(prog, "UnfairCoin")};
}

Result run_alix_attack(const Options& o) {
    Result r{"alix_attack", {}};
    auto [attack, spec] = alix_pair();
    r.checks.push_back(bisim_check("(Alix || Bob) ~ UnfairCoin", attack, spec, o));
    r.checks.push_back(cheat_check(attack, 0.0, o.eps));
    return r;
}

std::pair<qlts::QuantumDist, qlts::QuantumDist> superopneed_pair() {
    auto prog = load("superopneed");
    return {qstart(prog, "P"), qstart(prog, "Q")};
}

std::vector<bisim::Probe> superopneed_probes() {
    return {{"SH", lang::builtin_superop("SH")->op, {"q"}}};
}

Result run_superopneed_probe(const Options& o) {
    Result r{"superopneed_probe", {}};
    auto [p, q] = superopneed_pair();
    auto id = bisim::superop_probe(p, q, {}, o);
    r.checks.push_back({"identity probe passes", id.equivalent, id.equivalent ? "equivalent" : "not equivalent"});
    auto sh = bisim::superop_probe(p, q, superopneed_probes(), o);
    double diff = sh.env_mismatch ? sh.env_mismatch->max_abs_diff : 0.0;
    bool on_send = !sh.witness.empty() && sh.witness.back().second.kind == Action::Kind::Send &&
                   sh.witness.back().second.channel == "c";
    auto c1 = bisim::replay(qlts::apply_env_superop(superopneed_probes()[0].op, {"q"}, p),
                            qlts::apply_env_superop(superopneed_probes()[0].op, {"q"}, q),
                            {{lang::Scheduler::single({"t"}), Action::recv("inq", lang::QubitName{"q"})},
                             {lang::Scheduler::single({"t"}), Action::tau()},
                             {lang::Scheduler::single({"t"}), Action::send("c", lang::Nat{1})}});
    double c1diff = std::abs(c1.first.total_trace() - c1.second.total_trace());
    r.checks.push_back({"SH probe refutes on the c output by 1/2",
                        !sh.equivalent && sh.probe == "SH" && on_send && near(diff, 0.5, o.eps) && near(c1diff, 0.5, o.eps),
                        "probe " + sh.probe + ", mismatch " + num(diff) + ", c!1 mass difference " + num(c1diff)});
    return r;
}

std::vector<Entry> build_entries() {
    return {
        {"quantum_lottery", "lottery: typing, initial choices and a scheduled run", run_quantum_lottery, nullptr, {}},
        {"sources_01_vs_pm", "two qubit sources with the same density operator", run_sources_01_vs_pm, sources_pair, {}},
        {"sources_vs_maxmixed", "both sources against a maximally mixed point distribution", run_sources_vs_maxmixed,
         [] { return std::pair{sources_pair().first, qstart(load("sources_maxmixed"), "P")}; }, {}},
        {"ftl_scheduled", "entangled measurements under scheduled semantics", run_ftl_scheduled, ftl_pair, {}},
        {"ftl_unscheduled_replay", "entangled measurements separated without schedulers", run_ftl_unscheduled_replay, nullptr, {}},
        {"broken_nondet_replay", "qubit sources separated without schedulers", run_broken_nondet_replay, nullptr, {}},
        {"sdc", "superdense coding against its specification", run_sdc, sdc_pair, {}},
        {"teleportation", "teleportation against a swap, for 14 input states", run_teleportation,
         [] {
             auto prog = load("teleportation");
             return std::pair{qstart(prog, "Main"), qstart(prog, "Spec")};
         },
         {}},
        {"qcf_correctness", "quantum coin flipping against a fair coin", run_qcf_correctness, qcf_pair, {}},
        {"qcf_alice_confidentiality", "Alice's two encodings are indistinguishable", run_qcf_alice_confidentiality,
         confidentiality_pair, {}},
        {"alison_attack", "cheating Alice guessing the basis", run_alison_attack, alison_pair, {}},
        {"alix_attack", "cheating Alice using entanglement", run_alix_attack, alix_pair, {}},
        {"superopneed_probe", "measurements told apart only after an environment superoperator", run_superopneed_probe,
         superopneed_pair, superopneed_probes()},
    };
}

}  // namespace

std::vector<std::string> source_keys() {
    std::vector<std::string> out;
    for (const auto& [k, v] : sources()) {
        out.push_back(k);
    }
    return out;
}

const std::string& source(std::string_view key) {
    auto it = sources().find(key);
    if (it == sources().end()) {
        throw UsageError("unknown corpus source '" + std::string(key) + "'");
    }
    return it->second;
}

lang::Program load(std::string_view key) { return lang::parse(source(key)); }

std::string teleport_source(Complex a, Complex b) {
    auto c = [](Complex z) {
        return "(" + lang::format_real(z.real()) + (z.imag() < 0 ? " - " : " + ") + lang::format_real(std::abs(z.imag())) + "i)";
    };
    return "-- Quantum teleportation\nchannel c : nat(0..3)\nchannel out : qubit\nqubits q0 q1 q2\nstate ket[" + c(a) + ", " +
           c(b) + R"(] * |PhiPlus>

proc A = t:CNOT(q0, q1) . t:H(q0) . t:meas M01_2(q0, q1 > x) . t:c!x . nil[q0, q1]
proc B = t:c?y . if y = 0 then t:I(q2) . t:out!q2 . nil[]
  else if y = 1 then t:X(q2) . t:out!q2 . nil[]
  else if y = 2 then t:Z(q2) . t:out!q2 . nil[]
  else t:ZX(q2) . t:out!q2 . nil[]
proc Spec = t:tau^3 . (t,t):tau . t:SWAP(q0, q2) . t:out!q2 . nil[q0, q1]
proc Main = (A || B) \ {c}
)";
}

plts::ProbDist start(const lang::Program& prog, const std::string& definition) {
    auto p = prog.definition(definition);
    if (!p) {
        throw UsageError("no definition named '" + definition + "'");
    }
    plts::ProbDist d(prog.qubits);
    for (const auto& s : prog.initial) {
        d.add(s.weight, s.rho, p);
    }
    return d.canonical();
}

qlts::QuantumDist qstart(const lang::Program& prog, const std::string& definition) {
    return qlts::alpha(start(prog, definition));
}

std::vector<qlts::QuantumDist> reachable(const qlts::QuantumDist& root, double eps) {
    std::vector<qlts::QuantumDist> seen{root};
    std::map<std::string, std::vector<std::size_t>> index{{qlts::digest(root), {0}}};
    for (std::size_t i = 0; i < seen.size(); ++i) {
        auto cur = seen[i];
        for (const auto& [s, a] : qlts::enabled_q(cur)) {
            auto next = qlts::qdist_step(cur, s, a, eps);
            if (next.empty()) {
                continue;
            }
            auto& slots = index[qlts::digest(next)];
            bool dup = std::any_of(slots.begin(), slots.end(), [&](std::size_t k) { return qlts::approx_eq(seen[k], next, eps); });
            if (!dup) {
                slots.push_back(seen.size());
                seen.push_back(std::move(next));
            }
        }
    }
    return seen;
}

std::vector<double> action_masses(const qlts::QuantumDist& root, const plts::Action& a, double eps) {
    std::vector<double> out;
    for (const auto& d : reachable(root, eps)) {
        for (const auto& [s, mu] : qlts::enabled_q(d)) {
            if (mu == a) {
                out.push_back(qlts::qdist_step(d, s, mu, eps).total_trace());
            }
        }
    }
    return out;
}

bool Result::pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<Entry>& entries() {
    static const auto e = build_entries();
    return e;
}

const Entry* find(std::string_view name) {
    for (const auto& e : entries()) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

}  // namespace lqcheck::corpus
