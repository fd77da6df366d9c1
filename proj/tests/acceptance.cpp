#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lqcheck/bisim.hpp"
#include "lqcheck/corpus.hpp"
#include "lqcheck/error.hpp"
#include "lqcheck/qlts.hpp"
#include "lqcheck/types.hpp"

using namespace lqcheck;
using plts::Action;
using plts::ProbDist;
using qlts::QuantumDist;
using qmath::Complex;
using qmath::Matrix;

namespace {

constexpr double kEps = 1e-9;

struct Outcome {
    bool pass = true;
    std::string observed;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            observed += (observed.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { observed += (observed.empty() ? "" : "; ") + s; }
};

std::string num(double v) { return bisim::format_number(v); }

// Independent linear algebra.

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix basis_proj(int n, int dim) {
    Matrix m = Matrix::Zero(dim, dim);
    m(n, n) = 1.0;
    return m;
}

double max_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return INFINITY;
    }
    return (a - b).cwiseAbs().maxCoeff();
}

// Traces out `drop` (big-endian positions) from an n-qubit matrix by summing matrix entries.
Matrix ptrace(const Matrix& rho, std::size_t n, const std::vector<std::size_t>& drop) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) {
            keep.push_back(i);
        }
    }
    auto compose = [&](std::size_t k, std::size_t d) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto kp = std::find(keep.begin(), keep.end(), i);
            std::size_t bit;
            if (kp != keep.end()) {
                bit = (k >> (keep.size() - 1 - (kp - keep.begin()))) & 1U;
            } else {
                auto dp = std::find(drop.begin(), drop.end(), i);
                bit = (d >> (drop.size() - 1 - (dp - drop.begin()))) & 1U;
            }
            idx = (idx << 1) | bit;
        }
        return idx;
    };
    std::size_t kd = std::size_t{1} << keep.size();
    std::size_t dd = std::size_t{1} << drop.size();
    Matrix out = Matrix::Zero(kd, kd);
    for (std::size_t i = 0; i < kd; ++i) {
        for (std::size_t j = 0; j < kd; ++j) {
            for (std::size_t d = 0; d < dd; ++d) {
                out(i, j) += rho(compose(i, d), compose(j, d));
            }
        }
    }
    return out;
}

Matrix random_density(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> rank_d(1, dim);
    int rank = rank_d(rng);
    Matrix a(dim, rank);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < rank; ++j) {
            a(i, j) = Complex(g(rng), g(rng));
        }
    }
    Matrix rho = a * a.adjoint();
    return rho / rho.trace().real();
}

// Eigen decomposition of a density matrix as (weight, pure state) pairs.
std::vector<std::pair<double, Matrix>> spectral(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    std::vector<std::pair<double, Matrix>> out;
    for (Eigen::Index k = 0; k < rho.rows(); ++k) {
        double l = es.eigenvalues()(k);
        if (l > 1e-12) {
            qmath::Vector v = es.eigenvectors().col(k);
            out.emplace_back(l, v * v.adjoint());
        }
    }
    return out;
}

// Brute-force bisimilarity oracle over the probabilistic LTS: at every label sequence the
// environments Σ p·tr_Σ(ρ) agree and both sides are either dead or alive.

std::vector<std::size_t> owned_positions(const ProbDist& d, const lang::ProcessPtr& p) {
    std::vector<std::size_t> out;
    auto owned = types::owned_qubits(p);
    for (std::size_t i = 0; i < d.reg().size(); ++i) {
        if (owned.count(d.reg()[i])) {
            out.push_back(i);
        }
    }
    return out;
}

struct OracleEnv {
    bool consistent = true;
    std::vector<std::size_t> owned;
    Matrix env;
};

OracleEnv oracle_env(const ProbDist& d) {
    OracleEnv out;
    bool first = true;
    for (const auto& e : d.entries()) {
        auto pos = owned_positions(d, e.proc);
        Matrix part = ptrace(e.rho.mat(), d.reg().size(), pos) * e.weight;
        if (first) {
            out.owned = pos;
            out.env = part;
            first = false;
        } else if (pos != out.owned) {
            out.consistent = false;
        } else {
            out.env += part;
        }
    }
    return out;
}

bool oracle_bisim(const ProbDist& a, const ProbDist& b, int depth = 0) {
    if (depth > 64) {
        throw std::runtime_error("oracle depth exceeded");
    }
    bool ea = a.mass() <= kEps;
    bool eb = b.mass() <= kEps;
    if (ea || eb) {
        return ea && eb;
    }
    auto xa = oracle_env(a);
    auto xb = oracle_env(b);
    if (!xa.consistent || !xb.consistent || xa.owned != xb.owned || max_diff(xa.env, xb.env) > kEps) {
        return false;
    }
    auto labels = plts::enabled(a);
    auto lb = plts::enabled(b);
    labels.insert(lb.begin(), lb.end());
    for (const auto& [s, mu] : labels) {
        if (!oracle_bisim(plts::scheduled_step(a, s, mu), plts::scheduled_step(b, s, mu), depth + 1)) {
            return false;
        }
    }
    return true;
}

// Exhaustive qLTS traversal recording the trace of every transition with action `mu`.
std::vector<double> transition_masses(const QuantumDist& root, const Action& mu) {
    std::vector<double> out;
    std::set<std::string> seen{qlts::digest(root)};
    std::vector<QuantumDist> frontier{root};
    while (!frontier.empty()) {
        std::vector<QuantumDist> next;
        for (const auto& d : frontier) {
            for (const auto& [s, a] : qlts::enabled_q(d)) {
                auto t = qlts::qdist_step(d, s, a);
                if (a == mu) {
                    out.push_back(t.total_trace());
                }
                if (seen.insert(qlts::digest(t)).second) {
                    next.push_back(t);
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

QuantumDist step_one(const QuantumDist& d, const std::string& s, const Action& mu = Action::tau()) {
    return qlts::qdist_step(d, plts::parse_scheduler(s), mu);
}

Action send(const std::string& c, lang::Nat v) { return Action::send(c, lang::Value{v}); }

bool equivalent(const QuantumDist& a, const QuantumDist& b) { return bisim::ground_bisim(a, b).equivalent; }

// Criteria.

Outcome qcf_correctness() {
    Outcome o;
    auto prog = corpus::load("qcf");
    auto v = bisim::ground_bisim(corpus::qstart(prog, "QCF"), corpus::qstart(prog, "FairCoin"));
    o.require(v.equivalent, "QCF ~ FairCoin");
    o.note("QCF ~ FairCoin: " + std::string(v.equivalent ? "equivalent" : "not equivalent") + ", " +
           std::to_string(v.stats.pairs_visited) + " pairs");
    return o;
}

Outcome coin_attack(const char* key, const char* spec, double cheat) {
    Outcome o;
    auto prog = corpus::load(key);
    auto attack = corpus::qstart(prog, "Attack");
    o.require(equivalent(attack, corpus::qstart(prog, spec)), std::string("Attack ~ ") + spec);
    auto ms = transition_masses(attack, send("cheat", 1));
    double lo = ms.empty() ? 0.0 : *std::min_element(ms.begin(), ms.end());
    double hi = ms.empty() ? 0.0 : *std::max_element(ms.begin(), ms.end());
    if (cheat > 0) {
        o.require(!ms.empty() && std::abs(lo - cheat) <= kEps && std::abs(hi - cheat) <= kEps, "cheat!1 probability");
    } else {
        o.require(hi <= kEps, "cheat!1 probability");
    }
    o.note("cheat!1 over " + std::to_string(ms.size()) + " transitions in [" + num(lo) + ", " + num(hi) + "]");
    return o;
}

Outcome confidentiality() {
    Outcome o;
    auto prog = corpus::load("alice_confidentiality");
    auto a0 = corpus::qstart(prog, "Alice0");
    auto a1 = corpus::qstart(prog, "Alice1");
    o.require(equivalent(a0, a1), "Alice0 ~ Alice1");
    auto target = lang::parse_process("t:AtoB!q . nil[]", prog);
    Matrix half = Matrix::Identity(2, 2) * 0.5;
    for (const auto& d : {a0, a1}) {
        auto after = step_one(step_one(d, "t"), "t");
        bool ok = after.entries().size() == 1 && lang::equal(after.entries()[0].proc, target) &&
                  max_diff(after.entries()[0].weight.mat(), half) <= kEps;
        o.require(ok, "two steps reach delta<I/2> t:AtoB!q");
    }
    o.note("both reach delta<I/2> t:AtoB!q . nil[]");
    return o;
}

Outcome qubit_sources() {
    Outcome o;
    auto p01 = corpus::load("sources_01");
    auto ppm = corpus::load("sources_pm");
    auto d01 = corpus::start(p01, "P");
    auto dpm = corpus::start(ppm, "P");
    auto mixed = ProbDist::point({"q"}, qmath::DensityOperator(Matrix::Identity(2, 2) * 0.5), p01.definition("P"));
    std::vector<std::pair<std::string, ProbDist>> ds{{"D01", d01}, {"Dpm", dpm}, {"I/2", mixed}};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
            auto what = ds[i].first + " ~ " + ds[j].first;
            o.require(equivalent(qlts::alpha(ds[i].second), qlts::alpha(ds[j].second)), what);
            o.require(oracle_bisim(ds[i].second, ds[j].second), what + " (oracle)");
        }
    }
    o.note("3 pairs equivalent, oracle agrees");
    return o;
}

bisim::StepReport context_run(const ProbDist& d, const lang::ProcessPtr& ctx, bisim::ReplayMode mode) {
    bisim::ReplayOptions ro;
    ro.mode = mode;
    return bisim::context_replay(d, ctx, bisim::parse_schedule("*:tau,*:tau,*:tau", d.reg()), ro).back();
}

bool all_near(const std::vector<double>& ms, double v) {
    return !ms.empty() && std::all_of(ms.begin(), ms.end(), [&](double m) { return std::abs(m - v) <= kEps; });
}

std::string masses(const std::vector<double>& ms) {
    std::string s = "{";
    for (std::size_t i = 0; i < ms.size(); ++i) {
        s += (i ? ", " : "") + num(ms[i]);
    }
    return s + "}";
}

bool same_masses(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > kEps) {
            return false;
        }
    }
    return true;
}

Outcome unscheduled_refutation() {
    Outcome o;
    auto p01 = corpus::load("sources_01");
    auto ppm = corpus::load("sources_pm");
    auto ctx = lang::parse(corpus::source("broken_nondet_context"), &p01).main;
    auto u01 = context_run(corpus::start(p01, "P"), ctx, bisim::ReplayMode::Unscheduled);
    auto upm = context_run(corpus::start(ppm, "P"), ctx, bisim::ReplayMode::Unscheduled);
    o.require(std::abs(u01.max() - 0.75) <= kEps, "unscheduled D01 max 3/4");
    o.require(all_near(upm.progress_masses, 0.5) && std::abs(upm.max() - 0.5) <= kEps, "unscheduled Dpm runs 1/2");
    auto s01 = context_run(corpus::start(p01, "P"), ctx, bisim::ReplayMode::Scheduled);
    auto spm = context_run(corpus::start(ppm, "P"), ctx, bisim::ReplayMode::Scheduled);
    o.require(same_masses(s01.masses, spm.masses) && std::abs(s01.max() - 0.5) <= kEps, "scheduled mass sets");
    o.note("unscheduled D01 max " + num(u01.max()) + ", Dpm runs " + masses(upm.progress_masses) + "; scheduled " +
           masses(s01.masses) + " vs " + masses(spm.masses));
    return o;
}

Outcome ftl() {
    Outcome o;
    auto prog = corpus::load("ftl");
    auto ctx = lang::parse(corpus::source("ftl_context"), &prog).main;
    auto after = [&](const char* def) {
        return plts::scheduled_step(corpus::start(prog, def), plts::parse_scheduler("t0"), Action::tau());
    };
    auto r01 = context_run(after("Main01"), ctx, bisim::ReplayMode::Unscheduled);
    auto rpm = context_run(after("MainPm"), ctx, bisim::ReplayMode::Unscheduled);
    o.require(std::abs(r01.max() - 0.75) <= kEps, "A01 || B reaches 3/4");
    o.require(all_near(rpm.progress_masses, 0.5) && std::abs(rpm.max() - 0.5) <= kEps, "Apm || B stays at 1/2");
    o.require(equivalent(corpus::qstart(prog, "Main01"), corpus::qstart(prog, "MainPm")), "scheduled A01 || B ~ Apm || B");
    o.note("unscheduled max " + num(r01.max()) + " vs " + num(rpm.max()) + "; scheduled equivalent");
    return o;
}

Outcome superdense() {
    Outcome o;
    auto prog = corpus::load("sdc");
    auto main = corpus::qstart(prog, "Main");
    o.require(equivalent(main, corpus::qstart(prog, "Spec")), "SDC ~ Spec");
    for (lang::Nat n = 0; n < 4; ++n) {
        auto chosen = step_one(main, "t" + std::to_string(n));
        for (lang::Nat k = 0; k < 4; ++k) {
            auto ms = transition_masses(chosen, send("out", k));
            if (k == n) {
                o.require(all_near(ms, 1.0), "out!" + std::to_string(n) + " with probability 1");
            } else {
                o.require(std::all_of(ms.begin(), ms.end(), [](double m) { return m <= kEps; }),
                          "no out!" + std::to_string(k) + " after choice " + std::to_string(n));
            }
        }
    }
    o.note("equivalent; each choice n ends with out!n at probability 1");
    return o;
}

Outcome teleportation() {
    Outcome o;
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<std::pair<Complex, Complex>> inputs{{1.0, 0.0}, {0.0, 1.0}, {h, h}, {h, Complex(0.0, h)}};
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    for (int i = 0; i < 10; ++i) {
        Complex a(g(rng), g(rng));
        Complex b(g(rng), g(rng));
        double n = std::sqrt(std::norm(a) + std::norm(b));
        inputs.emplace_back(a / n, b / n);
    }
    Matrix cnot = Matrix::Zero(4, 4);
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    Matrix had(2, 2);
    had << h, h, h, -h;
    Matrix id2 = Matrix::Identity(2, 2);
    qmath::Vector phi = qmath::Vector::Zero(4);
    phi(0) = phi(3) = h;
    int equiv = 0;
    int dmatch = 0;
    for (auto [a, b] : inputs) {
        auto prog = lang::parse(corpus::teleport_source(a, b));
        auto main = corpus::qstart(prog, "Main");
        if (equivalent(main, corpus::qstart(prog, "Spec"))) {
            ++equiv;
        }
        qmath::Vector psi(2);
        psi << a, b;
        qmath::Vector state = kron(psi, phi);
        state = kron(kron(had, id2), id2) * kron(cnot, id2) * state;
        Matrix rho = state * state.adjoint();
        auto dprime = step_one(step_one(step_one(main, "t"), "t"), "t");
        bool ok = dprime.entries().size() == 4;
        for (const auto& e : dprime.entries()) {
            bool matched = false;
            for (int n = 0; n < 4 && !matched; ++n) {
                Matrix p = kron(basis_proj(n, 4), id2);
                matched = max_diff(e.weight.mat(), p * rho * p) <= kEps;
            }
            ok = ok && matched;
        }
        dmatch += ok ? 1 : 0;
    }
    int total = static_cast<int>(inputs.size());
    o.require(equiv == total, "Tel ~ Spec for every input");
    o.require(dmatch == total, "intermediate distribution");
    o.note(std::to_string(equiv) + "/" + std::to_string(total) + " equivalent, D' matches for " + std::to_string(dmatch));
    return o;
}

Outcome superop_need() {
    Outcome o;
    auto prog = corpus::load("superopneed");
    auto p = corpus::qstart(prog, "P");
    auto q = corpus::qstart(prog, "Q");
    o.require(bisim::superop_probe(p, q, {}).equivalent, "identity probe passes");
    Matrix sh(2, 2);
    const double h = 1.0 / std::sqrt(2.0);
    sh << h, Complex(0.0, -h), h, Complex(0.0, h);
    auto v = bisim::superop_probe(p, q, {{"SH", qmath::Superoperator({sh}), {"q"}}});
    o.require(!v.equivalent && v.probe == "SH", "SH probe refutes");
    o.require(!v.witness.empty() && v.witness.back().second.kind == Action::Kind::Send &&
                  v.witness.back().second.channel == "c",
              "witness ends with a send on c");
    auto pp = qlts::apply_env_superop(qmath::Superoperator({sh}), {"q"}, p);
    auto pq = qlts::apply_env_superop(qmath::Superoperator({sh}), {"q"}, q);
    double diff = INFINITY;
    if (!v.witness.empty()) {
        std::vector<plts::Label> prefix(v.witness.begin(), v.witness.end() - 1);
        auto [a, b] = bisim::replay(pp, pq, prefix);
        auto s = v.witness.back().first;
        diff = std::abs(qlts::qdist_step(a, s, send("c", 1)).total_trace() - qlts::qdist_step(b, s, send("c", 1)).total_trace());
    }
    o.require(std::abs(diff - 0.5) <= kEps, "c!1 mass differs by 1/2");
    o.note("identity passes; SH refutes, c!1 mass difference " + num(diff));
    return o;
}

// Property suites.

std::vector<QuantumDist> corpus_roots() {
    std::vector<QuantumDist> roots;
    for (const auto& e : corpus::entries()) {
        if (e.pair) {
            auto [a, b] = e.pair();
            roots.push_back(a);
            roots.push_back(b);
        }
    }
    auto ql = corpus::load("quantum_lottery");
    roots.push_back(corpus::qstart(ql, "QL"));
    auto sop = corpus::load("superopneed");
    roots.push_back(corpus::qstart(sop, "P"));
    roots.push_back(corpus::qstart(sop, "Q"));
    return roots;
}

bool kraus_trace_preserving(const plts::Move& m, std::size_t dim) {
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& b : m.branches) {
        if (b.kraus.empty()) {
            sum += Matrix::Identity(dim, dim);
        }
        for (const auto& k : b.kraus) {
            sum += k.adjoint() * k;
        }
    }
    return max_diff(sum, Matrix::Identity(dim, dim)) <= kEps;
}

Outcome alpha_gamma(const std::vector<std::vector<QuantumDist>>& traces) {
    Outcome o;
    std::size_t dists = 0;
    std::size_t steps = 0;
    for (const auto& reach : traces) {
        for (const auto& q : reach) {
            ++dists;
            auto g = qlts::gamma(q);
            o.require(qlts::approx_eq(qlts::alpha(g), q), "alpha(gamma(D)) = D");
            o.require(qlts::approx_eq(qlts::alpha(qlts::gamma(qlts::alpha(g))), qlts::alpha(g)), "alpha(gamma(alpha(P))) = alpha(P)");
            o.require(plts::enabled(g) == qlts::enabled_q(q), "enabled sets agree");
            for (const auto& [s, mu] : qlts::enabled_q(q)) {
                ++steps;
                o.require(qlts::approx_eq(qlts::alpha(plts::scheduled_step(g, s, mu)), qlts::qdist_step(q, s, mu)),
                          "alpha commutes with the step");
            }
        }
    }
    o.note("(a) " + std::to_string(dists) + " distributions, " + std::to_string(steps) + " steps");
    return o;
}

Outcome typing_and_trace(const std::vector<std::vector<QuantumDist>>& traces) {
    Outcome o;
    std::size_t taus = 0;
    std::size_t conserved = 0;
    for (const auto& reach : traces) {
        for (const auto& q : reach) {
            auto g = qlts::gamma(q);
            auto before = g.empty() ? std::set<std::string>{} : types::owned_qubits(g.entries()[0].proc);
            std::size_t dim = g.entries().empty() ? 1 : g.entries()[0].rho.dim();
            for (const auto& [s, mu] : plts::enabled(g)) {
                auto t = plts::scheduled_step(g, s, mu);
                if (mu.kind == Action::Kind::Tau) {
                    ++taus;
                    for (const auto& e : t.entries()) {
                        o.require(types::owned_qubits(e.proc) == before, "tau preserves typing");
                    }
                    o.require(t.empty() || types::type_distribution(t).sigma_p == before, "tau target typed");
                }
                bool all_tp = true;
                for (const auto& e : g.entries()) {
                    bool found = false;
                    for (const auto& m : plts::process_moves(e.proc, g.reg())) {
                        if (m.scheduler == s && m.action == mu) {
                            found = true;
                            all_tp = all_tp && kraus_trace_preserving(m, dim);
                        }
                    }
                    all_tp = all_tp && found;
                }
                if (all_tp) {
                    ++conserved;
                    o.require(std::abs(t.mass() - g.mass()) <= kEps, "mass conserved");
                    o.require(std::abs(qlts::qdist_step(q, s, mu).total_trace() - q.total_trace()) <= kEps, "trace conserved");
                }
            }
        }
    }
    o.note("(b) " + std::to_string(taus) + " tau steps typed; (c) " + std::to_string(conserved) + " trace-preserving steps");
    return o;
}

Outcome property_a() {
    Outcome o;
    std::vector<std::pair<const char*, const char*>> fragments{
        {"sources_01", "P"}, {"alice_confidentiality", "Alice0"}, {"alice_confidentiality", "Alice1"}, {"quantum_lottery", "QL"},
        {"qcf", "FairCoin"}, {"superopneed", "P"},          {"ftl", "Main01"},                {"sdc", "Main"},
        {"sdc", "Spec"},     {"alix", "UnfairCoin"}};
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    int ok = 0;
    int oracle_ok = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
        auto [key, def] = fragments[i % fragments.size()];
        auto prog = corpus::load(key);
        auto p = prog.definition(def);
        int dim = static_cast<int>(qmath::dim_of(prog.qubits.size()));
        Matrix rho = random_density(rng, dim);
        Matrix sigma = random_density(rng, dim);
        double w = unit(rng);
        Matrix merged = w * rho + (1 - w) * sigma;
        ProbDist mixed(prog.qubits);
        mixed.add(w, qmath::DensityOperator(rho), p);
        mixed.add(1 - w, qmath::DensityOperator(sigma), p);
        mixed = mixed.canonical();
        ProbDist eigen(prog.qubits);
        for (const auto& [l, v] : spectral(merged)) {
            eigen.add(l, qmath::DensityOperator(v), p);
        }
        eigen = eigen.canonical();
        auto theta = QuantumDist::point(prog.qubits, qmath::DensityOperator(merged), p);
        if (equivalent(theta, qlts::alpha(mixed)) && equivalent(qlts::alpha(mixed), qlts::alpha(eigen))) {
            ++ok;
        }
        if (prog.qubits.size() == 1 && oracle_bisim(mixed, eigen)) {
            ++oracle_ok;
        } else if (prog.qubits.size() != 1) {
            ++oracle_ok;
        }
    }
    o.require(ok == n, "merged vs mixed equivalent");
    o.require(oracle_ok == n, "oracle agrees on single-qubit instances");
    o.note("(d) " + std::to_string(ok) + "/" + std::to_string(n) + " instances equivalent");
    return o;
}

// Random input-restricted processes.

struct Node {
    enum class Kind { Nil, Gate, Meas, SendBit, SendQubit, Tau, Sum, Par };

    Kind kind = Kind::Nil;
    std::string tag;
    std::string gate;
    std::string qubit;
    int bit = 0;
    std::vector<Node> kids;
};

class Generator {
public:
    explicit Generator(std::mt19937_64& rng) : rng_(rng) {}

    Node process(const std::vector<std::string>& owned, int depth) {
        if (owned.size() == 2 && pick(3) == 0) {
            Node n{Node::Kind::Par, "", "", "", 0, {}};
            n.kids.push_back(gen({owned[0]}, depth, "u"));
            n.kids.push_back(gen({owned[1]}, depth, "v"));
            return n;
        }
        return gen(owned, depth, "t");
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    Node gen(std::vector<std::string> owned, int depth, const std::string& tag) {
        if (depth == 0 || pick(7) == 0) {
            return {};
        }
        if (depth >= 2 && pick(4) == 0) {
            Node n{Node::Kind::Sum, "", "", "", 0, {}};
            n.kids.push_back(prefix(owned, depth, tag + "1", tag));
            n.kids.push_back(prefix(owned, depth, tag + "2", tag));
            return n;
        }
        return prefix(owned, depth, tag, tag);
    }

    Node prefix(std::vector<std::string> owned, int depth, const std::string& tag, const std::string& base) {
        std::vector<Node::Kind> kinds{Node::Kind::SendBit, Node::Kind::Tau};
        if (!owned.empty()) {
            kinds.insert(kinds.end(), {Node::Kind::Gate, Node::Kind::Gate, Node::Kind::Meas, Node::Kind::Meas, Node::Kind::SendQubit});
        }
        Node n;
        n.kind = kinds[pick(static_cast<int>(kinds.size()))];
        n.tag = tag;
        if (!owned.empty()) {
            n.qubit = owned[pick(static_cast<int>(owned.size()))];
        }
        switch (n.kind) {
            case Node::Kind::Gate:
                n.gate = std::vector<std::string>{"H", "X", "Z"}[pick(3)];
                n.kids.push_back(gen(owned, depth - 1, base));
                break;
            case Node::Kind::Meas:
                n.kids.push_back(gen(owned, depth - 1, base));
                n.kids.push_back(gen(owned, depth - 1, base));
                break;
            case Node::Kind::SendBit:
                n.bit = pick(2);
                n.kids.push_back(gen(owned, depth - 1, base));
                break;
            case Node::Kind::SendQubit:
                owned.erase(std::find(owned.begin(), owned.end(), n.qubit));
                n.kids.push_back(gen(owned, depth - 1, base));
                break;
            default:
                n.kids.push_back(gen(owned, depth - 1, base));
                break;
        }
        return n;
    }

    std::mt19937_64& rng_;
};

std::string print(const Node& n, std::vector<std::string> owned, int& var) {
    auto list = [&] {
        std::string s;
        for (std::size_t i = 0; i < owned.size(); ++i) {
            s += (i ? ", " : "") + owned[i];
        }
        return s;
    };
    switch (n.kind) {
        case Node::Kind::Nil:
            return "nil[" + list() + "]";
        case Node::Kind::Gate:
            return n.tag + ":" + n.gate + "(" + n.qubit + ") . (" + print(n.kids[0], owned, var) + ")";
        case Node::Kind::Meas: {
            std::string x = "x" + std::to_string(var++);
            return n.tag + ":meas M01(" + n.qubit + " > " + x + ") . if " + x + " = 0 then (" + print(n.kids[0], owned, var) +
                   ") else (" + print(n.kids[1], owned, var) + ")";
        }
        case Node::Kind::SendBit:
            return n.tag + ":o!" + std::to_string(n.bit) + " . (" + print(n.kids[0], owned, var) + ")";
        case Node::Kind::SendQubit: {
            std::string q = n.qubit;
            owned.erase(std::find(owned.begin(), owned.end(), q));
            return n.tag + ":oq!" + q + " . (" + print(n.kids[0], owned, var) + ")";
        }
        case Node::Kind::Tau:
            return n.tag + ":tau . (" + print(n.kids[0], owned, var) + ")";
        case Node::Kind::Sum:
            return "(" + print(n.kids[0], owned, var) + ") + (" + print(n.kids[1], owned, var) + ")";
        case Node::Kind::Par:
            return "(" + print(n.kids[0], {owned[0]}, var) + ") || (" +
                   print(n.kids[1], {owned[1]}, var) + ")";
    }
    return "";
}

std::vector<Node*> nodes(Node& n, Node::Kind k) {
    std::vector<Node*> out;
    std::function<void(Node&)> walk = [&](Node& m) {
        if (m.kind == k) {
            out.push_back(&m);
        }
        for (auto& c : m.kids) {
            walk(c);
        }
    };
    walk(n);
    return out;
}

ProbDist state_dist(const std::vector<std::string>& reg, const std::vector<std::pair<double, Matrix>>& parts,
                    const lang::ProcessPtr& p) {
    ProbDist d(reg);
    for (const auto& [w, m] : parts) {
        d.add(w, qmath::DensityOperator(m), p);
    }
    return d.canonical();
}

Outcome full_abstraction_smoke() {
    Outcome o;
    auto decls = lang::parse(R"(
channel o : bit
channel oq : qubit
qubits q r
proc Dummy = nil[]
)");
    std::mt19937_64 rng(31337);
    Generator gen(rng);
    std::uniform_real_distribution<double> unit(0.1, 0.9);
    const int n = 40;
    int agree = 0;
    int eq = 0;
    int restricted = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> reg = (i % 2 == 0) ? std::vector<std::string>{"q"} : std::vector<std::string>{"q", "r"};
        int dim = static_cast<int>(qmath::dim_of(reg.size()));
        Node left = gen.process(reg, 4);
        Node right = left;
        Matrix ra = random_density(rng, dim);
        Matrix rb = random_density(rng, dim);
        double w = unit(rng);
        Matrix rho = w * ra + (1 - w) * rb;
        std::vector<std::pair<double, Matrix>> lstate{{w, ra}, {1 - w, rb}};
        std::vector<std::pair<double, Matrix>> rstate = spectral(rho);
        switch (i % 6) {
            case 0:
                break;
            case 1: {
                auto sums = nodes(right, Node::Kind::Sum);
                auto pars = nodes(right, Node::Kind::Par);
                if (!sums.empty()) {
                    std::swap(sums[0]->kids[0], sums[0]->kids[1]);
                } else if (!pars.empty()) {
                    right = gen.process(reg, 4);
                }
                break;
            }
            case 2: {
                auto gates = nodes(right, Node::Kind::Gate);
                if (!gates.empty()) {
                    gates[0]->gate = gates[0]->gate == "H" ? "X" : "H";
                }
                break;
            }
            case 3: {
                auto sends = nodes(right, Node::Kind::SendBit);
                if (!sends.empty()) {
                    sends.back()->bit ^= 1;
                }
                break;
            }
            case 4:
                right = gen.process(reg, 4);
                break;
            default:
                rstate = {{1.0, random_density(rng, dim)}};
                break;
        }
        int var = 0;
        auto lp = lang::parse_process(print(left, reg, var), decls);
        var = 0;
        auto rp = lang::parse_process(print(right, reg, var), decls);
        if (types::input_restricted(lp) && types::input_restricted(rp)) {
            ++restricted;
        }
        auto ld = state_dist(reg, lstate, lp);
        auto rd = state_dist(reg, rstate, rp);
        bool fast = equivalent(qlts::alpha(ld), qlts::alpha(rd));
        bool slow = oracle_bisim(ld, rd);
        if (fast == slow) {
            ++agree;
        }
        eq += fast ? 1 : 0;
    }
    o.require(agree == n, "ground bisimilarity agrees with the oracle");
    o.require(restricted == n, "generated processes are input-restricted");
    o.note("(e) " + std::to_string(agree) + "/" + std::to_string(n) + " pairs agree (" + std::to_string(eq) + " equivalent, " +
           std::to_string(n - eq) + " not)");
    return o;
}

Outcome property_suites() {
    std::vector<std::vector<QuantumDist>> traces;
    for (const auto& r : corpus_roots()) {
        traces.push_back(corpus::reachable(r));
    }
    Outcome o;
    for (const auto& part : {alpha_gamma(traces), typing_and_trace(traces), property_a(), full_abstraction_smoke()}) {
        o.pass = o.pass && part.pass;
        o.note(part.observed);
    }
    return o;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"coin flipping is correct", qcf_correctness},
        {"Alison's attack", [] { return coin_attack("alison", "LeakyUnfairCoin", 0.25); }},
        {"Alix's attack", [] { return coin_attack("alix", "UnfairCoin", 0.0); }},
        {"Alice's encodings are confidential", confidentiality},
        {"qubit sources", qubit_sources},
        {"unscheduled refutation", unscheduled_refutation},
        {"entangled measurements", ftl},
        {"superdense coding", superdense},
        {"teleportation", teleportation},
        {"superoperator closure is needed", superop_need},
        {"property suites", property_suites},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.note(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %zu: %s [%s] (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.observed.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
