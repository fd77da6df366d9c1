#include "lqcheck/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lqcheck/bisim.hpp"
#include "lqcheck/corpus.hpp"
#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Loaded {
    std::string path;
    lang::Program prog;
};

Loaded load_file(const std::string& path, const lang::Program* base = nullptr) {
    std::string text = read_file(path);
    try {
        return {path, lang::parse(text, base)};
    } catch (const ParseError& e) {
        throw ParseError(std::string("in ") + path + ": " + e.what(), e.line(), e.column());
    }
}

lang::ProcessPtr pick(const lang::Program& prog, const std::string& name) {
    if (name.empty()) {
        return prog.main;
    }
    auto p = prog.definition(name);
    if (!p) {
        throw UsageError("no definition named '" + name + "'");
    }
    return p;
}

plts::ProbDist initial(const lang::Program& prog, const lang::ProcessPtr& p, double eps) {
    types::owned_qubits(p);
    plts::ProbDist d(prog.qubits);
    for (const auto& s : prog.initial) {
        d.add(s.weight, s.rho, p);
    }
    auto c = d.canonical(eps);
    types::type_distribution(c);
    return c;
}

std::string tags_text(const std::set<lang::Tag>& tags) {
    std::string out = "{";
    bool first = true;
    for (const auto& t : tags) {
        out += (first ? "" : ", ") + t.name;
        first = false;
    }
    return out + "}";
}

json tags_json(const std::set<lang::Tag>& tags) {
    json a = json::array();
    for (const auto& t : tags) {
        a.push_back(t.name);
    }
    return a;
}

double rounded(double v) { return std::strtod(bisim::format_number(v).c_str(), nullptr); }

// Shared flags.
struct Common {
    bool json_out = false;
    unsigned threads = 1;
    double eps = qmath::kDefaultEps;
};

int cmd_parse(const std::string& file, const Common& c, std::ostream& out) {
    auto l = load_file(file);
    std::set<lang::Tag> all;
    for (const auto& [name, p] : l.prog.definitions) {
        auto t = lang::tags_of(p);
        all.insert(t.begin(), t.end());
    }
    if (c.json_out) {
        json j;
        j["main"] = l.prog.main_name;
        j["qubits"] = l.prog.qubits;
        j["definitions"] = json::array();
        for (const auto& [name, p] : l.prog.definitions) {
            j["definitions"].push_back({{"name", name}, {"process", lang::print_process(p)}, {"tags", tags_json(lang::tags_of(p))}});
        }
        j["tags"] = tags_json(all);
        out << j.dump(2) << "\n";
        return kOk;
    }
    out << lang::print_program(l.prog);
    out << "-- main: " << l.prog.main_name << "\n";
    out << "-- tags: " << tags_text(all) << "\n";
    return kOk;
}

int cmd_typecheck(const std::string& file, const Common& c, std::ostream& out) {
    auto l = load_file(file);
    json defs = json::array();
    std::ostringstream text;
    for (const auto& [name, p] : l.prog.definitions) {
        auto fv = lang::free_vars(p);
        if (!fv.empty()) {
            std::string vars;
            for (const auto& v : fv) {
                vars += (vars.empty() ? "" : ", ") + v;
            }
            text << name << ": open definition (free " << vars << ")\n";
            defs.push_back({{"name", name}, {"open", true}});
            continue;
        }
        auto sigma = types::owned_qubits(p);
        text << types::to_string(sigma) << " |- " << name << "\n";
        defs.push_back({{"name", name}, {"open", false}, {"sigma", std::vector<std::string>(sigma.begin(), sigma.end())}});
    }
    auto main_sigma = types::owned_qubits(l.prog.main);
    for (const auto& q : main_sigma) {
        if (std::find(l.prog.qubits.begin(), l.prog.qubits.end(), q) == l.prog.qubits.end()) {
            throw TypeError("main process owns qubit '" + q + "' outside the register");
        }
    }
    auto inputs = types::uic(l.prog.main);
    auto lint = types::determinism_lint(l.prog.main);
    if (c.json_out) {
        json j;
        j["definitions"] = defs;
        j["main"] = l.prog.main_name;
        j["input_restricted"] = inputs.empty();
        j["unrestricted_inputs"] = inputs;
        j["lint"] = lint;
        out << j.dump(2) << "\n";
        return kOk;
    }
    out << text.str();
    if (inputs.empty()) {
        out << "main " << l.prog.main_name << " is input-restricted (no unrestricted quantum inputs)\n";
    } else {
        out << "main " << l.prog.main_name << " has unrestricted quantum inputs on " << types::to_string(inputs) << "\n";
    }
    for (const auto& w : lint) {
        out << "lint: " << w << "\n";
    }
    return kOk;
}

json support_json(const plts::ProbDist& d) {
    json a = json::array();
    for (const auto& e : d.entries()) {
        a.push_back({{"weight", rounded(e.weight)}, {"state_digest", plts::state_digest(e.rho.mat())},
                     {"process_text", lang::print_process(e.proc)}});
    }
    return a;
}

json support_json(const qlts::QuantumDist& d) {
    json a = json::array();
    for (const auto& e : d.entries()) {
        a.push_back({{"weight", rounded(e.weight.trace())}, {"state_digest", plts::state_digest(e.weight.mat())},
                     {"process_text", lang::print_process(e.proc)}});
    }
    return a;
}

// One semantics behind a uniform stepping interface.
struct Stepper {
    bool quantum = false;
    double eps = qmath::kDefaultEps;

    struct State {
        plts::ProbDist p;
        qlts::QuantumDist q;
    };

    std::set<plts::Label> enabled(const State& s) const { return quantum ? qlts::enabled_q(s.q) : plts::enabled(s.p); }
    State step(const State& s, const plts::Label& l) const {
        if (quantum) {
            return {{}, qlts::qdist_step(s.q, l.first, l.second, eps)};
        }
        return {plts::scheduled_step(s.p, l.first, l.second, eps), {}};
    }
    json support(const State& s) const { return quantum ? support_json(s.q) : support_json(s.p); }
    double mass(const State& s) const { return quantum ? s.q.total_trace() : s.p.mass(); }
};

void print_support(std::ostream& out, const json& support) {
    if (support.empty()) {
        out << "    eps\n";
    }
    for (const auto& e : support) {
        out << "    " << bisim::format_number(e["weight"].get<double>()) << "  " << e["state_digest"].get<std::string>() << "  "
            << e["process_text"].get<std::string>() << "\n";
    }
}

int cmd_run(const std::string& file, const std::string& proc, const std::string& semantics, std::size_t max_steps,
            const std::string& schedule, const Common& c, std::ostream& out) {
    auto l = load_file(file);
    if (semantics != "plts" && semantics != "qlts") {
        throw UsageError("unknown semantics '" + semantics + "' (expected plts or qlts)");
    }
    Stepper st{semantics == "qlts", c.eps};
    auto d0 = initial(l.prog, pick(l.prog, proc), c.eps);
    Stepper::State root{d0, qlts::alpha(d0, c.eps)};
    json steps = json::array();
    steps.push_back({{"step", 0}, {"scheduler", nullptr}, {"action", nullptr}, {"support", st.support(root)}});
    if (!schedule.empty()) {
        auto s = root;
        std::size_t i = 0;
        for (const auto& e : bisim::parse_schedule(schedule, l.prog.qubits)) {
            if (i >= max_steps) {
                break;
            }
            auto labels = bisim::resolve_entry(e, st.enabled(s));
            if (labels.size() > 1) {
                throw UsageError("schedule entry " + bisim::to_string(e) + " matches several transitions");
            }
            json step{{"step", ++i}};
            if (labels.empty()) {
                s = Stepper::State{plts::ProbDist(l.prog.qubits), qlts::QuantumDist(l.prog.qubits)};
                step["scheduler"] = e.scheduler ? json(lang::to_string(*e.scheduler)) : json(nullptr);
                step["action"] = e.action ? json(plts::to_string(*e.action)) : json(nullptr);
            } else {
                s = st.step(s, labels.front());
                step["scheduler"] = lang::to_string(labels.front().first);
                step["action"] = plts::to_string(labels.front().second);
            }
            step["support"] = st.support(s);
            steps.push_back(step);
        }
    } else {
        struct Node {
            Stepper::State s;
            std::vector<plts::Label> trace;
        };
        std::vector<Node> frontier{{root, {}}};
        for (std::size_t depth = 1; depth <= max_steps && !frontier.empty(); ++depth) {
            std::vector<Node> next;
            for (const auto& n : frontier) {
                for (const auto& l2 : st.enabled(n.s)) {
                    auto s = st.step(n.s, l2);
                    auto trace = n.trace;
                    trace.push_back(l2);
                    json tr = json::array();
                    for (const auto& [a, b] : trace) {
                        tr.push_back({{"scheduler", lang::to_string(a)}, {"action", plts::to_string(b)}});
                    }
                    steps.push_back({{"step", depth}, {"scheduler", lang::to_string(l2.first)}, {"action", plts::to_string(l2.second)},
                                     {"trace", tr}, {"support", st.support(s)}});
                    if (steps.size() > 100000) {
                        throw SemanticsError("exploration exceeds 100000 steps; give a schedule or lower --max-steps");
                    }
                    next.push_back({s, trace});
                }
            }
            frontier = std::move(next);
        }
    }
    if (c.json_out) {
        out << steps.dump(2) << "\n";
        return kOk;
    }
    for (const auto& s : steps) {
        out << "step " << s["step"].get<std::size_t>();
        if (s.contains("trace")) {
            out << "  ";
            for (const auto& t : s["trace"]) {
                out << " " << t["scheduler"].get<std::string>() << ":" << t["action"].get<std::string>();
            }
        } else if (!s["scheduler"].is_null()) {
            out << "  " << s["scheduler"].get<std::string>() << ":" << (s["action"].is_null() ? "?" : s["action"].get<std::string>());
        }
        out << "\n";
        print_support(out, s["support"]);
    }
    return kOk;
}

std::vector<bisim::Probe> parse_probes(const std::vector<std::string>& specs, const lang::Program& prog) {
    std::vector<bisim::Probe> out;
    for (const auto& spec : specs) {
        auto colon = spec.find(':');
        if (colon == std::string::npos) {
            throw UsageError("probe '" + spec + "' must have the form NAME:q1,q2");
        }
        std::string name = spec.substr(0, colon);
        auto it = prog.superops.find(name);
        auto op = it != prog.superops.end() ? it->second : lang::builtin_superop(name);
        if (!op) {
            throw UsageError("unknown superoperator '" + name + "' in probe");
        }
        std::vector<std::string> qubits;
        std::stringstream ss(spec.substr(colon + 1));
        std::string q;
        while (std::getline(ss, q, ',')) {
            qubits.push_back(q);
        }
        out.push_back({spec, op->op, qubits});
    }
    return out;
}

void print_verdict(const bisim::Verdict& v, std::ostream& out) {
    out << (v.equivalent ? "equivalent" : "not equivalent") << "\n";
    out << "basis: " << v.theorem_basis << "\n";
    if (!v.equivalent) {
        if (!v.probe.empty()) {
            out << "refuted under probe: " << v.probe << "\n";
        }
        out << "mismatch: " << bisim::to_string(v.mismatch) << " (" << v.detail << ")\n";
        out << "witness:";
        if (v.witness.empty()) {
            out << " (root)";
        }
        for (const auto& [s, a] : v.witness) {
            out << " " << lang::to_string(s) << ":" << plts::to_string(a);
        }
        out << "\n";
        if (v.env_mismatch) {
            out << "max env difference: " << bisim::format_number(v.env_mismatch->max_abs_diff) << "\n";
        }
    }
    for (const auto& w : v.warnings) {
        out << "warning: " << w << "\n";
    }
    out << "pairs visited: " << v.stats.pairs_visited << ", max depth: " << v.stats.max_depth << "\n";
}

int cmd_bisim(const std::vector<std::string>& files, const std::string& left, const std::string& right, const std::string& corpus_name,
              const std::vector<std::string>& probe_specs, const Common& c, std::ostream& out) {
    bisim::Options opts{c.eps, c.threads};
    bisim::Verdict v;
    if (!corpus_name.empty()) {
        const auto* e = corpus::find(corpus_name);
        if (!e) {
            throw UsageError("unknown corpus entry '" + corpus_name + "'");
        }
        if (!e->pair) {
            throw UsageError("corpus entry '" + corpus_name + "' has no bisimulation pair");
        }
        auto [d, t] = e->pair();
        auto probes = e->probes;
        if (!probe_specs.empty()) {
            throw UsageError("--probe cannot be combined with --corpus");
        }
        v = probes.empty() ? bisim::ground_bisim(d, t, opts) : bisim::superop_probe(d, t, probes, opts);
    } else {
        if (files.empty() || files.size() > 2) {
            throw UsageError("bisim expects one or two files, or --corpus NAME");
        }
        auto a = load_file(files[0]);
        auto b = files.size() == 2 ? load_file(files[1]) : a;
        if (files.size() == 1 && (left.empty() || right.empty())) {
            throw UsageError("with a single file give both --left and --right");
        }
        if (a.prog.qubits != b.prog.qubits) {
            throw TypeError("the two programs declare different registers");
        }
        auto d = qlts::alpha(initial(a.prog, pick(a.prog, left), c.eps), c.eps);
        auto t = qlts::alpha(initial(b.prog, pick(b.prog, right), c.eps), c.eps);
        auto probes = parse_probes(probe_specs, a.prog);
        v = probes.empty() ? bisim::ground_bisim(d, t, opts) : bisim::superop_probe(d, t, probes, opts);
    }
    if (c.json_out) {
        out << bisim::verdict_json(v) << "\n";
    } else {
        print_verdict(v, out);
    }
    return v.equivalent ? kOk : kNotEquivalent;
}

int cmd_replay(const std::string& file, const std::string& proc, const std::string& context_file, const std::string& context_proc,
               const std::string& prefix, const std::string& schedule, const std::string& mode, std::size_t cap,
               const Common& c, std::ostream& out) {
    auto l = load_file(file);
    auto ctx = load_file(context_file, &l.prog);
    auto ctx_proc = pick(ctx.prog, context_proc);
    bisim::ReplayOptions ro;
    ro.eps = c.eps;
    ro.cap = cap;
    if (mode == "scheduled") {
        ro.mode = bisim::ReplayMode::Scheduled;
    } else if (mode == "unscheduled") {
        ro.mode = bisim::ReplayMode::Unscheduled;
    } else {
        throw UsageError("unknown mode '" + mode + "' (expected scheduled or unscheduled)");
    }
    auto d = initial(l.prog, pick(l.prog, proc), c.eps);
    if (!prefix.empty()) {
        for (const auto& e : bisim::parse_schedule(prefix, l.prog.qubits)) {
            auto labels = bisim::resolve_entry(e, plts::enabled(d));
            if (labels.size() != 1) {
                throw UsageError("prefix entry " + bisim::to_string(e) + " does not select a single transition");
            }
            d = plts::scheduled_step(d, labels.front().first, labels.front().second, c.eps);
        }
    }
    auto reports = bisim::context_replay(d, ctx_proc, bisim::parse_schedule(schedule, l.prog.qubits), ro);
    if (c.json_out) {
        out << bisim::replay_json(reports) << "\n";
        return kOk;
    }
    auto set_text = [](const std::vector<double>& ms) {
        std::string s = "{";
        for (std::size_t i = 0; i < ms.size(); ++i) {
            s += (i ? ", " : "") + bisim::format_number(ms[i]);
        }
        return s + "}";
    };
    for (const auto& r : reports) {
        out << "step " << r.step << "  " << bisim::to_string(r.entry) << "  runs " << r.count << "  masses " << set_text(r.masses)
            << "  progress " << set_text(r.progress_masses) << "  min " << bisim::format_number(r.min()) << "  max "
            << bisim::format_number(r.max()) << "\n";
        for (const auto& n : r.notes) {
            out << "  note: " << n << "\n";
        }
    }
    return kOk;
}

int cmd_corpus(bool list, bool run_all, const std::string& source_key, const std::vector<std::string>& names, const Common& c,
               std::ostream& out) {
    if (!source_key.empty()) {
        out << corpus::source(source_key);
        return kOk;
    }
    if (list) {
        for (const auto& e : corpus::entries()) {
            out << e.name << "  " << e.description << "\n";
        }
        out << "sources:";
        for (const auto& k : corpus::source_keys()) {
            out << " " << k;
        }
        out << "\n";
        return kOk;
    }
    std::vector<const corpus::Entry*> chosen;
    if (run_all) {
        for (const auto& e : corpus::entries()) {
            chosen.push_back(&e);
        }
    }
    for (const auto& n : names) {
        const auto* e = corpus::find(n);
        if (!e) {
            throw UsageError("unknown corpus entry '" + n + "'");
        }
        chosen.push_back(e);
    }
    if (chosen.empty()) {
        throw UsageError("corpus expects --list, --run-all or entry names");
    }
    bisim::Options opts{c.eps, c.threads};
    bool all_pass = true;
    json results = json::array();
    for (const auto* e : chosen) {
        auto r = e->run(opts);
        all_pass = all_pass && r.pass();
        if (c.json_out) {
            json checks = json::array();
            for (const auto& ch : r.checks) {
                checks.push_back({{"check", ch.what}, {"pass", ch.pass}, {"observed", ch.observed}});
            }
            results.push_back({{"name", r.name}, {"pass", r.pass()}, {"checks", checks}});
            continue;
        }
        out << (r.pass() ? "PASS " : "FAIL ") << r.name << "\n";
        for (const auto& ch : r.checks) {
            out << "  [" << (ch.pass ? "ok" : "!!") << "] " << ch.what << ": " << ch.observed << "\n";
        }
    }
    if (c.json_out) {
        out << results.dump(2) << "\n";
    }
    return all_pass ? kOk : kNotEquivalent;
}

}  // namespace

double default_eps() {
    const char* v = std::getenv("LQCHECK_EPS");
    if (!v || !*v) {
        return qmath::kDefaultEps;
    }
    char* end = nullptr;
    double e = std::strtod(v, &end);
    if (end == v || *end != '\0' || !(e > 0.0)) {
        throw UsageError(std::string("LQCHECK_EPS must be a positive number, got '") + v + "'");
    }
    return e;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"lqcheck: parser, type checker, simulator and bisimilarity checker for linear quantum CCS"};
    app.name("lqcheck");
    app.require_subcommand(1);
    Common c;
    app.add_flag("--json", c.json_out, "machine-readable JSON output");
    app.add_option("--threads", c.threads, "worker threads for bisimulation checking")->check(CLI::Range(1U, 256U));

    std::string file;
    std::string proc;
    auto* parse = app.add_subcommand("parse", "pretty-print a program and list its tags");
    parse->add_option("file", file, "program file ('-' for stdin)")->required();

    auto* typecheck = app.add_subcommand("typecheck", "report the qubits owned by each definition");
    typecheck->add_option("file", file, "program file")->required();

    std::string semantics = "plts";
    std::size_t max_steps = 32;
    std::string schedule;
    auto* runc = app.add_subcommand("run", "step the main process, along a schedule or exhaustively");
    runc->add_option("file", file, "program file")->required();
    runc->add_option("--proc", proc, "definition to run instead of the main process");
    runc->add_option("--semantics", semantics, "plts or qlts")->capture_default_str();
    runc->add_option("--max-steps", max_steps, "exploration depth")->capture_default_str();
    runc->add_option("--schedule", schedule, "comma-separated entries s, s:action or *:action");

    std::vector<std::string> files;
    std::string left;
    std::string right;
    std::string corpus_name;
    std::vector<std::string> probes;
    auto* bis = app.add_subcommand("bisim", "decide ground bisimilarity of two programs");
    bis->add_option("files", files, "one or two program files");
    bis->add_option("--left", left, "definition on the left");
    bis->add_option("--right", right, "definition on the right");
    bis->add_option("--corpus", corpus_name, "compare the pair of a corpus entry");
    bis->add_option("--probe", probes, "environment superoperator NAME:q1,q2 (repeatable)");

    std::string context_file;
    std::string context_proc;
    std::string prefix;
    std::string mode = "scheduled";
    std::size_t cap = 4096;
    auto* rep = app.add_subcommand("replay", "replay a schedule with the process placed in a context");
    rep->add_option("file", file, "program file")->required();
    rep->add_option("--proc", proc, "definition to use instead of the main process");
    rep->add_option("--context", context_file, "context program file")->required();
    rep->add_option("--context-proc", context_proc, "context definition instead of its main process");
    rep->add_option("--prefix", prefix, "scheduled steps taken before the context is added");
    rep->add_option("--schedule", schedule, "comma-separated entries s, s:action or *:action")->required();
    rep->add_option("--mode", mode, "scheduled or unscheduled")->capture_default_str();
    rep->add_option("--cap", cap, "maximum number of runs tracked")->capture_default_str();

    bool list = false;
    bool run_all = false;
    std::vector<std::string> names;
    auto* corp = app.add_subcommand("corpus", "list or run the built-in protocol corpus");
    corp->add_flag("--list", list, "list the entries");
    corp->add_flag("--run-all", run_all, "run every entry");
    std::string source_key;
    corp->add_option("--source", source_key, "print an embedded program");
    corp->add_option("names", names, "entries to run");

    for (auto* sub : {parse, typecheck, runc, bis, rep, corp}) {
        sub->fallthrough();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        c.eps = default_eps();
        if (parse->parsed()) {
            return cmd_parse(file, c, out);
        }
        if (typecheck->parsed()) {
            return cmd_typecheck(file, c, out);
        }
        if (runc->parsed()) {
            return cmd_run(file, proc, semantics, max_steps, schedule, c, out);
        }
        if (bis->parsed()) {
            return cmd_bisim(files, left, right, corpus_name, probes, c, out);
        }
        if (rep->parsed()) {
            return cmd_replay(file, proc, context_file, context_proc, prefix, schedule, mode, cap, c, out);
        }
        return cmd_corpus(list, run_all, source_key, names, c, out);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const TypeError& e) {
        err << "type error: " << e.what() << "\n";
        return kType;
    } catch (const DeterminismError& e) {
        err << "determinism violation: " << e.what() << "\n";
        return kSemantics;
    } catch (const SemanticsError& e) {
        err << "semantics error: " << e.what() << "\n";
        return kSemantics;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kSemantics;
    }
}

}  // namespace lqcheck::cli
