#include <algorithm>
#include <cmath>

#include "lqcheck/bisim.hpp"
#include "lqcheck/error.hpp"
#include "lqcheck/types.hpp"

namespace lqcheck::bisim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\n");
    if (b == std::string::npos) {
        return "";
    }
    auto e = s.find_last_not_of(" \t\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_top(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            --depth;
        }
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) {
        out.push_back(trim(cur));
    }
    return out;
}

std::vector<double> distinct_masses(const std::vector<plts::ProbDist>& ds, double eps) {
    std::vector<double> out;
    for (const auto& d : ds) {
        out.push_back(d.mass());
    }
    std::sort(out.begin(), out.end());
    std::vector<double> uniq;
    for (double m : out) {
        if (uniq.empty() || m - uniq.back() > eps) {
            uniq.push_back(m);
        }
    }
    return uniq;
}

void push_unique(std::vector<plts::ProbDist>& into, plts::ProbDist d, std::size_t cap, double eps) {
    for (const auto& x : into) {
        if (plts::approx_eq(x, d, eps)) {
            return;
        }
    }
    if (into.size() >= cap) {
        throw SemanticsError("replay frontier exceeds the cap of " + std::to_string(cap));
    }
    into.push_back(std::move(d));
}

bool known_tags(const lang::Scheduler& s, const std::set<lang::Tag>& tags) {
    return tags.count(s.first) && (!s.second || tags.count(*s.second));
}

std::optional<Action> action_for(const ScheduleEntry& e, const plts::ProbDist& d) {
    if (e.action) {
        return e.action;
    }
    auto labels = resolve_entry(e, plts::enabled(d));
    if (labels.empty()) {
        return std::nullopt;
    }
    return labels.front().second;
}

}  // namespace

std::vector<ScheduleEntry> parse_schedule(const std::string& text, const plts::Register& reg) {
    std::vector<ScheduleEntry> out;
    for (const auto& item : split_top(text, ',')) {
        if (item.empty()) {
            throw UsageError("empty entry in schedule '" + text + "'");
        }
        auto parts = split_top(item, ':');
        if (parts.size() > 2) {
            throw UsageError("malformed schedule entry '" + item + "'");
        }
        ScheduleEntry e;
        if (parts[0] != "*") {
            e.scheduler = plts::parse_scheduler(parts[0]);
        }
        if (parts.size() == 2) {
            e.action = plts::parse_action(parts[1], reg);
        } else if (!e.scheduler) {
            throw UsageError("wildcard schedule entry needs an action");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<Label> resolve_entry(const ScheduleEntry& e, const std::set<Label>& enabled) {
    if (e.scheduler && e.action) {
        return {{*e.scheduler, *e.action}};
    }
    std::vector<Label> out;
    for (const auto& l : enabled) {
        if ((!e.scheduler || l.first == *e.scheduler) && (!e.action || l.second == *e.action)) {
            out.push_back(l);
        }
    }
    if (e.scheduler && out.size() > 1) {
        throw UsageError("scheduler " + lang::to_string(*e.scheduler) + " enables several actions; give one explicitly");
    }
    return out;
}

std::string to_string(const ScheduleEntry& e) {
    std::string s = e.scheduler ? lang::to_string(*e.scheduler) : "*";
    if (e.action) {
        s += ":" + plts::to_string(*e.action);
    }
    return s;
}

double StepReport::min() const { return masses.empty() ? 0.0 : masses.front(); }
double StepReport::max() const { return masses.empty() ? 0.0 : masses.back(); }
double StepReport::progress_min() const { return progress_masses.empty() ? 0.0 : progress_masses.front(); }
double StepReport::progress_max() const { return progress_masses.empty() ? 0.0 : progress_masses.back(); }

std::vector<StepReport> context_replay(const plts::ProbDist& d, const lang::ProcessPtr& context,
                                       const std::vector<ScheduleEntry>& schedule, const ReplayOptions& opts) {
    auto ctx_tags = lang::tags_of(context);
    auto ctx_owned = types::owned_qubits(context);
    plts::ProbDist start(d.reg());
    std::set<lang::Tag> all_tags = ctx_tags;
    for (const auto& e : d.entries()) {
        auto tags = lang::tags_of(e.proc);
        for (const auto& t : tags) {
            if (ctx_tags.count(t)) {
                throw UsageError("incompatible context: tag '" + t.name + "' occurs in both the process and the context");
            }
        }
        all_tags.insert(tags.begin(), tags.end());
        auto composed = lang::Process::par(e.proc, context);
        types::owned_qubits(composed);
        start.add(e.weight, e.rho, composed);
    }
    for (const auto& q : ctx_owned) {
        if (std::find(d.reg().begin(), d.reg().end(), q) == d.reg().end()) {
            throw TypeError("context owns qubit '" + q + "' outside the register");
        }
    }
    start = start.canonical(opts.eps);

    std::vector<plts::ProbDist> all{start};
    std::vector<plts::ProbDist> progress{start};
    std::vector<StepReport> reports;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& entry = schedule[i];
        StepReport r;
        r.step = i + 1;
        r.entry = entry;
        if (entry.scheduler && !known_tags(*entry.scheduler, all_tags)) {
            r.notes.push_back("unknown tag in scheduler " + lang::to_string(*entry.scheduler) + "; step yields eps");
            all = {plts::ProbDist(d.reg())};
            progress = all;
        } else if (opts.mode == ReplayMode::Scheduled) {
            std::vector<plts::ProbDist> next;
            for (const auto& x : all) {
                auto labels = resolve_entry(entry, plts::enabled(x));
                if (labels.empty()) {
                    push_unique(next, plts::ProbDist(d.reg()), opts.cap, opts.eps);
                }
                for (const auto& l : labels) {
                    push_unique(next, plts::scheduled_step(x, l.first, l.second, opts.eps), opts.cap, opts.eps);
                }
            }
            all = std::move(next);
            progress = all;
        } else {
            auto advance = [&](const std::vector<plts::ProbDist>& from, bool progress_only) {
                std::vector<plts::ProbDist> next;
                plts::UnscheduledOptions uo{opts.cap, progress_only};
                for (const auto& x : from) {
                    auto mu = action_for(entry, x);
                    if (!mu) {
                        push_unique(next, plts::ProbDist(d.reg()), opts.cap, opts.eps);
                        continue;
                    }
                    for (auto& y : plts::unscheduled_successors(x, *mu, uo, opts.eps)) {
                        push_unique(next, std::move(y), opts.cap, opts.eps);
                    }
                }
                return next;
            };
            all = advance(all, false);
            progress = advance(progress, true);
        }
        r.masses = distinct_masses(all, opts.eps);
        r.progress_masses = distinct_masses(progress, opts.eps);
        r.count = all.size();
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace lqcheck::bisim
