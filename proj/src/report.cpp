#include <cstdio>
#include <cstdlib>

#include "json.hpp"
#include "lqcheck/bisim.hpp"

namespace lqcheck::bisim {

namespace {

using nlohmann::json;

double rounded(double v) {
    double r = std::strtod(format_number(v).c_str(), nullptr);
    return r == 0.0 ? 0.0 : r;
}

json matrix_json(const qmath::Matrix& m) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array();
        json ir = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(rounded(m(i, j).real()));
            ir.push_back(rounded(m(i, j).imag()));
        }
        re.push_back(rr);
        im.push_back(ir);
    }
    return {{"re", re}, {"im", im}};
}

json masses_json(const std::vector<double>& ms) {
    json out = json::array();
    for (double m : ms) {
        out.push_back(rounded(m));
    }
    return out;
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string verdict_json(const Verdict& v, int indent) {
    json j;
    j["equivalent"] = v.equivalent;
    j["theorem_basis"] = v.theorem_basis;
    json w = json::array();
    for (const auto& [s, a] : v.witness) {
        w.push_back({{"scheduler", lang::to_string(s)}, {"action", plts::to_string(a)}});
    }
    j["witness"] = w;
    if (v.env_mismatch) {
        j["mismatch"] = to_string(v.mismatch);
        j["detail"] = v.detail;
        j["env_mismatch"] = {{"left", matrix_json(v.env_mismatch->left)},
                             {"right", matrix_json(v.env_mismatch->right)},
                             {"max_abs_diff", rounded(v.env_mismatch->max_abs_diff)}};
    } else {
        j["env_mismatch"] = nullptr;
    }
    if (!v.probe.empty()) {
        j["probe"] = v.probe;
    }
    j["warnings"] = v.warnings;
    j["stats"] = {{"pairs_visited", v.stats.pairs_visited},
                  {"max_depth", v.stats.max_depth},
                  {"wall_ms", rounded(v.stats.wall_ms)}};
    return j.dump(indent);
}

std::string replay_json(const std::vector<StepReport>& reports, int indent) {
    json out = json::array();
    for (const auto& r : reports) {
        out.push_back({{"step", r.step},
                       {"entry", to_string(r.entry)},
                       {"masses", masses_json(r.masses)},
                       {"progress_masses", masses_json(r.progress_masses)},
                       {"min", rounded(r.min())},
                       {"max", rounded(r.max())},
                       {"count", r.count},
                       {"notes", r.notes}});
    }
    return out.dump(indent);
}

}  // namespace lqcheck::bisim
