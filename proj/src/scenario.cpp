#include "finlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "finlab/errors.hpp"
#include "finlab/hierarchy.hpp"
#include "finlab/killing.hpp"

namespace finlab {

namespace {

using njson = nlohmann::ordered_json;

void reject_unknown(const njson& obj, std::initializer_list<const char*> allowed,
                    const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known)
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

const njson& expect_object(const njson& v, const char* name) {
    if (!v.is_object()) throw ConfigError(std::string(name) + " must be an object");
    return v;
}

long long expect_int(const njson& v, const char* name) {
    if (!v.is_number_integer()) throw ConfigError(std::string(name) + " must be an integer");
    return v.get<long long>();
}

double expect_number(const njson& v, const char* name) {
    if (!v.is_number()) throw ConfigError(std::string(name) + " must be a number");
    return v.get<double>();
}

std::string expect_string(const njson& v, const char* name) {
    if (!v.is_string()) throw ConfigError(std::string(name) + " must be a string");
    return v.get<std::string>();
}

std::vector<Interval> parse_box(const njson& v, int dim, char axis, const char* name) {
    if (!v.is_array() || v.empty())
        throw ConfigError(std::string(name) + " must be a non-empty array of [lo, hi] intervals");
    if (v.size() != 1 && static_cast<int>(v.size()) != dim)
        throw ConfigError(std::string(name) + " needs one interval or one per axis");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const njson& e = v[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError(std::string(name) + " entry " + std::to_string(i + 1) +
                              " must be [lo, hi]");
        out.push_back(Interval{e[0].get<double>(), e[1].get<double>()});
    }
    if (out.size() == 1) out.assign(static_cast<std::size_t>(dim), out[0]);
    for (int i = 0; i < dim; ++i)
        if (!(out[static_cast<std::size_t>(i)].lo < out[static_cast<std::size_t>(i)].hi))
            throw ConfigError("degenerate interval " + std::string(1, axis) +
                              std::to_string(i + 1));
    return out;
}

Scenario scenario_from_json(const njson& doc) {
    expect_object(doc, "config");
    reject_unknown(doc, {"dimension", "energy", "k_tensor", "samples", "flow", "tolerances",
                         "output"},
                   "config");
    if (!doc.contains("dimension")) throw ConfigError("config needs a dimension");
    if (!doc.contains("energy")) throw ConfigError("config needs an energy expression");
    if (!doc.contains("k_tensor")) throw ConfigError("config needs a k_tensor");

    Scenario sc;
    const long long dim = expect_int(doc["dimension"], "dimension");
    if (dim < 1 || dim > 8) throw ConfigError("dimension must be an integer between 1 and 8");
    sc.dimension = static_cast<int>(dim);
    sc.energy_text = expect_string(doc["energy"], "energy");

    const njson& kt = doc["k_tensor"];
    if (!kt.is_array()) throw ConfigError("k_tensor must be an array of rows");
    for (const njson& row : kt) {
        if (!row.is_array()) throw ConfigError("k_tensor rows must be arrays of entry strings");
        std::vector<std::string> entries;
        for (const njson& cell : row) {
            if (!cell.is_string()) throw ConfigError("k_tensor entries must be strings");
            entries.push_back(cell.get<std::string>());
        }
        sc.k_rows.push_back(std::move(entries));
    }

    if (doc.contains("samples")) {
        const njson& s = expect_object(doc["samples"], "samples");
        reject_unknown(s, {"count", "seed", "q_box", "u_box", "u_min_norm"}, "samples");
        if (s.contains("count")) {
            const long long c = expect_int(s["count"], "samples.count");
            if (c < 1) throw ConfigError("samples.count must be at least 1");
            if (c > 100000) throw ConfigError("samples.count must be at most 100000");
            sc.samples.count = static_cast<int>(c);
        }
        if (s.contains("seed")) {
            const long long seed = expect_int(s["seed"], "samples.seed");
            if (seed < 0) throw ConfigError("samples.seed must be non-negative");
            sc.samples.seed = static_cast<std::uint64_t>(seed);
        }
        if (s.contains("q_box")) sc.samples.q_box = parse_box(s["q_box"], sc.dimension, 'q', "samples.q_box");
        if (s.contains("u_box")) sc.samples.u_box = parse_box(s["u_box"], sc.dimension, 'u', "samples.u_box");
        if (s.contains("u_min_norm")) {
            sc.samples.u_min_norm = expect_number(s["u_min_norm"], "samples.u_min_norm");
            if (!(sc.samples.u_min_norm > 0.0))
                throw ConfigError("samples.u_min_norm must be positive");
        }
    }
    // materialize box defaults at full length so the report echo is explicit
    if (sc.samples.q_box.size() == 1)
        sc.samples.q_box.assign(static_cast<std::size_t>(sc.dimension), sc.samples.q_box[0]);
    if (sc.samples.u_box.size() == 1)
        sc.samples.u_box.assign(static_cast<std::size_t>(sc.dimension), sc.samples.u_box[0]);

    if (doc.contains("flow")) {
        const njson& f = expect_object(doc["flow"], "flow");
        reject_unknown(f, {"t_end", "step", "method", "adaptive_tol"}, "flow");
        if (f.contains("t_end")) {
            sc.flow.t_end = expect_number(f["t_end"], "flow.t_end");
            if (!(sc.flow.t_end > 0.0)) throw ConfigError("flow.t_end must be positive");
        }
        if (f.contains("step")) {
            sc.flow.step = expect_number(f["step"], "flow.step");
            if (!(sc.flow.step > 0.0)) throw ConfigError("flow.step must be positive");
        }
        if (f.contains("method")) {
            sc.flow.method = expect_string(f["method"], "flow.method");
            if (sc.flow.method != "rk4" && sc.flow.method != "dopri")
                throw ConfigError("flow.method must be 'rk4' or 'dopri'");
        }
        if (f.contains("adaptive_tol")) {
            sc.flow.adaptive_tol = expect_number(f["adaptive_tol"], "flow.adaptive_tol");
            if (!(sc.flow.adaptive_tol > 0.0))
                throw ConfigError("flow.adaptive_tol must be positive");
        }
    }

    if (doc.contains("tolerances")) {
        const njson& t = expect_object(doc["tolerances"], "tolerances");
        reject_unknown(t, {"condition", "drift", "identity"}, "tolerances");
        auto read_tol = [&](const char* key, double& slot) {
            if (!t.contains(key)) return;
            slot = expect_number(t[key], (std::string("tolerances.") + key).c_str());
            if (!(slot > 0.0))
                throw ConfigError(std::string("tolerances.") + key + " must be positive");
        };
        read_tol("condition", sc.tol_condition);
        read_tol("drift", sc.tol_drift);
        read_tol("identity", sc.tol_identity);
    }

    if (doc.contains("output")) {
        const njson& o = expect_object(doc["output"], "output");
        reject_unknown(o, {"report", "csv"}, "output");
        if (o.contains("report")) sc.report_path = expect_string(o["report"], "output.report");
        if (o.contains("csv")) sc.csv_path = expect_string(o["csv"], "output.csv");
    }

    try {
        sc.model = make_model(sc.dimension, sc.energy_text);
    } catch (const ParseError& e) {
        throw ConfigError("energy: " + std::string(e.what()) + " at offset " +
                          std::to_string(e.position));
    }
    sc.tensor = TensorField::parse(sc.k_rows, sc.dimension);
    return sc;
}

struct PresetEntry {
    const char* name;
    const char* text;
};

constexpr PresetEntry kPresets[] = {
    {"euclid2-qq", R"json({
        "dimension": 2,
        "energy": "0.5*(u1^2+u2^2)",
        "k_tensor": [["q1^2", "q1*q2"], ["q1*q2", "q2^2"]]
    })json"},
    {"euclid3-aq", R"json({
        "dimension": 3,
        "energy": "0.5*(u1^2+u2^2+u3^2)",
        "k_tensor": [["q1+2", "0.5*q2", "0.5*q3"],
                     ["0.5*q2", "2", "0"],
                     ["0.5*q3", "0", "2"]]
    })json"},
    {"polar2-ci", R"json({
        "dimension": 2,
        "energy": "0.5*(u1^2+q1^2*u2^2)",
        "k_tensor": [["1.5", "0"], ["0", "1.5"]],
        "samples": {"q_box": [[0.5, 2], [-2, 2]], "u_box": [[-1, 1], [0.5, 1.5]]}
    })json"},
    {"randers2-ci", R"json({
        "dimension": 2,
        "energy": "(sqrt(u1^2+u2^2)+0.3*u1)^2",
        "k_tensor": [["2", "0"], ["0", "2"]]
    })json"},
    {"euclid2-bad", R"json({
        "dimension": 2,
        "energy": "0.5*(u1^2+u2^2)",
        "k_tensor": [["q1^2", "0"], ["0", "q2"]]
    })json"},
};

njson interval_json(const std::vector<Interval>& box) {
    njson arr = njson::array();
    for (const Interval& iv : box) arr.push_back({iv.lo, iv.hi});
    return arr;
}

njson scenario_json(const Scenario& sc) {
    njson j;
    j["dimension"] = sc.dimension;
    j["energy"] = sc.energy_text;
    j["k_tensor"] = sc.k_rows;
    j["samples"] = {{"count", sc.samples.count},
                    {"seed", sc.samples.seed},
                    {"q_box", interval_json(sc.samples.q_box)},
                    {"u_box", interval_json(sc.samples.u_box)},
                    {"u_min_norm", sc.samples.u_min_norm}};
    j["flow"] = {{"t_end", sc.flow.t_end},
                 {"step", sc.flow.step},
                 {"method", sc.flow.method},
                 {"adaptive_tol", sc.flow.adaptive_tol}};
    j["tolerances"] = {{"condition", sc.tol_condition},
                       {"drift", sc.tol_drift},
                       {"identity", sc.tol_identity}};
    j["output"] = {{"report", sc.report_path}, {"csv", sc.csv_path}};
    return j;
}

njson matrix_json(const Mat& m) {
    njson rows = njson::array();
    for (int i = 0; i < m.size(); ++i) {
        njson row = njson::array();
        for (int j = 0; j < m.size(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

bool metric_is_quadratic(const PointGeometry& geo) {
    double third = 0.0, scale = 0.0;
    for (const Mat& dg : geo.dg_du) third = std::fmax(third, max_abs(dg));
    scale = std::fmax(1.0, max_abs(geo.g));
    return third <= 1e-10 * scale;
}

njson check_section(const Scenario& sc, const std::vector<PhasePoint>& samples, bool& verdict) {
    njson sec;
    const ConditionReport cr = condition_residual(sc.model, sc.tensor, samples, sc.tol_condition);
    sec["condition"] = {{"sample_count", cr.sample_count},
                        {"residual_max", cr.residual_max},
                        {"symmetry_max", cr.symmetry_max},
                        {"trace_identity_max", cr.trace_identity_max},
                        {"tolerance", cr.tolerance},
                        {"max_u_degree", cr.max_u_degree},
                        {"verdict", cr.verdict}};
    njson alphas = njson::array();
    for (const std::vector<double>& a : cr.alpha_samples) alphas.push_back(a);
    sec["condition"]["alpha_samples"] = alphas;

    const CanonicalReport can = canonical_checks(sc.model, samples);
    sec["canonical"] = {{"nabla_e_max", can.nabla_e_max},     {"nabla_t_max", can.nabla_t_max},
                        {"nabla_g_max", can.nabla_g_max},     {"nabla_theta_max", can.nabla_theta_max},
                        {"dh_e_max", can.dh_e_max},           {"euler_max", can.euler_max},
                        {"worst", can.worst()},               {"tolerance", sc.tol_identity},
                        {"verdict", can.worst() <= sc.tol_identity}};

    const bool u_free = !sc.tensor.uses_u();
    const bool quadratic = u_free && metric_is_quadratic(geometry_at(sc.model, samples.front()));
    if (quadratic) {
        const RiemannReport rr = riemannian_sckt_residual(sc.model, sc.tensor, samples, sc.tol_condition);
        sec["riemannian"] = {{"sample_count", rr.sample_count},
                             {"definition_residual_max", rr.definition_residual_max},
                             {"contraction_gap_max", rr.contraction_gap_max},
                             {"tolerance", rr.tolerance},
                             {"verdict", rr.verdict}};
        verdict = verdict && rr.verdict == cr.verdict;  // the two routes must agree
    } else {
        sec["riemannian"] = nullptr;
    }
    if (u_free)
        sec["nijenhuis_max"] = nijenhuis_residual(sc.tensor, samples);
    else
        sec["nijenhuis_max"] = nullptr;

    verdict = verdict && cr.verdict && can.worst() <= sc.tol_identity;
    return sec;
}

njson hierarchy_section(const Scenario& sc, const std::vector<PhasePoint>& samples,
                        bool& verdict) {
    njson sec;
    const int n = sc.dimension;
    double two_route_max = 0.0, b_terminal_max = 0.0, h_terminal_max = 0.0;
    double big_b_terminal_max = 0.0, charpoly_max = 0.0, cofactor_gap_max = 0.0;
    double adjugate_product_max = 0.0;
    njson per_sample = njson::array();
    for (const PhasePoint& p : samples) {
        const HierarchyValues hv = hierarchy_at(sc.model, sc.tensor, p);
        two_route_max = std::fmax(two_route_max, hv.two_route_max);
        b_terminal_max = std::fmax(b_terminal_max, std::fabs(hv.b[static_cast<std::size_t>(n) + 1]));
        h_terminal_max = std::fmax(h_terminal_max, std::fabs(hv.h[static_cast<std::size_t>(n)]));
        big_b_terminal_max =
            std::fmax(big_b_terminal_max, max_abs(hv.big_b[static_cast<std::size_t>(n)]));
        const Mat kval = sc.tensor.values_at(p);
        charpoly_max = std::fmax(charpoly_max, charpoly_check(kval, hv.b));
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        const double expect = sign * 2.0 * hv.h[static_cast<std::size_t>(n) - 1];
        cofactor_gap_max =
            std::fmax(cofactor_gap_max, std::fabs(hv.cofactor_integral - expect) /
                                            std::fmax(1.0, std::fabs(expect)));
        const double det = lu_factor(kval).det();
        Mat prod = hv.adjugate * kval;
        prod.add_diag(-det);
        adjugate_product_max = std::fmax(
            adjugate_product_max, max_abs(prod) / std::fmax(1.0, std::fabs(det)));

        njson entry;
        entry["q"] = p.q;
        entry["u"] = p.u;
        entry["h"] = hv.h;
        entry["cofactor"] = hv.cofactor_integral;
        per_sample.push_back(entry);
    }

    std::vector<double> shifts = {-1.0, 0.5, 2.0, -2.0, 1.0, 3.0, -0.5, 4.0, -3.0};
    shifts.resize(static_cast<std::size_t>(std::max(n + 1, 4)));
    const ShiftedFamilyReport sf =
        shifted_family_check(sc.model, sc.tensor, samples.front(), shifts, sc.tol_identity);

    sec["sample_count"] = static_cast<int>(samples.size());
    sec["two_route_max"] = two_route_max;
    sec["b_terminal_max"] = b_terminal_max;
    sec["h_terminal_max"] = h_terminal_max;
    sec["big_b_terminal_max"] = big_b_terminal_max;
    sec["charpoly_residual_max"] = charpoly_max;
    sec["cofactor_gap_max"] = cofactor_gap_max;
    sec["adjugate_product_max"] = adjugate_product_max;
    sec["shifted_family"] = {{"shift_count", sf.shift_count},
                             {"fit_residual_max", sf.fit_residual_max},
                             {"coefficient_residual_max", sf.coefficient_residual_max},
                             {"recursion_residual_max", sf.recursion_residual_max},
                             {"tolerance", sf.tolerance},
                             {"verdict", sf.verdict}};
    sec["samples"] = per_sample;
    const bool ok = b_terminal_max <= sc.tol_identity && h_terminal_max <= sc.tol_identity &&
                    big_b_terminal_max <= sc.tol_identity && charpoly_max <= sc.tol_identity &&
                    cofactor_gap_max <= sc.tol_identity &&
                    adjugate_product_max <= sc.tol_identity && sf.verdict;
    sec["tolerance"] = sc.tol_identity;
    sec["verdict"] = ok;
    verdict = verdict && ok;
    return sec;
}

njson drift_json(const DriftReport& dr) {
    njson j;
    j["labels"] = dr.labels;
    j["initial"] = dr.initial;
    j["drift_abs"] = dr.drift_abs;
    j["drift_relative"] = dr.drift_relative;
    j["worst"] = dr.worst;
    j["tolerance"] = dr.tolerance;
    j["verdict"] = dr.verdict;
    return j;
}

njson flow_section(const Scenario& sc, const std::vector<PhasePoint>& samples, bool& verdict) {
    njson runs = njson::array();
    const std::size_t start_count = std::min<std::size_t>(2, samples.size());
    for (std::size_t s = 0; s < start_count; ++s) {
        const PhasePoint& start = samples[s];
        const Trajectory traj = integrate_geodesic(sc.model, start, sc.flow);
        const DriftReport dr = drift_report(sc.model, sc.tensor, traj, sc.tol_drift);
        njson entry;
        entry["start_q"] = start.q;
        entry["start_u"] = start.u;
        entry["method"] = traj.method;
        entry["steps_taken"] = traj.steps_taken;
        entry["steps_rejected"] = traj.steps_rejected;
        entry["step_min"] = traj.step_min;
        entry["step_max"] = traj.step_max;
        entry["drift"] = drift_json(dr);
        verdict = verdict && dr.verdict;
        if (traj.method == "rk4" && traj.step_max <= 1e-3 * (1.0 + 1e-9)) {
            const DerivativeFlowReport der = along_flow_derivative_check(sc.model, sc.tensor, traj);
            entry["along_flow_derivatives"] = {
                {"center_count", der.center_count}, {"a_gap_max", der.a_gap_max},
                {"k_gap_max", der.k_gap_max},       {"tolerance", der.tolerance},
                {"verdict", der.verdict}};
            verdict = verdict && der.verdict;
        }
        if (s == 0 && !sc.csv_path.empty()) {
            std::ofstream csv(sc.csv_path);
            if (!csv) throw ConfigError("cannot write csv file '" + sc.csv_path + "'");
            write_trajectory_csv(sc.model, sc.tensor, traj, csv);
            if (!csv) throw ConfigError("failed while writing csv file '" + sc.csv_path + "'");
        }
        runs.push_back(entry);
    }
    njson sec;
    sec["runs"] = runs;
    sec["csv"] = sc.csv_path;
    return sec;
}

njson bracket_section(const Scenario& sc, const std::vector<PhasePoint>& samples) {
    const InvolutivityTable table = involutivity_probe(sc.model, sc.tensor, samples);
    njson sec;
    sec["sample_count"] = table.sample_count;
    sec["magnitudes"] = matrix_json(table.magnitudes);
    double e_row = 0.0;
    for (int j = 0; j < table.n; ++j) e_row = std::fmax(e_row, table.magnitudes(0, j));
    sec["e_row_max"] = e_row;  // |{h_0, h_j}| = |{E, h_j}|, the conservation restatement
    sec["antisymmetry_max"] = table.antisymmetry_max;
    sec["note"] = "bracket magnitudes are reported, not asserted: involutivity of the "
                  "conserved quantities is an open question";
    return sec;
}

}  // namespace

Scenario scenario_from_text(const std::string& text) {
    njson doc;
    try {
        doc = njson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return scenario_from_json(doc);
}

Scenario load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_text(buf.str());
}

Scenario make_preset(const std::string& name) {
    for (const PresetEntry& entry : kPresets)
        if (name == entry.name) return scenario_from_text(entry.text);
    std::string known;
    for (const PresetEntry& entry : kPresets) {
        if (!known.empty()) known += ", ";
        known += entry.name;
    }
    throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const PresetEntry& entry : kPresets) out.push_back(entry.name);
    return out;
}

Command parse_command(const std::string& name) {
    if (name == "check") return Command::check;
    if (name == "hierarchy") return Command::hierarchy;
    if (name == "flow") return Command::flow;
    if (name == "bracket") return Command::bracket;
    if (name == "all") return Command::all;
    throw ConfigError("unknown command '" + name + "'");
}

RunResult run_command(const Scenario& sc, Command cmd) {
    const std::vector<PhasePoint> samples = sample_phase_points(sc.samples, sc.dimension);
    njson root;
    switch (cmd) {
        case Command::check: root["command"] = "check"; break;
        case Command::hierarchy: root["command"] = "hierarchy"; break;
        case Command::flow: root["command"] = "flow"; break;
        case Command::bracket: root["command"] = "bracket"; break;
        case Command::all: root["command"] = "all"; break;
    }
    root["scenario"] = scenario_json(sc);
    njson results;
    bool verdict = true;
    if (cmd == Command::check || cmd == Command::all)
        results["check"] = check_section(sc, samples, verdict);
    if (cmd == Command::hierarchy || cmd == Command::all)
        results["hierarchy"] = hierarchy_section(sc, samples, verdict);
    if (cmd == Command::flow || cmd == Command::all)
        results["flow"] = flow_section(sc, samples, verdict);
    if (cmd == Command::bracket || cmd == Command::all)
        results["bracket"] = bracket_section(sc, samples);
    root["results"] = results;
    root["verdict"] = verdict;

    RunResult out;
    out.report = root.dump(2) + "\n";
    out.verdict = verdict;
    return out;
}

}  // namespace finlab
