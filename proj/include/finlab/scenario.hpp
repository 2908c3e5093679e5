#pragma once

#include <string>
#include <vector>

#include "finlab/flow.hpp"
#include "finlab/geometry.hpp"
#include "finlab/phase.hpp"
#include "finlab/tensor.hpp"

namespace finlab {

// a fully validated run description: model + candidate tensor + sampling,
// integration, tolerance, and output choices, with every default materialized
struct Scenario {
    int dimension = 0;
    std::string energy_text;
    std::vector<std::vector<std::string>> k_rows;
    SampleSpec samples;
    FlowPolicy flow;
    double tol_condition = 1e-8;
    double tol_drift = 1e-8;
    double tol_identity = 1e-8;
    std::string report_path;  // "" = stdout only
    std::string csv_path;     // "" = no trajectory export

    FinslerModel model;
    TensorField tensor;
};

// JSON document with nested keys exactly:
//   dimension, energy, k_tensor (array of arrays of entry strings),
//   samples{count,seed,q_box,u_box,u_min_norm}, flow{t_end,step,method,adaptive_tol},
//   tolerances{condition,drift,identity}, output{report,csv}
// unknown keys are rejected; boxes take one interval (broadcast) or one per axis
Scenario scenario_from_text(const std::string& text);
Scenario load_config(const std::string& path);

Scenario make_preset(const std::string& name);
std::vector<std::string> preset_names();

enum class Command { check, hierarchy, flow, bracket, all };

Command parse_command(const std::string& name);

struct RunResult {
    std::string report;    // JSON document, deterministic for a given scenario
    bool verdict = false;  // every verdict in the report passed
};

// runs the requested command on the scenario; writes the trajectory CSV when
// the scenario configures one and the command integrates a flow
RunResult run_command(const Scenario& sc, Command cmd);

}  // namespace finlab
