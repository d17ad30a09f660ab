#pragma once

#include <string>

#include "json.hpp"

#include "pwl/eval.hpp"
#include "pwl/identify.hpp"
#include "pwl/model.hpp"
#include "pwl/realization.hpp"
#include "pwl/sim.hpp"

namespace pwl {

using json = nlohmann::json;

// Model documents: {"output_dim": p, "modes": [{"A": [[..]], "a": [..],
// "C": [[..]], "c": [..], "initial_states": [[..], ..] | "unconstrained"}]}.
// Round trips are bit-faithful for finite doubles.
json to_json(const PwlSystem& sys);
PwlSystem pwl_from_json(const json& doc);

// A jump-linear system serializes as a one-mode linear model document.
json to_json(const Lssj& sys);
Lssj lssj_from_json(const json& doc);

// {"output_dim": p, "order": n, "modes": [{"coeffs": [[[..]], ..]}]}.
json to_json(const SarsModel& sars);
SarsModel sars_from_json(const json& doc);

// {"L", "M", "R", "p", "pieces": [..], "entries": [[..], ..]} with entries
// in row-major order.
json to_json(const HankelMatrix& h);
HankelMatrix hankel_from_json(const json& doc);

// Model document of the fitted system merged with {"objective",
// "assignments", "trace", "converged", "restarts_used", "epsilon",
// "restart_traces", "empty_modes"}.
json to_json(const IdentifyResult& result);

json to_json(const MatchReport& report);

// CSV with header t,x1..xn,dx1..dxn[,mode] and 17 significant digits, plus
// a sidecar JSON (same path with extension .meta.json) holding
// {"switch_times": [..], "delta": d}.  Requires a uniform state dimension.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Reads the CSV and, when present, the sidecar.  Missing dx columns leave
// derivs empty; a missing mode column leaves mode_labels empty.
Trajectory read_trajectory_csv(const std::string& path);

// Sidecar path for a trajectory CSV: "runs/a.csv" -> "runs/a.meta.json".
std::string sidecar_path(const std::string& csv_path);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& doc);

// Nested-array encodings shared by every document type.
json matrix_to_json(const Eigen::MatrixXd& m);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what);
Eigen::VectorXd vector_from_json(const json& j, const std::string& what);

}  // namespace pwl
