#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

#include "tdf/dynamics.hpp"
#include "tdf/geometry.hpp"
#include "tdf/projection.hpp"
#include "tdf/tensor.hpp"
#include "tdf/tucker.hpp"

namespace tdf {

using json = nlohmann::json;

/// {"dims": [...], "data": [...]} with row-major data.
json tensor_to_json(const DenseTensor& t);
DenseTensor tensor_from_json(const json& j);

/// {"rows": m, "cols": n, "data": [...]} with column-major data.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

/// {"core": tensor, "factors": [matrix, ...]}.
json tucker_to_json(const TuckerTensor& u);
TuckerTensor tucker_from_json(const json& j);

/// {"core": E, "L": [matrix, ...]}.
json chart_to_json(const ChartPoint& c);
ChartPoint chart_from_json(const json& j);

/// {"terms": [[matrix, ...], ...], "dims": [...]}.
json operator_to_json(const KroneckerSumOperator& A);
KroneckerSumOperator operator_from_json(const json& j);

json hartree_to_json(const HartreeState& s);
json state_to_json(const State& s);

/// {"objective", "duality_residual", "iterations", "converged",
///  "tangent": {"dC": tensor, "dU": [matrix, ...], "dense": tensor}}.
json report_to_json(const ProjectionReport& r);

/// {"times": [...], "states": [...]}.
json trajectory_to_json(const TrajectoryRecord& rec);

/// Header plus one row per recorded time; "nan" marks absent diagnostics.
std::string trajectory_csv(const TrajectoryRecord& rec);
inline constexpr const char* trajectory_csv_header =
    "step,t,projection_residual,core_condition,reference_error,norm_drift,sphere_tangency,lambda,lambda_closed_form";

/// Shortest round-trip representation of every double.
std::string dump(const json& j);

json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

DenseTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const DenseTensor& t, const std::filesystem::path& path);
TuckerTensor read_tucker(const std::filesystem::path& path);
void write_tucker(const TuckerTensor& u, const std::filesystem::path& path);

} // namespace tdf
