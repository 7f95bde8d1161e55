// Artifact serialization: CSV time series with shortest round-trip doubles,
// the TDF1 binary field snapshot format, and JSON reports.
//
// TDF1 layout: magic "TDF1", three little-endian u32 dims
// (grid_x1, grid_x2, components), then row-major little-endian f64 with the
// component index fastest.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tidecore/control.hpp"
#include "tidecore/diagnostics.hpp"
#include "tidecore/domain.hpp"
#include "tidecore/timestepper.hpp"

namespace tidal {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double x);
double parse_double(const std::string& text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

void write_tdf(const std::string& path, const ScalarField& field);
void write_tdf(const std::string& path, const VectorField& field);

struct TdfField {
    std::uint32_t grid_x1 = 0, grid_x2 = 0, components = 0;
    std::vector<double> data;  // (i1*grid_x2 + i2)*components + c
};

TdfField read_tdf(const std::string& path);
ScalarField tdf_to_scalar(const TdfField& f);
VectorField tdf_to_vector(const TdfField& f);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

CsvTable energies_csv(const TrajectoryRecord& traj);
CsvTable jump_log_csv(const TrajectoryRecord& traj);
CsvTable modulus_curve_csv(const std::vector<std::pair<double, double>>& curve);
CsvTable optimization_trace_csv(const OptimizationTrace& trace);
CsvTable regularity_csv(const RegularityTable& table);
CsvTable refinement_csv(const std::vector<RefinementRow>& rows);

nlohmann::json report_json(const OperatorReport& report);
nlohmann::json reports_json(const std::vector<OperatorReport>& reports);
nlohmann::json energy_report_json(const EnergyReport& report);
nlohmann::json martingale_report_json(const MartingaleReport& report);
nlohmann::json regularity_table_json(const RegularityTable& table);
nlohmann::json tightness_report_json(const TightnessReport& report);
nlohmann::json optimization_trace_json(const OptimizationTrace& trace);

}  // namespace tidal
