#include "tidecore/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tidal {

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    double out = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw IoError("cannot parse '" + text + "' as a double");
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const std::vector<double>& row : table.rows) {
        if (row.size() != table.header.size())
            throw IoError("csv row width mismatch while writing " + path);
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv: " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(parse_double(cell));
        if (row.size() != table.header.size())
            throw IoError("csv row width mismatch while reading " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ofstream& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

void write_tdf_impl(const std::string& path, std::uint32_t g1, std::uint32_t g2,
                    std::uint32_t comps, const std::vector<const ScalarField*>& fields) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write("TDF1", 4);
    put_u32(out, g1);
    put_u32(out, g2);
    put_u32(out, comps);
    for (std::uint32_t i1 = 0; i1 < g1; ++i1)
        for (std::uint32_t i2 = 0; i2 < g2; ++i2)
            for (std::uint32_t c = 0; c < comps; ++c)
                put_f64(out, fields[c]->at(static_cast<int>(i1), static_cast<int>(i2)));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_tdf(const std::string& path, const ScalarField& field) {
    write_tdf_impl(path, static_cast<std::uint32_t>(field.n1),
                   static_cast<std::uint32_t>(field.n2), 1, {&field});
}

void write_tdf(const std::string& path, const VectorField& field) {
    write_tdf_impl(path, static_cast<std::uint32_t>(field.c1.n1),
                   static_cast<std::uint32_t>(field.c1.n2), 2, {&field.c1, &field.c2});
}

TdfField read_tdf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "TDF1", 4) != 0)
        throw IoError("not a TDF1 file: " + path);
    TdfField f;
    f.grid_x1 = get_u32(in);
    f.grid_x2 = get_u32(in);
    f.components = get_u32(in);
    const std::size_t n =
        static_cast<std::size_t>(f.grid_x1) * f.grid_x2 * f.components;
    f.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.data[i] = get_f64(in);
    if (!in) throw IoError("truncated TDF1 file: " + path);
    return f;
}

ScalarField tdf_to_scalar(const TdfField& f) {
    if (f.components != 1) throw IoError("TDF1 field is not scalar");
    ScalarField out(static_cast<int>(f.grid_x1), static_cast<int>(f.grid_x2));
    out.v = f.data;
    return out;
}

VectorField tdf_to_vector(const TdfField& f) {
    if (f.components != 2) throw IoError("TDF1 field is not a 2-vector");
    VectorField out(static_cast<int>(f.grid_x1), static_cast<int>(f.grid_x2));
    for (std::uint32_t i1 = 0; i1 < f.grid_x1; ++i1)
        for (std::uint32_t i2 = 0; i2 < f.grid_x2; ++i2) {
            const std::size_t base =
                (static_cast<std::size_t>(i1) * f.grid_x2 + i2) * 2;
            out.c1.at(static_cast<int>(i1), static_cast<int>(i2)) = f.data[base];
            out.c2.at(static_cast<int>(i1), static_cast<int>(i2)) = f.data[base + 1];
        }
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

CsvTable energies_csv(const TrajectoryRecord& traj) {
    CsvTable t;
    t.header = {"time",  "u_l2_sq",       "u_h10_sq",    "z_l2_sq", "u_lp",
                "z_h1_sq", "u_h2_sq", "wiener_channel", "jump_channel"};
    for (const EnergySample& e : traj.energies)
        t.rows.push_back({e.t, e.u_l2_sq, e.u_h10_sq, e.z_l2_sq, e.u_lp, e.z_h1_sq, e.u_h2_sq,
                          e.wiener_channel, e.jump_channel});
    return t;
}

CsvTable jump_log_csv(const TrajectoryRecord& traj) {
    CsvTable t;
    t.header = {"time", "count"};
    for (std::size_t m = 0; m < traj.jump_counts.size(); ++m)
        t.rows.push_back({traj.config.dt * static_cast<double>(m + 1),
                          static_cast<double>(traj.jump_counts[m])});
    return t;
}

CsvTable modulus_curve_csv(const std::vector<std::pair<double, double>>& curve) {
    CsvTable t;
    t.header = {"delta", "modulus"};
    for (const auto& [delta, modulus] : curve) t.rows.push_back({delta, modulus});
    return t;
}

CsvTable optimization_trace_csv(const OptimizationTrace& trace) {
    CsvTable t;
    t.header = {"iteration", "j_value", "stderr", "evaluations"};
    for (std::size_t i = 0; i < trace.iterates.size(); ++i)
        t.rows.push_back({static_cast<double>(i), trace.iterates[i].j_value,
                          trace.iterates[i].stderr_mean,
                          static_cast<double>(trace.iterates[i].evaluations_used)});
    return t;
}

CsvTable regularity_csv(const RegularityTable& table) {
    CsvTable t;
    t.header = {"threshold", "horizon", "probability", "degenerate"};
    for (const RegularityCell& c : table.cells)
        t.rows.push_back({c.threshold, c.horizon, c.probability, c.degenerate ? 1.0 : 0.0});
    return t;
}

CsvTable refinement_csv(const std::vector<RefinementRow>& rows) {
    CsvTable t;
    t.header = {"modes_a", "modes_b", "dt_a", "dt_b", "distance"};
    for (const RefinementRow& r : rows)
        t.rows.push_back({static_cast<double>(r.modes_a), static_cast<double>(r.modes_b), r.dt_a,
                          r.dt_b, r.distance});
    return t;
}

nlohmann::json report_json(const OperatorReport& r) {
    return {{"name", r.name},     {"lhs", r.lhs},
            {"rhs", r.rhs},       {"satisfied", r.satisfied},
            {"margin", r.margin}, {"tolerance", r.tolerance}};
}

nlohmann::json reports_json(const std::vector<OperatorReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const OperatorReport& r : reports) arr.push_back(report_json(r));
    return arr;
}

nlohmann::json energy_report_json(const EnergyReport& r) {
    return {{"ensemble_size", r.ensemble_size},
            {"lhs_sup", r.lhs_sup},
            {"lhs_dissipation", r.lhs_dissipation},
            {"gronwall_bound", r.gronwall_bound},
            {"gronwall_log_bound", r.gronwall_log_bound},
            {"constants", r.constants},
            {"satisfied", r.satisfied}};
}

nlohmann::json martingale_report_json(const MartingaleReport& r) {
    nlohmann::json channels = nlohmann::json::array();
    for (const ChannelStat& s : r.channels)
        channels.push_back({{"name", s.name},
                            {"mean", s.mean},
                            {"stderr", s.stderr_mean},
                            {"count", s.count},
                            {"satisfied", s.satisfied}});
    return {{"channels", channels}, {"satisfied", r.satisfied}};
}

nlohmann::json regularity_table_json(const RegularityTable& t) {
    nlohmann::json cells = nlohmann::json::array();
    for (const RegularityCell& c : t.cells)
        cells.push_back({{"threshold", c.threshold},
                         {"horizon", c.horizon},
                         {"probability", c.probability},
                         {"degenerate", c.degenerate}});
    return {{"cells", cells},
            {"thresholds", t.thresholds},
            {"horizons", t.horizons},
            {"ensemble", t.ensemble},
            {"smallest_horizon_max_probability", t.smallest_horizon_max_probability},
            {"probability_limit", t.probability_limit},
            {"monotone_in_horizon", t.monotone_in_horizon},
            {"satisfied", t.satisfied}};
}

nlohmann::json tightness_report_json(const TightnessReport& t) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [delta, modulus] : t.modulus_curve)
        curve.push_back({{"delta", delta}, {"modulus", modulus}});
    return {{"sup_l2", t.sup_l2},
            {"integral_h10", t.integral_h10},
            {"modulus_curve", curve},
            {"aldous", {{"alpha", t.aldous_alpha},
                        {"beta_hat", t.aldous_beta_hat},
                        {"c_hat", t.aldous_c_hat}}},
            {"ensemble", t.ensemble}};
}

nlohmann::json optimization_trace_json(const OptimizationTrace& t) {
    nlohmann::json iterates = nlohmann::json::array();
    for (const TraceEntry& e : t.iterates)
        iterates.push_back({{"control", e.control},
                            {"j_value", e.j_value},
                            {"stderr", e.stderr_mean},
                            {"evaluations_used", e.evaluations_used},
                            {"note", e.note}});
    return {{"iterates", iterates},
            {"best_control", t.best_control},
            {"best_j", t.best_j},
            {"best_stderr", t.best_stderr},
            {"evaluations", t.evaluations},
            {"budget_exhausted", t.budget_exhausted}};
}

}  // namespace tidal
