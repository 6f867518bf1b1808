#include "mtt/cli/log_io.hpp"

#include <fstream>
#include <stdexcept>

namespace mtt::cli {

namespace {

using nlohmann::json;

json vec_json(const Vec& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vec vec_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
    return rows;
}

Mat mat_from(const json& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    Mat m(n, n == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size()));
    for (Eigen::Index r = 0; r < n; ++r) m.row(r) = vec_from(j.at(static_cast<std::size_t>(r))).transpose();
    return m;
}

json measurement_json(const Measurement& m) {
    if (const auto* mean = std::get_if<MeanMeasurement>(&m)) return {{"type", "mean"}, {"z", vec_json(mean->z)}};
    json returns = json::array();
    for (const auto& r : std::get<GridMeasurement>(m).returns) returns.push_back({r.cell_index, r.value});
    return {{"type", "grid"}, {"returns", returns}};
}

Measurement measurement_from(const json& j) {
    if (j.at("type") == "mean") return MeanMeasurement{vec_from(j.at("z"))};
    GridMeasurement g;
    for (const auto& r : j.at("returns")) g.returns.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
    return g;
}

}  // namespace

nlohmann::json to_json(const TrackingLog& log) {
    json steps = json::array();
    for (const auto& rec : log.steps) {
        json truth = json::array();
        for (const auto& x : rec.truth) truth.push_back(vec_json(x));
        json particles = json::array();
        for (const auto& p : rec.estimate) {
            particles.push_back({{"weight", p.weight}, {"mean", vec_json(p.state.mean)}, {"cov", mat_json(p.state.cov)}});
        }
        steps.push_back({{"step", rec.step},
                         {"truth", truth},
                         {"measurement", measurement_json(rec.measurement)},
                         {"cardinality_estimate", rec.cardinality_estimate},
                         {"degenerate", rec.degenerate},
                         {"particles", particles}});
    }
    return {{"n_targets", log.n_targets}, {"steps", steps}};
}

TrackingLog tracking_log_from_json(const nlohmann::json& j) {
    TrackingLog log;
    log.n_targets = j.at("n_targets").get<int>();
    for (const auto& s : j.at("steps")) {
        StepRecord rec;
        rec.step = s.at("step").get<int>();
        for (const auto& x : s.at("truth")) rec.truth.push_back(vec_from(x));
        rec.measurement = measurement_from(s.at("measurement"));
        rec.cardinality_estimate = s.at("cardinality_estimate").get<double>();
        rec.degenerate = s.at("degenerate").get<bool>();
        for (const auto& p : s.at("particles")) {
            rec.estimate.push_back({p.at("weight").get<double>(), {vec_from(p.at("mean")), mat_from(p.at("cov"))}});
        }
        log.steps.push_back(std::move(rec));
    }
    return log;
}

Truth truth_of(const TrackingLog& log) {
    Truth truth;
    truth.reserve(log.steps.size());
    for (const auto& rec : log.steps) truth.push_back(rec.truth);
    return truth;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return nlohmann::json::parse(in);
}

}  // namespace mtt::cli
