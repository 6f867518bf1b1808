#include "mtt/gpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mtt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Vec position_of(const GaussianState& g, const Mat& position_projection) {
    return position_projection * g.mean;
}

double active_sum(const std::vector<bool>& bits) {
    return static_cast<double>(std::count(bits.begin(), bits.end(), true));
}

void check_combination(const std::vector<bool>& bits, std::span<const GaussianParticle> fov_particles) {
    if (bits.size() != fov_particles.size()) {
        throw DimensionError("combination has " + std::to_string(bits.size()) + " bits for " +
                             std::to_string(fov_particles.size()) + " particles");
    }
}

}  // namespace

bool FovRegion::contains(double x, double y) const {
    if (is_full()) return true;
    return std::any_of(rects.begin(), rects.end(), [&](const Rect& r) { return r.contains_closed(x, y); });
}

int ExistenceCombination::active_count() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), true));
}

void GpfConfig::validate() const {
    const auto n = F.rows();
    if (F.cols() != n || Q.rows() != n || Q.cols() != n) throw DimensionError("gpf: F and Q must be n x n");
    if (position_projection.cols() != n || position_projection.rows() != 2) {
        throw DimensionError("gpf: position projection must be 2 x n");
    }
    if (!is_symmetric_psd(Q)) throw std::invalid_argument("gpf: Q is not symmetric PSD");
    if (measurement_projection.size() != 0) {
        if (measurement_projection.cols() != n) throw DimensionError("gpf: measurement projection must have n columns");
        if (R.rows() != measurement_projection.rows() || R.cols() != measurement_projection.rows()) {
            throw DimensionError("gpf: R must match the measurement dimension");
        }
        if (!is_symmetric_psd(R)) throw std::invalid_argument("gpf: R is not symmetric PSD");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("gpf: epsilon must be in (0, 1)");
    if (!(d_thresh > 0.0)) throw std::invalid_argument("gpf: d_thresh must be positive");
    if (!(w_prune >= 0.0 && w_prune < 1.0)) throw std::invalid_argument("gpf: w_prune must be in [0, 1)");
    if (!(w_birth > 0.0 && w_birth <= 1.0)) throw std::invalid_argument("gpf: w_birth must be in (0, 1]");
    if (!(clutter_density >= 0.0)) throw std::invalid_argument("gpf: clutter density must be non-negative");
    if (n_max == 0) throw std::invalid_argument("gpf: n_max must be positive");
    if (grid) grid->validate();
}

GpfParticleSet gpf_predict(const GpfParticleSet& set, const Mat& F, const Mat& Q) {
    GpfParticleSet out;
    out.step = set.step + 1;
    out.particles.reserve(set.size());
    for (const auto& p : set.particles) {
        out.particles.push_back({p.weight, kf_predict(p.state, F, Q)});
    }
    return out;
}

FovPartition select_fov_particles(const GpfParticleSet& set, const FovRegion& fov, const Mat& position_projection) {
    FovPartition out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        bool inside = fov.is_full();
        if (!inside) {
            const Vec pos = position_of(set.particles[i].state, position_projection);
            inside = fov.contains(pos(0), pos(1));
        }
        (inside ? out.in_fov : out.out_of_fov).push_back(i);
    }
    return out;
}

std::vector<ExistenceCombination> enumerate_combinations(std::span<const GaussianParticle> fov_particles,
                                                         double epsilon, std::size_t s_max) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("enumerate_combinations: epsilon must be in (0, 1)");
    const std::size_t s = fov_particles.size();
    if (s > s_max) {
        throw CombinatorialBlowupError(std::to_string(s) + " particles in the field of view exceeds the enumeration limit of " +
                                       std::to_string(s_max) + "; raise epsilon or shrink the field of view");
    }

    std::vector<ExistenceCombination> out;
    std::vector<bool> bits(s, false);
    // Remaining factors are <= 1, so a partial product <= epsilon never recovers.
    auto visit = [&](auto&& self, std::size_t i, double partial) -> void {
        if (partial <= epsilon) return;
        if (i == s) {
            ExistenceCombination c;
            c.bits = bits;
            c.prior = partial;
            c.updated_states.resize(s);
            out.push_back(std::move(c));
            return;
        }
        const double w = std::clamp(fov_particles[i].weight, 0.0, 1.0);
        bits[i] = true;
        self(self, i + 1, partial * w);
        bits[i] = false;
        self(self, i + 1, partial * (1.0 - w));
    };
    visit(visit, 0, 1.0);
    return out;
}

KalmanUpdate conditional_kf_update(std::size_t j, const std::vector<bool>& bits,
                                   std::span<const GaussianParticle> fov_particles, const Vec& z, const Mat& R,
                                   const Mat& measurement_projection) {
    check_combination(bits, fov_particles);
    if (j >= bits.size() || !bits[j]) throw std::invalid_argument("conditional_kf_update: particle j is not active");
    const double s_e = active_sum(bits);
    if (s_e == 0.0) throw std::invalid_argument("conditional_kf_update: no active particles");

    const Mat& P = measurement_projection;
    const auto n = fov_particles[j].state.dim();
    if (P.cols() != n || P.rows() != z.size()) throw DimensionError("conditional_kf_update: projection mismatch");

    Vec others_mean = Vec::Zero(n);
    Mat others_cov = Mat::Zero(n, n);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i] || i == j) continue;
        others_mean += fov_particles[i].state.mean;
        others_cov += fov_particles[i].state.cov;
    }

    const Mat H = P / s_e;
    const Vec z_eff = z - P * others_mean / s_e;
    const Mat R_eff = symmetrize(P * others_cov * P.transpose() / (s_e * s_e) + R);
    return kf_update(fov_particles[j].state, H, R_eff, z_eff);
}

double combination_log_weight(const ExistenceCombination& combination, std::span<const GaussianParticle> fov_particles,
                              const Vec& z, const Mat& R, const Mat& measurement_projection, double clutter_density) {
    check_combination(combination.bits, fov_particles);
    const double log_prior = std::log(combination.prior);
    const double s_e = active_sum(combination.bits);
    if (s_e == 0.0) {
        return clutter_density > 0.0 ? log_prior + std::log(clutter_density) : kNegInf;
    }

    const Mat& P = measurement_projection;
    const auto n = P.cols();
    Vec mean_sum = Vec::Zero(n);
    Mat cov_sum = Mat::Zero(n, n);
    for (std::size_t i = 0; i < combination.bits.size(); ++i) {
        if (!combination.bits[i]) continue;
        mean_sum += fov_particles[i].state.mean;
        cov_sum += fov_particles[i].state.cov;
    }
    const Vec mu_c = P * mean_sum / s_e;
    const Mat sigma_c = symmetrize(P * cov_sum * P.transpose() / (s_e * s_e) + R);
    return log_prior + log_pdf(z, mu_c, sigma_c);
}

double combination_weight(const ExistenceCombination& combination, std::span<const GaussianParticle> fov_particles,
                          const Vec& z, const Mat& R, const Mat& measurement_projection, double clutter_density) {
    return std::exp(
        combination_log_weight(combination, fov_particles, z, R, measurement_projection, clutter_density));
}

bool normalize_combinations(std::vector<ExistenceCombination>& combinations) {
    double peak = kNegInf;
    for (const auto& c : combinations) peak = std::max(peak, c.log_weight);
    if (!std::isfinite(peak)) {
        for (auto& c : combinations) c.posterior_weight = 0.0;
        return false;
    }
    double total = 0.0;
    for (auto& c : combinations) {
        c.posterior_weight = std::exp(c.log_weight - peak);
        total += c.posterior_weight;
    }
    for (auto& c : combinations) c.posterior_weight /= total;
    return true;
}

std::vector<GaussianParticle> marginalize_existence(std::span<const ExistenceCombination> combinations,
                                                    std::span<const GaussianParticle> fov_particles) {
    if (combinations.empty()) throw std::invalid_argument("marginalize_existence: empty combination list");

    std::vector<GaussianParticle> out(fov_particles.begin(), fov_particles.end());
    std::vector<GaussianParticle> components;
    for (std::size_t i = 0; i < fov_particles.size(); ++i) {
        components.clear();
        bool ever_present = false;
        double existence = 0.0;
        for (const auto& c : combinations) {
            if (c.bits.size() != fov_particles.size()) throw DimensionError("marginalize_existence: bit count mismatch");
            if (!c.bits[i]) continue;
            ever_present = true;
            existence += c.posterior_weight;
            if (c.posterior_weight > 0.0) {
                const auto& updated = c.updated_states.at(i);
                components.push_back({c.posterior_weight, updated ? *updated : fov_particles[i].state});
            }
        }
        if (!ever_present) continue;

        out[i].weight = std::clamp(existence, 0.0, 1.0);
        if (!components.empty()) {
            out[i].state = moment_match_merge(components).state;
        }
    }
    return out;
}

namespace {

double merge_distance(const GaussianParticle& a, const GaussianParticle& b, const Mat& P) {
    const Vec d = P * (a.state.mean - b.state.mean);
    const Mat S = symmetrize(P * (a.state.cov + b.state.cov) * P.transpose());
    try {
        return robust_cholesky(S).matrixL().solve(d).squaredNorm();
    } catch (const NumericalSingularityError&) {
        return d.isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    }
}

}  // namespace

GpfParticleSet merge_close_particles(const GpfParticleSet& set, double d_thresh, const Mat& position_projection,
                                     MergeCovariance mode) {
    GpfParticleSet out = set;
    auto& ps = out.particles;
    const std::size_t n = ps.size();
    if (n < 2) return out;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n * n, inf);
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = merge_distance(ps[i], ps[j], position_projection);

    while (true) {
        double best = inf;
        std::size_t bi = 0;
        std::size_t bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (alive[j] && dist[i * n + j] < best) {
                    best = dist[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!(best < d_thresh)) break;

        const GaussianParticle pair[2] = {ps[bi], ps[bj]};
        if (pair[0].weight + pair[1].weight > 0.0) {
            ps[bi] = moment_match_merge(pair, mode);
        } else {
            ps[bi].state = moment_match_merge(std::vector<GaussianParticle>{{1.0, pair[0].state}, {1.0, pair[1].state}},
                                              mode)
                               .state;
            ps[bi].weight = 0.0;
        }
        alive[bj] = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (!alive[k] || k == bi) continue;
            const double d = merge_distance(ps[std::min(k, bi)], ps[std::max(k, bi)], position_projection);
            dist[std::min(k, bi) * n + std::max(k, bi)] = d;
        }
    }

    std::vector<GaussianParticle> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) kept.push_back(std::move(ps[i]));
    ps = std::move(kept);
    return out;
}

double estimate_cardinality(const GpfParticleSet& set) {
    double total = 0.0;
    for (const auto& p : set.particles) total += p.weight;
    return total;
}

GpfParticleSet birth_and_prune(const GpfParticleSet& set, std::span<const GaussianParticle> births, double w_prune,
                               std::size_t n_max) {
    GpfParticleSet out;
    out.step = set.step;
    out.particles.reserve(set.size() + births.size());
    auto keep = [&](const GaussianParticle& p) {
        if (!(p.weight < w_prune)) out.particles.push_back(p);
    };
    std::for_each(set.particles.begin(), set.particles.end(), keep);
    std::for_each(births.begin(), births.end(), keep);

    if (out.size() > n_max) {
        std::vector<std::size_t> order(out.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return out.particles[a].weight > out.particles[b].weight;
        });
        order.resize(n_max);
        std::sort(order.begin(), order.end());
        std::vector<GaussianParticle> kept;
        kept.reserve(n_max);
        for (auto i : order) kept.push_back(std::move(out.particles[i]));
        out.particles = std::move(kept);
    }
    return out;
}

GpfParticleSet grid_existence_update(const GpfParticleSet& set, std::span<const CellReturn> returns,
                                     const GridSensorModel& grid, const Mat& position_projection) {
    GpfParticleSet out = set;
    const double p_false = detection_prob(0, grid.p_d, grid.snr);
    const double p_hit = detection_prob(1, grid.p_d, grid.snr);

    std::vector<int> cell_of_particle(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec pos = position_of(out.particles[i].state, position_projection);
        cell_of_particle[i] = grid.cell_of(pos(0), pos(1));
    }

    for (const auto& r : returns) {
        (void)grid.cell(r.cell_index);  // bounds check
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (cell_of_particle[i] != r.cell_index) continue;
            // Outside the cell the two hypotheses predict the same return, so
            // only particles in the measured cell change.
            const double like_exists = r.value == 1 ? p_hit : 1.0 - p_hit;
            const double like_absent = r.value == 1 ? p_false : 1.0 - p_false;
            auto& w = out.particles[i].weight;
            const double num = w * like_exists;
            const double den = num + (1.0 - w) * like_absent;
            w = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : w;
        }
    }
    return out;
}

std::vector<GaussianParticle> grid_births(std::span<const CellReturn> returns, const GridSensorModel& grid,
                                          double w_birth) {
    std::vector<GaussianParticle> out;
    const double cw = grid.cell_width();
    const double ch = grid.cell_height();
    for (const auto& r : returns) {
        if (r.value != 1) continue;
        const Rect c = grid.cell(r.cell_index);
        GaussianState g{Vec::Zero(4), Mat::Zero(4, 4)};
        g.mean(kPosX) = 0.5 * (c.x_min + c.x_max);
        g.mean(kPosY) = 0.5 * (c.y_min + c.y_max);
        g.cov.diagonal() << cw * cw / 12.0, 1.0, ch * ch / 12.0, 1.0;
        out.push_back({w_birth, std::move(g)});
    }
    return out;
}

namespace {

GpfStepResult mean_sensor_update(const GpfParticleSet& predicted, const Vec& z, const GpfConfig& config) {
    if (config.measurement_projection.size() == 0) {
        throw std::invalid_argument("gpf: mean-sensor measurement but no measurement projection configured");
    }
    GpfStepResult out;
    out.set = predicted;

    const auto partition = select_fov_particles(predicted, config.fov, config.position_projection);
    std::vector<GaussianParticle> fov;
    fov.reserve(partition.in_fov.size());
    for (auto i : partition.in_fov) fov.push_back(predicted.particles[i]);

    auto combinations = enumerate_combinations(fov, config.epsilon, config.s_max);
    if (combinations.empty()) {
        out.degenerate = true;
        return out;
    }

    const Mat& P = config.measurement_projection;
    for (auto& c : combinations) {
        for (std::size_t j = 0; j < fov.size(); ++j) {
            if (c.bits[j]) c.updated_states[j] = conditional_kf_update(j, c.bits, fov, z, config.R, P).posterior;
        }
        c.log_weight = combination_log_weight(c, fov, z, config.R, P, config.clutter_density);
    }
    if (!normalize_combinations(combinations)) {
        out.degenerate = true;
        out.combinations = std::move(combinations);
        return out;
    }

    const auto updated = marginalize_existence(combinations, fov);
    for (std::size_t k = 0; k < partition.in_fov.size(); ++k) out.set.particles[partition.in_fov[k]] = updated[k];
    out.combinations = std::move(combinations);

    out.set = merge_close_particles(out.set, config.d_thresh, config.position_projection, config.merge_cov);
    out.set = birth_and_prune(out.set, {}, config.w_prune, config.n_max);
    return out;
}

GpfStepResult grid_sensor_update(const GpfParticleSet& predicted, const GridMeasurement& m, const GpfConfig& config) {
    if (!config.grid) throw std::invalid_argument("gpf: grid measurement but no grid sensor configured");
    if (config.F.rows() != 4) throw DimensionError("gpf: grid sensor births assume a 4-D (x, vx, y, vy) state");

    GpfStepResult out;
    out.set = grid_existence_update(predicted, m.returns, *config.grid, config.position_projection);
    out.set = merge_close_particles(out.set, config.d_thresh, config.position_projection, config.merge_cov);
    const auto births = grid_births(m.returns, *config.grid, config.w_birth);
    out.set = birth_and_prune(out.set, births, config.w_prune, config.n_max);
    return out;
}

}  // namespace

GpfStepResult gpf_update(const GpfParticleSet& predicted, const Measurement& measurement, const GpfConfig& config) {
    if (const auto* mean = std::get_if<MeanMeasurement>(&measurement)) {
        return mean_sensor_update(predicted, mean->z, config);
    }
    return grid_sensor_update(predicted, std::get<GridMeasurement>(measurement), config);
}

GpfStepResult gpf_step(const GpfParticleSet& set, const Measurement& measurement, const GpfConfig& config) {
    return gpf_update(gpf_predict(set, config.F, config.Q), measurement, config);
}

}  // namespace mtt
