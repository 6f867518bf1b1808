#include "mtt/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mtt {

PointParticleSet PointParticleSet::sample(const GaussianState& init, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("PointParticleSet::sample: need at least one particle");
    const GaussianSampler sampler(init.mean, init.cov);
    PointParticleSet out;
    out.states.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.states.push_back(sampler(rng));
    out.weights.assign(n, 1.0 / static_cast<double>(n));
    return out;
}

GaussianState PointParticleSet::moments() const {
    const auto n = states.front().size();
    Vec mean = Vec::Zero(n);
    for (std::size_t i = 0; i < size(); ++i) mean += weights[i] * states[i];
    Mat cov = Mat::Zero(n, n);
    for (std::size_t i = 0; i < size(); ++i) {
        const Vec d = states[i] - mean;
        cov += weights[i] * d * d.transpose();
    }
    return {mean, symmetrize(cov)};
}

void validate(const PointParticleSet& set) {
    if (set.states.empty()) throw std::invalid_argument("particle set is empty");
    if (set.states.size() != set.weights.size()) {
        throw std::invalid_argument("particle set: states and weights differ in length");
    }
    double sum = 0.0;
    for (double w : set.weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("particle set: negative or NaN weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("particle set: weights do not sum to 1");
}

double effective_sample_size(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("effective_sample_size: no weights");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double w : weights) {
        sum += w;
        sum_sq += w * w;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("effective_sample_size: weights are not normalized");
    // Uniform weights (e.g. right after resampling) give exactly N.
    if (std::all_of(weights.begin(), weights.end(), [&](double w) { return w == weights.front(); })) {
        return static_cast<double>(weights.size());
    }
    const double ess = 1.0 / sum_sq;
    return std::clamp(ess, 1.0, static_cast<double>(weights.size()));
}

namespace {

PointParticleSet copy_indices(const PointParticleSet& set, const std::vector<std::size_t>& picks) {
    PointParticleSet out;
    out.states.reserve(picks.size());
    for (auto i : picks) out.states.push_back(set.states[i]);
    out.weights.assign(picks.size(), 1.0 / static_cast<double>(picks.size()));
    return out;
}

std::vector<double> cumulative(const std::vector<double>& w) {
    std::vector<double> cdf(w.size());
    std::partial_sum(w.begin(), w.end(), cdf.begin());
    cdf.back() = std::max(cdf.back(), 1.0);
    return cdf;
}

}  // namespace

PointParticleSet resample_multinomial(const PointParticleSet& set, Rng& rng) {
    validate(set);
    const auto cdf = cumulative(set.weights);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::size_t> picks(set.size());
    for (auto& pick : picks) {
        const double u = uniform(rng);
        // upper_bound skips zero-weight entries whose cdf equals u.
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        pick = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), set.size() - 1);
    }
    return copy_indices(set, picks);
}

PointParticleSet resample_systematic(const PointParticleSet& set, Rng& rng) {
    validate(set);
    const auto cdf = cumulative(set.weights);
    const auto n = set.size();
    std::uniform_real_distribution<double> uniform(0.0, 1.0 / static_cast<double>(n));
    const double u0 = uniform(rng);
    std::vector<std::size_t> picks(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
        while (j + 1 < n && cdf[j] <= u) ++j;
        picks[i] = j;
    }
    return copy_indices(set, picks);
}

PfStepResult pf_update(const PointParticleSet& set, const Likelihood& likelihood, const Vec& z, Rng& rng,
                       const PfOptions& options) {
    validate(set);
    PfStepResult out;
    out.set = set;

    double total = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double l = likelihood(set.states[i], z);
        out.set.weights[i] = set.weights[i] * (std::isfinite(l) && l > 0.0 ? l : 0.0);
        total += out.set.weights[i];
    }

    if (total > 0.0 && std::isfinite(total)) {
        for (auto& w : out.set.weights) w /= total;
    } else {
        out.degenerate_likelihood = true;
        std::fill(out.set.weights.begin(), out.set.weights.end(), 1.0 / static_cast<double>(set.size()));
    }

    out.estimate = out.set.moments();
    out.ess = effective_sample_size(out.set.weights);
    if (out.ess < options.resample_fraction * static_cast<double>(set.size())) {
        out.set = options.resampling == ResamplingScheme::multinomial ? resample_multinomial(out.set, rng)
                                                                       : resample_systematic(out.set, rng);
        out.resampled = true;
    }
    return out;
}

PfStepResult pf_step(const PointParticleSet& set, const LinearGaussianModel& model, const Likelihood& likelihood,
                     const Vec& z, Rng& rng, const PfOptions& options) {
    validate(set);
    if (set.states.front().size() != model.state_dim()) throw DimensionError("pf_step: state dimension mismatch");

    const GaussianSampler noise(model.Q);
    PointParticleSet propagated;
    propagated.states.reserve(set.size());
    for (const auto& x : set.states) propagated.states.push_back(noise.sample_around(model.F * x, rng));
    propagated.weights = set.weights;
    return pf_update(propagated, likelihood, z, rng, options);
}

}  // namespace mtt
