#pragma once

#include "mtt/gaussian.hpp"
#include "mtt/kalman.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mtt {

/// Weighted point-mass approximation of a single-target posterior.
struct PointParticleSet {
    std::vector<Vec> states;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return states.size(); }

    /// N equally weighted copies of draws from `init`.
    static PointParticleSet sample(const GaussianState& init, std::size_t n, Rng& rng);

    /// Weighted mean and covariance of the cloud.
    [[nodiscard]] GaussianState moments() const;
};

enum class ResamplingScheme { multinomial, systematic };

struct PfOptions {
    ResamplingScheme resampling = ResamplingScheme::multinomial;
    /// Resample when ESS < fraction * N.
    double resample_fraction = 0.5;
};

/// likelihood(state, z) -> p(z | state), up to a constant.
using Likelihood = std::function<double(const Vec&, const Vec&)>;

struct PfStepResult {
    PointParticleSet set;
    /// Weighted moments after the likelihood update, before any resampling.
    GaussianState estimate;
    /// ESS after the likelihood update, before any resampling.
    double ess = 0.0;
    bool resampled = false;
    /// Every likelihood was zero; weights were reset to uniform.
    bool degenerate_likelihood = false;
};

/// Likelihood weighting, normalization and ESS-triggered resampling of an
/// already propagated set.
[[nodiscard]] PfStepResult pf_update(const PointParticleSet& set, const Likelihood& likelihood, const Vec& z, Rng& rng,
                                     const PfOptions& options = {});

/// One SIR step: propagate through the transition prior, weight by the
/// likelihood, normalize, and resample when the ESS falls below threshold.
[[nodiscard]] PfStepResult pf_step(const PointParticleSet& set, const LinearGaussianModel& model,
                                   const Likelihood& likelihood, const Vec& z, Rng& rng,
                                   const PfOptions& options = {});

/// 1 / sum(w^2) for normalized weights. Throws std::invalid_argument when the
/// weights do not sum to 1 within 1e-6.
[[nodiscard]] double effective_sample_size(std::span<const double> weights);

[[nodiscard]] PointParticleSet resample_multinomial(const PointParticleSet& set, Rng& rng);
[[nodiscard]] PointParticleSet resample_systematic(const PointParticleSet& set, Rng& rng);

/// Throws unless the set is non-empty, lengths agree, and weights are
/// non-negative and sum to 1 within 1e-9.
void validate(const PointParticleSet& set);

}  // namespace mtt
