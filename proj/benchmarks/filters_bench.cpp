#include "mtt/kalman.hpp"
#include "mtt/particle_filter.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace mtt;

void BM_KfUpdate(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const GaussianState prior{Vec::Ones(n), Mat::Identity(n, n)};
    const Mat H = Mat::Identity(2, n);
    const Mat R = Mat::Identity(2, 2);
    const Vec z = Vec::Constant(2, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(kf_update(prior, H, R, z));
}
BENCHMARK(BM_KfUpdate)->Arg(2)->Arg(4)->Arg(8);

void BM_PfStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Mat one = Mat::Identity(1, 1);
    const LinearGaussianModel model{one, Mat(), one, one, one};
    const auto like = [&](const Vec& x, const Vec& z) { return std::exp(log_pdf(z, x, model.R)); };
    Rng rng(1);
    auto set = PointParticleSet::sample({Vec::Zero(1), one}, n, rng);
    const Vec z = Vec::Constant(1, 0.3);
    for (auto _ : state) {
        auto r = pf_step(set, model, like, z, rng);
        benchmark::DoNotOptimize(r.ess);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_PfStep)->Arg(1000)->Arg(10000);

}  // namespace
