#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hqmom/bubble.hpp"
#include "hqmom/qbmm.hpp"

namespace hqmom {

struct EnsembleConfig {
    std::size_t n_bubbles = 1000;
    double sigma_r = 0.05;      // initial radius std, not a paper value
    double sigma_rdot = 0.05;   // initial velocity std, not a paper value
    std::uint64_t seed = 0;
    double t_end = 50.0;        // natural periods
    double dt_out = 0.01;
    PhysParams params{};
    SteppersConfig steppers{1e-7, 1e-6, 0.1};
};

// Uniform-grid time series of moments, their finite-difference rates,
// target moments, and the forcing, for one forcing realization.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<MomentSet> moments;
    std::vector<std::array<double, 5>> moment_rates;
    std::vector<std::array<double, 4>> target_moments;  // mu30, mu21, mu32, mu_{3(1-g),0}
    std::vector<double> cp;
    std::uint64_t forcing_seed = 0;
    std::string config_digest;

    std::size_t size() const { return times.size(); }
};

// R ~ Normal(1, sigma_r^2) resampled until R > 0.1, then
// Rdot ~ Normal(0, sigma_rdot^2), per bubble in order.
std::vector<BubbleState> init_ensemble(const EnsembleConfig& cfg, Rng& rng);

// Equal-weight empirical moment (1/n) sum R_k^i Rdot_k^j, pairwise
// summation for thread-count-independent reproducibility.
double estimate_moment(const std::vector<BubbleState>& states, double i, int j);

TrajectoryRecord run_ensemble(const EnsembleConfig& cfg, const ForcingSignal& signal);

// Second-order central differences, one-sided second-order at endpoints.
std::vector<double> grid_derivative(const std::vector<double>& series, double dt);

struct DatasetManifest {
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> forcing_seeds;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

// Samples count_total forcings from the master seed, splits train/test by
// a seeded shuffle. Ensemble runs are left to the caller so scales stay
// configurable.
DatasetManifest plan_dataset(std::size_t count_total, std::size_t count_train,
                             std::uint64_t master_seed);

// Number of worker threads for parallel ensemble/trajectory work; honors
// the HQMOM_THREADS environment variable.
unsigned worker_threads();

// Deterministic parallel map: fn(index) for index in [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hqmom
