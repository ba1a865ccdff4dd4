#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hqmom/closure.hpp"
#include "hqmom/qbmm.hpp"

namespace hqmom {

struct IntegratorConfig {
    double tau_tol = 1e-6;     // step-doubling tolerance, not a paper value
    double dt_max = 0.02;      // must be a multiple of nn_grid_dt
    double nn_grid_dt = 0.01;  // closure prediction grid
    double t_end = 50.0;
    std::size_t n_nodes = 4;
    PhysParams params{};
    TransportExponents exponents = TransportExponents::Generic;
};

enum class RunMode { Baseline, Hybrid };

struct HybridRun {
    RunMode mode = RunMode::Baseline;
    std::vector<double> times;  // uniform nn_grid_dt grid
    std::vector<MomentSet> moments;
    std::vector<std::array<double, 4>> target_moments;
    std::vector<Quadrature> quadratures;  // corrected quadrature at each grid point
    std::vector<double> cp;
    std::vector<double> accepted_steps;
    std::size_t realizability_clamps = 0;  // nonzero flags a degraded run
    std::uint64_t forcing_seed = 0;

    std::size_t size() const { return times.size(); }
};

// Moments of a Gaussian initial dispersion centered at equilibrium.
MomentSet gaussian_initial_moments(double sigma_r, double sigma_rdot);

// Evolves the five transported moments over [0, t_end] with RK4 and
// step-doubling error control. Closure corrections (when a model is given)
// are evaluated on the nn_grid_dt grid from the running moment/pressure
// history and held fixed across each macro-interval of 2 * nn_grid_dt, so
// every RK4 stage time lies on the closure grid. A null model runs the
// baseline CHyQMOM closure through the identical code path.
HybridRun hybrid_run(const MomentSet& initial, const ForcingSignal& signal,
                     const ClosureModel* model, const IntegratorConfig& cfg);

// Repackages a run as a TrajectoryRecord (moment rates left empty), e.g.
// as the input side of a TrainingSeries.
TrajectoryRecord to_record(const HybridRun& run);

}  // namespace hqmom
