#include "hqmom/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "hqmom/errors.hpp"

namespace hqmom {

std::vector<BubbleState> init_ensemble(const EnsembleConfig& cfg, Rng& rng) {
    if (cfg.n_bubbles < 2) throw ContractViolation("init_ensemble: n_bubbles must be >= 2");
    std::vector<BubbleState> states(cfg.n_bubbles);
    for (auto& s : states) {
        do {
            s.radius = rng.normal(1.0, cfg.sigma_r);
        } while (!(s.radius > 0.1));
        s.velocity = rng.normal(0.0, cfg.sigma_rdot);
    }
    return states;
}

namespace {

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += data[k];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double ipow(double x, int n) {
    if (n < 0) return 1.0 / ipow(x, -n);
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

}  // namespace

double estimate_moment(const std::vector<BubbleState>& states, double i, int j) {
    const bool strict = i < 0.0 || i != std::floor(i);
    std::vector<double> terms(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
        const double r = states[k].radius;
        if (strict && !(r > 0.0))
            throw DomainError("estimate_moment: R = " + std::to_string(r) +
                              " with exponent i = " + std::to_string(i));
        double rp;
        if (i == std::floor(i) && std::abs(i) < 64.0)
            rp = ipow(r, static_cast<int>(i));
        else
            rp = std::exp(i * std::log(r));
        terms[k] = rp * ipow(states[k].velocity, j);
    }
    return pairwise_sum(terms.data(), terms.size()) / static_cast<double>(states.size());
}

std::vector<double> grid_derivative(const std::vector<double>& series, double dt) {
    const std::size_t n = series.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) {
        if (n == 2) d[0] = d[1] = (series[1] - series[0]) / dt;
        return d;
    }
    d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (series[k + 1] - series[k - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / (2.0 * dt);
    return d;
}

unsigned worker_threads() {
    if (const char* env = std::getenv("HQMOM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned nthreads = std::min<std::size_t>(worker_threads(), n);
    if (nthreads <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t k = t; k < n; k += nthreads) fn(k);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

TrajectoryRecord run_ensemble(const EnsembleConfig& cfg, const ForcingSignal& signal) {
    Rng rng(cfg.seed);
    const std::vector<BubbleState> initial = init_ensemble(cfg, rng);

    std::vector<BubbleTrajectory> trajectories(initial.size());
    parallel_for(initial.size(), [&](std::size_t k) {
        try {
            trajectories[k] =
                rk3_adaptive(initial[k], signal, cfg.t_end, cfg.dt_out, cfg.params, cfg.steppers);
        } catch (const IntegrationError& e) {
            throw IntegrationError("bubble " + std::to_string(k) + ": " + e.what());
        }
    });

    const std::size_t n_t = trajectories.front().times.size();
    TrajectoryRecord rec;
    rec.times = trajectories.front().times;
    rec.moments.resize(n_t);
    rec.target_moments.resize(n_t);
    rec.cp.resize(n_t);
    rec.forcing_seed = signal.seed;

    const double g = cfg.params.gamma;
    std::vector<std::vector<BubbleState>> slices(n_t, std::vector<BubbleState>(initial.size()));
    for (std::size_t i = 0; i < n_t; ++i)
        for (std::size_t k = 0; k < initial.size(); ++k) slices[i][k] = trajectories[k].states[i];
    trajectories.clear();

    parallel_for(n_t, [&](std::size_t i) {
        const auto& st = slices[i];
        MomentSet m;
        m.mu10 = estimate_moment(st, 1, 0);
        m.mu01 = estimate_moment(st, 0, 1);
        m.mu20 = estimate_moment(st, 2, 0);
        m.mu11 = estimate_moment(st, 1, 1);
        m.mu02 = estimate_moment(st, 0, 2);
        rec.moments[i] = m;
        rec.target_moments[i] = {estimate_moment(st, 3, 0), estimate_moment(st, 2, 1),
                                 estimate_moment(st, 3, 2),
                                 estimate_moment(st, 3.0 * (1.0 - g), 0)};
        rec.cp[i] = eval_cp(signal, rec.times[i]);
    });

    // Finite-difference rates of the five carried moments, per RP time:
    // the grid is in natural periods, so one grid step is dt_out * T0.
    const double dt_rp = cfg.dt_out * cfg.params.natural_period();
    rec.moment_rates.resize(n_t);
    for (int c = 0; c < 5; ++c) {
        std::vector<double> series(n_t);
        for (std::size_t i = 0; i < n_t; ++i) series[i] = rec.moments[i].as_array()[c];
        const std::vector<double> d = grid_derivative(series, dt_rp);
        for (std::size_t i = 0; i < n_t; ++i) rec.moment_rates[i][c] = d[i];
    }
    return rec;
}

DatasetManifest plan_dataset(std::size_t count_total, std::size_t count_train,
                             std::uint64_t master_seed) {
    if (count_train >= count_total)
        throw ContractViolation("plan_dataset: count_train must be < count_total");
    DatasetManifest man;
    man.master_seed = master_seed;
    man.forcing_seeds.resize(count_total);
    for (std::size_t i = 0; i < count_total; ++i)
        man.forcing_seeds[i] = Rng::derive_seed(master_seed, i);

    std::vector<std::size_t> order(count_total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(Rng::derive_seed(master_seed, 0x5A17ULL));
    for (std::size_t i = count_total; i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    man.train_indices.assign(order.begin(), order.begin() + count_train);
    man.test_indices.assign(order.begin() + count_train, order.end());
    std::sort(man.train_indices.begin(), man.train_indices.end());
    std::sort(man.test_indices.begin(), man.test_indices.end());
    return man;
}

}  // namespace hqmom
