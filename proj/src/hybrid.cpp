#include "hqmom/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "hqmom/errors.hpp"

namespace hqmom {

MomentSet gaussian_initial_moments(double sigma_r, double sigma_rdot) {
    MomentSet m;
    m.mu10 = 1.0;
    m.mu01 = 0.0;
    m.mu20 = 1.0 + sigma_r * sigma_r;
    m.mu11 = 0.0;
    m.mu02 = sigma_rdot * sigma_rdot;
    return m;
}

namespace {

using Moments = std::array<double, 5>;

struct StepContext {
    const ForcingSignal* signal;
    const IntegratorConfig* cfg;
    const std::vector<double>* corrections;  // held fixed over the macro-interval
    bool clamp;                              // realizability recovery engaged
};

// A correction can push a weighted node to xi1 <= 0, where the closure's
// negative powers are undefined; recovery drops the correction and falls
// back to the baseline quadrature for the evaluation.
bool corrected_nodes_valid(const Quadrature& q) {
    for (std::size_t k = 0; k < q.size(); ++k)
        if (q.weights[k] != 0.0 && !(q.xi1[k] > 0.0)) return false;
    return true;
}

Moments rhs(const Moments& y, double t, const StepContext& sc) {
    const Quadrature q0 =
        chyqmom4_invert(MomentSet::from_array(y), sc.cfg->n_nodes, sc.clamp);
    Quadrature q = hybrid_quadrature(q0, *sc.corrections);
    if (!corrected_nodes_valid(q)) q = q0;
    // Rates are per RP time; t runs in natural periods, hence the scaling.
    std::array<double, 5> d =
        transport_rhs(q, eval_cp(*sc.signal, t), sc.cfg->params, sc.cfg->exponents);
    const double scale = sc.cfg->params.natural_period();
    for (double& v : d) v *= scale;
    return d;
}

Moments rk4(const Moments& y, double t, double h, const StepContext& sc) {
    return rk4_fixed_step(y, t, h, [&](const Moments& s, double ts) { return rhs(s, ts, sc); });
}

// Projects a state that drifted outside the realizable set back onto its
// boundary: floors the R-variance and caps the correlation so the conditional
// velocity variance stays nonnegative. Mirrors the clamped inversion, so the
// repaired state is exactly the moment set of the clamped quadrature.
bool repair_realizability(Moments& y) {
    bool changed = false;
    double var_r = y[2] - y[0] * y[0];
    if (var_r <= 0.0) {
        var_r = 1e-12;
        y[2] = y[0] * y[0] + var_r;
        changed = true;
    }
    const double sigma_r = std::sqrt(var_r);
    double alpha = (y[3] - y[0] * y[1]) / sigma_r;
    if (y[4] - alpha * alpha - y[1] * y[1] < 0.0) {
        const double a2 = std::max(y[4] - y[1] * y[1] - 1e-12, 0.0);
        alpha = std::copysign(std::min(std::abs(alpha), std::sqrt(a2)), alpha);
        y[3] = y[0] * y[1] + alpha * sigma_r;
        changed = true;
    }
    return changed;
}

}  // namespace

HybridRun hybrid_run(const MomentSet& initial, const ForcingSignal& signal,
                     const ClosureModel* model, const IntegratorConfig& cfg) {
    if (!(cfg.tau_tol > 0.0)) throw ContractViolation("hybrid_run: tau_tol must be positive");
    if (!(cfg.t_end > 0.0) || !(cfg.nn_grid_dt > 0.0))
        throw ContractViolation("hybrid_run: time span and closure grid must be positive");
    {
        const double r = cfg.dt_max / cfg.nn_grid_dt;
        if (std::abs(r - std::round(r)) > 1e-9 || r < 1.0)
            throw ContractViolation("hybrid_run: dt_max must be a multiple of nn_grid_dt");
    }
    const std::size_t n_nodes = model ? static_cast<std::size_t>(model->n_nodes) : cfg.n_nodes;
    if (model && cfg.n_nodes != n_nodes)
        throw ContractViolation("hybrid_run: model node count does not match config");

    const double dt_g = cfg.nn_grid_dt;
    const std::size_t n_out = static_cast<std::size_t>(std::llround(cfg.t_end / dt_g)) + 1;
    // Stage times must land on the closure grid, so the macro-interval is
    // 2 * nn_grid_dt (capped by dt_max).
    const double macro = std::min(cfg.dt_max, 2.0 * dt_g);

    HybridRun run;
    run.mode = model ? RunMode::Hybrid : RunMode::Baseline;
    run.forcing_seed = signal.seed;
    run.times.reserve(n_out);
    run.moments.reserve(n_out);
    run.target_moments.reserve(n_out);
    run.quadratures.reserve(n_out);
    run.cp.reserve(n_out);

    LstmState state;
    if (model) state.reset(model->hidden);
    std::vector<double> corrections(3 * n_nodes, 0.0);

    // Feeds one grid sample to the closure, refreshes the corrections used by
    // subsequent macro-intervals, and records the grid point. Returns the
    // corrected quadrature projected back to the transported moments — the
    // state the next macro-step continues from, which keeps it the moment set
    // of an actual quadrature (realizable whenever the weights stay
    // nonnegative).
    const auto record_grid_point = [&](double t, const MomentSet& m) {
        const double cp = eval_cp(signal, t);
        if (model) {
            const std::vector<std::array<double, kClosureInputDim>> sample = {
                {m.mu10, m.mu01, m.mu20, m.mu11, m.mu02, cp}};
            corrections = closure_forward(*model, sample, state);
        }
        Quadrature q0;
        try {
            q0 = chyqmom4_invert(m, n_nodes);
        } catch (const NonRealizableError&) {
            q0 = chyqmom4_invert(m, n_nodes, true);
            ++run.realizability_clamps;
        }
        Quadrature q = hybrid_quadrature(q0, corrections);
        if (!corrected_nodes_valid(q)) {
            q = q0;
            ++run.realizability_clamps;
        }
        MomentSet proj;
        proj.mu10 = project_moment(q, 1, 0);
        proj.mu01 = project_moment(q, 0, 1);
        proj.mu20 = project_moment(q, 2, 0);
        proj.mu11 = project_moment(q, 1, 1);
        proj.mu02 = project_moment(q, 0, 2);
        if (std::getenv("HQMOM_NOPROJ")) proj = m;  // temporary experiment toggle
        run.times.push_back(t);
        run.moments.push_back(proj);
        run.quadratures.push_back(q);
        run.target_moments.push_back(target_moments(q, cfg.params.gamma));
        run.cp.push_back(cp);
        return proj;
    };

    MomentSet m = record_grid_point(0.0, initial);

    const std::size_t cells_per_macro = static_cast<std::size_t>(std::llround(macro / dt_g));
    std::size_t grid_index = 0;
    while (grid_index + 1 < n_out) {
        // Corrections are piecewise-constant over the macro-interval even
        // though the closure state advances at every grid point.
        const std::size_t g_end = std::min(grid_index + cells_per_macro, n_out - 1);
        const std::vector<double> held_corrections = corrections;
        StepContext sc{&signal, &cfg, &held_corrections, false};
        Moments y = m.as_array();
        std::size_t g = grid_index;
        double tt = static_cast<double>(g) * dt_g;
        // Once recovery engages it stays on for the rest of the interval:
        // near the realizability boundary every unclamped attempt fails, and
        // re-probing it each step grinds dt to nothing.
        bool clamp_interval = false;
        while (g < g_end) {
            // Steps target the next grid boundary so every grid point is hit
            // exactly; only from a boundary may a step span two cells (its
            // midpoint then lands on the grid).
            const bool from_boundary = std::abs(tt - static_cast<double>(g) * dt_g) < 1e-12;
            const std::size_t g_target = (from_boundary && g + 2 <= g_end) ? g + 2 : g + 1;
            const double target = static_cast<double>(g_target) * dt_g;
            double dt = target - tt;
            int halvings = 0;
            for (;;) {
                if (!clamp_interval && halvings >= 5) {
                    clamp_interval = true;
                    ++run.realizability_clamps;
                }
                sc.clamp = clamp_interval;
                bool realizable = true;
                Moments mu1{}, mid{}, mu2{};
                std::string reject;
                try {
                    mu1 = rk4(y, tt, dt, sc);
                    mid = rk4(y, tt, 0.5 * dt, sc);
                    mu2 = rk4(mid, tt + 0.5 * dt, 0.5 * dt, sc);
                } catch (const NonRealizableError& e) {
                    realizable = false;
                    reject = e.what();
                }
                if (realizable) {
                    double flag = 0.0;
                    for (int c = 0; c < 5; ++c)
                        flag = std::max(flag, std::abs(mu1[c] - mu2[c]) / cfg.tau_tol);
                    reject = "flag = " + std::to_string(flag);
                    if (flag < 2.0) {
                        // Accept the two-half-step solution; emit grid points.
                        if (repair_realizability(mu2)) ++run.realizability_clamps;
                        if (g_target == g + 2 && halvings == 0) {
                            ++g;
                            if (repair_realizability(mid)) ++run.realizability_clamps;
                            record_grid_point(static_cast<double>(g) * dt_g,
                                              MomentSet::from_array(mid));
                        }
                        tt += dt;
                        y = mu2;
                        const double next_boundary = static_cast<double>(g + 1) * dt_g;
                        if (std::abs(tt - next_boundary) < 1e-12) {
                            tt = next_boundary;
                            ++g;
                            const MomentSet proj =
                                record_grid_point(tt, MomentSet::from_array(mu2));
                            // The next macro-interval restarts from the
                            // projected state.
                            if (g == g_end) y = proj.as_array();
                        }
                        run.accepted_steps.push_back(dt);
                        break;
                    }
                }
                dt *= 0.5;
                ++halvings;
                if (dt < 1e-9)
                    throw IntegrationError("hybrid_run: step underflow at t = " +
                                           std::to_string(tt) + " (mu10 = " +
                                           std::to_string(y[0]) + "; last rejection: " +
                                           reject + ")");
            }
        }
        m = MomentSet::from_array(y);
        grid_index = g_end;
    }
    return run;
}

TrajectoryRecord to_record(const HybridRun& run) {
    TrajectoryRecord rec;
    rec.times = run.times;
    rec.moments = run.moments;
    rec.target_moments = run.target_moments;
    rec.cp = run.cp;
    rec.moment_rates.assign(run.size(), {});
    rec.forcing_seed = run.forcing_seed;
    return rec;
}

}  // namespace hqmom
