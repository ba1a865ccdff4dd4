#include "hqmom/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hqmom/errors.hpp"

namespace hqmom {

double rp_accel(const BubbleState& state, double cp, const PhysParams& params) {
    const double r = state.radius;
    const double v = state.velocity;
    if (!(r > 0.0)) throw DomainError("rp_accel: non-positive radius R = " + std::to_string(r));
    const double gas = std::pow(r, -3.0 * params.gamma);
    const double drive = params.convention == PressureConvention::MinusCp ? cp : 1.0 / cp;
    return (gas - drive - 1.5 * v * v - (4.0 / params.reynolds) * (v / r)) / r;
}

std::array<double, 2> rp_rhs(const BubbleState& state, double cp, const PhysParams& params) {
    const double scale = params.natural_period();
    return {scale * state.velocity, scale * rp_accel(state, cp, params)};
}

namespace {

using Vec2 = std::array<double, 2>;

Vec2 rhs_at(const Vec2& y, double t, const ForcingSignal& signal, const PhysParams& params) {
    return rp_rhs(BubbleState{y[0], y[1]}, eval_cp(signal, t), params);
}

// Cubic Hermite interpolation over one accepted step.
Vec2 hermite(const Vec2& y0, const Vec2& f0, const Vec2& y1, const Vec2& f1, double h,
             double theta) {
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + theta;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    Vec2 out;
    for (int i = 0; i < 2; ++i)
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    return out;
}

}  // namespace

BubbleTrajectory rk3_adaptive(const BubbleState& initial, const ForcingSignal& signal,
                              double t_end, double dt_out, const PhysParams& params,
                              const SteppersConfig& cfg) {
    if (!(t_end > 0.0) || !(dt_out > 0.0)) throw DomainError("rk3_adaptive: empty time span");
    if (!(cfg.rel_tol > 0.0) || !(cfg.dt_min > 0.0) || cfg.dt_min > cfg.dt_max)
        throw DomainError("rk3_adaptive: invalid steppers config");

    const std::size_t n_out = static_cast<std::size_t>(std::llround(t_end / dt_out)) + 1;
    BubbleTrajectory traj;
    traj.times.resize(n_out);
    traj.states.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) traj.times[i] = static_cast<double>(i) * dt_out;

    double t = 0.0;
    Vec2 y{initial.radius, initial.velocity};
    Vec2 f = rhs_at(y, t, signal, params);  // FSAL
    double h = std::min(cfg.dt_max, dt_out);
    std::size_t next_out = 0;
    traj.states[next_out++] = BubbleState{y[0], y[1]};

    const double atol = 1e-14;  // absolute floor so states near zero do not stall the controller

    while (next_out < n_out) {
        h = std::min(h, t_end - t + 1e-12);
        // Bogacki-Shampine stages; k1 = f carried over (FSAL).
        Vec2 tmp;
        for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.5 * h * f[i];
        const Vec2 k2 = rhs_at(tmp, t + 0.5 * h, signal, params);
        for (int i = 0; i < 2; ++i) tmp[i] = y[i] + 0.75 * h * k2[i];
        const Vec2 k3 = rhs_at(tmp, t + 0.75 * h, signal, params);
        Vec2 y3;
        for (int i = 0; i < 2; ++i)
            y3[i] = y[i] + h * (2.0 * f[i] + 3.0 * k2[i] + 4.0 * k3[i]) / 9.0;
        const Vec2 k4 = rhs_at(y3, t + h, signal, params);
        double err_norm = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double y2 =
                y[i] + h * (7.0 * f[i] + 6.0 * k2[i] + 8.0 * k3[i] + 3.0 * k4[i]) / 24.0;
            const double scale = atol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y3[i]));
            err_norm = std::max(err_norm, std::abs(y3[i] - y2) / scale);
        }

        if (err_norm <= 1.0) {
            // Emit any output points inside this step.
            while (next_out < n_out && traj.times[next_out] <= t + h + 1e-12) {
                const double theta = std::clamp((traj.times[next_out] - t) / h, 0.0, 1.0);
                const Vec2 yi = hermite(y, f, y3, k4, h, theta);
                traj.states[next_out] = BubbleState{yi[0], yi[1]};
                ++next_out;
            }
            t += h;
            y = y3;
            f = k4;
        } else if (h <= cfg.dt_min * (1.0 + 1e-12)) {
            throw IntegrationError("rk3_adaptive: tolerance unmet at dt_min, t = " +
                                   std::to_string(t) + ", R = " + std::to_string(y[0]) +
                                   ", Rdot = " + std::to_string(y[1]));
        }
        const double factor =
            err_norm > 0.0 ? 0.9 * std::pow(1.0 / err_norm, 1.0 / 3.0) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::clamp(h, cfg.dt_min, cfg.dt_max);
    }
    return traj;
}

}  // namespace hqmom
