#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "hqmom/forcing.hpp"

namespace hqmom {

// Phase-space state in Rayleigh-Plesset units: radius in units of the
// equilibrium radius, wall velocity in RP velocity units.
struct BubbleState {
    double radius = 1.0;
    double velocity = 0.0;
};

// Which pressure driving term enters the RP equation. MinusCp uses
// R^(-3g) - Cp and is the default, matching the moment transport
// equations; InverseCp uses R^(-3g) - 1/Cp as the RP equation prints it.
enum class PressureConvention { MinusCp, InverseCp };

struct PhysParams {
    double reynolds = 1e3;
    double gamma = 1.4;
    PressureConvention convention = PressureConvention::MinusCp;

    // Natural angular frequency in RP time, and one natural period. All
    // public time arguments are in natural-period units; right-hand sides
    // are scaled by natural_period() so one time unit is one oscillation.
    double natural_omega() const { return std::sqrt(3.0 * gamma); }
    double natural_period() const { return 2.0 * Rng::pi() / natural_omega(); }
};

struct SteppersConfig {
    double rel_tol = 1e-7;
    double dt_min = 1e-6;
    double dt_max = 0.1;
};

// RP wall acceleration in RP units (no time-unit scaling):
//   Rdd = [ R^(-3g) - p(Cp) - (3/2) Rd^2 - (4/Re)(Rd/R) ] / R.
double rp_accel(const BubbleState& state, double cp, const PhysParams& params);

// (dR/dt, dRdot/dt) per natural-period time unit.
std::array<double, 2> rp_rhs(const BubbleState& state, double cp, const PhysParams& params);

// Classical RK4 step for a fixed-size state vector.
template <std::size_t K, typename Rhs>
std::array<double, K> rk4_fixed_step(const std::array<double, K>& y, double t, double h,
                                     Rhs&& rhs) {
    const std::array<double, K> k1 = rhs(y, t);
    std::array<double, K> tmp;
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    const std::array<double, K> k2 = rhs(tmp, t + 0.5 * h);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    const std::array<double, K> k3 = rhs(tmp, t + 0.5 * h);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = y[i] + h * k3[i];
    const std::array<double, K> k4 = rhs(tmp, t + h);
    std::array<double, K> out;
    for (std::size_t i = 0; i < K; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct BubbleTrajectory {
    std::vector<double> times;  // uniform grid, natural-period units
    std::vector<BubbleState> states;
};

// Bogacki-Shampine 3(2) embedded pair with a standard step controller
// (safety 0.9, growth clamp [0.2, 5]). Output is interpolated onto the
// uniform grid t = 0, dt_out, ..., t_end with cubic Hermite polynomials.
// Throws IntegrationError if the tolerance cannot be met at dt_min.
BubbleTrajectory rk3_adaptive(const BubbleState& initial, const ForcingSignal& signal,
                              double t_end, double dt_out, const PhysParams& params,
                              const SteppersConfig& cfg);

}  // namespace hqmom
