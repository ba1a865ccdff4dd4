#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hqmom/rng.hpp"

namespace hqmom {

inline constexpr int kForcingComponents = 6;

// One Fourier component of the pressure ratio Cp(t). Frequencies are in
// cycles per natural bubble period, phases in radians.
struct ForcingComponent {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

// How the raw U[0,1] amplitude draws are rescaled. Cap multiplies every
// amplitude by min(1, 3/(5*sum)) so the sum never exceeds 3/5; Normalize
// always rescales the sum to exactly 3/5.
enum class AmplitudeRescale { Cap, Normalize };

struct ForcingSignal {
    std::array<ForcingComponent, kForcingComponents> components{};
    std::uint64_t seed = 0;
};

// Cap: a_i *= min(1, 3/(5*sum a_j)); Normalize: a_i *= 3/(5*sum a_j).
void rescale_amplitudes(std::array<double, kForcingComponents>& amplitudes,
                        AmplitudeRescale mode);

// Draw order: six amplitudes, six frequencies, six phases.
ForcingSignal sample_forcing(Rng& rng, AmplitudeRescale mode = AmplitudeRescale::Cap);

// Convenience: seeds a fresh Rng and records the seed on the signal.
ForcingSignal sample_forcing(std::uint64_t seed, AmplitudeRescale mode = AmplitudeRescale::Cap);

// Cp(t) = 1 + sum_i a_i sin(2 pi f_i t + phi_i), t in natural periods.
double eval_cp(const ForcingSignal& signal, double t);

double amplitude_sum(const ForcingSignal& signal);

// Cavitation margin -min_t (Cp(t) - 1) over [0, horizon], with the
// reference dynamic-pressure ratio taken as 1. Callers compare against
// the nucleation threshold sigma = 0.40.
double nucleation_threshold(const ForcingSignal& signal, double horizon);

// JSON array of {amplitudes[6], frequencies[6], phases[6], seed}.
std::string forcing_set_to_json(const std::vector<ForcingSignal>& signals);
std::vector<ForcingSignal> forcing_set_from_json(const std::string& json_text);

}  // namespace hqmom
