#include "hqmom/forcing.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "hqmom/errors.hpp"

namespace hqmom {

void rescale_amplitudes(std::array<double, kForcingComponents>& amplitudes,
                        AmplitudeRescale mode) {
    double sum = 0.0;
    for (const double a : amplitudes) sum += a;
    double scale = 1.0;
    if (mode == AmplitudeRescale::Normalize) {
        scale = sum > 0.0 ? 3.0 / (5.0 * sum) : 1.0;
    } else if (sum > 3.0 / 5.0) {
        scale = 3.0 / (5.0 * sum);
    }
    for (double& a : amplitudes) a *= scale;
}

ForcingSignal sample_forcing(Rng& rng, AmplitudeRescale mode) {
    ForcingSignal sig;
    std::array<double, kForcingComponents> amplitudes;
    for (auto& a : amplitudes) a = rng.uniform01();
    rescale_amplitudes(amplitudes, mode);
    for (int i = 0; i < kForcingComponents; ++i) sig.components[i].amplitude = amplitudes[i];
    for (auto& c : sig.components) c.frequency = rng.uniform(0.1, 0.2);
    for (auto& c : sig.components) c.phase = rng.uniform(0.0, 2.0 * Rng::pi());
    return sig;
}

ForcingSignal sample_forcing(std::uint64_t seed, AmplitudeRescale mode) {
    Rng rng(seed);
    ForcingSignal sig = sample_forcing(rng, mode);
    sig.seed = seed;
    return sig;
}

double eval_cp(const ForcingSignal& signal, double t) {
    double cp = 1.0;
    for (const auto& c : signal.components)
        cp += c.amplitude * std::sin(2.0 * Rng::pi() * c.frequency * t + c.phase);
    return cp;
}

double amplitude_sum(const ForcingSignal& signal) {
    double sum = 0.0;
    for (const auto& c : signal.components) sum += c.amplitude;
    return sum;
}

double nucleation_threshold(const ForcingSignal& signal, double horizon) {
    if (!(horizon > 0.0)) throw DomainError("nucleation_threshold: horizon must be positive");
    // Coarse scan, then a fine scan around the coarse minimum.
    const double coarse = 1e-3;
    double t_min = 0.0;
    double cp_min = eval_cp(signal, 0.0);
    for (double t = coarse; t <= horizon; t += coarse) {
        const double cp = eval_cp(signal, t);
        if (cp < cp_min) {
            cp_min = cp;
            t_min = t;
        }
    }
    const double lo = std::max(0.0, t_min - coarse);
    const double hi = std::min(horizon, t_min + coarse);
    for (double t = lo; t <= hi; t += 1e-6) cp_min = std::min(cp_min, eval_cp(signal, t));
    return -(cp_min - 1.0);
}

std::string forcing_set_to_json(const std::vector<ForcingSignal>& signals) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : signals) {
        nlohmann::json amp = nlohmann::json::array();
        nlohmann::json freq = nlohmann::json::array();
        nlohmann::json phase = nlohmann::json::array();
        for (const auto& c : s.components) {
            amp.push_back(c.amplitude);
            freq.push_back(c.frequency);
            phase.push_back(c.phase);
        }
        arr.push_back({{"amplitudes", amp},
                       {"frequencies", freq},
                       {"phases", phase},
                       {"seed", s.seed}});
    }
    return arr.dump(2);
}

std::vector<ForcingSignal> forcing_set_from_json(const std::string& json_text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("forcing set: invalid JSON: ") + e.what());
    }
    if (!arr.is_array()) throw SchemaError("forcing set: expected a JSON array");
    std::vector<ForcingSignal> out;
    out.reserve(arr.size());
    for (const auto& item : arr) {
        if (!item.contains("amplitudes") || !item.contains("frequencies") ||
            !item.contains("phases"))
            throw SchemaError("forcing set: entry missing amplitudes/frequencies/phases");
        const auto& amp = item["amplitudes"];
        const auto& freq = item["frequencies"];
        const auto& phase = item["phases"];
        if (amp.size() != kForcingComponents || freq.size() != kForcingComponents ||
            phase.size() != kForcingComponents)
            throw SchemaError("forcing set: expected exactly 6 components per signal");
        ForcingSignal s;
        for (int i = 0; i < kForcingComponents; ++i) {
            s.components[i].amplitude = amp[i].get<double>();
            s.components[i].frequency = freq[i].get<double>();
            s.components[i].phase = phase[i].get<double>();
        }
        s.seed = item.value("seed", std::uint64_t{0});
        out.push_back(s);
    }
    return out;
}

}  // namespace hqmom
