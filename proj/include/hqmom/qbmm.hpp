#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hqmom/bubble.hpp"

namespace hqmom {

// The five transported raw moments; mu00 is fixed at 1.
struct MomentSet {
    double mu10 = 1.0;
    double mu01 = 0.0;
    double mu20 = 1.0;
    double mu11 = 0.0;
    double mu02 = 0.0;

    std::array<double, 5> as_array() const { return {mu10, mu01, mu20, mu11, mu02}; }
    static MomentSet from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

// Weighted Dirac nodes in (R, Rdot) phase space.
struct Quadrature {
    std::vector<double> weights;
    std::vector<double> xi1;  // radius coordinate
    std::vector<double> xi2;  // velocity coordinate

    std::size_t size() const { return weights.size(); }
};

// Which exponents the transport right-hand side uses for the gas and
// viscous radius powers. Generic uses -3g-1, -3g, -3g-1 (consistent with
// the polytropic coefficient); PrintedGamma1 uses the fixed exponents
// -4, -3, -4, which coincide with Generic only at g = 1.
enum class TransportExponents { Generic, PrintedGamma1 };

// 4-node CHyQMOM inversion, padded with zero-weight nodes at
// (mu10, mu01) up to n_nodes. If clamp_discriminants is set, non-positive
// covariance discriminants are clamped to 1e-12 instead of throwing; this
// backs the hybrid integrator's recovery policy.
Quadrature chyqmom4_invert(const MomentSet& m, std::size_t n_nodes = 4,
                           bool clamp_discriminants = false);

// sum_k w_k xi1_k^i xi2_k^j. Zero-weight nodes are skipped. i may be any
// real; j is an integer power. Throws DomainError when a weighted node has
// xi1 <= 0 and i is negative or fractional.
double project_moment(const Quadrature& q, double i, int j);

// Target moments {mu30, mu21, mu32, mu_{3(1-gamma),0}}.
std::array<double, 4> target_moments(const Quadrature& q, double gamma);

// Quadrature-closed rates of the five transported moments, in RP time
// units. Integrators stepping on the natural-period grid multiply by
// PhysParams::natural_period() themselves, so rates stay directly
// comparable with ensemble moment_rates.
std::array<double, 5> transport_rhs(const Quadrature& q, double cp, const PhysParams& params,
                                    TransportExponents mode = TransportExponents::Generic);

}  // namespace hqmom
