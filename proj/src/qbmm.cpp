#include "hqmom/qbmm.hpp"

#include <cmath>
#include <string>

#include "hqmom/errors.hpp"

namespace hqmom {

namespace {

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

bool needs_positive_base(double i) {
    return i < 0.0 || i != std::floor(i);
}

double xi1_pow(double xi1, double i) {
    if (i == 0.0) return 1.0;
    if (i == std::floor(i) && std::abs(i) < 64.0) return ipow(xi1, static_cast<int>(i));
    return std::exp(i * std::log(xi1));
}

}  // namespace

Quadrature chyqmom4_invert(const MomentSet& m, std::size_t n_nodes, bool clamp_discriminants) {
    if (n_nodes < 4) throw ContractViolation("chyqmom4_invert: n_nodes must be >= 4");

    double var_r = m.mu20 - m.mu10 * m.mu10;
    if (var_r <= 0.0) {
        if (!clamp_discriminants)
            throw NonRealizableError("chyqmom4_invert: mu20 - mu10^2 = " +
                                         std::to_string(var_r) + " is not positive",
                                     var_r);
        var_r = 1e-12;
    }
    const double sigma_r = std::sqrt(var_r);
    double alpha = (m.mu11 - m.mu10 * m.mu01) / sigma_r;
    double var_rd = m.mu02 - alpha * alpha - m.mu01 * m.mu01;
    if (var_rd < 0.0) {
        if (!clamp_discriminants)
            throw NonRealizableError(
                "chyqmom4_invert: conditional velocity variance mu02 - alpha^2 - mu01^2 = " +
                    std::to_string(var_rd) + " is negative",
                var_rd);
        // Flooring the discriminant alone would keep an alpha that violates
        // Cauchy-Schwarz (huge when sigma_r was clamped), producing explosive
        // nodes. Shrink |alpha| so the floored discriminant actually holds.
        var_rd = 1e-12;
        const double a2 = std::max(m.mu02 - m.mu01 * m.mu01 - var_rd, 0.0);
        alpha = std::copysign(std::min(std::abs(alpha), std::sqrt(a2)), alpha);
    }
    const double sigma_rd = std::sqrt(var_rd);

    Quadrature q;
    q.weights.assign(n_nodes, 0.0);
    q.xi1.assign(n_nodes, m.mu10);
    q.xi2.assign(n_nodes, m.mu01);
    for (int k = 0; k < 4; ++k) q.weights[k] = 0.25;
    q.xi1[0] = m.mu10 + sigma_r;
    q.xi1[1] = m.mu10 + sigma_r;
    q.xi1[2] = m.mu10 - sigma_r;
    q.xi1[3] = m.mu10 - sigma_r;
    q.xi2[0] = m.mu01 + alpha + sigma_rd;
    q.xi2[1] = m.mu01 + alpha - sigma_rd;
    q.xi2[2] = m.mu01 - alpha + sigma_rd;
    q.xi2[3] = m.mu01 - alpha - sigma_rd;
    return q;
}

double project_moment(const Quadrature& q, double i, int j) {
    const bool strict = needs_positive_base(i);
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weights[k] == 0.0) continue;
        if (strict && !(q.xi1[k] > 0.0))
            throw DomainError("project_moment: weighted node has xi1 = " +
                              std::to_string(q.xi1[k]) + " with exponent i = " +
                              std::to_string(i));
        sum += q.weights[k] * xi1_pow(q.xi1[k], i) * ipow(q.xi2[k], j);
    }
    return sum;
}

std::array<double, 4> target_moments(const Quadrature& q, double gamma) {
    return {project_moment(q, 3, 0), project_moment(q, 2, 1), project_moment(q, 3, 2),
            project_moment(q, 3.0 * (1.0 - gamma), 0)};
}

std::array<double, 5> transport_rhs(const Quadrature& q, double cp, const PhysParams& params,
                                       TransportExponents mode) {
    const double g = mode == TransportExponents::Generic ? 3.0 * params.gamma : 3.0;
    const double re = params.reynolds;
    std::array<double, 5> d;
    d[0] = project_moment(q, 0, 1);
    d[1] = -1.5 * project_moment(q, -1, 2) - (4.0 / re) * project_moment(q, -2, 1) +
           project_moment(q, -g - 1.0, 0) - cp * project_moment(q, -1, 0);
    d[2] = 2.0 * project_moment(q, 1, 1);
    d[3] = -0.5 * project_moment(q, 0, 2) - (4.0 / re) * project_moment(q, -1, 1) +
           project_moment(q, -g, 0) - cp;
    d[4] = -3.0 * project_moment(q, -1, 3) - (8.0 / re) * project_moment(q, -2, 2) +
           2.0 * project_moment(q, -g - 1.0, 1) - 2.0 * cp * project_moment(q, -1, 1);
    return d;
}



}  // namespace hqmom
