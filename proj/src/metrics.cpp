#include "hqmom/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hqmom/errors.hpp"

namespace hqmom {

double l2_error(const std::vector<double>& pred, const std::vector<double>& mc) {
    if (pred.size() != mc.size() || pred.empty())
        throw ContractViolation("l2_error: series lengths differ or are empty");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - mc[i];
        num += d * d;
        den += mc[i] * mc[i];
    }
    if (den == 0.0) throw DomainError("l2_error: reference series is identically zero");
    return std::sqrt(num / den);
}

double improvement_q(double eps_qbmm, double eps_ml) {
    if (!(eps_qbmm > 0.0)) throw DomainError("improvement_q: baseline error must be positive");
    return 100.0 * (eps_qbmm - eps_ml) / eps_qbmm;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double median_ratio_c(std::vector<double> errors_ml, std::vector<double> errors_qbmm) {
    if (errors_ml.empty() || errors_qbmm.empty())
        throw ContractViolation("median_ratio_c: empty error set");
    const double med_qbmm = median(std::move(errors_qbmm));
    if (med_qbmm == 0.0) throw DomainError("median_ratio_c: baseline median is zero");
    return median(std::move(errors_ml)) / med_qbmm;
}

std::vector<std::size_t> histogram(const std::vector<double>& values,
                                   const std::vector<double>& edges) {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
        throw ContractViolation("histogram: need at least two ascending edges");
    std::vector<std::size_t> counts(edges.size() - 1, 0);
    for (const double v : values) {
        if (v < edges.front() || v > edges.back()) continue;
        if (v == edges.back()) {
            ++counts.back();
            continue;
        }
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        counts[static_cast<std::size_t>(it - edges.begin()) - 1]++;
    }
    return counts;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    if (!(hi > lo) || bins == 0) throw ContractViolation("uniform_edges: invalid range");
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    return edges;
}

}  // namespace hqmom
