#pragma once

#include <cstddef>
#include <vector>

namespace hqmom {

// Discrete relative L2 error: sqrt(sum (pred-mc)^2 / sum mc^2).
// Throws DomainError when the reference series is identically zero.
double l2_error(const std::vector<double>& pred, const std::vector<double>& mc);

// Percent improvement of the L2 error; negative when the ML error is worse.
double improvement_q(double eps_qbmm, double eps_ml);

// Ratio of medians of the two error sets (even-count median = mean of the
// central pair).
double median_ratio_c(std::vector<double> errors_ml, std::vector<double> errors_qbmm);

// Right-open bins, final bin closed; values outside the edges are dropped.
std::vector<std::size_t> histogram(const std::vector<double>& values,
                                   const std::vector<double>& edges);

// Default edges for improvement histograms: n uniform bins over [lo, 100].
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

}  // namespace hqmom
