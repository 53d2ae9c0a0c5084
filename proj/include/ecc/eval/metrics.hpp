// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ecc/channel/scenario.hpp"

namespace ecc::eval {

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based).
double nearest_rank(std::span<const double> values, double percentile);

std::vector<double> position_errors(std::span<const channel::Vec3> truth, std::span<const channel::Vec3> estimate);

struct ErrorSummary {
    double mean = 0.0;
    double e90 = 0.0;
};

ErrorSummary summarize(std::span<const double> errors);

// Empirical CDF on `points` uniform grid values from 0 to max(errors).
std::vector<std::pair<double, double>> error_cdf(std::span<const double> errors, std::size_t points);

} // namespace ecc::eval
