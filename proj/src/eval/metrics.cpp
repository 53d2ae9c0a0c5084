// SPDX-License-Identifier: Apache-2.0
#include "ecc/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecc/channel/channel.hpp"

namespace ecc::eval {

double nearest_rank(std::span<const double> values, double percentile)
{
    if (values.empty()) throw std::invalid_argument("nearest_rank: empty sample");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw std::invalid_argument("nearest_rank: percentile outside (0, 100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    // Small tolerance so that e.g. 90% of 10 samples gives rank 9, not 10.
    const double exact = percentile / 100.0 * static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::vector<double> position_errors(std::span<const channel::Vec3> truth, std::span<const channel::Vec3> estimate)
{
    if (truth.size() != estimate.size()) throw std::invalid_argument("position_errors: size mismatch");
    std::vector<double> e(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) e[i] = channel::distance(truth[i], estimate[i]);
    return e;
}

ErrorSummary summarize(std::span<const double> errors)
{
    if (errors.empty()) throw std::invalid_argument("summarize: empty error set");
    ErrorSummary s;
    s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
    s.e90 = nearest_rank(errors, 90.0);
    return s;
}

std::vector<std::pair<double, double>> error_cdf(std::span<const double> errors, std::size_t points)
{
    if (errors.empty()) throw std::invalid_argument("error_cdf: empty error set");
    if (points < 2) throw std::invalid_argument("error_cdf: need at least two grid points");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    const double top = sorted.back();
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double x = i + 1 == points ? top : top * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
        cdf.emplace_back(x, static_cast<double>(count) / static_cast<double>(sorted.size()));
    }
    return cdf;
}

} // namespace ecc::eval
