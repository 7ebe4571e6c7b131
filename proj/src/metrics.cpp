#include "demandcast/metrics.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <cmath>

namespace demandcast {

Metrics score(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw Error(ErrorCode::InvalidArgument, "actual and predicted lengths differ");
    if (actual.empty()) throw Error(ErrorCode::InvalidArgument, "cannot score an empty forecast");
    const double n = static_cast<double>(actual.size());
    double abs_sum = 0.0, sq_sum = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        mean += actual[i];
    }
    mean /= n;
    double ss_tot = 0.0;
    for (double a : actual) ss_tot += (a - mean) * (a - mean);

    Metrics m;
    m.n = actual.size();
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (ss_tot > 0.0) m.r2 = 1.0 - sq_sum / ss_tot;
    return m;
}

std::vector<HistogramBin> error_histogram(std::span<const double> residuals, int n_bins) {
    if (n_bins < 1) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
    std::vector<HistogramBin> bins(static_cast<std::size_t>(n_bins));
    if (residuals.empty()) return bins;
    const auto [lo_it, hi_it] = std::minmax_element(residuals.begin(), residuals.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = (hi - lo) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
        bins[static_cast<std::size_t>(b)].lo = lo + b * width;
        bins[static_cast<std::size_t>(b)].hi = b + 1 == n_bins ? hi : lo + (b + 1) * width;
    }
    for (double r : residuals) {
        std::size_t b = 0;
        if (width > 0.0) {
            b = static_cast<std::size_t>(std::floor((r - lo) / width));
            b = std::min(b, bins.size() - 1);
            // Guard the floor against round-off at bin edges.
            while (b > 0 && r < bins[b].lo) --b;
            while (b + 1 < bins.size() && r >= bins[b + 1].lo) ++b;
        }
        ++bins[b].count;
    }
    return bins;
}

} // namespace demandcast
