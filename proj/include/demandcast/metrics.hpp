#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace demandcast {

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    /// Absent when the actuals have zero variance (R^2 undefined).
    std::optional<double> r2;
    std::size_t n = 0;
};

/// MAE, RMSE and R^2 = 1 - SS_res / SS_tot with SS_tot about the actuals' mean.
Metrics score(std::span<const double> actual, std::span<const double> predicted);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins over [min, max]; bins are half-open [lo, hi) except the
/// last, which is closed. A zero-width range puts everything in the first bin.
std::vector<HistogramBin> error_histogram(std::span<const double> residuals, int n_bins);

} // namespace demandcast
