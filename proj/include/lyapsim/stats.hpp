#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lyapsim {

/// One row of a parameter sweep: the swept value and the final-fidelity
/// statistics over the trials run at that value.
struct SweepRow {
    double parameter;
    double mean_fidelity;
    double std_fidelity;  // sample standard deviation, 0 for a single trial
    std::size_t trials;

    bool operator==(const SweepRow&) const = default;
};

double mean(std::span<const double> xs);

/// Sample standard deviation (n − 1 denominator); 0 when fewer than 2 values.
double sample_std(std::span<const double> xs);

SweepRow summarize(double parameter, std::span<const double> final_fidelities);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> xs);

/// Spearman rank correlation: Pearson correlation of the average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

}  // namespace lyapsim
