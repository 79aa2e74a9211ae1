#pragma once

#include <vector>

#include "dpcore/matrix.hpp"

namespace dpcore {

// Lower bound applied to per-dimension standard deviations so distances and
// the clamped coreset update stay well-defined on zero-variance batches.
inline constexpr double kStdFloor = 1e-8;

// A feature batch is an n x d_f matrix, one row per sample.
using FeatureBatch = Matrix;

// Per-dimension mean and standard deviation of a feature batch; the domain
// fingerprint everything else keys on.
struct DomainStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t dim() const { return mean.size(); }
    bool operator==(const DomainStats&) const = default;
};

// Column means and population standard deviations (divide by n), with the
// stddev floored at kStdFloor. Throws on an empty batch.
DomainStats compute_stats(const FeatureBatch& batch);

// || mu_a - mu_b ||_2 + || sigma_a - sigma_b ||_2.
double stats_distance(const DomainStats& a, const DomainStats& b);

// w_j = exp(-d_j / tau) / sum_l exp(-d_l / tau), max-subtracted for stability.
std::vector<double> softmax_weights(const std::vector<double>& distances, double tau);

}  // namespace dpcore
