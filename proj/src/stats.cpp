#include "dpcore/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpcore/kernels.hpp"

namespace dpcore {

DomainStats compute_stats(const FeatureBatch& batch) {
    if (batch.rows() == 0 || batch.cols() == 0)
        throw std::invalid_argument("compute_stats: empty batch");
    DomainStats s;
    kernels::column_moments(batch, s.mean, s.stddev);
    for (auto& sd : s.stddev) sd = std::max(sd, kStdFloor);
    return s;
}

double stats_distance(const DomainStats& a, const DomainStats& b) {
    if (a.dim() != b.dim() || a.stddev.size() != b.stddev.size())
        throw std::invalid_argument("stats_distance: dimension mismatch");
    double mu2 = 0.0, sd2 = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) {
        const double dm = a.mean[k] - b.mean[k];
        const double ds = a.stddev[k] - b.stddev[k];
        mu2 += dm * dm;
        sd2 += ds * ds;
    }
    return std::sqrt(mu2) + std::sqrt(sd2);
}

std::vector<double> softmax_weights(const std::vector<double>& distances, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("softmax_weights: tau must be positive");
    if (distances.empty()) throw std::invalid_argument("softmax_weights: empty distances");
    const double lo = *std::min_element(distances.begin(), distances.end());
    std::vector<double> w(distances.size());
    double total = 0.0;
    for (std::size_t j = 0; j < distances.size(); ++j) {
        w[j] = std::exp(-(distances[j] - lo) / tau);
        total += w[j];
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace dpcore
