#pragma once

#include <functional>
#include <vector>

namespace dpcore {

// Central differences, one coordinate at a time.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + step;
        const double hi = f(x);
        x[i] = x0 - step;
        const double lo = f(x);
        x[i] = x0;
        g[i] = (hi - lo) / (2.0 * step);
    }
    return g;
}

}  // namespace dpcore
