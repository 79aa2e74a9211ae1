#include "dpcore/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dpcore::kernels {

namespace {

std::atomic<ExecMode> g_mode{
#ifdef _OPENMP
    ExecMode::OpenMP
#else
    ExecMode::Serial
#endif
};

void check_affine_shapes(const Matrix& x, const Matrix& w,
                         const std::vector<double>& shift) {
    if (w.cols() != x.cols())
        throw std::invalid_argument("affine_rows: W columns must match input dim");
    if (shift.size() != w.rows())
        throw std::invalid_argument("affine_rows: shift size must match output dim");
}

inline void affine_one_row(const Matrix& x, const Matrix& w,
                           const std::vector<double>& shift, Matrix& y,
                           std::size_t i) {
    const std::size_t d_in = x.cols(), d_out = w.rows();
    auto xi = x.row(i);
    auto yi = y.row(i);
    for (std::size_t k = 0; k < d_out; ++k) {
        double acc = shift[k];
        auto wk = w.row(k);
        for (std::size_t j = 0; j < d_in; ++j) acc += wk[j] * xi[j];
        yi[k] = acc;
    }
}

inline void moments_one_column(const Matrix& y, std::size_t k,
                               std::vector<double>& mean, std::vector<double>& stddev) {
    const std::size_t n = y.rows();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += y(i, k);
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = y(i, k) - mu;
        ss += d * d;
    }
    mean[k] = mu;
    stddev[k] = std::sqrt(ss / static_cast<double>(n));
}

inline void mlp_forward_one_row(const Matrix& x, const std::vector<double>& shift,
                                const Matrix& a, const std::vector<double>& a0,
                                const Matrix& b, const std::vector<double>& b0,
                                Matrix& h, Matrix& y, std::size_t i) {
    const std::size_t d_in = x.cols(), hidden = a.rows(), d_out = b.rows();
    auto xi = x.row(i);
    auto hi = h.row(i);
    for (std::size_t u = 0; u < hidden; ++u) {
        double acc = a0[u];
        auto au = a.row(u);
        for (std::size_t j = 0; j < d_in; ++j) acc += au[j] * (xi[j] + shift[j]);
        hi[u] = std::tanh(acc);
    }
    auto yi = y.row(i);
    for (std::size_t k = 0; k < d_out; ++k) {
        double acc = b0[k];
        auto bk = b.row(k);
        for (std::size_t u = 0; u < hidden; ++u) acc += bk[u] * hi[u];
        yi[k] = acc;
    }
}

inline void mlp_input_grad_one_row(const Matrix& g, const Matrix& h,
                                   const Matrix& a, const Matrix& b, Matrix& r,
                                   std::vector<double>& du, std::size_t i) {
    const std::size_t hidden = a.rows(), d_in = a.cols(), d_out = b.rows();
    auto gi = g.row(i);
    auto hi = h.row(i);
    for (std::size_t u = 0; u < hidden; ++u) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d_out; ++k) acc += b(k, u) * gi[k];
        du[u] = (1.0 - hi[u] * hi[u]) * acc;
    }
    auto ri = r.row(i);
    for (std::size_t j = 0; j < d_in; ++j) {
        double acc = 0.0;
        for (std::size_t u = 0; u < hidden; ++u) acc += a(u, j) * du[u];
        ri[j] = acc;
    }
}

}  // namespace

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }
void set_exec_mode(ExecMode mode) { g_mode.store(mode, std::memory_order_relaxed); }

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void affine_rows_serial(const Matrix& x, const Matrix& w,
                        const std::vector<double>& shift, Matrix& y) {
    check_affine_shapes(x, w, shift);
    y = Matrix(x.rows(), w.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) affine_one_row(x, w, shift, y, i);
}

void affine_rows_omp(const Matrix& x, const Matrix& w,
                     const std::vector<double>& shift, Matrix& y) {
    check_affine_shapes(x, w, shift);
    y = Matrix(x.rows(), w.rows());
    const std::int64_t n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        affine_one_row(x, w, shift, y, static_cast<std::size_t>(i));
}

void affine_rows(const Matrix& x, const Matrix& w,
                 const std::vector<double>& shift, Matrix& y) {
    if (exec_mode() == ExecMode::OpenMP)
        affine_rows_omp(x, w, shift, y);
    else
        affine_rows_serial(x, w, shift, y);
}

void column_moments_serial(const Matrix& y, std::vector<double>& mean,
                           std::vector<double>& stddev) {
    mean.assign(y.cols(), 0.0);
    stddev.assign(y.cols(), 0.0);
    for (std::size_t k = 0; k < y.cols(); ++k) moments_one_column(y, k, mean, stddev);
}

void column_moments_omp(const Matrix& y, std::vector<double>& mean,
                        std::vector<double>& stddev) {
    mean.assign(y.cols(), 0.0);
    stddev.assign(y.cols(), 0.0);
    const std::int64_t d = static_cast<std::int64_t>(y.cols());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < d; ++k)
        moments_one_column(y, static_cast<std::size_t>(k), mean, stddev);
}

void column_moments(const Matrix& y, std::vector<double>& mean,
                    std::vector<double>& stddev) {
    if (exec_mode() == ExecMode::OpenMP)
        column_moments_omp(y, mean, stddev);
    else
        column_moments_serial(y, mean, stddev);
}

void column_sums_serial(const Matrix& y, std::vector<double>& sums) {
    sums.assign(y.cols(), 0.0);
    for (std::size_t k = 0; k < y.cols(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i) acc += y(i, k);
        sums[k] = acc;
    }
}

void column_sums_omp(const Matrix& y, std::vector<double>& sums) {
    sums.assign(y.cols(), 0.0);
    const std::int64_t d = static_cast<std::int64_t>(y.cols());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < d; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < y.rows(); ++i) acc += y(i, static_cast<std::size_t>(k));
        sums[static_cast<std::size_t>(k)] = acc;
    }
}

void column_sums(const Matrix& y, std::vector<double>& sums) {
    if (exec_mode() == ExecMode::OpenMP)
        column_sums_omp(y, sums);
    else
        column_sums_serial(y, sums);
}

void mlp_forward_serial(const Matrix& x, const std::vector<double>& shift,
                        const Matrix& a, const std::vector<double>& a0,
                        const Matrix& b, const std::vector<double>& b0,
                        Matrix& h, Matrix& y) {
    h = Matrix(x.rows(), a.rows());
    y = Matrix(x.rows(), b.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        mlp_forward_one_row(x, shift, a, a0, b, b0, h, y, i);
}

void mlp_forward_omp(const Matrix& x, const std::vector<double>& shift,
                     const Matrix& a, const std::vector<double>& a0,
                     const Matrix& b, const std::vector<double>& b0,
                     Matrix& h, Matrix& y) {
    h = Matrix(x.rows(), a.rows());
    y = Matrix(x.rows(), b.rows());
    const std::int64_t n = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        mlp_forward_one_row(x, shift, a, a0, b, b0, h, y, static_cast<std::size_t>(i));
}

void mlp_forward(const Matrix& x, const std::vector<double>& shift,
                 const Matrix& a, const std::vector<double>& a0,
                 const Matrix& b, const std::vector<double>& b0,
                 Matrix& h, Matrix& y) {
    if (exec_mode() == ExecMode::OpenMP)
        mlp_forward_omp(x, shift, a, a0, b, b0, h, y);
    else
        mlp_forward_serial(x, shift, a, a0, b, b0, h, y);
}

void mlp_input_grad_rows_serial(const Matrix& g, const Matrix& h,
                                const Matrix& a, const Matrix& b, Matrix& r) {
    r = Matrix(g.rows(), a.cols());
    std::vector<double> du(a.rows());
    for (std::size_t i = 0; i < g.rows(); ++i)
        mlp_input_grad_one_row(g, h, a, b, r, du, i);
}

void mlp_input_grad_rows_omp(const Matrix& g, const Matrix& h,
                             const Matrix& a, const Matrix& b, Matrix& r) {
    r = Matrix(g.rows(), a.cols());
    const std::int64_t n = static_cast<std::int64_t>(g.rows());
#pragma omp parallel
    {
        std::vector<double> du(a.rows());
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            mlp_input_grad_one_row(g, h, a, b, r, du, static_cast<std::size_t>(i));
    }
}

void mlp_input_grad_rows(const Matrix& g, const Matrix& h,
                         const Matrix& a, const Matrix& b, Matrix& r) {
    if (exec_mode() == ExecMode::OpenMP)
        mlp_input_grad_rows_omp(g, h, a, b, r);
    else
        mlp_input_grad_rows_serial(g, h, a, b, r);
}

}  // namespace dpcore::kernels
