#pragma once

#include <vector>

#include "dpcore/matrix.hpp"

namespace dpcore::kernels {

// Execution backend for the data-parallel kernels. Every kernel is
// parallelized over independent outputs (rows or columns), so the OpenMP
// variant produces bit-identical results to the serial reference for any
// thread count. Tests assert exact equality; the bench tool compares times.
enum class ExecMode { Serial, OpenMP };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);
int max_threads();

// Y[i,:] = W * X[i,:] + shift.  W is (d_out x d_in), shift has size d_out.
void affine_rows_serial(const Matrix& x, const Matrix& w,
                        const std::vector<double>& shift, Matrix& y);
void affine_rows_omp(const Matrix& x, const Matrix& w,
                     const std::vector<double>& shift, Matrix& y);
void affine_rows(const Matrix& x, const Matrix& w,
                 const std::vector<double>& shift, Matrix& y);

// Per-column mean and population standard deviation (divide by n, no floor).
void column_moments_serial(const Matrix& y, std::vector<double>& mean,
                           std::vector<double>& stddev);
void column_moments_omp(const Matrix& y, std::vector<double>& mean,
                        std::vector<double>& stddev);
void column_moments(const Matrix& y, std::vector<double>& mean,
                    std::vector<double>& stddev);

void column_sums_serial(const Matrix& y, std::vector<double>& sums);
void column_sums_omp(const Matrix& y, std::vector<double>& sums);
void column_sums(const Matrix& y, std::vector<double>& sums);

// One hidden tanh layer:
//   h_i = tanh(A (x_i + shift) + a0),  y_i = B h_i + b0.
// H (n x hidden) is stored for the backward pass.
void mlp_forward_serial(const Matrix& x, const std::vector<double>& shift,
                        const Matrix& a, const std::vector<double>& a0,
                        const Matrix& b, const std::vector<double>& b0,
                        Matrix& h, Matrix& y);
void mlp_forward_omp(const Matrix& x, const std::vector<double>& shift,
                     const Matrix& a, const std::vector<double>& a0,
                     const Matrix& b, const std::vector<double>& b0,
                     Matrix& h, Matrix& y);
void mlp_forward(const Matrix& x, const std::vector<double>& shift,
                 const Matrix& a, const std::vector<double>& a0,
                 const Matrix& b, const std::vector<double>& b0,
                 Matrix& h, Matrix& y);

// Per-row gradient w.r.t. the (shifted) input of the tanh MLP:
//   r_i = A^T ((1 - h_i^2) * (B^T g_i)).
// Row contributions are kept separate; reduce with column_sums so the
// summation order is fixed regardless of backend.
void mlp_input_grad_rows_serial(const Matrix& g, const Matrix& h,
                                const Matrix& a, const Matrix& b, Matrix& r);
void mlp_input_grad_rows_omp(const Matrix& g, const Matrix& h,
                             const Matrix& a, const Matrix& b, Matrix& r);
void mlp_input_grad_rows(const Matrix& g, const Matrix& h,
                         const Matrix& a, const Matrix& b, Matrix& r);

}  // namespace dpcore::kernels
