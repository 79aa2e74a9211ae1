// Times the serial reference kernels against the OpenMP variants on
// adaptation-sized workloads and prints per-kernel speedups.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpcore/extractor.hpp"
#include "dpcore/kernels.hpp"
#include "dpcore/rng.hpp"

namespace {

using dpcore::Matrix;
namespace kernels = dpcore::kernels;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() /
           static_cast<double>(reps);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, uint64_t seed) {
    auto rng = dpcore::make_rng(seed);
    Matrix m(rows, cols);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& x : m.data()) x = dist(rng);
    return m;
}

void report(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-22s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name,
                serial_ms, omp_ms, serial_ms / omp_ms);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dpcore kernel benchmark: serial reference vs OpenMP"};
    int n = 4096, d_in = 64, d_f = 64, hidden = 128, reps = 20;
    app.add_option("--rows", n, "batch rows");
    app.add_option("--d-in", d_in, "input dimension");
    app.add_option("--d-f", d_f, "feature dimension");
    app.add_option("--hidden", hidden, "mlp hidden width");
    app.add_option("--reps", reps, "timed repetitions");
    CLI11_PARSE(app, argc, argv);

    std::printf("rows=%d d_in=%d d_f=%d hidden=%d reps=%d threads=%d\n\n", n, d_in, d_f,
                hidden, reps, kernels::max_threads());

    const auto su = [](int v) { return static_cast<std::size_t>(v); };
    const Matrix x = random_matrix(su(n), su(d_in), 1);
    const Matrix w = random_matrix(su(d_f), su(d_in), 2);
    const std::vector<double> shift(su(d_f), 0.1);
    const std::vector<double> in_shift(su(d_in), 0.1);
    const Matrix a = random_matrix(su(hidden), su(d_in), 3);
    const std::vector<double> a0(su(hidden), 0.05);
    const Matrix b = random_matrix(su(d_f), su(hidden), 4);
    const std::vector<double> b0(su(d_f), 0.05);

    Matrix y, h, r;
    std::vector<double> mean, stddev, sums;

    report("affine_rows",
           time_ms([&] { kernels::affine_rows_serial(x, w, shift, y); }, reps),
           time_ms([&] { kernels::affine_rows_omp(x, w, shift, y); }, reps));

    kernels::affine_rows_serial(x, w, shift, y);
    report("column_moments",
           time_ms([&] { kernels::column_moments_serial(y, mean, stddev); }, reps),
           time_ms([&] { kernels::column_moments_omp(y, mean, stddev); }, reps));

    report("column_sums",
           time_ms([&] { kernels::column_sums_serial(y, sums); }, reps),
           time_ms([&] { kernels::column_sums_omp(y, sums); }, reps));

    report("mlp_forward",
           time_ms([&] { kernels::mlp_forward_serial(x, in_shift, a, a0, b, b0, h, y); },
                   reps),
           time_ms([&] { kernels::mlp_forward_omp(x, in_shift, a, a0, b, b0, h, y); },
                   reps));

    kernels::mlp_forward_serial(x, in_shift, a, a0, b, b0, h, y);
    const Matrix g = random_matrix(su(n), su(d_f), 5);
    report("mlp_input_grad_rows",
           time_ms([&] { kernels::mlp_input_grad_rows_serial(g, h, a, b, r); }, reps),
           time_ms([&] { kernels::mlp_input_grad_rows_omp(g, h, a, b, r); }, reps));

    // End-to-end alignment gradient on both extractor kinds.
    using dpcore::ExtractorSpec;
    const auto lin = ExtractorSpec::random_linear(su(d_in), su(d_f), 11);
    const auto mlp = ExtractorSpec::random_mlp(su(d_in), su(hidden), su(d_f), 12);
    dpcore::InputBatch batch{x, std::nullopt};
    const auto p_lin = dpcore::Prompt::gaussian(8, lin.token_dim(), 21);
    const auto p_mlp = dpcore::Prompt::gaussian(8, mlp.token_dim(), 22);
    const auto source = dpcore::compute_stats(dpcore::extract(lin, batch));
    const auto source_mlp = dpcore::compute_stats(dpcore::extract(mlp, batch));

    const auto grad_time = [&](const auto& spec, const auto& prompt, const auto& src,
                               kernels::ExecMode mode) {
        return time_ms(
            [&] {
                kernels::set_exec_mode(mode);
                (void)dpcore::alignment_loss_and_grad(spec, batch, prompt, src);
            },
            reps);
    };
    report("alignment_grad linear",
           grad_time(lin, p_lin, source, kernels::ExecMode::Serial),
           grad_time(lin, p_lin, source, kernels::ExecMode::OpenMP));
    report("alignment_grad mlp",
           grad_time(mlp, p_mlp, source_mlp, kernels::ExecMode::Serial),
           grad_time(mlp, p_mlp, source_mlp, kernels::ExecMode::OpenMP));
    return 0;
}
