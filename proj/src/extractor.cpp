#include "dpcore/extractor.hpp"

#include <cmath>
#include <stdexcept>

#include "dpcore/kernels.hpp"
#include "dpcore/numdiff.hpp"
#include "dpcore/rng.hpp"

namespace dpcore {

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
    Matrix m(rows, cols);
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& x : m.data()) x = dist(rng);
    return m;
}

// Gram-Schmidt on the rows of a square Gaussian draw.
Matrix random_orthogonal(std::size_t d, Rng& rng) {
    Matrix m = gaussian_matrix(d, d, rng, 1.0);
    for (std::size_t i = 0; i < d; ++i) {
        auto ri = m.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            auto rj = m.row(j);
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += ri[k] * rj[k];
            for (std::size_t k = 0; k < d; ++k) ri[k] -= dot * rj[k];
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < d; ++k) norm += ri[k] * ri[k];
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw std::runtime_error("random_orthogonal: degenerate draw");
        for (std::size_t k = 0; k < d; ++k) ri[k] /= norm;
    }
    return m;
}

void check_batch(const ExtractorSpec& spec, const InputBatch& batch) {
    if (batch.rows() == 0) throw std::invalid_argument("extract: empty batch");
    if (batch.dims() != spec.input_dim())
        throw std::invalid_argument("extract: batch dim does not match extractor input dim");
}

void check_prompt(const ExtractorSpec& spec, const Prompt& prompt) {
    if (prompt.length < 1) throw std::invalid_argument("extract: prompt length must be >= 1");
    if (prompt.token_dim != spec.token_dim())
        throw std::invalid_argument("extract: prompt token dim does not match extractor");
    if (prompt.tokens.size() != prompt.length * prompt.token_dim)
        throw std::invalid_argument("extract: prompt token storage inconsistent");
}

struct MomentGradCoeffs {
    // dLoss/dmu_k and dLoss/dsigma_k, the latter zeroed where the stddev
    // floor is active.
    std::vector<double> d_mu;
    std::vector<double> d_sigma;
    std::vector<double> mu;
    std::vector<double> sigma_raw;
    double loss = 0.0;
};

MomentGradCoeffs moment_grad_coeffs(const Matrix& feats, const DomainStats& source) {
    MomentGradCoeffs c;
    kernels::column_moments(feats, c.mu, c.sigma_raw);
    const std::size_t d = c.mu.size();
    if (source.dim() != d)
        throw std::invalid_argument("alignment loss: source stats dim mismatch");

    std::vector<double> sigma(d);
    for (std::size_t k = 0; k < d; ++k) sigma[k] = std::max(c.sigma_raw[k], kStdFloor);

    double mu2 = 0.0, sd2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double dm = c.mu[k] - source.mean[k];
        const double ds = sigma[k] - source.stddev[k];
        mu2 += dm * dm;
        sd2 += ds * ds;
    }
    const double mu_norm = std::sqrt(mu2), sd_norm = std::sqrt(sd2);
    c.loss = mu_norm + sd_norm;

    c.d_mu.assign(d, 0.0);
    c.d_sigma.assign(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        if (mu_norm > 0.0) c.d_mu[k] = (c.mu[k] - source.mean[k]) / mu_norm;
        if (sd_norm > 0.0 && c.sigma_raw[k] > kStdFloor)
            c.d_sigma[k] = (sigma[k] - source.stddev[k]) / sd_norm;
    }
    return c;
}

}  // namespace

Prompt Prompt::gaussian(std::size_t length, std::size_t token_dim, uint64_t seed,
                        double stddev) {
    Prompt p;
    p.length = length;
    p.token_dim = token_dim;
    auto rng = make_rng(seed);
    p.tokens = gaussian_vector(rng, length * token_dim, 0.0, stddev);
    return p;
}

std::vector<double> Prompt::token_sum() const {
    std::vector<double> s(token_dim, 0.0);
    for (std::size_t l = 0; l < length; ++l)
        for (std::size_t k = 0; k < token_dim; ++k) s[k] += tokens[l * token_dim + k];
    return s;
}

std::vector<double> Prompt::token_mean() const {
    std::vector<double> s = token_sum();
    for (auto& x : s) x /= static_cast<double>(length);
    return s;
}

ExtractorSpec ExtractorSpec::linear(Matrix w, uint64_t seed) {
    ExtractorSpec spec;
    spec.kind_ = ExtractorKind::LinearAdditive;
    spec.w_ = std::move(w);
    spec.seed_ = seed;
    return spec;
}

ExtractorSpec ExtractorSpec::random_linear(std::size_t d_in, std::size_t d_f, uint64_t seed) {
    auto rng = make_rng(derive_seed(seed, 0xE71));
    return linear(gaussian_matrix(d_f, d_in, rng, 1.0 / std::sqrt(double(d_in))), seed);
}

ExtractorSpec ExtractorSpec::orthogonal_linear(std::size_t d, uint64_t seed) {
    auto rng = make_rng(derive_seed(seed, 0xE72));
    return linear(random_orthogonal(d, rng), seed);
}

ExtractorSpec ExtractorSpec::random_mlp(std::size_t d_in, std::size_t hidden,
                                        std::size_t d_f, uint64_t seed) {
    ExtractorSpec spec;
    spec.kind_ = ExtractorKind::MlpPrepend;
    auto rng = make_rng(derive_seed(seed, 0xE73));
    spec.a_ = gaussian_matrix(hidden, d_in, rng, 1.0 / std::sqrt(double(d_in)));
    spec.a0_ = gaussian_vector(rng, hidden, 0.0, 0.1);
    spec.b_ = gaussian_matrix(d_f, hidden, rng, 1.0 / std::sqrt(double(hidden)));
    spec.b0_ = gaussian_vector(rng, d_f, 0.0, 0.1);
    spec.seed_ = seed;
    return spec;
}

std::size_t ExtractorSpec::input_dim() const {
    return kind_ == ExtractorKind::LinearAdditive ? w_.cols() : a_.cols();
}

std::size_t ExtractorSpec::feature_dim() const {
    return kind_ == ExtractorKind::LinearAdditive ? w_.rows() : b_.rows();
}

std::size_t ExtractorSpec::token_dim() const {
    // Additive prompts live in feature space, prepended ones in input space.
    return kind_ == ExtractorKind::LinearAdditive ? feature_dim() : input_dim();
}

FeatureBatch extract(const ExtractorSpec& spec, const InputBatch& batch,
                     const Prompt* prompt) {
    check_batch(spec, batch);
    if (prompt) check_prompt(spec, *prompt);

    Matrix y;
    if (spec.kind() == ExtractorKind::LinearAdditive) {
        std::vector<double> shift(spec.feature_dim(), 0.0);
        if (prompt) shift = prompt->token_sum();
        kernels::affine_rows(batch.values, spec.w(), shift, y);
    } else {
        std::vector<double> shift(spec.input_dim(), 0.0);
        if (prompt) shift = prompt->token_mean();
        Matrix h;
        kernels::mlp_forward(batch.values, shift, spec.a(), spec.a0(), spec.b(), spec.b0(),
                             h, y);
    }
    return y;
}

AlignmentGrad alignment_loss_and_grad(const ExtractorSpec& spec, const InputBatch& batch,
                                      const Prompt& prompt, const DomainStats& source) {
    check_batch(spec, batch);
    check_prompt(spec, prompt);

    AlignmentGrad out;
    out.grad.assign(prompt.tokens.size(), 0.0);

    if (spec.kind() == ExtractorKind::LinearAdditive) {
        Matrix y;
        kernels::affine_rows(batch.values, spec.w(), prompt.token_sum(), y);
        const auto c = moment_grad_coeffs(y, source);
        out.loss = c.loss;
        // An additive shift moves the mean one-to-one and cannot change the
        // stddev, so the sigma term drops out of the gradient exactly.
        for (std::size_t l = 0; l < prompt.length; ++l)
            for (std::size_t k = 0; k < prompt.token_dim; ++k)
                out.grad[l * prompt.token_dim + k] = c.d_mu[k];
        return out;
    }

    Matrix h, y;
    kernels::mlp_forward(batch.values, prompt.token_mean(), spec.a(), spec.a0(),
                         spec.b(), spec.b0(), h, y);
    const auto c = moment_grad_coeffs(y, source);
    out.loss = c.loss;

    const std::size_t n = y.rows(), d = y.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    Matrix g(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            double v = c.d_mu[k] * inv_n;
            if (c.d_sigma[k] != 0.0)
                v += c.d_sigma[k] * (y(i, k) - c.mu[k]) * inv_n / c.sigma_raw[k];
            g(i, k) = v;
        }

    Matrix rows;
    kernels::mlp_input_grad_rows(g, h, spec.a(), spec.b(), rows);
    std::vector<double> d_shift;
    kernels::column_sums(rows, d_shift);

    const double inv_len = 1.0 / static_cast<double>(prompt.length);
    for (std::size_t l = 0; l < prompt.length; ++l)
        for (std::size_t k = 0; k < prompt.token_dim; ++k)
            out.grad[l * prompt.token_dim + k] = d_shift[k] * inv_len;
    return out;
}

double alignment_loss(const ExtractorSpec& spec, const InputBatch& batch,
                      const Prompt& prompt, const DomainStats& source) {
    return stats_distance(source, compute_stats(extract(spec, batch, prompt)));
}

std::vector<double> finite_diff_grad(const ExtractorSpec& spec, const InputBatch& batch,
                                     const Prompt& prompt, const DomainStats& source,
                                     double step) {
    Prompt probe = prompt;
    auto f = [&](const std::vector<double>& tokens) {
        probe.tokens = tokens;
        return alignment_loss(spec, batch, probe, source);
    };
    return finite_difference_gradient(f, prompt.tokens, step);
}

}  // namespace dpcore
