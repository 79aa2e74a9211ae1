#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpcore/matrix.hpp"
#include "dpcore/stats.hpp"

namespace dpcore {

// L learnable tokens of dimension d_tok, stored flat (token-major).
// The only trainable state in the whole pipeline.
struct Prompt {
    std::size_t length = 0;
    std::size_t token_dim = 0;
    std::vector<double> tokens;  // length * token_dim

    static Prompt zeros(std::size_t length, std::size_t token_dim) {
        return {length, token_dim, std::vector<double>(length * token_dim, 0.0)};
    }
    // i.i.d. Gaussian init; 0.02 is the default scale used everywhere.
    static Prompt gaussian(std::size_t length, std::size_t token_dim, uint64_t seed,
                           double stddev = 0.02);

    // Sum of all tokens: the aggregate effect an additive extractor sees.
    std::vector<double> token_sum() const;
    // Mean token: what the prepending extractor adds to the input embedding.
    std::vector<double> token_mean() const;

    bool operator==(const Prompt&) const = default;
};

struct InputBatch {
    Matrix values;  // n x d_in
    // Evaluation-only ground truth; the adaptation path never reads it.
    std::optional<int> hidden_domain;

    std::size_t rows() const { return values.rows(); }
    std::size_t dims() const { return values.cols(); }
};

enum class ExtractorKind { LinearAdditive, MlpPrepend };

// Frozen feature map with a prompt-injection slot. Two concrete kinds:
//   LinearAdditive: y = W x + sum_l p_l      (d_tok = d_f, closed-form grads)
//   MlpPrepend:     y = B tanh(A (x + mean_l p_l) + a0) + b0   (d_tok = d_in)
// Parameters are immutable after construction.
class ExtractorSpec {
public:
    static ExtractorSpec linear(Matrix w, uint64_t seed = 0);
    static ExtractorSpec random_linear(std::size_t d_in, std::size_t d_f, uint64_t seed);
    // Random orthogonal W (square); preserves distances between input and
    // feature space, which keeps the synthetic testbed geometry exact.
    static ExtractorSpec orthogonal_linear(std::size_t d, uint64_t seed);
    static ExtractorSpec random_mlp(std::size_t d_in, std::size_t hidden,
                                    std::size_t d_f, uint64_t seed);

    ExtractorKind kind() const { return kind_; }
    std::size_t input_dim() const;
    std::size_t feature_dim() const;
    std::size_t token_dim() const;
    uint64_t seed() const { return seed_; }

    const Matrix& w() const { return w_; }
    const Matrix& a() const { return a_; }
    const std::vector<double>& a0() const { return a0_; }
    const Matrix& b() const { return b_; }
    const std::vector<double>& b0() const { return b0_; }

private:
    ExtractorKind kind_ = ExtractorKind::LinearAdditive;
    Matrix w_;                 // LinearAdditive
    Matrix a_, b_;             // MlpPrepend
    std::vector<double> a0_, b0_;
    uint64_t seed_ = 0;
};

// Deterministic forward pass; prompt == nullptr is the prompt-free path used
// for coreset fingerprints.
FeatureBatch extract(const ExtractorSpec& spec, const InputBatch& batch,
                     const Prompt* prompt = nullptr);
inline FeatureBatch extract(const ExtractorSpec& spec, const InputBatch& batch,
                            const Prompt& prompt) {
    return extract(spec, batch, &prompt);
}

struct AlignmentGrad {
    double loss = 0.0;
    std::vector<double> grad;  // Prompt-shaped, flat
};

// loss = stats_distance(source, compute_stats(extract(spec, batch, prompt))),
// with the gradient taken analytically (closed form for LinearAdditive,
// backprop for MlpPrepend). Dimensions where the stddev floor is active
// contribute zero gradient.
AlignmentGrad alignment_loss_and_grad(const ExtractorSpec& spec, const InputBatch& batch,
                                      const Prompt& prompt, const DomainStats& source);

double alignment_loss(const ExtractorSpec& spec, const InputBatch& batch,
                      const Prompt& prompt, const DomainStats& source);

// Central-difference gradient of the alignment loss; the independent oracle
// the analytic path is checked against.
std::vector<double> finite_diff_grad(const ExtractorSpec& spec, const InputBatch& batch,
                                     const Prompt& prompt, const DomainStats& source,
                                     double step = 1e-4);

}  // namespace dpcore
