#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpcore/extractor.hpp"
#include "dpcore/matrix.hpp"
#include "dpcore/optimizer.hpp"
#include "dpcore/stats.hpp"

namespace dpcore {

// Synthetic stand-in for a corruption benchmark: a Gaussian-mixture source
// with per-domain affine corruptions, arranged in well-separated groups.
//
// Geometry: class centroids sit on orthonormal directions scaled by
// centroid_scale. Each group g gets a shift with two parts: a large component
// along a direction orthogonal to the centroid span (drives the statistics
// distance between groups) and a smaller component along one class direction
// (drives classification error before adaptation). Domains within a group
// jitter around the group shift.
struct TestbedConfig {
    std::size_t d_in = 16;
    std::size_t num_classes = 8;
    int num_domains = 15;
    int num_groups = 4;
    double centroid_scale = 3.5;
    double noise_std = 1.0;
    double group_shift_min = 5.0;
    double group_shift_max = 9.0;
    double inspan_shift_min = 2.5;
    double inspan_shift_max = 4.0;
    double within_group_jitter = 0.4;
    double scale_jitter = 0.0;   // multiplicative stddev; 0 keeps shift-only domains
    int scale_jitter_groups = 0; // how many trailing groups get scale jitter
    int n_ref = 300;
    int batch_size = 64;
    uint64_t model_seed = 1;

    void validate() const;
};

struct DomainCorruption {
    std::vector<double> scale;  // componentwise factor
    std::vector<double> shift;
    int group_id = 0;
};

struct DomainModel {
    Matrix class_centroids;  // C x d_in
    std::vector<DomainCorruption> domains;
    double noise_std = 1.0;
    std::size_t d_in = 0;

    int num_domains() const { return static_cast<int>(domains.size()); }
    std::size_t num_classes() const { return class_centroids.rows(); }
};

DomainModel make_domain_model(const TestbedConfig& config);

std::string model_to_json(const DomainModel& model, int indent = -1);
DomainModel model_from_json(const std::string& text);

struct LabeledBatch {
    InputBatch input;
    std::vector<int> labels;  // evaluation only
};

// Clean source draw: x = centroid_y + noise.
LabeledBatch sample_source_batch(const DomainModel& model, int n, uint64_t seed);

// Domain g realization: x = scale_g .* x_src + shift_g on a fresh source draw.
LabeledBatch sample_domain_batch(const DomainModel& model, int domain, int n,
                                 uint64_t seed);

struct SourceData {
    LabeledBatch data;
    DomainStats stats;  // prompt-free feature statistics of the reference set
};

SourceData make_source(const DomainModel& model, const ExtractorSpec& extractor,
                       int n_ref, uint64_t seed);

// Frozen nearest class-centroid classifier in feature space.
class CentroidClassifier {
public:
    static CentroidClassifier fit(const FeatureBatch& features,
                                  const std::vector<int>& labels,
                                  std::size_t num_classes);

    std::vector<int> classify(const FeatureBatch& features) const;
    double error_rate(const FeatureBatch& features, const std::vector<int>& labels) const;

    const Matrix& centroids() const { return centroids_; }

private:
    Matrix centroids_;  // C x d_f
};

struct OracleResult {
    std::vector<Prompt> prompts;  // one per domain, boundaries revealed
    Matrix error;                 // error(i, j) = prompt of domain i applied to domain j
    std::vector<double> no_prompt_error;  // per-domain, prompt-free
    double source_error = 0.0;
};

// Lower-bound reference: learn a prompt per domain on pooled data with known
// boundaries, then cross-evaluate every (prompt, domain) pair.
OracleResult oracle_domain_prompts(const DomainModel& model, const ExtractorSpec& extractor,
                                   const DomainStats& source_stats,
                                   const CentroidClassifier& classifier,
                                   const OptimConfig& optim, std::size_t prompt_length,
                                   int pool_size, int eval_size, uint64_t seed);

}  // namespace dpcore
