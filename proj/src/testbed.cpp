#include "dpcore/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "dpcore/prompt_learn.hpp"
#include "dpcore/rng.hpp"

namespace dpcore {

void TestbedConfig::validate() const {
    if (d_in < 1 || num_classes < 1) throw std::invalid_argument("testbed: bad dims");
    if (num_domains < 1 || num_groups < 1 || num_groups > num_domains)
        throw std::invalid_argument("testbed: bad domain/group counts");
    if (num_classes + static_cast<std::size_t>(num_groups) > d_in)
        throw std::invalid_argument(
            "testbed: d_in must fit num_classes + num_groups orthogonal directions");
    if (static_cast<std::size_t>(num_groups) > num_classes)
        throw std::invalid_argument("testbed: more groups than class directions");
    if (noise_std < 0.0) throw std::invalid_argument("testbed: noise_std must be >= 0");
    if (n_ref < 1) throw std::invalid_argument("testbed: n_ref must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("testbed: batch_size must be >= 1");
    if (scale_jitter_groups < 0 || scale_jitter_groups > num_groups)
        throw std::invalid_argument("testbed: bad scale_jitter_groups");
}

namespace {

// Orthonormal rows via Gram-Schmidt on a Gaussian draw.
Matrix orthonormal_rows(std::size_t count, std::size_t d, Rng& rng) {
    Matrix m(count, d);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& x : m.data()) x = dist(rng);
    for (std::size_t i = 0; i < count; ++i) {
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
        if (norm < 1e-12) throw std::runtime_error("testbed: degenerate direction draw");
        for (std::size_t k = 0; k < d; ++k) ri[k] /= norm;
    }
    return m;
}

double spread(double lo, double hi, int i, int n) {
    if (n <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

DomainModel make_domain_model(const TestbedConfig& config) {
    config.validate();
    auto rng = make_rng(derive_seed(config.model_seed, 0x7B3D));

    const std::size_t dir_count = config.num_classes + static_cast<std::size_t>(config.num_groups);
    const Matrix dirs = orthonormal_rows(dir_count, config.d_in, rng);

    DomainModel model;
    model.d_in = config.d_in;
    model.noise_std = config.noise_std;
    model.class_centroids = Matrix(config.num_classes, config.d_in);
    for (std::size_t c = 0; c < config.num_classes; ++c)
        for (std::size_t k = 0; k < config.d_in; ++k)
            model.class_centroids(c, k) = config.centroid_scale * dirs(c, k);

    std::normal_distribution<double> unit(0.0, 1.0);
    model.domains.resize(static_cast<std::size_t>(config.num_domains));
    for (int d = 0; d < config.num_domains; ++d) {
        // Contiguous group blocks, mirroring grouped corruption suites.
        const int g = d * config.num_groups / config.num_domains;
        const double r = spread(config.group_shift_min, config.group_shift_max, g,
                                config.num_groups);
        const double kappa = spread(config.inspan_shift_min, config.inspan_shift_max, g,
                                    config.num_groups);
        const std::size_t ortho_row = config.num_classes + static_cast<std::size_t>(g);
        const std::size_t inspan_row = static_cast<std::size_t>(g) % config.num_classes;

        auto& dom = model.domains[static_cast<std::size_t>(d)];
        dom.group_id = g;
        dom.shift.assign(config.d_in, 0.0);
        for (std::size_t k = 0; k < config.d_in; ++k)
            dom.shift[k] = r * dirs(ortho_row, k) + kappa * dirs(inspan_row, k);

        // Within-group jitter with a fixed norm so group tightness is exact.
        std::vector<double> jitter(config.d_in);
        double norm = 0.0;
        for (auto& x : jitter) {
            x = unit(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < config.d_in; ++k)
            dom.shift[k] += config.within_group_jitter * jitter[k] / norm;

        dom.scale.assign(config.d_in, 1.0);
        if (g >= config.num_groups - config.scale_jitter_groups && config.scale_jitter > 0.0)
            for (auto& s : dom.scale) s = 1.0 + config.scale_jitter * unit(rng);
    }
    return model;
}

std::string model_to_json(const DomainModel& model, int indent) {
    nlohmann::json j;
    j["d_in"] = model.d_in;
    j["noise_std"] = model.noise_std;
    j["class_centroids"] = nlohmann::json::array();
    for (std::size_t c = 0; c < model.class_centroids.rows(); ++c) {
        auto row = model.class_centroids.row(c);
        j["class_centroids"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["domains"] = nlohmann::json::array();
    for (const auto& dom : model.domains)
        j["domains"].push_back({{"scale", dom.scale},
                                {"shift", dom.shift},
                                {"group_id", dom.group_id}});
    return j.dump(indent);
}

DomainModel model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    DomainModel model;
    model.d_in = j.at("d_in").get<std::size_t>();
    model.noise_std = j.at("noise_std").get<double>();
    const auto& cents = j.at("class_centroids");
    model.class_centroids = Matrix(cents.size(), model.d_in);
    for (std::size_t c = 0; c < cents.size(); ++c) {
        const auto row = cents[c].get<std::vector<double>>();
        if (row.size() != model.d_in)
            throw std::invalid_argument("model_from_json: centroid dim mismatch");
        for (std::size_t k = 0; k < model.d_in; ++k) model.class_centroids(c, k) = row[k];
    }
    for (const auto& jd : j.at("domains")) {
        DomainCorruption dom;
        dom.scale = jd.at("scale").get<std::vector<double>>();
        dom.shift = jd.at("shift").get<std::vector<double>>();
        dom.group_id = jd.at("group_id").get<int>();
        if (dom.scale.size() != model.d_in || dom.shift.size() != model.d_in)
            throw std::invalid_argument("model_from_json: domain dim mismatch");
        model.domains.push_back(std::move(dom));
    }
    return model;
}

LabeledBatch sample_source_batch(const DomainModel& model, int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_source_batch: n must be >= 1");
    auto rng = make_rng(derive_seed(seed, 0x5AC0));

    // Label-balanced draw: every class appears floor(n/C) or ceil(n/C) times.
    const int c = static_cast<int>(model.num_classes());
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int y = 0; y < c; ++y)
        for (int r = 0; r < n / c; ++r) labels.push_back(y);
    std::vector<int> extra(static_cast<std::size_t>(c));
    std::iota(extra.begin(), extra.end(), 0);
    std::shuffle(extra.begin(), extra.end(), rng);
    for (int r = 0; r < n % c; ++r) labels.push_back(extra[static_cast<std::size_t>(r)]);
    std::shuffle(labels.begin(), labels.end(), rng);

    std::normal_distribution<double> noise(0.0, model.noise_std > 0.0 ? model.noise_std : 1.0);
    LabeledBatch batch;
    batch.input.values = Matrix(static_cast<std::size_t>(n), model.d_in);
    batch.labels = std::move(labels);
    for (int i = 0; i < n; ++i) {
        const auto y = static_cast<std::size_t>(batch.labels[static_cast<std::size_t>(i)]);
        for (std::size_t k = 0; k < model.d_in; ++k) {
            const double eps = model.noise_std > 0.0 ? noise(rng) : 0.0;
            batch.input.values(static_cast<std::size_t>(i), k) =
                model.class_centroids(y, k) + eps;
        }
    }
    return batch;
}

LabeledBatch sample_domain_batch(const DomainModel& model, int domain, int n,
                                 uint64_t seed) {
    if (domain < 0 || domain >= model.num_domains())
        throw std::invalid_argument("sample_domain_batch: bad domain index");
    LabeledBatch batch = sample_source_batch(model, n, derive_seed(seed, 0xD0E, domain));
    const auto& dom = model.domains[static_cast<std::size_t>(domain)];
    for (std::size_t i = 0; i < batch.input.rows(); ++i)
        for (std::size_t k = 0; k < model.d_in; ++k)
            batch.input.values(i, k) = dom.scale[k] * batch.input.values(i, k) + dom.shift[k];
    batch.input.hidden_domain = domain;
    return batch;
}

SourceData make_source(const DomainModel& model, const ExtractorSpec& extractor,
                       int n_ref, uint64_t seed) {
    SourceData src;
    src.data = sample_source_batch(model, n_ref, derive_seed(seed, 0x50CE));
    src.stats = compute_stats(extract(extractor, src.data.input));
    return src;
}

CentroidClassifier CentroidClassifier::fit(const FeatureBatch& features,
                                           const std::vector<int>& labels,
                                           std::size_t num_classes) {
    if (features.rows() != labels.size())
        throw std::invalid_argument("CentroidClassifier: label count mismatch");
    CentroidClassifier clf;
    clf.centroids_ = Matrix(num_classes, features.cols());
    std::vector<double> counts(num_classes, 0.0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        if (y >= num_classes) throw std::invalid_argument("CentroidClassifier: bad label");
        counts[y] += 1.0;
        for (std::size_t k = 0; k < features.cols(); ++k)
            clf.centroids_(y, k) += features(i, k);
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (counts[c] == 0.0)
            throw std::invalid_argument("CentroidClassifier: class with no samples");
        for (std::size_t k = 0; k < features.cols(); ++k) clf.centroids_(c, k) /= counts[c];
    }
    return clf;
}

std::vector<int> CentroidClassifier::classify(const FeatureBatch& features) const {
    if (features.cols() != centroids_.cols())
        throw std::invalid_argument("CentroidClassifier: feature dim mismatch");
    std::vector<int> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        double best = 0.0;
        int best_c = -1;
        for (std::size_t c = 0; c < centroids_.rows(); ++c) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < features.cols(); ++k) {
                const double diff = features(i, k) - centroids_(c, k);
                d2 += diff * diff;
            }
            if (best_c < 0 || d2 < best) {
                best = d2;
                best_c = static_cast<int>(c);
            }
        }
        out[i] = best_c;
    }
    return out;
}

double CentroidClassifier::error_rate(const FeatureBatch& features,
                                      const std::vector<int>& labels) const {
    const auto pred = classify(features);
    if (pred.size() != labels.size())
        throw std::invalid_argument("error_rate: label count mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] != labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

OracleResult oracle_domain_prompts(const DomainModel& model, const ExtractorSpec& extractor,
                                   const DomainStats& source_stats,
                                   const CentroidClassifier& classifier,
                                   const OptimConfig& optim, std::size_t prompt_length,
                                   int pool_size, int eval_size, uint64_t seed) {
    const int m = model.num_domains();
    OracleResult out;
    out.prompts.reserve(static_cast<std::size_t>(m));
    out.error = Matrix(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    out.no_prompt_error.resize(static_cast<std::size_t>(m));

    for (int d = 0; d < m; ++d) {
        const auto pool =
            sample_domain_batch(model, d, pool_size, derive_seed(seed, 0x0A11, d));
        auto learned = learn_prompt(extractor, pool.input, source_stats, optim,
                                    prompt_length, optim.steps_scratch,
                                    derive_seed(seed, 0x0A12, d));
        out.prompts.push_back(std::move(learned.prompt));
    }

    const auto src_eval = sample_source_batch(model, eval_size, derive_seed(seed, 0x0A13));
    out.source_error = classifier.error_rate(extract(extractor, src_eval.input),
                                             src_eval.labels);

    for (int target = 0; target < m; ++target) {
        const auto batch =
            sample_domain_batch(model, target, eval_size, derive_seed(seed, 0x0A14, target));
        out.no_prompt_error[static_cast<std::size_t>(target)] =
            classifier.error_rate(extract(extractor, batch.input), batch.labels);
        for (int pd = 0; pd < m; ++pd) {
            const auto feats =
                extract(extractor, batch.input, out.prompts[static_cast<std::size_t>(pd)]);
            out.error(static_cast<std::size_t>(pd), static_cast<std::size_t>(target)) =
                classifier.error_rate(feats, batch.labels);
        }
    }
    return out;
}

}  // namespace dpcore
