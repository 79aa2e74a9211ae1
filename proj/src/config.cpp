#include "dpcore/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dpcore {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw config_error(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw config_error(where + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string(key) + ": " + e.what());
    }
}

TestbedConfig parse_testbed(const json& j) {
    expect_object(j, "testbed");
    reject_unknown(j, "testbed",
                   {"d_in", "num_classes", "num_domains", "num_groups", "centroid_scale",
                    "noise_std", "group_shift_min", "group_shift_max", "inspan_shift_min",
                    "inspan_shift_max", "within_group_jitter", "scale_jitter",
                    "scale_jitter_groups", "n_ref", "batch_size", "model_seed"});
    TestbedConfig c;
    read(j, "d_in", c.d_in);
    read(j, "num_classes", c.num_classes);
    read(j, "num_domains", c.num_domains);
    read(j, "num_groups", c.num_groups);
    read(j, "centroid_scale", c.centroid_scale);
    read(j, "noise_std", c.noise_std);
    read(j, "group_shift_min", c.group_shift_min);
    read(j, "group_shift_max", c.group_shift_max);
    read(j, "inspan_shift_min", c.inspan_shift_min);
    read(j, "inspan_shift_max", c.inspan_shift_max);
    read(j, "within_group_jitter", c.within_group_jitter);
    read(j, "scale_jitter", c.scale_jitter);
    read(j, "scale_jitter_groups", c.scale_jitter_groups);
    read(j, "n_ref", c.n_ref);
    read(j, "batch_size", c.batch_size);
    read(j, "model_seed", c.model_seed);
    return c;
}

StreamKind stream_kind_from_name(const std::string& name) {
    if (name == "csc") return StreamKind::Csc;
    if (name == "cdc_dirichlet") return StreamKind::CdcDirichlet;
    if (name == "cdc_2d") return StreamKind::Cdc2d;
    throw config_error("stream.kind: unknown value \"" + name + "\"");
}

std::string stream_kind_name(StreamKind kind) {
    switch (kind) {
        case StreamKind::Csc: return "csc";
        case StreamKind::CdcDirichlet: return "cdc_dirichlet";
        case StreamKind::Cdc2d: return "cdc_2d";
    }
    return "?";
}

// batches_per_domain accepts either a uniform count or a per-domain list.
void parse_stream_common(const json& j, StreamSpec& s) {
    if (j.contains("kind")) s.kind = stream_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("batches_per_domain")) {
        const auto& b = j.at("batches_per_domain");
        if (b.is_number_integer()) {
            const int per = b.get<int>();
            s.batches_per_domain.assign(static_cast<std::size_t>(std::max(s.num_domains, 0)),
                                        per);
        } else {
            s.batches_per_domain = b.get<std::vector<int>>();
        }
    }
    read(j, "delta", s.delta);
    read(j, "num_slots", s.num_slots);
    read(j, "domain_probs", s.domain_probs);
    read(j, "max_run", s.max_run);
    read(j, "domain_order", s.domain_order);
    read(j, "seed", s.seed);
}

PolicyConfig parse_policy(const json& j) {
    expect_object(j, "policy");
    reject_unknown(j, "policy", {"name", "prompt_length", "buffer_size"});
    PolicyConfig p;
    if (j.contains("name")) {
        try {
            p.kind = policy_from_name(j.at("name").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("policy.name: ") + e.what());
        }
    }
    read(j, "prompt_length", p.prompt_length);
    read(j, "buffer_size", p.buffer_size);
    return p;
}

CoresetConfig parse_coreset(const json& j) {
    expect_object(j, "coreset");
    reject_unknown(j, "coreset", {"tau", "rho", "alpha", "max_size", "overflow_policy"});
    CoresetConfig c;
    read(j, "tau", c.tau);
    read(j, "rho", c.rho);
    read(j, "alpha", c.alpha);
    read(j, "max_size", c.max_size);
    if (j.contains("overflow_policy")) {
        const auto name = j.at("overflow_policy").get<std::string>();
        if (name == "discard_oldest")
            c.overflow_policy = OverflowPolicy::DiscardOldest;
        else if (name == "merge_similar")
            c.overflow_policy = OverflowPolicy::MergeSimilar;
        else
            throw config_error("coreset.overflow_policy: unknown value \"" + name + "\"");
    }
    return c;
}

OptimConfig parse_optim(const json& j) {
    expect_object(j, "optim");
    reject_unknown(j, "optim",
                   {"lr", "steps_scratch", "steps_refine", "beta1", "beta2", "eps",
                    "weight_decay", "grad_mode", "fd_step"});
    OptimConfig c;
    read(j, "lr", c.lr);
    read(j, "steps_scratch", c.steps_scratch);
    read(j, "steps_refine", c.steps_refine);
    read(j, "beta1", c.beta1);
    read(j, "beta2", c.beta2);
    read(j, "eps", c.eps);
    read(j, "weight_decay", c.weight_decay);
    read(j, "fd_step", c.fd_step);
    if (j.contains("grad_mode")) {
        const auto name = j.at("grad_mode").get<std::string>();
        if (name == "analytic")
            c.grad_mode = GradMode::Analytic;
        else if (name == "finite_diff")
            c.grad_mode = GradMode::FiniteDiff;
        else
            throw config_error("optim.grad_mode: unknown value \"" + name + "\"");
    }
    return c;
}

}  // namespace

void ExperimentConfig::validate() const {
    testbed.validate();
    stream.validate();
    coreset.validate();
    if (optim.lr <= 0.0) throw config_error("optim.lr must be > 0");
    if (optim.steps_scratch < 1 || optim.steps_refine < 1)
        throw config_error("optim steps must be >= 1");
    if (policy.prompt_length < 1) throw config_error("policy.prompt_length must be >= 1");
    if (policy.kind == PolicyKind::DPCoreFixedK && coreset.max_size == 0)
        throw config_error("dpcore_fixed_k requires coreset.max_size > 0");
    if (policy.kind == PolicyKind::DPCoreB && policy.buffer_size < 1)
        throw config_error("dpcore_b requires policy.buffer_size >= 1");
    if (seeds.empty()) throw config_error("seeds must be non-empty");
    if (extractor_kind == ExtractorKind::MlpPrepend && mlp_hidden < 1)
        throw config_error("extractor.mlp_hidden must be >= 1");
    if (d_feat < 1) throw config_error("extractor.d_feat must be >= 1");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    expect_object(j, "config");
    reject_unknown(j, "config",
                   {"schema_version", "testbed", "extractor", "stream", "policy", "coreset",
                    "optim", "seeds"});
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kConfigSchemaVersion)
        throw config_error("unsupported schema_version");

    ExperimentConfig cfg;
    if (j.contains("testbed")) cfg.testbed = parse_testbed(j.at("testbed"));

    if (j.contains("extractor")) {
        const auto& je = j.at("extractor");
        expect_object(je, "extractor");
        reject_unknown(je, "extractor", {"kind", "d_feat", "mlp_hidden", "seed"});
        if (je.contains("kind")) {
            const auto name = je.at("kind").get<std::string>();
            if (name == "linear_additive")
                cfg.extractor_kind = ExtractorKind::LinearAdditive;
            else if (name == "mlp_prepend")
                cfg.extractor_kind = ExtractorKind::MlpPrepend;
            else
                throw config_error("extractor.kind: unknown value \"" + name + "\"");
        }
        read(je, "d_feat", cfg.d_feat);
        read(je, "mlp_hidden", cfg.mlp_hidden);
        read(je, "seed", cfg.extractor_seed);
    } else {
        cfg.d_feat = cfg.testbed.d_in;
    }

    cfg.stream.num_domains = cfg.testbed.num_domains;
    cfg.stream.batches_per_domain.assign(
        static_cast<std::size_t>(cfg.testbed.num_domains), 10);
    if (j.contains("stream")) {
        const auto& js = j.at("stream");
        expect_object(js, "stream");
        reject_unknown(js, "stream",
                       {"kind", "batches_per_domain", "delta", "num_slots", "domain_probs",
                        "max_run", "domain_order", "seed"});
        parse_stream_common(js, cfg.stream);
    }

    if (j.contains("policy")) cfg.policy = parse_policy(j.at("policy"));
    if (j.contains("coreset")) cfg.coreset = parse_coreset(j.at("coreset"));
    if (j.contains("optim")) cfg.optim = parse_optim(j.at("optim"));
    read(j, "seeds", cfg.seeds);

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_experiment_config(j);
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["testbed"] = {
        {"d_in", cfg.testbed.d_in},
        {"num_classes", cfg.testbed.num_classes},
        {"num_domains", cfg.testbed.num_domains},
        {"num_groups", cfg.testbed.num_groups},
        {"centroid_scale", cfg.testbed.centroid_scale},
        {"noise_std", cfg.testbed.noise_std},
        {"group_shift_min", cfg.testbed.group_shift_min},
        {"group_shift_max", cfg.testbed.group_shift_max},
        {"inspan_shift_min", cfg.testbed.inspan_shift_min},
        {"inspan_shift_max", cfg.testbed.inspan_shift_max},
        {"within_group_jitter", cfg.testbed.within_group_jitter},
        {"scale_jitter", cfg.testbed.scale_jitter},
        {"scale_jitter_groups", cfg.testbed.scale_jitter_groups},
        {"n_ref", cfg.testbed.n_ref},
        {"batch_size", cfg.testbed.batch_size},
        {"model_seed", cfg.testbed.model_seed},
    };
    j["extractor"] = {
        {"kind", cfg.extractor_kind == ExtractorKind::LinearAdditive ? "linear_additive"
                                                                     : "mlp_prepend"},
        {"d_feat", cfg.d_feat},
        {"mlp_hidden", cfg.mlp_hidden},
        {"seed", cfg.extractor_seed},
    };
    j["stream"] = {
        {"kind", stream_kind_name(cfg.stream.kind)},
        {"batches_per_domain", cfg.stream.batches_per_domain},
        {"delta", cfg.stream.delta},
        {"num_slots", cfg.stream.num_slots},
        {"max_run", cfg.stream.max_run},
        {"seed", cfg.stream.seed},
    };
    if (!cfg.stream.domain_probs.empty())
        j["stream"]["domain_probs"] = cfg.stream.domain_probs;
    if (!cfg.stream.domain_order.empty())
        j["stream"]["domain_order"] = cfg.stream.domain_order;
    j["policy"] = {
        {"name", policy_name(cfg.policy.kind)},
        {"prompt_length", cfg.policy.prompt_length},
        {"buffer_size", cfg.policy.buffer_size},
    };
    j["coreset"] = {
        {"tau", cfg.coreset.tau},
        {"rho", cfg.coreset.rho},
        {"alpha", cfg.coreset.alpha},
        {"max_size", cfg.coreset.max_size},
        {"overflow_policy",
         cfg.coreset.overflow_policy == OverflowPolicy::DiscardOldest ? "discard_oldest"
                                                                      : "merge_similar"},
    };
    j["optim"] = {
        {"lr", cfg.optim.lr},
        {"steps_scratch", cfg.optim.steps_scratch},
        {"steps_refine", cfg.optim.steps_refine},
        {"beta1", cfg.optim.beta1},
        {"beta2", cfg.optim.beta2},
        {"eps", cfg.optim.eps},
        {"weight_decay", cfg.optim.weight_decay},
        {"grad_mode", cfg.optim.grad_mode == GradMode::Analytic ? "analytic" : "finite_diff"},
        {"fd_step", cfg.optim.fd_step},
    };
    j["seeds"] = cfg.seeds;
    return j;
}

StreamSpec parse_stream_spec(const nlohmann::json& j) {
    expect_object(j, "stream spec");
    reject_unknown(j, "stream spec",
                   {"num_domains", "kind", "batches_per_domain", "delta", "num_slots",
                    "domain_probs", "max_run", "domain_order", "seed"});
    StreamSpec s;
    read(j, "num_domains", s.num_domains);
    if (s.num_domains < 1) throw config_error("stream spec: num_domains must be >= 1");
    parse_stream_common(j, s);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return s;
}

}  // namespace dpcore
