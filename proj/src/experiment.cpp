#include "dpcore/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dpcore/props.hpp"
#include "dpcore/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dpcore {

namespace fs = std::filesystem;

ExperimentContext build_context(const ExperimentConfig& cfg) {
    ExperimentContext ctx;
    ctx.model = make_domain_model(cfg.testbed);

    if (cfg.extractor_kind == ExtractorKind::LinearAdditive) {
        // Square maps use an orthogonal W so input-space geometry carries over
        // to feature space exactly.
        ctx.extractor = cfg.d_feat == cfg.testbed.d_in
                            ? ExtractorSpec::orthogonal_linear(cfg.testbed.d_in,
                                                               cfg.extractor_seed)
                            : ExtractorSpec::random_linear(cfg.testbed.d_in, cfg.d_feat,
                                                           cfg.extractor_seed);
    } else {
        ctx.extractor = ExtractorSpec::random_mlp(cfg.testbed.d_in, cfg.mlp_hidden,
                                                  cfg.d_feat, cfg.extractor_seed);
    }

    ctx.source = make_source(ctx.model, ctx.extractor, cfg.testbed.n_ref,
                             derive_seed(cfg.testbed.model_seed, 0x0FF1));
    ctx.classifier = CentroidClassifier::fit(extract(ctx.extractor, ctx.source.data.input),
                                             ctx.source.data.labels,
                                             ctx.model.num_classes());
    return ctx;
}

SeedRunResult run_experiment_seed(const ExperimentConfig& cfg,
                                  const ExperimentContext& ctx, uint64_t seed) {
    SeedRunResult result;
    result.seed = seed;

    StreamSpec spec = cfg.stream;
    spec.seed = derive_seed(seed, cfg.stream.seed);
    const DomainStream stream = gen_stream(spec);

    RunInputs in;
    in.model = &ctx.model;
    in.extractor = &ctx.extractor;
    in.source_stats = &ctx.source.stats;
    in.classifier = &ctx.classifier;
    in.stream = &stream;
    in.coreset = cfg.coreset;
    in.optim = cfg.optim;
    in.policy = cfg.policy;
    in.batch_size = cfg.testbed.batch_size;
    in.run_seed = derive_seed(seed, 0xDA7A);

    result.report = run_policy(in);

    auto echo = experiment_config_to_json(cfg);
    result.summary = summary_json(result.report, echo);
    result.summary["seed"] = seed;

    std::ostringstream trace;
    write_trace_csv(result.report, trace);
    result.trace_csv = trace.str();

    std::ostringstream scsv;
    write_stream_csv(stream, scsv);
    result.stream_csv = scsv.str();
    return result;
}

int worker_count() {
    if (const char* env = std::getenv("DPCORE_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

}  // namespace

int cmd_run(const std::string& config_path, std::optional<uint64_t> seed_override,
            const std::string& out_dir) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(config_path);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    std::vector<uint64_t> seeds = seed_override ? std::vector<uint64_t>{*seed_override}
                                                : cfg.seeds;
    try {
        const ExperimentContext ctx = build_context(cfg);
        std::vector<SeedRunResult> results(seeds.size());

        const int workers = worker_count();
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
        for (std::size_t i = 0; i < seeds.size(); ++i)
            results[i] = run_experiment_seed(cfg, ctx, seeds[i]);
        (void)workers;

        // All artifacts exist in memory before anything touches disk.
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "model.json", model_to_json(ctx.model, 2) + "\n");
        for (const auto& r : results) {
            const std::string tag = "seed" + std::to_string(r.seed);
            write_file(fs::path(out_dir) / ("trace_" + tag + ".csv"), r.trace_csv);
            write_file(fs::path(out_dir) / ("summary_" + tag + ".json"),
                       r.summary.dump(2) + "\n");
            write_file(fs::path(out_dir) / ("stream_" + tag + ".csv"), r.stream_csv);
            std::cout << policy_name(cfg.policy.kind) << " seed " << r.seed
                      << ": error " << r.report.overall_error << ", K "
                      << r.report.final_coreset_size << ", mean_bp " << r.report.mean_bp
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

namespace {

std::string json_scalar_to_csv(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_dir) {
    nlohmann::json base;
    nlohmann::json grid;
    try {
        {
            std::ifstream in(config_path);
            if (!in) throw config_error("cannot open config file: " + config_path);
            in >> base;
        }
        {
            std::ifstream in(grid_path);
            if (!in) throw config_error("cannot open grid file: " + grid_path);
            nlohmann::json g;
            in >> g;
            if (!g.is_object() || !g.contains("grid") || !g.at("grid").is_object())
                throw config_error("grid file must be {\"grid\": {\"<path>\": [values]}}");
            grid = g.at("grid");
        }
        // Base config must be valid before expansion.
        parse_experiment_config(base);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    std::vector<std::string> keys;
    for (const auto& [key, values] : grid.items()) {
        if (!values.is_array() || values.empty()) {
            std::cerr << "config error: grid values for \"" << key
                      << "\" must be a non-empty array\n";
            return 1;
        }
        keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());

    // Cross product of grid assignments, in sorted-key lexicographic order.
    struct GridPoint {
        nlohmann::json config_json;
        std::vector<nlohmann::json> values;
    };
    std::vector<GridPoint> points;
    std::vector<std::size_t> idx(keys.size(), 0);
    while (true) {
        GridPoint p;
        p.config_json = base;
        for (std::size_t k = 0; k < keys.size(); ++k) {
            const auto& value = grid.at(keys[k]).at(idx[k]);
            std::string pointer = "/" + keys[k];
            std::replace(pointer.begin(), pointer.end(), '.', '/');
            p.config_json[nlohmann::json::json_pointer(pointer)] = value;
            p.values.push_back(value);
        }
        points.push_back(std::move(p));
        std::size_t k = keys.size();
        while (k > 0) {
            --k;
            if (++idx[k] < grid.at(keys[k]).size()) break;
            idx[k] = 0;
            if (k == 0) goto done;
        }
        if (keys.empty()) break;
    }
done:

    struct SweepRow {
        std::vector<std::string> grid_values;
        uint64_t seed = 0;
        double overall_error = 0.0;
        std::size_t final_k = 0;
        double mean_fp = 0.0, mean_bp = 0.0;
        long scratch = 0, refine = 0;
    };

    struct Task {
        std::size_t point = 0;
        uint64_t seed = 0;
    };

    std::vector<ExperimentConfig> configs;
    std::vector<Task> tasks;
    try {
        for (std::size_t p = 0; p < points.size(); ++p) {
            configs.push_back(parse_experiment_config(points[p].config_json));
            for (uint64_t seed : configs.back().seeds) tasks.push_back({p, seed});
        }
    } catch (const config_error& e) {
        std::cerr << "config error (grid expansion): " << e.what() << "\n";
        return 1;
    }

    std::vector<SweepRow> rows(tasks.size());
    try {
        const int workers = worker_count();
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(dynamic)
#endif
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            const auto& cfg = configs[tasks[t].point];
            const ExperimentContext ctx = build_context(cfg);
            const auto result = run_experiment_seed(cfg, ctx, tasks[t].seed);
            SweepRow row;
            for (const auto& v : points[tasks[t].point].values)
                row.grid_values.push_back(json_scalar_to_csv(v));
            row.seed = tasks[t].seed;
            row.overall_error = result.report.overall_error;
            row.final_k = result.report.final_coreset_size;
            row.mean_fp = result.report.mean_fp;
            row.mean_bp = result.report.mean_bp;
            row.scratch = result.report.scratch_count;
            row.refine = result.report.refine_count;
            rows[t] = std::move(row);
        }
        (void)workers;

        fs::create_directories(out_dir);
        std::ostringstream csv;
        for (const auto& key : keys) csv << key << ',';
        csv << "seed,overall_error,final_coreset_size,mean_fp,mean_bp,"
               "scratch_count,refine_count\n";
        csv.precision(17);
        for (const auto& row : rows) {
            for (const auto& v : row.grid_values) csv << v << ',';
            csv << row.seed << ',' << row.overall_error << ',' << row.final_k << ','
                << row.mean_fp << ',' << row.mean_bp << ',' << row.scratch << ','
                << row.refine << '\n';
        }
        write_file(fs::path(out_dir) / "sweep.csv", csv.str());
        std::cout << "sweep: " << rows.size() << " runs over " << points.size()
                  << " grid points\n";
    } catch (const std::exception& e) {
        std::cerr << "sweep failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_props() {
    const auto report = run_props_suite();
    print_props_report(report, std::cout);
    return report.passed() ? 0 : 2;
}

int cmd_streams_gen(const std::string& spec_path, const std::string& out_csv) {
    try {
        std::ifstream in(spec_path);
        if (!in) throw config_error("cannot open spec file: " + spec_path);
        nlohmann::json j;
        in >> j;
        const StreamSpec spec = parse_stream_spec(j);
        const DomainStream stream = gen_stream(spec);

        std::ostringstream csv;
        write_stream_csv(stream, csv);
        if (const auto parent = fs::path(out_csv).parent_path(); !parent.empty())
            fs::create_directories(parent);
        write_file(out_csv, csv.str());

        const auto diag = stream_diagnostics(stream, spec.num_domains);
        std::cout << "stream: " << stream.size() << " batches, " << diag.switch_count
                  << " switches\n";
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "streams gen failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace dpcore
