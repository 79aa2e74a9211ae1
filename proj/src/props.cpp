#include "dpcore/props.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "dpcore/rng.hpp"

namespace dpcore {

SeparatedInstance make_separated_instance(uint64_t seed, int min_batches,
                                          int max_batches) {
    auto rng = make_rng(derive_seed(seed, 0x5E9A));
    std::uniform_int_distribution<int> pick_clusters(2, 4);
    std::uniform_int_distribution<int> pick_dim(2, 6);

    SeparatedInstance inst;
    inst.seed = seed;
    inst.config.theta = 1.0;
    inst.config.alpha_mode = AlphaMode::Harmonic;

    const int clusters = pick_clusters(rng);
    const int dim = pick_dim(rng);
    std::uniform_int_distribution<int> pick_total(std::max(min_batches, clusters),
                                                  std::max(max_batches, clusters));
    const int total = pick_total(rng);

    // Centers on distinct coordinate axes, 10 theta from the origin and
    // >= 10*sqrt(2) theta from each other.
    std::vector<std::vector<double>> centers;
    for (int c = 0; c < clusters; ++c) {
        std::vector<double> center(static_cast<std::size_t>(dim), 0.0);
        center[static_cast<std::size_t>(c % dim)] = 10.0 * inst.config.theta * (1.0 + c / dim);
        centers.push_back(std::move(center));
    }

    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> radius(0.0, 0.3 * inst.config.theta);
    std::uniform_int_distribution<int> pick_member(0, clusters - 1);

    for (int i = 0; i < total; ++i) {
        // Every cluster gets at least one batch; the rest land anywhere.
        const int label = i < clusters ? i : pick_member(rng);
        std::vector<double> dir(static_cast<std::size_t>(dim));
        double n2 = 0.0;
        for (auto& x : dir) {
            x = unit(rng);
            n2 += x * x;
        }
        const double r = radius(rng) / std::sqrt(std::max(n2, 1e-300));
        auto mean = centers[static_cast<std::size_t>(label)];
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r * dir[k];
        inst.batch_means.push_back(std::move(mean));
        inst.ground_truth.push_back(label);
    }
    return inst;
}

PropsReport run_props_suite(int instances, uint64_t seed) {
    PropsReport report;
    report.instances = instances;

    for (int i = 0; i < instances; ++i) {
        const uint64_t inst_seed = derive_seed(seed, 0x1257, static_cast<uint64_t>(i));
        // Mix exhaustive (<= 7 batches) and sampled (up to 12) instances.
        const bool large = i % 5 == 4;
        const auto inst = large ? make_separated_instance(inst_seed, 8, 12)
                                : make_separated_instance(inst_seed, 4, 7);

        try {
            if (!check_prop1(inst.ground_truth, inst.batch_means, inst.config)) {
                std::ostringstream os;
                os << "prop1: wrong assignment on instance seed " << inst_seed;
                report.failures.push_back(os.str());
                continue;
            }
        } catch (const separation_error& e) {
            std::ostringstream os;
            os << "prop1: generated instance failed its own separation certificate, seed "
               << inst_seed << " (" << e.what() << ")";
            report.failures.push_back(os.str());
            continue;
        }

        const auto inv = check_prop2_order_invariance(inst.batch_means, inst.config,
                                                      /*exhaustive_limit=*/7,
                                                      /*sampled=*/100, inst_seed);
        report.permutations_checked += inv.permutations_checked;
        if (!inv.assignments_invariant || !inv.means_invariant || !inv.prompts_invariant) {
            std::ostringstream os;
            os << "prop2/3: order invariance violated on instance seed " << inst_seed
               << (inv.assignments_invariant ? "" : " [assignments]")
               << (inv.means_invariant ? "" : " [means]")
               << (inv.prompts_invariant ? "" : " [prompts]");
            report.failures.push_back(os.str());
        }
    }

    // The precondition gate itself: a blob wider than theta must raise.
    {
        std::vector<std::vector<double>> means = {{0.0, 0.0}, {2.0, 0.0}, {20.0, 0.0}};
        std::vector<int> truth = {0, 0, 1};
        SimplifiedConfig cfg;
        cfg.theta = 1.0;
        try {
            check_prop1(truth, means, cfg);
            report.failures.push_back("separation gate: diameter violation not raised");
        } catch (const separation_error&) {
            report.separation_gate_ok = true;
        }
    }
    return report;
}

void print_props_report(const PropsReport& report, std::ostream& out) {
    out << "instances: " << report.instances << "\n"
        << "permutations checked: " << report.permutations_checked << "\n"
        << "separation gate raises on violation: "
        << (report.separation_gate_ok ? "yes" : "NO") << "\n";
    for (const auto& f : report.failures) out << "FAIL " << f << "\n";
    out << (report.passed() ? "props: PASS" : "props: FAIL") << "\n";
}

}  // namespace dpcore
