#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpcore/simplified.hpp"

namespace dpcore {

// Randomly constructed well-separated instance: tight blobs of batch means
// with ground-truth labels, certified before use.
struct SeparatedInstance {
    std::vector<std::vector<double>> batch_means;
    std::vector<int> ground_truth;
    SimplifiedConfig config;
    uint64_t seed = 0;
};

// 2-4 clusters, dimension 2-6, blob radius <= 0.3 theta, centers >= 10 theta
// apart. `max_batches` <= 7 keeps permutation checks exhaustive.
SeparatedInstance make_separated_instance(uint64_t seed, int min_batches = 4,
                                          int max_batches = 7);

struct PropsReport {
    int instances = 0;
    long permutations_checked = 0;
    bool separation_gate_ok = false;  // diameter violations must raise
    std::vector<std::string> failures;  // one line per violated property

    bool passed() const { return failures.empty() && separation_gate_ok; }
};

// The full harness: check_prop1 + order invariance (+ harmonic mean identity
// and recomputed-prompt invariance) on `instances` generated instances, plus
// the precondition-gate self-test.
PropsReport run_props_suite(int instances = 50, uint64_t seed = 20240501);

void print_props_report(const PropsReport& report, std::ostream& out);

}  // namespace dpcore
