#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dpcore {

enum class StreamKind { Csc, CdcDirichlet, Cdc2d };

struct StreamSpec {
    int num_domains = 0;
    std::vector<int> batches_per_domain;  // one entry per domain
    StreamKind kind = StreamKind::Csc;

    // CSC: optional block permutation (identity order when empty).
    std::vector<int> domain_order;

    // CdcDirichlet
    double delta = 1.0;
    int num_slots = 0;  // 0 = num_domains

    // Cdc2d
    std::vector<double> domain_probs;  // empty = uniform
    int max_run = 0;                   // 0 = unbounded

    uint64_t seed = 0;

    void validate() const;
    int total_batches() const;
};

struct StreamEntry {
    int domain = 0;
    int batch_id = 0;  // index into the domain's pool

    bool operator==(const StreamEntry&) const = default;
};

struct DomainStream {
    std::vector<StreamEntry> sequence;

    std::size_t size() const { return sequence.size(); }
};

DomainStream gen_csc(const StreamSpec& spec);
DomainStream gen_cdc_dirichlet(const StreamSpec& spec);
DomainStream gen_cdc_2d(const StreamSpec& spec);
// Dispatch on spec.kind.
DomainStream gen_stream(const StreamSpec& spec);

// CoTTA-style protocol helper: `count` random block permutations of M domains.
std::vector<std::vector<int>> random_domain_orders(int num_domains, int count,
                                                   uint64_t seed);

struct StreamDiagnostics {
    int switch_count = 0;
    std::map<int, int> run_length_histogram;  // run length -> occurrences
    std::vector<int> per_domain_counts;
};

StreamDiagnostics stream_diagnostics(const DomainStream& stream, int num_domains);

// CSV schema: batch_index,domain,batch_id
void write_stream_csv(const DomainStream& stream, std::ostream& out);
DomainStream read_stream_csv(std::istream& in);

}  // namespace dpcore
