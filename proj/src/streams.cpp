#include "dpcore/streams.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dpcore/rng.hpp"

namespace dpcore {

void StreamSpec::validate() const {
    if (num_domains < 1) throw std::invalid_argument("StreamSpec: num_domains must be >= 1");
    if (static_cast<int>(batches_per_domain.size()) != num_domains)
        throw std::invalid_argument("StreamSpec: batches_per_domain size mismatch");
    for (int c : batches_per_domain)
        if (c < 0) throw std::invalid_argument("StreamSpec: negative batch count");
    if (kind == StreamKind::CdcDirichlet && delta <= 0.0)
        throw std::invalid_argument("StreamSpec: delta must be > 0");
    if (!domain_probs.empty()) {
        if (static_cast<int>(domain_probs.size()) != num_domains)
            throw std::invalid_argument("StreamSpec: domain_probs size mismatch");
        double total = 0.0;
        for (double p : domain_probs) {
            if (p <= 0.0) throw std::invalid_argument("StreamSpec: domain_probs must be > 0");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("StreamSpec: domain_probs must sum to 1");
    }
    if (!domain_order.empty()) {
        if (static_cast<int>(domain_order.size()) != num_domains)
            throw std::invalid_argument("StreamSpec: domain_order size mismatch");
        std::vector<bool> seen(num_domains, false);
        for (int d : domain_order) {
            if (d < 0 || d >= num_domains || seen[d])
                throw std::invalid_argument("StreamSpec: domain_order is not a permutation");
            seen[d] = true;
        }
    }
}

int StreamSpec::total_batches() const {
    return std::accumulate(batches_per_domain.begin(), batches_per_domain.end(), 0);
}

DomainStream gen_csc(const StreamSpec& spec) {
    spec.validate();
    DomainStream stream;
    stream.sequence.reserve(static_cast<std::size_t>(spec.total_batches()));
    std::vector<int> order(spec.domain_order);
    if (order.empty()) {
        order.resize(static_cast<std::size_t>(spec.num_domains));
        std::iota(order.begin(), order.end(), 0);
    }
    for (int d : order)
        for (int b = 0; b < spec.batches_per_domain[static_cast<std::size_t>(d)]; ++b)
            stream.sequence.push_back({d, b});
    return stream;
}

namespace {

// Dirichlet proportions in log space so tiny concentration parameters do not
// underflow: log G_i = log Gamma(delta + 1) + log(U_i) / delta.
std::vector<double> dirichlet_proportions(Rng& rng, int m, double delta) {
    std::gamma_distribution<double> gamma(delta + 1.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> log_g(static_cast<std::size_t>(m));
    for (auto& lg : log_g) {
        double g = gamma(rng);
        double u = unif(rng);
        while (g <= 0.0) g = gamma(rng);
        while (u <= 0.0) u = unif(rng);
        lg = std::log(g) + std::log(u) / delta;
    }
    const double hi = *std::max_element(log_g.begin(), log_g.end());
    std::vector<double> p(log_g.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(log_g[i] - hi);
        total += p[i];
    }
    for (auto& x : p) x /= total;
    return p;
}

// Largest-remainder apportionment of `cap` slots to proportions `p`, capped
// by the remaining pool sizes; any deficit goes to the domains with the most
// batches left (ties broken by index).
std::vector<int> apportion(const std::vector<double>& p, const std::vector<int>& remaining,
                           int cap) {
    const std::size_t m = p.size();
    std::vector<int> alloc(m, 0);
    std::vector<std::pair<double, std::size_t>> rema(m);
    int assigned = 0;
    for (std::size_t d = 0; d < m; ++d) {
        const double raw = p[d] * cap;
        alloc[d] = std::min(static_cast<int>(std::floor(raw)), remaining[d]);
        assigned += alloc[d];
        rema[d] = {raw - std::floor(raw), d};
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (const auto& [frac, d] : rema) {
        (void)frac;
        if (assigned >= cap) break;
        if (alloc[d] < remaining[d]) {
            ++alloc[d];
            ++assigned;
        }
    }
    // Pools may still have slack the proportions did not cover.
    while (assigned < cap) {
        std::size_t best = m;
        int best_left = 0;
        for (std::size_t d = 0; d < m; ++d) {
            const int left = remaining[d] - alloc[d];
            if (left > best_left) {
                best_left = left;
                best = d;
            }
        }
        if (best == m) break;
        ++alloc[best];
        ++assigned;
    }
    return alloc;
}

}  // namespace

DomainStream gen_cdc_dirichlet(const StreamSpec& spec) {
    spec.validate();
    const int m = spec.num_domains;
    const int total = spec.total_batches();
    const int slots = spec.num_slots > 0 ? spec.num_slots : m;

    auto rng = make_rng(derive_seed(spec.seed, 0xD121));
    std::vector<int> remaining = spec.batches_per_domain;
    std::vector<int> next_id(static_cast<std::size_t>(m), 0);

    DomainStream stream;
    stream.sequence.reserve(static_cast<std::size_t>(total));

    int emitted = 0;
    for (int s = 0; s < slots && emitted < total; ++s) {
        int cap = total / slots + (s < total % slots ? 1 : 0);
        cap = std::min(cap, total - emitted);
        const auto proportions = dirichlet_proportions(rng, m, spec.delta);
        auto alloc = apportion(proportions, remaining, cap);

        std::vector<int> present;
        for (int d = 0; d < m; ++d)
            if (alloc[static_cast<std::size_t>(d)] > 0) present.push_back(d);
        std::shuffle(present.begin(), present.end(), rng);

        for (int d : present) {
            const auto du = static_cast<std::size_t>(d);
            for (int k = 0; k < alloc[du]; ++k)
                stream.sequence.push_back({d, next_id[du]++});
            remaining[du] -= alloc[du];
            emitted += alloc[du];
        }
    }
    // Trailing slack (possible only if every slot under-filled): flush pools.
    for (int d = 0; d < m; ++d) {
        const auto du = static_cast<std::size_t>(d);
        while (remaining[du] > 0) {
            stream.sequence.push_back({d, next_id[du]++});
            --remaining[du];
        }
    }
    return stream;
}

DomainStream gen_cdc_2d(const StreamSpec& spec) {
    spec.validate();
    const int m = spec.num_domains;
    auto rng = make_rng(derive_seed(spec.seed, 0xC2D));
    std::vector<int> remaining = spec.batches_per_domain;
    std::vector<int> next_id(static_cast<std::size_t>(m), 0);
    int left = spec.total_batches();

    std::vector<double> probs = spec.domain_probs;
    if (probs.empty())
        probs.assign(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m));
    std::discrete_distribution<int> pick(probs.begin(), probs.end());

    DomainStream stream;
    stream.sequence.reserve(static_cast<std::size_t>(left));
    while (left > 0) {
        int d = pick(rng);
        // Reselect until a domain with batches left comes up.
        while (remaining[static_cast<std::size_t>(d)] == 0) d = pick(rng);
        const auto du = static_cast<std::size_t>(d);
        int hi = remaining[du];
        if (spec.max_run > 0) hi = std::min(hi, spec.max_run);
        std::uniform_int_distribution<int> run_len(1, hi);
        const int run = run_len(rng);
        for (int k = 0; k < run; ++k) stream.sequence.push_back({d, next_id[du]++});
        remaining[du] -= run;
        left -= run;
    }
    return stream;
}

DomainStream gen_stream(const StreamSpec& spec) {
    switch (spec.kind) {
        case StreamKind::Csc: return gen_csc(spec);
        case StreamKind::CdcDirichlet: return gen_cdc_dirichlet(spec);
        case StreamKind::Cdc2d: return gen_cdc_2d(spec);
    }
    throw std::invalid_argument("gen_stream: unknown kind");
}

std::vector<std::vector<int>> random_domain_orders(int num_domains, int count,
                                                   uint64_t seed) {
    std::vector<std::vector<int>> orders;
    orders.reserve(static_cast<std::size_t>(count));
    auto rng = make_rng(derive_seed(seed, 0x08DE8));
    std::vector<int> order(static_cast<std::size_t>(num_domains));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < count; ++i) {
        std::shuffle(order.begin(), order.end(), rng);
        orders.push_back(order);
    }
    return orders;
}

StreamDiagnostics stream_diagnostics(const DomainStream& stream, int num_domains) {
    StreamDiagnostics diag;
    diag.per_domain_counts.assign(static_cast<std::size_t>(num_domains), 0);
    int run = 0;
    for (std::size_t i = 0; i < stream.sequence.size(); ++i) {
        const auto& e = stream.sequence[i];
        if (e.domain < 0 || e.domain >= num_domains)
            throw std::invalid_argument("stream_diagnostics: domain out of range");
        diag.per_domain_counts[static_cast<std::size_t>(e.domain)] += 1;
        ++run;
        const bool last = i + 1 == stream.sequence.size();
        if (last || stream.sequence[i + 1].domain != e.domain) {
            diag.run_length_histogram[run] += 1;
            if (!last) diag.switch_count += 1;
            run = 0;
        }
    }
    return diag;
}

void write_stream_csv(const DomainStream& stream, std::ostream& out) {
    out << "batch_index,domain,batch_id\n";
    for (std::size_t i = 0; i < stream.sequence.size(); ++i)
        out << i << ',' << stream.sequence[i].domain << ',' << stream.sequence[i].batch_id
            << '\n';
}

DomainStream read_stream_csv(std::istream& in) {
    DomainStream stream;
    std::string line;
    if (!std::getline(in, line) || line.rfind("batch_index,domain,batch_id", 0) != 0)
        throw std::invalid_argument("read_stream_csv: bad header");
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        StreamEntry e;
        if (!std::getline(row, field, ',')) throw std::invalid_argument("read_stream_csv: bad row");
        if (static_cast<std::size_t>(std::stoul(field)) != expected)
            throw std::invalid_argument("read_stream_csv: batch_index out of order");
        if (!std::getline(row, field, ',')) throw std::invalid_argument("read_stream_csv: bad row");
        e.domain = std::stoi(field);
        if (!std::getline(row, field, ',')) throw std::invalid_argument("read_stream_csv: bad row");
        e.batch_id = std::stoi(field);
        stream.sequence.push_back(e);
        ++expected;
    }
    return stream;
}

}  // namespace dpcore
