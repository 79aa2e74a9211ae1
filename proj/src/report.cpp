#include "dpcore/report.hpp"

#include <ostream>
#include <sstream>

namespace dpcore {

std::string path_name(BatchPath path) {
    switch (path) {
        case BatchPath::Scratch: return "scratch";
        case BatchPath::Refine: return "refine";
        case BatchPath::NoAdapt: return "noadapt";
    }
    return "?";
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

void write_trace_csv(const RunReport& report, std::ostream& out) {
    out << "index,true_domain,path,ratio,d_pre,d_post,error,K,fp,bp\n";
    for (const auto& r : report.batches) {
        out << r.index << ',' << r.true_domain << ',' << path_name(r.path) << ','
            << opt(r.ratio) << ',' << opt(r.d_pre) << ',' << opt(r.d_post) << ','
            << num(r.error) << ',' << r.coreset_size << ',' << r.fp << ',' << r.bp << '\n';
    }
}

nlohmann::json summary_json(const RunReport& report, const nlohmann::json& config_echo) {
    nlohmann::json per_domain = nlohmann::json::object();
    for (const auto& [domain, err] : report.per_domain_error)
        per_domain[std::to_string(domain)] = err;

    nlohmann::json j{
        {"schema_version", kReportSchemaVersion},
        {"num_batches", report.batches.size()},
        {"overall_error", report.overall_error},
        {"per_domain_error", std::move(per_domain)},
        {"final_coreset_size", report.final_coreset_size},
        {"total_fp", report.total_fp},
        {"total_bp", report.total_bp},
        {"mean_fp", report.mean_fp},
        {"mean_bp", report.mean_bp},
        {"scratch_count", report.scratch_count},
        {"refine_count", report.refine_count},
        {"noadapt_count", report.noadapt_count},
        {"coreset", nlohmann::json::parse(coreset_to_json(report.final_coreset))},
        {"config", config_echo},
    };
    return j;
}

}  // namespace dpcore
