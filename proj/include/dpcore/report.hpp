#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "dpcore/runner.hpp"

namespace dpcore {

inline constexpr int kReportSchemaVersion = 1;

// One row per batch:
// index,true_domain,path,ratio,d_pre,d_post,error,K,fp,bp
// Optional fields print as empty cells.
void write_trace_csv(const RunReport& report, std::ostream& out);

// Summary aggregates plus the coreset snapshot and the resolved config echo.
// Key order is alphabetical (nlohmann object), so identical runs produce
// byte-identical dumps.
nlohmann::json summary_json(const RunReport& report, const nlohmann::json& config_echo);

std::string path_name(BatchPath path);

}  // namespace dpcore
