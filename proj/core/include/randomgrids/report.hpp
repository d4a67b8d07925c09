#pragma once

#include <string>
#include <vector>

#include "randomgrids/estimator.hpp"

namespace rgrids {

// All emitters are deterministic: key order is fixed, numbers use the
// shortest round-trip decimal form, NaN serializes as null.

std::string report_json(const EstimateResult& r);
std::string report_text(const EstimateResult& r);

// "nu,n,estimate,ci_half_width,abs_error,reference" header plus one row per
// sweep point.
std::string sweep_csv(const SweepResult& r);
// One-line {"slopes": {"<nu>": <order-or-null>, ...}} footer.
std::string slopes_json(const SweepResult& r);
std::string sweep_json(const SweepResult& r);  // {"rows": [...], "slopes": {...}}
std::string sweep_text(const SweepResult& r);

std::string variance_table_json(const std::vector<TermVarianceRow>& rows);
std::string variance_table_csv(const std::vector<TermVarianceRow>& rows);
std::string variance_table_text(const std::vector<TermVarianceRow>& rows);

}  // namespace rgrids
