#pragma once

#include <string>

#include "cxlsim/metrics.hpp"

namespace cxlsim {

// Per-metric ratios and deltas between two run reports (A over B).
// Kinds present in only one report are listed, not compared; a schema
// mismatch raises ReportError.
std::string compare_reports(const RunReport& a, const RunReport& b);

}  // namespace cxlsim
