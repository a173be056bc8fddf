#pragma once

#include <string>

#include "bfuse/metrics.hpp"

namespace bfuse {

// Published error rates of the prior consensus models, kept as reference
// constants for report footers only.
inline constexpr double kPriorConsensusEr = 0.170;
inline constexpr double kPriorSelectiveConsensusEr = 0.130;
inline constexpr double kPriorSelectiveConsensusCoverage = 0.87;

// Per-sample rows: id, probability, prediction (RB/NRB/abstain), label.
std::string report_to_csv(const EvalReport& report);

// Human-readable summary block; values printed with 4 decimal places.
std::string report_summary(const EvalReport& report);

void save_report(const std::string& csv_path, const std::string& summary_path,
                 const EvalReport& report);

}  // namespace bfuse
