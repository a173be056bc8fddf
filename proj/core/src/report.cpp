#include "bfuse/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bfuse/errors.hpp"

namespace bfuse {

namespace {

const char* class_name(int cls) {
    return cls == kClassRb ? "RB" : "NRB";
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "id,probability,prediction,label\n";
    char buf[64];
    for (const auto& row : report.per_sample) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.probability);
        out << row.id << ',' << buf << ','
            << (row.abstained ? "abstain" : class_name(row.predicted)) << ','
            << (row.label == 0 || row.label == 1 ? class_name(row.label) : "") << '\n';
    }
    return out.str();
}

std::string report_summary(const EvalReport& report) {
    std::ostringstream out;
    out << "samples   " << report.per_sample.size() << "\n";
    out << "scored    " << report.counts.total() << "\n";
    out << "TP " << report.counts.tp << "  FP " << report.counts.fp << "  TN "
        << report.counts.tn << "  FN " << report.counts.fn << "\n";
    out << "Sn        " << fixed4(report.sn) << "\n";
    out << "Sp        " << fixed4(report.sp) << "\n";
    out << "Er        " << fixed4(report.er) << "\n";
    out << "coverage  " << fixed4(report.coverage) << "\n";
    if (report.tau.has_value()) {
        out << "tau       " << fixed4(*report.tau) << "\n";
    }
    out << "reference prior consensus Er " << fixed4(kPriorConsensusEr)
        << " (full coverage), " << fixed4(kPriorSelectiveConsensusEr) << " at "
        << fixed4(kPriorSelectiveConsensusCoverage) << " coverage\n";
    return out.str();
}

void save_report(const std::string& csv_path, const std::string& summary_path,
                 const EvalReport& report) {
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw IoError("cannot write report CSV: " + csv_path);
    csv << report_to_csv(report);
    std::ofstream summary(summary_path, std::ios::trunc);
    if (!summary) throw IoError("cannot write report summary: " + summary_path);
    summary << report_summary(report);
}

}  // namespace bfuse
