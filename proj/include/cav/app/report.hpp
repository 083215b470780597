#pragma once

#include <string>
#include <vector>

#include "cav/core/config.hpp"
#include "cav/sim/metrics.hpp"

namespace cav::app {

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single seed
    std::size_t n = 0;
};

Stat summarize(const std::vector<double>& xs);

/// Positive when optimal is lower: (baseline - optimal) / baseline * 100.
double improvement(double baseline, double optimal);

struct ReportRow {
    std::string metric;  // "travel_time", "effort", ...
    std::string column;  // "On-Ramp", "SRZ", "Roundabout", "Corridor", or "" for scalar metrics
    std::string unit;
    Stat baseline;
    Stat optimal;
    double improvement_pct = 0.0;
};

struct Report {
    std::vector<ReportRow> rows;
    std::size_t baseline_runs = 0;
    std::size_t optimal_runs = 0;
};

enum class ReportFormat { Text, Columnar };

/// Per-seed metrics in, mean/std per column out. Either side may be empty (single-mode run).
Report build_report(const CorridorConfig& cfg, const std::vector<sim::Metrics>& baseline,
                    const std::vector<sim::Metrics>& optimal);

std::string format_report(const Report& report, ReportFormat format);

std::string zone_column(ZoneKind kind);

}  // namespace cav::app
