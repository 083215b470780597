#include "cav/app/report.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

#include <fmt/format.h>

namespace cav::app {

Stat summarize(const std::vector<double>& xs)
{
    Stat s;
    s.n = xs.size();
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

double improvement(double baseline, double optimal)
{
    if (baseline == 0.0) return 0.0;
    return (baseline - optimal) / baseline * 100.0;
}

std::string zone_column(ZoneKind kind)
{
    switch (kind) {
    case ZoneKind::Merge: return "On-Ramp";
    case ZoneKind::SpeedReduction: return "SRZ";
    case ZoneKind::Roundabout: return "Roundabout";
    }
    return "?";
}

Report build_report(const CorridorConfig& cfg, const std::vector<sim::Metrics>& baseline,
                    const std::vector<sim::Metrics>& optimal)
{
    Report rep;
    rep.baseline_runs = baseline.size();
    rep.optimal_runs = optimal.size();

    auto add = [&](std::string metric, std::string column, std::string unit,
                   const std::function<std::optional<double>(const sim::Metrics&)>& get) {
        // Runs where the quantity is undefined (no completed test-route vehicle) are left out.
        auto collect = [&](const std::vector<sim::Metrics>& runs) {
            std::vector<double> xs;
            for (const auto& m : runs) {
                if (auto x = get(m)) xs.push_back(*x);
            }
            return summarize(xs);
        };
        ReportRow row{std::move(metric), std::move(column), std::move(unit), collect(baseline), collect(optimal), 0.0};
        if (row.baseline.n > 0 && row.optimal.n > 0 && row.metric != "completed") row.improvement_pct = improvement(row.baseline.mean, row.optimal.mean);
        rep.rows.push_back(std::move(row));
    };

    for (const auto& z : cfg.zones) {
        const ZoneId id = z.z;
        add("travel_time", zone_column(z.kind), "s", [id](const sim::Metrics& m) -> std::optional<double> {
            auto it = m.mean_zone_time.find(id);
            if (it == m.mean_zone_time.end()) return std::nullopt;
            return it->second;
        });
    }
    add("travel_time", "Corridor", "s", [](const sim::Metrics& m) -> std::optional<double> {
        if (m.test_route_completed == 0) return std::nullopt;
        return m.mean_corridor_time;
    });
    auto per_vehicle = [](double sim::Metrics::*field) {
        return [field](const sim::Metrics& m) -> std::optional<double> {
            if (m.completed == 0) return std::nullopt;
            return m.*field;
        };
    };
    add("effort", "", "m2/s3", per_vehicle(&sim::Metrics::mean_effort));
    add("work", "", "J/kg", per_vehicle(&sim::Metrics::mean_work));
    add("stops", "", "1", per_vehicle(&sim::Metrics::mean_stops));
    add("completed", "", "veh", [](const sim::Metrics& m) -> std::optional<double> { return static_cast<double>(m.completed); });
    return rep;
}

namespace {

std::string label(const ReportRow& r)
{
    if (r.metric == "travel_time") return r.column;
    if (r.metric == "effort") return "Effort int(u^2)";
    if (r.metric == "work") return "Positive work";
    if (r.metric == "stops") return "Stops/veh";
    if (r.metric == "completed") return "Completed";
    return r.metric;
}

std::string cell(const Stat& s)
{
    if (s.n == 0) return "-";
    if (s.n == 1) return fmt::format("{:.2f}", s.mean);
    return fmt::format("{:.2f} ± {:.2f}", s.mean, s.stddev);
}

}  // namespace

std::string format_report(const Report& rep, ReportFormat format)
{
    std::string out;
    const bool both = rep.baseline_runs > 0 && rep.optimal_runs > 0;
    if (format == ReportFormat::Columnar) {
        out += "metric,column,unit,baseline_mean,baseline_std,optimal_mean,optimal_std,improvement_pct\n";
        for (const auto& r : rep.rows) {
            auto num = [](const Stat& s, double v) { return s.n ? fmt::format("{:.6f}", v) : std::string(); };
            out += fmt::format("{},{},{},{},{},{},{},{}\n", r.metric, r.column, r.unit, num(r.baseline, r.baseline.mean),
                               num(r.baseline, r.baseline.stddev), num(r.optimal, r.optimal.mean),
                               num(r.optimal, r.optimal.stddev), both ? fmt::format("{:.4f}", r.improvement_pct) : "");
        }
        return out;
    }

    out += fmt::format("Runs: {} baseline, {} optimal (mean ± sample std across seeds)\n\n", rep.baseline_runs,
                       rep.optimal_runs);
    auto table = [&](const std::string& title, bool travel) {
        out += title + "\n";
        out += fmt::format("{:<18}{:>22}{:>22}{:>16}\n", "", "Baseline", "Optimal", "Improvement [%]");
        for (const auto& r : rep.rows) {
            if ((r.metric == "travel_time") != travel) continue;
            out += fmt::format("{:<18}{:>22}{:>22}{:>16}\n", label(r), cell(r.baseline), cell(r.optimal),
                               both && r.metric != "completed" ? fmt::format("{:.1f}", r.improvement_pct) : "-");
        }
        out += "\n";
    };
    table("Travel time [s]", true);
    table("Energy proxy and stops (per vehicle)", false);
    return out;
}

}  // namespace cav::app
