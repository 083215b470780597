#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cav/app/report.hpp"

namespace cav::app {

/// "3", "1..10", "1,4,7" or a mix such as "1..3,9". Throws std::invalid_argument.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

enum class RunMode { Baseline, Optimal, Both };

struct RunSpec {
    std::string config;
    RunMode mode = RunMode::Both;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = "out";
    ReportFormat format = ReportFormat::Text;
    std::optional<double> horizon;
    bool write_traces = true;
    unsigned jobs = 0;  // 0: one per hardware thread
};

/// Trace file name for one run inside an output directory.
std::string trace_name(Mode mode, std::uint64_t seed);

/// Exit codes: 0 ok, 2 for a missing or invalid config or an unwritable output directory.
int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Rebuilds the report from the traces stored in `dir`.
int cmd_report(const std::string& config, const std::string& dir, ReportFormat format, std::ostream& out,
               std::ostream& err);

/// 0 when the trace has no rear-end violation and no merging-zone overlap, 1 otherwise, 2 on bad input.
int cmd_verify(const std::string& trace, const std::string& config, std::ostream& out, std::ostream& err);

struct BenchSpec {
    std::string trace;
    std::string config;
    std::string out_dir = "bench";
    RouteId ego_route = -1;  // -1: the config's test route
    double rate = 0.0;       // frames per second, <= 0 unthrottled
    double from = 0.0;       // replay window [from, from + duration) in trace time
    double duration = 0.0;   // <= 0: to the end of the trace
    std::int64_t delay_ms = 0;
    double drop = 0.0;
    std::uint64_t seed = 1;
};

/// Broker + replay + head unit on loopback, then the open-loop equivalence check against the
/// in-process controller. Without link impairment a deviation above 1e-6 m/s exits 1.
int cmd_bench(const BenchSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace cav::app
