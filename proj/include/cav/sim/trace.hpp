#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cav/core/types.hpp"

namespace cav::sim {

/// One (step, vehicle) sample. u is the control applied over [t, t + dt); the record written when a
/// vehicle leaves its route carries u = 0. zone is 0 outside every CZ/MZ.
struct TraceRecord {
    double t = 0.0;
    VehicleId id = 0;
    RouteId route = 0;
    double s = 0.0;
    double v = 0.0;
    double u = 0.0;
    int zone = 0;
    double dist_to_mz = 0.0;  // to the current or next MZ entry, 0 inside an MZ or past the last one
    std::int64_t tm_ms = -1;  // scheduled merging time of the active plan, -1 when none

    bool operator==(const TraceRecord&) const = default;
};

struct Trace {
    double dt = 0.1;
    std::vector<TraceRecord> records;
};

/// Rounds to the 1e-4 grid the CSV format carries, so in-memory and reloaded traces agree exactly.
double quantize(double x);
double quantize_dm(double x);

class TraceFormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Columns: t,id,route,s,v,u,zone,dist_to_mz,tm_ms. A leading "# dt=<seconds>" line carries the step.
void write_trace(std::ostream& out, const Trace& trace);
void write_trace_file(const std::string& path, const Trace& trace);
Trace read_trace(std::istream& in);
Trace read_trace_file(const std::string& path);

/// Records with from <= t < to.
Trace slice_trace(const Trace& trace, double from, double to);

}  // namespace cav::sim
