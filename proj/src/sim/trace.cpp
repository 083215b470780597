#include "cav/sim/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace cav::sim {

double quantize(double x)
{
    const double q = std::round(x * 1e4) / 1e4;
    return q == 0.0 ? 0.0 : q;  // no negative zero in the output
}

double quantize_dm(double x)
{
    const double q = std::round(x * 10.0) / 10.0;
    return q == 0.0 ? 0.0 : q;
}

void write_trace(std::ostream& out, const Trace& trace)
{
    out << fmt::format("# dt={:.17g}\n", trace.dt);
    out << "t,id,route,s,v,u,zone,dist_to_mz,tm_ms\n";
    std::string buf;
    for (const TraceRecord& r : trace.records) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{:.4f},{},{},{:.4f},{:.4f},{:.4f},{},{:.1f},{}\n", r.t, r.id, r.route, r.s,
                       r.v, r.u, r.zone, r.dist_to_mz, r.tm_ms);
        out << buf;
    }
}

void write_trace_file(const std::string& path, const Trace& trace)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file " + path);
    write_trace(out, trace);
    if (!out) throw std::runtime_error("failed writing trace file " + path);
}

namespace {

template <class T>
T field(std::string_view text, int line, const char* name)
{
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw TraceFormatError(fmt::format("line {}: bad {} value '{}'", line, name, text));
    }
    return value;
}

}  // namespace

Trace read_trace(std::istream& in)
{
    Trace trace;
    std::string line;
    int n = 0;
    bool header = false;
    static constexpr const char* names[] = {"t", "id", "route", "s", "v", "u", "zone", "dist_to_mz", "tm_ms"};
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# dt=", 0) == 0) {
            trace.dt = field<double>(std::string_view(line).substr(5), n, "dt");
            continue;
        }
        if (!header) {
            if (line != "t,id,route,s,v,u,zone,dist_to_mz,tm_ms") {
                throw TraceFormatError(fmt::format("line {}: unexpected header '{}'", n, line));
            }
            header = true;
            continue;
        }
        std::string_view cols[9];
        std::size_t start = 0;
        int c = 0;
        for (; c < 9; ++c) {
            const std::size_t comma = line.find(',', start);
            if (c < 8 && comma == std::string::npos) break;
            cols[c] = std::string_view(line).substr(start, c < 8 ? comma - start : std::string::npos);
            start = comma + 1;
        }
        if (c != 9 || cols[8].find(',') != std::string_view::npos) {
            throw TraceFormatError(fmt::format("line {}: expected 9 columns", n));
        }
        TraceRecord r;
        r.t = field<double>(cols[0], n, names[0]);
        r.id = field<VehicleId>(cols[1], n, names[1]);
        r.route = field<RouteId>(cols[2], n, names[2]);
        r.s = field<double>(cols[3], n, names[3]);
        r.v = field<double>(cols[4], n, names[4]);
        r.u = field<double>(cols[5], n, names[5]);
        r.zone = field<int>(cols[6], n, names[6]);
        r.dist_to_mz = field<double>(cols[7], n, names[7]);
        r.tm_ms = field<std::int64_t>(cols[8], n, names[8]);
        trace.records.push_back(r);
    }
    if (!header) throw TraceFormatError("missing header row");
    return trace;
}

Trace read_trace_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file " + path);
    return read_trace(in);
}

Trace slice_trace(const Trace& trace, double from, double to)
{
    Trace out{trace.dt, {}};
    for (const auto& r : trace.records) {
        if (r.t >= from && r.t < to) out.records.push_back(r);
    }
    return out;
}

}  // namespace cav::sim
