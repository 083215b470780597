#include "cav/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <regex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cav/coordinator/coordinator.hpp"
#include "cav/sim/checks.hpp"
#include "cav/sim/simulator.hpp"
#include "cav/v2x/broker.hpp"
#include "cav/v2x/headunit.hpp"
#include "cav/v2x/replay.hpp"

namespace fs = std::filesystem;

namespace cav::app {

namespace {

std::uint64_t parse_u64(std::string_view s)
{
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw std::invalid_argument(fmt::format("bad seed '{}'", s));
    }
    return v;
}

// Empty path: the built-in reference corridor.
std::optional<CorridorConfig> load(const std::string& path, std::ostream& err)
{
    try {
        if (path.empty()) return load_config(reference_config_text());
        if (!fs::exists(path)) {
            err << fmt::format("error: config not found: {}\n", path);
            return std::nullopt;
        }
        return load_config_file(path);
    } catch (const ConfigError& e) {
        err << fmt::format("error: {}: {} (field '{}', line {})\n", path, e.what(), e.field(), e.line());
        return std::nullopt;
    }
}

bool write_file(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    f << text;
    return static_cast<bool>(f);
}

std::string metrics_row(std::string_view mode, std::uint64_t seed, const sim::Metrics& m,
                        const CorridorConfig& cfg)
{
    std::string zones;
    for (const auto& z : cfg.zones) {
        auto it = m.mean_zone_time.find(z.z);
        zones += fmt::format(",{:.6f}", it == m.mean_zone_time.end() ? 0.0 : it->second);
    }
    return fmt::format("{},{},{},{},{:.6f}{},{:.6f},{:.6f},{:.6f}\n", mode, seed, m.completed, m.test_route_completed,
                       m.mean_corridor_time, zones, m.mean_effort, m.mean_work, m.mean_stops);
}

std::string metrics_header(const CorridorConfig& cfg)
{
    std::string h = "mode,seed,completed,test_route_completed,corridor_time";
    for (const auto& z : cfg.zones) h += fmt::format(",zone{}_time", z.z);
    return h + ",effort,work,stops\n";
}

const char* report_name(ReportFormat f) { return f == ReportFormat::Text ? "report.txt" : "report.csv"; }

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view part(text.data() + pos, comma - pos);
        const std::size_t dots = part.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_u64(part));
        } else {
            const std::uint64_t a = parse_u64(part.substr(0, dots));
            const std::uint64_t b = parse_u64(part.substr(dots + 2));
            if (b < a) throw std::invalid_argument(fmt::format("empty seed range '{}'", part));
            for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
        }
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("no seeds");
    return out;
}

std::string trace_name(Mode mode, std::uint64_t seed) { return fmt::format("{}_seed{}.csv", to_string(mode), seed); }

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err)
{
    std::optional<CorridorConfig> base = load(spec.config, err);
    if (!base) return 2;
    if (spec.seeds.empty()) {
        err << "error: at least one seed is required\n";
        return 2;
    }
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    if (ec || !fs::is_directory(spec.out_dir)) {
        err << fmt::format("error: cannot create output directory {}\n", spec.out_dir);
        return 2;
    }
    if (spec.horizon) base->horizon = *spec.horizon;

    std::vector<Mode> modes;
    if (spec.mode != RunMode::Optimal) modes.push_back(Mode::Baseline);
    if (spec.mode != RunMode::Baseline) modes.push_back(Mode::Optimal);

    struct Job {
        Mode mode;
        std::uint64_t seed;
        sim::Metrics metrics;
        sim::RunCounters counters;
        std::exception_ptr error;
    };
    std::vector<Job> jobs;
    for (Mode m : modes) {
        for (std::uint64_t s : spec.seeds) jobs.push_back({m, s, {}, {}, nullptr});
    }

    // Independent runs share nothing, so seeds execute in parallel.
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            Job& j = jobs[i];
            try {
                CorridorConfig cfg = *base;
                cfg.mode = j.mode;
                cfg.seed = j.seed;
                sim::RunResult r = sim::run(cfg);
                if (spec.write_traces) sim::write_trace_file((fs::path(spec.out_dir) / trace_name(j.mode, j.seed)).string(), r.trace);
                j.metrics = sim::compute_metrics(r.trace, cfg);
                j.counters = r.counters;
            } catch (...) {
                j.error = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(spec.jobs ? spec.jobs : std::thread::hardware_concurrency(),
                                                                static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<sim::Metrics> baseline, optimal;
    std::string metrics_csv = metrics_header(*base);
    for (const Job& j : jobs) {
        if (j.error) {
            try {
                std::rethrow_exception(j.error);
            } catch (const std::exception& e) {
                err << fmt::format("error: {} seed {}: {}\n", to_string(j.mode), j.seed, e.what());
            }
            return 1;
        }
        metrics_csv += metrics_row(to_string(j.mode), j.seed, j.metrics, *base);
        (j.mode == Mode::Baseline ? baseline : optimal).push_back(j.metrics);
        spdlog::info("{} seed {}: spawned {} exited {} plans {} failures {} overrides {} truncations {}",
                     to_string(j.mode), j.seed, j.counters.spawned, j.counters.exited, j.counters.plans,
                     j.counters.plan_failures, j.counters.plan_overrides, j.counters.truncations);
    }
    const std::string report = format_report(build_report(*base, baseline, optimal), spec.format);
    if (!write_file(fs::path(spec.out_dir) / "metrics.csv", metrics_csv) ||
        !write_file(fs::path(spec.out_dir) / report_name(spec.format), report)) {
        err << fmt::format("error: cannot write to {}\n", spec.out_dir);
        return 2;
    }
    out << report;
    return 0;
}

int cmd_report(const std::string& config, const std::string& dir, ReportFormat format, std::ostream& out,
               std::ostream& err)
{
    std::optional<CorridorConfig> cfg = load(config, err);
    if (!cfg) return 2;
    if (!fs::is_directory(dir)) {
        err << fmt::format("error: no such directory {}\n", dir);
        return 2;
    }
    const std::regex name(R"((baseline|optimal)_seed(\d+)\.csv)");
    std::vector<std::tuple<Mode, std::uint64_t, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        const std::string fname = entry.path().filename().string();
        if (!std::regex_match(fname, m, name)) continue;
        files.emplace_back(m[1] == "baseline" ? Mode::Baseline : Mode::Optimal, parse_u64(m[2].str()), entry.path());
    }
    if (files.empty()) {
        err << fmt::format("error: no traces in {}\n", dir);
        return 2;
    }
    std::sort(files.begin(), files.end());
    std::vector<sim::Metrics> baseline, optimal;
    for (const auto& [mode, seed, path] : files) {
        try {
            const sim::Trace trace = sim::read_trace_file(path.string());
            (mode == Mode::Baseline ? baseline : optimal).push_back(sim::compute_metrics(trace, *cfg));
        } catch (const std::exception& e) {
            err << fmt::format("error: {}: {}\n", path.string(), e.what());
            return 2;
        }
    }
    out << format_report(build_report(*cfg, baseline, optimal), format);
    return 0;
}

int cmd_verify(const std::string& trace_path, const std::string& config, std::ostream& out, std::ostream& err)
{
    std::optional<CorridorConfig> cfg = load(config, err);
    if (!cfg) return 2;
    sim::Trace trace;
    try {
        trace = sim::read_trace_file(trace_path);
    } catch (const std::exception& e) {
        err << fmt::format("error: {}: {}\n", trace_path, e.what());
        return 2;
    }
    const sim::Network net(*cfg);
    const auto rear = sim::rear_end_check(trace, net, cfg->headway_h);
    const auto occ = sim::trace_occupancy(trace, net);
    std::size_t overlaps = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        for (const auto& p : coord::occupancy_check(occ[i], cfg->zones[i])) {
            ++overlaps;
            out << fmt::format("overlap zone {}: vehicles {} and {} share the merging zone over [{:.2f}, {:.2f})\n",
                               occ[i].zone_z, p.first, p.second, p.overlap_begin, p.overlap_end);
        }
    }
    for (const auto& v : rear) {
        out << fmt::format("rear-end t={:.2f}: vehicle {} is {:.3f} m behind {} (needs {:.3f} m)\n", v.t, v.follower,
                           v.gap, v.leader, v.required);
    }
    out << fmt::format("{} records, {} rear-end violations, {} merging-zone overlaps\n", trace.records.size(),
                       rear.size(), overlaps);
    return rear.empty() && overlaps == 0 ? 0 : 1;
}

int cmd_bench(const BenchSpec& spec, std::ostream& out, std::ostream& err)
{
    std::optional<CorridorConfig> cfg = load(spec.config, err);
    if (!cfg) return 2;
    if (!fs::exists(spec.trace)) {
        err << fmt::format("error: trace not found: {}\n", spec.trace);
        return 2;
    }
    sim::Trace trace;
    try {
        trace = sim::read_trace_file(spec.trace);
    } catch (const std::exception& e) {
        err << fmt::format("error: {}: {}\n", spec.trace, e.what());
        return 2;
    }
    if (spec.from > 0.0 || spec.duration > 0.0) {
        trace = sim::slice_trace(trace, spec.from,
                                 spec.duration > 0.0 ? spec.from + spec.duration : std::numeric_limits<double>::infinity());
    }
    RouteId ego = spec.ego_route;
    if (ego < 0) {
        ego = cfg->routes.front().id;
        for (const auto& r : cfg->routes) {
            if (r.test_route) ego = r.id;
        }
    }
    const v2x::ZoneTable table = v2x::zone_table_from_config(*cfg, ego);
    const v2x::LinkModel link{spec.delay_ms, spec.drop, spec.seed};

    std::optional<v2x::Broker> broker;
    try {
        broker.emplace("127.0.0.1", 0);
    } catch (const v2x::SocketError& e) {
        err << fmt::format("error: {}\n", e.what());
        return 2;
    }
    broker->start();

    std::promise<void> ready;
    auto ready_f = ready.get_future();
    std::optional<v2x::HeadUnit> unit;
    std::exception_ptr unit_error;
    std::thread head([&] {
        try {
            unit.emplace(v2x::run_headunit("127.0.0.1", broker->port(), table, link, [&] { ready.set_value(); }));
        } catch (...) {
            unit_error = std::current_exception();
            try {
                ready.set_value();
            } catch (const std::future_error&) {
            }
        }
    });
    ready_f.wait();
    v2x::ReplayStats rs;
    try {
        if (!unit_error) rs = v2x::replay_publish(trace, "127.0.0.1", broker->port(), spec.rate);
    } catch (const std::exception& e) {
        err << fmt::format("error: replay: {}\n", e.what());
        broker->stop();
        head.join();
        return 1;
    }
    head.join();
    broker->stop();
    if (unit_error || !unit) {
        try {
            std::rethrow_exception(unit_error);
        } catch (const std::exception& e) {
            err << fmt::format("error: head unit: {}\n", e.what());
        }
        return 1;
    }

    const auto reference = v2x::reference_commands(trace, table);
    const v2x::Equivalence eq = v2x::compare_commands(unit->commands(), reference);
    const v2x::HeadUnitStats st = unit->stats();
    const bool impaired = spec.delay_ms > 0 || spec.drop > 0.0;
    const bool equivalent = eq.missing == 0 && eq.max_dv <= 1e-6;

    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    {
        std::ofstream f(fs::path(spec.out_dir) / "commands.csv");
        v2x::write_commands(f, unit->commands());
    }
    const std::string summary = fmt::format(
        "frames published {} in {:.2f} s\n"
        "frames received {} decode errors {} link drops {} stale ticks {}\n"
        "ego plans {} plan failures {}\n"
        "commands {} reference {} compared {} missing {}\n"
        "max |v - v_ref| {:.3e} m/s\n"
        "link delay {} ms drop {:.3f}\n"
        "equivalent {}\n",
        rs.frames, rs.seconds, st.frames, st.decode_errors, st.link_drops, st.stale_ticks, st.plans, st.plan_failures,
        unit->commands().size(), reference.size(), eq.compared, eq.missing, eq.max_dv, spec.delay_ms, spec.drop,
        equivalent ? "yes" : "no");
    write_file(fs::path(spec.out_dir) / "equivalence.txt", summary);
    out << summary;
    return impaired || equivalent ? 0 : 1;
}

}  // namespace cav::app
