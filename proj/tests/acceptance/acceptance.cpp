// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cav/app/commands.hpp"
#include "cav/app/report.hpp"
#include "cav/core/config.hpp"
#include "cav/sim/checks.hpp"
#include "cav/sim/metrics.hpp"
#include "cav/sim/network.hpp"
#include "cav/sim/simulator.hpp"
#include "cav/sim/trace.hpp"
#include "cav/trajectory/trajectory.hpp"
#include "cav/v2x/broker.hpp"
#include "cav/v2x/bsm.hpp"
#include "oracles/qp_oracle.hpp"

using namespace cav;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

CorridorConfig reference(Mode mode, double horizon, std::uint64_t seed)
{
    CorridorConfig cfg = load_config(reference_config_text());
    cfg.mode = mode;
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

// Runs f(i) for i in [0, n) on all hardware threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f)
{
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / fmt::format("cav_acceptance_{}_{}", ::getpid(), name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome oracle_equivalence()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> v0(2, 17.5), T(3, 20), stretch(0.5, 1.5), vf(2, 17.5);
    double worst_p = 0.0, worst_cost = 0.0;
    for (int i = 0; i < 200; ++i) {
        oracle::Problem pr;
        pr.v0 = v0(rng);
        pr.T = T(rng);
        pr.D = stretch(rng) * pr.v0 * pr.T;
        if (i % 2) pr.v_final = vf(rng);
        traj::BoundaryConditions bc;
        bc.v0 = pr.v0;
        bc.t0 = 10.0 * i;
        bc.p0 = 50.0;
        bc.p_mz = 50.0 + pr.D;
        bc.tm = bc.t0 + pr.T;
        bc.terminal_speed = pr.v_final;
        const auto tc = traj::solve_unconstrained(bc);
        pr.p0 = bc.p0;
        const auto sol = oracle::solve_equality(pr);
        for (std::size_t k = 0; k < sol.t.size(); ++k) {
            worst_p = std::max(worst_p, std::abs(traj::eval(tc, bc.t0 + sol.t[k]).p - sol.p[k]));
        }
        const double J = traj::control_effort(tc);
        if (sol.cost > 1e-9) worst_cost = std::max(worst_cost, std::abs(J - sol.cost) / sol.cost);
    }
    const double secs = seconds_since(t0);
    return {worst_p <= 1e-2 && worst_cost <= 0.01 && secs < 30,
            fmt::format("200 instances, max position gap {:.2e} m, max cost gap {:.3f}%, {:.1f} s", worst_p,
                        100 * worst_cost, secs)};
}

Outcome boundary_residuals()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> v0(0, 20), T(0.5, 40), D(5, 400), vf(0, 20), start(0, 10000);
    double worst = 0.0, worst_u = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        traj::BoundaryConditions bc;
        bc.t0 = start(rng);
        bc.tm = bc.t0 + T(rng);
        bc.p0 = 1000.0;
        bc.v0 = v0(rng);
        bc.p_mz = bc.p0 + D(rng);
        if (i % 2) bc.terminal_speed = vf(rng);
        const auto tc = traj::solve_unconstrained(bc);
        const traj::Sample a = traj::eval(tc, bc.t0);
        const traj::Sample b = traj::eval(tc, bc.tm);
        worst = std::max({worst, std::abs(a.p - bc.p0), std::abs(a.v - bc.v0), std::abs(b.p - bc.p_mz)});
        if (bc.terminal_speed) {
            worst = std::max(worst, std::abs(b.v - *bc.terminal_speed));
        } else {
            worst_u = std::max(worst_u, std::abs(b.u));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && worst_u <= 1e-9 && secs < 5,
            fmt::format("{} solves, max boundary residual {:.1e}, max |u(tm)| {:.1e}, {:.2f} s", n, worst, worst_u,
                        secs)};
}

Outcome scheduling_safety()
{
    const auto t0 = Clock::now();
    const std::size_t streams = 1000;
    std::vector<std::size_t> overlaps(streams), trace_overlaps(streams), rear(streams), truncations(streams),
        vehicles(streams);
    parallel_for(streams, [&](std::size_t i) {
        const CorridorConfig cfg = reference(Mode::Optimal, 150, 1000 + i);
        const sim::RunResult r = sim::run(cfg);
        const sim::Network net(cfg);
        for (const auto& occ : r.occupancy) overlaps[i] += coord::occupancy_check(occ, cfg.zone(occ.zone_z)).size();
        for (const auto& occ : sim::trace_occupancy(r.trace, net)) {
            trace_overlaps[i] += coord::occupancy_check(occ, cfg.zone(occ.zone_z)).size();
        }
        rear[i] = sim::rear_end_check(r.trace, net, cfg.headway_h).size();
        truncations[i] = r.counters.truncations;
        vehicles[i] = r.counters.spawned;
    });
    auto sum = [](const std::vector<std::size_t>& v) {
        std::size_t s = 0;
        for (auto x : v) s += x;
        return s;
    };
    const double secs = seconds_since(t0);
    const bool ok = sum(overlaps) == 0 && sum(trace_overlaps) == 0 && sum(rear) == 0 && secs < 120;
    return {ok, fmt::format("{} streams x 150 s, {} vehicles: {} scheduled overlaps, {} sampled overlaps, {} rear-end; "
                            "{} truncation events; {:.1f} s",
                            streams, sum(vehicles), sum(overlaps), sum(trace_overlaps), sum(rear), sum(truncations),
                            secs)};
}

Outcome improvement_direction()
{
    const auto t0 = Clock::now();
    const int seeds = 10;
    std::vector<sim::Metrics> base(seeds), opt(seeds);
    parallel_for(2 * seeds, [&](std::size_t k) {
        const std::size_t s = k / 2;
        const Mode mode = k % 2 ? Mode::Optimal : Mode::Baseline;
        const CorridorConfig cfg = reference(mode, 900, s + 1);
        (mode == Mode::Optimal ? opt : base)[s] = sim::compute_metrics(sim::run(cfg).trace, cfg);
    });
    const CorridorConfig cfg = reference(Mode::Optimal, 900, 1);
    const app::Report rep = app::build_report(cfg, base, opt);
    double corridor = 0, effort = 0, best_gain = -1e9;
    std::string best_zone;
    std::string zones;
    for (const auto& row : rep.rows) {
        if (row.metric == "travel_time" && row.column == "Corridor") corridor = row.improvement_pct;
        if (row.metric == "effort") effort = row.improvement_pct;
        if (row.metric == "travel_time" && row.column != "Corridor") {
            const double gain = row.baseline.mean - row.optimal.mean;
            zones += fmt::format(" {} {:.1f}s", row.column, gain);
            if (gain > best_gain) {
                best_gain = gain;
                best_zone = row.column;
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = corridor > 0 && effort > 0 && secs < 300;
    return {ok, fmt::format("10 seeds x 900 s: corridor time {:+.1f}%, effort {:+.1f}%; zone gains{}; largest {}{}; "
                            "{:.1f} s",
                            corridor, effort, zones, best_zone,
                            best_zone == "Roundabout" ? "" : " (deviation from the roundabout, documented)", secs)};
}

Outcome free_flow_neutrality()
{
    const auto t0 = Clock::now();
    double times[2] = {0, 0};
    for (Mode mode : {Mode::Baseline, Mode::Optimal}) {
        CorridorConfig cfg = reference(mode, 300, 1);
        for (auto& r : cfg.routes) r.flow = 0.0;
        sim::Simulator s(cfg);
        s.inject(cfg.routes.front().id);
        const sim::RunResult r = s.finish();
        const sim::Metrics m = sim::compute_metrics(r.trace, cfg);
        if (m.test_route_completed != 1) return {false, "single vehicle did not complete the corridor"};
        times[mode == Mode::Optimal] = m.mean_corridor_time;
    }
    const double rel = std::abs(times[1] - times[0]) / times[0];
    const double secs = seconds_since(t0);
    return {rel <= 0.02 && secs < 5,
            fmt::format("baseline {:.2f} s, optimal {:.2f} s, difference {:.2f}%, {:.2f} s", times[0], times[1],
                        100 * rel, secs)};
}

Outcome codec_and_broker()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        v2x::BsmFrame f;
        f.vehicle_id = static_cast<std::uint32_t>(rng());
        f.latitude = static_cast<std::int32_t>(rng());
        f.longitude = static_cast<std::int32_t>(rng());
        f.speed = static_cast<std::uint16_t>(rng());
        f.elevation = static_cast<std::int32_t>(rng());
        f.length = static_cast<std::uint16_t>(rng());
        f.width = static_cast<std::uint16_t>(rng() % 4);
        f.seq = static_cast<std::uint8_t>(rng());
        f.timestamp_ms = rng() & 0xffffffffu;
        if (v2x::decode_bsm(v2x::encode_bsm(f)) != f) ++mismatches;
    }

    v2x::Broker broker("127.0.0.1", 0);
    broker.start();
    v2x::Client sub = v2x::Client::connect("127.0.0.1", broker.port());
    sub.subscribe("bsm/#");
    sub.sync();
    const int n = 6000;  // 60 s at 100 Hz
    std::thread pub([&] {
        v2x::Client c = v2x::Client::connect("127.0.0.1", broker.port());
        auto next = Clock::now();
        for (int k = 0; k < n; ++k) {
            v2x::BsmFrame f;
            f.vehicle_id = static_cast<std::uint32_t>(k);
            f.timestamp_ms = static_cast<std::uint64_t>(k) * 10;
            const auto b = v2x::encode_bsm(f);
            c.publish("bsm/1", v2x::Bytes(b.begin(), b.end()));
            next += std::chrono::milliseconds(10);
            std::this_thread::sleep_until(next);
        }
        c.publish("bsm/end", {});
    });
    int in_order = 0;
    std::int64_t expected = 0;
    while (auto m = sub.receive()) {
        if (m->topic == "bsm/end") break;
        const auto id = static_cast<std::int64_t>(v2x::decode_bsm(m->payload).vehicle_id);
        if (id == expected) ++in_order;
        expected = id + 1;
    }
    pub.join();
    broker.stop();
    const double ratio = static_cast<double>(in_order) / n;
    const double secs = seconds_since(t0);
    return {mismatches == 0 && ratio >= 0.999 && secs < 120,
            fmt::format("10000 frames round-trip with {} mismatches; broker delivered {}/{} in order ({:.2f}%) at "
                        "100 Hz; {:.1f} s",
                        mismatches, in_order, n, 100 * ratio, secs)};
}

Outcome bench_equivalence()
{
    const auto t0 = Clock::now();
    const fs::path dir = scratch_dir("bench");
    const CorridorConfig cfg = reference(Mode::Optimal, 300, 1);
    sim::write_trace_file((dir / "trace.csv").string(), sim::run(cfg).trace);
    app::BenchSpec spec;
    spec.trace = (dir / "trace.csv").string();
    spec.out_dir = (dir / "out").string();
    spec.from = 200;
    spec.duration = 60;
    std::ostringstream out, err;
    const int rc = app::cmd_bench(spec, out, err);
    const double secs = seconds_since(t0);
    std::string summary = out.str();
    std::replace(summary.begin(), summary.end(), '\n', ' ');
    while (!summary.empty() && summary.back() == ' ') summary.pop_back();
    fs::remove_all(dir);
    return {rc == 0 && secs < 60, fmt::format("60 s window: {}; {:.1f} s", summary, secs)};
}

std::string file_digest(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    // FNV-1a 64
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : ss.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return fmt::format("{:016x}", h);
}

Outcome determinism()
{
    const auto t0 = Clock::now();
    const fs::path dir = scratch_dir("determinism");
    std::vector<std::string> digests[2];
    std::vector<std::string> names;
    for (int k = 0; k < 2; ++k) {
        app::RunSpec spec;
        spec.seeds = {3};
        spec.horizon = 600;
        spec.out_dir = (dir / std::to_string(k)).string();
        std::ostringstream out, err;
        if (app::cmd_run(spec, out, err) != 0) return {false, "run failed: " + err.str()};
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(spec.out_dir)) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            digests[k].push_back(f.filename().string() + ":" + file_digest(f));
            if (k == 0) names.push_back(f.filename().string());
        }
    }
    fs::remove_all(dir);
    const double secs = seconds_since(t0);
    return {digests[0] == digests[1] && !digests[0].empty() && secs < 60,
            fmt::format("{} files hashed twice ({}), {}; {:.1f} s", names.size(), fmt::join(names, ", "),
                        digests[0] == digests[1] ? "identical" : "DIFFERENT", secs)};
}

}  // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"trajectory oracle equivalence", oracle_equivalence},
        {"boundary and transversality residuals", boundary_residuals},
        {"scheduling safety", scheduling_safety},
        {"direction of improvement", improvement_direction},
        {"free-flow neutrality", free_flow_neutrality},
        {"codec and broker", codec_and_broker},
        {"open-loop bench equivalence", bench_equivalence},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << fmt::format("[{}] {}. {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
