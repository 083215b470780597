#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cav/app/commands.hpp"
#include "cav/sim/trace.hpp"
#include "cav/v2x/broker.hpp"
#include "cav/v2x/headunit.hpp"
#include "cav/v2x/replay.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

cav::app::ReportFormat parse_format(const std::string& s)
{
    return s == "columnar" ? cav::app::ReportFormat::Columnar : cav::app::ReportFormat::Text;
}

}  // namespace

int main(int argc, char** argv)
{
    // Logs go to stderr so stdout stays the report; CAV_LOG_LEVEL=debug|info|warn|... overrides.
    spdlog::set_default_logger(spdlog::stderr_color_mt("cavsim"));
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("CAV_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(lvl));

    CLI::App app{"Coordinated merging of connected automated vehicles along a three-zone corridor"};
    app.require_subcommand(1);

    std::string config;
    std::string mode = "both";
    std::string seeds = "1";
    std::string out_dir = "out";
    std::string format = "text";
    double horizon = 0.0;
    bool no_traces = false;
    unsigned jobs = 0;
    auto* run = app.add_subcommand("run", "simulate baseline and/or optimal mode and write traces, metrics and a report");
    run->add_option("-c,--config", config, "corridor YAML (default: built-in reference corridor)");
    run->add_option("-m,--mode", mode, "baseline | optimal | both")->check(CLI::IsMember({"baseline", "optimal", "both"}));
    run->add_option("-s,--seeds", seeds, "seed list, e.g. 1..10 or 1,3,5");
    run->add_option("-o,--out", out_dir, "output directory");
    run->add_option("-f,--format", format, "text | columnar")->check(CLI::IsMember({"text", "columnar"}));
    run->add_option("--horizon", horizon, "override the simulated horizon [s]");
    run->add_flag("--no-traces", no_traces, "skip writing per-run trace files");
    run->add_option("-j,--jobs", jobs, "parallel runs (0: hardware threads)");

    std::string dir;
    auto* report = app.add_subcommand("report", "rebuild the report from traces stored by run");
    report->add_option("-c,--config", config, "corridor YAML (default: built-in reference corridor)");
    report->add_option("dir", dir, "directory holding <mode>_seed<k>.csv traces")->required();
    report->add_option("-f,--format", format, "text | columnar")->check(CLI::IsMember({"text", "columnar"}));

    std::string trace;
    auto* verify = app.add_subcommand("verify", "rear-end and merging-zone occupancy checks on a trace (exit 0 when clean)");
    verify->add_option("trace", trace, "trace file")->required();
    verify->add_option("-c,--config", config, "corridor YAML (default: built-in reference corridor)");

    cav::app::BenchSpec bench_spec;
    auto* bench = app.add_subcommand("bench", "broker + replay + head unit on loopback with the open-loop equivalence check");
    bench->add_option("trace", bench_spec.trace, "trace file to replay")->required();
    bench->add_option("-c,--config", bench_spec.config, "corridor YAML (default: built-in reference corridor)");
    bench->add_option("-o,--out", bench_spec.out_dir, "output directory");
    bench->add_option("--ego-route", bench_spec.ego_route, "ego route id (default: the test route)");
    bench->add_option("--rate", bench_spec.rate, "replay frames per second (0: unthrottled)");
    bench->add_option("--from", bench_spec.from, "replay window start in trace time [s]");
    bench->add_option("--duration", bench_spec.duration, "replay window length [s] (0: to the end)");
    bench->add_option("--delay-ms", bench_spec.delay_ms, "injected link delay at the head unit");
    bench->add_option("--drop", bench_spec.drop, "injected drop probability")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--link-seed", bench_spec.seed, "seed for injected drops");

    std::string host = "127.0.0.1";
    std::uint16_t port = 7600;
    auto* broker = app.add_subcommand("broker", "run the topic broker until interrupted");
    broker->add_option("--bind", host, "bind address");
    broker->add_option("-p,--port", port, "port");

    double rate = 100.0;
    auto* replay = app.add_subcommand("replay", "publish a trace as BSMs on bsm/<zone>");
    replay->add_option("trace", trace, "trace file")->required();
    replay->add_option("--host", host, "broker address");
    replay->add_option("-p,--port", port, "broker port");
    replay->add_option("--rate", rate, "frames per second (0: unthrottled)");

    std::string zones;
    std::string commands_out;
    cav::v2x::LinkModel link;
    auto* headunit = app.add_subcommand("headunit", "subscribe to BSMs and emit ego speed commands");
    headunit->add_option("--host", host, "broker address");
    headunit->add_option("-p,--port", port, "broker port");
    headunit->add_option("-z,--zones", zones, "zone table file (see zone-table)")->required();
    headunit->add_option("-o,--out", commands_out, "command stream file (default: stdout)");
    headunit->add_option("--delay-ms", link.delay_ms, "injected link delay");
    headunit->add_option("--drop", link.drop, "injected drop probability")->check(CLI::Range(0.0, 1.0));

    cav::RouteId route = -1;
    auto* zone_table = app.add_subcommand("zone-table", "print the head unit's zone table for a route");
    zone_table->add_option("-c,--config", config, "corridor YAML (default: built-in reference corridor)");
    zone_table->add_option("-r,--route", route, "ego route id (default: the test route)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            cav::app::RunSpec spec;
            spec.config = config;
            spec.mode = mode == "baseline" ? cav::app::RunMode::Baseline
                        : mode == "optimal" ? cav::app::RunMode::Optimal
                                            : cav::app::RunMode::Both;
            try {
                spec.seeds = cav::app::parse_seeds(seeds);
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
            spec.out_dir = out_dir;
            spec.format = parse_format(format);
            if (horizon > 0.0) spec.horizon = horizon;
            spec.write_traces = !no_traces;
            spec.jobs = jobs;
            return cav::app::cmd_run(spec, std::cout, std::cerr);
        }
        if (*report) return cav::app::cmd_report(config, dir, parse_format(format), std::cout, std::cerr);
        if (*verify) return cav::app::cmd_verify(trace, config, std::cout, std::cerr);
        if (*bench) return cav::app::cmd_bench(bench_spec, std::cout, std::cerr);
        if (*broker) {
            cav::v2x::Broker b(host, port);
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            b.start();
            std::cerr << "broker listening on " << host << ":" << b.port() << "\n";
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            b.stop();
            const auto st = b.stats();
            std::cerr << "published " << st.published << " delivered " << st.delivered << " unmatched " << st.unmatched
                      << " malformed " << st.malformed << "\n";
            return 0;
        }
        if (*replay) {
            const auto st = cav::v2x::replay_publish(cav::sim::read_trace_file(trace), host, port, rate);
            std::cerr << "published " << st.frames << " frames in " << st.seconds << " s\n";
            return 0;
        }
        if (*headunit) {
            const auto table = cav::v2x::load_zone_table_file(zones);
            const auto unit = cav::v2x::run_headunit(host, port, table, link);
            if (commands_out.empty()) {
                cav::v2x::write_commands(std::cout, unit.commands());
            } else {
                std::ofstream f(commands_out);
                cav::v2x::write_commands(f, unit.commands());
            }
            const auto st = unit.stats();
            std::cerr << "frames " << st.frames << " decode errors " << st.decode_errors << " stale ticks "
                      << st.stale_ticks << " plans " << st.plans << " plan failures " << st.plan_failures << "\n";
            return 0;
        }
        if (*zone_table) {
            const auto cfg = config.empty() ? cav::load_config(cav::reference_config_text())
                                            : cav::load_config_file(config);
            if (route < 0) {
                route = cfg.routes.front().id;
                for (const auto& r : cfg.routes) {
                    if (r.test_route) route = r.id;
                }
            }
            std::cout << cav::v2x::serialize_zone_table(cav::v2x::zone_table_from_config(cfg, route));
            return 0;
        }
    } catch (const cav::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
