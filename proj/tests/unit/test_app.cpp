#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cav/app/commands.hpp"
#include "cav/app/report.hpp"
#include "cav/core/config.hpp"
#include "cav/sim/simulator.hpp"
#include "cav/sim/trace.hpp"

using namespace cav;
using namespace cav::app;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("cav_app_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

sim::Metrics fake_metrics(double corridor, double effort)
{
    sim::Metrics m;
    m.completed = 10;
    m.test_route_completed = 5;
    m.mean_corridor_time = corridor;
    m.mean_zone_time = {{1, corridor / 4}, {2, corridor / 5}, {3, corridor / 6}};
    m.mean_effort = effort;
    return m;
}

}  // namespace

TEST(ParseSeeds, Forms)
{
    EXPECT_EQ(parse_seeds("3"), (std::vector<std::uint64_t>{3}));
    EXPECT_EQ(parse_seeds("1..4"), (std::vector<std::uint64_t>{1, 2, 3, 4}));
    EXPECT_EQ(parse_seeds("1,4,7"), (std::vector<std::uint64_t>{1, 4, 7}));
    EXPECT_EQ(parse_seeds("1..3,9"), (std::vector<std::uint64_t>{1, 2, 3, 9}));
    EXPECT_THROW(parse_seeds(""), std::invalid_argument);
    EXPECT_THROW(parse_seeds("5..2"), std::invalid_argument);
    EXPECT_THROW(parse_seeds("x"), std::invalid_argument);
}

TEST(Report, ImprovementSign)
{
    EXPECT_NEAR(improvement(100, 75), 25.0, 1e-12);
    EXPECT_LT(improvement(100, 120), 0.0);
}

TEST(Report, SampleStatistics)
{
    const Stat s = summarize({1, 2, 3, 4});
    EXPECT_NEAR(s.mean, 2.5, 1e-12);
    EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-12);
    EXPECT_EQ(summarize({7}).stddev, 0.0);
}

TEST(Report, ZoneColumnsAndCorridor)
{
    const CorridorConfig cfg = load_config(reference_config_text());
    const Report r = build_report(cfg, {fake_metrics(200, 20), fake_metrics(220, 22)},
                                  {fake_metrics(150, 10), fake_metrics(170, 12)});
    std::vector<std::string> cols;
    for (const auto& row : r.rows) {
        if (row.metric == "travel_time") cols.push_back(row.column);
    }
    EXPECT_EQ(cols, (std::vector<std::string>{"On-Ramp", "SRZ", "Roundabout", "Corridor"}));
    for (const auto& row : r.rows) {
        if (row.metric == "travel_time" && row.column == "Corridor") {
            EXPECT_NEAR(row.baseline.mean, 210, 1e-12);
            EXPECT_NEAR(row.optimal.mean, 160, 1e-12);
            EXPECT_NEAR(row.improvement_pct, improvement(210, 160), 1e-12);
        }
    }
    const std::string csv = format_report(r, ReportFormat::Columnar);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "metric,column,unit,baseline_mean,baseline_std,optimal_mean,optimal_std,improvement_pct");
    EXPECT_NE(format_report(r, ReportFormat::Text).find("Travel time [s]"), std::string::npos);
}

TEST(Commands, MissingConfigExitsTwo)
{
    TempDir d;
    RunSpec spec;
    spec.config = (d.path / "nope.yaml").string();
    spec.out_dir = (d.path / "out").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(spec, out, err), 2);
    EXPECT_FALSE(err.str().empty());
}

TEST(Commands, InvalidConfigExitsTwo)
{
    TempDir d;
    std::ofstream(d.path / "bad.yaml") << "bounds:\n  u_min: 2 m/s^2\n";
    RunSpec spec;
    spec.config = (d.path / "bad.yaml").string();
    spec.out_dir = (d.path / "out").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(spec, out, err), 2);
}

TEST(Commands, RunIsReproducibleAndReportRebuilds)
{
    TempDir d;
    auto once = [&](const std::string& name) {
        RunSpec spec;
        spec.config = CAV_CONFIG_DIR "/corridor.yaml";
        spec.seeds = {1, 2};
        spec.horizon = 120;
        spec.out_dir = (d.path / name).string();
        spec.jobs = 2;
        std::ostringstream out, err;
        EXPECT_EQ(cmd_run(spec, out, err), 0) << err.str();
        return fs::path(spec.out_dir);
    };
    const fs::path a = once("a");
    const fs::path b = once("b");
    for (const char* f : {"baseline_seed1.csv", "optimal_seed2.csv", "metrics.csv", "report.txt"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    std::ostringstream out, err;
    EXPECT_EQ(cmd_report(CAV_CONFIG_DIR "/corridor.yaml", a.string(), ReportFormat::Text, out, err), 0);
    EXPECT_EQ(out.str(), slurp(a / "report.txt"));
}

TEST(Commands, VerifyFlagsDoctoredTrace)
{
    TempDir d;
    CorridorConfig cfg = load_config(reference_config_text());
    cfg.horizon = 120;
    const sim::RunResult r = sim::run(cfg);
    const fs::path good = d.path / "good.csv";
    sim::write_trace_file(good.string(), r.trace);
    std::ostringstream out, err;
    EXPECT_EQ(cmd_verify(good.string(), "", out, err), 0) << out.str();

    // Two vehicles in zone 1's merging zone at the same instant on conflicting routes.
    sim::Trace bad = r.trace;
    bad.records.push_back({1000.0, 90001, 0, 355.0, 8.0, 0, 1, 0, 1000000});
    bad.records.push_back({1000.0, 90002, 1, 356.0, 8.0, 0, 1, 0, 1000000});
    const fs::path doctored = d.path / "bad.csv";
    sim::write_trace_file(doctored.string(), bad);
    EXPECT_EQ(cmd_verify(doctored.string(), "", out, err), 1);
    EXPECT_EQ(cmd_verify((d.path / "missing.csv").string(), "", out, err), 2);
}

TEST(Commands, BenchOnEmptyTrace)
{
    TempDir d;
    sim::write_trace_file((d.path / "empty.csv").string(), sim::Trace{});
    BenchSpec spec;
    spec.trace = (d.path / "empty.csv").string();
    spec.out_dir = (d.path / "bench").string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_bench(spec, out, err), 0) << err.str();
    EXPECT_TRUE(fs::exists(d.path / "bench" / "commands.csv"));
    spec.trace = (d.path / "missing.csv").string();
    EXPECT_EQ(cmd_bench(spec, out, err), 2);
}
