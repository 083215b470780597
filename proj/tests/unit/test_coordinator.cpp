#include <gtest/gtest.h>

#include <random>

#include "cav/coordinator/coordinator.hpp"

using namespace cav;
using namespace cav::coord;

namespace {

ConflictZoneSpec merge_zone(double S = 30.0)
{
    ConflictZoneSpec z;
    z.z = 1;
    z.kind = ZoneKind::Merge;
    z.L = 100.0;
    z.S = S;
    z.v_mz = 10.0;
    z.terminal = TerminalMode::Fixed;
    z.feeds = {{0, 0.0, 100.0, Priority::Minor}, {1, 0.0, 100.0, Priority::Major}};
    z.relations = {{0, 1, LaneRelation::ConflictLane}};
    return z;
}

ScheduleEntry prev_entry(double tm, double v_at_tm, RouteId lane)
{
    ScheduleEntry e;
    e.vehicle_id = 99;
    e.tm = tm;
    e.v_at_tm = v_at_tm;
    e.lane = lane;
    return e;
}

}  // namespace

TEST(MergingTime, NoPredecessorAtSpeedLimit)
{
    const Bounds b{-3, 1.5, 0, 17.88};
    const auto mt = merging_time(nullptr, LaneRelation::SameLane, merge_zone(), 0.0, 17.88, b, 1.2);
    EXPECT_NEAR(mt.tm, 5.5928, 1e-4);
    EXPECT_FALSE(mt.truncated);
}

TEST(MergingTime, NoPredecessorUsesOwnTravelTime)
{
    const Bounds b{-3, 1.5, 0, 17.8816};
    const auto mt = merging_time(nullptr, LaneRelation::SameLane, merge_zone(), 4.0, 13.4, b, 1.2);
    EXPECT_NEAR(mt.tm, 4.0 + 100.0 / 13.4, 1e-12);
}

TEST(MergingTime, SameLanePredecessorAddsHeadwayGap)
{
    const Bounds b{-3, 1.5, 5.0, 17.88};
    const auto prev = prev_entry(10.0, 10.0, 0);
    const auto mt = merging_time(&prev, LaneRelation::SameLane, merge_zone(), 0.0, 10.0, b, 1.2);
    EXPECT_NEAR(mt.tm, 11.2, 1e-12);
}

TEST(MergingTime, ConflictLanePredecessorAddsOccupancyGap)
{
    const Bounds b{-3, 1.5, 5.0, 17.88};
    const auto prev = prev_entry(10.0, 10.0, 1);
    const auto mt = merging_time(&prev, LaneRelation::ConflictLane, merge_zone(30.0), 0.0, 10.0, b, 1.2);
    EXPECT_NEAR(mt.tm, 13.0, 1e-12);
}

TEST(MergingTime, CeilingTruncatesLongQueues)
{
    const Bounds b{-3, 1.5, 5.0, 17.88};
    const auto prev = prev_entry(25.0, 10.0, 1);
    const auto mt = merging_time(&prev, LaneRelation::ConflictLane, merge_zone(), 0.0, 10.0, b, 1.2);
    EXPECT_NEAR(mt.tm, 20.0, 1e-12);
    EXPECT_TRUE(mt.truncated);
}

TEST(MergingTime, RejectsNonPositiveEntrySpeed)
{
    EXPECT_THROW(merging_time(nullptr, LaneRelation::SameLane, merge_zone(), 0, 0.0, Bounds{}, 1.2),
                 std::invalid_argument);
}

TEST(Coordinator, SecondSameLaneArrivalKeepsHeadway)
{
    Coordinator c(merge_zone(), Bounds{}, 1.2);
    const double tm1 = c.register_arrival(1, 0.0, 13.4, 0).tm;
    const auto& e2 = c.register_arrival(2, 0.1, 13.4, 0);
    EXPECT_GE(e2.tm, tm1 + 1.2 * 13.4 / 10.0 - 1e-12);
    ASSERT_TRUE(e2.prev_id.has_value());
    EXPECT_EQ(*e2.prev_id, 1u);
    EXPECT_EQ(*e2.relation_to_prev, LaneRelation::SameLane);
}

TEST(Coordinator, DuplicateRegistrationFails)
{
    Coordinator c(merge_zone(), Bounds{}, 1.2);
    c.register_arrival(1, 0.0, 13.4, 0);
    EXPECT_THROW(c.register_arrival(1, 0.5, 13.4, 0), ScheduleError);
}

TEST(Coordinator, ReleaseRules)
{
    Coordinator c(merge_zone(), Bounds{}, 1.2);
    const auto tm = c.register_arrival(1, 0.0, 13.4, 0).tm;
    EXPECT_THROW(c.release(2, tm + 3), ScheduleError);
    EXPECT_THROW(c.release(1, tm - 1), ScheduleError);
    c.release(1, tm + 3);
    EXPECT_TRUE(c.queue().empty());
    EXPECT_NEAR(c.occupancy().intervals.at(0).t_exit, tm + 3, 1e-12);
    // Released vehicles still anchor the recursion.
    const auto& e2 = c.register_arrival(2, 1.0, 13.4, 1);
    EXPECT_EQ(*e2.prev_id, 1u);
}

TEST(Coordinator, ConfirmOnlyMovesLater)
{
    Coordinator c(merge_zone(), Bounds{}, 1.2);
    const auto tm = c.register_arrival(1, 0.0, 13.4, 0).tm;
    EXPECT_THROW(c.confirm(1, tm - 0.5, 10.0), ScheduleError);
    const auto& e = c.confirm(1, tm + 0.5, 8.0);
    EXPECT_NEAR(e.tf, tm + 0.5 + 30.0 / 8.0, 1e-12);
}

TEST(OccupancyCheck, OverlappingConflictIntervals)
{
    MzOccupancy occ;
    occ.zone_z = 1;
    occ.intervals = {{1, 10, 13, 0}, {2, 12, 15, 1}};
    const auto pairs = occupancy_check(occ, merge_zone());
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_NEAR(pairs[0].overlap_begin, 12, 1e-12);
    EXPECT_NEAR(pairs[0].overlap_end, 13, 1e-12);
}

TEST(OccupancyCheck, SameLaneAndTouchingIntervalsAreFine)
{
    MzOccupancy occ;
    occ.intervals = {{1, 10, 13, 0}, {2, 12, 15, 0}, {3, 15, 17, 1}};
    EXPECT_TRUE(occupancy_check(occ, merge_zone()).empty());
}

namespace {

struct Arrival {
    double t0;
    double v0;
    RouteId lane;
};

std::vector<Arrival> random_stream(unsigned seed, int n)
{
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(0.5);
    std::uniform_real_distribution<double> v(4.0, 17.8);
    std::bernoulli_distribution lane(0.5);
    std::vector<Arrival> out;
    double t = 0;
    for (int i = 0; i < n; ++i) {
        t += gap(rng);
        out.push_back({t, v(rng), lane(rng) ? 1 : 0});
    }
    return out;
}

}  // namespace

TEST(CoordinatorProperty, ClampsFifoAndDisjointConflictIntervals)
{
    const Bounds b{-3, 1.5, 0.0, 17.8816};
    for (unsigned seed = 1; seed <= 20; ++seed) {
        Coordinator c(merge_zone(), b, 1.2);
        double last_tm = -1;
        VehicleId i = 1;
        for (const auto& a : random_stream(seed, 300)) {
            const auto& e = c.register_arrival(i++, a.t0, a.v0, a.lane);
            EXPECT_GE(e.tm - e.t0, 100.0 / b.v_max - 1e-12);
            EXPECT_GE(e.tm - e.t0, 100.0 / a.v0 - 1e-12);
            EXPECT_GE(e.tm, last_tm - 1e-12);  // two lanes in one chain: FIFO
            last_tm = e.tm;
        }
        EXPECT_TRUE(occupancy_check(c.occupancy(), c.zone()).empty());
    }
}

TEST(CoordinatorProperty, DeterministicForSameStream)
{
    auto run = [](unsigned seed) {
        Coordinator c(merge_zone(), Bounds{}, 1.2);
        std::vector<double> tms;
        VehicleId id = 1;
        for (const auto& a : random_stream(seed, 200)) tms.push_back(c.register_arrival(id++, a.t0, a.v0, a.lane).tm);
        return tms;
    };
    EXPECT_EQ(run(42), run(42));
}

TEST(CoordinatorProperty, ParallelLanesDoNotConstrainEachOther)
{
    auto zone = merge_zone();
    zone.relations = {{0, 1, LaneRelation::Parallel}};
    Coordinator c(zone, Bounds{}, 1.2);
    c.register_arrival(1, 0.0, 10.0, 0);
    const auto& e = c.register_arrival(2, 0.0, 10.0, 1);
    EXPECT_FALSE(e.prev_id.has_value());
    EXPECT_NEAR(e.tm, 10.0, 1e-12);
}
