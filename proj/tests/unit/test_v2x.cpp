#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

#include "cav/coordinator/coordinator.hpp"
#include "cav/core/config.hpp"
#include "cav/trajectory/trajectory.hpp"
#include "cav/v2x/broker.hpp"
#include "cav/v2x/bsm.hpp"
#include "cav/v2x/headunit.hpp"
#include "cav/v2x/replay.hpp"
#include "cav/v2x/socket.hpp"
#include "cav/v2x/wire.hpp"

using namespace cav;
using namespace cav::v2x;

namespace {

BsmFrame random_frame(std::mt19937_64& rng)
{
    auto u = [&](std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(0, hi)(rng); };
    auto s = [&]() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(u(0xffffffffu))); };
    BsmFrame f;
    f.vehicle_id = static_cast<std::uint32_t>(u(0xffffffffu));
    f.latitude = s();
    f.longitude = s();
    f.speed = static_cast<std::uint16_t>(u(0xffff));
    f.elevation = s();
    f.length = static_cast<std::uint16_t>(u(0xffff));
    f.width = static_cast<std::uint16_t>(u(3));
    f.seq = static_cast<std::uint8_t>(u(0xff));
    f.timestamp_ms = u(0xffffffffu);
    return f;
}

}  // namespace

TEST(Bsm, SchedulingFieldsRoundTrip)
{
    BsmFrame f;
    f.vehicle_id = 42;
    f.elevation = 11200;
    f.length = 523;
    f.width = 1;
    f.speed = 670;
    const auto bytes = encode_bsm(f);
    EXPECT_EQ(bytes.size(), 28u);
    const BsmFrame back = decode_bsm(bytes);
    EXPECT_EQ(back, f);
    EXPECT_EQ(back.tm_ms(), 11200);
    EXPECT_NEAR(back.dist_to_mz(), 52.3, 1e-12);
    EXPECT_NEAR(back.speed_mps(), 13.4, 1e-12);
    EXPECT_EQ(back.zone(), 1);
}

TEST(Bsm, ZeroFrameCarriesMessageId)
{
    const auto bytes = encode_bsm(BsmFrame{});
    EXPECT_EQ(bytes[0], 0x14);
    EXPECT_TRUE(std::all_of(bytes.begin() + 1, bytes.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST(Bsm, BigEndianFieldOrder)
{
    BsmFrame f;
    f.vehicle_id = 0x01020304;
    f.timestamp_ms = 0x0a0b0c0d;
    const auto b = encode_bsm(f);
    EXPECT_EQ(b[1], 0x01);
    EXPECT_EQ(b[4], 0x04);
    EXPECT_EQ(b[24], 0x0a);
    EXPECT_EQ(b[27], 0x0d);
}

TEST(Bsm, RandomRoundTrip)
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 10000; ++i) {
        const BsmFrame f = random_frame(rng);
        ASSERT_EQ(decode_bsm(encode_bsm(f)), f);
    }
}

TEST(Bsm, Errors)
{
    const auto bytes = encode_bsm(BsmFrame{});
    try {
        decode_bsm(std::span<const std::uint8_t>(bytes.data(), 27));
        FAIL();
    } catch (const BsmError& e) {
        EXPECT_EQ(e.kind(), BsmError::Kind::Length);
    }
    BsmFrame f;
    f.width = 7;
    try {
        encode_bsm(f);
        FAIL();
    } catch (const BsmError& e) {
        EXPECT_EQ(e.kind(), BsmError::Kind::OutOfRange);
    }
    f.width = 0;
    f.timestamp_ms = 1ull << 32;
    EXPECT_THROW(encode_bsm(f), BsmError);
    auto bad = bytes;
    bad[0] = 0x20;
    try {
        decode_bsm(bad);
        FAIL();
    } catch (const BsmError& e) {
        EXPECT_EQ(e.kind(), BsmError::Kind::UnknownMessage);
    }
    bad = bytes;
    bad[21] = 0;
    bad[22] = 9;  // width on the wire
    EXPECT_THROW(decode_bsm(bad), BsmError);
}

TEST(Bsm, SpatIsAMarker)
{
    auto bytes = encode_bsm(BsmFrame{});
    bytes[0] = 0x13;
    bytes[5] = 0x7f;  // payload content is ignored
    bytes[27] = 9;
    const BsmFrame f = decode_bsm(bytes);
    EXPECT_TRUE(f.is_spat());
    EXPECT_EQ(f.latitude, 0);
    EXPECT_EQ(f.timestamp_ms, 9u);
}

TEST(Wire, MessagesRoundTrip)
{
    const Message sub = Subscribe{"bsm/#"};
    const Message pub = Publish{"bsm/2", {1, 2, 3, 0}};
    EXPECT_EQ(decode_message(encode_message(sub)), sub);
    EXPECT_EQ(decode_message(encode_message(pub)), pub);
    const Bytes fr = frame(pub);
    ASSERT_EQ(fr.size(), 4u + 1 + 2 + 5 + 4);
    EXPECT_EQ(fr[3], 12);
    EXPECT_EQ(fr[4], kOpPublish);
    EXPECT_EQ(fr[6], 5);
}

TEST(Wire, MalformedPayloads)
{
    EXPECT_THROW(decode_message({}), WireError);
    EXPECT_THROW(decode_message({0x07, 'a'}), WireError);
    EXPECT_THROW(decode_message({kOpSubscribe}), WireError);
    EXPECT_THROW(decode_message({kOpPublish, 0x00, 0x09, 'a'}), WireError);
    EXPECT_THROW(decode_message({kOpSubscribe, 'a', 0, 'b'}), WireError);
    EXPECT_THROW(encode_message(Subscribe{""}), WireError);
}

TEST(Wire, TopicPatterns)
{
    EXPECT_TRUE(topic_matches("bsm/#", "bsm/1"));
    EXPECT_TRUE(topic_matches("bsm/1", "bsm/1"));
    EXPECT_FALSE(topic_matches("bsm/1", "bsm/2"));
    EXPECT_FALSE(topic_matches("bsm/#", "spat/1"));
    EXPECT_TRUE(topic_matches("#", "anything"));
}

TEST(Broker, FanOutToTwoSubscribersInOrder)
{
    Broker broker("127.0.0.1", 0);
    broker.start();
    Client a = Client::connect("127.0.0.1", broker.port());
    Client b = Client::connect("127.0.0.1", broker.port());
    a.subscribe("bsm/#");
    b.subscribe("bsm/1");
    a.sync();
    b.sync();
    Client pub = Client::connect("127.0.0.1", broker.port());
    for (std::uint8_t k = 0; k < 200; ++k) pub.publish("bsm/1", {k});
    for (std::uint8_t k = 0; k < 200; ++k) {
        auto ma = a.receive();
        auto mb = b.receive();
        ASSERT_TRUE(ma && mb);
        EXPECT_EQ(ma->payload, Bytes{k});
        EXPECT_EQ(mb->payload, Bytes{k});
    }
    broker.stop();
    EXPECT_EQ(broker.stats().published, 200u + 2u);
}

TEST(Broker, PublishWithoutSubscribersIsDropped)
{
    Broker broker("127.0.0.1", 0);
    broker.start();
    Client pub = Client::connect("127.0.0.1", broker.port());
    pub.publish("bsm/3", {1});
    pub.sync();
    broker.stop();
    EXPECT_EQ(broker.stats().unmatched, 1u);
}

TEST(Broker, MalformedFrameClosesConnection)
{
    Broker broker("127.0.0.1", 0);
    broker.start();
    Socket raw = connect_tcp("127.0.0.1", broker.port());
    send_all(raw, Bytes{0, 0, 0, 2, 0x09, 0x00});
    EXPECT_FALSE(read_frame(raw).has_value());
    // The broker keeps serving others.
    Client c = Client::connect("127.0.0.1", broker.port());
    c.subscribe("x");
    c.sync();
    c.publish("x", {5});
    auto m = c.receive();
    ASSERT_TRUE(m);
    EXPECT_EQ(m->payload, Bytes{5});
    broker.stop();
    EXPECT_EQ(broker.stats().malformed, 1u);
}

TEST(Broker, BindFailureIsReported)
{
    Broker first("127.0.0.1", 0);
    EXPECT_THROW(Broker("127.0.0.1", first.port()), SocketError);
}

TEST(Broker, PacedStreamArrivesComplete)
{
    Broker broker("127.0.0.1", 0);
    broker.start();
    Client sub = Client::connect("127.0.0.1", broker.port());
    sub.subscribe("bsm/#");
    sub.sync();
    Client pub = Client::connect("127.0.0.1", broker.port());
    const int n = 200;  // 2 s at 100 Hz
    std::thread t([&] {
        auto next = std::chrono::steady_clock::now();
        for (int k = 0; k < n; ++k) {
            BsmFrame f;
            f.vehicle_id = static_cast<std::uint32_t>(k);
            const auto b = encode_bsm(f);
            pub.publish("bsm/0", Bytes(b.begin(), b.end()));
            next += std::chrono::milliseconds(10);
            std::this_thread::sleep_until(next);
        }
    });
    for (int k = 0; k < n; ++k) {
        auto m = sub.receive();
        ASSERT_TRUE(m);
        EXPECT_EQ(decode_bsm(m->payload).vehicle_id, static_cast<std::uint32_t>(k));
    }
    t.join();
    broker.stop();
}

TEST(Replay, CadenceAndEof)
{
    Broker broker("127.0.0.1", 0);
    broker.start();
    Client sub = Client::connect("127.0.0.1", broker.port());
    sub.subscribe("bsm/#");
    sub.subscribe(kEofTopic);
    sub.sync();
    sim::Trace trace;
    for (int k = 0; k < 100; ++k) trace.records.push_back({k * 0.1, 7, 0, k * 1.0, 10.0, 0, k < 50 ? 0 : 1, 0, -1});
    const ReplayStats st = replay_publish(trace, "127.0.0.1", broker.port(), 100.0);
    EXPECT_EQ(st.frames, 100u);
    EXPECT_NEAR(st.seconds, 1.0, 0.3);
    int frames = 0;
    while (auto m = sub.receive()) {
        if (m->topic == kEofTopic) break;
        EXPECT_EQ(m->topic, bsm_topic(frames < 50 ? 0 : 1));
        ++frames;
    }
    EXPECT_EQ(frames, 100);
    broker.stop();
}

TEST(Replay, EmptyTraceSendsOnlyEof)
{
    Broker broker("127.0.0.1", 0);
    broker.start();
    const ReplayStats st = replay_publish(sim::Trace{}, "127.0.0.1", broker.port(), 10.0);
    EXPECT_EQ(st.frames, 0u);
    broker.stop();
}

TEST(Replay, UnreachableBroker)
{
    std::uint16_t port;
    {
        Broker b("127.0.0.1", 0);
        port = b.port();
    }
    EXPECT_THROW(replay_publish(sim::Trace{}, "127.0.0.1", port, 10.0), SocketError);
}

TEST(Replay, FrameFieldMapping)
{
    const sim::TraceRecord r{12.34, 9, 3, 100.0, 13.4, 0.0, 2, 52.3, 15000};
    const BsmFrame f = frame_for(r, 4);
    EXPECT_EQ(f.vehicle_id, 9u);
    EXPECT_EQ(f.speed, 670);
    EXPECT_EQ(f.length, 523);
    EXPECT_EQ(f.width, 2);
    EXPECT_EQ(f.elevation, 15000);
    EXPECT_EQ(f.latitude, 3);
    EXPECT_EQ(f.timestamp_ms, 12340u);
    EXPECT_EQ(f.seq, 4);
}

namespace {

ZoneTable one_zone_table(double p_entry, double v_mz = 10.0)
{
    ZoneTable t;
    t.ego_route = 0;
    t.length = 1000;
    t.v0 = 13.4;
    t.limits = {{0.0, 17.8816}};
    ZoneEntry z;
    z.z = 1;
    z.p_entry = p_entry;
    z.p_mz = p_entry + 100;
    z.S = 30;
    z.v_mz = v_mz;
    z.terminal = TerminalMode::Fixed;
    z.lanes = {{0, LaneRelation::SameLane}, {1, LaneRelation::ConflictLane}, {2, LaneRelation::Parallel}};
    t.zones = {z};
    return t;
}

Neighbor nb(VehicleId id, RouteId route, int zone, std::int64_t dist_dm, std::int64_t tm_ms, std::int64_t ts = 0)
{
    return {id, route, zone, dist_dm, tm_ms, ts};
}

}  // namespace

TEST(HeadUnit, NoMessagesOutsideZonesFollowsSpeedLimit)
{
    EgoController ego(one_zone_table(500));
    const SpeedCommand c = ego.tick(0, {}, std::nullopt);
    EXPECT_TRUE(c.stale);
    EXPECT_EQ(c.zone, 0);
    EXPECT_NEAR(c.v, 17.8816, 1e-12);
}

TEST(HeadUnit, LeaderPlanMatchesCoordinatorAndTrajectory)
{
    const ZoneTable table = one_zone_table(0, 6.0);
    EgoController ego(table);
    const std::map<VehicleId, Neighbor> latest{{5, nb(5, 0, 1, 500, 11200)}};
    const SpeedCommand c0 = ego.tick(0, latest, 0);
    ASSERT_TRUE(c0.leader.has_value());
    EXPECT_EQ(*c0.leader, 5u);

    ConflictZoneSpec spec;
    spec.L = 100;
    spec.S = 30;
    spec.v_mz = 6;
    coord::ScheduleEntry prev;
    prev.tm = 11.2;
    prev.v_at_tm = 6;
    const auto mt = coord::merging_time(&prev, LaneRelation::SameLane, spec, 0.0, 13.4, table.bounds, 1.2);
    EXPECT_GE(mt.tm, 11.2 + 1.2 * 13.4 / 6 - 1e-12);

    // Same relaxation as the scheduler: defer tm in 0.1 s steps until the plan respects the bounds.
    traj::BoundaryConditions bc;
    bc.v0 = 13.4;
    bc.p_mz = 100;
    bc.terminal_speed = 6.0;
    traj::PlanResult res;
    for (int k = 0; k <= 50 && !res.coeffs; ++k) {
        bc.tm = mt.tm + 0.1 * k;
        res = traj::plan(bc, table.bounds);
    }
    ASSERT_TRUE(res.coeffs.has_value());
    EXPECT_EQ(c0.tm_ms, std::llround(bc.tm * 1000));
    for (int k = 1; k <= 500; ++k) {
        const SpeedCommand c = ego.tick(k * 10, latest, k * 10);
        EXPECT_NEAR(c.v, traj::eval(*res.coeffs, k * 0.01).v, 1e-9);
    }
}

TEST(HeadUnit, IgnoresOtherZonesParallelAndUnplannedVehicles)
{
    EgoController ego(one_zone_table(0));
    const std::map<VehicleId, Neighbor> latest{
        {1, nb(1, 0, 2, 500, 9000)},  // other zone
        {2, nb(2, 2, 1, 500, 9000)},  // parallel lane
        {3, nb(3, 1, 1, 500, -1)},    // not scheduled
        {4, nb(4, 0, 1, 1500, 9000)}, // behind the ego
    };
    const SpeedCommand c = ego.tick(0, latest, 0);
    EXPECT_FALSE(c.leader.has_value());
    EXPECT_EQ(c.tm_ms, std::llround(100 / 13.4 * 1000));
}

TEST(HeadUnit, ClosestVehicleAheadWinsWithIdTieBreak)
{
    EgoController ego(one_zone_table(0));
    const std::map<VehicleId, Neighbor> latest{
        {8, nb(8, 1, 1, 700, 9000)},
        {6, nb(6, 0, 1, 700, 9500)},
        {2, nb(2, 0, 1, 300, 8000)},
    };
    EXPECT_EQ(*ego.tick(0, latest, 0).leader, 6u);
}

TEST(HeadUnit, LeaderChoiceIgnoresArrivalOrder)
{
    const ZoneTable table = one_zone_table(0);
    std::vector<BsmFrame> frames;
    for (std::uint32_t id = 1; id <= 6; ++id) {
        BsmFrame f;
        f.vehicle_id = id;
        f.width = 1;
        f.latitude = id % 2;
        f.length = static_cast<std::uint16_t>(id <= 3 ? 600 : 100 * id);
        f.elevation = static_cast<std::int32_t>(8000 + 100 * id);
        f.speed = 500;
        frames.push_back(f);
    }
    BsmFrame later;
    later.vehicle_id = 99;
    later.timestamp_ms = 500;
    std::mt19937_64 rng(1);
    std::optional<std::vector<SpeedCommand>> first;
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(frames.begin(), frames.end(), rng);
        HeadUnit hu(table);
        for (const auto& f : frames) hu.on_frame(f);
        hu.on_frame(later);
        hu.finish();
        ASSERT_FALSE(hu.commands().empty());
        EXPECT_EQ(*hu.commands().front().leader, 1u);
        if (!first) first = hu.commands();
        EXPECT_EQ(hu.commands(), *first);
    }
}

TEST(HeadUnit, DecodeErrorsAreCounted)
{
    HeadUnit hu(one_zone_table(0));
    const std::uint8_t junk[5] = {1, 2, 3, 4, 5};
    hu.on_bytes(junk);
    auto spat = encode_bsm(BsmFrame{});
    spat[0] = kMsgSpat;
    hu.on_bytes(spat);
    EXPECT_EQ(hu.stats().decode_errors, 1u);
    EXPECT_EQ(hu.stats().spat, 1u);
    EXPECT_TRUE(hu.commands().empty());
}

TEST(HeadUnit, StaleFeedRaisesFlag)
{
    HeadUnit hu(one_zone_table(500));
    BsmFrame f;
    f.vehicle_id = 1;
    hu.on_frame(f);
    f.timestamp_ms = 3000;
    hu.on_frame(f);
    hu.finish();
    const auto& cmds = hu.commands();
    ASSERT_EQ(cmds.size(), 301u);
    EXPECT_FALSE(cmds[100].stale);
    EXPECT_TRUE(cmds[101].stale);
    EXPECT_FALSE(cmds.back().stale);
    EXPECT_EQ(hu.stats().stale_ticks, 199u);
}

TEST(HeadUnit, ZoneTableRoundTrip)
{
    const CorridorConfig cfg = load_config(reference_config_text());
    const ZoneTable t = zone_table_from_config(cfg, 0);
    ASSERT_EQ(t.zones.size(), 3u);
    EXPECT_EQ(load_zone_table(serialize_zone_table(t)), t);
    EXPECT_THROW(load_zone_table("zones: [1, 2"), ConfigError);
}

TEST(HeadUnit, CommandsCompare)
{
    std::vector<SpeedCommand> a(3), b(3);
    for (int k = 0; k < 3; ++k) a[k].t_ms = b[k].t_ms = k * 10;
    b[1].v = 0.5;
    b.pop_back();
    const Equivalence e = compare_commands(a, b);
    EXPECT_EQ(e.compared, 2u);
    EXPECT_EQ(e.missing, 1u);
    EXPECT_NEAR(e.max_dv, 0.5, 1e-12);
}
