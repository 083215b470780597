#include "cav/v2x/headunit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include "cav/coordinator/coordinator.hpp"
#include "cav/v2x/broker.hpp"
#include "cav/v2x/replay.hpp"

namespace cav::v2x {

double ZoneTable::speed_limit_at(double s) const
{
    double v = limits.empty() ? bounds.v_max : limits.front().limit;
    for (const auto& seg : limits) {
        if (seg.from <= s) v = seg.limit;
    }
    return v;
}

ZoneTable zone_table_from_config(const CorridorConfig& cfg, RouteId route)
{
    const RouteSpec& r = cfg.route(route);
    ZoneTable t;
    t.ego_route = route;
    t.length = r.length;
    t.v0 = r.speed_limit_at(0.0);
    t.bounds = cfg.bounds;
    t.headway = cfg.headway_h;
    t.relax_step = cfg.relax_step;
    t.relax_retries = cfg.relax_retries;
    t.limits = r.limits;
    for (const auto& z : cfg.zones) {
        const ZoneFeed* f = z.feed(route);
        if (!f) continue;
        ZoneEntry e;
        e.z = z.z;
        e.p_entry = f->p_entry;
        e.p_mz = f->p_mz;
        e.S = z.S;
        e.v_mz = z.v_mz;
        e.terminal = z.terminal;
        for (const auto& other : z.feeds) e.lanes[other.route] = z.relation(route, other.route);
        t.zones.push_back(std::move(e));
    }
    std::sort(t.zones.begin(), t.zones.end(), [](const ZoneEntry& a, const ZoneEntry& b) { return a.p_mz < b.p_mz; });
    return t;
}

std::string serialize_zone_table(const ZoneTable& t)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "ego_route" << YAML::Value << t.ego_route;
    out << YAML::Key << "length_m" << YAML::Value << t.length;
    out << YAML::Key << "v0_mps" << YAML::Value << t.v0;
    out << YAML::Key << "bounds" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "u_min" << YAML::Value << t.bounds.u_min << YAML::Key << "u_max" << YAML::Value
        << t.bounds.u_max << YAML::Key << "v_min" << YAML::Value << t.bounds.v_min << YAML::Key << "v_max"
        << YAML::Value << t.bounds.v_max << YAML::EndMap;
    out << YAML::Key << "headway_s" << YAML::Value << t.headway;
    out << YAML::Key << "relax_step_s" << YAML::Value << t.relax_step;
    out << YAML::Key << "relax_retries" << YAML::Value << t.relax_retries;
    out << YAML::Key << "limits" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : t.limits) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "from_m" << YAML::Value << s.from << YAML::Key
            << "limit_mps" << YAML::Value << s.limit << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "zones" << YAML::Value << YAML::BeginSeq;
    for (const auto& z : t.zones) {
        out << YAML::BeginMap;
        out << YAML::Key << "z" << YAML::Value << z.z;
        out << YAML::Key << "p_entry_m" << YAML::Value << z.p_entry;
        out << YAML::Key << "p_mz_m" << YAML::Value << z.p_mz;
        out << YAML::Key << "S_m" << YAML::Value << z.S;
        out << YAML::Key << "v_mz_mps" << YAML::Value << z.v_mz;
        out << YAML::Key << "terminal" << YAML::Value << std::string(to_string(z.terminal));
        out << YAML::Key << "lanes" << YAML::Value << YAML::Flow << YAML::BeginMap;
        for (const auto& [route, rel] : z.lanes) out << YAML::Key << route << YAML::Value << std::string(to_string(rel));
        out << YAML::EndMap;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <typename T>
T need(const YAML::Node& parent, const char* key, const std::string& path)
{
    const YAML::Node n = parent[key];
    if (!n) throw ConfigError(path + key, line_of(parent), "missing");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path + key, line_of(n), "wrong type");
    }
}

LaneRelation parse_relation(const std::string& s, const std::string& field, int line)
{
    if (s == "same") return LaneRelation::SameLane;
    if (s == "conflict") return LaneRelation::ConflictLane;
    if (s == "parallel") return LaneRelation::Parallel;
    throw ConfigError(field, line, fmt::format("unknown lane relation '{}'", s));
}

}  // namespace

ZoneTable load_zone_table(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) throw ConfigError("", 1, "zone table must be a mapping");
    ZoneTable t;
    t.ego_route = need<int>(root, "ego_route", "");
    t.length = need<double>(root, "length_m", "");
    t.v0 = need<double>(root, "v0_mps", "");
    const YAML::Node b = root["bounds"];
    if (!b) throw ConfigError("bounds", line_of(root), "missing");
    t.bounds.u_min = need<double>(b, "u_min", "bounds.");
    t.bounds.u_max = need<double>(b, "u_max", "bounds.");
    t.bounds.v_min = need<double>(b, "v_min", "bounds.");
    t.bounds.v_max = need<double>(b, "v_max", "bounds.");
    t.headway = need<double>(root, "headway_s", "");
    t.relax_step = need<double>(root, "relax_step_s", "");
    t.relax_retries = need<int>(root, "relax_retries", "");
    for (std::size_t i = 0; i < root["limits"].size(); ++i) {
        const std::string p = fmt::format("limits[{}].", i);
        const YAML::Node n = root["limits"][i];
        t.limits.push_back({need<double>(n, "from_m", p), need<double>(n, "limit_mps", p)});
    }
    for (std::size_t i = 0; i < root["zones"].size(); ++i) {
        const std::string p = fmt::format("zones[{}].", i);
        const YAML::Node n = root["zones"][i];
        ZoneEntry z;
        z.z = need<int>(n, "z", p);
        z.p_entry = need<double>(n, "p_entry_m", p);
        z.p_mz = need<double>(n, "p_mz_m", p);
        z.S = need<double>(n, "S_m", p);
        z.v_mz = need<double>(n, "v_mz_mps", p);
        const std::string term = need<std::string>(n, "terminal", p);
        if (term != "free" && term != "fixed") throw ConfigError(p + "terminal", line_of(n), "expected free or fixed");
        z.terminal = term == "free" ? TerminalMode::Free : TerminalMode::Fixed;
        for (const auto& kv : n["lanes"]) {
            z.lanes[kv.first.as<int>()] =
                parse_relation(kv.second.as<std::string>(), p + "lanes", line_of(kv.second));
        }
        if (!(z.p_entry < z.p_mz) || !(z.S > 0.0) || !(z.v_mz > 0.0)) {
            throw ConfigError(p.substr(0, p.size() - 1), line_of(n), "needs p_entry < p_mz, S > 0 and v_mz > 0");
        }
        t.zones.push_back(std::move(z));
    }
    return t;
}

ZoneTable load_zone_table_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, fmt::format("cannot open {}", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return load_zone_table(ss.str());
}

Neighbor neighbor_from(const BsmFrame& f)
{
    return {f.vehicle_id, f.latitude, f.width, f.length, f.elevation, static_cast<std::int64_t>(f.timestamp_ms)};
}

Neighbor neighbor_from(const sim::TraceRecord& r)
{
    // Same field content as the BSM carries.
    return {r.id, r.route, r.zone, std::llround(r.dist_to_mz * 10.0), r.tm_ms, std::llround(r.t * 1000.0)};
}

EgoController::EgoController(ZoneTable table, std::int64_t tick_ms, std::int64_t stale_ms)
    : table_(std::move(table))
    , tick_ms_(tick_ms)
    , stale_ms_(stale_ms)
{
}

const Neighbor* EgoController::pick_leader(const ZoneEntry& zone, double dist_to_mz, std::int64_t t_ms,
                                           const std::map<VehicleId, Neighbor>& latest) const
{
    const Neighbor* best = nullptr;
    for (const auto& [id, n] : latest) {
        if (n.zone != zone.z || n.tm_ms < 0 || n.ts_ms < t_ms - stale_ms_) continue;
        auto rel = zone.lanes.find(n.route);
        if (rel == zone.lanes.end() || rel->second == LaneRelation::Parallel) continue;
        if (static_cast<double>(n.dist_dm) >= dist_to_mz * 10.0) continue;
        // map order is ascending id, so a strict comparison keeps the lowest id on ties
        if (best == nullptr || n.dist_dm > best->dist_dm) best = &n;
    }
    return best;
}

std::optional<EgoController::Plan> EgoController::make_plan(const ZoneEntry& zone, double t,
                                                            const Neighbor* leader) const
{
    if (!(v_ > 0.0)) return std::nullopt;
    ConflictZoneSpec spec;
    spec.z = zone.z;
    spec.L = zone.p_mz - zone.p_entry;
    spec.S = zone.S;
    spec.v_mz = zone.v_mz;
    spec.terminal = zone.terminal;

    coord::ScheduleEntry prev;
    LaneRelation rel = LaneRelation::SameLane;
    if (leader) {
        prev.vehicle_id = leader->id;
        prev.tm = static_cast<double>(leader->tm_ms) / 1000.0;
        // Terminal speed is not broadcast; the zone's floor speed bounds it from below.
        prev.v_at_tm = zone.v_mz;
        rel = zone.lanes.at(leader->route);
    }
    const coord::MergingTime mt =
        coord::merging_time(leader ? &prev : nullptr, rel, spec, t, v_, table_.bounds, table_.headway);

    const bool fixed = zone.terminal == TerminalMode::Fixed;
    double tm = mt.tm;
    for (int k = 0; k <= table_.relax_retries; ++k) {
        if (k > 0) tm += table_.relax_step;
        traj::BoundaryConditions bc;
        bc.p0 = dist_;
        bc.v0 = v_;
        bc.t0 = t;
        bc.p_mz = zone.p_mz;
        bc.tm = tm;
        if (fixed) bc.terminal_speed = zone.v_mz;
        if (bc.p_mz <= bc.p0) return std::nullopt;
        traj::PlanResult res = traj::plan(bc, table_.bounds);
        if (!fixed && res.coeffs && traj::eval(*res.coeffs, tm).v < zone.v_mz) {
            bc.terminal_speed = zone.v_mz;
            res = traj::plan(bc, table_.bounds);
        }
        if (!res.coeffs) continue;
        const double v_mz = bc.terminal_speed ? *bc.terminal_speed : traj::eval(*res.coeffs, tm).v;
        if (v_mz < 0.1) continue;
        return Plan{zone.z, traj::Motion(*res.coeffs, v_mz, tm + zone.S / v_mz), tm, v_mz};
    }
    return std::nullopt;
}

SpeedCommand EgoController::tick(std::int64_t t_ms, const std::map<VehicleId, Neighbor>& latest,
                                 std::optional<std::int64_t> last_heard_ms)
{
    if (!started_) {
        started_ = true;
        v_ = table_.v0;
    } else {
        dist_ += v_ * static_cast<double>(tick_ms_) / 1000.0;
    }
    const double t = static_cast<double>(t_ms) / 1000.0;

    SpeedCommand cmd;
    cmd.t_ms = t_ms;
    cmd.dist = dist_;
    cmd.stale = !last_heard_ms || t_ms - *last_heard_ms > stale_ms_;

    const ZoneEntry* zone = nullptr;
    for (const auto& z : table_.zones) {
        if (dist_ >= z.p_entry && dist_ < z.p_mz + z.S) zone = &z;
    }
    double v = table_.speed_limit_at(dist_);
    if (zone) {
        cmd.zone = zone->z;
        if (dist_ < zone->p_mz && !attempted_[zone->z]) {
            if (cmd.stale) {
                // Nothing fresh to pick a leader from: keep the last command and retry next tick.
                cmd.v = v_;
                return cmd;
            }
            attempted_[zone->z] = true;
            const Neighbor* leader = pick_leader(*zone, zone->p_mz - dist_, t_ms, latest);
            plan_ = make_plan(*zone, t, leader);
            if (plan_) {
                ++plans_;
                planned_leader_ = leader ? std::optional<VehicleId>(leader->id) : std::nullopt;
            } else {
                ++failures_;
                spdlog::debug("head unit: no feasible plan for zone {} at t={:.2f}", zone->z, t);
            }
        }
        if (plan_ && plan_->z == zone->z) {
            v = t <= plan_->tm && dist_ < zone->p_mz ? plan_->motion.at(t).v : plan_->v_mz;
            cmd.tm_ms = std::llround(plan_->tm * 1000.0);
            cmd.leader = planned_leader_;
        }
    }
    cmd.v = v;
    v_ = v;
    return cmd;
}

HeadUnit::HeadUnit(ZoneTable table, LinkModel link, std::int64_t tick_ms)
    : ego_(std::move(table), tick_ms)
    , link_(link)
    , rng_(link.seed)
    , tick_ms_(tick_ms)
{
}

void HeadUnit::on_bytes(std::span<const std::uint8_t> bytes)
{
    try {
        on_frame(decode_bsm(bytes));
    } catch (const BsmError& e) {
        ++stats_.decode_errors;
        spdlog::debug("head unit: dropped frame: {}", e.what());
    }
}

void HeadUnit::on_frame(const BsmFrame& frame)
{
    if (frame.is_spat()) {
        ++stats_.spat;
        return;
    }
    ++stats_.frames;
    if (link_.drop > 0.0 && std::bernoulli_distribution(link_.drop)(rng_)) {
        ++stats_.link_drops;
        return;
    }
    const auto ts = static_cast<std::int64_t>(frame.timestamp_ms);
    if (!next_tick_) next_tick_ = ts;
    run_ticks_before(ts, false);
    newest_ts_ = std::max(newest_ts_, ts);
    inbox_.push_back(neighbor_from(frame));
}

void HeadUnit::finish()
{
    if (next_tick_) run_ticks_before(newest_ts_, true);
}

void HeadUnit::run_ticks_before(std::int64_t ts_ms, bool inclusive)
{
    while (*next_tick_ < ts_ms || (inclusive && *next_tick_ == ts_ms)) {
        const std::int64_t now = *next_tick_;
        std::size_t used = 0;
        for (; used < inbox_.size() && inbox_[used].ts_ms + link_.delay_ms <= now; ++used) {
            const Neighbor& n = inbox_[used];
            auto [it, fresh] = latest_.try_emplace(n.id, n);
            if (!fresh && it->second.ts_ms <= n.ts_ms) it->second = n;
            last_heard_ = std::max(last_heard_.value_or(n.ts_ms + link_.delay_ms), n.ts_ms + link_.delay_ms);
        }
        inbox_.erase(inbox_.begin(), inbox_.begin() + static_cast<std::ptrdiff_t>(used));
        SpeedCommand cmd = ego_.tick(now, latest_, last_heard_);
        if (cmd.stale) ++stats_.stale_ticks;
        commands_.push_back(cmd);
        std::erase_if(latest_, [&](const auto& kv) { return kv.second.ts_ms < now - 2000; });
        *next_tick_ += tick_ms_;
    }
}

HeadUnitStats HeadUnit::stats() const
{
    HeadUnitStats s = stats_;
    s.plans = ego_.plans();
    s.plan_failures = ego_.plan_failures();
    return s;
}

HeadUnit run_headunit(const std::string& host, std::uint16_t port, const ZoneTable& table, LinkModel link,
                      const std::function<void()>& on_ready)
{
    Client client = Client::connect(host, port);
    client.subscribe("bsm/#");
    client.subscribe(kEofTopic);
    client.sync();
    if (on_ready) on_ready();
    HeadUnit unit(table, link);
    while (std::optional<Publish> msg = client.receive()) {
        if (msg->topic == kEofTopic) break;
        unit.on_bytes(msg->payload);
    }
    unit.finish();
    return unit;
}

std::vector<SpeedCommand> reference_commands(const sim::Trace& trace, const ZoneTable& table, std::int64_t tick_ms)
{
    std::vector<SpeedCommand> out;
    if (trace.records.empty()) return out;
    EgoController ego(table, tick_ms);
    std::map<VehicleId, Neighbor> latest;
    std::optional<std::int64_t> last_heard;
    const std::int64_t first = std::llround(trace.records.front().t * 1000.0);
    const std::int64_t last = std::llround(trace.records.back().t * 1000.0);
    std::size_t i = 0;
    for (std::int64_t now = first; now <= last; now += tick_ms) {
        for (; i < trace.records.size() && std::llround(trace.records[i].t * 1000.0) <= now; ++i) {
            const Neighbor n = neighbor_from(trace.records[i]);
            latest[n.id] = n;
            last_heard = n.ts_ms;
        }
        out.push_back(ego.tick(now, latest, last_heard));
        std::erase_if(latest, [&](const auto& kv) { return kv.second.ts_ms < now - 2000; });
    }
    return out;
}

Equivalence compare_commands(const std::vector<SpeedCommand>& a, const std::vector<SpeedCommand>& b)
{
    Equivalence eq;
    const std::size_t n = std::min(a.size(), b.size());
    eq.missing = std::max(a.size(), b.size()) - n;
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].t_ms != b[i].t_ms) {
            ++eq.missing;
            continue;
        }
        ++eq.compared;
        eq.max_dv = std::max(eq.max_dv, std::abs(a[i].v - b[i].v));
    }
    return eq;
}

void write_commands(std::ostream& out, const std::vector<SpeedCommand>& cmds)
{
    out << "t_ms,dist,zone,v,stale,leader,tm_ms\n";
    for (const auto& c : cmds) {
        out << fmt::format("{},{:.6f},{},{:.9f},{},{},{}\n", c.t_ms, c.dist, c.zone, c.v, c.stale ? 1 : 0,
                           c.leader ? fmt::to_string(*c.leader) : std::string("-"), c.tm_ms);
    }
}

}  // namespace cav::v2x
