#include "cav/core/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cav/core/units.hpp"

namespace cav {

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("{} (line {}): {}", field, line, message)
                                  : fmt::format("{}: {}", field, message))
    , field_(std::move(field))
    , line_(line)
{
}

std::string_view to_string(ZoneKind k)
{
    switch (k) {
    case ZoneKind::Merge: return "merge";
    case ZoneKind::SpeedReduction: return "speed_reduction";
    case ZoneKind::Roundabout: return "roundabout";
    }
    return "?";
}

std::string_view to_string(LaneRelation r)
{
    switch (r) {
    case LaneRelation::SameLane: return "same";
    case LaneRelation::ConflictLane: return "conflict";
    case LaneRelation::Parallel: return "parallel";
    }
    return "?";
}

std::string_view to_string(Priority p) { return p == Priority::Major ? "major" : "minor"; }
std::string_view to_string(TerminalMode m) { return m == TerminalMode::Free ? "free" : "fixed"; }
std::string_view to_string(Mode m) { return m == Mode::Baseline ? "baseline" : "optimal"; }

const ZoneFeed* ConflictZoneSpec::feed(RouteId route) const
{
    for (const auto& f : feeds) {
        if (f.route == route) return &f;
    }
    return nullptr;
}

LaneRelation ConflictZoneSpec::relation(RouteId a, RouteId b) const
{
    if (a == b) return LaneRelation::SameLane;
    for (const auto& r : relations) {
        if ((r.a == a && r.b == b) || (r.a == b && r.b == a)) return r.relation;
    }
    return LaneRelation::ConflictLane;
}

double RouteSpec::speed_limit_at(double s) const
{
    double lim = limits.empty() ? 0.0 : limits.front().limit;
    for (const auto& seg : limits) {
        if (seg.from <= s) lim = seg.limit;
        else break;
    }
    return lim;
}

std::optional<SpeedSegment> RouteSpec::next_lower_limit(double s) const
{
    const double here = speed_limit_at(s);
    for (const auto& seg : limits) {
        if (seg.from > s && seg.limit < here) return seg;
    }
    return std::nullopt;
}

const RouteSpec& CorridorConfig::route(RouteId id) const
{
    for (const auto& r : routes) {
        if (r.id == id) return r;
    }
    throw std::out_of_range(fmt::format("unknown route {}", id));
}

const ConflictZoneSpec& CorridorConfig::zone(ZoneId z) const
{
    for (const auto& zn : zones) {
        if (zn.z == z) return zn;
    }
    throw std::out_of_range(fmt::format("unknown zone {}", z));
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

class Reader {
  public:
    explicit Reader(std::string path, YAML::Node node) : path_(std::move(path)), node_(std::move(node)) {}

    const YAML::Node& node() const { return node_; }
    const std::string& path() const { return path_; }

    bool has(const char* key) const { return node_[key].IsDefined() && !node_[key].IsNull(); }

    YAML::Node child(const char* key) const
    {
        YAML::Node c = node_[key];
        if (!c.IsDefined() || c.IsNull()) {
            throw ConfigError(sub(key), line_of(node_), "missing required field");
        }
        return c;
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double quantity(const char* key, Dimension dim) const
    {
        YAML::Node c = child(key);
        try {
            return parse_quantity(c.as<std::string>(), dim);
        } catch (const std::exception& e) {
            throw ConfigError(sub(key), line_of(c), e.what());
        }
    }

    double quantity_or(const char* key, Dimension dim, double fallback) const
    {
        return has(key) ? quantity(key, dim) : fallback;
    }

    template <typename T>
    T scalar(const char* key) const
    {
        YAML::Node c = child(key);
        try {
            return c.as<T>();
        } catch (const std::exception& e) {
            throw ConfigError(sub(key), line_of(c), e.what());
        }
    }

    template <typename T>
    T scalar_or(const char* key, T fallback) const
    {
        return has(key) ? scalar<T>(key) : fallback;
    }

  private:
    std::string path_;
    YAML::Node node_;
};

template <typename E>
E parse_enum(const Reader& r, const char* key, std::initializer_list<std::pair<std::string_view, E>> table)
{
    const auto text = r.scalar<std::string>(key);
    for (const auto& [name, value] : table) {
        if (name == text) return value;
    }
    throw ConfigError(r.sub(key), line_of(r.child(key)), "unrecognised value '" + text + "'");
}

Mode parse_mode(const Reader& r, const char* key)
{
    return parse_enum<Mode>(r, key, {{"baseline", Mode::Baseline}, {"optimal", Mode::Optimal}});
}

RouteSpec parse_route(const Reader& r)
{
    RouteSpec route;
    route.id = r.scalar<int>("id");
    route.name = r.scalar_or<std::string>("name", fmt::format("route{}", route.id));
    route.test_route = r.scalar_or<bool>("test_route", false);
    route.length = r.quantity("length", Dimension::Length);
    route.flow = r.quantity("flow", Dimension::Flow);
    YAML::Node limits = r.child("speed_limits");
    if (!limits.IsSequence()) {
        throw ConfigError(r.sub("speed_limits"), line_of(limits), "expected a list of [from, limit] pairs");
    }
    for (std::size_t i = 0; i < limits.size(); ++i) {
        const YAML::Node item = limits[i];
        const std::string where = r.sub(fmt::format("speed_limits[{}]", i));
        if (!item.IsSequence() || item.size() != 2) {
            throw ConfigError(where, line_of(item), "expected [from, limit]");
        }
        try {
            route.limits.push_back({parse_quantity(item[0].as<std::string>(), Dimension::Length),
                                    parse_quantity(item[1].as<std::string>(), Dimension::Speed)});
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(where, line_of(item), e.what());
        }
    }
    return route;
}

ConflictZoneSpec parse_zone(const Reader& r)
{
    ConflictZoneSpec zone;
    zone.z = r.scalar<int>("z");
    zone.kind = parse_enum<ZoneKind>(r, "kind",
                                     {{"merge", ZoneKind::Merge},
                                      {"speed_reduction", ZoneKind::SpeedReduction},
                                      {"roundabout", ZoneKind::Roundabout}});
    zone.L = r.quantity("L", Dimension::Length);
    zone.S = r.quantity("S", Dimension::Length);
    zone.speed_limit = r.quantity("speed_limit", Dimension::Speed);
    zone.v_mz = r.quantity_or("v_mz", Dimension::Speed, zone.speed_limit);
    zone.terminal = r.has("terminal")
                        ? parse_enum<TerminalMode>(r, "terminal", {{"free", TerminalMode::Free}, {"fixed", TerminalMode::Fixed}})
                        : TerminalMode::Fixed;

    YAML::Node feeds = r.child("feeds");
    for (std::size_t i = 0; i < feeds.size(); ++i) {
        Reader fr(r.sub(fmt::format("feeds[{}]", i)), feeds[i]);
        ZoneFeed f;
        f.route = fr.scalar<int>("route");
        f.p_entry = fr.quantity("p_entry", Dimension::Length);
        f.p_mz = fr.quantity_or("p_mz", Dimension::Length, f.p_entry + zone.L);
        f.priority = fr.has("priority")
                         ? parse_enum<Priority>(fr, "priority", {{"major", Priority::Major}, {"minor", Priority::Minor}})
                         : Priority::Major;
        zone.feeds.push_back(f);
    }
    if (r.has("relations")) {
        YAML::Node rels = r.child("relations");
        for (std::size_t i = 0; i < rels.size(); ++i) {
            Reader rr(r.sub(fmt::format("relations[{}]", i)), rels[i]);
            YAML::Node pair = rr.child("routes");
            if (!pair.IsSequence() || pair.size() != 2) {
                throw ConfigError(rr.sub("routes"), line_of(pair), "expected [route_a, route_b]");
            }
            RelationPair p;
            p.a = pair[0].as<int>();
            p.b = pair[1].as<int>();
            p.relation = parse_enum<LaneRelation>(rr, "relation",
                                                  {{"same", LaneRelation::SameLane},
                                                   {"conflict", LaneRelation::ConflictLane},
                                                   {"parallel", LaneRelation::Parallel}});
            zone.relations.push_back(p);
        }
    }
    return zone;
}

void fail(const std::string& field, const std::string& msg) { throw ConfigError(field, 0, msg); }

}  // namespace

void validate(const CorridorConfig& cfg)
{
    if (!(cfg.dt > 0)) fail("simulation.dt", "dt must be positive");
    if (!(cfg.horizon > 0)) fail("simulation.horizon", "horizon must be positive");
    if (!(cfg.headway_h > 0)) fail("simulation.headway", "headway must be positive");
    if (!(cfg.plan_gap_margin >= 0)) fail("simulation.plan_gap_margin", "plan_gap_margin must be non-negative");
    if (!(cfg.relax_step > 0)) fail("simulation.relax_step", "relax_step must be positive");
    if (cfg.relax_retries < 0) fail("simulation.relax_retries", "relax_retries must be non-negative");

    const Bounds& b = cfg.bounds;
    if (!(b.u_min < 0)) fail("bounds.u_min", "u_min must be negative");
    if (!(b.u_max > 0)) fail("bounds.u_max", "u_max must be positive");
    if (!(b.v_min >= 0)) fail("bounds.v_min", "v_min must be non-negative");
    if (!(b.v_min < b.v_max)) fail("bounds.v_max", "v_max must exceed v_min");

    const BaselineParams& bp = cfg.baseline;
    for (auto [name, value] : {std::pair{"max_accel", bp.max_accel}, {"comfort_decel", bp.comfort_decel},
                               {"emergency_decel", bp.emergency_decel}, {"min_gap", bp.min_gap},
                               {"yield_gap", bp.yield_gap}, {"headway", bp.headway}}) {
        if (!(value > 0)) fail(std::string("baseline.") + name, std::string(name) + " must be positive");
    }

    for (std::size_t i = 0; i < cfg.routes.size(); ++i) {
        const RouteSpec& r = cfg.routes[i];
        const std::string where = fmt::format("routes[{}]", i);
        for (std::size_t j = 0; j < i; ++j) {
            if (cfg.routes[j].id == r.id) fail(where + ".id", fmt::format("duplicate route id {}", r.id));
        }
        if (!(r.length > 0)) fail(where + ".length", "route length must be positive");
        if (!(r.flow >= 0)) fail(where + ".flow", "flow must be non-negative");
        if (r.limits.empty() || r.limits.front().from != 0.0) {
            fail(where + ".speed_limits", "first speed segment must start at 0 m");
        }
        for (std::size_t k = 0; k < r.limits.size(); ++k) {
            if (!(r.limits[k].limit > 0)) fail(where + ".speed_limits", "speed limits must be positive");
            if (k > 0 && !(r.limits[k].from > r.limits[k - 1].from)) {
                fail(where + ".speed_limits", "segments must be strictly increasing in position");
            }
            if (r.limits[k].from >= r.length) fail(where + ".speed_limits", "segment starts beyond route end");
        }
    }

    for (std::size_t i = 0; i < cfg.zones.size(); ++i) {
        const ConflictZoneSpec& z = cfg.zones[i];
        const std::string where = fmt::format("zones[{}]", i);
        if (z.z < 1 || z.z > 3) fail(where + ".z", "zone index must be 1, 2 or 3");
        for (std::size_t j = 0; j < i; ++j) {
            if (cfg.zones[j].z == z.z) fail(where + ".z", fmt::format("duplicate zone {}", z.z));
        }
        if (!(z.L > 0)) fail(where + ".L", "L must be positive");
        if (!(z.S > 0)) fail(where + ".S", "S must be positive");
        if (!(z.speed_limit > 0)) fail(where + ".speed_limit", "speed_limit must be positive");
        if (!(z.v_mz > 0)) fail(where + ".v_mz", "v_mz must be positive");
        if (z.v_mz > z.speed_limit) fail(where + ".v_mz", "v_mz must not exceed the zone speed limit");
        if (z.feeds.empty()) fail(where + ".feeds", "zone needs at least one feeding route");
        for (std::size_t k = 0; k < z.feeds.size(); ++k) {
            const ZoneFeed& f = z.feeds[k];
            const std::string fw = fmt::format("{}.feeds[{}]", where, k);
            const RouteSpec* route = nullptr;
            for (const auto& r : cfg.routes) {
                if (r.id == f.route) route = &r;
            }
            if (route == nullptr) fail(fw + ".route", fmt::format("unknown route {}", f.route));
            if (!(f.p_entry >= 0)) fail(fw + ".p_entry", "p_entry must be non-negative");
            if (std::abs((f.p_mz - f.p_entry) - z.L) > 1e-9) {
                fail(fw + ".p_mz", "p_mz - p_entry must equal the control zone length L");
            }
            if (f.p_mz + z.S > route->length) fail(fw + ".p_mz", "merging zone extends past the route end");
            for (std::size_t m = 0; m < k; ++m) {
                if (z.feeds[m].route == f.route) fail(fw + ".route", "route listed twice");
            }
        }
        for (std::size_t k = 0; k < z.relations.size(); ++k) {
            const RelationPair& p = z.relations[k];
            if (z.feed(p.a) == nullptr || z.feed(p.b) == nullptr) {
                fail(fmt::format("{}.relations[{}]", where, k), "relation names a route that does not feed this zone");
            }
            if (p.a == p.b && p.relation != LaneRelation::SameLane) {
                fail(fmt::format("{}.relations[{}]", where, k), "a route is always same-lane with itself");
            }
        }
    }

    // Zones must not overlap along any single route.
    for (const auto& r : cfg.routes) {
        std::vector<std::pair<double, double>> spans;
        for (const auto& z : cfg.zones) {
            if (const ZoneFeed* f = z.feed(r.id)) spans.emplace_back(f->p_entry, f->p_mz + z.S);
        }
        std::sort(spans.begin(), spans.end());
        for (std::size_t k = 1; k < spans.size(); ++k) {
            if (spans[k].first < spans[k - 1].second) {
                fail(fmt::format("routes[id={}]", r.id), "conflict zones overlap along this route");
            }
        }
    }
}

CorridorConfig load_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("document", e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) throw ConfigError("document", 0, "expected a mapping at the top level");

    CorridorConfig cfg;
    const Reader top("", root);

    const Reader sim("simulation", top.child("simulation"));
    cfg.dt = sim.quantity("dt", Dimension::Time);
    cfg.horizon = sim.quantity("horizon", Dimension::Time);
    cfg.seed = sim.scalar_or<std::uint64_t>("seed", 1);
    cfg.mode = sim.has("mode") ? parse_mode(sim, "mode") : Mode::Optimal;
    cfg.headway_h = sim.quantity("headway", Dimension::Time);
    cfg.plan_gap_margin = sim.quantity_or("plan_gap_margin", Dimension::Length, cfg.plan_gap_margin);
    cfg.relax_step = sim.quantity_or("relax_step", Dimension::Time, cfg.relax_step);
    cfg.relax_retries = sim.scalar_or<int>("relax_retries", cfg.relax_retries);

    const Reader bounds("bounds", top.child("bounds"));
    cfg.bounds.u_min = bounds.quantity("u_min", Dimension::Acceleration);
    cfg.bounds.u_max = bounds.quantity("u_max", Dimension::Acceleration);
    cfg.bounds.v_min = bounds.quantity("v_min", Dimension::Speed);
    cfg.bounds.v_max = bounds.quantity("v_max", Dimension::Speed);

    if (top.has("baseline")) {
        const Reader base("baseline", top.child("baseline"));
        auto& bp = cfg.baseline;
        bp.max_accel = base.quantity_or("max_accel", Dimension::Acceleration, bp.max_accel);
        bp.comfort_decel = base.quantity_or("comfort_decel", Dimension::Acceleration, bp.comfort_decel);
        bp.emergency_decel = base.quantity_or("emergency_decel", Dimension::Acceleration, bp.emergency_decel);
        bp.min_gap = base.quantity_or("min_gap", Dimension::Length, bp.min_gap);
        bp.yield_gap = base.quantity_or("yield_gap", Dimension::Time, bp.yield_gap);
    }
    cfg.baseline.headway = cfg.headway_h;

    YAML::Node routes = top.child("routes");
    for (std::size_t i = 0; i < routes.size(); ++i) {
        cfg.routes.push_back(parse_route(Reader(fmt::format("routes[{}]", i), routes[i])));
    }
    YAML::Node zones = top.child("zones");
    for (std::size_t i = 0; i < zones.size(); ++i) {
        cfg.zones.push_back(parse_zone(Reader(fmt::format("zones[{}]", i), zones[i])));
    }

    validate(cfg);
    return cfg;
}

CorridorConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config(ss.str());
}

namespace {

std::string q(double v, std::string_view unit) { return fmt::format("{:.17g} {}", v, unit); }

}  // namespace

std::string serialize_config(const CorridorConfig& cfg)
{
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dt" << YAML::Value << q(cfg.dt, "s");
    out << YAML::Key << "horizon" << YAML::Value << q(cfg.horizon, "s");
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;
    out << YAML::Key << "mode" << YAML::Value << std::string(to_string(cfg.mode));
    out << YAML::Key << "headway" << YAML::Value << q(cfg.headway_h, "s");
    out << YAML::Key << "plan_gap_margin" << YAML::Value << q(cfg.plan_gap_margin, "m");
    out << YAML::Key << "relax_step" << YAML::Value << q(cfg.relax_step, "s");
    out << YAML::Key << "relax_retries" << YAML::Value << cfg.relax_retries;
    out << YAML::EndMap;

    out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "u_min" << YAML::Value << q(cfg.bounds.u_min, "m/s^2");
    out << YAML::Key << "u_max" << YAML::Value << q(cfg.bounds.u_max, "m/s^2");
    out << YAML::Key << "v_min" << YAML::Value << q(cfg.bounds.v_min, "m/s");
    out << YAML::Key << "v_max" << YAML::Value << q(cfg.bounds.v_max, "m/s");
    out << YAML::EndMap;

    const auto& bp = cfg.baseline;
    out << YAML::Key << "baseline" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "max_accel" << YAML::Value << q(bp.max_accel, "m/s^2");
    out << YAML::Key << "comfort_decel" << YAML::Value << q(bp.comfort_decel, "m/s^2");
    out << YAML::Key << "emergency_decel" << YAML::Value << q(bp.emergency_decel, "m/s^2");
    out << YAML::Key << "min_gap" << YAML::Value << q(bp.min_gap, "m");
    out << YAML::Key << "yield_gap" << YAML::Value << q(bp.yield_gap, "s");
    out << YAML::EndMap;

    out << YAML::Key << "routes" << YAML::Value << YAML::BeginSeq;
    for (const auto& r : cfg.routes) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << r.id;
        out << YAML::Key << "name" << YAML::Value << r.name;
        out << YAML::Key << "test_route" << YAML::Value << r.test_route;
        out << YAML::Key << "length" << YAML::Value << q(r.length, "m");
        out << YAML::Key << "flow" << YAML::Value << q(r.flow, "veh/s");
        out << YAML::Key << "speed_limits" << YAML::Value << YAML::BeginSeq;
        for (const auto& seg : r.limits) {
            out << YAML::Flow << YAML::BeginSeq << q(seg.from, "m") << q(seg.limit, "m/s") << YAML::EndSeq;
        }
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "zones" << YAML::Value << YAML::BeginSeq;
    for (const auto& z : cfg.zones) {
        out << YAML::BeginMap;
        out << YAML::Key << "z" << YAML::Value << z.z;
        out << YAML::Key << "kind" << YAML::Value << std::string(to_string(z.kind));
        out << YAML::Key << "L" << YAML::Value << q(z.L, "m");
        out << YAML::Key << "S" << YAML::Value << q(z.S, "m");
        out << YAML::Key << "speed_limit" << YAML::Value << q(z.speed_limit, "m/s");
        out << YAML::Key << "v_mz" << YAML::Value << q(z.v_mz, "m/s");
        out << YAML::Key << "terminal" << YAML::Value << std::string(to_string(z.terminal));
        out << YAML::Key << "feeds" << YAML::Value << YAML::BeginSeq;
        for (const auto& f : z.feeds) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "route" << YAML::Value << f.route;
            out << YAML::Key << "p_entry" << YAML::Value << q(f.p_entry, "m");
            out << YAML::Key << "p_mz" << YAML::Value << q(f.p_mz, "m");
            out << YAML::Key << "priority" << YAML::Value << std::string(to_string(f.priority));
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::Key << "relations" << YAML::Value << YAML::BeginSeq;
        for (const auto& p : z.relations) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "routes" << YAML::Value << YAML::Flow << YAML::BeginSeq << p.a << p.b << YAML::EndSeq;
            out << YAML::Key << "relation" << YAML::Value << std::string(to_string(p.relation));
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string reference_config_text()
{
    return R"(# Reference corridor: on-ramp merge, speed-reduction zone, roundabout.
# Every quantity carries a unit; mph and vph are converted to SI on load.
simulation:
  dt: 0.1 s
  horizon: 900 s
  seed: 1
  mode: optimal
  headway: 1.2 s          # safe time headway, delta(v) = h * v
  plan_gap_margin: 0.5 m
  relax_step: 0.1 s
  relax_retries: 50

bounds:
  u_min: -3.0 m/s^2       # maximum deceleration
  u_max: 1.5 m/s^2        # maximum acceleration
  v_min: 0 m/s
  v_max: 40 mph

baseline:
  max_accel: 1.5 m/s^2
  comfort_decel: 3.0 m/s^2
  emergency_decel: 8.0 m/s^2
  min_gap: 2 m
  yield_gap: 4 s

routes:
  - id: 0
    name: main
    test_route: true
    length: 1500 m
    flow: 500 vph
    speed_limits:
      - [0 m, 40 mph]
      - [700 m, 18.6 mph]
      - [825 m, 40 mph]
      - [1000 m, 25 mph]
      - [1175 m, 40 mph]
  - id: 1
    name: highway
    length: 500 m
    flow: 800 vph
    speed_limits:
      - [0 m, 40 mph]
  - id: 2
    name: srz_lane
    length: 500 m
    flow: 1300 vph
    speed_limits:
      - [0 m, 25 mph]
      - [250 m, 18.6 mph]
      - [375 m, 40 mph]
  - id: 3
    name: roundabout_ring
    length: 400 m
    flow: 700 vph
    speed_limits:
      - [0 m, 25 mph]

zones:
  - z: 1
    kind: merge
    L: 100 m
    S: 15 m
    speed_limit: 40 mph
    v_mz: 6 m/s
    terminal: free
    feeds:
      - {route: 0, p_entry: 250 m, p_mz: 350 m, priority: minor}
      - {route: 1, p_entry: 250 m, p_mz: 350 m, priority: major}
    relations:
      - {routes: [0, 1], relation: conflict}
  - z: 2
    kind: speed_reduction
    L: 100 m
    S: 125 m
    speed_limit: 18.6 mph
    terminal: fixed
    feeds:
      - {route: 0, p_entry: 600 m, p_mz: 700 m}
      - {route: 2, p_entry: 150 m, p_mz: 250 m}
    relations:
      - {routes: [0, 2], relation: parallel}
  - z: 3
    kind: roundabout
    L: 100 m
    S: 20 m
    speed_limit: 25 mph
    v_mz: 18 mph
    terminal: fixed
    feeds:
      - {route: 0, p_entry: 1050 m, p_mz: 1150 m, priority: minor}
      - {route: 3, p_entry: 150 m, p_mz: 250 m, priority: major}
    relations:
      - {routes: [0, 3], relation: conflict}
)";
}

}  // namespace cav
