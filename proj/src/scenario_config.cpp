#include "mpc3/scenario_config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "mpc3/report.hpp"

namespace mpc3 {

namespace {

std::string format_error(const std::string& source, int line, int column,
                         const std::string& message) {
    std::ostringstream os;
    os << source;
    if (line > 0) os << ':' << line << ':' << column;
    os << ": " << message;
    return os.str();
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
        const YAML::Mark m = node.Mark();
        if (m.is_null()) throw ConfigError(source_, 0, 0, message);
        throw ConfigError(source_, m.line + 1, m.column + 1, message);
    }

    double number(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key + ": expected a number");
        try {
            return node.as<double>();
        } catch (const YAML::Exception&) {
            fail(node, key + ": expected a number, got '" + node.Scalar() + "'");
        }
    }

    double positive(const YAML::Node& node, const std::string& key) const {
        const double v = number(node, key);
        if (!(v > 0.0)) fail(node, key + ": must be positive");
        return v;
    }

    double non_negative(const YAML::Node& node, const std::string& key) const {
        const double v = number(node, key);
        if (!(v >= 0.0)) fail(node, key + ": must be non-negative");
        return v;
    }

    long long integer(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key + ": expected an integer");
        try {
            return node.as<long long>();
        } catch (const YAML::Exception&) {
            fail(node, key + ": expected an integer, got '" + node.Scalar() + "'");
        }
    }

    std::uint64_t seed(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key + ": expected an unsigned integer");
        try {
            return node.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            fail(node, key + ": expected an unsigned integer, got '" + node.Scalar() + "'");
        }
    }

    bool boolean(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, key + ": expected true or false");
        try {
            return node.as<bool>();
        } catch (const YAML::Exception&) {
            fail(node, key + ": expected true or false, got '" + node.Scalar() + "'");
        }
    }

    Vec3 vec3(const YAML::Node& node, const std::string& key) const {
        if (!node.IsSequence() || node.size() != 3) fail(node, key + ": expected [x, y, z]");
        Vec3 v;
        for (int i = 0; i < 3; ++i) v(i) = number(node[i], key);
        return v;
    }

    std::vector<Vec3> vertices(const YAML::Node& node, const std::string& key) const {
        if (!node.IsSequence()) fail(node, key + ": expected a list of [x, y, z]");
        std::vector<Vec3> out;
        for (const YAML::Node& item : node) out.push_back(vec3(item, key));
        if (!out.empty() && out.size() < 4) fail(node, key + ": need at least four vertices");
        return out;
    }

private:
    std::string source_;
};

using Setter = std::function<void(const YAML::Node&, const std::string&)>;
using Section = std::vector<std::pair<std::string, Setter>>;

void apply_section(const Reader& rd, const YAML::Node& node, const std::string& name,
                   const Section& fields) {
    if (!node.IsMap()) rd.fail(node, name + ": expected a mapping");
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string key = it->first.as<std::string>();
        bool known = false;
        for (const auto& [field, set] : fields) {
            if (field == key) {
                set(it->second, name + "." + key);
                known = true;
                break;
            }
        }
        if (!known) rd.fail(it->first, "unknown key '" + name + "." + key + "'");
    }
}

ScenarioConfig parse_root(const YAML::Node& root, const Reader& rd) {
    ScenarioConfig c;
    if (root.IsNull()) return c;
    if (!root.IsMap()) rd.fail(root, "top level: expected a mapping of sections");

    PlantConfig& p = c.plant;
    const Section plant = {
        {"mass", [&](const YAML::Node& n, const std::string& k) { p.mass = rd.positive(n, k); }},
        {"noise_std", [&](const YAML::Node& n, const std::string& k) { p.noise_std = rd.non_negative(n, k); }},
        {"u_max", [&](const YAML::Node& n, const std::string& k) { p.u_max = rd.non_negative(n, k); }},
        {"seed", [&](const YAML::Node& n, const std::string& k) { p.seed = rd.seed(n, k); }},
    };
    ControllerConfig& t = c.controller;
    const Section transcription = {
        {"n", [&](const YAML::Node& n, const std::string& k) {
             const long long v = rd.integer(n, k);
             if (v < 2 || v > 64) rd.fail(n, k + ": must be in [2, 64]");
             t.n = static_cast<int>(v);
         }},
        {"horizon", [&](const YAML::Node& n, const std::string& k) { t.horizon = rd.positive(n, k); }},
        {"rho", [&](const YAML::Node& n, const std::string& k) { t.rho = rd.positive(n, k); }},
        {"W_u", [&](const YAML::Node& n, const std::string& k) { t.W_u = rd.positive(n, k); }},
        {"W_x", [&](const YAML::Node& n, const std::string& k) { t.W_x = rd.non_negative(n, k); }},
        {"W_xp", [&](const YAML::Node& n, const std::string& k) { t.W_xp = rd.non_negative(n, k); }},
        {"u_limit", [&](const YAML::Node& n, const std::string& k) { t.u_limit = rd.positive(n, k); }},
        {"V_u", [&](const YAML::Node& n, const std::string& k) { t.V_u = rd.non_negative(n, k); }},
        {"v_limit", [&](const YAML::Node& n, const std::string& k) { t.v_limit = rd.positive(n, k); }},
        {"V_xp", [&](const YAML::Node& n, const std::string& k) { t.V_xp = rd.non_negative(n, k); }},
    };
    GuidanceConfig& g = c.guidance;
    const Section guidance = {
        {"target_position", [&](const YAML::Node& n, const std::string& k) { g.target_position = rd.vec3(n, k); }},
        {"port_normal", [&](const YAML::Node& n, const std::string& k) {
             g.port_normal = rd.vec3(n, k);
             if (g.port_normal.norm() < 1e-9) rd.fail(n, k + ": must be non-zero");
         }},
        {"dock_standoff", [&](const YAML::Node& n, const std::string& k) { g.dock_standoff = rd.positive(n, k); }},
        {"align_standoff", [&](const YAML::Node& n, const std::string& k) { g.align_standoff = rd.positive(n, k); }},
        {"port_plane", [&](const YAML::Node& n, const std::string& k) { g.port_plane = rd.non_negative(n, k); }},
        {"approach_waypoint", [&](const YAML::Node& n, const std::string& k) { g.approach_waypoint = rd.vec3(n, k); }},
        {"approach_radius", [&](const YAML::Node& n, const std::string& k) { g.approach_radius = rd.positive(n, k); }},
        {"align_radius", [&](const YAML::Node& n, const std::string& k) { g.align_radius = rd.positive(n, k); }},
        {"hysteresis", [&](const YAML::Node& n, const std::string& k) {
             g.hysteresis = rd.number(n, k);
             if (!(g.hysteresis >= 1.0)) rd.fail(n, k + ": must be >= 1");
         }},
        {"dock_tolerance", [&](const YAML::Node& n, const std::string& k) { g.dock_tolerance = rd.positive(n, k); }},
        {"dock_speed", [&](const YAML::Node& n, const std::string& k) { g.dock_speed = rd.positive(n, k); }},
    };
    CollisionConfig& col = c.collision;
    const Section collision = {
        {"enabled", [&](const YAML::Node& n, const std::string& k) { col.enabled = rd.boolean(n, k); }},
        {"chaser_vertices", [&](const YAML::Node& n, const std::string& k) { col.chaser_vertices = rd.vertices(n, k); }},
        {"target_vertices", [&](const YAML::Node& n, const std::string& k) { col.target_vertices = rd.vertices(n, k); }},
        {"chaser_half_width", [&](const YAML::Node& n, const std::string& k) { col.chaser_half_width = rd.positive(n, k); }},
        {"target_half_width", [&](const YAML::Node& n, const std::string& k) { col.target_half_width = rd.positive(n, k); }},
        {"s_thr", [&](const YAML::Node& n, const std::string& k) {
             col.s_thr = rd.number(n, k);
             if (!(col.s_thr >= 1.0)) rd.fail(n, k + ": must be >= 1");
         }},
        {"activation_radius", [&](const YAML::Node& n, const std::string& k) { col.activation_radius = rd.positive(n, k); }},
        {"softness", [&](const YAML::Node& n, const std::string& k) { col.softness = rd.non_negative(n, k); }},
    };
    RunConfig& r = c.run;
    const Section run = {
        {"Ts", [&](const YAML::Node& n, const std::string& k) { r.Ts = rd.positive(n, k); }},
        {"timeout", [&](const YAML::Node& n, const std::string& k) { r.timeout = rd.non_negative(n, k); }},
        {"mc_runs", [&](const YAML::Node& n, const std::string& k) {
             const long long v = rd.integer(n, k);
             if (v < 1) rd.fail(n, k + ": must be at least 1");
             r.mc_runs = static_cast<int>(v);
         }},
        {"initial_position", [&](const YAML::Node& n, const std::string& k) { r.initial_position = rd.vec3(n, k); }},
        {"initial_velocity", [&](const YAML::Node& n, const std::string& k) { r.initial_velocity = rd.vec3(n, k); }},
        {"hold", [&](const YAML::Node& n, const std::string& k) {
             const std::string v = n.IsScalar() ? n.Scalar() : "";
             if (v == "average") r.hold = ControlHold::Average;
             else if (v == "start") r.hold = ControlHold::Start;
             else rd.fail(n, k + ": expected 'average' or 'start'");
         }},
    };

    const std::vector<std::pair<std::string, const Section*>> sections = {
        {"plant", &plant}, {"transcription", &transcription}, {"guidance", &guidance},
        {"collision", &collision}, {"run", &run}};
    for (auto it = root.begin(); it != root.end(); ++it) {
        const std::string name = it->first.as<std::string>();
        bool known = false;
        for (const auto& [section, fields] : sections) {
            if (section == name) {
                apply_section(rd, it->second, name, *fields);
                known = true;
                break;
            }
        }
        if (!known) rd.fail(it->first, "unknown section '" + name + "'");
    }
    return c;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(format_error(source, line, column, message)),
      source_(source),
      line_(line),
      column_(column) {}

ScenarioConfig parse_scenario(const std::string& text, const std::string& source) {
    const Reader rd(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source, e.mark.is_null() ? 0 : e.mark.line + 1,
                          e.mark.is_null() ? 0 : e.mark.column + 1, e.msg);
    }
    ScenarioConfig c = parse_root(root, rd);
    // Cross-field checks: radii ordering, hull validity, Ts <= horizon.
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source, 0, 0, e.what());
    }
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

namespace {

/// Shortest round-trip decimal form.
struct Num {
    double value;
};

YAML::Emitter& operator<<(YAML::Emitter& out, Num n) { return out << format_double(n.value); }

void emit_vec(YAML::Emitter& out, const char* key, const Vec3& v) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << Num{v(0)} << Num{v(1)} << Num{v(2)}
        << YAML::EndSeq;
}

void emit_vertices(YAML::Emitter& out, const char* key, const std::vector<Vec3>& verts) {
    if (verts.empty()) return;
    out << YAML::Key << key << YAML::Value << YAML::BeginSeq;
    for (const Vec3& v : verts)
        out << YAML::Flow << YAML::BeginSeq << Num{v(0)} << Num{v(1)} << Num{v(2)} << YAML::EndSeq;
    out << YAML::EndSeq;
}

}  // namespace

std::string dump_scenario(const ScenarioConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "plant" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mass" << YAML::Value << Num{c.plant.mass};
    out << YAML::Key << "noise_std" << YAML::Value << Num{c.plant.noise_std};
    out << YAML::Key << "u_max" << YAML::Value << Num{c.plant.u_max};
    out << YAML::Key << "seed" << YAML::Value << c.plant.seed;
    out << YAML::EndMap;

    const ControllerConfig& t = c.controller;
    out << YAML::Key << "transcription" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value << t.n;
    out << YAML::Key << "horizon" << YAML::Value << Num{t.horizon};
    out << YAML::Key << "rho" << YAML::Value << Num{t.rho};
    out << YAML::Key << "W_u" << YAML::Value << Num{t.W_u};
    out << YAML::Key << "W_x" << YAML::Value << Num{t.W_x};
    out << YAML::Key << "W_xp" << YAML::Value << Num{t.W_xp};
    out << YAML::Key << "u_limit" << YAML::Value << Num{t.u_limit};
    out << YAML::Key << "V_u" << YAML::Value << Num{t.V_u};
    out << YAML::Key << "v_limit" << YAML::Value << Num{t.v_limit};
    out << YAML::Key << "V_xp" << YAML::Value << Num{t.V_xp};
    out << YAML::EndMap;

    const GuidanceConfig& g = c.guidance;
    out << YAML::Key << "guidance" << YAML::Value << YAML::BeginMap;
    emit_vec(out, "target_position", g.target_position);
    emit_vec(out, "port_normal", g.port_normal);
    out << YAML::Key << "dock_standoff" << YAML::Value << Num{g.dock_standoff};
    out << YAML::Key << "align_standoff" << YAML::Value << Num{g.align_standoff};
    out << YAML::Key << "port_plane" << YAML::Value << Num{g.port_plane};
    emit_vec(out, "approach_waypoint", g.approach_waypoint);
    out << YAML::Key << "approach_radius" << YAML::Value << Num{g.approach_radius};
    out << YAML::Key << "align_radius" << YAML::Value << Num{g.align_radius};
    out << YAML::Key << "hysteresis" << YAML::Value << Num{g.hysteresis};
    out << YAML::Key << "dock_tolerance" << YAML::Value << Num{g.dock_tolerance};
    out << YAML::Key << "dock_speed" << YAML::Value << Num{g.dock_speed};
    out << YAML::EndMap;

    const CollisionConfig& col = c.collision;
    out << YAML::Key << "collision" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "enabled" << YAML::Value << col.enabled;
    emit_vertices(out, "chaser_vertices", col.chaser_vertices);
    emit_vertices(out, "target_vertices", col.target_vertices);
    out << YAML::Key << "chaser_half_width" << YAML::Value << Num{col.chaser_half_width};
    out << YAML::Key << "target_half_width" << YAML::Value << Num{col.target_half_width};
    out << YAML::Key << "s_thr" << YAML::Value << Num{col.s_thr};
    out << YAML::Key << "activation_radius" << YAML::Value << Num{col.activation_radius};
    out << YAML::Key << "softness" << YAML::Value << Num{col.softness};
    out << YAML::EndMap;

    const RunConfig& r = c.run;
    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "Ts" << YAML::Value << Num{r.Ts};
    out << YAML::Key << "timeout" << YAML::Value << r.timeout;
    out << YAML::Key << "mc_runs" << YAML::Value << r.mc_runs;
    emit_vec(out, "initial_position", r.initial_position);
    emit_vec(out, "initial_velocity", r.initial_velocity);
    out << YAML::Key << "hold" << YAML::Value
        << (r.hold == ControlHold::Average ? "average" : "start");
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace mpc3
