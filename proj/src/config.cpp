#include "rispls/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rispls {

namespace {

Point on_circle(double radius, double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    return {radius * std::cos(rad), radius * std::sin(rad)};
}

void check_angle(double degrees, const char* name) {
    if (!(degrees >= 0.0 && degrees < 360.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 360)");
    }
}

const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{
        "n_bs",      "m_rx",    "k_e",      "l_ris",          "lambda_ris",      "power",
        "noise_var", "pathloss_exp", "radius", "angle_rx", "angle_e", "angle_ris_legit"};
    return keys;
}

}  // namespace

void SystemConfig::validate() const {
    if (n_bs < 1 || m_rx < 1 || k_e < 1) throw DomainError("antenna counts must be positive");
    if (l_ris < 0 || lambda_ris < 0) throw DomainError("RIS element counts must be non-negative");
    if (k_e < m_rx) throw DomainError("eavesdropper needs at least as many antennas as RX (K >= M)");
    if (!(power > 0.0)) throw DomainError("power must be positive");
    if (!(noise_var > 0.0)) throw DomainError("noise_var must be positive");
    if (!(pathloss_exp >= 0.0)) throw DomainError("pathloss_exp must be non-negative");
}

void Geometry::validate() const {
    if (!(radius > 0.0)) throw DomainError("radius must be positive");
    check_angle(angle_rx, "angle_rx");
    check_angle(angle_e, "angle_e");
    check_angle(angle_ris_legit, "angle_ris_legit");
}

const char* link_name(Link link) {
    switch (link) {
        case Link::BsRx: return "bs_rx";
        case Link::BsRisLegit: return "bs_ris_legit";
        case Link::RisLegitRx: return "ris_legit_rx";
        case Link::BsE: return "bs_e";
        case Link::BsRisEaves: return "bs_ris_eaves";
        case Link::RisEavesE: return "ris_eaves_e";
    }
    return "unknown";
}

NodePositions node_positions(const Geometry& geometry) {
    geometry.validate();
    NodePositions pos;
    pos.bs = Point::Zero();
    pos.rx = on_circle(geometry.radius, geometry.angle_rx);
    pos.e = on_circle(geometry.radius, geometry.angle_e);
    pos.ris_legit = on_circle(geometry.radius, geometry.angle_ris_legit);
    pos.ris_eaves = 0.5 * (pos.rx + pos.e);
    return pos;
}

double pathloss_gain(double distance, double exponent) {
    if (!(distance > 0.0)) throw DomainError("pathloss distance must be positive");
    return std::pow(distance, -exponent);
}

double distance_between(const Point& a, const Point& b) {
    const double d = (a - b).norm();
    if (!(d > 0.0)) throw DomainError("coincident link endpoints");
    return d;
}

LinkDistances link_distances(const Geometry& geometry) {
    const auto pos = node_positions(geometry);
    LinkDistances out;
    auto set = [&](Link link, const Point& a, const Point& b) {
        out.meters[static_cast<int>(link)] = distance_between(a, b);
    };
    set(Link::BsRx, pos.bs, pos.rx);
    set(Link::BsRisLegit, pos.bs, pos.ris_legit);
    set(Link::RisLegitRx, pos.ris_legit, pos.rx);
    set(Link::BsE, pos.bs, pos.e);
    set(Link::BsRisEaves, pos.bs, pos.ris_eaves);
    set(Link::RisEavesE, pos.ris_eaves, pos.e);
    return out;
}

void to_json(nlohmann::json& j, const SystemConfig& c) {
    j["n_bs"] = c.n_bs;
    j["m_rx"] = c.m_rx;
    j["k_e"] = c.k_e;
    j["l_ris"] = c.l_ris;
    j["lambda_ris"] = c.lambda_ris;
    j["power"] = c.power;
    j["noise_var"] = c.noise_var;
    j["pathloss_exp"] = c.pathloss_exp;
}

void from_json(const nlohmann::json& j, SystemConfig& c) {
    c.n_bs = j.value("n_bs", c.n_bs);
    c.m_rx = j.value("m_rx", c.m_rx);
    c.k_e = j.value("k_e", c.k_e);
    c.l_ris = j.value("l_ris", c.l_ris);
    c.lambda_ris = j.value("lambda_ris", c.lambda_ris);
    c.power = j.value("power", c.power);
    c.noise_var = j.value("noise_var", c.noise_var);
    c.pathloss_exp = j.value("pathloss_exp", c.pathloss_exp);
}

void to_json(nlohmann::json& j, const Geometry& g) {
    j["radius"] = g.radius;
    j["angle_rx"] = g.angle_rx;
    j["angle_e"] = g.angle_e;
    j["angle_ris_legit"] = g.angle_ris_legit;
}

void from_json(const nlohmann::json& j, Geometry& g) {
    g.radius = j.value("radius", g.radius);
    g.angle_rx = j.value("angle_rx", g.angle_rx);
    g.angle_e = j.value("angle_e", g.angle_e);
    g.angle_ris_legit = j.value("angle_ris_legit", g.angle_ris_legit);
}

SimulationConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!config_keys().count(key)) throw DomainError("unknown config key '" + key + "'");
    }
    SimulationConfig out;
    try {
        from_json(j, out.system);
        from_json(j, out.geometry);
    } catch (const nlohmann::json::type_error& e) {
        throw DomainError(std::string("config value has wrong type: ") + e.what());
    }
    out.system.validate();
    out.geometry.validate();
    return out;
}

SimulationConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

}  // namespace rispls
