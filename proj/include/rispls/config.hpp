#pragma once

#include "rispls/types.hpp"

#include <array>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace rispls {

/// Antenna/element counts, power budget and noise level of one deployment.
/// Defaults: N=8, M=K=4, L=30, Lambda=150.
struct SystemConfig {
    int n_bs = 8;           // BS antennas
    int m_rx = 4;           // legitimate RX antennas
    int k_e = 4;            // eavesdropper antennas
    int l_ris = 30;         // legitimate RIS elements, 0 = no legitimate RIS
    int lambda_ris = 150;   // eavesdropping RIS elements
    double power = 1.0;     // total transmit power (linear)
    double noise_var = 1.0; // per-antenna AWGN variance
    double pathloss_exp = 2.0;

    /// Throws DomainError on the first violated invariant.
    void validate() const;

    int max_streams() const { return m_rx < n_bs ? m_rx : n_bs; }
};

/// Planar placement: BS at the origin, RX / E / legitimate RIS on a circle.
/// Angles are in degrees.
struct Geometry {
    double radius = 10.0;
    double angle_rx = 45.0;
    double angle_e = 85.0;
    double angle_ris_legit = 20.0;

    void validate() const;
};

using Point = Eigen::Vector2d;

struct NodePositions {
    Point bs;
    Point rx;
    Point e;
    Point ris_legit;
    Point ris_eaves;  // midpoint of the RX-E segment
};

enum class Link : int {
    BsRx = 0,
    BsRisLegit,
    RisLegitRx,
    BsE,
    BsRisEaves,
    RisEavesE,
};

inline constexpr int kLinkCount = 6;

const char* link_name(Link link);

struct LinkDistances {
    std::array<double, kLinkCount> meters{};

    double operator[](Link link) const { return meters[static_cast<int>(link)]; }
};

NodePositions node_positions(const Geometry& geometry);

/// distance^(-exponent). Throws DomainError for distance <= 0.
double pathloss_gain(double distance, double exponent);

/// Euclidean distance; throws DomainError when the points coincide.
double distance_between(const Point& a, const Point& b);

LinkDistances link_distances(const Geometry& geometry);

// JSON round trip. Unknown keys are rejected so typos do not silently fall back
// to defaults.
void to_json(nlohmann::json& j, const SystemConfig& config);
void from_json(const nlohmann::json& j, SystemConfig& config);
void to_json(nlohmann::json& j, const Geometry& geometry);
void from_json(const nlohmann::json& j, Geometry& geometry);

struct SimulationConfig {
    SystemConfig system;
    Geometry geometry;
};

/// Reads a flat JSON object holding SystemConfig and Geometry keys. Missing
/// keys keep their defaults.
SimulationConfig load_config(const std::filesystem::path& path);
SimulationConfig parse_config(const std::string& text);

}  // namespace rispls
