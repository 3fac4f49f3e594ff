#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "landmatch/x3p.hpp"

namespace landmatch {

/// One Gaussian-bump component of a land's latent striation pattern.
struct LatentBump {
    double center = 0;     // µm along y
    double sigma = 0;      // µm
    double amplitude = 0;  // µm, signed
};

/// A barrel's persistent markings: one latent striation function per land,
/// per-land groove-bottom offsets, and a rifling tilt. All are fixed at
/// construction, so every shot from the same barrel carries the same pattern.
struct BarrelModel {
    std::string barrel_id;
    std::array<std::vector<LatentBump>, 6> lands;
    std::array<std::array<double, 2>, 6> groove_offsets{};  // µm outward from each land edge
    double tilt_deg = 0;

    double latent(int land, double y) const;
};

/// Samples a barrel: per land, 60-100 bumps with widths 10-50 µm and
/// amplitudes 0.5-4 µm of random sign, spread over the given y extent, plus
/// groove-bottom offsets of 10-40 µm per side.
BarrelModel make_barrel(std::string barrel_id, std::uint64_t seed, double y_extent_um = 2500.0);

struct ShotConfig {
    double noise_sd = 0.1;          // µm, white measurement noise
    double decay_per_100um = 0.2;   // latent amplitude decay per 100 µm of height
    double radius = 4666.0;         // µm, land curvature
    double height_um = 300.0;       // scan extent along the bullet axis
    double width_um = 2500.0;       // scan extent around the circumference
    double increment_x = 3.125;     // µm
    double increment_y = 1.5625;    // µm
    double margin_um = 250.0;       // land-edge-to-scan-edge distance each side
    double shoulder_amp = 30.0;     // µm
    double shoulder_sigma = 50.0;   // µm
    double shoulder_offset = 180.0; // peak distance outside each land edge, µm
    double groove_depth = 15.0;     // µm below the land edges
    double groove_halfwidth = 45.0; // µm, compact cosine trough support

    bool damage = false;            // scratch band crossing the striae
    double damage_center = 1250.0;  // µm along y
    double damage_width = 500.0;    // µm
    double damage_amp = 8.0;        // µm
    double damage_fade_height = -1; // µm; damage fades to zero here, <0 = full height

    std::string shot_id = "shot";
    std::uint64_t seed = 0;
};

/// Fires the barrel once: six land surfaces, each an arc bounded by grooves
/// and shoulders plus the height-decayed, tilt-sheared latent pattern plus
/// noise and optional damage. Deterministic in (barrel, cfg.seed).
std::vector<Surface> fire(const BarrelModel& barrel, const ShotConfig& cfg);

/// One land of the shot (0-based); fire() assembles all six.
Surface fire_land(const BarrelModel& barrel, const ShotConfig& cfg, int land);

}  // namespace landmatch
