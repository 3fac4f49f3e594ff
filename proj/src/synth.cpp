#include "landmatch/synth.hpp"

#include <cmath>
#include <numbers>

#include "landmatch/rng.hpp"

namespace landmatch {

double BarrelModel::latent(int land, double y) const {
    double v = 0;
    for (const LatentBump& bump : lands[static_cast<std::size_t>(land)]) {
        const double t = (y - bump.center) / bump.sigma;
        if (std::abs(t) > 6.0) continue;
        v += bump.amplitude * std::exp(-0.5 * t * t);
    }
    return v;
}

BarrelModel make_barrel(std::string barrel_id, std::uint64_t seed, double y_extent_um) {
    BarrelModel barrel;
    barrel.barrel_id = std::move(barrel_id);
    for (int land = 0; land < 6; ++land) {
        Xoshiro256 rng = Xoshiro256::stream(seed, static_cast<std::uint64_t>(land));
        const auto n_bumps = static_cast<int>(60 + rng.below(41));
        auto& bumps = barrel.lands[static_cast<std::size_t>(land)];
        bumps.reserve(static_cast<std::size_t>(n_bumps));
        for (int i = 0; i < n_bumps; ++i) {
            LatentBump bump;
            bump.center = rng.uniform(0.0, y_extent_um);
            bump.sigma = rng.uniform(10.0, 50.0) / 2.0;
            bump.amplitude = rng.uniform(0.5, 4.0) * (rng.below(2) == 0 ? 1.0 : -1.0);
            bumps.push_back(bump);
        }
        // Groove bottoms sit a land-specific distance outside each land edge,
        // so edge residuals identify the land instead of being shared.
        barrel.groove_offsets[static_cast<std::size_t>(land)] = {rng.uniform(10.0, 40.0),
                                                                 rng.uniform(10.0, 40.0)};
    }
    Xoshiro256 tilt_rng = Xoshiro256::stream(seed, 6);
    barrel.tilt_deg = tilt_rng.uniform(-2.0, 2.0);
    return barrel;
}

namespace {

// Each damage component's phase drifts at a land-specific rate per row, like
// a scratch wandering across the surface. Rows a few steps apart then see the
// band shifted by unrelated fractions of every wavelength, so crosscuts taken
// at different heights decorrelate while each single row stays smooth.
constexpr int kDamageComponents = 5;
constexpr double kDamageWavelengths[kDamageComponents] = {160.0, 130.0, 105.0, 85.0, 68.0};

struct DamagePhases {
    std::array<double, kDamageComponents> start{};
    std::array<double, kDamageComponents> rate{};  // rad per row
};

DamagePhases make_damage_phases(std::uint64_t seed) {
    Xoshiro256 rng(seed);
    DamagePhases p;
    for (auto& s : p.start) s = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (auto& r : p.rate) r = rng.uniform(0.6, 2.7) * (rng.below(2) == 0 ? 1.0 : -1.0);
    return p;
}

// The latent pattern is smooth (bump sigma >= 10 µm), so cells read it from
// a dense precomputed grid via linear interpolation instead of summing every
// bump per cell.
class LatentTable {
public:
    LatentTable(const BarrelModel& barrel, int land, double lo, double hi) : lo_(lo) {
        const auto n = static_cast<Eigen::Index>(std::ceil((hi - lo) / kStep)) + 2;
        values_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            values_[i] = barrel.latent(land, lo + static_cast<double>(i) * kStep);
    }

    double operator()(double y) const {
        const double t = (y - lo_) / kStep;
        const auto i = static_cast<Eigen::Index>(t);
        const double frac = t - static_cast<double>(i);
        return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
    }

private:
    static constexpr double kStep = 0.25;  // µm; interpolation error ~1e-4 µm
    double lo_;
    Eigen::VectorXd values_;
};

}  // namespace

Surface fire_land(const BarrelModel& barrel, const ShotConfig& cfg, int land) {
    const auto size_x = static_cast<Eigen::Index>(std::floor(cfg.height_um / cfg.increment_x)) + 1;
    const auto size_y = static_cast<Eigen::Index>(std::floor(cfg.width_um / cfg.increment_y)) + 1;
    const double y_center = cfg.width_um / 2.0;
    const double tilt = std::tan(barrel.tilt_deg * std::numbers::pi / 180.0);
    const double land_half = y_center - cfg.margin_um;
    const double arc_at_edge = std::sqrt(cfg.radius * cfg.radius - land_half * land_half);
    const double left_peak = cfg.margin_um - cfg.shoulder_offset;
    const double right_peak = cfg.width_um - cfg.margin_um + cfg.shoulder_offset;
    const auto& grooves = barrel.groove_offsets[static_cast<std::size_t>(land)];
    const double left_groove = cfg.margin_um - grooves[0];
    const double right_groove = cfg.width_um - cfg.margin_um + grooves[1];
    const auto trough = [&](double d) {
        const double t = std::abs(d);
        if (t >= cfg.groove_halfwidth) return 0.0;
        return -0.5 * cfg.groove_depth *
               (1.0 + std::cos(std::numbers::pi * t / cfg.groove_halfwidth));
    };
    const double max_shear = std::abs(tilt) * cfg.height_um + 1.0;
    const LatentTable latent(barrel, land, -max_shear, cfg.width_um + max_shear);

    Xoshiro256 noise = Xoshiro256::stream(cfg.seed, static_cast<std::uint64_t>(land));
    const DamagePhases dmg = make_damage_phases(
        Xoshiro256::derive_seed(cfg.seed, static_cast<std::uint64_t>(land) + 100));

    Surface surface;
    surface.meta.size_x = size_x;
    surface.meta.size_y = size_y;
    surface.meta.increment_x = cfg.increment_x;
    surface.meta.increment_y = cfg.increment_y;
    surface.meta.id = barrel.barrel_id + "-" + cfg.shot_id + "-L" + std::to_string(land + 1);
    surface.heights.resize(size_x, size_y);

    for (Eigen::Index i = 0; i < size_x; ++i) {
        const double x = static_cast<double>(i) * cfg.increment_x;
        const double decay = std::pow(1.0 - cfg.decay_per_100um, x / 100.0);
        double damage_scale = 0;
        double phases[kDamageComponents] = {};
        if (cfg.damage) {
            damage_scale = cfg.damage_fade_height > 0
                               ? std::max(0.0, 1.0 - x / cfg.damage_fade_height)
                               : 1.0;
            for (int m = 0; m < kDamageComponents; ++m)
                phases[m] = dmg.start[m] + static_cast<double>(i) * dmg.rate[m];
        }
        for (Eigen::Index j = 0; j < size_y; ++j) {
            const double y = static_cast<double>(j) * cfg.increment_y;

            const double dy = y - y_center;
            double h = std::abs(dy) <= land_half
                           ? std::sqrt(cfg.radius * cfg.radius - dy * dy) - arc_at_edge
                           : 0.0;

            const double tl = (y - left_peak) / cfg.shoulder_sigma;
            const double tr = (y - right_peak) / cfg.shoulder_sigma;
            h += cfg.shoulder_amp * (std::exp(-0.5 * tl * tl) + std::exp(-0.5 * tr * tr));
            h += trough(y - left_groove) + trough(y - right_groove);

            h += decay * latent(y - tilt * x);

            if (damage_scale > 0 && std::abs(y - cfg.damage_center) <= cfg.damage_width / 2.0) {
                double ridge = 0;
                for (int m = 0; m < kDamageComponents; ++m)
                    ridge +=
                        std::sin(2.0 * std::numbers::pi * y / kDamageWavelengths[m] + phases[m]);
                h += cfg.damage_amp * damage_scale * ridge /
                     std::numbers::sqrt2 / std::sqrt(kDamageComponents);
            }

            if (cfg.noise_sd > 0) h += noise.normal(0.0, cfg.noise_sd);
            surface.heights(i, j) = h;
        }
    }
    return surface;
}

std::vector<Surface> fire(const BarrelModel& barrel, const ShotConfig& cfg) {
    std::vector<Surface> lands;
    lands.reserve(6);
    for (int land = 0; land < 6; ++land) lands.push_back(fire_land(barrel, cfg, land));
    return lands;
}

}  // namespace landmatch
