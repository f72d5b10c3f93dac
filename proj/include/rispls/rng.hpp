#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace rispls {

// Seed scheme
// -----------
// Every random quantity is drawn from its own mt19937_64 stream. The stream
// seed is derived by folding a list of integer tags into the parent seed with
// splitmix64:
//
//     s = splitmix64(parent); for tag in tags: s = splitmix64(s ^ splitmix64(tag + 1))
//
// Tags used by the library:
//   sample_channels(seed)       -> derive_seed(seed, {kChannelStream, link_id})
//   init_design(seed, n_d)      -> derive_seed(seed, {kInitStream, n_d, what})
//   run_trial(master, snr, t)   -> derive_seed(master, {snr_index, trial_index})
//
// Normals are produced with Box-Muller on 53-bit uniforms so the streams are
// identical across standard libraries.

inline constexpr std::uint64_t kChannelStream = 0xC4A77E15ULL;
inline constexpr std::uint64_t kInitStream = 0x1A17D35EULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(parent);
    for (auto tag : tags) s = splitmix64(s ^ splitmix64(tag + 1));
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    /// Uniform phase in [0, 2 pi).
    double phase() { return 2.0 * std::numbers::pi * uniform(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rispls
