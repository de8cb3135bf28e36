#ifndef IOSIM_CHANNEL_HPP
#define IOSIM_CHANNEL_HPP

#include <string>

#include "iosim/types.hpp"

namespace iosim {

/// Distance-dependent attenuation ref_gain * d^(-alpha), d in meters
/// against a 1 m reference. Throws on d <= 0.
double path_loss(double d, double alpha, double ref_gain = 1e-3);

/// BS-user distance from the triangle BS - surface - user:
///   d = sqrt(d_bi^2 + d_iu^2 - 2 d_bi d_iu sin(delta)).
/// Throws when the radicand is negative (invalid geometry); a zero result is
/// returned as-is and must be rejected by the caller.
double user_distance(double d_bi, double d_iu, double delta);

/// Draws one Rayleigh-fading realization: every entry i.i.d. CN(0, v) with v
/// the path loss of its link. Deterministic given cfg.seed (generator
/// Philox::kName); user angles are taken from cfg.geometry or, when absent,
/// drawn uniformly in [0, pi/2].
///
/// Draw order (fixed, part of the determinism contract): reflected-user
/// angles, transmitted-user angles, G row-major, then h_d, h_r, h_t column
/// by column; each complex entry draws re before im.
ChannelSet sample_channels(const SystemConfig& cfg);

/// JSON serialization (small realizations, human-inspectable).
std::string channels_to_json(const ChannelSet& ch, std::uint64_t seed);
ChannelSet channels_from_json(const std::string& text);

/// Flat binary serialization: fixed header (magic, dimensions, seed,
/// generator name) followed by row-major little-endian interleaved re/im
/// doubles for G, h_d, h_r, h_t.
void save_channels_binary(const ChannelSet& ch, std::uint64_t seed,
                          const std::string& path);
ChannelSet load_channels_binary(const std::string& path,
                                std::uint64_t* seed_out = nullptr,
                                std::string* generator_out = nullptr);

}  // namespace iosim

#endif
