#include "gfdmbem/rng.hpp"

#include <cmath>
#include <numbers>

namespace gfdmbem {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t trial, Stream stream)
    : engine_(mix_seed(mix_seed(master_seed ^ mix_seed(trial)) ^ static_cast<std::uint64_t>(stream))) {}

double RandomStream::uniform() {
    // 53-bit mantissa, mapped to (0, 1] so log() below is always finite
    const std::uint64_t r = engine_() >> 11;
    return (static_cast<double>(r) + 1.0) * 0x1.0p-53;
}

Cplx RandomStream::gauss_c() {
    // Box-Muller; one complex draw consumes exactly two uniforms
    const double u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-std::log(u1));  // Rayleigh with E{mag^2} = 1
    const double phi = 2.0 * std::numbers::pi * u2;
    return Cplx(mag * std::cos(phi), mag * std::sin(phi));
}

int RandomStream::bit() {
    if (bits_left_ == 0) {
        bit_buffer_ = engine_();
        bits_left_ = 64;
    }
    const int b = static_cast<int>(bit_buffer_ & 1u);
    bit_buffer_ >>= 1;
    --bits_left_;
    return b;
}

Cplx RandomStream::qpsk_symbol() {
    const int b0 = bit();
    const int b1 = bit();
    return qpsk_point(b0, b1);
}

}  // namespace gfdmbem
