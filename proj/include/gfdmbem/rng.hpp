// Deterministic, counter-seeded random streams for reproducible Monte Carlo
// sweeps. Distributions are hand-rolled on top of std::mt19937_64 so that a
// (seed, trial) pair produces byte-identical draws on every platform;
// std::normal_distribution and friends are implementation-defined.
#pragma once

#include <cstdint>
#include <random>

#include "gfdmbem/core.hpp"

namespace gfdmbem {

// splitmix64; used to derive well-separated stream seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t x);

// Stream identifiers so the channel, noise and data draws of one trial are
// independent and stable when other draws are added or reordered.
enum class Stream : std::uint64_t {
    Channel = 0x1,
    Noise = 0x2,
    Data = 0x3,
    Pilot = 0x4,
};

class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t trial, Stream stream);

    // uniform in (0, 1]
    double uniform();
    // standard complex circular Gaussian: real/imag each N(0, 1/2)
    Cplx gauss_c();
    // uniform bit
    int bit();
    Cplx qpsk_symbol();

private:
    std::mt19937_64 engine_;
    std::uint64_t bit_buffer_ = 0;
    int bits_left_ = 0;
};

}  // namespace gfdmbem
