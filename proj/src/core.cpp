#include "gfdmbem/core.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace gfdmbem {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

CMat dft_matrix(int n) {
    if (n < 1) {
        throw std::invalid_argument("dft_matrix: size must be >= 1");
    }
    CMat w(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            // reduce the phase index mod n before multiplying to keep the
            // argument small for large a*b
            const long long idx = (static_cast<long long>(a) * b) % n;
            const double phi = -2.0 * std::numbers::pi * static_cast<double>(idx) / n;
            w(a, b) = scale * Cplx(std::cos(phi), std::sin(phi));
        }
    }
    return w;
}

const CMat& dft_cache(int n) {
    static std::mutex mutex;
    static std::map<int, CMat> cache;
    std::scoped_lock lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, dft_matrix(n)).first;
    }
    return it->second;
}

CMat circulant(const CVec& v) {
    const int n = static_cast<int>(v.size());
    if (n == 0) {
        throw std::invalid_argument("circulant: input vector must be non-empty");
    }
    CMat m(n, n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) {
            m(r, c) = v((r - c + n) % n);
        }
    }
    return m;
}

CMat kronecker(const CMat& a, const CMat& b) {
    if (a.size() == 0 || b.size() == 0) {
        throw std::invalid_argument("kronecker: inputs must be non-empty");
    }
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Cplx qpsk_point(int b0, int b1) {
    return Cplx(b0 ? -kInvSqrt2 : kInvSqrt2, b1 ? -kInvSqrt2 : kInvSqrt2);
}

std::vector<Cplx> qpsk_map(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 2 != 0) {
        throw std::invalid_argument("qpsk_map: bit count must be even");
    }
    std::vector<Cplx> out;
    out.reserve(bits.size() / 2);
    for (std::size_t i = 0; i < bits.size(); i += 2) {
        out.push_back(qpsk_point(bits[i], bits[i + 1]));
    }
    return out;
}

Cplx qpsk_slice(Cplx s) {
    // sign(0) = +: exact axis points break toward the positive quadrant
    return qpsk_point(s.real() < 0.0 ? 1 : 0, s.imag() < 0.0 ? 1 : 0);
}

std::pair<int, int> qpsk_bits(Cplx symbol) {
    return {symbol.real() < 0.0 ? 1 : 0, symbol.imag() < 0.0 ? 1 : 0};
}

int qpsk_bit_errors(Cplx a, Cplx b) {
    const auto [a0, a1] = qpsk_bits(a);
    const auto [b0, b1] = qpsk_bits(b);
    return (a0 != b0) + (a1 != b1);
}

}  // namespace gfdmbem
