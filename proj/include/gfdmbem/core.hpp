// Shared numeric primitives: unitary DFT matrices, circulant / Kronecker
// constructors and the QPSK alphabet used by every other module.
#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gfdmbem {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// Unitary n x n DFT matrix, W(a,b) = exp(-j 2 pi a b / n) / sqrt(n).
// W^H W = I, so the inverse transform is the adjoint.
CMat dft_matrix(int n);

// Process-wide cache of dft_matrix results; safe to use from concurrent
// Monte Carlo workers.
const CMat& dft_cache(int n);

// Circulant matrix whose first column is v; column c is v cyclically
// shifted down by c.
CMat circulant(const CVec& v);

CMat kronecker(const CMat& a, const CMat& b);

// Gray-mapped unit-energy QPSK. Bit pair (b0, b1) selects the sign of the
// I and Q components respectively, 00 -> (+1+j)/sqrt(2).
Cplx qpsk_point(int b0, int b1);

// Maps a bit stream (values 0/1, even length) to QPSK symbols.
std::vector<Cplx> qpsk_map(const std::vector<std::uint8_t>& bits);

// Nearest alphabet point. Components that are exactly zero slice toward +.
Cplx qpsk_slice(Cplx s);

// Bit pair of an alphabet point (inverse of qpsk_point).
std::pair<int, int> qpsk_bits(Cplx symbol);

// Hamming distance between the Gray labels of two alphabet points.
int qpsk_bit_errors(Cplx a, Cplx b);

}  // namespace gfdmbem
