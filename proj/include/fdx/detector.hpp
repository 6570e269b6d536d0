#pragma once

#include "fdx/canceler.hpp"
#include "fdx/grid.hpp"
#include "fdx/types.hpp"

namespace fdx {

struct DetectionResult {
    std::vector<BitVec> bits;        // recovered bits per stream, payload order
    std::vector<CVec> symbols;       // decoded symbols per stream, data-cell order
    double ber = -1.0;               // set when truth is supplied
    double condition_floor = 0.0;    // worst channel conditioning seen
    long erased_bits = 0;            // bits on singular subcarriers

    // Errors including erasures counted at rate 1/2; set with ber.
    double error_count = 0.0;
};

// Zero-forcing detector matrix F = (H^H H)^{-1} H^H. `singular` is set when
// |det| falls below 1e-9 of ||H||_F^2 (the returned F is zero then).
CMat zf_matrix(const CMat& h_hat, bool& singular);

inline CMat zf_matrix(const CMat& h_hat) {
    bool s;
    return zf_matrix(h_hat, s);
}

// Per-subcarrier ZF detection of the cancelled lattice followed by hard QPSK
// demapping. Bits on singular subcarriers are erased and, when truth is
// given, counted as errors at rate 1/2.
DetectionResult detect(const RxLattice& cancelled, const ChannelEstimate& est,
                       const FrameLayout& layout,
                       const std::vector<BitVec>* truth_bits = nullptr);

// Hamming distance / length.
double count_errors(const BitVec& bits, const BitVec& truth);

}  // namespace fdx
