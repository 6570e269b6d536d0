#pragma once

#include "fdx/grid.hpp"
#include "fdx/params.hpp"
#include "fdx/types.hpp"

namespace fdx {

// Per-subcarrier estimates of the desired channel H-hat and the residual
// self-interference channel G-hat, defined on every active subcarrier
// (interpolated between pilot combs, held constant across the frame).
struct ChannelEstimate {
    int n_rx = 0;
    int n_tx = 0;
    std::vector<CVec> h;  // rx-major coefficient spectra, length = active band
    std::vector<CVec> g;
    double est_noise_var = 0.0;

    const CVec& h_of(int rx, int tx) const { return h[rx * n_tx + tx]; }
    const CVec& g_of(int rx, int tx) const { return g[rx * n_tx + tx]; }
    CVec& h_of(int rx, int tx) { return h[rx * n_tx + tx]; }
    CVec& g_of(int rx, int tx) { return g[rx * n_tx + tx]; }

    CMat h_at(int a) const;
    CMat g_at(int a) const;
};

// Least-squares channel estimation on the joint CRS pattern: y/p at each
// pilot cell, averaged over the frame per comb subcarrier, then linear
// interpolation across frequency (nearest-neighbour extrapolation at band
// edges) and an optional short binomial smoother. The node's own ports feed
// G-hat, the partner's feed H-hat.
//
// h_delay / g_delay are the receiver's bulk timing offsets (estimated path
// delay minus FFT window start, in samples). The pilot ratios are derotated
// by them before interpolation and re-rotated afterwards, so the band-edge
// extrapolation works on a slow channel instead of a fast phase ramp. The
// returned estimates still carry the full ramp.
ChannelEstimate estimate_channels(const RxLattice& rx, const FrameLayout& layout,
                                  const SystemParams& p, NodeRole role, double h_delay = 0.0,
                                  double g_delay = 0.0);

// Rebuilt self-interference lattice: for each Rx port i and cell (sym, a),
// sum_j g_hat[i][j][a] * x_own[j](sym, a). Cells outside [a_begin, a_end)
// are left at zero.
RxLattice rebuild_si(const ChannelEstimate& est, const ResourceGrid& own_tx, int a_begin = 0,
                     int a_end = -1);

// Elementwise y - y_hat per Rx port.
RxLattice subtract(const RxLattice& rx, const RxLattice& rebuilt);

// Modified-EVM cancellation traces. delta readings clamp at the -200 dB
// sentinel to keep telemetry bounded.
struct CancellationTrace {
    RVec e_k;          // per-cell residual error power
    RVec si_power;     // per-cell received self-interference power
    RVec delta_k_db;   // per-cell instantaneous cancellation level
    double delta_frame_db = 0.0;  // energy-ratio aggregate over the frame
};

inline constexpr double kDeltaFloorDb = -200.0;

// Eq-style metric against simulator-side truth; mirrors the testbed's
// measurement unit.
CancellationTrace cancellation_metric(const RxLattice& true_si, const RxLattice& rebuilt);

// Frame aggregate only (same arithmetic, no per-cell traces).
double cancellation_level_db(const RxLattice& true_si, const RxLattice& rebuilt);

}  // namespace fdx
