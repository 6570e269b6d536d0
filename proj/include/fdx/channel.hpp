#pragma once

#include "fdx/params.hpp"
#include "fdx/types.hpp"

#include <iosfwd>
#include <vector>

namespace fdx {

// Memoryless Rapp AM/AM model (AM/PM = 0). The saturation amplitude is set
// so the gain at the 1-dB compression point is exactly 1 dB below the
// small-signal gain.
struct PaModel {
    double p1db_dbm = 0.0;
    double small_signal_gain_db = 0.0;
    double smoothness = 2.0;
    double a_sat = 0.0;
};

PaModel make_rapp_pa(double p1db_dbm, double smoothness, double gain_db = 0.0);

// AM/AM companding, sample by sample. Stream units are sqrt(mW).
CVec pa_apply(const CVec& stream, const PaModel& model);

// Tap-domain realization of the desired channel H and the residual
// self-interference channel G (post analog cancellation), plus the two path
// delays. Impulse responses are stored at sample resolution.
struct ChannelRealization {
    int n_rx = 0;
    int n_tx = 0;
    std::vector<CVec> h_ir;  // n_rx * n_tx entries, rx-major
    std::vector<CVec> g_ir;
    int delay_desired = 0;
    int delay_self = 0;
    uint64_t seed = 0;

    const CVec& h(int rx, int tx) const { return h_ir[rx * n_tx + tx]; }
    const CVec& g(int rx, int tx) const { return g_ir[rx * n_tx + tx]; }
    CVec& h(int rx, int tx) { return h_ir[rx * n_tx + tx]; }
    CVec& g(int rx, int tx) { return g_ir[rx * n_tx + tx]; }
};

// Draws a random realization. Desired taps are globally rescaled so the
// post-channel link quality at params.tx_power_dbm and the configured noise
// floor equals lq_target_db exactly for this realization. Self-interference
// taps carry mean energy 10^(alpha_s/10) on the diagonal and 10^(alpha_c/10)
// off it, relative to unit Tx power. profile is "flat" or "exponential-pdp".
ChannelRealization realize_channel(const SystemParams& p, double lq_target_db,
                                   const std::string& profile, uint64_t seed);

// Reference-channel realization for reliability runs: flat desired channel
// with random unitary mixing (so zero-forcing sees a bounded condition
// number and the frame-success tail is measurable), exact LQ normalization,
// random delays, and the usual random self-interference taps.
ChannelRealization realize_reference_channel(const SystemParams& p, double lq_target_db,
                                             uint64_t seed);

// Received-signal components at one node's Rx ports, before the LNA.
struct RxParts {
    std::vector<CVec> desired;
    std::vector<CVec> self_si;
    std::vector<CVec> noise;

    int ports() const { return static_cast<int>(desired.size()); }
    CVec sum(int rx) const { return desired[rx] + self_si[rx] + noise[rx]; }
};

// Applies H (with delay_desired) to the partner streams, G (with delay_self)
// to the own streams, and draws circular complex Gaussian noise at the
// configured floor. All outputs share one length.
RxParts propagate_parts(const std::vector<CVec>& tx_self, const std::vector<CVec>& tx_partner,
                        const ChannelRealization& ch, const SystemParams& p, bool noise_on,
                        Rng& rng, int out_len = 0);

// The plain received streams (sum of the parts).
std::vector<CVec> propagate(const std::vector<CVec>& tx_self, const std::vector<CVec>& tx_partner,
                            const ChannelRealization& ch, const SystemParams& p, bool noise_on,
                            Rng& rng);

// Scales a modulated stream to the given average power (dBm, sqrt(mW) units).
CVec scale_to_power(const CVec& stream, double power_dbm);
void scale_to_power_inplace(CVec& stream, double power_dbm);

// Text dump/reload of a realization for regression pinning.
void dump_channel(std::ostream& os, const ChannelRealization& ch);
ChannelRealization load_channel(std::istream& is);

}  // namespace fdx
