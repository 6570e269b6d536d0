#pragma once

#include "fdx/types.hpp"

#include <map>
#include <string>

namespace fdx {

// Duplex mode of a link trial. The MIMO frame uses the joint four-port
// reference-signal pattern (two ports per node); the SISO modes use the
// two-port and one-port patterns.
enum class DuplexMode { HdSiso, FdSiso, FdMimo };

enum class NodeRole { A, B };

const char* to_string(DuplexMode m);
DuplexMode duplex_mode_from_string(const std::string& s);

// Radio and frame constants. Defaults carry the prototype transmission
// parameters (2048-point FFT at 15 kHz spacing, extended CP, 1200 data
// subcarriers, 10 ms frame) plus the impairment model settings.
struct SystemParams {
    // Carrier/sampling
    double carrier_hz = 2.52e9;          // informational
    double sample_rate = 30.72e6;
    int fft_size = 2048;
    int cp_len = 512;                    // extended CP
    double subcarrier_spacing_hz = 15e3;
    int n_data_subcarriers = 1200;
    int symbols_per_slot = 6;
    int slots_per_frame = 20;
    int n_tx = 2;
    int n_rx = 2;

    // Synchronization
    int root_index_1 = 25;               // node A PSS root
    int root_index_2 = 29;               // node B PSS root
    int pss_len = 62;
    double nsp_threshold = 4.45;         // calibrated: <=1% false alarm on noise-only scans
    int nsp_window = 0;                  // correlation scan span; 0 = one half-frame
    int lpf_taps = 129;
    double lpf_cutoff_hz = 650e3;        // 1.4x the PSS half-bandwidth

    // Power / impairments
    double tx_power_dbm = 23.0;          // per node, split across its Tx ports
    double papr_margin_db = 10.0;
    double noise_floor_dbm = -90.0;
    double p1db_tx_dbm = 32.0;
    double p1db_rx_dbm = -15.0;
    double pa_smoothness = 2.0;          // Rapp knee, Tx PA
    double lna_smoothness = 3.0;         // Rapp knee, Rx LNA
    bool nonlinear_enabled = true;       // Tx PA + Rx LNA on/off (ablation switch)
    double alpha_selftalk_db = -43.0;
    double alpha_crosstalk_db = -58.0;

    // Channel model
    std::string channel_profile = "exponential-pdp";  // or "flat"
    int pdp_taps = 4;
    int pdp_tap_spacing = 8;             // samples between taps
    double pdp_decay_db = 3.0;           // per-tap decay
    int delay_desired_max = 64;          // samples, uniform draw
    int delay_self_max = 8;              // samples, uniform draw (<= delay_desired)

    // Receiver
    int demod_advance = 16;              // FFT window backed into the CP, samples
    int est_smooth_taps = 7;             // odd binomial width; 1 disables

    // Derived quantities
    int samples_per_symbol() const { return fft_size + cp_len; }
    int symbols_per_frame() const { return symbols_per_slot * slots_per_frame; }
    int samples_per_frame() const { return symbols_per_frame() * samples_per_symbol(); }
    int samples_per_half_frame() const { return samples_per_frame() / 2; }
    double frame_duration_s() const { return samples_per_frame() / sample_rate; }
    int scan_window() const { return nsp_window > 0 ? nsp_window : samples_per_half_frame(); }
    // PSS sits in the last OFDM symbol of the first slot of each half-frame.
    int pss_symbol_index(int half) const {
        return half * (symbols_per_frame() / 2) + (symbols_per_slot - 1);
    }

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    // Applies one "key = value" setting (dotted section prefixes allowed).
    // Returns false if the key is unknown.
    bool apply(const std::string& key, const std::string& value);
};

// Parses a plain-text config file ("key = value", '#' comments) into params.
// Unknown keys throw std::invalid_argument.
SystemParams load_params(const std::string& path);

// Number of Tx ports a node uses in the given mode (Rx port count matches).
int mode_ports(DuplexMode m);
// Joint CRS pattern size for the mode (1, 2 or 4 ports).
int mode_crs_ports(DuplexMode m);
// First joint CRS port owned by a node.
int node_port_offset(DuplexMode m, NodeRole role);
// PSS root transmitted by a node.
int node_pss_root(const SystemParams& p, NodeRole role);

}  // namespace fdx
