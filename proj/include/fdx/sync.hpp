#pragma once

#include "fdx/params.hpp"
#include "fdx/types.hpp"

namespace fdx {

// Length-62 Zadoff-Chu sequence on subcarriers k in {-31..-1, 1..31}.
struct ZcSequence {
    int root = 0;
    CVec values;  // 62 entries, k = -31..-1 then 1..31

    cplx value(int k) const {
        if (k < -31 || k > 31 || k == 0) throw std::out_of_range("ZcSequence::value: k out of range");
        return values[k < 0 ? k + 31 : k + 30];
    }
};

// Piecewise ZC generator with divisor 63 (the LTE roots 25/29 presuppose it).
// Root must be coprime with 63.
ZcSequence zc_generate(int root);

// N-point IDFT of the ZC sequence mapped onto its subcarriers: the ideal
// time-domain synchronization code p[n].
CVec pss_reference(int root, const SystemParams& p);

// Linear-phase Hamming-windowed FIR, unity DC gain, passband covering the
// PSS subcarriers.
RVec design_lowpass(const SystemParams& p);

// Causal FIR filtering, output length = input length.
CVec lowpass(const CVec& stream, const SystemParams& p);

struct NspReport {
    RVec corr_1;  // |cross-correlation| vs lag, desired-signal root
    RVec corr_2;  // self-interference root
    int peak_idx_1 = 0;
    int peak_idx_2 = 0;
    double nsp_1 = 0.0;  // peak over window mean
    double nsp_2 = 0.0;
};

// Cross-correlates the filtered stream against both reference codes over
// lags [0, n_c) and forms the normalized synchronization peak values.
NspReport nsp_scan(const CVec& filtered, const CVec& ref_desired, const CVec& ref_self, int n_c);

enum class SyncCase { BothPass, DesiredOnly, SelfOnly, Fail };

const char* to_string(SyncCase c);

struct SyncDecision {
    int tau_desired = -1;
    int tau_self = -1;
    SyncCase case_taken = SyncCase::Fail;

    bool ok() const { return case_taken != SyncCase::Fail; }
};

// The NSP index update: both peaks pass the feasibility test -> keep both;
// only one passes -> it serves for both timings; neither -> fail (the caller
// re-scans the next window).
SyncDecision nsp_switch(const NspReport& report, double threshold);

// Single-root baselines used by the synchronization experiment.
enum class SyncStrategy { Switching, DesiredOnly, SelfOnly };

const char* to_string(SyncStrategy s);
SyncStrategy sync_strategy_from_string(const std::string& s);

SyncDecision decide_sync(const NspReport& report, double threshold, SyncStrategy strategy);

// Precomputed spectra for the fused filter+correlate pipeline. Built once per
// experiment; read-only afterwards, safe to share across threads.
struct ScanContext {
    int fft_len = 0;     // working FFT length
    int n_c = 0;         // scan window (lags)
    int ref_len = 0;     // reference length N
    int group_delay = 0; // FIR delay compensated off reported peaks
    CVec lpf_fft;        // FFT of the low-pass impulse response
    CVec ref_fft_desired;
    CVec ref_fft_self;
};

ScanContext make_scan_context(const SystemParams& p, int desired_root, int self_root);

// Low-pass filters the raw Rx stream and scans it in one pass (identical to
// nsp_scan(lowpass(x)) up to round-off, with the FIR group delay subtracted
// so peak indices land on the unfiltered timeline). Correlation magnitude
// traces are not retained.
NspReport scan_stream(const CVec& rx, const ScanContext& ctx);

// Noise-only Monte Carlo calibration of the NSP threshold: returns the
// (1 - false_alarm) quantile of the per-scan max NSP over `trials` scans.
double calibrate_nsp_threshold(const SystemParams& p, int trials, double false_alarm, uint64_t seed);

}  // namespace fdx
