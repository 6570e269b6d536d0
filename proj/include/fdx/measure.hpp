#pragma once

#include "fdx/budget.hpp"
#include "fdx/canceler.hpp"
#include "fdx/channel.hpp"
#include "fdx/detector.hpp"
#include "fdx/grid.hpp"
#include "fdx/params.hpp"
#include "fdx/sync.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fdx {

// Mean |sample|^2 over the stream (transmitters off).
double noise_variance(const CVec& stream);
double noise_variance(const std::vector<CVec>& streams);

struct LinkQualityEstimate {
    double lq_db = 0.0;
    double noise_var = 0.0;      // total across Rx ports
    double signal_energy = 0.0;  // mean ||y||_F^2 per time index
};

inline constexpr double kLqFloorDb = -40.0;

// LQ ~ (mean ||y||^2 - sigma^2) / sigma^2, clamped at the -40 dB floor.
// noise_var_per_port is the per-port sample variance.
LinkQualityEstimate link_quality(const std::vector<CVec>& rx, double noise_var_per_port);

struct MeasurementRecord {
    long trial_id = 0;
    DuplexMode duplex_mode = DuplexMode::FdMimo;
    double p_t_dbm = 0.0;
    double lq_db = 0.0;
    SyncCase sync_case = SyncCase::Fail;
    bool sync_ok = false;
    std::optional<double> delta_frame_db;
    std::optional<double> total_sic_db;
    std::optional<double> ber;
    double throughput_bps = 0.0;
    uint64_t seed = 0;
};

// Shared per-cell state of one experiment grid point; read-only during trials.
struct TrialContext {
    SystemParams params;  // mode-adjusted port counts, P_T applied
    DuplexMode mode = DuplexMode::FdMimo;
    std::shared_ptr<const FrameLayout> layout;
    ScanContext scan;
    PaModel tx_pa;
    PaModel rx_lna;
    double alpha_total_db = 0.0;  // analog level for this mode, negative
};

TrialContext make_trial_context(const SystemParams& base, DuplexMode mode, double p_t_dbm);

struct TrialOptions {
    SyncStrategy strategy = SyncStrategy::Switching;
    bool sync_only = false;        // stop after the sync decision
    bool want_metric = true;       // cancellation level vs simulator truth
    bool want_detection = true;    // ZF detection and BER
    bool genie_timing = false;     // bypass sync, use true delays
    bool reference_channel = false;  // unitary flat desired channel (reliability runs)
};

struct TrialResult {
    bool sync_ok = false;
    SyncCase sync_case = SyncCase::Fail;
    int tau_err_desired = 0;
    int tau_err_self = 0;
    std::optional<double> delta_frame_db;
    std::optional<double> total_sic_db;
    std::optional<double> ber;
    double error_count = 0.0;
    long bits_total = 0;
    double correct_bits = 0.0;
    bool frame_success = false;  // sync ok and zero bit errors
};

// One full link trial at the measuring node: build both nodes' frames,
// impair, propagate, synchronize, cancel, detect.
TrialResult run_link_trial(const TrialContext& ctx, double lq_db, uint64_t seed,
                           const TrialOptions& opt);

struct ExperimentConfig {
    long trials = 500;
    std::vector<double> p_t_list = {0.0, 7.0, 15.0, 20.0, 23.0};
    std::vector<DuplexMode> modes = {DuplexMode::FdMimo};
    double lq_min = 0.0;
    double lq_max = 40.0;
    double lq_step = 3.0;
    SyncStrategy strategy = SyncStrategy::Switching;
    // required-lq search
    std::vector<double> targets = {0.99999};
    double lq_ceiling = 45.0;
    double lq_resolution = 0.5;
    long max_frames_per_point = 100000;
    double confidence = 0.95;
    bool reference_channel = true;  // required-lq runs on the reference channel
    int threads = 0;  // 0: FDX_THREADS or hardware concurrency

    bool apply(const std::string& key, const std::string& value);
};

struct ExperimentOutput {
    std::vector<MeasurementRecord> records;
    std::vector<std::string> summary;   // human-readable per-cell aggregates
    std::string data_csv;               // full CSV text (records)
    std::string summary_csv;
};

ExperimentOutput run_sync_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                     uint64_t master_seed);
ExperimentOutput run_sic_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                    uint64_t master_seed);
ExperimentOutput run_required_lq_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                            uint64_t master_seed);
ExperimentOutput run_throughput_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                           uint64_t master_seed);

// Required-LQ search result for one (mode, P_T, target) cell.
struct RequiredLqResult {
    DuplexMode mode;
    double p_t_dbm = 0.0;
    double target = 0.0;
    double required_lq_db = 0.0;
    bool saturated = false;
    long frames_used = 0;
};

// Measures the frame-success rate at one LQ point with Wilson-bound early
// stopping against `target`; used by the required-LQ search and its tests.
struct SuccessEstimate {
    long n = 0;
    long successes = 0;
    double rate() const { return n > 0 ? double(successes) / n : 0.0; }
};

SuccessEstimate measure_frame_success(const TrialContext& ctx, double lq_db, double target,
                                      long max_frames, double confidence, uint64_t seed,
                                      int threads, const TrialOptions& opt);

// Wilson score interval.
void wilson_bounds(long successes, long n, double confidence, double& lo, double& hi);

// Deterministic parallel map over [0, n) honoring FDX_THREADS.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);
int resolve_threads(int requested);

// CSV serialization per the fixed schema; header_lines are emitted as
// leading '#' comments.
std::string records_to_csv(const std::vector<MeasurementRecord>& records,
                           const std::vector<std::string>& header_lines);

}  // namespace fdx
