#include "fdx/measure.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace fdx {

double noise_variance(const CVec& stream) {
    if (stream.size() == 0) throw std::invalid_argument("noise_variance: empty stream");
    return mean_power(stream);
}

double noise_variance(const std::vector<CVec>& streams) {
    if (streams.empty()) throw std::invalid_argument("noise_variance: no streams");
    double acc = 0.0;
    for (const auto& s : streams) acc += noise_variance(s);
    return acc / streams.size();
}

LinkQualityEstimate link_quality(const std::vector<CVec>& rx, double noise_var_per_port) {
    if (noise_var_per_port <= 0.0) throw std::invalid_argument("link_quality: noise variance must be positive");
    if (rx.empty() || rx[0].size() == 0) throw std::invalid_argument("link_quality: empty input");
    LinkQualityEstimate e;
    double acc = 0.0;
    for (const auto& s : rx) acc += s.squaredNorm();
    e.signal_energy = acc / rx[0].size();  // mean ||y||_F^2 per time index
    e.noise_var = noise_var_per_port * rx.size();
    double lq_lin = (e.signal_energy - e.noise_var) / e.noise_var;
    e.lq_db = std::max(kLqFloorDb, lin_to_db(std::max(lq_lin, db_to_lin(kLqFloorDb))));
    return e;
}

TrialContext make_trial_context(const SystemParams& base, DuplexMode mode, double p_t_dbm) {
    TrialContext ctx;
    ctx.params = base;
    ctx.params.n_tx = mode_ports(mode);
    ctx.params.n_rx = mode_ports(mode);
    ctx.params.tx_power_dbm = p_t_dbm;
    ctx.mode = mode;
    ctx.layout = std::make_shared<FrameLayout>(ctx.params, mode);
    // The measuring node is node A: the desired PSS comes from its partner.
    ctx.scan = make_scan_context(ctx.params, node_pss_root(ctx.params, NodeRole::B),
                                 node_pss_root(ctx.params, NodeRole::A));
    ctx.tx_pa = make_rapp_pa(ctx.params.p1db_tx_dbm, ctx.params.pa_smoothness);
    ctx.rx_lna = make_rapp_pa(ctx.params.p1db_rx_dbm, ctx.params.lna_smoothness);
    if (mode == DuplexMode::FdSiso) {
        ctx.alpha_total_db = ctx.params.alpha_selftalk_db;  // single antenna, self-talk only
    } else {
        ctx.alpha_total_db = budget::residual_analog_power(p_t_dbm, ctx.params.alpha_selftalk_db,
                                                           ctx.params.alpha_crosstalk_db)
                                 .alpha_total_db;
    }
    return ctx;
}

TrialResult run_link_trial(const TrialContext& ctx, double lq_db, uint64_t seed,
                           const TrialOptions& opt) {
    const SystemParams& p = ctx.params;
    const FrameLayout& layout = *ctx.layout;
    const int ports = mode_ports(ctx.mode);
    const int S = p.samples_per_symbol();
    const bool has_si = ctx.mode != DuplexMode::HdSiso;

    TrialResult res;

    ChannelRealization ch = opt.reference_channel
                                ? realize_reference_channel(p, lq_db, mix_seed(seed, 3))
                                : realize_channel(p, lq_db, p.channel_profile, mix_seed(seed, 3));

    // Payloads and frames for both nodes.
    const int cap = layout.data_capacity_bits_per_port();
    auto make_payload = [&](uint64_t s) {
        Rng rng = make_rng(s);
        std::vector<BitVec> bits(ports);
        for (auto& b : bits) b = random_bits(cap, rng);
        return bits;
    };
    std::vector<BitVec> pay_a = make_payload(mix_seed(seed, 1));
    std::vector<BitVec> pay_b = make_payload(mix_seed(seed, 2));
    ResourceGrid grid_a = build_frame(p, ctx.mode, NodeRole::A, pay_a, ctx.layout);
    ResourceGrid grid_b = build_frame(p, ctx.mode, NodeRole::B, pay_b, ctx.layout);

    int gen_symbols = -1;
    int out_len = 0;
    if (opt.sync_only) {
        int need = ctx.scan.n_c + ctx.scan.ref_len + p.lpf_taps + p.delay_desired_max +
                   (p.pdp_taps - 1) * p.pdp_tap_spacing + 8;
        gen_symbols = std::min(p.symbols_per_frame(), need / S + 1);
        out_len = need;
    }

    std::vector<CVec> tx_a = ofdm_modulate(grid_a, p, gen_symbols);
    std::vector<CVec> tx_b = ofdm_modulate(grid_b, p, gen_symbols);
    const double p_port_dbm = p.tx_power_dbm - 10.0 * std::log10(static_cast<double>(ports));
    for (auto& s : tx_a) {
        if (!has_si) {
            s.setZero();  // half duplex: the measuring node stays silent
            continue;
        }
        scale_to_power_inplace(s, p_port_dbm);
        if (p.nonlinear_enabled) s = pa_apply(s, ctx.tx_pa);
    }
    for (auto& s : tx_b) {
        scale_to_power_inplace(s, p_port_dbm);
        if (p.nonlinear_enabled) s = pa_apply(s, ctx.tx_pa);
    }

    Rng noise_rng = make_rng(mix_seed(seed, 4));
    ChannelRealization ch_used = ch;
    if (opt.sync_only) {
        // Synchronization reads the first Rx antenna only.
        ch_used.n_rx = 1;
        ch_used.h_ir.assign(ch.h_ir.begin(), ch.h_ir.begin() + ch.n_tx);
        ch_used.g_ir.assign(ch.g_ir.begin(), ch.g_ir.begin() + ch.n_tx);
    }
    RxParts parts = propagate_parts(tx_a, tx_b, ch_used, p, /*noise_on=*/true, noise_rng, out_len);

    std::vector<CVec> rx(parts.ports());
    std::vector<CVec> si_truth;
    const bool want_truth = opt.want_metric && has_si && !opt.sync_only;
    if (p.nonlinear_enabled) {
        if (want_truth) si_truth.resize(parts.ports());
        for (int i = 0; i < parts.ports(); ++i) {
            rx[i] = pa_apply(parts.sum(i), ctx.rx_lna);
            if (want_truth) {
                // Incremental SI contribution through the actual Rx front end.
                CVec without_si = pa_apply(parts.desired[i] + parts.noise[i], ctx.rx_lna);
                si_truth[i] = rx[i] - without_si;
            }
        }
    } else {
        for (int i = 0; i < parts.ports(); ++i) rx[i] = parts.sum(i);
        if (want_truth) si_truth = parts.self_si;
    }

    // Timing.
    const int pss0 = p.pss_symbol_index(0) * S + p.cp_len;
    const int tau1_true = pss0 + ch.delay_desired;
    const int tau2_true = pss0 + ch.delay_self;
    SyncDecision dec;
    if (opt.genie_timing) {
        // Established-link mode: timing is tracked from earlier frames.
        dec.case_taken = SyncCase::BothPass;
        dec.tau_desired = tau1_true;
        dec.tau_self = tau2_true;
    } else {
        NspReport rep = scan_stream(rx[0], ctx.scan);
        dec = decide_sync(rep, p.nsp_threshold, opt.strategy);
    }
    res.sync_case = dec.case_taken;
    if (dec.ok()) {
        res.tau_err_desired = dec.tau_desired - tau1_true;
        res.tau_err_self = dec.tau_self - tau2_true;
        const int tol = p.cp_len / 8;
        res.sync_ok = std::abs(res.tau_err_desired) <= tol && std::abs(res.tau_err_self) <= tol;
    }
    if (opt.sync_only || !dec.ok()) return res;

    // Frame segmentation at the self-interference timing (the earlier path),
    // backed demod_advance samples into the CP; the desired signal's offset
    // becomes a per-subcarrier phase ramp inside the estimates.
    const int frame_len = layout.symbols() * S;
    int start = dec.tau_self - pss0 - p.demod_advance;
    start = std::clamp(start, 0, static_cast<int>(rx[0].size()) - frame_len);
    RxLattice lattice = ofdm_demodulate(rx, start, p, layout);

    // Bulk timing offsets for estimator derotation, from the receiver's own
    // timing decisions.
    const double h_delay = (dec.tau_desired - pss0) - start;
    const double g_delay = (dec.tau_self - pss0) - start;
    ChannelEstimate est = estimate_channels(lattice, layout, p, NodeRole::A, h_delay, g_delay);

    RxLattice cancelled;
    if (has_si) {
        RxLattice rebuilt = rebuild_si(est, grid_a);
        cancelled = subtract(lattice, rebuilt);
        if (opt.want_metric) {
            RxLattice si_lat = ofdm_demodulate(si_truth, start, p, layout);
            double delta = cancellation_level_db(si_lat, rebuilt);
            res.delta_frame_db = delta;
            res.total_sic_db = -ctx.alpha_total_db - delta;
        }
    } else {
        cancelled = lattice;
    }

    if (opt.want_detection) {
        DetectionResult det = detect(cancelled, est, layout, &pay_b);
        res.ber = det.ber;
        res.error_count = det.error_count;
        res.bits_total = static_cast<long>(ports) * cap;
        res.correct_bits = res.bits_total - det.error_count;
        res.frame_success = res.sync_ok && det.error_count == 0.0;
    }
    return res;
}

bool ExperimentConfig::apply(const std::string& key_in, const std::string& value) {
    std::string key = key_in;
    size_t dot = key.rfind('.');
    if (dot != std::string::npos) key = key.substr(dot + 1);

    auto list_d = [&](std::vector<double>& out) {
        out.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return true;
    };
    if (key == "trials") { trials = std::stol(value); return true; }
    if (key == "p_t_list") return list_d(p_t_list);
    if (key == "modes") {
        modes.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) modes.push_back(duplex_mode_from_string(tok));
        return true;
    }
    if (key == "lq_min") { lq_min = std::stod(value); return true; }
    if (key == "lq_max") { lq_max = std::stod(value); return true; }
    if (key == "lq_step") { lq_step = std::stod(value); return true; }
    if (key == "strategy") { strategy = sync_strategy_from_string(value); return true; }
    if (key == "targets") return list_d(targets);
    if (key == "lq_ceiling") { lq_ceiling = std::stod(value); return true; }
    if (key == "lq_resolution") { lq_resolution = std::stod(value); return true; }
    if (key == "max_frames_per_point") { max_frames_per_point = std::stol(value); return true; }
    if (key == "confidence") { confidence = std::stod(value); return true; }
    if (key == "reference_channel") { reference_channel = value == "1" || value == "true" || value == "on"; return true; }
    if (key == "threads") { threads = std::stoi(value); return true; }
    return false;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FDX_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
    threads = std::min<long>(resolve_threads(threads), n);
    if (threads <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void wilson_bounds(long successes, long n, double confidence, double& lo, double& hi) {
    if (n <= 0) {
        lo = 0.0;
        hi = 1.0;
        return;
    }
    // Normal quantile via inverse erfc is overkill here; the campaign uses
    // 95% almost exclusively, other levels fall back to a coarse map.
    double z = 1.959964;
    if (confidence >= 0.995) z = 2.807;
    else if (confidence >= 0.99) z = 2.576;
    else if (confidence <= 0.90) z = 1.645;
    double phat = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double centre = phat + z2 / (2.0 * n);
    double rad = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    lo = std::max(0.0, (centre - rad) / denom);
    hi = std::min(1.0, (centre + rad) / denom);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double idx = q * (v.size() - 1);
    size_t i = static_cast<size_t>(idx);
    double t = idx - i;
    return i + 1 < v.size() ? (1.0 - t) * v[i] + t * v[i + 1] : v[i];
}

std::vector<std::string> base_header(const char* experiment, const SystemParams& p,
                                     uint64_t master_seed) {
    BudgetReport b = make_budget_report(p);
    std::vector<std::string> h;
    h.push_back(std::string("experiment=") + experiment);
    h.push_back("master_seed=" + std::to_string(master_seed));
    h.push_back("tx_power_dbm=" + fmt(p.tx_power_dbm));
    h.push_back("noise_floor_dbm=" + fmt(p.noise_floor_dbm));
    h.push_back("alpha_min_db=" + fmt(b.alpha_min_db));
    h.push_back("delta_max_db=" + fmt(b.delta_max_db));
    h.push_back("p_residual_analog_dbm=" + fmt(b.p_residual_analog_dbm));
    h.push_back("alpha_total_db=" + fmt(b.alpha_total_db));
    h.push_back("total_sic_budget_db=" + fmt(b.total_sic_db));
    return h;
}

}  // namespace

std::string records_to_csv(const std::vector<MeasurementRecord>& records,
                           const std::vector<std::string>& header_lines) {
    std::ostringstream os;
    for (const auto& h : header_lines) os << "# " << h << "\n";
    os << "trial_id,duplex_mode,p_t_dbm,lq_db,sync_case,sync_ok,delta_frame_db,total_sic_db,ber,"
          "throughput_bps,seed\n";
    for (const auto& r : records) {
        os << r.trial_id << ',' << to_string(r.duplex_mode) << ',' << fmt(r.p_t_dbm) << ','
           << fmt(r.lq_db) << ',' << to_string(r.sync_case) << ',' << (r.sync_ok ? 1 : 0) << ',';
        if (r.delta_frame_db) os << fmt(*r.delta_frame_db);
        os << ',';
        if (r.total_sic_db) os << fmt(*r.total_sic_db);
        os << ',';
        if (r.ber && r.sync_ok) os << fmt(*r.ber);
        os << ',' << fmt(r.throughput_bps) << ',' << r.seed << "\n";
    }
    return os.str();
}

ExperimentOutput run_sync_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                     uint64_t master_seed) {
    ExperimentOutput out;
    std::vector<double> lq_points;
    for (double lq = cfg.lq_min; lq <= cfg.lq_max + 1e-9; lq += cfg.lq_step) lq_points.push_back(lq);
    DuplexMode mode = cfg.modes.empty() ? DuplexMode::FdMimo : cfg.modes.front();

    struct Cell {
        TrialContext ctx;
        double p_t, lq;
    };
    std::vector<Cell> cells;
    for (double pt : cfg.p_t_list) {
        TrialContext ctx = make_trial_context(p, mode, pt);
        for (double lq : lq_points) cells.push_back({ctx, pt, lq});
    }

    long total = static_cast<long>(cells.size()) * cfg.trials;
    out.records.resize(total);
    parallel_for(total, cfg.threads, [&](long i) {
        long cell_idx = i / cfg.trials;
        const Cell& cell = cells[cell_idx];
        uint64_t seed = mix_seed(master_seed, i);
        TrialOptions opt;
        opt.strategy = cfg.strategy;
        opt.sync_only = true;
        TrialResult r = run_link_trial(cell.ctx, cell.lq, seed, opt);
        MeasurementRecord& rec = out.records[i];
        rec.trial_id = i;
        rec.duplex_mode = mode;
        rec.p_t_dbm = cell.p_t;
        rec.lq_db = cell.lq;
        rec.sync_case = r.sync_case;
        rec.sync_ok = r.sync_ok;
        rec.seed = seed;
    });

    auto header = base_header("sync", p, master_seed);
    header.push_back(std::string("strategy=") + to_string(cfg.strategy));
    out.data_csv = records_to_csv(out.records, header);

    std::ostringstream sum;
    sum << "p_t_dbm,lq_db,trials,successes,success_rate,wilson_lo,wilson_hi\n";
    for (size_t c = 0; c < cells.size(); ++c) {
        long succ = 0;
        for (long t = 0; t < cfg.trials; ++t) succ += out.records[c * cfg.trials + t].sync_ok;
        double lo, hi;
        wilson_bounds(succ, cfg.trials, cfg.confidence, lo, hi);
        sum << fmt(cells[c].p_t) << ',' << fmt(cells[c].lq) << ',' << cfg.trials << ',' << succ << ','
            << fmt(double(succ) / cfg.trials) << ',' << fmt(lo) << ',' << fmt(hi) << "\n";
        out.summary.push_back("sync p_t=" + fmt(cells[c].p_t) + " lq=" + fmt(cells[c].lq) +
                              " rate=" + fmt(double(succ) / cfg.trials));
    }
    out.summary_csv = sum.str();
    return out;
}

ExperimentOutput run_sic_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                    uint64_t master_seed) {
    ExperimentOutput out;
    struct Cell {
        TrialContext ctx;
        DuplexMode mode;
        double p_t;
    };
    std::vector<Cell> cells;
    for (DuplexMode m : cfg.modes) {
        if (m == DuplexMode::HdSiso) continue;  // no self-interference path
        for (double pt : cfg.p_t_list) cells.push_back({make_trial_context(p, m, pt), m, pt});
    }
    long total = static_cast<long>(cells.size()) * cfg.trials;
    out.records.resize(total);
    parallel_for(total, cfg.threads, [&](long i) {
        long cell_idx = i / cfg.trials;
        const Cell& cell = cells[cell_idx];
        uint64_t seed = mix_seed(master_seed, i);
        Rng lq_rng = make_rng(mix_seed(seed, 7));
        std::uniform_real_distribution<double> ulq(cfg.lq_min, cfg.lq_max);
        double lq = ulq(lq_rng);
        TrialOptions opt;
        TrialResult r = run_link_trial(cell.ctx, lq, seed, opt);
        MeasurementRecord& rec = out.records[i];
        rec.trial_id = i;
        rec.duplex_mode = cell.mode;
        rec.p_t_dbm = cell.p_t;
        rec.lq_db = lq;
        rec.sync_case = r.sync_case;
        rec.sync_ok = r.sync_ok;
        rec.delta_frame_db = r.delta_frame_db;
        rec.total_sic_db = r.total_sic_db;
        rec.ber = r.ber;
        rec.seed = seed;
    });

    auto header = base_header("sic", p, master_seed);
    header.push_back(std::string("nonlinear_enabled=") + (p.nonlinear_enabled ? "1" : "0"));
    out.data_csv = records_to_csv(out.records, header);

    std::ostringstream sum;
    sum << "duplex_mode,p_t_dbm,trials,median_total_sic_db,p10_total_sic_db,p90_total_sic_db,"
           "median_delta_db\n";
    for (size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> sic, delta;
        for (long t = 0; t < cfg.trials; ++t) {
            const auto& rec = out.records[c * cfg.trials + t];
            if (rec.total_sic_db) sic.push_back(*rec.total_sic_db);
            if (rec.delta_frame_db) delta.push_back(*rec.delta_frame_db);
        }
        sum << to_string(cells[c].mode) << ',' << fmt(cells[c].p_t) << ',' << cfg.trials << ','
            << fmt(median_of(sic)) << ',' << fmt(quantile_of(sic, 0.1)) << ','
            << fmt(quantile_of(sic, 0.9)) << ',' << fmt(median_of(delta)) << "\n";
        out.summary.push_back("sic mode=" + std::string(to_string(cells[c].mode)) +
                              " p_t=" + fmt(cells[c].p_t) + " median_total=" + fmt(median_of(sic)) +
                              " median_delta=" + fmt(median_of(delta)));
    }
    out.summary_csv = sum.str();
    return out;
}

SuccessEstimate measure_frame_success(const TrialContext& ctx, double lq_db, double target,
                                      long max_frames, double confidence, uint64_t seed,
                                      int threads, const TrialOptions& opt) {
    SuccessEstimate est;
    const long batch = 256;
    std::vector<uint8_t> outcomes(batch);
    while (est.n < max_frames) {
        long todo = std::min(batch, max_frames - est.n);
        parallel_for(todo, threads, [&](long i) {
            TrialResult r = run_link_trial(ctx, lq_db, mix_seed(seed, est.n + i), opt);
            outcomes[i] = r.frame_success ? 1 : 0;
        });
        for (long i = 0; i < todo; ++i) est.successes += outcomes[i];
        est.n += todo;
        double lo, hi;
        wilson_bounds(est.successes, est.n, confidence, lo, hi);
        if (hi < target) break;  // cannot meet the target
        if (lo >= target) break; // target met with confidence
    }
    return est;
}

ExperimentOutput run_required_lq_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                            uint64_t master_seed) {
    ExperimentOutput out;
    std::ostringstream sum;
    sum << "duplex_mode,p_t_dbm,target,required_lq_db,saturated,frames_used\n";
    long eval_id = 0;
    uint64_t cell_counter = 0;
    for (DuplexMode mode : cfg.modes) {
        for (double pt : cfg.p_t_list) {
            TrialContext ctx = make_trial_context(p, mode, pt);
            for (double target : cfg.targets) {
                uint64_t cell_seed = mix_seed(master_seed, 0xC0FFEE + cell_counter++);
                long frames_used = 0;
                // Reliability is evaluated on an established link: timing is
                // tracked (the per-frame one-shot reacquisition of Table I has
                // a ~1e-2-scale false-alarm floor that would mask 1e-5 frame
                // error targets).
                TrialOptions topt;
                topt.want_metric = false;
                topt.genie_timing = true;
                topt.reference_channel = cfg.reference_channel;
                auto eval = [&](double lq) {
                    SuccessEstimate e = measure_frame_success(ctx, lq, target, cfg.max_frames_per_point,
                                                              cfg.confidence,
                                                              mix_seed(cell_seed, llround(lq * 16)),
                                                              cfg.threads, topt);
                    frames_used += e.n;
                    MeasurementRecord rec;
                    rec.trial_id = eval_id++;
                    rec.duplex_mode = mode;
                    rec.p_t_dbm = pt;
                    rec.lq_db = lq;
                    rec.sync_ok = true;
                    rec.sync_case = SyncCase::BothPass;
                    rec.ber = 1.0 - e.rate();  // frame error rate at this point
                    rec.seed = cell_seed;
                    out.records.push_back(rec);
                    return e.rate() >= target;
                };
                RequiredLqResult res;
                res.mode = mode;
                res.p_t_dbm = pt;
                res.target = target;
                if (!eval(cfg.lq_ceiling)) {
                    res.saturated = true;
                    res.required_lq_db = cfg.lq_ceiling;
                } else {
                    double lo = cfg.lq_min, hi = cfg.lq_ceiling;
                    if (eval(lo)) {
                        hi = lo;
                    } else {
                        while (hi - lo > cfg.lq_resolution) {
                            double mid = 0.5 * (lo + hi);
                            if (eval(mid)) hi = mid; else lo = mid;
                        }
                    }
                    res.required_lq_db = hi;
                }
                res.frames_used = frames_used;
                sum << to_string(mode) << ',' << fmt(pt) << ',' << fmt(target) << ','
                    << fmt(res.required_lq_db) << ',' << (res.saturated ? 1 : 0) << ','
                    << res.frames_used << "\n";
                out.summary.push_back("required-lq mode=" + std::string(to_string(mode)) +
                                      " p_t=" + fmt(pt) + " target=" + fmt(target) + " lq=" +
                                      fmt(res.required_lq_db) + (res.saturated ? " (saturated)" : ""));
            }
        }
    }
    auto header = base_header("required-lq", p, master_seed);
    header.push_back("note=ber column holds the frame error rate observed at the searched point");
    out.data_csv = records_to_csv(out.records, header);
    out.summary_csv = sum.str();
    return out;
}

ExperimentOutput run_throughput_experiment(const SystemParams& p, const ExperimentConfig& cfg,
                                           uint64_t master_seed) {
    ExperimentOutput out;
    struct Cell {
        TrialContext ctx;
        DuplexMode mode;
        double p_t;
    };
    std::vector<Cell> cells;
    for (DuplexMode m : cfg.modes)
        for (double pt : cfg.p_t_list) cells.push_back({make_trial_context(p, m, pt), m, pt});

    long total = static_cast<long>(cells.size()) * cfg.trials;
    out.records.resize(total);
    const double frame_dur = p.frame_duration_s();
    parallel_for(total, cfg.threads, [&](long i) {
        long cell_idx = i / cfg.trials;
        const Cell& cell = cells[cell_idx];
        uint64_t seed = mix_seed(master_seed, i);
        Rng lq_rng = make_rng(mix_seed(seed, 7));
        std::uniform_real_distribution<double> ulq(cfg.lq_min, cfg.lq_max);
        double lq = ulq(lq_rng);
        TrialOptions opt;
        opt.want_metric = false;
        MeasurementRecord& rec = out.records[i];
        rec.trial_id = i;
        rec.duplex_mode = cell.mode;
        rec.p_t_dbm = cell.p_t;
        rec.lq_db = lq;
        rec.seed = seed;

        // Full duplex carries both directions at once; half duplex alternates
        // direction per frame, so its two-way sum equals one direction's rate.
        TrialResult fwd = run_link_trial(cell.ctx, lq, mix_seed(seed, 11), opt);
        rec.sync_case = fwd.sync_case;
        rec.sync_ok = fwd.sync_ok;
        rec.ber = fwd.ber;
        double bits = fwd.sync_case != SyncCase::Fail ? fwd.correct_bits : 0.0;
        if (cell.mode != DuplexMode::HdSiso) {
            TrialResult rev = run_link_trial(cell.ctx, lq, mix_seed(seed, 12), opt);
            bits += rev.sync_case != SyncCase::Fail ? rev.correct_bits : 0.0;
        }
        rec.throughput_bps = bits / frame_dur;
    });

    auto header = base_header("throughput", p, master_seed);
    out.data_csv = records_to_csv(out.records, header);

    // Aggregate gains against the HD-SISO baseline at the same Tx power.
    std::map<double, double> hd_mean;
    std::ostringstream sum;
    sum << "duplex_mode,p_t_dbm,trials,mean_throughput_bps,gain_vs_hd_siso\n";
    std::vector<std::pair<const Cell*, double>> means;
    for (size_t c = 0; c < cells.size(); ++c) {
        double acc = 0.0;
        for (long t = 0; t < cfg.trials; ++t) acc += out.records[c * cfg.trials + t].throughput_bps;
        double mean = acc / cfg.trials;
        means.push_back({&cells[c], mean});
        if (cells[c].mode == DuplexMode::HdSiso) hd_mean[cells[c].p_t] = mean;
    }
    for (auto& [cell, mean] : means) {
        double gain = 0.0;
        auto it = hd_mean.find(cell->p_t);
        if (it != hd_mean.end() && it->second > 0.0) gain = mean / it->second;
        sum << to_string(cell->mode) << ',' << fmt(cell->p_t) << ',' << cfg.trials << ',' << fmt(mean)
            << ',' << fmt(gain) << "\n";
        out.summary.push_back("throughput mode=" + std::string(to_string(cell->mode)) +
                              " p_t=" + fmt(cell->p_t) + " mean_bps=" + fmt(mean) +
                              " gain=" + fmt(gain));
    }
    out.summary_csv = sum.str();
    return out;
}

}  // namespace fdx
