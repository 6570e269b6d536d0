#include "fdx/sync.hpp"

#include "fdx/dsp.hpp"

#include <algorithm>
#include <numeric>

namespace fdx {

namespace {
constexpr int kZcDivisor = 63;

int gcd_int(int a, int b) { return b == 0 ? a : gcd_int(b, a % b); }

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

ZcSequence zc_generate(int root) {
    if (root <= 0 || root >= kZcDivisor || gcd_int(root, kZcDivisor) != 1)
        throw std::invalid_argument("zc_generate: root must be coprime with 63");
    ZcSequence seq;
    seq.root = root;
    seq.values.resize(62);
    int i = 0;
    for (int k = -31; k <= 31; ++k) {
        if (k == 0) continue;
        double phase = (k < 0) ? kPi * root * k * (k + 1) / kZcDivisor
                               : kPi * root * (k + 1) * (k + 2) / kZcDivisor;
        seq.values[i++] = std::polar(1.0, -phase);
    }
    return seq;
}

CVec pss_reference(int root, const SystemParams& p) {
    ZcSequence seq = zc_generate(root);
    const int N = p.fft_size;
    CVec bins = CVec::Zero(N);
    for (int k = -31; k <= 31; ++k) {
        if (k == 0) continue;
        bins[(k + N) % N] = seq.value(k);
    }
    return fft_inv(bins);  // 1/N-scaled IDFT
}

RVec design_lowpass(const SystemParams& p) {
    const int taps = p.lpf_taps;
    const int M = taps - 1;
    const double fc = p.lpf_cutoff_hz / p.sample_rate;  // normalized, cycles/sample
    RVec h(taps);
    for (int n = 0; n < taps; ++n) {
        double m = n - M / 2.0;
        double sinc = (m == 0.0) ? 2.0 * fc : std::sin(2.0 * kPi * fc * m) / (kPi * m);
        double w = 0.54 - 0.46 * std::cos(2.0 * kPi * n / M);
        h[n] = sinc * w;
    }
    h /= h.sum();  // unity DC gain
    return h;
}

CVec lowpass(const CVec& stream, const SystemParams& p) {
    if (p.lpf_taps > stream.size()) throw std::invalid_argument("lowpass: stream shorter than filter");
    RVec h = design_lowpass(p);
    CVec hc = h.cast<cplx>();
    CVec full = convolve(stream, hc);
    return full.head(stream.size());
}

namespace {

double window_mean(const RVec& corr) { return corr.mean(); }

void peak_and_nsp(const RVec& corr, int& peak, double& nsp) {
    Eigen::Index idx;
    corr.maxCoeff(&idx);
    peak = static_cast<int>(idx);
    double mean = window_mean(corr);
    nsp = mean > 0.0 ? corr[peak] / mean : 1.0;
}

}  // namespace

NspReport nsp_scan(const CVec& filtered, const CVec& ref_desired, const CVec& ref_self, int n_c) {
    const int N = static_cast<int>(ref_desired.size());
    if (ref_self.size() != N) throw std::invalid_argument("nsp_scan: reference length mismatch");
    if (n_c <= 0 || n_c > filtered.size() - N)
        throw std::invalid_argument("nsp_scan: scan window must satisfy n_c <= length - N");

    NspReport rep;
    rep.corr_1 = xcorr_fft(filtered, ref_desired, n_c).cwiseAbs();
    rep.corr_2 = xcorr_fft(filtered, ref_self, n_c).cwiseAbs();
    peak_and_nsp(rep.corr_1, rep.peak_idx_1, rep.nsp_1);
    peak_and_nsp(rep.corr_2, rep.peak_idx_2, rep.nsp_2);
    return rep;
}

const char* to_string(SyncCase c) {
    switch (c) {
        case SyncCase::BothPass: return "both-pass";
        case SyncCase::DesiredOnly: return "desired-only";
        case SyncCase::SelfOnly: return "self-only";
        case SyncCase::Fail: return "fail";
    }
    return "?";
}

const char* to_string(SyncStrategy s) {
    switch (s) {
        case SyncStrategy::Switching: return "switching";
        case SyncStrategy::DesiredOnly: return "desired-only";
        case SyncStrategy::SelfOnly: return "self-only";
    }
    return "?";
}

SyncStrategy sync_strategy_from_string(const std::string& s) {
    if (s == "switching") return SyncStrategy::Switching;
    if (s == "desired-only") return SyncStrategy::DesiredOnly;
    if (s == "self-only") return SyncStrategy::SelfOnly;
    throw std::invalid_argument("unknown sync strategy: " + s);
}

SyncDecision nsp_switch(const NspReport& report, double threshold) {
    SyncDecision d;
    const bool pass1 = report.nsp_1 > threshold;
    const bool pass2 = report.nsp_2 > threshold;
    if (pass1 && pass2) {
        d.case_taken = SyncCase::BothPass;
        d.tau_desired = report.peak_idx_1;
        d.tau_self = report.peak_idx_2;
    } else if (pass1) {
        d.case_taken = SyncCase::DesiredOnly;
        d.tau_desired = report.peak_idx_1;
        d.tau_self = report.peak_idx_1;
    } else if (pass2) {
        d.case_taken = SyncCase::SelfOnly;
        d.tau_desired = report.peak_idx_2;
        d.tau_self = report.peak_idx_2;
    }
    return d;
}

SyncDecision decide_sync(const NspReport& report, double threshold, SyncStrategy strategy) {
    switch (strategy) {
        case SyncStrategy::Switching:
            return nsp_switch(report, threshold);
        case SyncStrategy::DesiredOnly: {
            SyncDecision d;
            if (report.nsp_1 > threshold) {
                d.case_taken = SyncCase::DesiredOnly;
                d.tau_desired = d.tau_self = report.peak_idx_1;
            }
            return d;
        }
        case SyncStrategy::SelfOnly: {
            SyncDecision d;
            if (report.nsp_2 > threshold) {
                d.case_taken = SyncCase::SelfOnly;
                d.tau_desired = d.tau_self = report.peak_idx_2;
            }
            return d;
        }
    }
    return SyncDecision{};
}

ScanContext make_scan_context(const SystemParams& p, int desired_root, int self_root) {
    ScanContext ctx;
    ctx.n_c = p.scan_window();
    ctx.ref_len = p.fft_size;
    ctx.group_delay = (p.lpf_taps - 1) / 2;
    ctx.fft_len = next_pow2(ctx.n_c + ctx.ref_len + p.lpf_taps);

    RVec h = design_lowpass(p);
    CVec pad = CVec::Zero(ctx.fft_len);
    pad.head(h.size()) = h.cast<cplx>();
    ctx.lpf_fft = fft_fwd(pad);

    auto ref_fft = [&](int root) {
        CVec r = CVec::Zero(ctx.fft_len);
        r.head(ctx.ref_len) = pss_reference(root, p);
        return fft_fwd(r);
    };
    ctx.ref_fft_desired = ref_fft(desired_root);
    ctx.ref_fft_self = ref_fft(self_root);
    return ctx;
}

NspReport scan_stream(const CVec& rx, const ScanContext& ctx) {
    const int need = ctx.n_c + ctx.ref_len;
    if (rx.size() < need) throw std::invalid_argument("scan_stream: stream shorter than scan window + N");

    // per-thread scratch keeps the hot loop allocation-free
    thread_local CVec pad, X, prod, c;
    pad.resize(ctx.fft_len);
    pad.setZero();
    pad.head(need) = rx.head(need);
    FftEngine::instance().fwd(pad, X);
    X.array() *= ctx.lpf_fft.array();  // filtered spectrum

    NspReport rep;
    auto run = [&](const CVec& ref_fft, int& peak, double& nsp) {
        prod = X.array() * ref_fft.conjugate().array();
        FftEngine::instance().inv(prod, c);
        double sum = 0.0, best = -1.0;
        int arg = 0;
        for (int d = 0; d < ctx.n_c; ++d) {
            double mag = std::abs(c[d]);
            sum += mag;
            if (mag > best) {
                best = mag;
                arg = d;
            }
        }
        peak = std::max(0, arg - ctx.group_delay);
        nsp = sum > 0.0 ? best / (sum / ctx.n_c) : 1.0;
    };
    run(ctx.ref_fft_desired, rep.peak_idx_1, rep.nsp_1);
    run(ctx.ref_fft_self, rep.peak_idx_2, rep.nsp_2);
    return rep;
}

double calibrate_nsp_threshold(const SystemParams& p, int trials, double false_alarm, uint64_t seed) {
    if (trials < 10) throw std::invalid_argument("calibrate_nsp_threshold: need at least 10 trials");
    ScanContext ctx = make_scan_context(p, p.root_index_1, p.root_index_2);
    std::vector<double> maxima;
    maxima.reserve(trials);
    const int len = ctx.n_c + ctx.ref_len + p.lpf_taps;
    for (int t = 0; t < trials; ++t) {
        Rng rng = make_rng(mix_seed(seed, t));
        CVec noise(len);
        fill_randn(noise, rng);
        NspReport rep = scan_stream(noise, ctx);
        maxima.push_back(std::max(rep.nsp_1, rep.nsp_2));
    }
    std::sort(maxima.begin(), maxima.end());
    size_t idx = static_cast<size_t>(std::ceil((1.0 - false_alarm) * trials));
    idx = std::min(idx, maxima.size() - 1);
    return maxima[idx];
}

}  // namespace fdx
