#include "fdx/channel.hpp"

#include "fdx/dsp.hpp"

#include <istream>
#include <ostream>

namespace fdx {

PaModel make_rapp_pa(double p1db_dbm, double smoothness, double gain_db) {
    PaModel m;
    m.p1db_dbm = p1db_dbm;
    m.small_signal_gain_db = gain_db;
    m.smoothness = smoothness;
    const double g = std::pow(10.0, gain_db / 20.0);
    const double r1 = std::pow(10.0, p1db_dbm / 20.0);  // tone amplitude at P1dB
    const double x = std::pow(10.0, smoothness / 10.0) - 1.0;
    m.a_sat = g * r1 / std::pow(x, 1.0 / (2.0 * smoothness));
    return m;
}

CVec pa_apply(const CVec& stream, const PaModel& model) {
    const double g = std::pow(10.0, model.small_signal_gain_db / 20.0);
    const double inv_a2 = 1.0 / (model.a_sat * model.a_sat);
    CVec out(stream.size());
    // Deep in backoff the compensation factor is a short series of the
    // exact expression (relative error below 1e-13 at the branch point).
    if (model.smoothness == 2.0) {
        for (Eigen::Index i = 0; i < stream.size(); ++i) {
            cplx v = g * stream[i];
            double q = std::norm(v) * inv_a2;  // (r/A)^2
            double x = q * q;
            double f = x < 1e-4 ? 1.0 - 0.25 * x + 0.15625 * x * x
                                : 1.0 / std::sqrt(std::sqrt(1.0 + x));
            out[i] = v * f;
        }
    } else if (model.smoothness == 3.0) {
        for (Eigen::Index i = 0; i < stream.size(); ++i) {
            cplx v = g * stream[i];
            double q = std::norm(v) * inv_a2;
            double x = q * q * q;
            double f = x < 1e-4 ? 1.0 - x / 6.0 + 7.0 / 72.0 * x * x
                                : 1.0 / std::cbrt(std::sqrt(1.0 + x));
            out[i] = v * f;
        }
    } else {
        const double two_s = 2.0 * model.smoothness;
        for (Eigen::Index i = 0; i < stream.size(); ++i) {
            cplx v = g * stream[i];
            double r = std::abs(v) / model.a_sat;
            out[i] = v / std::pow(1.0 + std::pow(r, two_s), 1.0 / two_s);
        }
    }
    return out;
}

namespace {

CVec draw_ir(int taps, int spacing, double decay_db, double energy, Rng& rng) {
    const int len = (taps - 1) * spacing + 1;
    CVec ir = CVec::Zero(len);
    RVec w(taps);
    for (int l = 0; l < taps; ++l) w[l] = db_to_lin(-decay_db * l);
    w *= energy / w.sum();
    for (int l = 0; l < taps; ++l) ir[l * spacing] = std::sqrt(w[l]) * randn_c(rng);
    return ir;
}

}  // namespace

ChannelRealization realize_channel(const SystemParams& p, double lq_target_db,
                                   const std::string& profile, uint64_t seed) {
    if (!std::isfinite(lq_target_db)) throw std::invalid_argument("realize_channel: lq_target must be finite");
    bool flat = profile == "flat";
    if (!flat && profile != "exponential-pdp")
        throw std::invalid_argument("realize_channel: unknown profile " + profile);

    ChannelRealization ch;
    ch.n_rx = p.n_rx;
    ch.n_tx = p.n_tx;
    ch.seed = seed;
    Rng rng = make_rng(seed);

    std::uniform_int_distribution<int> dd(0, p.delay_desired_max);
    ch.delay_desired = dd(rng);
    std::uniform_int_distribution<int> ds(0, std::min(p.delay_self_max, ch.delay_desired));
    ch.delay_self = ds(rng);

    const int taps = flat ? 1 : p.pdp_taps;
    const int spacing = flat ? 1 : p.pdp_tap_spacing;

    ch.h_ir.resize(ch.n_rx * ch.n_tx);
    ch.g_ir.resize(ch.n_rx * ch.n_tx);
    double h_energy = 0.0;
    for (int i = 0; i < ch.n_rx; ++i)
        for (int j = 0; j < ch.n_tx; ++j) {
            ch.h(i, j) = draw_ir(taps, spacing, p.pdp_decay_db, 1.0, rng);
            h_energy += ch.h(i, j).squaredNorm();
        }
    for (int i = 0; i < ch.n_rx; ++i)
        for (int j = 0; j < ch.n_tx; ++j) {
            double iso = i == j ? p.alpha_selftalk_db : p.alpha_crosstalk_db;
            ch.g(i, j) = draw_ir(taps, spacing, p.pdp_decay_db, db_to_lin(iso), rng);
        }

    // Exact per-realization normalization of the desired link:
    //   sum_ij |h_ij|^2 * P_port = LQ * n_rx * sigma^2.
    const double p_port = dbm_to_mw(p.tx_power_dbm) / p.n_tx;
    const double sigma2 = dbm_to_mw(p.noise_floor_dbm);
    const double target = db_to_lin(lq_target_db) * ch.n_rx * sigma2;
    const double c = std::sqrt(target / (h_energy * p_port));
    for (auto& ir : ch.h_ir) ir *= c;
    return ch;
}

ChannelRealization realize_reference_channel(const SystemParams& p, double lq_target_db,
                                             uint64_t seed) {
    ChannelRealization ch = realize_channel(p, lq_target_db, "flat", seed);
    Rng rng = make_rng(mix_seed(seed, 0xBEEF));
    CMat u;
    if (p.n_tx == 1) {
        u = CMat::Ones(1, 1) * std::polar(1.0, 2.0 * kPi * (rng() >> 11) * 0x1p-53);
    } else {
        CMat g(p.n_rx, p.n_tx);
        for (int i = 0; i < p.n_rx; ++i)
            for (int j = 0; j < p.n_tx; ++j) g(i, j) = randn_c(rng);
        Eigen::HouseholderQR<CMat> qr(g);
        u = qr.householderQ() * CMat::Identity(p.n_rx, p.n_tx);
    }
    const double p_port = dbm_to_mw(p.tx_power_dbm) / p.n_tx;
    const double sigma2 = dbm_to_mw(p.noise_floor_dbm);
    // ||c U||_F^2 * P_port = LQ * n_rx * sigma^2
    const double c = std::sqrt(db_to_lin(lq_target_db) * p.n_rx * sigma2 /
                               (u.squaredNorm() * p_port));
    for (int i = 0; i < p.n_rx; ++i)
        for (int j = 0; j < p.n_tx; ++j) ch.h(i, j) = CVec::Constant(1, c * u(i, j));
    return ch;
}

RxParts propagate_parts(const std::vector<CVec>& tx_self, const std::vector<CVec>& tx_partner,
                        const ChannelRealization& ch, const SystemParams& p, bool noise_on,
                        Rng& rng, int out_len) {
    if (static_cast<int>(tx_self.size()) != ch.n_tx || static_cast<int>(tx_partner.size()) != ch.n_tx)
        throw std::invalid_argument("propagate: stream count does not match channel dimensions");
    Eigen::Index in_len = tx_self[0].size();
    for (const auto& s : tx_self)
        if (s.size() != in_len) throw std::invalid_argument("propagate: stream length mismatch");
    for (const auto& s : tx_partner)
        if (s.size() != in_len) throw std::invalid_argument("propagate: stream length mismatch");

    int ir_len = 0;
    for (const auto& ir : ch.h_ir) ir_len = std::max<int>(ir_len, ir.size());
    for (const auto& ir : ch.g_ir) ir_len = std::max<int>(ir_len, ir.size());
    int len = out_len > 0 ? out_len
                          : static_cast<int>(in_len) + std::max(ch.delay_desired, ch.delay_self) + ir_len;

    RxParts out;
    out.desired.assign(ch.n_rx, CVec::Zero(len));
    out.self_si.assign(ch.n_rx, CVec::Zero(len));
    out.noise.assign(ch.n_rx, CVec::Zero(len));

    auto add_path = [&](CVec& acc, const CVec& x, const CVec& ir, int delay) {
        for (Eigen::Index l = 0; l < ir.size(); ++l) {
            if (ir[l] == cplx(0.0, 0.0)) continue;
            Eigen::Index n = std::min<Eigen::Index>(x.size(), len - delay - l);
            if (n > 0) acc.segment(delay + l, n) += ir[l] * x.head(n);
        }
    };
    for (int i = 0; i < ch.n_rx; ++i)
        for (int j = 0; j < ch.n_tx; ++j) {
            add_path(out.desired[i], tx_partner[j], ch.h(i, j), ch.delay_desired);
            add_path(out.self_si[i], tx_self[j], ch.g(i, j), ch.delay_self);
        }
    if (noise_on) {
        const double sigma = std::sqrt(dbm_to_mw(p.noise_floor_dbm));
        for (int i = 0; i < ch.n_rx; ++i) {
            fill_randn(out.noise[i], rng);
            out.noise[i] *= sigma;
        }
    }
    return out;
}

std::vector<CVec> propagate(const std::vector<CVec>& tx_self, const std::vector<CVec>& tx_partner,
                            const ChannelRealization& ch, const SystemParams& p, bool noise_on,
                            Rng& rng) {
    RxParts parts = propagate_parts(tx_self, tx_partner, ch, p, noise_on, rng);
    std::vector<CVec> out(parts.ports());
    for (int i = 0; i < parts.ports(); ++i) out[i] = parts.sum(i);
    return out;
}

CVec scale_to_power(const CVec& stream, double power_dbm) {
    CVec out = stream;
    scale_to_power_inplace(out, power_dbm);
    return out;
}

void scale_to_power_inplace(CVec& stream, double power_dbm) {
    double mp = mean_power(stream);
    if (mp <= 0.0) return;
    stream *= std::sqrt(dbm_to_mw(power_dbm) / mp);
}

void dump_channel(std::ostream& os, const ChannelRealization& ch) {
    os.precision(17);
    os << "channel " << ch.n_rx << " " << ch.n_tx << " " << ch.delay_desired << " " << ch.delay_self
       << " " << ch.seed << "\n";
    auto put = [&](const char* name, const std::vector<CVec>& irs) {
        for (int i = 0; i < ch.n_rx; ++i)
            for (int j = 0; j < ch.n_tx; ++j) {
                const CVec& ir = irs[i * ch.n_tx + j];
                os << name << " " << i << " " << j << " " << ir.size();
                for (Eigen::Index l = 0; l < ir.size(); ++l)
                    os << " " << ir[l].real() << " " << ir[l].imag();
                os << "\n";
            }
    };
    put("h", ch.h_ir);
    put("g", ch.g_ir);
}

ChannelRealization load_channel(std::istream& is) {
    std::string tag;
    ChannelRealization ch;
    if (!(is >> tag >> ch.n_rx >> ch.n_tx >> ch.delay_desired >> ch.delay_self >> ch.seed) ||
        tag != "channel")
        throw std::runtime_error("load_channel: bad header");
    ch.h_ir.resize(ch.n_rx * ch.n_tx);
    ch.g_ir.resize(ch.n_rx * ch.n_tx);
    for (int n = 0; n < 2 * ch.n_rx * ch.n_tx; ++n) {
        int i, j;
        Eigen::Index len;
        if (!(is >> tag >> i >> j >> len)) throw std::runtime_error("load_channel: truncated");
        CVec ir(len);
        for (Eigen::Index l = 0; l < len; ++l) {
            double re, im;
            if (!(is >> re >> im)) throw std::runtime_error("load_channel: truncated taps");
            ir[l] = cplx(re, im);
        }
        (tag == "h" ? ch.h_ir : ch.g_ir)[i * ch.n_tx + j] = std::move(ir);
    }
    return ch;
}

}  // namespace fdx
