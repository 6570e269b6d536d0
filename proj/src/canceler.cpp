#include "fdx/canceler.hpp"

#include <map>

namespace fdx {

CMat ChannelEstimate::h_at(int a) const {
    CMat m(n_rx, n_tx);
    for (int i = 0; i < n_rx; ++i)
        for (int j = 0; j < n_tx; ++j) m(i, j) = h_of(i, j)[a];
    return m;
}

CMat ChannelEstimate::g_at(int a) const {
    CMat m(n_rx, n_tx);
    for (int i = 0; i < n_rx; ++i)
        for (int j = 0; j < n_tx; ++j) m(i, j) = g_of(i, j)[a];
    return m;
}

namespace {

// Averaged LS points on one port's pilot comb -> full-band coefficient
// spectrum: linear interpolation inside the comb, nearest neighbour outside.
// Interpolation runs on the physical subcarrier axis (DC bin skipped), so
// the estimate stays smooth across the DC gap.
CVec interpolate_comb(const std::vector<int>& pos, const std::vector<cplx>& val,
                      const FrameLayout& layout) {
    const int n_sc = layout.subcarriers();
    CVec out(n_sc);
    size_t seg = 0;
    for (int a = 0; a < n_sc; ++a) {
        if (a <= pos.front()) {
            out[a] = val.front();
        } else if (a >= pos.back()) {
            out[a] = val.back();
        } else {
            while (pos[seg + 1] < a) ++seg;
            double k = layout.k_of(a);
            double k0 = layout.k_of(pos[seg]);
            double k1 = layout.k_of(pos[seg + 1]);
            double t = (k - k0) / (k1 - k0);
            out[a] = (1.0 - t) * val[seg] + t * val[seg + 1];
        }
    }
    return out;
}

CVec smooth_binomial(const CVec& in, int taps) {
    if (taps <= 1) return in;
    // Binomial kernel, e.g. [1 2 1]/4 for taps = 3.
    std::vector<double> w(taps, 1.0);
    for (int r = 1; r < taps; ++r)
        for (int i = r - 1; i > 0; --i) w[i] += w[i - 1];
    double sum = 0.0;
    for (double x : w) sum += x;
    const int half = taps / 2;
    CVec out(in.size());
    for (Eigen::Index a = 0; a < in.size(); ++a) {
        cplx acc = 0.0;
        for (int t = -half; t <= half; ++t) {
            Eigen::Index idx = std::clamp<Eigen::Index>(a + t, 0, in.size() - 1);
            acc += w[t + half] * in[idx];
        }
        out[a] = acc / sum;
    }
    return out;
}

}  // namespace

ChannelEstimate estimate_channels(const RxLattice& rx, const FrameLayout& layout,
                                  const SystemParams& p, NodeRole role, double h_delay,
                                  double g_delay) {
    const int n_rx = static_cast<int>(rx.size());
    const bool half_duplex = layout.mode() == DuplexMode::HdSiso;
    const int ports = half_duplex ? 1 : layout.crs_ports() / 2;
    // Half duplex: the single pattern port is the partner's transmission and
    // there is no self-interference channel to estimate.
    const int own_off = half_duplex ? -1 : node_port_offset(layout.mode(), role);
    const int partner_off =
        half_duplex ? 0 : node_port_offset(layout.mode(), role == NodeRole::A ? NodeRole::B : NodeRole::A);

    ChannelEstimate est;
    est.n_rx = n_rx;
    est.n_tx = ports;
    const int n_sc = layout.subcarriers();
    est.h.assign(n_rx * ports, CVec::Zero(n_sc));
    est.g.assign(n_rx * ports, CVec::Zero(n_sc));

    double noise_acc = 0.0;
    long noise_cnt = 0;

    for (int q = 0; q < layout.crs_ports(); ++q) {
        const auto& cells = layout.crs_cells(q);
        for (int i = 0; i < n_rx; ++i) {
            std::vector<int> pos;
            std::vector<cplx> val;
            // Comb-average the LS ratios per subcarrier over the whole frame.
            std::map<int, std::pair<cplx, int>> sums;
            for (const auto& [sym, a] : cells) {
                cplx pilot = crs_value(q, sym, a);
                if (std::abs(pilot) < 1e-12) throw std::domain_error("estimate_channels: degenerate pilot");
                auto& s = sums[a];
                s.first += rx[i](sym, a) * std::conj(pilot);  // unit-power pilots
                s.second += 1;
            }
            const bool own = own_off >= 0 && q >= own_off && q < own_off + ports;
            const double bulk = own ? g_delay : h_delay;
            const double w = 2.0 * kPi * bulk / p.fft_size;
            pos.reserve(sums.size());
            val.reserve(sums.size());
            for (const auto& [a, s] : sums) {
                pos.push_back(a);
                cplx v = s.first / double(s.second);
                if (bulk != 0.0) v *= std::polar(1.0, w * layout.k_of(a));
                val.push_back(v);
            }
            CVec spec = interpolate_comb(pos, val, layout);
            spec = smooth_binomial(spec, p.est_smooth_taps);
            for (size_t m = 0; m < pos.size(); ++m) {
                noise_acc += std::norm(val[m] - spec[pos[m]]);
                ++noise_cnt;
            }
            if (bulk != 0.0)
                for (int a = 0; a < n_sc; ++a) spec[a] *= std::polar(1.0, -w * layout.k_of(a));
            if (own) {
                est.g_of(i, q - own_off) = std::move(spec);
            } else if (q >= partner_off && q < partner_off + ports) {
                est.h_of(i, q - partner_off) = std::move(spec);
            }
        }
    }
    est.est_noise_var = noise_cnt > 0 ? noise_acc / noise_cnt : 0.0;
    return est;
}

RxLattice rebuild_si(const ChannelEstimate& est, const ResourceGrid& own_tx, int a_begin, int a_end) {
    const FrameLayout& L = *own_tx.layout;
    if (a_end < 0) a_end = L.subcarriers();
    if (a_begin < 0 || a_end > L.subcarriers() || a_begin > a_end)
        throw std::invalid_argument("rebuild_si: bad subcarrier range");
    RxLattice out(est.n_rx);
    for (int i = 0; i < est.n_rx; ++i) {
        CMat m = CMat::Zero(L.symbols(), L.subcarriers());
        for (int j = 0; j < own_tx.ports(); ++j) {
            const CVec& gij = est.g_of(i, j);
            for (int a = a_begin; a < a_end; ++a)
                m.col(a) += gij[a] * own_tx.values[j].col(a);
        }
        out[i] = std::move(m);
    }
    return out;
}

RxLattice subtract(const RxLattice& rx, const RxLattice& rebuilt) {
    if (rx.size() != rebuilt.size()) throw std::invalid_argument("subtract: port count mismatch");
    RxLattice out(rx.size());
    for (size_t i = 0; i < rx.size(); ++i) {
        if (rx[i].rows() != rebuilt[i].rows() || rx[i].cols() != rebuilt[i].cols())
            throw std::invalid_argument("subtract: lattice shape mismatch");
        out[i] = rx[i] - rebuilt[i];
    }
    return out;
}

CancellationTrace cancellation_metric(const RxLattice& true_si, const RxLattice& rebuilt) {
    if (true_si.size() != rebuilt.size()) throw std::invalid_argument("cancellation_metric: port mismatch");
    Eigen::Index cells = 0;
    for (const auto& m : true_si) cells += m.size();
    CancellationTrace tr;
    tr.e_k.resize(cells);
    tr.si_power.resize(cells);
    tr.delta_k_db.resize(cells);
    Eigen::Index n = 0;
    double e_sum = 0.0, si_sum = 0.0;
    for (size_t port = 0; port < true_si.size(); ++port) {
        const CMat& t = true_si[port];
        const CMat& r = rebuilt[port];
        if (t.rows() != r.rows() || t.cols() != r.cols())
            throw std::invalid_argument("cancellation_metric: shape mismatch");
        for (Eigen::Index c = 0; c < t.cols(); ++c)
            for (Eigen::Index s = 0; s < t.rows(); ++s) {
                double e = std::norm(t(s, c) - r(s, c));
                double si = std::norm(t(s, c));
                tr.e_k[n] = e;
                tr.si_power[n] = si;
                double ratio = si > 0.0 ? e / si : 0.0;
                tr.delta_k_db[n] = ratio > 0.0 ? std::max(kDeltaFloorDb, lin_to_db(ratio)) : kDeltaFloorDb;
                e_sum += e;
                si_sum += si;
                ++n;
            }
    }
    if (si_sum <= 0.0 || e_sum <= 0.0) {
        tr.delta_frame_db = kDeltaFloorDb;
    } else {
        tr.delta_frame_db = std::max(kDeltaFloorDb, lin_to_db(e_sum / si_sum));
    }
    return tr;
}

double cancellation_level_db(const RxLattice& true_si, const RxLattice& rebuilt) {
    double e_sum = 0.0, si_sum = 0.0;
    for (size_t port = 0; port < true_si.size(); ++port) {
        e_sum += (true_si[port] - rebuilt[port]).squaredNorm();
        si_sum += true_si[port].squaredNorm();
    }
    if (si_sum <= 0.0 || e_sum <= 0.0) return kDeltaFloorDb;
    return std::max(kDeltaFloorDb, lin_to_db(e_sum / si_sum));
}

}  // namespace fdx
