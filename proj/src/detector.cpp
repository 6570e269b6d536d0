#include "fdx/detector.hpp"

namespace fdx {

CMat zf_matrix(const CMat& h_hat, bool& singular) {
    singular = false;
    const Eigen::Index n = h_hat.cols();
    if (h_hat.rows() < n) throw std::invalid_argument("zf_matrix: H must be square or tall");
    const double scale = h_hat.squaredNorm();
    if (scale == 0.0) {
        singular = true;
        return CMat::Zero(n, h_hat.rows());
    }
    if (n == 1) {
        cplx h2 = (h_hat.adjoint() * h_hat)(0, 0);
        if (std::abs(h2) < 1e-18 * std::max(scale, 1e-300)) {
            singular = true;
            return CMat::Zero(1, h_hat.rows());
        }
        return h_hat.adjoint() / h2.real();
    }
    CMat gram = h_hat.adjoint() * h_hat;
    cplx det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0);
    // |det(H^H H)| = |det H|^2 for square H; the spec's threshold is on |det H|.
    if (std::sqrt(std::abs(det)) < 1e-9 * scale) {
        singular = true;
        return CMat::Zero(n, h_hat.rows());
    }
    CMat inv(2, 2);
    inv << gram(1, 1), -gram(0, 1), -gram(1, 0), gram(0, 0);
    inv /= det;
    return inv * h_hat.adjoint();
}

DetectionResult detect(const RxLattice& cancelled, const ChannelEstimate& est,
                       const FrameLayout& layout, const std::vector<BitVec>* truth_bits) {
    const int n_rx = static_cast<int>(cancelled.size());
    const int n_stream = est.n_tx;
    if (n_rx != est.n_rx) throw std::invalid_argument("detect: rx port mismatch");

    const auto& cells = layout.data_cells();
    DetectionResult res;
    res.symbols.assign(n_stream, CVec(cells.size()));
    res.bits.assign(n_stream, BitVec(2 * cells.size()));
    res.condition_floor = std::numeric_limits<double>::infinity();

    // The channel is held constant over the frame, so F is built once per
    // subcarrier.
    const int n_sc = layout.subcarriers();
    std::vector<CMat> f(n_sc);
    std::vector<uint8_t> flagged(n_sc, 0);
    for (int a = 0; a < n_sc; ++a) {
        CMat h = est.h_at(a);
        bool sing = false;
        f[a] = zf_matrix(h, sing);
        flagged[a] = sing;
        double hn = h.squaredNorm();
        if (hn > 0.0) {
            double cond;
            if (h.cols() == 1) {
                cond = std::sqrt(hn);
            } else {
                cond = std::abs(h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)) / hn;
            }
            res.condition_floor = std::min(res.condition_floor, cond);
        } else {
            res.condition_floor = 0.0;
        }
    }

    CVec y(n_rx), x(n_stream);
    for (size_t c = 0; c < cells.size(); ++c) {
        const auto& [sym, a] = cells[c];
        for (int i = 0; i < n_rx; ++i) y[i] = cancelled[i](sym, a);
        if (flagged[a]) {
            for (int s = 0; s < n_stream; ++s) {
                res.symbols[s][c] = 0.0;
                res.bits[s][2 * c] = 0;
                res.bits[s][2 * c + 1] = 0;
            }
            res.erased_bits += 2 * n_stream;
            continue;
        }
        x.noalias() = f[a] * y;
        for (int s = 0; s < n_stream; ++s) {
            res.symbols[s][c] = x[s];
            res.bits[s][2 * c] = x[s].real() < 0.0;
            res.bits[s][2 * c + 1] = x[s].imag() < 0.0;
        }
    }

    if (truth_bits) {
        if (static_cast<int>(truth_bits->size()) != n_stream)
            throw std::invalid_argument("detect: truth stream count mismatch");
        double errors = 0.0;
        long total = 0;
        for (int s = 0; s < n_stream; ++s) {
            const BitVec& t = (*truth_bits)[s];
            const BitVec& b = res.bits[s];
            if (t.size() != b.size()) throw std::invalid_argument("detect: truth length mismatch");
            for (size_t c = 0; c < cells.size(); ++c) {
                if (flagged[cells[c].second]) {
                    errors += 1.0;  // two erased bits at rate 1/2
                } else {
                    errors += (b[2 * c] != t[2 * c]) + (b[2 * c + 1] != t[2 * c + 1]);
                }
            }
            total += static_cast<long>(t.size());
        }
        res.error_count = errors;
        res.ber = total > 0 ? errors / total : 0.0;
    }
    return res;
}

double count_errors(const BitVec& bits, const BitVec& truth) {
    if (bits.size() != truth.size()) throw std::invalid_argument("count_errors: length mismatch");
    if (bits.empty()) return 0.0;
    long d = 0;
    for (size_t i = 0; i < bits.size(); ++i) d += bits[i] != truth[i];
    return static_cast<double>(d) / bits.size();
}

}  // namespace fdx
