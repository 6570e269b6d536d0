#include "fdx/grid.hpp"

#include "fdx/dsp.hpp"
#include "fdx/sync.hpp"

#include <sstream>

namespace fdx {

namespace {

// LTE four-port CRS schedule for extended CP (6 symbols per slot):
// ports 0/1 in symbols 0 and 3 with swapped frequency shifts, ports 2/3 in
// symbol 1. Frequency comb is every 6th subcarrier of the active band.
struct CrsPos {
    int port;
    int sym_in_slot;
    int shift;
};

const CrsPos kCrs4[] = {
    {0, 0, 0}, {0, 3, 3}, {1, 0, 3}, {1, 3, 0}, {2, 1, 0}, {3, 1, 3},
};

}  // namespace

FrameLayout::FrameLayout(const SystemParams& p, DuplexMode mode)
    : symbols_(p.symbols_per_frame()),
      n_sc_(p.n_data_subcarriers),
      crs_ports_(mode_crs_ports(mode)),
      mode_(mode) {
    kind_.assign(static_cast<size_t>(symbols_) * n_sc_, 0);
    owner_.assign(kind_.size(), -1);
    crs_cells_.resize(crs_ports_);

    for (int slot = 0; slot < p.slots_per_frame; ++slot) {
        for (const CrsPos& c : kCrs4) {
            if (c.port >= crs_ports_) continue;
            int sym = slot * p.symbols_per_slot + c.sym_in_slot;
            for (int a = c.shift; a < n_sc_; a += 6) {
                kind_[idx(sym, a)] = 1;
                owner_[idx(sym, a)] = static_cast<int8_t>(c.port);
                crs_cells_[c.port].push_back({sym, a});
            }
        }
    }
    for (int half = 0; half < 2; ++half) {
        int sym = p.pss_symbol_index(half);
        for (int a = 0; a < n_sc_; ++a) {
            if (!pss_band(a)) continue;
            kind_[idx(sym, a)] = 2;
            owner_[idx(sym, a)] = -1;
        }
    }
    for (int sym = 0; sym < symbols_; ++sym)
        for (int a = 0; a < n_sc_; ++a)
            if (kind_[idx(sym, a)] == 0) data_cells_.push_back({sym, a});
}

Cell FrameLayout::tag(int local_port, int port_offset, int sym, int a) const {
    switch (kind_[idx(sym, a)]) {
        case 1: return owner_[idx(sym, a)] == local_port + port_offset ? Cell::Crs : Cell::Null;
        case 2: return local_port == 0 ? Cell::Pss : Cell::Null;
        default: return Cell::Data;
    }
}

cplx crs_value(int joint_port, int sym, int a) {
    uint64_t s = 0x8f1bbcdcULL * (joint_port + 1) + 0x2545f491ULL * (sym + 1) + 0x9e3779b9ULL * (a + 1);
    uint64_t h = splitmix64(s);
    const double r = 1.0 / std::sqrt(2.0);
    return cplx(h & 1 ? -r : r, h & 2 ? -r : r);
}

CVec qpsk_modulate(const BitVec& bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_modulate: odd bit count");
    CVec out(bits.size() / 2);
    const double r = 1.0 / std::sqrt(2.0);
    for (size_t i = 0; i < bits.size(); i += 2)
        out[i / 2] = cplx((1 - 2 * bits[i]) * r, (1 - 2 * bits[i + 1]) * r);
    return out;
}

BitVec qpsk_demodulate(const CVec& symbols) {
    BitVec out(2 * symbols.size());
    for (Eigen::Index i = 0; i < symbols.size(); ++i) {
        out[2 * i] = symbols[i].real() < 0.0;
        out[2 * i + 1] = symbols[i].imag() < 0.0;
    }
    return out;
}

BitVec random_bits(int n, Rng& rng) {
    BitVec bits(n);
    uint64_t word = 0;
    int have = 0;
    for (int i = 0; i < n; ++i) {
        if (have == 0) {
            word = rng();
            have = 64;
        }
        bits[i] = word & 1;
        word >>= 1;
        --have;
    }
    return bits;
}

ResourceGrid build_frame(const SystemParams& p, DuplexMode mode, NodeRole role,
                         const std::vector<BitVec>& payload_bits,
                         std::shared_ptr<const FrameLayout> layout) {
    if (!layout) layout = std::make_shared<FrameLayout>(p, mode);
    if (layout->mode() != mode) throw std::invalid_argument("build_frame: layout mode mismatch");
    const int ports = mode_ports(mode);
    if (static_cast<int>(payload_bits.size()) != ports)
        throw std::invalid_argument("build_frame: payload port count mismatch");
    const int cap = layout->data_capacity_bits_per_port();
    for (const auto& bits : payload_bits) {
        if (static_cast<int>(bits.size()) != cap) {
            std::ostringstream os;
            os << "build_frame: payload size mismatch, expected " << cap << " bits per port, got "
               << bits.size();
            throw std::invalid_argument(os.str());
        }
    }

    ResourceGrid g;
    g.layout = layout;
    g.role = role;
    g.port_offset = node_port_offset(mode, role);
    g.pss_root = node_pss_root(p, role);
    g.values.assign(ports, CMat::Zero(layout->symbols(), layout->subcarriers()));

    ZcSequence zc = zc_generate(g.pss_root);
    for (int port = 0; port < ports; ++port) {
        CVec data = qpsk_modulate(payload_bits[port]);
        Eigen::Index di = 0;
        for (const auto& [sym, a] : layout->data_cells()) g.values[port](sym, a) = data[di++];
        for (const auto& [sym, a] : layout->crs_cells(port + g.port_offset))
            g.values[port](sym, a) = crs_value(port + g.port_offset, sym, a);
        if (port == 0) {
            for (int half = 0; half < 2; ++half) {
                int sym = p.pss_symbol_index(half);
                for (int k = -31; k <= 31; ++k) {
                    if (k == 0) continue;
                    g.values[0](sym, layout->a_of(k)) = zc.value(k);
                }
            }
        }
    }
    return g;
}

std::vector<CVec> ofdm_modulate(const ResourceGrid& grid, const SystemParams& p, int n_symbols) {
    const FrameLayout& L = *grid.layout;
    if (L.symbols() != p.symbols_per_frame() || L.subcarriers() != p.n_data_subcarriers)
        throw std::invalid_argument("ofdm_modulate: grid dimensions do not match params");
    const int N = p.fft_size;
    const int S = p.samples_per_symbol();
    const int n_sym = n_symbols < 0 ? L.symbols() : std::min(n_symbols, L.symbols());
    const double scale = std::sqrt(static_cast<double>(N));
    std::vector<CVec> streams(grid.ports());
    CVec bins(N), time;
    for (int port = 0; port < grid.ports(); ++port) {
        CVec out(n_sym * S);
        for (int sym = 0; sym < n_sym; ++sym) {
            bins.setZero();
            for (int a = 0; a < L.subcarriers(); ++a) {
                cplx v = grid.values[port](sym, a);
                if (v != cplx(0.0, 0.0)) bins[(L.k_of(a) + N) % N] = v;
            }
            FftEngine::instance().inv(bins, time);
            time *= scale;
            out.segment(sym * S, p.cp_len) = time.tail(p.cp_len);
            out.segment(sym * S + p.cp_len, N) = time;
        }
        streams[port] = std::move(out);
    }
    return streams;
}

RxLattice ofdm_demodulate(const std::vector<CVec>& streams, int start_index, const SystemParams& p,
                          const FrameLayout& layout) {
    const int N = p.fft_size;
    const int S = p.samples_per_symbol();
    const int frame_len = layout.symbols() * S;
    if (start_index < 0) throw std::out_of_range("ofdm_demodulate: negative start_index");
    for (const CVec& s : streams)
        if (start_index + frame_len > s.size())
            throw std::out_of_range("ofdm_demodulate: start_index + frame length exceeds stream");
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    RxLattice out(streams.size());
    CVec window(N), bins;
    for (size_t port = 0; port < streams.size(); ++port) {
        CMat m(layout.symbols(), layout.subcarriers());
        for (int sym = 0; sym < layout.symbols(); ++sym) {
            window = streams[port].segment(start_index + sym * S + p.cp_len, N);
            FftEngine::instance().fwd(window, bins);
            for (int a = 0; a < layout.subcarriers(); ++a)
                m(sym, a) = bins[(layout.k_of(a) + N) % N] * scale;
        }
        out[port] = std::move(m);
    }
    return out;
}

}  // namespace fdx
