#pragma once

#include "fdx/params.hpp"
#include "fdx/types.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace fdx {

enum class Cell : uint8_t { Null = 0, Data, Crs, Pss };

// Joint cell layout of one frame, shared by both nodes of a link. The
// subcarrier axis holds the n_data_subcarriers active bins around DC
// (DC itself unused). CRS cells are owned by one joint port and muted on
// every other port; the PSS region is the central 62 bins of the sync
// symbols, sent on each node's first Tx port.
class FrameLayout {
public:
    FrameLayout(const SystemParams& p, DuplexMode mode);

    int symbols() const { return symbols_; }
    int subcarriers() const { return n_sc_; }
    int crs_ports() const { return crs_ports_; }
    DuplexMode mode() const { return mode_; }

    bool is_pss(int sym, int a) const { return kind_[idx(sym, a)] == 2; }
    bool is_crs(int sym, int a) const { return kind_[idx(sym, a)] == 1; }
    bool is_data(int sym, int a) const { return kind_[idx(sym, a)] == 0; }
    // Owning joint port of a CRS cell; -1 elsewhere.
    int crs_owner(int sym, int a) const { return kind_[idx(sym, a)] == 1 ? owner_[idx(sym, a)] : -1; }

    // Per-port occupancy tag for a node owning joint ports [offset, offset+n_ports).
    Cell tag(int local_port, int port_offset, int sym, int a) const;

    // Data cells in payload order (symbol-major).
    const std::vector<std::pair<int, int>>& data_cells() const { return data_cells_; }
    int data_capacity_bits_per_port() const { return 2 * static_cast<int>(data_cells_.size()); }

    // CRS cells of one joint port: (slot-spanning) list of (sym, a).
    const std::vector<std::pair<int, int>>& crs_cells(int joint_port) const { return crs_cells_[joint_port]; }

    // Signed subcarrier index k for lattice column a, and back.
    int k_of(int a) const { return a < n_sc_ / 2 ? a - n_sc_ / 2 : a - n_sc_ / 2 + 1; }
    int a_of(int k) const { return k < 0 ? k + n_sc_ / 2 : k + n_sc_ / 2 - 1; }
    bool pss_band(int a) const { int k = k_of(a); return k >= -31 && k <= 31; }

private:
    size_t idx(int sym, int a) const { return static_cast<size_t>(sym) * n_sc_ + a; }

    int symbols_;
    int n_sc_;
    int crs_ports_;
    DuplexMode mode_;
    std::vector<uint8_t> kind_;   // 0 data, 1 crs, 2 pss
    std::vector<int8_t> owner_;   // joint port for crs cells
    std::vector<std::pair<int, int>> data_cells_;
    std::vector<std::vector<std::pair<int, int>>> crs_cells_;
};

// Deterministic unit-power CRS pilot value, known at both nodes.
cplx crs_value(int joint_port, int sym, int a);

// Frequency-domain symbol lattice of one node's Tx ports for one frame.
struct ResourceGrid {
    std::shared_ptr<const FrameLayout> layout;
    NodeRole role = NodeRole::A;
    int port_offset = 0;
    int pss_root = 0;
    std::vector<CMat> values;  // per local port, symbols x subcarriers

    int ports() const { return static_cast<int>(values.size()); }
    Cell tag(int port, int sym, int a) const { return layout->tag(port, port_offset, sym, a); }
};

// Received (untagged) lattice per Rx port.
using RxLattice = std::vector<CMat>;

// Gray-mapped QPSK, unit average power: (b0,b1) -> ((1-2 b0) + j (1-2 b1))/sqrt(2).
CVec qpsk_modulate(const BitVec& bits);
BitVec qpsk_demodulate(const CVec& symbols);

// Random payload helper.
BitVec random_bits(int n, Rng& rng);

// Populates a node's grid: QPSK data, the joint CRS pattern (cells owned by
// other ports muted), and this node's PSS on its first Tx port. payload_bits
// holds one bit sequence per local Tx port and must match the layout's
// capacity exactly.
ResourceGrid build_frame(const SystemParams& p, DuplexMode mode, NodeRole role,
                         const std::vector<BitVec>& payload_bits,
                         std::shared_ptr<const FrameLayout> layout = nullptr);

// IFFT + cyclic prefix per symbol, unitary scaling: time-domain mean power of
// the CP-stripped symbol equals (1/N) sum |cell|^2. n_symbols < 0 modulates
// the whole frame; smaller values emit a truncated stream (scan-only trials).
std::vector<CVec> ofdm_modulate(const ResourceGrid& grid, const SystemParams& p, int n_symbols = -1);

// CP removal + FFT from start_index; returns the active-band lattice per port.
RxLattice ofdm_demodulate(const std::vector<CVec>& streams, int start_index, const SystemParams& p,
                          const FrameLayout& layout);

}  // namespace fdx
