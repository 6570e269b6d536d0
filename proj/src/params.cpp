#include "fdx/params.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fdx {

const char* to_string(DuplexMode m) {
    switch (m) {
        case DuplexMode::HdSiso: return "hd-siso";
        case DuplexMode::FdSiso: return "fd-siso";
        case DuplexMode::FdMimo: return "fd-mimo";
    }
    return "?";
}

DuplexMode duplex_mode_from_string(const std::string& s) {
    if (s == "hd-siso") return DuplexMode::HdSiso;
    if (s == "fd-siso") return DuplexMode::FdSiso;
    if (s == "fd-mimo") return DuplexMode::FdMimo;
    throw std::invalid_argument("unknown duplex mode: " + s);
}

void SystemParams::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("params: " + msg); };
    if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0) fail("fft_size must be a power of two");
    if (cp_len <= 0 || cp_len >= fft_size) fail("cp_len must be in (0, fft_size)");
    if (std::abs(sample_rate - fft_size * subcarrier_spacing_hz) > 1e-6 * sample_rate)
        fail("sample_rate must equal fft_size * subcarrier_spacing_hz");
    if (n_data_subcarriers <= 0 || n_data_subcarriers % 2 != 0) fail("n_data_subcarriers must be even");
    if (n_data_subcarriers > fft_size - 2) fail("n_data_subcarriers too large for fft_size");
    if (symbols_per_slot <= 0 || slots_per_frame <= 0 || slots_per_frame % 2 != 0)
        fail("frame needs a positive, even slot count");
    if (n_tx < 1 || n_tx > 2 || n_rx < 1 || n_rx > 2) fail("only 1x1 and 2x2 configurations supported");
    if (pss_len != 62) fail("pss_len must be 62");
    if (lpf_taps < 3 || lpf_taps % 2 == 0) fail("lpf_taps must be odd and >= 3");
    if (nsp_threshold <= 1.0) fail("nsp_threshold must exceed 1");
    if (pdp_taps < 1) fail("pdp_taps must be >= 1");
    if (pdp_tap_spacing < 1) fail("pdp_tap_spacing must be >= 1");
    if (delay_self_max > delay_desired_max) fail("delay_self_max must not exceed delay_desired_max");
    if (delay_desired_max + (pdp_taps - 1) * pdp_tap_spacing >= cp_len)
        fail("delay spread plus path delay must stay inside the CP");
    if (demod_advance < 0 || demod_advance >= cp_len) fail("demod_advance must be in [0, cp_len)");
    if (est_smooth_taps < 1 || est_smooth_taps % 2 == 0) fail("est_smooth_taps must be odd");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw std::invalid_argument("not a boolean: " + v);
}

}  // namespace

bool SystemParams::apply(const std::string& key_in, const std::string& value) {
    // Dotted section prefixes ("grid.fft_size") are accepted and stripped.
    std::string key = key_in;
    size_t dot = key.rfind('.');
    if (dot != std::string::npos) key = key.substr(dot + 1);

    auto d = [&](double& field) { field = std::stod(value); return true; };
    auto i = [&](int& field) { field = std::stoi(value); return true; };

    if (key == "carrier_hz") return d(carrier_hz);
    if (key == "sample_rate") return d(sample_rate);
    if (key == "fft_size") return i(fft_size);
    if (key == "cp_len") return i(cp_len);
    if (key == "subcarrier_spacing_hz") return d(subcarrier_spacing_hz);
    if (key == "n_data_subcarriers") return i(n_data_subcarriers);
    if (key == "symbols_per_slot") return i(symbols_per_slot);
    if (key == "slots_per_frame") return i(slots_per_frame);
    if (key == "n_tx") return i(n_tx);
    if (key == "n_rx") return i(n_rx);
    if (key == "root_index_1") return i(root_index_1);
    if (key == "root_index_2") return i(root_index_2);
    if (key == "pss_len") return i(pss_len);
    if (key == "nsp_threshold") return d(nsp_threshold);
    if (key == "nsp_window") return i(nsp_window);
    if (key == "lpf_taps") return i(lpf_taps);
    if (key == "lpf_cutoff_hz") return d(lpf_cutoff_hz);
    if (key == "tx_power_dbm") return d(tx_power_dbm);
    if (key == "papr_margin_db") return d(papr_margin_db);
    if (key == "noise_floor_dbm") return d(noise_floor_dbm);
    if (key == "p1db_tx_dbm") return d(p1db_tx_dbm);
    if (key == "p1db_rx_dbm") return d(p1db_rx_dbm);
    if (key == "pa_smoothness") return d(pa_smoothness);
    if (key == "lna_smoothness") return d(lna_smoothness);
    if (key == "nonlinear_enabled") { nonlinear_enabled = parse_bool(value); return true; }
    if (key == "alpha_selftalk_db") return d(alpha_selftalk_db);
    if (key == "alpha_crosstalk_db") return d(alpha_crosstalk_db);
    if (key == "channel_profile") { channel_profile = value; return true; }
    if (key == "pdp_taps") return i(pdp_taps);
    if (key == "pdp_tap_spacing") return i(pdp_tap_spacing);
    if (key == "pdp_decay_db") return d(pdp_decay_db);
    if (key == "delay_desired_max") return i(delay_desired_max);
    if (key == "delay_self_max") return i(delay_self_max);
    if (key == "demod_advance") return i(demod_advance);
    if (key == "est_smooth_taps") return i(est_smooth_taps);
    return false;
}

SystemParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    SystemParams p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s[0] == '[') continue;  // section header, sections also usable as dotted prefixes
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (!p.apply(key, value))
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    p.validate();
    return p;
}

int mode_ports(DuplexMode m) { return m == DuplexMode::FdMimo ? 2 : 1; }

int mode_crs_ports(DuplexMode m) {
    switch (m) {
        case DuplexMode::HdSiso: return 1;
        case DuplexMode::FdSiso: return 2;
        case DuplexMode::FdMimo: return 4;
    }
    return 0;
}

int node_port_offset(DuplexMode m, NodeRole role) {
    if (m == DuplexMode::HdSiso) return 0;
    return role == NodeRole::A ? 0 : mode_ports(m);
}

int node_pss_root(const SystemParams& p, NodeRole role) {
    return role == NodeRole::A ? p.root_index_1 : p.root_index_2;
}

}  // namespace fdx
