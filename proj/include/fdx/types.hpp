#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdx {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using BitVec = std::vector<uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Gaussian tail probability, used by the BER oracles.
inline double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// SplitMix64. Used to derive independent per-trial seeds from a master seed
// so trials stay reproducible under any parallel schedule.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed) { return Rng(seed); }

inline cplx randn_c(Rng& rng) {
    // Box-Muller; unit-variance circular complex Gaussian.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a = u(rng);
    double b = u(rng);
    double r = std::sqrt(-std::log(std::max(a, 1e-300)));
    return cplx(r * std::cos(2.0 * kPi * b), r * std::sin(2.0 * kPi * b));
}

// Complex baseband sample sequence on one antenna port.
// power_ref_dbm is the absolute power of a unit mean-square sample; all
// streams in the simulator use 0 dBm reference, i.e. |x|^2 is milliwatts.
struct SampleStream {
    CVec samples;
    double rate = 0.0;
    double power_ref_dbm = 0.0;
};

inline double mean_power(const CVec& v) {
    if (v.size() == 0) return 0.0;
    return v.squaredNorm() / static_cast<double>(v.size());
}

}  // namespace fdx
