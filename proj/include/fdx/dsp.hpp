#pragma once

#include "fdx/types.hpp"

#include <unsupported/Eigen/FFT>

namespace fdx {

// Thread-local FFT engine so kissfft plans are built once per size per thread.
class FftEngine {
public:
    static FftEngine& instance() {
        thread_local FftEngine eng;
        return eng;
    }

    // Unscaled DFT: X[k] = sum_n x[n] e^{-j2pi kn/N}.
    void fwd(const CVec& in, CVec& out) { fft_.fwd(out, in); }
    // Scaled inverse: x[n] = (1/N) sum_k X[k] e^{+j2pi kn/N}.
    void inv(const CVec& in, CVec& out) { fft_.inv(out, in); }

private:
    Eigen::FFT<double> fft_;
};

inline CVec fft_fwd(const CVec& in) {
    CVec out;
    FftEngine::instance().fwd(in, out);
    return out;
}

inline CVec fft_inv(const CVec& in) {
    CVec out;
    FftEngine::instance().inv(in, out);
    return out;
}

// Linear convolution, full length (a.size()+b.size()-1).
CVec convolve(const CVec& a, const CVec& b);

// Fills the vector with unit-variance circular complex Gaussians; batched
// Box-Muller over Eigen array math.
void fill_randn(CVec& out, Rng& rng);

// Linear cross-correlation r[d] = sum_n x[n+d] conj(ref[n]) for d in [0, lags),
// computed in the frequency domain. x must be at least lags + ref.size() long
// (it is zero-extended otherwise).
CVec xcorr_fft(const CVec& x, const CVec& ref, int lags);

}  // namespace fdx
