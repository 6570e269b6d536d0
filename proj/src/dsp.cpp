#include "fdx/dsp.hpp"

namespace fdx {

CVec convolve(const CVec& a, const CVec& b) {
    if (a.size() == 0 || b.size() == 0) return CVec();
    CVec out = CVec::Zero(a.size() + b.size() - 1);
    // Few-tap kernels dominate here; scaled-add per tap vectorizes well.
    if (b.size() <= 64) {
        for (Eigen::Index l = 0; l < b.size(); ++l) {
            if (b[l] == cplx(0.0, 0.0)) continue;  // sparse tap-delay lines
            out.segment(l, a.size()) += b[l] * a;
        }
        return out;
    }
    for (Eigen::Index l = 0; l < a.size(); ++l)
        out.segment(l, b.size()) += a[l] * b;
    return out;
}

void fill_randn(CVec& out, Rng& rng) {
    const Eigen::Index n = out.size();
    if (n == 0) return;
    RVec u1(n), u2(n);
    const double inv = 1.0 / 18446744073709551616.0;  // 2^-64
    for (Eigen::Index i = 0; i < n; ++i) {
        u1[i] = (rng() + 0.5) * inv;
        u2[i] = rng() * inv;
    }
    RVec amp = (-u1.array().log()).sqrt().matrix();
    out.real() = amp.array() * (2.0 * kPi * u2.array()).cos();
    out.imag() = amp.array() * (2.0 * kPi * u2.array()).sin();
}

namespace {
int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

CVec xcorr_fft(const CVec& x, const CVec& ref, int lags) {
    const int n = static_cast<int>(ref.size());
    const int need = lags + n;
    const int L = next_pow2(need);
    CVec xa = CVec::Zero(L);
    xa.head(std::min<Eigen::Index>(x.size(), L)) = x.head(std::min<Eigen::Index>(x.size(), L));
    CVec ra = CVec::Zero(L);
    ra.head(n) = ref;
    CVec X = fft_fwd(xa);
    CVec R = fft_fwd(ra);
    CVec prod = X.array() * R.conjugate().array();
    CVec corr = fft_inv(prod);
    return corr.head(lags);
}

}  // namespace fdx
