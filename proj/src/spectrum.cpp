#include "nvmap/spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include "nvmap/constants.hpp"

namespace nvmap {

namespace {

std::mutex plan_mutex;
std::map<int, fftw_plan> plans;

fftw_plan plan_for(int n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(n, p);
    return p;
}

}  // namespace

void one_sided_dft(const std::vector<double>& x, std::vector<double>& re, std::vector<double>& im) {
    const int n = static_cast<int>(x.size());
    const int half = n / 2;
    re.assign(half, 0.0);
    im.assign(half, 0.0);
    if (n < 2) return;
    thread_local std::vector<double> in;
    thread_local std::vector<std::complex<double>> out;
    in.assign(x.begin(), x.end());
    out.assign(half + 1, {});
    fftw_execute_dft_r2c(plan_for(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    // samples are indexed from k = 1, so shift the phase by one step
    for (int j = 1; j <= half; ++j) {
        const double ang = -kTwoPi * static_cast<double>(j) / n;
        const std::complex<double> v = out[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        re[j - 1] = v.real();
        im[j - 1] = v.imag();
    }
}

}  // namespace nvmap
