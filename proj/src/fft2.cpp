#include "cspread/fft2.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace cspread {

namespace {

std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan get_plan(int n0, int n1, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(n0, n1, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;

    fftw_complex* a = fftw_alloc_complex(static_cast<std::size_t>(n0) * n1);
    fftw_complex* b = fftw_alloc_complex(static_cast<std::size_t>(n0) * n1);
    fftw_plan p = (n0 == 1)
        ? fftw_plan_dft_1d(n1, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
        : fftw_plan_dft_2d(n0, n1, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw std::runtime_error("fft2: plan creation failed");
    plan_cache.emplace(key, p);
    return p;
}

void run(int n0, int n1, int sign, const cplx* in, cplx* out) {
    fftw_plan p = get_plan(n0, n1, sign);
    fftw_execute_dft(p,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace

void fft2_forward(int n0, int n1, const cplx* in, cplx* out) { run(n0, n1, FFTW_FORWARD, in, out); }
void fft2_backward(int n0, int n1, const cplx* in, cplx* out) { run(n0, n1, FFTW_BACKWARD, in, out); }
void fft1_forward(int n, const cplx* in, cplx* out) { run(1, n, FFTW_FORWARD, in, out); }
void fft1_backward(int n, const cplx* in, cplx* out) { run(1, n, FFTW_BACKWARD, in, out); }

} // namespace cspread
