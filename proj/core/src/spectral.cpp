#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "mixlab/diagnostics.hpp"

namespace mixlab {

namespace {

// FFTW planning is not thread-safe; execution on private buffers is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

struct R2cPlan {
    fftw_plan plan = nullptr;
    int size = 0;

    R2cPlan(int size_, double* in, fftw_complex* out) : size(size_) {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_2d(size, size, in, out, FFTW_ESTIMATE);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
    }
    ~R2cPlan() {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    R2cPlan(const R2cPlan&) = delete;
    R2cPlan& operator=(const R2cPlan&) = delete;
};

struct FftwBuffer {
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    FftwBuffer(std::size_t nreal, std::size_t ncplx) {
        real = fftw_alloc_real(nreal);
        cplx = fftw_alloc_complex(ncplx);
        if (!real || !cplx) throw std::bad_alloc();
    }
    ~FftwBuffer() {
        fftw_free(real);
        fftw_free(cplx);
    }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

int signed_freq(int k, int size) { return k <= size / 2 ? k : k - size; }

/// Sums w(k) * |f_hat(k)|^2 over the r2c spectrum with the Hermitian double
/// counting handled; mult(kx, ky) supplies the multiplier on signed
/// frequencies, and the k = 0 mode is skipped.
template <class Mult>
double spectrum_sum(const fftw_complex* out, int size, Mult mult) {
    const int nxh = size / 2 + 1;
    double sum = 0.0;
    for (int ky = 0; ky < size; ++ky) {
        const int sy = signed_freq(ky, size);
        for (int kx = 0; kx < nxh; ++kx) {
            if (kx == 0 && ky == 0) continue;
            const fftw_complex& c = out[std::size_t(ky) * nxh + kx];
            const double mag2 = c[0] * c[0] + c[1] * c[1];
            const double weight = (kx == 0 || kx == size / 2) ? 1.0 : 2.0;
            sum += weight * mult(kx, sy) * mag2;
        }
    }
    return sum;
}

}  // namespace

double torus_hminus1(int size, double torus_side, const std::vector<double>& values) {
    if (size < 2 || std::int64_t(values.size()) != std::int64_t(size) * size)
        throw std::invalid_argument("bad torus sample");
    const double L = torus_side;
    const double h = L / size;

    FftwBuffer buf(std::size_t(size) * size, std::size_t(size) * (size / 2 + 1));
    for (std::size_t c = 0; c < values.size(); ++c) buf.real[c] = values[c];

    R2cPlan plan(size, buf.real, buf.cplx);
    fftw_execute(plan.plan);

    const double two_pi_over_L = 2.0 * M_PI / L;
    const double sum = spectrum_sum(buf.cplx, size, [&](int kx, int ky) {
        const double qx = two_pi_over_L * kx, qy = two_pi_over_L * ky;
        return 1.0 / (qx * qx + qy * qy);
    });
    // |rho_hat| = h^2 |dft|; norm^2 = (1/L^2) sum |rho_hat|^2 / |xi|^2.
    return std::sqrt(sum) * h * h / L;
}

double functional_mixing_scale(const TracerField& field, int padding) {
    if (padding < 2) throw std::invalid_argument("padding factor must be >= 2");
    if (field.is_binary()) {
        // exact balance is a construction invariant
    } else if (std::abs(field.mean()) > 1e-12) {
        throw std::invalid_argument("functional mixing scale requires a mean-zero field");
    }
    const int n = field.grid().n();
    const int M = padding * n;

    std::vector<double> padded(std::size_t(M) * M, 0.0);
    const int off = (M - n) / 2;  // field block centered on the torus
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            padded[std::size_t(off + j) * M + (off + i)] = field.value(i, j);
    return torus_hminus1(M, double(padding), padded);
}

double fractional_sobolev_l2(const GridSpec& grid, const std::vector<double>& component,
                             double s) {
    if (!(s > 0.0)) throw std::invalid_argument("s must be positive");
    const int n = grid.n();
    if (std::int64_t(component.size()) != grid.cell_count())
        throw std::invalid_argument("component does not match grid");
    const int M = 2 * n;     // doubled even reflection
    const double L = 2.0;    // extension period
    const double h = grid.h();

    FftwBuffer buf(std::size_t(M) * M, std::size_t(M) * (M / 2 + 1));
    const auto mirror = [&](int i) { return i < n ? i : 2 * n - 1 - i; };
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i)
            buf.real[std::size_t(j) * M + i] =
                component[std::size_t(mirror(j)) * n + mirror(i)];

    R2cPlan plan(M, buf.real, buf.cplx);
    fftw_execute(plan.plan);

    const double two_pi_over_L = 2.0 * M_PI / L;
    const double sum = spectrum_sum(buf.cplx, M, [&](int kx, int ky) {
        const double q2 = two_pi_over_L * two_pi_over_L * double(kx * kx + ky * ky);
        return std::pow(q2, s);
    });
    // L2 over the extension is 4x the Q integral; take half the norm.
    return 0.5 * std::sqrt(sum) * h * h / L;
}

}  // namespace mixlab
