#include "fft_util.hpp"

#include <cmath>
#include <mutex>

#include "pshlab/errors.hpp"

namespace pshlab::detail {

namespace {

// FFTW only guarantees thread safety for fftw_execute; planning, plan
// destruction, and the aligned allocator share global state and must be
// serialized when scenarios run on worker threads.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

TorusSpectral::TorusSpectral(const PeriodicGrid& grid) : grid_(grid), count_(grid.node_count()) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_ = fftw_alloc_complex(count_);
    hat_ = fftw_alloc_complex(count_);
    if (!buf_ || !hat_) throw Error("fft buffer allocation failed");
    const int rank = grid_.dims();
    int dims[4] = {grid_.res(), grid_.res(), grid_.res(), grid_.res()};
    fwd_ = fftw_plan_dft(rank, dims, buf_, hat_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(rank, dims, hat_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw Error("fft plan creation failed");
    cosv_.resize(grid_.res());
    sinv_.resize(grid_.res());
    for (int k = 0; k < grid_.res(); ++k) {
        const double th = 2.0 * M_PI * k / grid_.res();
        cosv_[k] = std::cos(th);
        sinv_[k] = std::sin(th);
    }
}

TorusSpectral::~TorusSpectral() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
    if (buf_) fftw_free(buf_);
    if (hat_) fftw_free(hat_);
}

void TorusSpectral::forward() const { fftw_execute(fwd_); }
void TorusSpectral::backward() const { fftw_execute(bwd_); }

std::vector<double> TorusSpectral::poisson(const std::vector<double>& rhs, double kappa) const {
    return constant_coefficient_solve(rhs, Herm::identity(grid_.n()), kappa);
}

std::vector<double> TorusSpectral::constant_coefficient_solve(const std::vector<double>& rhs,
                                                              const Herm& P, double kappa) const {
    if (rhs.size() != count_) throw ParameterError("spectral solve: size mismatch");
    // project the rhs onto mean zero; the operator annihilates constants
    const double mean = pairwise_sum(rhs) / static_cast<double>(count_);
    for (std::size_t i = 0; i < count_; ++i) {
        buf_[i][0] = rhs[i] - mean;
        buf_[i][1] = 0.0;
    }
    forward();

    const double s = grid_.spacing();
    const double q = kappa / (4.0 * s * s);
    const int res = grid_.res();
    const int dims = grid_.dims();

    // traverse frequency space with incremental per-axis indices
    int k[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < count_; ++i) {
        double sym;
        const double d0 = 2.0 * cosv_[k[0]] - 2.0;
        const double d1 = 2.0 * cosv_[k[1]] - 2.0;
        if (grid_.n() == 1) {
            sym = q * P.a11 * (d0 + d1);
        } else {
            const double d2 = 2.0 * cosv_[k[2]] - 2.0;
            const double d3 = 2.0 * cosv_[k[3]] - 2.0;
            const double h11 = q * (d0 + d1);
            const double h22 = q * (d2 + d3);
            const double re12 = q * (-sinv_[k[0]] * sinv_[k[2]] - sinv_[k[1]] * sinv_[k[3]]);
            const double im12 = q * (-sinv_[k[0]] * sinv_[k[3]] + sinv_[k[1]] * sinv_[k[2]]);
            sym = P.a11 * h11 + P.a22 * h22 +
                  2.0 * (P.a12.real() * re12 + P.a12.imag() * im12);
        }
        if (i == 0 || sym == 0.0) {
            hat_[i][0] = 0.0;
            hat_[i][1] = 0.0;
        } else {
            hat_[i][0] /= sym;
            hat_[i][1] /= sym;
        }
        for (int a = dims - 1; a >= 0; --a) {
            if (++k[a] < res) break;
            k[a] = 0;
        }
    }

    backward();
    std::vector<double> out(count_);
    const double scale = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < count_; ++i) out[i] = buf_[i][0] * scale;
    return out;
}

} // namespace pshlab::detail
