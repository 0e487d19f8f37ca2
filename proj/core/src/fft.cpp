#include "homolab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace homolab {

// FFTW planning is not thread-safe; executions on distinct plans are.
static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct TorusFft::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf_in = nullptr;
    fftw_complex* buf_out = nullptr;
    int64_t n = 0;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf_in) fftw_free(buf_in);
        if (buf_out) fftw_free(buf_out);
    }
};

TorusFft::TorusFft(const Grid& g) : grid_(g), impl_(std::make_unique<Impl>()) {
    if (!g.periodic) throw std::invalid_argument("TorusFft: periodic grid required");
    impl_->n = g.num_cells();
    impl_->buf_in = fftw_alloc_complex(static_cast<size_t>(impl_->n));
    impl_->buf_out = fftw_alloc_complex(static_cast<size_t>(impl_->n));
    int rank = g.dim;
    int dims[kMaxDim];
    for (int a = 0; a < rank; ++a) dims[a] = static_cast<int>(g.cells[a]);
    std::lock_guard<std::mutex> lock(planner_mutex());
    impl_->fwd = fftw_plan_dft(rank, dims, impl_->buf_in, impl_->buf_out, FFTW_FORWARD,
                               FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft(rank, dims, impl_->buf_in, impl_->buf_out, FFTW_BACKWARD,
                               FFTW_ESTIMATE);
}

TorusFft::~TorusFft() = default;

void TorusFft::forward(const double* in, std::complex<double>* out) const {
    int64_t n = impl_->n;
    for (int64_t i = 0; i < n; ++i) {
        impl_->buf_in[i][0] = in[i];
        impl_->buf_in[i][1] = 0.0;
    }
    fftw_execute(impl_->fwd);
    std::memcpy(out, impl_->buf_out, sizeof(fftw_complex) * static_cast<size_t>(n));
}

void TorusFft::backward(const std::complex<double>* in, double* out) const {
    int64_t n = impl_->n;
    std::memcpy(impl_->buf_in, in, sizeof(fftw_complex) * static_cast<size_t>(n));
    fftw_execute(impl_->bwd);
    double inv = 1.0 / static_cast<double>(n);
    for (int64_t i = 0; i < n; ++i) out[i] = impl_->buf_out[i][0] * inv;
}

std::array<double, kMaxDim> TorusFft::angles(int64_t idx) const {
    auto m = grid_.cell_coords(idx);
    std::array<double, kMaxDim> th{0, 0, 0};
    for (int a = 0; a < grid_.dim; ++a)
        th[a] = 2.0 * 3.14159265358979323846 * static_cast<double>(m[a]) /
                static_cast<double>(grid_.cells[a]);
    return th;
}

std::array<double, kMaxDim> TorusFft::continuum_freq(int64_t idx) const {
    auto m = grid_.cell_coords(idx);
    std::array<double, kMaxDim> k{0, 0, 0};
    for (int a = 0; a < grid_.dim; ++a) {
        int64_t ms = m[a];
        if (2 * ms > grid_.cells[a]) ms -= grid_.cells[a];
        k[a] = 2.0 * 3.14159265358979323846 * static_cast<double>(ms) /
               (static_cast<double>(grid_.cells[a]) * grid_.h);
    }
    return k;
}

std::complex<double> TorusFft::d_plus(double theta, double h) {
    return std::complex<double>(std::cos(theta) - 1.0, std::sin(theta)) / h;
}

void spectral_gaussian_smooth(const Grid& g, const std::vector<double>& in, double r,
                              std::vector<double>& out) {
    TorusFft fft(g);
    int64_t n = fft.num_modes();
    std::vector<std::complex<double>> hat(static_cast<size_t>(n));
    fft.forward(in.data(), hat.data());
    for (int64_t i = 0; i < n; ++i) {
        auto k = fft.continuum_freq(i);
        double k2 = 0;
        for (int a = 0; a < g.dim; ++a) k2 += k[a] * k[a];
        hat[static_cast<size_t>(i)] *= std::exp(-r * r * k2);
    }
    out.resize(static_cast<size_t>(n));
    fft.backward(hat.data(), out.data());
}

SpectralPoisson::SpectralPoisson(const Grid& g, const SymMat& c)
    : fft_(std::make_shared<TorusFft>(g)) {
    int64_t n = fft_->num_modes();
    symbol_.resize(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        auto th = fft_->angles(i);
        std::complex<double> d[kMaxDim];
        for (int a = 0; a < g.dim; ++a) d[a] = TorusFft::d_plus(th[a], g.h);
        double s = 0;
        for (int a = 0; a < g.dim; ++a)
            for (int b = 0; b < g.dim; ++b)
                s += c(a, b) * (std::conj(d[a]) * d[b]).real();
        symbol_[static_cast<size_t>(i)] = s;
    }
}

void SpectralPoisson::solve(const double* rhs, double* u) const {
    int64_t n = fft_->num_modes();
    std::vector<std::complex<double>> hat(static_cast<size_t>(n));
    fft_->forward(rhs, hat.data());
    for (int64_t i = 0; i < n; ++i) {
        double s = symbol_[static_cast<size_t>(i)];
        hat[static_cast<size_t>(i)] = (s > 1e-14) ? hat[static_cast<size_t>(i)] / s
                                                  : std::complex<double>(0.0, 0.0);
    }
    fft_->backward(hat.data(), u);
}

void SpectralPoisson::apply(const double* u, double* out) const {
    int64_t n = fft_->num_modes();
    std::vector<std::complex<double>> hat(static_cast<size_t>(n));
    fft_->forward(u, hat.data());
    for (int64_t i = 0; i < n; ++i)
        hat[static_cast<size_t>(i)] *= symbol_[static_cast<size_t>(i)];
    fft_->backward(hat.data(), out);
}

struct BoxFdInverse::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* buf = nullptr;
    std::vector<double> eig;  // per flattened mode
    double norm = 1.0;
    int64_t n = 0;

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

BoxFdInverse::BoxFdInverse(const Grid& g, Kind kind, double coeff_scale)
    : impl_(std::make_unique<Impl>()) {
    int rank = g.dim;
    int dims[kMaxDim];
    fftw_r2r_kind kf[kMaxDim], kb[kMaxDim];
    double norm = 1.0;
    // Per-axis eigenvalues of the FD Laplacian in the matching basis.
    std::array<std::vector<double>, kMaxDim> lam;
    for (int a = 0; a < rank; ++a) {
        int64_t nc = g.cells[a];
        if (kind == Kind::DirichletInterior) {
            int m = static_cast<int>(nc - 1);  // interior nodes
            dims[a] = m;
            kf[a] = FFTW_RODFT00;
            kb[a] = FFTW_RODFT00;
            norm *= 2.0 * (m + 1);
            lam[a].resize(static_cast<size_t>(m));
            for (int j = 0; j < m; ++j) {
                double th = 3.14159265358979323846 * (j + 1) / static_cast<double>(nc);
                lam[a][static_cast<size_t>(j)] = (2.0 - 2.0 * std::cos(th)) / (g.h * g.h);
            }
        } else {
            int m = static_cast<int>(nc + 1);  // all nodes
            dims[a] = m;
            kf[a] = FFTW_REDFT10;
            kb[a] = FFTW_REDFT01;
            norm *= 2.0 * m;
            lam[a].resize(static_cast<size_t>(m));
            for (int j = 0; j < m; ++j) {
                double th = 3.14159265358979323846 * j / static_cast<double>(m);
                lam[a][static_cast<size_t>(j)] = (2.0 - 2.0 * std::cos(th)) / (g.h * g.h);
            }
        }
    }
    int64_t total = 1;
    for (int a = 0; a < rank; ++a) total *= dims[a];
    size_ = total;
    impl_->n = total;
    impl_->norm = norm;
    impl_->buf = fftw_alloc_real(static_cast<size_t>(total));
    impl_->eig.resize(static_cast<size_t>(total));
    for (int64_t i = 0; i < total; ++i) {
        int64_t rem = i;
        double s = 0;
        for (int a = rank - 1; a >= 0; --a) {
            int j = static_cast<int>(rem % dims[a]);
            rem /= dims[a];
            s += lam[a][static_cast<size_t>(j)];
        }
        impl_->eig[static_cast<size_t>(i)] = s * coeff_scale;
    }
    std::lock_guard<std::mutex> lock(planner_mutex());
    impl_->fwd = fftw_plan_r2r(rank, dims, impl_->buf, impl_->buf, kf, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_r2r(rank, dims, impl_->buf, impl_->buf, kb, FFTW_ESTIMATE);
}

BoxFdInverse::~BoxFdInverse() = default;

void BoxFdInverse::apply_inverse(const double* in, double* out) const {
    int64_t n = impl_->n;
    std::memcpy(impl_->buf, in, sizeof(double) * static_cast<size_t>(n));
    fftw_execute(impl_->fwd);
    for (int64_t i = 0; i < n; ++i) {
        double lam = impl_->eig[static_cast<size_t>(i)];
        impl_->buf[i] = (lam > 1e-14) ? impl_->buf[i] / (lam * impl_->norm) : 0.0;
    }
    fftw_execute(impl_->bwd);
    std::memcpy(out, impl_->buf, sizeof(double) * static_cast<size_t>(n));
}

}  // namespace homolab
