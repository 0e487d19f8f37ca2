#include "homolab/gaussian.hpp"

#include <cmath>
#include <complex>
#include <map>

namespace homolab {

namespace {

constexpr uint64_t kTagCoarse = 0xc0a45eULL;
constexpr uint64_t kTagDetail = 0xde7a11ULL;

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

int64_t ceil_div(int64_t a, int64_t b) { return -floor_div(-a, b); }

// Integrals of f over dyadic cells, from f's native level down to level 0.
struct Pyramid {
    int dim;
    // per level: box [lo, hi) in level-cell units and integral values
    struct Layer {
        std::array<int64_t, kMaxDim> lo{0, 0, 0}, hi{1, 1, 1};
        std::vector<double> I;
        int64_t index(const std::array<int64_t, kMaxDim>& z, int dim) const {
            int64_t idx = 0;
            for (int a = 0; a < dim; ++a) {
                if (z[a] < lo[a] || z[a] >= hi[a]) return -1;
                idx = idx * (hi[a] - lo[a]) + (z[a] - lo[a]);
            }
            return idx;
        }
        int64_t count(int dim) const {
            int64_t n = 1;
            for (int a = 0; a < dim; ++a) n *= hi[a] - lo[a];
            return n;
        }
    };
    std::map<int, Layer> layers;

    double integral(int level, const std::array<int64_t, kMaxDim>& z) const {
        auto it = layers.find(level);
        if (it == layers.end()) return 0.0;
        int64_t idx = it->second.index(z, dim);
        return idx < 0 ? 0.0 : it->second.I[static_cast<size_t>(idx)];
    }
};

Pyramid build_pyramid(const DyadicFn& f) {
    Pyramid pyr;
    pyr.dim = f.dim;
    Pyramid::Layer base;
    base.lo = f.lo;
    base.hi = f.hi;
    base.I.resize(static_cast<size_t>(f.num_cells()));
    double vol = f.cell_volume();
    for (size_t i = 0; i < base.I.size(); ++i) base.I[i] = f.values[i] * vol;
    pyr.layers[f.level] = std::move(base);
    for (int l = f.level - 1; l >= 0; --l) {
        const Pyramid::Layer& fine = pyr.layers[l + 1];
        Pyramid::Layer coarse;
        for (int a = 0; a < f.dim; ++a) {
            coarse.lo[a] = floor_div(fine.lo[a], 2);
            coarse.hi[a] = ceil_div(fine.hi[a], 2);
        }
        coarse.I.assign(static_cast<size_t>(coarse.count(f.dim)), 0.0);
        // accumulate children
        std::array<int64_t, kMaxDim> z = fine.lo;
        int64_t nf = fine.count(f.dim);
        for (int64_t i = 0; i < nf; ++i) {
            std::array<int64_t, kMaxDim> parent{0, 0, 0};
            for (int a = 0; a < f.dim; ++a) parent[a] = floor_div(z[a], 2);
            int64_t pi = coarse.index(parent, f.dim);
            int64_t fi = fine.index(z, f.dim);
            coarse.I[static_cast<size_t>(pi)] += fine.I[static_cast<size_t>(fi)];
            int a = 0;
            while (a < f.dim) {
                if (++z[a] < fine.hi[a]) break;
                z[a] = fine.lo[a];
                ++a;
            }
        }
        pyr.layers[l] = std::move(coarse);
    }
    return pyr;
}

}  // namespace

DyadicFn DyadicFn::indicator_unit_box(int dim) { return box_indicator(dim, 1); }

DyadicFn DyadicFn::box_indicator(int dim, int64_t side) {
    DyadicFn f;
    f.dim = dim;
    f.level = 0;
    for (int a = 0; a < dim; ++a) {
        f.lo[a] = 0;
        f.hi[a] = side;
    }
    f.values.assign(static_cast<size_t>(f.num_cells()), 1.0);
    return f;
}

DyadicFn DyadicFn::cell_indicator(int dim, int level, const std::array<int64_t, kMaxDim>& z) {
    DyadicFn f;
    f.dim = dim;
    f.level = level;
    for (int a = 0; a < dim; ++a) {
        f.lo[a] = z[a];
        f.hi[a] = z[a] + 1;
    }
    f.values = {1.0};
    return f;
}

int64_t DyadicFn::num_cells() const {
    int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= hi[a] - lo[a];
    return n;
}

double DyadicFn::cell_volume() const { return std::pow(0.5, level * dim); }

double DyadicFn::l2_norm_sq() const {
    double s = 0;
    for (double v : values) s += v * v;
    return s * cell_volume();
}

WhiteNoise::WhiteNoise(int dim, int level, double sigma2, uint64_t seed)
    : dim_(dim), level_(level), ncomp_(1), sigma2_(sigma2), key_(seed) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("WhiteNoise: bad dimension");
}

WhiteNoise::WhiteNoise(int dim, int level, const SymMat& Q, uint64_t seed)
    : dim_(dim), level_(level), ncomp_(Q.dim), sigma2_(1.0), key_(seed) {
    q_sqrt_ = Q.sqrt_spd();
}

template <typename Accum>
void WhiteNoise::for_each_coefficient(const DyadicFn& f, int max_level, Accum&& acc) const {
    Pyramid pyr = build_pyramid(f);
    // coarse layer: indicator coefficients on integer cells
    {
        const auto& layer = pyr.layers.at(0);
        std::array<int64_t, kMaxDim> z = layer.lo;
        int64_t n = layer.count(dim_);
        for (int64_t i = 0; i < n; ++i) {
            double coeff = layer.I[static_cast<size_t>(layer.index(z, dim_))];
            if (coeff != 0.0) {
                HashKey bk = key_.with(kTagCoarse);
                for (int a = 0; a < dim_; ++a) bk = bk.with_signed(z[a]);
                acc(bk, coeff);
            }
            int a = 0;
            while (a < dim_) {
                if (++z[a] < layer.hi[a]) break;
                z[a] = layer.lo[a];
                ++a;
            }
        }
    }
    // detail layers k < min(max_level, native f level): finer details vanish
    int kmax = std::min(max_level, f.level);
    int nsigns = 1 << dim_;
    for (int k = 0; k < kmax; ++k) {
        auto it = pyr.layers.find(k + 1);
        if (it == pyr.layers.end()) continue;
        const auto& child = it->second;
        std::array<int64_t, kMaxDim> plo{0, 0, 0}, phi{1, 1, 1};
        for (int a = 0; a < dim_; ++a) {
            plo[a] = floor_div(child.lo[a], 2);
            phi[a] = ceil_div(child.hi[a], 2);
        }
        double scale = std::pow(2.0, 0.5 * k * dim_);
        std::array<int64_t, kMaxDim> z = plo;
        while (true) {
            // child integrals for the 2^d subcells
            double sub[8];
            bool any = false;
            for (int b = 0; b < nsigns; ++b) {
                std::array<int64_t, kMaxDim> cz;
                cz.fill(0);
                for (int a = 0; a < dim_; ++a) cz[a] = 2 * z[a] + ((b >> a) & 1);
                int64_t ci = child.index(cz, dim_);
                sub[b] = ci < 0 ? 0.0 : child.I[static_cast<size_t>(ci)];
                any = any || sub[b] != 0.0;
            }
            if (any) {
                for (int i = 1; i < nsigns; ++i) {
                    double coeff = 0;
                    for (int b = 0; b < nsigns; ++b) {
                        double sign = 1.0;
                        for (int a = 0; a < dim_; ++a)
                            if ((i >> a) & 1) sign *= ((b >> a) & 1) ? -1.0 : 1.0;
                        coeff += sign * sub[b];
                    }
                    coeff *= scale;
                    if (coeff != 0.0) {
                        HashKey bk = key_.with(kTagDetail).with(static_cast<uint64_t>(k));
                        for (int a = 0; a < dim_; ++a) bk = bk.with_signed(z[a]);
                        bk = bk.with(static_cast<uint64_t>(i));
                        acc(bk, coeff);
                    }
                }
            }
            int a = 0;
            while (a < dim_) {
                if (++z[a] < phi[a]) break;
                z[a] = plo[a];
                ++a;
            }
            if (a == dim_) break;
        }
    }
}

double WhiteNoise::evaluate(const DyadicFn& f) const {
    if (ncomp_ != 1) throw std::logic_error("WhiteNoise::evaluate: vector noise");
    double sigma = std::sqrt(sigma2_);
    double sum = 0;
    for_each_coefficient(f, level_, [&](const HashKey& bk, double coeff) {
        sum += normal(bk, 0) * coeff;
    });
    return sigma * sum;
}

double WhiteNoise::evaluate_vec(const std::vector<DyadicFn>& f) const {
    if (static_cast<int>(f.size()) != ncomp_)
        throw std::invalid_argument("WhiteNoise::evaluate_vec: component count mismatch");
    double sum = 0;
    for (int c = 0; c < ncomp_; ++c) {
        for_each_coefficient(f[static_cast<size_t>(c)], level_,
                             [&](const HashKey& bk, double coeff) {
                                 double xc = 0;
                                 for (int m = 0; m < ncomp_; ++m)
                                     xc += q_sqrt_(c, m) * normal(bk, static_cast<uint64_t>(m));
                                 sum += xc * coeff;
                             });
    }
    return sum;
}

double WhiteNoise::variance_exact(const DyadicFn& f) const {
    double s = 0;
    for_each_coefficient(f, level_,
                         [&](const HashKey&, double coeff) { s += coeff * coeff; });
    return sigma2_ * s;
}

double WhiteNoise::variance_cell_formula(const DyadicFn& f) const {
    if (f.level <= level_) {
        // f is resolved at the native level: the formula collapses to ||f||^2
        return sigma2_ * f.l2_norm_sq();
    }
    Pyramid pyr = build_pyramid(f);
    const auto& layer = pyr.layers.at(level_);
    double cellvol = std::pow(0.5, level_ * dim_);
    double s = 0;
    for (double I : layer.I) {
        double avg = I / cellvol;
        s += cellvol * avg * avg;
    }
    return sigma2_ * s;
}

double WhiteNoise::refinement_variance(const DyadicFn& f) const {
    // detail coefficients at exactly level n
    if (f.level <= level_) return 0.0;
    Pyramid pyr = build_pyramid(f);
    const auto& child = pyr.layers.at(level_ + 1);
    std::array<int64_t, kMaxDim> plo{0, 0, 0}, phi{1, 1, 1};
    for (int a = 0; a < dim_; ++a) {
        plo[a] = floor_div(child.lo[a], 2);
        phi[a] = ceil_div(child.hi[a], 2);
    }
    int nsigns = 1 << dim_;
    double scale = std::pow(2.0, 0.5 * level_ * dim_);
    double s = 0;
    std::array<int64_t, kMaxDim> z = plo;
    while (true) {
        double sub[8];
        for (int b = 0; b < nsigns; ++b) {
            std::array<int64_t, kMaxDim> cz;
            cz.fill(0);
            for (int a = 0; a < dim_; ++a) cz[a] = 2 * z[a] + ((b >> a) & 1);
            int64_t ci = child.index(cz, dim_);
            sub[b] = ci < 0 ? 0.0 : child.I[static_cast<size_t>(ci)];
        }
        for (int i = 1; i < nsigns; ++i) {
            double coeff = 0;
            for (int b = 0; b < nsigns; ++b) {
                double sign = 1.0;
                for (int a = 0; a < dim_; ++a)
                    if ((i >> a) & 1) sign *= ((b >> a) & 1) ? -1.0 : 1.0;
                coeff += sign * sub[b];
            }
            s += scale * scale * coeff * coeff;
        }
        int a = 0;
        while (a < dim_) {
            if (++z[a] < phi[a]) break;
            z[a] = plo[a];
            ++a;
        }
        if (a == dim_) break;
    }
    return sigma2_ * s;
}

ScalingReport scaling_check(int dim, int level, const std::vector<double>& lambdas, int n_seeds,
                            uint64_t seed) {
    ScalingReport rep;
    rep.lambdas = lambdas;
    for (double lam : lambdas) {
        int64_t side = static_cast<int64_t>(std::llround(lam));
        if (std::abs(side - lam) > 1e-12 || side < 1)
            throw std::invalid_argument("scaling_check: lambda must be a positive integer");
        DyadicFn f = DyadicFn::box_indicator(dim, side);
        double s = 0, s2 = 0;
        for (int i = 0; i < n_seeds; ++i) {
            WhiteNoise w(dim, level, 1.0, seed + static_cast<uint64_t>(i));
            double v = w.evaluate(f) * std::pow(lam, -dim);
            s += v;
            s2 += v * v;
        }
        double mean = s / n_seeds;
        double var = s2 / n_seeds - mean * mean;
        rep.sd.push_back(std::sqrt(std::max(var, 0.0)));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(lambdas.size());
    for (int i = 0; i < n; ++i) {
        double x = std::log(lambdas[static_cast<size_t>(i)]);
        double y = std::log(std::max(rep.sd[static_cast<size_t>(i)], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double det = n * sxx - sx * sx;
    rep.slope = (n * sxy - sx * sy) / det;
    return rep;
}

GradientGff::GradientGff(const Grid& torus, const SymMat& ahom, const SymMat& Q)
    : torus_(torus), ahom_(ahom), q_(Q), fft_(std::make_shared<TorusFft>(torus)) {
    if (!torus.periodic) throw std::invalid_argument("GradientGff: periodic grid required");
    q_sqrt_ = Q.sqrt_spd();
}

VectorField GradientGff::sample_noise(uint64_t seed) const {
    VectorField W(torus_, /*staggered_edges=*/true);
    int d = torus_.dim;
    int64_t n = torus_.num_cells();
    double scale = std::pow(torus_.h, -0.5 * d);
    HashKey key(seed);
    for (int64_t i = 0; i < n; ++i) {
        HashKey ck = key.with(static_cast<uint64_t>(i));
        double eta[kMaxDim];
        for (int c = 0; c < d; ++c) eta[c] = normal(ck, static_cast<uint64_t>(c));
        for (int j = 0; j < d; ++j) {
            double v = 0;
            for (int c = 0; c < d; ++c) v += q_sqrt_(j, c) * eta[c];
            W.comp[j][static_cast<size_t>(i)] = v * scale;
        }
    }
    return W;
}

VectorField GradientGff::project(const VectorField& F) const {
    int d = torus_.dim;
    int64_t n = torus_.num_cells();
    std::vector<std::vector<std::complex<double>>> fhat(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        fhat[static_cast<size_t>(j)].resize(static_cast<size_t>(n));
        fft_->forward(F.comp[j].data(), fhat[static_cast<size_t>(j)].data());
    }
    VectorField out(torus_, true);
    std::vector<std::complex<double>> comp_hat(static_cast<size_t>(n));
    std::vector<std::vector<std::complex<double>>> uhat_d(
        static_cast<size_t>(d), std::vector<std::complex<double>>(static_cast<size_t>(n)));
    for (int64_t k = 0; k < n; ++k) {
        auto th = fft_->angles(k);
        std::complex<double> dv[kMaxDim];
        double denom = 0;
        for (int a = 0; a < d; ++a) dv[a] = TorusFft::d_plus(th[a], torus_.h);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                denom += ahom_(a, b) * (std::conj(dv[a]) * dv[b]).real();
        std::complex<double> num(0, 0);
        for (int a = 0; a < d; ++a)
            num += std::conj(dv[a]) * fhat[static_cast<size_t>(a)][static_cast<size_t>(k)];
        std::complex<double> u =
            denom > 1e-14 ? num / denom : std::complex<double>(0, 0);
        for (int a = 0; a < d; ++a)
            uhat_d[static_cast<size_t>(a)][static_cast<size_t>(k)] = dv[a] * u;
    }
    for (int a = 0; a < d; ++a)
        fft_->backward(uhat_d[static_cast<size_t>(a)].data(), out.comp[a].data());
    return out;
}

double GradientGff::evaluate(const VectorField& noise, const VectorField& F) const {
    VectorField G = project(F);
    int d = torus_.dim;
    int64_t n = torus_.num_cells();
    double hd = std::pow(torus_.h, d);
    double s = 0;
    for (int j = 0; j < d; ++j)
        for (int64_t i = 0; i < n; ++i)
            s += noise.comp[j][static_cast<size_t>(i)] * G.comp[j][static_cast<size_t>(i)];
    return s * hd;
}

double GradientGff::variance_formula(const VectorField& F) const {
    VectorField G = project(F);
    int d = torus_.dim;
    int64_t n = torus_.num_cells();
    double hd = std::pow(torus_.h, d);
    double s = 0;
    for (int64_t i = 0; i < n; ++i) {
        double g[kMaxDim] = {0, 0, 0};
        for (int j = 0; j < d; ++j) g[j] = G.comp[j][static_cast<size_t>(i)];
        for (int j = 0; j < d; ++j)
            for (int c = 0; c < d; ++c) s += g[j] * q_(j, c) * g[c];
    }
    return s * hd;
}

VectorField GradientGff::divergence_potential(const ScalarField& f) const {
    int d = torus_.dim;
    int64_t n = torus_.num_cells();
    double h = torus_.h;
    double scale = 0;
    for (double v : f.data) scale = std::max(scale, std::abs(v));
    double mean = f.mean();
    if (std::abs(mean) > 1e-10 * std::max(scale, 1e-30))
        throw std::invalid_argument("divergence_potential: test function must have zero mean");
    // discrete reference bumps per axis, sum(hb)*h = 1
    std::array<std::vector<double>, kMaxDim> hb;
    for (int a = 0; a < d; ++a) {
        int64_t N = torus_.cells[a];
        hb[a].resize(static_cast<size_t>(N));
        double x0 = 0.25 * N * h, width = std::max(0.125 * N * h, 2 * h);
        double sum = 0;
        for (int64_t t = 0; t < N; ++t) {
            Vec arg(1);
            arg[0] = (t * h - x0) / width;
            double v = standard_mollifier(1, arg);
            hb[a][static_cast<size_t>(t)] = v;
            sum += v * h;
        }
        for (double& v : hb[a]) v /= sum;
    }
    // g_i(z) = hb(z_1)..hb(z_i) * h^i * partial sums of f over first i axes
    std::vector<std::vector<double>> g(static_cast<size_t>(d + 1),
                                       std::vector<double>(static_cast<size_t>(n)));
    for (int64_t i = 0; i < n; ++i) g[0][static_cast<size_t>(i)] = f.data[static_cast<size_t>(i)];
    for (int i = 1; i <= d; ++i) {
        // S_i(z_{i+1..}) = h^i sum_{y_1..y_i} f; build by summing g's raw sums
        // directly from f for clarity (grids are modest).
        std::vector<double>& gi = g[static_cast<size_t>(i)];
        // sums of f over the first i axes for each transverse index
        for (int64_t idx = 0; idx < n; ++idx) {
            auto z = torus_.cell_coords(idx);
            bool rep_cell = true;
            for (int a = 0; a < i; ++a)
                if (z[a] != 0) rep_cell = false;
            if (!rep_cell) continue;
            double s = 0;
            // sum f over the first i coordinates with the rest fixed
            std::array<int64_t, kMaxDim> y = z;
            for (int a = 0; a < i; ++a) y[a] = 0;
            while (true) {
                s += f.data[static_cast<size_t>(torus_.cell_index(y))];
                int a = 0;
                while (a < i) {
                    if (++y[a] < torus_.cells[a]) break;
                    y[a] = 0;
                    ++a;
                }
                if (a == i) break;
            }
            s *= std::pow(h, i);
            // distribute to all z_1..z_i with the bump weights
            std::array<int64_t, kMaxDim> w = z;
            for (int a = 0; a < i; ++a) w[a] = 0;
            while (true) {
                double bumps = 1.0;
                for (int a = 0; a < i; ++a)
                    bumps *= hb[a][static_cast<size_t>(w[a])];
                gi[static_cast<size_t>(torus_.cell_index(w))] = bumps * s;
                int a = 0;
                while (a < i) {
                    if (++w[a] < torus_.cells[a]) break;
                    w[a] = 0;
                    ++a;
                }
                if (a == i) break;
            }
        }
    }
    VectorField F(torus_, true);
    for (int i = 1; i <= d; ++i) {
        const std::vector<double>& gm = g[static_cast<size_t>(i - 1)];
        const std::vector<double>& gi = g[static_cast<size_t>(i)];
        // cumulative sums along axis i-1
        for (int64_t idx = 0; idx < n; ++idx) {
            auto z = torus_.cell_coords(idx);
            if (z[i - 1] != 0) continue;
            double acc = 0;
            for (int64_t y = 0; y < torus_.cells[i - 1]; ++y) {
                auto zy = z;
                zy[i - 1] = y;
                int64_t yi = torus_.cell_index(zy);
                acc += (gm[static_cast<size_t>(yi)] - gi[static_cast<size_t>(yi)]) * h;
                F.comp[i - 1][static_cast<size_t>(yi)] = acc;
            }
        }
    }
    return F;
}

double GradientGff::potential_from_gradient(const VectorField& noise,
                                            const ScalarField& f) const {
    VectorField F = divergence_potential(f);
    return -evaluate(noise, F);
}

}  // namespace homolab
