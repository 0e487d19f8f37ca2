#include "homolab/homogenize.hpp"

#include <cmath>
#include <cstdio>

#include "homolab/parallel.hpp"

namespace homolab {

namespace {

SymMat mean_of(const std::vector<SymMat>& xs) {
    SymMat m(xs.front().dim);
    for (const auto& x : xs) m = m + x;
    return m * (1.0 / static_cast<double>(xs.size()));
}

SymMat stderr_of(const std::vector<SymMat>& xs, const SymMat& mean) {
    int d = mean.dim;
    SymMat se(d);
    double n = static_cast<double>(xs.size());
    if (xs.size() < 2) return se;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s2 = 0;
            for (const auto& x : xs) {
                double dv = x(i, j) - mean(i, j);
                s2 += dv * dv;
            }
            se(i, j) = std::sqrt(s2 / (n - 1) / n);
        }
    return se;
}

}  // namespace

HomogenizedEstimate estimate_ahom(const FieldSpec& spec, int level, int samples, uint64_t seed,
                                  const EstimateOptions& opts) {
    if (samples < 2) throw std::invalid_argument("estimate_ahom: need at least 2 samples");
    spec.validate();
    TriadicCube cube = TriadicCube::centered(spec.dim, level);
    std::vector<SymMat> a_list(static_cast<size_t>(samples), SymMat(spec.dim));
    std::vector<SymMat> binv_list(static_cast<size_t>(samples), SymMat(spec.dim));
    std::vector<char> ok(static_cast<size_t>(samples), 0);
    parallel_for(samples, [&](int64_t s) {
        try {
            CoefficientSample field(spec, seed + static_cast<uint64_t>(s));
            QuadraticFormPair pair = recover_quadratic_forms(field, cube, opts.energy);
            a_list[static_cast<size_t>(s)] = pair.a_U;
            binv_list[static_cast<size_t>(s)] = pair.b_U;
            ok[static_cast<size_t>(s)] = 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "estimate_ahom: sample %lld (seed %llu) failed: %s\n",
                         static_cast<long long>(s),
                         static_cast<unsigned long long>(seed + static_cast<uint64_t>(s)),
                         e.what());
            ok[static_cast<size_t>(s)] = 0;
        }
    });
    std::vector<SymMat> a_good, b_good;
    for (int s = 0; s < samples; ++s)
        if (ok[static_cast<size_t>(s)]) {
            a_good.push_back(a_list[static_cast<size_t>(s)]);
            b_good.push_back(binv_list[static_cast<size_t>(s)]);
        }
    if (static_cast<int>(a_good.size()) < (samples + 1) / 2)
        throw std::runtime_error("estimate_ahom: more than half of the samples failed");

    HomogenizedEstimate est;
    est.level = level;
    est.samples = static_cast<int>(a_good.size());
    est.failed_samples = samples - est.samples;
    est.ahom = mean_of(a_good);
    est.stderr_ahom = stderr_of(a_good, est.ahom);
    SymMat b_mean = mean_of(b_good);
    est.bhom_inv = b_mean.inverse();
    est.route_gap = (est.ahom - est.bhom_inv).frobenius();

    VoigtReissReport vr = voigt_reiss(spec, opts.bracket_samples, seed ^ 0x5bd1e995ULL);
    est.harmonic_mean = vr.harmonic;
    est.arithmetic_mean = vr.arithmetic;
    est.stderr_harmonic = vr.stderr_harmonic;
    est.stderr_arithmetic = vr.stderr_arithmetic;
    return est;
}

VoigtReissReport voigt_reiss(const FieldSpec& spec, int samples, uint64_t seed,
                             int quad_per_cell) {
    spec.validate();
    int d = spec.dim;
    std::vector<SymMat> har(static_cast<size_t>(samples), SymMat(d));
    std::vector<SymMat> ari(static_cast<size_t>(samples), SymMat(d));
    parallel_for(samples, [&](int64_t s) {
        CoefficientSample field(spec, seed + static_cast<uint64_t>(s));
        // quadrature over the unit cell at the origin
        SymMat sum_a(d), sum_ainv(d);
        int64_t npts = 1;
        for (int a = 0; a < d; ++a) npts *= quad_per_cell;
        for (int64_t i = 0; i < npts; ++i) {
            int64_t rem = i;
            Vec x(d);
            for (int a = 0; a < d; ++a) {
                int idx = static_cast<int>(rem % quad_per_cell);
                rem /= quad_per_cell;
                x[a] = -0.5 + (idx + 0.5) / quad_per_cell;
            }
            SymMat a = field.eval(x);
            sum_a = sum_a + a;
            sum_ainv = sum_ainv + a.inverse();
        }
        ari[static_cast<size_t>(s)] = sum_a * (1.0 / static_cast<double>(npts));
        har[static_cast<size_t>(s)] = sum_ainv * (1.0 / static_cast<double>(npts));
    });
    VoigtReissReport rep;
    SymMat ainv_mean = mean_of(har);
    rep.harmonic = ainv_mean.inverse();
    rep.arithmetic = mean_of(ari);
    rep.stderr_arithmetic = stderr_of(ari, rep.arithmetic);
    // delta method for the harmonic mean: dH = H dM H with M the mean inverse
    SymMat se_inv = stderr_of(har, ainv_mean);
    SymMat se(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0;
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double t = rep.harmonic(i, k) * se_inv(k, l) * rep.harmonic(l, j);
                    s += t * t;
                }
            se(i, j) = std::sqrt(s);
        }
    rep.stderr_harmonic = se;
    return rep;
}

DynkinReport dynkin_check(double alpha, double beta, double lambda, int level, int samples,
                          uint64_t seed, const EstimateOptions& opts) {
    FieldSpec spec;
    spec.dim = 2;
    spec.lambda = lambda;
    spec.kind = LawKind::Checkerboard;
    spec.checkerboard.values = {SymMat::identity(2, alpha), SymMat::identity(2, beta)};
    spec.checkerboard.probs = {0.5, 0.5};
    HomogenizedEstimate est = estimate_ahom(spec, level, samples, seed, opts);
    DynkinReport rep;
    rep.ahom = est.ahom;
    rep.stderr_ahom = est.stderr_ahom;
    rep.target = std::sqrt(alpha * beta);
    rep.deviation = std::max(std::abs(est.ahom(0, 0) - rep.target),
                             std::abs(est.ahom(1, 1) - rep.target));
    rep.offdiag_max = std::abs(est.ahom(0, 1));
    rep.offdiag_stderr = est.stderr_ahom(0, 1);
    return rep;
}

RateFit rate_fit(const FieldSpec& spec, int level_lo, int level_hi, int samples, const Vec& p,
                 uint64_t seed, const EnergyOptions& opts) {
    if (level_hi < level_lo + 2)
        throw std::invalid_argument("rate_fit: need level_hi >= level_lo + 2");
    spec.validate();
    RateFit fit;
    // one extra level as the nu_bar proxy
    for (int n = level_lo; n <= level_hi + 1; ++n) fit.levels.push_back(n);
    size_t nl = fit.levels.size();
    fit.means.assign(nl, 0.0);
    fit.variances.assign(nl, 0.0);
    std::vector<std::vector<double>> vals(nl, std::vector<double>(static_cast<size_t>(samples)));
    for (size_t li = 0; li < nl; ++li) {
        TriadicCube cube = TriadicCube::centered(spec.dim, fit.levels[li]);
        parallel_for(samples, [&](int64_t s) {
            CoefficientSample field(spec, seed + static_cast<uint64_t>(s) +
                                              997ULL * static_cast<uint64_t>(li));
            vals[li][static_cast<size_t>(s)] = nu(field, cube, p, opts);
        });
        double m = 0;
        for (double v : vals[li]) m += v;
        m /= samples;
        double v2 = 0;
        for (double v : vals[li]) v2 += (v - m) * (v - m);
        fit.means[li] = m;
        fit.variances[li] = samples > 1 ? v2 / (samples - 1) : 0.0;
    }
    fit.nu_bar_proxy = fit.means.back();
    // gap fit over levels level_lo .. level_hi
    std::vector<double> lx, ly;
    for (size_t li = 0; li + 1 < nl; ++li) {
        double gap = fit.means[li] - fit.nu_bar_proxy;
        if (gap <= 1e-13) continue;
        lx.push_back(fit.levels[li] * std::log(3.0));
        ly.push_back(std::log(gap));
    }
    if (lx.size() < 2) {
        fit.degenerate = true;
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = static_cast<int>(lx.size());
        for (int i = 0; i < n; ++i) {
            sx += lx[static_cast<size_t>(i)];
            sy += ly[static_cast<size_t>(i)];
            sxx += lx[static_cast<size_t>(i)] * lx[static_cast<size_t>(i)];
            sxy += lx[static_cast<size_t>(i)] * ly[static_cast<size_t>(i)];
        }
        double det = n * sxx - sx * sx;
        double slope = (n * sxy - sx * sy) / det;
        double icpt = (sy - slope * sx) / n;
        fit.alpha = -slope;
        fit.alpha_constant = std::exp(icpt);
        double ss_res = 0, ss_tot = 0, ym = sy / n;
        for (int i = 0; i < n; ++i) {
            double pred = icpt + slope * lx[static_cast<size_t>(i)];
            ss_res += (ly[static_cast<size_t>(i)] - pred) * (ly[static_cast<size_t>(i)] - pred);
            ss_tot += (ly[static_cast<size_t>(i)] - ym) * (ly[static_cast<size_t>(i)] - ym);
        }
        fit.gap_fit_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    // variance slope in log3 across levels with positive variance
    {
        std::vector<double> lx2, ly2;
        for (size_t li = 0; li + 1 < nl; ++li) {
            if (fit.variances[li] <= 1e-26) continue;
            lx2.push_back(fit.levels[li]);
            ly2.push_back(std::log(fit.variances[li]) / std::log(3.0));
        }
        if (lx2.size() >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int n = static_cast<int>(lx2.size());
            for (int i = 0; i < n; ++i) {
                sx += lx2[static_cast<size_t>(i)];
                sy += ly2[static_cast<size_t>(i)];
                sxx += lx2[static_cast<size_t>(i)] * lx2[static_cast<size_t>(i)];
                sxy += lx2[static_cast<size_t>(i)] * ly2[static_cast<size_t>(i)];
            }
            double det = n * sxx - sx * sx;
            fit.variance_slope = (n * sxy - sx * sy) / det;
        } else {
            fit.degenerate = true;
        }
    }
    return fit;
}

}  // namespace homolab
