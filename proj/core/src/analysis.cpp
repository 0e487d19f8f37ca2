#include "homolab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "homolab/rng.hpp"

namespace homolab {

namespace {

double mean_exp_functional(std::span<const double> samples, double s, double theta) {
    double m = 0;
    for (double x : samples) {
        double xp = std::max(x, 0.0);
        m += std::exp(std::pow(xp / theta, s));
    }
    return m / static_cast<double>(samples.size());
}

}  // namespace

TailCertificate os_certify(std::span<const double> samples, double s, double theta) {
    if (samples.size() < 32)
        throw std::invalid_argument("os_certify: need at least 32 samples");
    TailCertificate cert;
    cert.s = s;
    cert.theta = theta;
    double n = static_cast<double>(samples.size());
    cert.empirical_mean = mean_exp_functional(samples, s, theta);
    double var = 0;
    for (double x : samples) {
        double v = std::exp(std::pow(std::max(x, 0.0) / theta, s)) - cert.empirical_mean;
        var += v * v;
    }
    var /= (n - 1);
    cert.upper_confidence = cert.empirical_mean + 1.645 * std::sqrt(var / n);
    cert.pass = cert.upper_confidence <= 2.0;

    // minimal theta with raw empirical mean <= 2, by bisection
    double xmax = 0;
    for (double x : samples) xmax = std::max(xmax, x);
    if (xmax <= 0) {
        cert.theta_star = 0.0;  // X <= 0: passes for every theta
    } else {
        double lo = 1e-6 * xmax, hi = xmax * std::pow(std::log(2.0), -1.0 / s) * 4.0;
        while (mean_exp_functional(samples, s, hi) > 2.0) hi *= 2.0;
        for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mean_exp_functional(samples, s, mid) <= 2.0)
                hi = mid;
            else
                lo = mid;
        }
        cert.theta_star = hi;
    }
    return cert;
}

MultiscaleReport multiscale_poincare_rhs(const ScalarField& f, int level) {
    const Grid& g = f.grid;
    if (f.centering != Centering::Cell)
        throw std::invalid_argument("multiscale_poincare_rhs: cell data required");
    MultiscaleReport rep;
    double side = 1;
    for (int i = 0; i < level; ++i) side *= 3;
    TriadicCube root = TriadicCube::centered(g.dim, level);
    rep.l2_term = f.l2_mean();
    rep.rhs.value = rep.l2_term;
    rep.rhs.per_scale.push_back(rep.l2_term);
    // sum over scales n < m: 3^n ( |Z_n|^{-1} sum_z (f)_{z+cube_n}^2 )^{1/2}
    for (int n = 0; n < level; ++n) {
        auto subs = subdivide(root, n);
        double s2 = 0;
        for (const auto& c : subs) {
            double avg = cube_average(f, c);
            s2 += avg * avg;
        }
        s2 /= static_cast<double>(subs.size());
        double term = std::pow(3.0, n) * std::sqrt(s2);
        rep.rhs.per_scale.push_back(term);
        rep.rhs.value += term;
    }
    rep.naive_poincare = side * rep.l2_term;

    // direct dual norm: sqrt( (3^m (f)_m)^2 + fint (f - (f)) w ), where w
    // solves the Neumann problem -Lap w = f - (f).
    double fbar = f.mean();
    BoxOperator lap(g, std::vector<SymMat>(static_cast<size_t>(g.num_cells()),
                                           SymMat::identity(g.dim)),
                    Bc::Neumann);
    // rhs_i = int (f - fbar) phi_i: with cell data, int over cell of phi_i
    // equals h^d / 2^d for each of the cell's corners.
    int64_t nn = g.num_nodes();
    std::vector<double> rhs(static_cast<size_t>(nn), 0.0);
    double w_corner = std::pow(g.h, g.dim) / std::pow(2.0, g.dim);
    int64_t ncells = g.num_cells();
    int corners = 1 << g.dim;
    for (int64_t c = 0; c < ncells; ++c) {
        auto cc = g.cell_coords(c);
        double v = (f.data[static_cast<size_t>(c)] - fbar) * w_corner;
        for (int b = 0; b < corners; ++b) {
            auto nc = cc;
            for (int a = 0; a < g.dim; ++a)
                if ((b >> a) & 1) nc[a] += 1;
            rhs[static_cast<size_t>(g.node_index(nc))] += v;
        }
    }
    auto project = [nn](double* v) {
        double m = 0;
        for (int64_t i = 0; i < nn; ++i) m += v[i];
        m /= static_cast<double>(nn);
        for (int64_t i = 0; i < nn; ++i) v[i] -= m;
    };
    // balance the rhs exactly (quadrature of the constant differs at edges)
    project(rhs.data());
    std::vector<double> w(static_cast<size_t>(nn), 0.0);
    BoxFdInverse prec(g, BoxFdInverse::Kind::NeumannNodes, std::pow(g.h, g.dim));
    auto apply_full = [&](const double* u, double* out) { lap.apply(u, out); };
    auto precond = [&](const double* in, double* out) { prec.apply_inverse(in, out); };
    pcg(nn, apply_full, precond, rhs.data(), w.data(), 1e-11,
        static_cast<int>(50 * g.cells[0] + 200), project);
    double vol = g.box_volume();
    double pairing = 0;
    for (int64_t i = 0; i < nn; ++i)
        pairing += rhs[static_cast<size_t>(i)] * w[static_cast<size_t>(i)];
    pairing /= vol;
    rep.direct_norm = std::sqrt(std::max(side * fbar * side * fbar + pairing, 0.0));
    rep.inequality_holds = rep.direct_norm <= kMultiscaleCalibration * rep.rhs.value;
    return rep;
}

NormEstimate heatflow_negnorm(const ScalarField& u, double alpha, int nodes) {
    const Grid& g = u.grid;
    if (!g.periodic) throw std::invalid_argument("heatflow_negnorm: torus data required");
    if (alpha <= 0) throw std::invalid_argument("heatflow_negnorm: alpha must be positive");
    TorusFft fft(g);
    int64_t n = g.num_cells();
    std::vector<std::complex<double>> hat(static_cast<size_t>(n));
    fft.forward(u.data.data(), hat.data());
    std::vector<double> k2(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        auto kap = fft.continuum_freq(i);
        double v = 0;
        for (int a = 0; a < g.dim; ++a) v += kap[a] * kap[a];
        k2[static_cast<size_t>(i)] = v;
    }
    // log-spaced trapezoid in s = log t over [t_min, 1]
    NormEstimate est;
    double t_min = 1e-8;
    double s_lo = std::log(t_min), s_hi = 0.0;
    double ds = (s_hi - s_lo) / (nodes - 1);
    double total = 0;
    double invn2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    for (int i = 0; i < nodes; ++i) {
        double s = s_lo + i * ds;
        double t = std::exp(s);
        // ||u * Phi(t)||^2_{L2 normalized} = (1/N^2) sum |hat|^2 e^{-2 t |k|^2}
        double norm2 = 0;
        for (int64_t j = 0; j < n; ++j)
            norm2 += std::norm(hat[static_cast<size_t>(j)]) *
                     std::exp(-2.0 * t * k2[static_cast<size_t>(j)]);
        norm2 *= invn2;
        double integrand = std::pow(t, alpha) * norm2;  // dt/t absorbed by ds
        double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
        est.per_scale.push_back(integrand);
        total += w * integrand * ds;
    }
    // small-t tail below t_min: integrand ~ t^alpha ||u||^2
    double u2 = 0;
    for (int64_t j = 0; j < n; ++j) u2 += std::norm(hat[static_cast<size_t>(j)]);
    u2 *= invn2;
    total += u2 * std::pow(t_min, alpha) / alpha;
    est.value = std::sqrt(std::max(total, 0.0));
    return est;
}

GaussianityReport gaussianity_test(std::span<const double> samples) {
    if (samples.size() < 256)
        throw std::invalid_argument("gaussianity_test: need at least 256 samples");
    GaussianityReport rep;
    rep.n = static_cast<int>(samples.size());
    double n = static_cast<double>(rep.n);
    for (double x : samples) rep.mean += x;
    rep.mean /= n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : samples) {
        double d = x - rep.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    rep.sd = std::sqrt(m2);
    rep.skewness = m3 / std::pow(m2, 1.5);
    rep.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    rep.skew_band = 4.0 * std::sqrt(6.0 / n);
    rep.kurt_band = 4.0 * std::sqrt(24.0 / n);
    // Kolmogorov-Smirnov distance to N(mean, sd), reported for context
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    double ks = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double z = (xs[i] - rep.mean) / (rep.sd > 0 ? rep.sd : 1.0);
        double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
        double e_lo = static_cast<double>(i) / n;
        double e_hi = static_cast<double>(i + 1) / n;
        ks = std::max(ks, std::max(std::abs(cdf - e_lo), std::abs(cdf - e_hi)));
    }
    rep.ks_statistic = ks;
    rep.pass = std::abs(rep.skewness) <= rep.skew_band &&
               std::abs(rep.excess_kurtosis) <= rep.kurt_band;
    return rep;
}

SlopeFit slope_fit(std::span<const double> x, std::span<const double> y, int bootstrap,
                   uint64_t seed) {
    size_t n = x.size();
    if (n < 3 || y.size() != n) throw std::invalid_argument("slope_fit: need >= 3 points");
    for (double v : y)
        if (v <= 0) throw std::invalid_argument("slope_fit: y values must be positive");
    std::vector<double> lx(n), ly(n);
    for (size_t i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    auto fit = [&](const std::vector<size_t>& idx, double& slope, double& icpt) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double m = static_cast<double>(idx.size());
        for (size_t i : idx) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        double det = m * sxx - sx * sx;
        if (std::abs(det) < 1e-30) {
            slope = 0;
            icpt = sy / m;
            return;
        }
        slope = (m * sxy - sx * sy) / det;
        icpt = (sy - slope * sx) / m;
    };
    std::vector<size_t> all(n);
    for (size_t i = 0; i < n; ++i) all[i] = i;
    SlopeFit out;
    fit(all, out.slope, out.intercept);
    if (bootstrap > 1) {
        HashKey key(seed);
        std::vector<double> slopes;
        for (int b = 0; b < bootstrap; ++b) {
            std::vector<size_t> idx(n);
            bool spread = false;
            for (size_t i = 0; i < n; ++i) {
                idx[i] = static_cast<size_t>(u01(key, static_cast<uint64_t>(b) * n + i) * n);
                if (idx[i] != idx[0]) spread = true;
            }
            if (!spread) continue;
            double s, c;
            fit(idx, s, c);
            slopes.push_back(s);
        }
        std::sort(slopes.begin(), slopes.end());
        if (!slopes.empty()) {
            out.band_lo = slopes[static_cast<size_t>(0.05 * (slopes.size() - 1))];
            out.band_hi = slopes[static_cast<size_t>(0.95 * (slopes.size() - 1))];
        }
    }
    return out;
}

}  // namespace homolab
