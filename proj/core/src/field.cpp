#include "homolab/field.hpp"

#include <cmath>

namespace homolab {

namespace {

constexpr uint64_t kTagCheckerboard = 0x636865636bULL;
constexpr uint64_t kTagPoissonCount = 0x706f697373ULL;
constexpr uint64_t kTagPoissonPoint = 0x70707473ULL;
constexpr uint64_t kTagNoise = 0x6e6f697365ULL;

void require_elliptic(const SymMat& m, double lambda, const std::string& field) {
    if (m.max_abs_asymmetry() > 1e-12)
        throw std::invalid_argument("FieldSpec." + field + ": matrix not symmetric");
    if (!eigen_bounds_hold(m, 1.0, lambda, 1e-12))
        throw std::invalid_argument("FieldSpec." + field +
                                    ": eigenvalues outside [1, lambda]");
}

void require_probs(const std::vector<double>& probs, const std::string& field) {
    double s = 0;
    for (double p : probs) {
        if (p < 0) throw std::invalid_argument("FieldSpec." + field + ": negative probability");
        s += p;
    }
    if (std::abs(s - 1.0) > 1e-9)
        throw std::invalid_argument("FieldSpec." + field + ": probabilities do not sum to 1");
}

int64_t law_cell(double x) { return static_cast<int64_t>(std::floor(x + 0.5)); }

}  // namespace

void FieldSpec::validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("FieldSpec.dim: must be 1, 2 or 3");
    if (lambda < 1.0) throw std::invalid_argument("FieldSpec.lambda: must be >= 1");
    switch (kind) {
        case LawKind::Constant:
            require_elliptic(constant.value, lambda, "constant.value");
            break;
        case LawKind::Checkerboard: {
            if (checkerboard.values.empty())
                throw std::invalid_argument("FieldSpec.checkerboard.values: empty");
            if (checkerboard.values.size() != checkerboard.probs.size())
                throw std::invalid_argument("FieldSpec.checkerboard.probs: size mismatch");
            for (const auto& v : checkerboard.values)
                require_elliptic(v, lambda, "checkerboard.values");
            require_probs(checkerboard.probs, "checkerboard.probs");
            break;
        }
        case LawKind::PoissonInclusions: {
            if (poisson.intensity <= 0)
                throw std::invalid_argument("FieldSpec.poisson.intensity: must be > 0");
            if (poisson.radius_min < 0 || poisson.radius_max > 0.5 ||
                poisson.radius_min > poisson.radius_max)
                throw std::invalid_argument("FieldSpec.poisson.radius: must satisfy 0 <= min <= max <= 1/2");
            require_elliptic(poisson.inside, lambda, "poisson.inside");
            require_elliptic(poisson.outside, lambda, "poisson.outside");
            break;
        }
        case LawKind::MollifiedWhiteNoise: {
            if (mollified.kernel_radius <= 0 || mollified.kernel_radius > 0.5)
                throw std::invalid_argument(
                    "FieldSpec.mollified.kernel_radius: must be in (0, 1/2]");
            if (mollified.noise_res < 1)
                throw std::invalid_argument("FieldSpec.mollified.noise_res: must be >= 1");
            if (mollified.map_scale <= 0)
                throw std::invalid_argument("FieldSpec.mollified.map_scale: must be > 0");
            break;
        }
        case LawKind::Layered1D: {
            if (dim != 1) throw std::invalid_argument("FieldSpec.layered: requires dim = 1");
            if (layered.values.empty())
                throw std::invalid_argument("FieldSpec.layered.values: empty");
            if (layered.values.size() != layered.probs.size())
                throw std::invalid_argument("FieldSpec.layered.probs: size mismatch");
            for (double v : layered.values)
                if (v < 1.0 || v > lambda)
                    throw std::invalid_argument("FieldSpec.layered.values: outside [1, lambda]");
            require_probs(layered.probs, "layered.probs");
            break;
        }
    }
}

std::string FieldSpec::law_name() const {
    switch (kind) {
        case LawKind::Constant: return "constant";
        case LawKind::Checkerboard: return "checkerboard";
        case LawKind::PoissonInclusions: return "poisson";
        case LawKind::MollifiedWhiteNoise: return "mollified";
        case LawKind::Layered1D: return "layered";
    }
    return "?";
}

CoefficientSample::CoefficientSample(const FieldSpec& spec, uint64_t seed)
    : spec_(spec), seed_(seed), key_(seed) {
    spec_.validate();
}

CoefficientSample sample_field(const FieldSpec& spec, uint64_t seed) {
    return CoefficientSample(spec, seed);
}

SymMat CoefficientSample::eval(const Vec& x) const {
    switch (spec_.kind) {
        case LawKind::Constant:
            return spec_.constant.value;
        case LawKind::Checkerboard:
            return eval_checkerboard(x);
        case LawKind::PoissonInclusions:
            return eval_poisson(x);
        case LawKind::MollifiedWhiteNoise:
            return eval_mollified(x);
        case LawKind::Layered1D: {
            int64_t z = law_cell(x[0]);
            HashKey k = key_.with(kTagCheckerboard).with_signed(z);
            int idx = categorical(k, 0, spec_.layered.probs.data(),
                                  static_cast<int>(spec_.layered.probs.size()));
            return SymMat::identity(1, spec_.layered.values[static_cast<size_t>(idx)]);
        }
    }
    return SymMat::identity(spec_.dim);
}

SymMat CoefficientSample::eval_checkerboard(const Vec& x) const {
    HashKey k = key_.with(kTagCheckerboard);
    for (int a = 0; a < spec_.dim; ++a) k = k.with_signed(law_cell(x[a]));
    int idx = categorical(k, 0, spec_.checkerboard.probs.data(),
                          static_cast<int>(spec_.checkerboard.probs.size()));
    return spec_.checkerboard.values[static_cast<size_t>(idx)];
}

SymMat CoefficientSample::eval_poisson(const Vec& x) const {
    // Points live in the unit cell of their center; radii <= 1/2 make the
    // 3^d neighborhood scan exhaustive.
    const auto& law = spec_.poisson;
    std::array<int64_t, kMaxDim> z0{0, 0, 0};
    for (int a = 0; a < spec_.dim; ++a) z0[a] = law_cell(x[a]);
    std::array<int64_t, kMaxDim> off{0, 0, 0};
    for (int a = 0; a < spec_.dim; ++a) off[a] = -1;
    while (true) {
        HashKey kc = key_.with(kTagPoissonCount);
        for (int a = 0; a < spec_.dim; ++a) kc = kc.with_signed(z0[a] + off[a]);
        int count = poisson(kc, 0, law.intensity);
        HashKey kp = key_.with(kTagPoissonPoint);
        for (int a = 0; a < spec_.dim; ++a) kp = kp.with_signed(z0[a] + off[a]);
        for (int p = 0; p < count; ++p) {
            double d2 = 0;
            for (int a = 0; a < spec_.dim; ++a) {
                double pa = (z0[a] + off[a]) - 0.5 +
                            u01(kp, static_cast<uint64_t>(p * (spec_.dim + 1) + a));
                double dx = x[a] - pa;
                d2 += dx * dx;
            }
            double radius = law.radius_min +
                            (law.radius_max - law.radius_min) *
                                u01(kp, static_cast<uint64_t>(p * (spec_.dim + 1) + spec_.dim));
            if (d2 <= radius * radius) return law.inside;
        }
        int a = 0;
        while (a < spec_.dim) {
            if (++off[a] <= 1) break;
            off[a] = -1;
            ++a;
        }
        if (a == spec_.dim) break;
    }
    return law.outside;
}

SymMat CoefficientSample::eval_mollified(const Vec& x) const {
    // Smoothed noise s(x) = sum_c eta_c * zeta_rho(x - x_c) * hf^{d/2},
    // then an affine clamp of a sigmoid maps s into [1, lambda] * I.
    const auto& law = spec_.mollified;
    double hf = 1.0 / law.noise_res;
    double rho = law.kernel_radius;
    int reach = static_cast<int>(std::ceil(rho / hf));
    std::array<int64_t, kMaxDim> c0{0, 0, 0};
    for (int a = 0; a < spec_.dim; ++a)
        c0[a] = static_cast<int64_t>(std::floor(x[a] / hf));
    double s = 0;
    std::array<int64_t, kMaxDim> off{0, 0, 0};
    for (int a = 0; a < spec_.dim; ++a) off[a] = -reach;
    double hf_half_pow = std::pow(hf, 0.5 * spec_.dim);
    while (true) {
        Vec dx(spec_.dim);
        double d2 = 0;
        HashKey kc = key_.with(kTagNoise);
        for (int a = 0; a < spec_.dim; ++a) {
            int64_t c = c0[a] + off[a];
            kc = kc.with_signed(c);
            double xc = (c + 0.5) * hf;
            dx[a] = (x[a] - xc) / rho;
            d2 += dx[a] * dx[a];
        }
        if (d2 < 1.0) {
            double eta = normal(kc, 0);
            double zeta = standard_mollifier(spec_.dim, dx) / std::pow(rho, spec_.dim);
            s += eta * zeta * hf_half_pow;
        }
        int a = 0;
        while (a < spec_.dim) {
            if (++off[a] <= reach) break;
            off[a] = -reach;
            ++a;
        }
        if (a == spec_.dim) break;
    }
    double sig = 1.0 / (1.0 + std::exp(-s / law.map_scale));
    double val = 1.0 + (spec_.lambda - 1.0) * sig;
    return SymMat::identity(spec_.dim, val);
}

std::vector<SymMat> restrict_to_grid(const CoefficientSample& field, const Grid& grid) {
    if (grid.dim != field.dim())
        throw std::invalid_argument("restrict_to_grid: dimension mismatch");
    int64_t n = grid.num_cells();
    std::vector<SymMat> out(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i)
        out[static_cast<size_t>(i)] = field.eval(grid.cell_center(grid.cell_coords(i)));
    return out;
}

std::vector<SymMat> restrict_to_torus(const CoefficientSample& field, const Grid& torus) {
    return restrict_to_grid(field, torus);
}

std::vector<DependenceRow> dependence_diagnostic(const FieldSpec& spec, uint64_t seed,
                                                 int n_samples,
                                                 const std::vector<double>& distances) {
    if (n_samples < 2) throw std::invalid_argument("dependence_diagnostic: n_samples >= 2");
    spec.validate();
    std::vector<DependenceRow> rows;
    Vec x0(spec.dim);
    x0[0] = 0.25;  // interior of the cell at the origin
    for (double r : distances) {
        Vec x1 = x0;
        x1[0] += r;
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int s = 0; s < n_samples; ++s) {
            CoefficientSample f(spec, seed + static_cast<uint64_t>(s));
            double a = f.eval11(x0);
            double b = f.eval11(x1);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
        }
        double n = n_samples;
        double vx = sxx / n - (sx / n) * (sx / n);
        double vy = syy / n - (sy / n) * (sy / n);
        double cov = sxy / n - (sx / n) * (sy / n);
        DependenceRow row;
        row.distance = r;
        if (vx < 1e-14 || vy < 1e-14) {
            row.degenerate = true;
            row.correlation = 0.0;
        } else {
            row.correlation = cov / std::sqrt(vx * vy);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace homolab
