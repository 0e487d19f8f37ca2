#include "homolab/grid.hpp"

#include <cmath>

#include "homolab/fft.hpp"

namespace homolab {

static double pow3(int m) {
    double r = 1;
    for (int i = 0; i < m; ++i) r *= 3.0;
    return r;
}

double TriadicCube::side() const { return pow3(level); }

double TriadicCube::volume() const {
    double v = 1;
    for (int i = 0; i < dim; ++i) v *= side();
    return v;
}

std::vector<TriadicCube> subdivide(const TriadicCube& cube, int n) {
    if (n > cube.level) throw std::invalid_argument("subdivide: child level exceeds parent");
    int64_t step = 1;
    for (int i = 0; i < n; ++i) step *= 3;
    int64_t half = 0;  // offsets of child centers from parent center, in units of step
    int64_t m_side = 1;
    for (int i = 0; i < cube.level - n; ++i) m_side *= 3;
    half = (m_side - 1) / 2;
    std::vector<TriadicCube> out;
    std::array<int64_t, kMaxDim> idx{0, 0, 0};
    while (true) {
        TriadicCube c;
        c.dim = cube.dim;
        c.level = n;
        for (int a = 0; a < cube.dim; ++a)
            c.center[a] = cube.center[a] + (idx[a] - half) * step;
        out.push_back(c);
        int a = 0;
        while (a < cube.dim) {
            if (++idx[a] < m_side) break;
            idx[a] = 0;
            ++a;
        }
        if (a == cube.dim) break;
    }
    return out;
}

Grid Grid::box(int dim, const std::array<double, kMaxDim>& origin,
               const std::array<int64_t, kMaxDim>& cells, double h, bool periodic) {
    Grid g;
    g.dim = dim;
    g.origin = origin;
    g.cells = cells;
    g.h = h;
    g.periodic = periodic;
    return g;
}

Grid Grid::cube_box(const TriadicCube& cube, int cells_per_unit, bool periodic) {
    Grid g;
    g.dim = cube.dim;
    g.h = 1.0 / cells_per_unit;
    for (int a = 0; a < cube.dim; ++a) {
        g.origin[a] = cube.lo(a);
        g.cells[a] = static_cast<int64_t>(std::llround(cube.side() * cells_per_unit));
    }
    g.periodic = periodic;
    return g;
}

Grid Grid::torus(int dim, int64_t L, int cells_per_unit) {
    Grid g;
    g.dim = dim;
    g.h = 1.0 / cells_per_unit;
    for (int a = 0; a < dim; ++a) {
        g.origin[a] = 0.0;
        g.cells[a] = L * cells_per_unit;
    }
    g.periodic = true;
    return g;
}

int64_t Grid::num_cells() const {
    int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= cells[a];
    return n;
}

int64_t Grid::num_nodes() const {
    int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= nodes_per_side(a);
    return n;
}

int64_t Grid::cell_index(const std::array<int64_t, kMaxDim>& c) const {
    int64_t idx = 0;
    for (int a = 0; a < dim; ++a) idx = idx * cells[a] + c[a];
    return idx;
}

int64_t Grid::node_index(const std::array<int64_t, kMaxDim>& n) const {
    int64_t idx = 0;
    for (int a = 0; a < dim; ++a) idx = idx * nodes_per_side(a) + n[a];
    return idx;
}

std::array<int64_t, kMaxDim> Grid::cell_coords(int64_t idx) const {
    std::array<int64_t, kMaxDim> c{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        c[a] = idx % cells[a];
        idx /= cells[a];
    }
    return c;
}

std::array<int64_t, kMaxDim> Grid::node_coords(int64_t idx) const {
    std::array<int64_t, kMaxDim> c{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        int64_t n = nodes_per_side(a);
        c[a] = idx % n;
        idx /= n;
    }
    return c;
}

Vec Grid::cell_center(const std::array<int64_t, kMaxDim>& c) const {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + (c[a] + 0.5) * h;
    return x;
}

Vec Grid::node_pos(const std::array<int64_t, kMaxDim>& n) const {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + n[a] * h;
    return x;
}

double Grid::cell_volume() const {
    double v = 1;
    for (int a = 0; a < dim; ++a) v *= h;
    return v;
}

double Grid::box_volume() const {
    double v = 1;
    for (int a = 0; a < dim; ++a) v *= cells[a] * h;
    return v;
}

bool Grid::same_geometry(const Grid& o) const {
    if (dim != o.dim || periodic != o.periodic || std::abs(h - o.h) > 1e-15) return false;
    for (int a = 0; a < dim; ++a)
        if (cells[a] != o.cells[a] || std::abs(origin[a] - o.origin[a]) > 1e-12) return false;
    return true;
}

double ScalarField::mean() const {
    double s = 0;
    for (double x : data) s += x;
    return data.empty() ? 0.0 : s / static_cast<double>(data.size());
}

double ScalarField::l2_mean() const {
    double s = 0;
    for (double x : data) s += x * x;
    return data.empty() ? 0.0 : std::sqrt(s / static_cast<double>(data.size()));
}

void ScalarField::subtract_mean() {
    double m = mean();
    for (double& x : data) x -= m;
}

Vec VectorField::mean() const {
    Vec m(grid.dim);
    for (int j = 0; j < grid.dim; ++j) {
        double s = 0;
        for (double x : comp[j]) s += x;
        m[j] = comp[j].empty() ? 0.0 : s / static_cast<double>(comp[j].size());
    }
    return m;
}

double VectorField::l2_mean() const {
    double s = 0;
    size_t n = 0;
    for (int j = 0; j < grid.dim; ++j) {
        for (double x : comp[j]) s += x * x;
        n = comp[j].size();
    }
    return n == 0 ? 0.0 : std::sqrt(s / static_cast<double>(n));
}

double heat_kernel(int dim, double t, const Vec& x) {
    double r2 = x.dot(x);
    double pref = std::pow(4.0 * 3.14159265358979323846 * t, -0.5 * dim);
    return pref * std::exp(-r2 / (4.0 * t));
}

double standard_mollifier(int dim, const Vec& x) {
    // c_d exp(-1/(1-|x|^2)) on |x|<1; normalization constants precomputed
    // by quadrature once per dimension.
    static double cd[kMaxDim + 1] = {0, 0, 0, 0};
    double r2 = x.dot(x);
    if (r2 >= 1.0) return 0.0;
    if (cd[dim] == 0.0) {
        // radial quadrature for the normalizing constant
        int N = 4000;
        double s = 0;
        for (int i = 0; i < N; ++i) {
            double r = (i + 0.5) / N;
            double f = std::exp(-1.0 / (1.0 - r * r));
            double shell = (dim == 1) ? 2.0 : (dim == 2 ? 2.0 * 3.14159265358979323846 * r
                                                        : 4.0 * 3.14159265358979323846 * r * r);
            s += f * shell / N;
        }
        cd[dim] = 1.0 / s;
    }
    return cd[dim] * std::exp(-1.0 / (1.0 - r2));
}

double HeatKernelMask::mass() const {
    double s = 0;
    for (double w : weights) s += w;
    return s * grid.cell_volume();
}

HeatKernelMask make_heat_mask(const Grid& grid, const Vec& center, double r) {
    HeatKernelMask m;
    m.grid = grid;
    m.center = center;
    m.scale = r;
    m.weights.assign(static_cast<size_t>(grid.num_cells()), 0.0);
    double cutoff = 6.0 * r;
    double t = r * r;
    int64_t n = grid.num_cells();
    for (int64_t i = 0; i < n; ++i) {
        auto c = grid.cell_coords(i);
        Vec x = grid.cell_center(c);
        Vec dx(grid.dim);
        double dist2 = 0;
        for (int a = 0; a < grid.dim; ++a) {
            double d = x[a] - center[a];
            if (grid.periodic) {
                double Lside = grid.side_length(a);
                d -= Lside * std::nearbyint(d / Lside);
            }
            dx[a] = d;
            dist2 += d * d;
        }
        if (dist2 > cutoff * cutoff) continue;
        m.weights[static_cast<size_t>(i)] = heat_kernel(grid.dim, t, dx);
    }
    double mass = 0;
    for (double w : m.weights) mass += w;
    mass *= grid.cell_volume();
    if (mass <= 0) throw std::runtime_error("make_heat_mask: empty mask");
    for (double& w : m.weights) w /= mass;
    return m;
}

Mollifier make_mollifier(int dim, double eps, double h) {
    Mollifier mol;
    mol.dim = dim;
    mol.eps = eps;
    mol.radius_cells = static_cast<int>(std::ceil(eps / h)) ;
    int w = 2 * mol.radius_cells + 1;
    size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= w;
    mol.weights.assign(total, 0.0);
    double sum = 0;
    for (size_t i = 0; i < total; ++i) {
        size_t rem = i;
        Vec x(dim);
        for (int a = dim - 1; a >= 0; --a) {
            int off = static_cast<int>(rem % w) - mol.radius_cells;
            rem /= w;
            x[a] = off * h / eps;
        }
        double v = standard_mollifier(dim, x);
        mol.weights[i] = v;
        sum += v;
    }
    if (sum <= 0) throw std::runtime_error("make_mollifier: eps below grid resolution");
    for (double& v : mol.weights) v /= sum;
    return mol;
}

double cube_average(const ScalarField& f, const TriadicCube& cube) {
    const Grid& g = f.grid;
    if (f.centering != Centering::Cell)
        throw std::invalid_argument("cube_average: cell-centered data required");
    std::array<int64_t, kMaxDim> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
        double flo = (cube.lo(a) - g.origin[a]) / g.h;
        double fhi = (cube.hi(a) - g.origin[a]) / g.h;
        lo[a] = static_cast<int64_t>(std::llround(flo));
        hi[a] = static_cast<int64_t>(std::llround(fhi));
        if (std::abs(flo - lo[a]) > 1e-9 || std::abs(fhi - hi[a]) > 1e-9)
            throw std::invalid_argument("cube_average: cube not aligned with grid");
        if (!g.periodic && (lo[a] < 0 || hi[a] > g.cells[a]))
            throw std::invalid_argument("cube_average: cube outside grid");
    }
    double s = 0;
    int64_t count = 0;
    std::array<int64_t, kMaxDim> c = lo;
    while (true) {
        std::array<int64_t, kMaxDim> cw = c;
        if (g.periodic)
            for (int a = 0; a < g.dim; ++a) cw[a] = g.wrap(cw[a], a);
        s += f.data[static_cast<size_t>(g.cell_index(cw))];
        ++count;
        int a = 0;
        while (a < g.dim) {
            if (++c[a] < hi[a]) break;
            c[a] = lo[a];
            ++a;
        }
        if (a == g.dim) break;
    }
    return s / static_cast<double>(count);
}

ScalarField heat_convolve(const ScalarField& f, double r) {
    const Grid& g = f.grid;
    if (r < g.h)
        throw std::invalid_argument(
            "heat_convolve: scale below grid spacing; refine the grid");
    if (g.periodic && f.centering == Centering::Cell) {
        // spectral multiplier exp(-r^2 |kappa|^2)
        ScalarField out(g, Centering::Cell);
        spectral_gaussian_smooth(g, f.data, r, out.data);
        return out;
    }
    // truncated direct sum, renormalized
    ScalarField out(g, f.centering);
    double cutoff = 6.0 * r;
    int reach = static_cast<int>(std::ceil(cutoff / g.h));
    int64_t n = (f.centering == Centering::Cell) ? g.num_cells() : g.num_nodes();
    double t = r * r;
    for (int64_t i = 0; i < n; ++i) {
        auto ci = (f.centering == Centering::Cell) ? g.cell_coords(i) : g.node_coords(i);
        double acc = 0, wsum = 0;
        std::array<int64_t, kMaxDim> o{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) o[a] = -reach;
        while (true) {
            std::array<int64_t, kMaxDim> cj = ci;
            bool inside = true;
            double d2 = 0;
            for (int a = 0; a < g.dim; ++a) {
                cj[a] += o[a];
                int64_t lim = (f.centering == Centering::Cell) ? g.cells[a] : g.nodes_per_side(a);
                if (cj[a] < 0 || cj[a] >= lim) {
                    inside = false;
                    break;
                }
                d2 += (o[a] * g.h) * (o[a] * g.h);
            }
            if (inside && d2 <= cutoff * cutoff) {
                Vec dx(g.dim);
                for (int a = 0; a < g.dim; ++a) dx[a] = o[a] * g.h;
                double w = heat_kernel(g.dim, t, dx);
                int64_t idx = (f.centering == Centering::Cell) ? g.cell_index(cj) : g.node_index(cj);
                acc += w * f.data[static_cast<size_t>(idx)];
                wsum += w;
            }
            int a = 0;
            while (a < g.dim) {
                if (++o[a] <= reach) break;
                o[a] = -reach;
                ++a;
            }
            if (a == g.dim) break;
        }
        out.data[static_cast<size_t>(i)] = (wsum > 0) ? acc / wsum : 0.0;
    }
    return out;
}

double heat_convolve_at(const ScalarField& f, double r, const Vec& x) {
    const Grid& g = f.grid;
    double cutoff = 6.0 * r;
    int reach = static_cast<int>(std::ceil(cutoff / g.h)) + 1;
    double t = r * r;
    std::array<int64_t, kMaxDim> c0{0, 0, 0};
    for (int a = 0; a < g.dim; ++a)
        c0[a] = static_cast<int64_t>(std::floor((x[a] - g.origin[a]) / g.h));
    double acc = 0, wsum = 0;
    std::array<int64_t, kMaxDim> o{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) o[a] = -reach;
    while (true) {
        std::array<int64_t, kMaxDim> cj = c0;
        bool inside = true;
        for (int a = 0; a < g.dim; ++a) {
            cj[a] += o[a];
            if (g.periodic) {
                cj[a] = g.wrap(cj[a], a);
            } else if (cj[a] < 0 || cj[a] >= g.cells[a]) {
                inside = false;
                break;
            }
        }
        if (inside) {
            Vec dx(g.dim);
            double d2 = 0;
            for (int a = 0; a < g.dim; ++a) {
                double xc = g.origin[a] + ((c0[a] + o[a]) + 0.5) * g.h;
                dx[a] = xc - x[a];
                d2 += dx[a] * dx[a];
            }
            if (d2 <= cutoff * cutoff) {
                double w = heat_kernel(g.dim, t, dx);
                acc += w * f.data[static_cast<size_t>(g.cell_index(cj))];
                wsum += w;
            }
        }
        int a = 0;
        while (a < g.dim) {
            if (++o[a] <= reach) break;
            o[a] = -reach;
            ++a;
        }
        if (a == g.dim) break;
    }
    return (wsum > 0) ? acc / wsum : 0.0;
}

ScalarField mollify(const ScalarField& f, double eps) {
    const Grid& g = f.grid;
    if (eps < g.h)
        throw std::invalid_argument("mollify: eps below grid spacing; refine the grid");
    Mollifier mol = make_mollifier(g.dim, eps, g.h);
    ScalarField out(g, f.centering);
    int R = mol.radius_cells;
    int w = 2 * R + 1;
    int64_t n = (f.centering == Centering::Cell) ? g.num_cells() : g.num_nodes();
    for (int64_t i = 0; i < n; ++i) {
        auto ci = (f.centering == Centering::Cell) ? g.cell_coords(i) : g.node_coords(i);
        double acc = 0, wsum = 0;
        size_t total = mol.weights.size();
        for (size_t k = 0; k < total; ++k) {
            size_t rem = k;
            std::array<int64_t, kMaxDim> cj = ci;
            bool inside = true;
            for (int a = g.dim - 1; a >= 0; --a) {
                int off = static_cast<int>(rem % w) - R;
                rem /= w;
                cj[a] += off;
                if (g.periodic) {
                    cj[a] = g.wrap(cj[a], a);
                } else {
                    int64_t lim = (f.centering == Centering::Cell) ? g.cells[a] : g.nodes_per_side(a);
                    if (cj[a] < 0 || cj[a] >= lim) {
                        inside = false;
                        break;
                    }
                }
            }
            if (!inside || mol.weights[k] == 0.0) continue;
            int64_t idx = (f.centering == Centering::Cell) ? g.cell_index(cj) : g.node_index(cj);
            acc += mol.weights[k] * f.data[static_cast<size_t>(idx)];
            wsum += mol.weights[k];
        }
        out.data[static_cast<size_t>(i)] = (wsum > 0) ? acc / wsum : 0.0;
    }
    return out;
}

}  // namespace homolab
