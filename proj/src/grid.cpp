#include "capax/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace capax {

std::uint64_t stable_hash(std::uint64_t seed, const std::string& label,
                          std::uint64_t index) {
    // FNV-1a over the label, folded with seed and index through splitmix64.
    std::uint64_t x = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        x ^= c;
        x *= 0x100000001b3ULL;
    }
    x ^= seed + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
    x ^= index * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned threads = 1;
    if (const char* env = std::getenv("CAPAX_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 1) threads = static_cast<unsigned>(v);
    }
    threads = std::min<unsigned>(threads, std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

double DiscreteMeasure::total() const {
    double s = 0.0;
    for (double m : masses) s += m;
    return s;
}

std::vector<LogTimeGrid::Node> LogTimeGrid::nodes() const {
    if (!(t_min > 0.0) || !(t_max > t_min))
        throw usage_error("LogTimeGrid needs 0 < t_min < t_max");
    const double span = std::log2(t_max / t_min);
    const int n = std::max(1, static_cast<int>(std::ceil(span * nodes_per_octave)));
    const double step = std::log(t_max / t_min) / n;
    std::vector<Node> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        out.push_back({t_min * std::exp((k + 0.5) * step), step});
    }
    return out;
}

Grid make_grid(int dim, double h, const Point& lo, const Point& hi,
               std::size_t cell_cap) {
    if (dim != 1 && dim != 2) throw usage_error("grid dim must be 1 or 2");
    if (!(h > 0.0)) throw usage_error("grid cell size must be positive");
    Grid g;
    g.dim = dim;
    g.h = h;
    g.origin = lo;
    g.shape = {1, 1};
    for (int a = 0; a < dim; ++a) {
        const double len = hi[a] - lo[a];
        if (!(len > 0.0)) throw usage_error("grid box must have positive side lengths");
        const double cells = len / h;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
            throw usage_error("grid box side is not an integer multiple of h");
        g.shape[a] = static_cast<int>(rounded);
        if (g.shape[a] < 1) throw usage_error("grid axis has no cells");
    }
    if (dim == 1) g.origin[1] = 0.0;
    if (g.cell_count() > cell_cap) throw usage_error("grid cell cap exceeded");
    return g;
}

CubeLattice enumerate_cubes(const Grid& grid, double rho, CubePolicy policy) {
    if (!(rho >= 2.0 * grid.h * (1.0 - 1e-12)))
        throw usage_error("enumerate_cubes needs rho >= 2h");
    std::vector<double> radii;
    for (double r = grid.h; r <= 0.5 * rho * (1.0 + 1e-12); r *= 2.0)
        radii.push_back(r);

    CubeLattice lat;
    lat.rho = rho;
    if (policy == CubePolicy::centered) {
        for (double r : radii) {
            for (std::size_t i = 0; i < grid.cell_count(); ++i) {
                lat.cubes.push_back({grid.center(i), r});
            }
        }
    } else {
        for (double r : radii) {
            const int side = static_cast<int>(std::lround(2.0 * r / grid.h));
            const int nx = grid.shape[0] - side;
            const int ny = grid.dim == 2 ? grid.shape[1] - side : 0;
            if (nx < 0 || ny < 0) continue;
            for (int ay = 0; ay <= ny; ++ay) {
                for (int ax = 0; ax <= nx; ++ax) {
                    CubeSpec q;
                    q.half_len = r;
                    q.center[0] = grid.origin[0] + (ax + 0.5 * side) * grid.h;
                    q.center[1] =
                        grid.dim == 2 ? grid.origin[1] + (ay + 0.5 * side) * grid.h : 0.0;
                    lat.cubes.push_back(q);
                }
            }
        }
    }
    if (lat.cubes.empty()) throw usage_error("cube lattice is empty");
    return lat;
}

namespace {

struct AxisRange {
    int lo_cell, hi_cell;    // inclusive cell index range intersecting the cube
    double lo, hi;           // clipped cube interval on this axis
};

bool axis_overlap(const Grid& g, int axis, const CubeSpec& q, AxisRange& out) {
    const double box_lo = g.origin[axis];
    const double box_hi = g.origin[axis] + g.shape[axis] * g.h;
    const double lo = std::max(q.center[axis] - q.half_len, box_lo);
    const double hi = std::min(q.center[axis] + q.half_len, box_hi);
    if (!(hi > lo)) return false;
    int lo_cell = static_cast<int>(std::floor((lo - box_lo) / g.h));
    int hi_cell = static_cast<int>(std::ceil((hi - box_lo) / g.h)) - 1;
    lo_cell = std::max(lo_cell, 0);
    hi_cell = std::min(hi_cell, g.shape[axis] - 1);
    if (hi_cell < lo_cell) return false;
    out = {lo_cell, hi_cell, lo, hi};
    return true;
}

double axis_cover(const Grid& g, int axis, int cell, const AxisRange& r) {
    const double c_lo = g.origin[axis] + cell * g.h;
    const double c_hi = c_lo + g.h;
    return std::max(0.0, std::min(c_hi, r.hi) - std::max(c_lo, r.lo));
}

}  // namespace

static void weighted_sums(const Field& field, const CubeSpec& cube, double& sum,
                          double& vol) {
    const Grid& g = field.grid;
    AxisRange rx;
    if (!axis_overlap(g, 0, cube, rx)) throw usage_error("cube does not meet the grid box");
    sum = 0.0;
    vol = 0.0;
    if (g.dim == 1) {
        for (int ix = rx.lo_cell; ix <= rx.hi_cell; ++ix) {
            const double w = axis_cover(g, 0, ix, rx);
            sum += field.values[static_cast<std::size_t>(ix)] * w;
            vol += w;
        }
        return;
    }
    AxisRange ry;
    if (!axis_overlap(g, 1, cube, ry)) throw usage_error("cube does not meet the grid box");
    for (int iy = ry.lo_cell; iy <= ry.hi_cell; ++iy) {
        const double wy = axis_cover(g, 1, iy, ry);
        const std::size_t row = static_cast<std::size_t>(iy) * g.shape[0];
        for (int ix = rx.lo_cell; ix <= rx.hi_cell; ++ix) {
            const double w = axis_cover(g, 0, ix, rx) * wy;
            sum += field.values[row + ix] * w;
            vol += w;
        }
    }
}

double cube_average(const Field& field, const CubeSpec& cube) {
    double sum = 0.0, vol = 0.0;
    weighted_sums(field, cube, sum, vol);
    return sum / vol;
}

double cube_weighted_volume(const Field& field, const CubeSpec& cube) {
    double sum = 0.0, vol = 0.0;
    weighted_sums(field, cube, sum, vol);
    return sum;
}

double cube_mass(const DiscreteMeasure& measure, const CubeSpec& cube) {
    const Grid& g = measure.grid;
    // Cell centers strictly inside: origin + (i+1/2)h in (c-r, c+r) per axis.
    int lo[2] = {0, 0}, hi[2] = {-1, -1};
    for (int a = 0; a < g.dim; ++a) {
        const double lo_coord = cube.center[a] - cube.half_len;
        const double hi_coord = cube.center[a] + cube.half_len;
        // smallest i with origin+(i+1/2)h > lo_coord, largest with ... < hi_coord
        int i_lo = static_cast<int>(std::floor((lo_coord - g.origin[a]) / g.h - 0.5)) + 1;
        int i_hi = static_cast<int>(std::ceil((hi_coord - g.origin[a]) / g.h - 0.5)) - 1;
        while (g.origin[a] + (i_lo + 0.5) * g.h <= lo_coord) ++i_lo;
        while (i_lo > 0 && g.origin[a] + (i_lo - 0.5) * g.h > lo_coord) --i_lo;
        while (g.origin[a] + (i_hi + 0.5) * g.h >= hi_coord) --i_hi;
        while (i_hi + 1 < g.shape[a] && g.origin[a] + (i_hi + 1.5) * g.h < hi_coord) ++i_hi;
        lo[a] = std::max(i_lo, 0);
        hi[a] = std::min(i_hi, g.shape[a] - 1);
        if (hi[a] < lo[a]) return 0.0;
    }
    double sum = 0.0;
    if (g.dim == 1) {
        for (int ix = lo[0]; ix <= hi[0]; ++ix)
            sum += measure.masses[static_cast<std::size_t>(ix)];
        return sum;
    }
    for (int iy = lo[1]; iy <= hi[1]; ++iy) {
        const std::size_t row = static_cast<std::size_t>(iy) * g.shape[0];
        for (int ix = lo[0]; ix <= hi[0]; ++ix) sum += measure.masses[row + ix];
    }
    return sum;
}

}  // namespace capax
