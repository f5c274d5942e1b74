#include "capax/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "capax/choquet.hpp"
#include "capax/maximal.hpp"
#include "capax/potentials.hpp"
#include "capax/weights.hpp"

namespace capax {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------- instances

struct WeightSpec {
    int kind = 0;      // 0 constant, 1 power |x|^a, 2 exp e^{c|x|},
                       // 3 power times truncated exp
    double a = 0.0;
    double c = 0.0;
    double cap = 1.0;  // truncation level of kind 3

    std::string describe() const {
        switch (kind) {
            case 1: return "w=|x|^" + fmt(a);
            case 2: return "w=e^{" + fmt(c) + "|x|}";
            case 3:
                return "w=|x|^" + fmt(a) + "*min(e^{" + fmt(c) + "|x|}," +
                       fmt(cap) + ")";
            default: return "w=1";
        }
    }
};

WeightSpec random_weight(Rng& rng, int dim, double p) {
    WeightSpec w;
    w.kind = 1 + static_cast<int>(rng.uniform_int(3));
    const double amax = 0.9 * std::min(1.0, dim * (p - 1.0));
    if (w.kind == 1) {
        w.a = amax * (2.0 * rng.uniform() - 1.0);
    } else if (w.kind == 2) {
        w.c = 3.0 * (2.0 * rng.uniform() - 1.0);
    } else {
        w.a = amax * (2.0 * rng.uniform() - 1.0);
        w.c = 3.0 * (2.0 * rng.uniform() - 1.0);
        w.cap = std::exp(1.0 + 2.0 * rng.uniform());
    }
    return w;
}

Field realize_weight(const WeightSpec& w, const Grid& g) {
    switch (w.kind) {
        case 1: return weight_power(g, w.a);
        case 2: return weight_exp(g, w.c);
        case 3: {
            Field f = weight_power(g, w.a);
            Field e = weight_truncate(weight_exp(g, w.c), w.cap);
            for (std::size_t i = 0; i < f.values.size(); ++i)
                f.values[i] *= e.values[i];
            return f;
        }
        default: return Field(g, 1.0);
    }
}

struct AtomSpec {
    double x = 0.0, y = 0.0, mass = 0.0;
};

struct MeasureSpec {
    int kind = 0;  // 0 atoms, 1 uniform on a cube
    std::vector<AtomSpec> atoms;
    double cx = 0.0, cy = 0.0, r = 0.0, mass = 0.0;

    std::string describe() const {
        if (kind == 1)
            return "mu=uniform(Q_" + fmt(r) + "(" + fmt(cx) + "))";
        return "mu=" + std::to_string(atoms.size()) + "atoms";
    }
};

MeasureSpec random_measure(Rng& rng, double extent) {
    MeasureSpec m;
    const int family = static_cast<int>(rng.uniform_int(3));
    if (family == 1) {
        m.kind = 1;
        m.r = 0.05 + 0.2 * rng.uniform();
        m.cx = (extent - m.r) * (2.0 * rng.uniform() - 1.0);
        m.cy = (extent - m.r) * (2.0 * rng.uniform() - 1.0);
        m.mass = 0.25 + rng.uniform();
        return m;
    }
    const std::size_t count =
        family == 0 ? 1 + rng.uniform_int(4) : 5 + rng.uniform_int(8);
    for (std::size_t i = 0; i < count; ++i) {
        AtomSpec a;
        a.x = extent * (2.0 * rng.uniform() - 1.0);
        a.y = extent * (2.0 * rng.uniform() - 1.0);
        a.mass = family == 0 ? 0.2 + rng.uniform() : 0.02 + 0.1 * rng.uniform();
        m.atoms.push_back(a);
    }
    return m;
}

std::size_t snap_cell(const Grid& g, double x, double y) {
    auto clampi = [](int v, int hi) { return std::max(0, std::min(v, hi)); };
    const int ix = clampi(
        static_cast<int>(std::floor((x - g.origin[0]) / g.h)), g.shape[0] - 1);
    int iy = 0;
    if (g.dim == 2)
        iy = clampi(static_cast<int>(std::floor((y - g.origin[1]) / g.h)),
                    g.shape[1] - 1);
    return static_cast<std::size_t>(iy) * g.shape[0] + ix;
}

DiscreteMeasure realize_measure(const MeasureSpec& m, const Grid& g) {
    DiscreteMeasure mu(g);
    if (m.kind == 1) {
        std::vector<std::size_t> cells;
        const CubeSpec q{{m.cx, m.cy}, m.r};
        for (std::size_t i = 0; i < g.cell_count(); ++i)
            if (q.contains(g.center(i), g.dim)) cells.push_back(i);
        if (cells.empty()) cells.push_back(snap_cell(g, m.cx, m.cy));
        for (std::size_t i : cells)
            mu.masses[i] += m.mass / static_cast<double>(cells.size());
        return mu;
    }
    for (const auto& a : m.atoms) mu.masses[snap_cell(g, a.x, a.y)] += a.mass;
    return mu;
}

struct FieldSpec {
    struct Bump {
        double cx = 0.0, cy = 0.0, r = 0.0, amp = 0.0;
    };
    std::vector<Bump> bumps;

    std::string describe() const {
        return "f=" + std::to_string(bumps.size()) + "bumps";
    }
};

FieldSpec random_bumps(Rng& rng, double extent) {
    FieldSpec f;
    const std::size_t count = 1 + rng.uniform_int(3);
    for (std::size_t i = 0; i < count; ++i) {
        FieldSpec::Bump b;
        b.r = 0.05 + 0.25 * rng.uniform();
        b.cx = (extent - b.r) * (2.0 * rng.uniform() - 1.0);
        b.cy = (extent - b.r) * (2.0 * rng.uniform() - 1.0);
        b.amp = 0.3 + 1.7 * rng.uniform();
        f.bumps.push_back(b);
    }
    return f;
}

Field realize_field(const FieldSpec& spec, const Grid& g) {
    Field f(g, 0.0);
    for (const auto& b : spec.bumps) {
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            const Point c = g.center(i);
            double d = std::abs(c[0] - b.cx);
            if (g.dim == 2) d = std::max(d, std::abs(c[1] - b.cy));
            if (d <= b.r) f.values[i] += b.amp;
        }
    }
    return f;
}

// round f down onto at most nlev quantile values of its positive range
Field quantize_levels(const Field& f, std::size_t nlev) {
    std::vector<double> pos;
    for (double v : f.values)
        if (v > 0.0) pos.push_back(v);
    Field out(f.grid, 0.0);
    if (pos.empty() || nlev == 0) return out;
    std::sort(pos.begin(), pos.end());
    std::vector<double> lv;
    for (std::size_t j = 1; j <= nlev; ++j) {
        std::size_t r = (j * pos.size()) / nlev;
        if (r == 0) r = 1;
        lv.push_back(pos[r - 1]);
    }
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double v = f.values[i];
        if (!(v > 0.0)) continue;
        auto it = std::upper_bound(lv.begin(), lv.end(), v);
        if (it != lv.begin()) out.values[i] = *(it - 1);
    }
    return out;
}

// sample thresholds of a nonnegative field for sup_t scans
std::vector<double> level_samples(const Field& f, std::size_t nlev) {
    const Field q = quantize_levels(f, nlev);
    std::vector<double> lv;
    for (double v : q.values)
        if (v > 0.0) lv.push_back(v);
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    return lv;
}

// ---------------------------------------------------------------- plumbing

struct RowSet {
    std::vector<CheckInstance> rows;
    bool extra_ok = true;
    std::string note;

    void fail(const std::string& why) {
        extra_ok = false;
        if (!note.empty()) note += "; ";
        note += why;
    }
};

CheckInstance make_row(std::string desc, double lhs, double rhs) {
    CheckInstance r;
    r.descriptor = std::move(desc);
    r.lhs = lhs;
    r.rhs = rhs;
    if (rhs > 0.0)
        r.constant = lhs / rhs;
    else
        r.constant = lhs > 0.0 ? kInf : 0.0;
    return r;
}

Grid box_grid(int dim, double h, double box) {
    return make_grid(dim, h, {-box, -box}, {box, box});
}

double weighted_lp(const Field& f, const Field& w, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        s += std::pow(f.values[i], p) * w.values[i];
    return s * f.grid.cell_volume();
}

double weight_of_set(const Field& w, const Field& f, double level) {
    // w-measure of {f > level}
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (f.values[i] > level) s += w.values[i];
    return s * w.grid.cell_volume();
}

double measure_pairing(const Field& f, const DiscreteMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        s += f.values[i] * mu.masses[i];
    return s;
}

std::size_t default_count(const VerifyConfig& cfg, std::size_t dflt) {
    return cfg.instances > 0 ? cfg.instances : dflt;
}

SolverParams heavy_solver(const VerifyConfig& cfg) {
    SolverParams s = cfg.solver;
    s.tol = std::max(s.tol, 1e-3);
    s.max_iter = std::min<std::size_t>(s.max_iter, 700);
    return s;
}

// ---------------------------------------------------------------- checks

// energy of the truncated Riesz potential vs the fractional maximal function
RowSet mw_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const double extent = cfg.box - cfg.rho - 0.25;
    const std::size_t count = default_count(cfg, 10);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "mw", idx));
        WeightSpec ws;
        MeasureSpec ms;
        if (idx == 0) {
            ms.atoms.push_back({0.125, 0.125, 1.0});  // Dirac against w=1
        } else {
            ws = random_weight(rng, cfg.dim, cfg.p);
            ms = random_measure(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const DiscreteMeasure mu = realize_measure(ms, g);
        const Field pot = riesz_convolve(mu, cfg.alpha, cfg.rho);
        const Field frac = fractional_local_maximal(mu, cfg.alpha, cfg.rho);
        const double lhs = weighted_lp(pot, w, cfg.p);
        const double rhs = weighted_lp(frac, w, cfg.p);
        rs.rows.push_back(
            make_row(ws.describe() + ";" + ms.describe(), lhs, rhs));
    }
    return rs;
}

// capacity at scale rho/2 vs scale rho, both directions
RowSet scale_shift_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const double extent = cfg.box - cfg.rho - 0.25;
    const double rho1 = 0.5 * cfg.rho;
    const double rho2 = cfg.rho;
    const std::size_t count = default_count(cfg, 6);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "scale_shift", idx));
        WeightSpec ws;
        if (idx == 1) {
            ws.kind = 2;
            ws.c = 1.0;
        } else if (idx > 1) {
            ws = random_weight(rng, cfg.dim, cfg.p);
        }
        const Field w = realize_weight(ws, g);
        // E: one or two small boxes
        TargetSet E{g, {}};
        const std::size_t nbox = 1 + rng.uniform_int(2);
        std::string desc = ws.describe() + ";E=";
        for (std::size_t b = 0; b < nbox; ++b) {
            const double r = 0.03 + 0.12 * rng.uniform();
            const double cx = (extent - r) * (2.0 * rng.uniform() - 1.0);
            const double cy =
                cfg.dim == 2 ? (extent - r) * (2.0 * rng.uniform() - 1.0) : 0.0;
            E = unite(E, TargetSet::from_box(g, {cx - r, cy - r},
                                             {cx + r, cy + r}));
            desc += "Q_" + fmt(r) + "(" + fmt(cx) + ")";
        }
        const CapacitySolution c1 = capacity_primal(
            E, w, LocalRieszKernel{cfg.alpha, rho1}, cfg.p, {}, cfg.solver);
        const CapacitySolution c2 = capacity_primal(
            E, w, LocalRieszKernel{cfg.alpha, rho2}, cfg.p, {}, cfg.solver);
        rs.rows.push_back(make_row(desc, c1.value, c2.value));
        // kernel domination gives the reverse direction for free
        const double slack = 3.0 * (c1.gap + c2.gap) + 1e-9;
        if (c2.value > c1.value * (1.0 + slack))
            rs.fail("larger scale did not lower the capacity");
    }
    return rs;
}

// the four nonlinear/Wolff energies of one (mu, w) pair
RowSet wolff_energy_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const double extent = cfg.box - cfg.rho - 0.25;
    const LogTimeGrid tg = LogTimeGrid::standard(h, cfg.rho);
    const std::size_t count = default_count(cfg, 10);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "wolff_energies", idx));
        WeightSpec ws;
        MeasureSpec ms;
        if (idx == 0) {
            ms.atoms.push_back({-0.25, -0.25, 1.0});
        } else {
            ws = random_weight(rng, cfg.dim, cfg.p);
            ms = random_measure(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const DiscreteMeasure mu = realize_measure(ms, g);
        const double eV = measure_pairing(
            nonlinear_potential_V(mu, w, cfg.alpha, cfg.p, cfg.rho), mu);
        const double eWcal = measure_pairing(
            wolff_cal(mu, w, cfg.alpha, cfg.p, cfg.rho, tg), mu);
        const double eWvar = measure_pairing(
            wolff_variant(mu, w, cfg.alpha, cfg.p, cfg.rho, tg), mu);
        const double eVcal = measure_pairing(
            nonlinear_V_cal(mu, w, cfg.alpha, cfg.p, cfg.rho, tg), mu);
        const double emax = std::max(std::max(eV, eWcal), std::max(eWvar, eVcal));
        const double emin = std::min(std::min(eV, eWcal), std::min(eWvar, eVcal));
        rs.rows.push_back(make_row(ws.describe() + ";" + ms.describe() +
                                       ";V=" + fmt(eV) + ";Wc=" + fmt(eWcal) +
                                       ";Wv=" + fmt(eWvar) + ";Vc=" + fmt(eVcal),
                                   emax, emin));
    }
    return rs;
}

// sup_t t^{p-1} Cap({potential > t}) / mu(total), for both Wolff forms
RowSet weak_type_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const double extent = cfg.box - cfg.rho - 0.25;
    const LogTimeGrid tg = LogTimeGrid::standard(h, cfg.rho);
    const SolverParams sp = heavy_solver(cfg);
    const std::size_t draws = default_count(cfg, 5);
    for (std::size_t idx = 0; idx < draws; ++idx) {
        Rng rng(stable_hash(cfg.seed, "weak_type_wolff", idx));
        WeightSpec ws;
        MeasureSpec ms;
        if (idx == 0) {
            ms.atoms.push_back({0.0, 0.0, 1.0});  // single Dirac
        } else {
            ws = random_weight(rng, cfg.dim, cfg.p);
            ms = random_measure(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const DiscreteMeasure mu = realize_measure(ms, g);
        const double total = mu.total();

        const Field wc = wolff_cal(mu, w, cfg.alpha, cfg.p, cfg.rho, tg);
        double lhs = 0.0;
        for (double t : level_samples(wc, 5)) {
            const TargetSet S = TargetSet::from_indicator(wc, t);
            const double cap =
                capacity_variant_R(S, w, cfg.alpha, cfg.p, cfg.rho, sp).value;
            lhs = std::max(lhs, std::pow(t, cfg.p - 1.0) * cap);
        }
        rs.rows.push_back(make_row(
            ws.describe() + ";" + ms.describe() + ";Wcal/RT", lhs, total));

        const Field wv = wolff_variant(mu, w, cfg.alpha, cfg.p, cfg.rho, tg);
        double lhs2 = 0.0;
        for (double t : level_samples(wv, 5)) {
            const TargetSet S = TargetSet::from_indicator(wv, t);
            const double cap =
                capacity_primal(S, w, LocalRieszKernel{cfg.alpha, cfg.rho},
                                cfg.p, {}, sp)
                    .value;
            lhs2 = std::max(lhs2, std::pow(t, cfg.p - 1.0) * cap);
        }
        rs.rows.push_back(make_row(
            ws.describe() + ";" + ms.describe() + ";Wvar/R", lhs2, total));
    }
    return rs;
}

// capacitary strong type: layer cake of the potential vs the source energy
RowSet csi_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const double extent = cfg.box - cfg.rho - 0.25;
    const std::size_t count = default_count(cfg, 10);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "csi", idx));
        WeightSpec ws;
        FieldSpec fs;
        if (idx == 0) {
            fs.bumps.push_back({0.0, 0.0, 0.25, 1.0});  // phi = chi_Q
        } else {
            ws = random_weight(rng, cfg.dim, cfg.p);
            fs = random_bumps(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const Field phi = realize_field(fs, g);
        const Field u = riesz_convolve(phi, cfg.alpha, cfg.rho);
        const Field uq = quantize_levels(u, 8);
        CapacityOracle C =
            riesz_capacity_oracle(g, w, cfg.alpha, cfg.p, cfg.rho, cfg.solver);
        const double lhs = choquet_integral(uq, cfg.p, C);
        const double rhs = weighted_lp(phi, w, cfg.p);
        rs.rows.push_back(
            make_row(ws.describe() + ";" + fs.describe(), lhs, rhs));
    }
    return rs;
}

// Choquet norms of the local maximal function vs the input, over the
// scale-resolved capacity; p is pinned at 1.5 so the exponent threshold
// (n - alpha p)/n sits at 1/4 for the default alpha
RowSet maximal_choquet_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const double p = 1.5;
    const double box = std::min(cfg.box, 1.0);
    const Grid g = box_grid(cfg.dim, h, box);
    const double extent = box - cfg.rho - 0.1;
    const double threshold = (cfg.dim - cfg.alpha * p) / cfg.dim;
    const bool weak = std::abs(cfg.q - threshold) < 1e-9;
    const CubeLattice lat = enumerate_cubes(g, cfg.rho, CubePolicy::centered);
    const SolverParams sp = heavy_solver(cfg);
    const std::size_t count = default_count(cfg, 4);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "maximal_choquet", idx));
        WeightSpec ws;
        FieldSpec fs;
        if (idx == 0) {
            fs.bumps.push_back({0.0, 0.0, 0.2, 1.0});
        } else {
            ws = random_weight(rng, cfg.dim, p);
            fs = random_bumps(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const Field f = realize_field(fs, g);
        const Field mf = uncentered_local_maximal(f, cfg.rho, lat);
        const Field fq = quantize_levels(f, 6);
        const Field mfq = quantize_levels(mf, 6);
        CapacityOracle C(
            g,
            [&](const TargetSet& E) {
                return capacity_variant_R(E, w, cfg.alpha, p, cfg.rho, sp)
                    .value;
            },
            std::max(1e-5, 10.0 * sp.tol));
        const double rhs = std::pow(choquet_integral(fq, cfg.q, C), 1.0 / cfg.q);
        const double lhs =
            weak ? weak_quasinorm(mfq, cfg.q, C)
                 : std::pow(choquet_integral(mfq, cfg.q, C), 1.0 / cfg.q);
        rs.rows.push_back(make_row(ws.describe() + ";" + fs.describe() +
                                       ";q=" + fmt(cfg.q) +
                                       (weak ? ";weak" : ";strong"),
                                   lhs, rhs));
    }
    return rs;
}

// global sup of the Wolff potentials vs their sup on the support at double
// scale, against the explicit comparison factors
RowSet max_principle_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const LogTimeGrid tg1 = LogTimeGrid::standard(h, cfg.rho);
    const LogTimeGrid tg2 = LogTimeGrid::standard(h, 2.0 * cfg.rho);
    const double extent = cfg.box - 2.0 * cfg.rho - 0.25;
    const std::size_t draws = default_count(cfg, 5);
    const CubeLattice lat4 =
        enumerate_cubes(g, 4.0 * cfg.rho, CubePolicy::centered);
    for (std::size_t idx = 0; idx < draws; ++idx) {
        Rng rng(stable_hash(cfg.seed, "max_principle", idx));
        WeightSpec ws;
        MeasureSpec ms;
        if (idx == 0) {
            ms.atoms.push_back({0.25, 0.25, 1.0});  // single point support
        } else if (idx == 1) {
            // two clusters far apart
            ms.atoms.push_back({-0.6, -0.6, 0.7});
            ms.atoms.push_back({-0.55, -0.6, 0.4});
            ms.atoms.push_back({0.7, 0.7, 0.9});
        } else {
            ws = random_weight(rng, cfg.dim, cfg.p);
            ms = random_measure(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const DiscreteMeasure mu = realize_measure(ms, g);
        std::vector<std::size_t> supp;
        for (std::size_t i = 0; i < mu.masses.size(); ++i)
            if (mu.masses[i] > 0.0) supp.push_back(i);

        const double apc = ap_loc_constant(w, cfg.p, lat4).constant;
        const double expo = (cfg.dim - cfg.alpha) * cfg.p / (cfg.p - 1.0);
        const double factor_cal =
            std::pow(2.0, expo) * std::pow(apc, 1.0 / (cfg.p - 1.0));
        const double factor_var = std::pow(2.0, expo);

        const Field w1 = wolff_cal(mu, w, cfg.alpha, cfg.p, cfg.rho, tg1);
        const Field w2 = wolff_cal(mu, w, cfg.alpha, cfg.p, 2.0 * cfg.rho, tg2);
        double lhs = 0.0, ssup = 0.0;
        for (double v : w1.values) lhs = std::max(lhs, v);
        for (std::size_t i : supp) ssup = std::max(ssup, w2.values[i]);
        rs.rows.push_back(make_row(
            ws.describe() + ";" + ms.describe() + ";Wcal", lhs,
            factor_cal * ssup));

        const Field v1 = wolff_variant(mu, w, cfg.alpha, cfg.p, cfg.rho, tg1);
        const Field v2 =
            wolff_variant(mu, w, cfg.alpha, cfg.p, 2.0 * cfg.rho, tg2);
        double lhs2 = 0.0, ssup2 = 0.0;
        for (double v : v1.values) lhs2 = std::max(lhs2, v);
        for (std::size_t i : supp) ssup2 = std::max(ssup2, v2.values[i]);
        rs.rows.push_back(make_row(
            ws.describe() + ";" + ms.describe() + ";Wvar", lhs2,
            factor_var * ssup2));
    }
    return rs;
}

// weak (1,1) with the maximal-smoothed weight on the right-hand side
RowSet fefferman_stein_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const double extent = cfg.box - cfg.rho - 0.25;
    const CubeLattice lat = enumerate_cubes(g, cfg.rho, CubePolicy::centered);
    const std::size_t count = default_count(cfg, 8);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "fefferman_stein", idx));
        WeightSpec ws;
        FieldSpec fs;
        if (idx == 0) {
            ws.kind = 2;
            ws.c = 1.0;
            fs.bumps.push_back({0.0, 0.0, 0.25, 1.0});  // f = chi_Q, w = e^{|x|}
        } else {
            ws = random_weight(rng, cfg.dim, cfg.p);
            fs = random_bumps(rng, extent);
        }
        const Field w = realize_weight(ws, g);
        const Field f = realize_field(fs, g);
        const Field mf = uncentered_local_maximal(f, cfg.rho, lat);
        const Field mw = uncentered_local_maximal(w, cfg.rho, lat);
        double lhs = 0.0;
        for (double lam : level_samples(mf, 8))
            lhs = std::max(lhs, lam * weight_of_set(w, mf, lam));
        double rhs = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i)
            rhs += std::abs(f.values[i]) * mw.values[i];
        rhs *= g.cell_volume();
        rs.rows.push_back(
            make_row(ws.describe() + ";" + fs.describe(), lhs, rhs));
    }
    return rs;
}

// the algebraic weight-constant battery: each row is bound/claim vs bound
RowSet weight_algebra_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const CubeLattice lat = enumerate_cubes(g, cfg.rho, CubePolicy::aligned);
    const CubeLattice lat_half =
        enumerate_cubes(g, 0.5 * cfg.rho, CubePolicy::aligned);
    const double p = cfg.p;

    {
        // constant weight: every constant is exactly one
        const Field one(g, 1.0);
        const double ap = ap_loc_constant(one, p, lat).constant;
        const double a1 = ap_loc_constant(one, 1.0, lat).constant;
        const double ai = ainf_loc_constant(one, lat).constant;
        rs.rows.push_back(make_row("w=1;ap", ap, 1.0));
        rs.rows.push_back(make_row("w=1;a1", a1, 1.0));
        rs.rows.push_back(make_row("w=1;ainf", ai, 1.0));
        if (std::abs(ap - 1.0) > 1e-12 || std::abs(a1 - 1.0) > 1e-12 ||
            std::abs(ai - 1.0) > 1e-12)
            rs.fail("constant weight constants differ from 1");
    }

    const std::size_t count = default_count(cfg, 3);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "weight_algebra", idx));
        const WeightSpec ws = random_weight(rng, cfg.dim, p);
        const Field w = realize_weight(ws, g);
        const std::string d = ws.describe();
        const double ap = ap_loc_constant(w, p, lat).constant;

        // conjugate duality, exact per cube family
        const double ppr = conjugate_exponent(p);
        const double dual = ap_loc_constant(dual_weight(w, p), ppr, lat).constant;
        rs.rows.push_back(make_row(d + ";duality", dual, std::pow(ap, ppr - 1.0)));
        if (std::abs(dual - std::pow(ap, ppr - 1.0)) >
            1e-10 * std::pow(ap, ppr - 1.0))
            rs.fail("duality identity broke on " + d);

        // monotone in p and in rho
        const double ap_hi = ap_loc_constant(w, p + 1.0, lat).constant;
        rs.rows.push_back(make_row(d + ";p-monotone", ap_hi, ap));
        if (ap_hi > ap * (1.0 + 1e-12)) rs.fail("A_p rose with p on " + d);
        const double ap_small = ap_loc_constant(w, p, lat_half).constant;
        rs.rows.push_back(make_row(d + ";rho-monotone", ap_small, ap));
        if (ap_small > ap * (1.0 + 1e-12)) rs.fail("A_p fell with rho on " + d);

        // A_infty under A_p
        const double ai = ainf_loc_constant(w, lat).constant;
        rs.rows.push_back(make_row(d + ";ainf<=ap", ai, ap));
        if (ai > ap * (1.0 + 1e-12)) rs.fail("A_inf exceeded A_p on " + d);

        // power rule: w^delta lands in A_{delta p + 1 - delta}
        const double delta = 0.5;
        Field wpow = w;
        for (double& v : wpow.values) v = std::pow(v, delta);
        const double ppow =
            ap_loc_constant(wpow, delta * p + 1.0 - delta, lat).constant;
        rs.rows.push_back(make_row(d + ";power", ppow, std::pow(ap, delta)));
        if (ppow > std::pow(ap, delta) * (1.0 + 1e-10))
            rs.fail("power rule broke on " + d);

        // truncation: min(w,k) stays A_p with the split constant
        const double wmax = *std::max_element(w.values.begin(), w.values.end());
        const double k = 0.25 * wmax;
        const double cp = p <= 1.0 ? 1.0 : (p <= 2.0 ? 2.0 : std::pow(2.0, p - 1.0));
        const double trunc = ap_loc_constant(weight_truncate(w, k), p, lat).constant;
        rs.rows.push_back(make_row(d + ";truncate", trunc, cp * ap));
        if (trunc > cp * ap * (1.0 + 1e-10)) rs.fail("truncation bound broke on " + d);
    }

    {
        // two-weight rules on a fixed pair
        Rng rng(stable_hash(cfg.seed, "weight_algebra_pair", 0));
        const WeightSpec s1 = random_weight(rng, cfg.dim, p);
        const WeightSpec s2 = random_weight(rng, cfg.dim, p);
        const Field w1 = realize_weight(s1, g);
        const Field w2 = realize_weight(s2, g);

        // product rule out of two A_1 weights
        const double a11 = ap_loc_constant(w1, 1.0, lat).constant;
        const double a12 = ap_loc_constant(w2, 1.0, lat).constant;
        const double prod =
            ap_loc_constant(weight_product(w1, w2, p), p, lat).constant;
        rs.rows.push_back(make_row("pair;product", prod,
                                   a11 * std::pow(a12, p - 1.0)));
        if (prod > a11 * std::pow(a12, p - 1.0) * (1.0 + 1e-10))
            rs.fail("product rule broke");

        // sums at the common exponent
        const double b1 = ap_loc_constant(w1, p, lat).constant;
        const double b2 = ap_loc_constant(w2, p, lat).constant;
        Field sum = w1;
        for (std::size_t i = 0; i < sum.values.size(); ++i)
            sum.values[i] += w2.values[i];
        const double asum = ap_loc_constant(sum, p, lat).constant;
        rs.rows.push_back(make_row("pair;sum", asum, b1 + b2));
        if (asum > (b1 + b2) * (1.0 + 1e-10)) rs.fail("sum rule broke");

        // log-convex interpolation between (w1,p) and (w2,p+1); the constant
        // interpolates with the Holder weights lam = (1-theta) p_mid / p
        const double b2hi = ap_loc_constant(w2, p + 1.0, lat).constant;
        const auto [wmid, pmid] = weight_interpolate(w1, p, w2, p + 1.0, 0.5);
        const double amid = ap_loc_constant(wmid, pmid, lat).constant;
        const double lam = 0.5 * pmid / p;
        const double ibound = std::pow(b1, lam) * std::pow(b2hi, 1.0 - lam);
        rs.rows.push_back(make_row("pair;interpolate", amid, ibound));
        if (amid > ibound * (1.0 + 1e-10))
            rs.fail("interpolation bound broke");
    }
    return rs;
}

// shrinking sets: capacity, weighted measure, and volume vanish together
RowSet absolute_continuity_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const Grid g = box_grid(cfg.dim, h, cfg.box);
    const std::size_t count = default_count(cfg, 3);
    for (std::size_t idx = 0; idx < count; ++idx) {
        Rng rng(stable_hash(cfg.seed, "absolute_continuity", idx));
        WeightSpec ws;
        if (idx > 0) ws = random_weight(rng, cfg.dim, cfg.p);
        const Field w = realize_weight(ws, g);
        const bool pairued = idx == 2;  // shrinking union of two cubes
        double prev_cap = kInf, prev_wm = kInf;
        // the scale ladder stops relative to the base resolution so that the
        // refinement pass compares the same family of sets
        for (int k = 0; 0.5 * cfg.rho * std::ldexp(1.0, -k) >= 2.0 * cfg.h; ++k) {
            const double r = 0.5 * cfg.rho * std::ldexp(1.0, -k);
            TargetSet E = TargetSet::from_box(g, {0.25 - r, 0.25 - r},
                                              {0.25 + r, 0.25 + r});
            if (pairued)
                E = unite(E, TargetSet::from_box(g, {-0.75 - r, -0.75 - r},
                                                 {-0.75 + r, -0.75 + r}));
            const double cap =
                capacity_primal(E, w, LocalRieszKernel{cfg.alpha, cfg.rho},
                                cfg.p, {}, cfg.solver)
                    .value;
            double wm = 0.0;
            for (std::size_t i : E.cells) wm += w.values[i];
            wm *= g.cell_volume();
            rs.rows.push_back(make_row(
                ws.describe() + (pairued ? ";union" : ";cube") + ";r=" + fmt(r),
                wm, cap));
            if (cap > prev_cap * (1.0 + 5e-3) + 1e-12)
                rs.fail("capacity rose while the set shrank");
            if (wm > prev_wm * (1.0 + 1e-12))
                rs.fail("weighted measure rose while the set shrank");
            prev_cap = cap;
            prev_wm = wm;
        }
    }
    return rs;
}

// Bessel capacities of growing cubes: vanishing trend under the decaying
// weight, sustained growth under the flat control
RowSet bessel_trivial_rows(const VerifyConfig& cfg, double h) {
    RowSet rs;
    const double hb = std::max(h, cfg.dim == 1 ? 1.0 / 16.0 : 0.25);
    std::vector<double> decay, flat;
    for (int N = 1; N <= 5; ++N) {
        const double half = N + 1.0;
        const Grid g = make_grid(cfg.dim, hb, {-half, -half}, {half, half});
        const Field wdec = weight_exp(g, -3.0 * cfg.p);
        const Field wone(g, 1.0);
        const TargetSet E = TargetSet::from_box(
            g, {-static_cast<double>(N), -static_cast<double>(N)},
            {static_cast<double>(N), static_cast<double>(N)});
        decay.push_back(
            bessel_capacity(E, wdec, cfg.p, cfg.alpha, cfg.solver).value);
        flat.push_back(
            bessel_capacity(E, wone, cfg.p, cfg.alpha, cfg.solver).value);
        rs.rows.push_back(make_row("Q_" + std::to_string(N), decay.back(),
                                   flat.back()));
    }
    for (int k = 1; k < 5; ++k)
        if (decay[k] > decay[k - 1] * (1.0 + 5e-3))
            rs.fail("decay-weight capacity rose at N=" + std::to_string(k + 1));
    if (!(decay[4] < 0.5 * decay[0]))
        rs.fail("decay-weight capacity did not halve from Q_1 to Q_5");
    // affine growth prediction for the control from N = 1..4
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double x = k + 1.0;
        sx += x;
        sy += flat[k];
        sxx += x * x;
        sxy += x * flat[k];
    }
    const double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
    const double icept = (sy - slope * sx) / 4.0;
    const double predicted = icept + slope * 5.0;
    if (!(flat[4] >= 0.9 * predicted))
        rs.fail("control capacity fell short of its growth prediction");
    return rs;
}

using RowFn = RowSet (*)(const VerifyConfig&, double);

struct CheckDef {
    const char* id;
    RowFn fn;
};

const CheckDef kChecks[] = {
    {"mw", mw_rows},
    {"scale_shift", scale_shift_rows},
    {"wolff_energies", wolff_energy_rows},
    {"weak_type_wolff", weak_type_rows},
    {"csi", csi_rows},
    {"maximal_choquet", maximal_choquet_rows},
    {"max_principle", max_principle_rows},
    {"fefferman_stein", fefferman_stein_rows},
    {"weight_algebra", weight_algebra_rows},
    {"absolute_continuity", absolute_continuity_rows},
    {"bessel_trivial", bessel_trivial_rows},
};

CheckReport finish(const std::string& id, const VerifyConfig& cfg,
                   const RowSet& base, const RowSet& fine) {
    CheckReport rep;
    rep.check_id = id;
    rep.seed = cfg.seed;
    rep.h = cfg.h;
    rep.h_fine = 0.5 * cfg.h;
    rep.instances = base.rows;
    rep.band_lo = cfg.band_lo;
    rep.band_hi = cfg.band_hi;
    bool finite = true;
    auto maxc = [&finite](const RowSet& rs) {
        double c = 0.0;
        for (const auto& r : rs.rows) {
            if (!std::isfinite(r.constant)) finite = false;
            c = std::max(c, r.constant);
        }
        return c;
    };
    rep.constant_h = maxc(base);
    rep.constant_h2 = maxc(fine);
    if (rep.constant_h > 0.0)
        rep.refinement_ratio = rep.constant_h2 / rep.constant_h;
    else
        rep.refinement_ratio = rep.constant_h2 > 0.0 ? kInf : 1.0;
    const bool band_ok = std::isfinite(rep.refinement_ratio) &&
                         rep.refinement_ratio >= cfg.band_lo &&
                         rep.refinement_ratio <= cfg.band_hi;
    rep.pass = finite && band_ok && base.extra_ok && fine.extra_ok;
    rep.note = base.note;
    if (!fine.note.empty()) {
        if (!rep.note.empty()) rep.note += "; ";
        rep.note += "fine: " + fine.note;
    }
    if (!band_ok) {
        if (!rep.note.empty()) rep.note += "; ";
        rep.note += "refinement ratio outside band";
    }
    return rep;
}

}  // namespace

const std::vector<std::string>& check_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& c : kChecks) v.push_back(c.id);
        return v;
    }();
    return ids;
}

CheckReport run_check(const std::string& id, const VerifyConfig& cfg) {
    for (const auto& c : kChecks)
        if (id == c.id)
            return finish(id, cfg, c.fn(cfg, cfg.h), c.fn(cfg, 0.5 * cfg.h));
    throw usage_error("unknown check id: " + id);
}

std::vector<CheckReport> run_all(const VerifyConfig& cfg) {
    std::vector<CheckReport> reports;
    for (const auto& c : kChecks) reports.push_back(run_check(c.id, cfg));
    return reports;
}

std::string reports_to_json(const std::vector<CheckReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& rep : reports) {
        ordered_json j;
        j["check_id"] = rep.check_id;
        j["seed"] = rep.seed;
        j["h"] = rep.h;
        j["h_fine"] = rep.h_fine;
        j["constant_h"] = rep.constant_h;
        j["constant_h2"] = rep.constant_h2;
        j["refinement_ratio"] = rep.refinement_ratio;
        j["band"] = {rep.band_lo, rep.band_hi};
        j["pass"] = rep.pass;
        j["note"] = rep.note;
        ordered_json rows = ordered_json::array();
        for (const auto& r : rep.instances) {
            ordered_json rj;
            rj["descriptor"] = r.descriptor;
            rj["lhs"] = r.lhs;
            rj["rhs"] = r.rhs;
            rj["constant"] = r.constant;
            rows.push_back(rj);
        }
        j["instances"] = rows;
        arr.push_back(j);
    }
    return arr.dump(2);
}

void write_reports(const std::string& path,
                   const std::vector<CheckReport>& reports) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << reports_to_json(reports) << "\n";
    if (!out) throw io_error("failed writing " + path);
}

}  // namespace capax
