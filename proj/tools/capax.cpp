// capax: weighted local potential theory workbench.
// Subcommands: grid, weight, maximal, potential, capacity, choquet, verify.
// Exit codes: 0 ok, 1 failed verify verdict, 2 usage, 3 solver, 4 io.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "capax/capacity.hpp"
#include "capax/choquet.hpp"
#include "capax/common.hpp"
#include "capax/grid.hpp"
#include "capax/io.hpp"
#include "capax/maximal.hpp"
#include "capax/potentials.hpp"
#include "capax/verify.hpp"
#include "capax/weights.hpp"

namespace {

using nlohmann::ordered_json;
using namespace capax;

struct GridOpts {
    int dim = 1;
    double h = 1.0 / 64.0;
    std::vector<double> box{-2.0, 2.0};
};

void add_grid_opts(CLI::App* cmd, GridOpts& g) {
    cmd->add_option("--dim", g.dim, "dimension, 1 or 2")->check(CLI::Range(1, 2));
    cmd->add_option("--h", g.h, "cell size");
    cmd->add_option("--box", g.box, "box lo,hi applied per axis")
        ->expected(2)
        ->delimiter(',');
}

Grid build_grid(const GridOpts& g) {
    if (g.box.size() != 2 || !(g.box[0] < g.box[1]))
        throw usage_error("--box needs lo < hi");
    return make_grid(g.dim, g.h, {g.box[0], g.box[0]}, {g.box[1], g.box[1]});
}

struct SolverOpts {
    SolverParams params;
};

void add_solver_opts(CLI::App* cmd, SolverOpts& s) {
    cmd->add_option("--tol", s.params.tol, "relative duality gap target");
    cmd->add_option("--max-iter", s.params.max_iter, "iteration cap");
    cmd->add_option("--polish-every", s.params.polish_every,
                    "iterations between feasibility polishes");
}

std::map<std::string, double> parse_params(const std::string& s,
                                           const std::string& ctx) {
    std::map<std::string, double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw usage_error(ctx + ": expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string val = item.substr(eq + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument(val);
            out[key] = v;
        } catch (const std::exception&) {
            throw usage_error(ctx + ": bad number '" + val + "' for " + key);
        }
    }
    return out;
}

double need_param(const std::map<std::string, double>& params,
                  const std::string& key, const std::string& ctx) {
    const auto it = params.find(key);
    if (it == params.end()) throw usage_error(ctx + ": missing parameter " + key);
    return it->second;
}

// weight grammar: const[:v=1] | power:a=0.5 | exp:c=1 | product:a=..,c=..
// (|x|^a times the (1-p) power of e^{c|x|}) | truncexp:c=..,k=.. | file:path
Field parse_weight(const std::string& spec, const Grid& g, double p) {
    const auto colon = spec.find(':');
    const std::string name =
        colon == std::string::npos ? spec : spec.substr(0, colon);
    const std::string rest =
        colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "file") {
        if (rest.empty()) throw usage_error("weight file: needs a path");
        Field w = read_field(rest);
        if (!w.grid.same_layout(g))
            throw usage_error("weight file grid does not match the run grid");
        for (double v : w.values)
            if (!(v > 0.0) || !std::isfinite(v))
                throw usage_error("weight file has nonpositive values");
        return w;
    }
    const auto params = parse_params(rest, "weight " + name);
    if (name == "const" || name == "one") {
        const auto it = params.find("v");
        const double v = it == params.end() ? 1.0 : it->second;
        if (!(v > 0.0)) throw usage_error("weight const: v must be positive");
        return Field(g, v);
    }
    if (name == "power") return weight_power(g, need_param(params, "a", name));
    if (name == "exp") return weight_exp(g, need_param(params, "c", name));
    if (name == "product")
        return weight_product(weight_power(g, need_param(params, "a", name)),
                              weight_exp(g, need_param(params, "c", name)), p);
    if (name == "truncexp")
        return weight_truncate(weight_exp(g, need_param(params, "c", name)),
                               need_param(params, "k", name));
    throw usage_error("unknown weight '" + name +
                      "' (const, power, exp, product, truncexp, file)");
}

// set grammar: box:a,b (per axis; 2d also accepts lox,loy,hix,hiy) | cells:path
TargetSet parse_set(const std::string& spec, const Grid& g) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw usage_error("--set needs box:... or cells:...");
    const std::string name = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (name == "cells") {
        std::ifstream in(rest);
        if (!in) throw io_error("cannot open cell list " + rest);
        std::vector<std::size_t> idx;
        long long v = 0;
        while (in >> v) {
            if (v < 0) throw io_error("negative cell index in " + rest);
            idx.push_back(static_cast<std::size_t>(v));
        }
        if (!in.eof()) throw io_error("non-integer token in " + rest);
        return TargetSet::from_cells(g, std::move(idx));
    }
    if (name != "box")
        throw usage_error("unknown set kind '" + name + "' (box, cells)");
    std::vector<double> nums;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            nums.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw usage_error("box: bad number '" + item + "'");
        }
    }
    if (nums.size() == 2)
        return TargetSet::from_box(g, {nums[0], nums[0]}, {nums[1], nums[1]});
    if (nums.size() == 4 && g.dim == 2)
        return TargetSet::from_box(g, {nums[0], nums[1]}, {nums[2], nums[3]});
    throw usage_error("box: expected a,b (or lox,loy,hix,hiy in 2d)");
}

void emit(const std::string& out_path, const std::string& data) {
    if (out_path.empty()) {
        std::cout << data;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw io_error("cannot open " + out_path + " for writing");
    out << data;
    if (!out) throw io_error("failed writing " + out_path);
}

// summaries go to stdout when data went to a file, stderr when data went to
// stdout, so piped output stays clean
void summarize(const std::string& out_path, const std::string& line) {
    (out_path.empty() ? std::cerr : std::cout) << line << "\n";
}

std::string arrow(const std::string& out_path) {
    return out_path.empty() ? "" : " -> " + out_path;
}

double field_max(const Field& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, v);
    return m;
}

// ------------------------------------------------------------------ grid

int run_grid(const GridOpts& gopts, double value, const std::string& out) {
    const Grid g = build_grid(gopts);
    if (!out.empty()) write_field(out, Field(g, value));
    std::cout << "grid: dim=" << g.dim << " h=" << g.h << " cells="
              << g.cell_count() << " box=[" << gopts.box[0] << ","
              << gopts.box[1] << "]" << arrow(out) << "\n";
    return 0;
}

// ------------------------------------------------------------------ weight

ordered_json cube_json(const CubeSpec& q, int dim) {
    ordered_json j;
    j["center"] = dim == 2 ? ordered_json{q.center[0], q.center[1]}
                           : ordered_json{q.center[0]};
    j["half_len"] = q.half_len;
    return j;
}

int run_weight(const GridOpts& gopts, const std::string& spec,
               std::vector<double> ps, double rho, const std::string& policy,
               bool with_ainf, bool with_rh, const std::string& format,
               const std::string& out) {
    const Grid g = build_grid(gopts);
    if (ps.empty()) ps.push_back(2.0);
    const CubePolicy pol =
        policy == "centered" ? CubePolicy::centered : CubePolicy::aligned;
    const CubeLattice lat = enumerate_cubes(g, rho, pol);
    const Field w = parse_weight(spec, g, ps.front());
    std::vector<ApReport> rows;
    for (double p : ps) {
        if (!(p >= 1.0)) throw usage_error("--p must be >= 1");
        rows.push_back(ap_loc_constant(w, p, lat));
    }
    if (with_ainf) rows.push_back(ainf_loc_constant(w, lat));
    double maxc = 0.0;
    for (const auto& r : rows) maxc = std::max(maxc, r.constant);

    std::string data;
    if (format == "csv") {
        if (with_rh)
            throw usage_error("--reverse-holder needs --format json");
        std::ostringstream os;
        os.precision(17);
        os << "p,rho,constant,cube_cx,cube_cy,cube_r\n";
        for (const auto& r : rows) {
            if (std::isinf(r.p))
                os << "inf";
            else
                os << r.p;
            os << "," << r.rho << "," << r.constant << "," << r.argmax_cube.center[0]
               << "," << r.argmax_cube.center[1] << "," << r.argmax_cube.half_len
               << "\n";
        }
        data = os.str();
    } else {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json j;
            if (std::isinf(r.p))
                j["p"] = "inf";
            else
                j["p"] = r.p;
            j["rho"] = r.rho;
            j["constant"] = r.constant;
            j["cube"] = cube_json(r.argmax_cube, g.dim);
            arr.push_back(j);
        }
        ordered_json top;
        top["weight"] = spec;
        top["policy"] = policy;
        top["rows"] = arr;
        if (with_rh) {
            const ReverseHolderCert cert =
                reverse_holder_search(w, ps.front(), lat);
            ordered_json rj;
            rj["gamma"] = cert.gamma;
            rj["constant"] = cert.constant;
            rj["rho"] = cert.rho;
            rj["validated"] = cert.validated;
            top["reverse_holder"] = rj;
        }
        data = top.dump(2) + "\n";
    }
    emit(out, data);
    std::ostringstream line;
    line << "weight " << spec << ": " << rows.size() << " rows, max constant="
         << maxc << arrow(out);
    summarize(out, line.str());
    return 0;
}

// ------------------------------------------------------------------ maximal

int run_maximal(const std::string& in, const std::string& mu_path,
                const std::string& variant, double rho, double alpha,
                const std::string& policy, const std::string& out) {
    Field result;
    std::string note;
    if (variant == "fractional") {
        const DiscreteMeasure mu = read_measure(in);
        result = fractional_local_maximal(mu, alpha, rho);
    } else if (variant == "centered") {
        result = centered_local_maximal(read_field(in), rho);
    } else if (variant == "weighted") {
        if (mu_path.empty())
            throw usage_error("--variant weighted needs --mu measure");
        const Field f = read_field(in);
        const DiscreteMeasure mu = read_measure(mu_path);
        if (!mu.grid.same_layout(f.grid))
            throw usage_error("--mu grid does not match the input field");
        const MeasureMaximalResult r = measure_weighted_maximal(f, mu, rho);
        result = r.field;
        if (r.all_cubes_empty_somewhere) note = " (empty cubes at some cells)";
    } else if (variant == "uncentered") {
        const Field f = read_field(in);
        const CubePolicy pol =
            policy == "aligned" ? CubePolicy::aligned : CubePolicy::centered;
        result = uncentered_local_maximal(f, rho, enumerate_cubes(f.grid, rho, pol));
    } else {
        throw usage_error("unknown variant '" + variant +
                          "' (uncentered, centered, fractional, weighted)");
    }
    write_field(out, result);
    std::cout << "maximal " << variant << ": rho=" << rho
              << " max=" << field_max(result) << note << arrow(out) << "\n";
    return 0;
}

// ------------------------------------------------------------------ potential

int run_potential(const std::string& mu_path, const std::string& in,
                  const std::string& kind, double alpha, double p, double rho,
                  const std::string& weight_spec, const std::string& out) {
    const bool needs_measure =
        kind == "nonlinear" || kind == "wolff" || kind == "wolff-variant" ||
        kind == "vcal";
    if (mu_path.empty() && (needs_measure || in.empty()))
        throw usage_error("potential " + kind + " needs --mu (a measure file)");
    Field result;
    if (kind == "riesz" || kind == "bessel") {
        if (!mu_path.empty()) {
            const DiscreteMeasure mu = read_measure(mu_path);
            result = kind == "riesz" ? riesz_convolve(mu, alpha, rho)
                                     : bessel_convolve(mu, alpha);
        } else {
            const Field f = read_field(in);
            result = kind == "riesz" ? riesz_convolve(f, alpha, rho)
                                     : bessel_convolve(f, alpha);
        }
    } else if (needs_measure) {
        const DiscreteMeasure mu = read_measure(mu_path);
        const Field w = parse_weight(weight_spec, mu.grid, p);
        const LogTimeGrid tg = LogTimeGrid::standard(mu.grid.h, rho);
        if (kind == "nonlinear")
            result = nonlinear_potential_V(mu, w, alpha, p, rho);
        else if (kind == "wolff")
            result = wolff_cal(mu, w, alpha, p, rho, tg);
        else if (kind == "wolff-variant")
            result = wolff_variant(mu, w, alpha, p, rho, tg);
        else
            result = nonlinear_V_cal(mu, w, alpha, p, rho, tg);
    } else {
        throw usage_error("unknown kind '" + kind +
                          "' (riesz, bessel, nonlinear, wolff, wolff-variant, vcal)");
    }
    write_field(out, result);
    std::cout << "potential " << kind << ": max=" << field_max(result)
              << arrow(out) << "\n";
    return 0;
}

// ------------------------------------------------------------------ capacity

ordered_json solver_json(const SolverParams& sp) {
    ordered_json j;
    j["tol"] = sp.tol;
    j["max_iter"] = sp.max_iter;
    j["polish_every"] = sp.polish_every;
    return j;
}

int run_capacity(const GridOpts& gopts, const std::string& set_spec,
                 const std::string& weight_spec, double alpha, double p,
                 double rho, const std::string& kernel, const SolverOpts& sopts,
                 const std::string& equilibrium_out, const std::string& out) {
    if (!(p > 1.0)) throw usage_error("capacity needs p > 1");
    const Grid g = build_grid(gopts);
    const TargetSet E = parse_set(set_spec, g);
    const Field w = parse_weight(weight_spec, g, p);

    CapacitySolution sol;
    if (kernel == "riesz")
        sol = capacity_primal(E, w, LocalRieszKernel{alpha, rho}, p, {},
                              sopts.params);
    else if (kernel == "bessel")
        sol = bessel_capacity(E, w, p, alpha, sopts.params);
    else if (kernel == "variant")
        sol = capacity_variant_R(E, w, alpha, p, rho, sopts.params);
    else
        throw usage_error("unknown kernel '" + kernel +
                          "' (riesz, bessel, variant)");

    if (!equilibrium_out.empty()) {
        if (kernel != "riesz")
            throw usage_error("--equilibrium needs --kernel riesz");
        const EquilibriumMeasure eq =
            equilibrium_measure(E, w, alpha, p, rho, sopts.params);
        write_measure(equilibrium_out, eq.mu);
    }

    ordered_json j;
    j["value_upper"] = sol.value;
    j["value_lower"] = sol.value_lower;
    j["gap"] = sol.gap;
    j["iters"] = sol.iterations;
    j["converged"] = sol.converged;
    ordered_json cfg;
    cfg["set"] = set_spec;
    cfg["weight"] = weight_spec;
    cfg["kernel"] = kernel;
    cfg["alpha"] = alpha;
    cfg["p"] = p;
    cfg["rho"] = rho;
    cfg["dim"] = g.dim;
    cfg["h"] = g.h;
    cfg["box"] = {gopts.box[0], gopts.box[1]};
    cfg["solver"] = solver_json(sopts.params);
    j["config"] = cfg;
    emit(out, j.dump(2) + "\n");

    std::ostringstream line;
    line << "capacity " << kernel << ": value in [" << sol.value_lower << ","
         << sol.value << "], gap=" << sol.gap << ", iters=" << sol.iterations
         << (sol.converged ? "" : " (gap target missed)") << arrow(out);
    summarize(out, line.str());
    return 0;
}

// ------------------------------------------------------------------ choquet

int run_choquet(const std::string& in, const std::string& weight_spec,
                double alpha, double p, double rho, double q,
                const std::string& kernel, const SolverOpts& sopts, bool weak,
                const std::string& format, const std::string& out) {
    if (!(p > 1.0)) throw usage_error("choquet needs p > 1");
    if (!(q > 0.0)) throw usage_error("choquet needs q > 0");
    const Field f = read_field(in);
    const Grid& g = f.grid;
    const Field w = parse_weight(weight_spec, g, p);
    for (double v : f.values)
        if (v < 0.0 || !std::isfinite(v))
            throw usage_error("choquet input must be nonnegative and finite");

    CapacityOracle C =
        kernel == "variant"
            ? CapacityOracle(
                  g,
                  [&, alpha, p, rho](const TargetSet& E) {
                      return capacity_variant_R(E, w, alpha, p, rho, sopts.params)
                          .value;
                  },
                  std::max(1e-5, 10.0 * sopts.params.tol))
            : riesz_capacity_oracle(g, w, alpha, p, rho, sopts.params);
    if (kernel != "riesz" && kernel != "variant")
        throw usage_error("unknown kernel '" + kernel + "' (riesz, variant)");

    // distinct positive levels, ascending; the layer cake is exact on them
    std::vector<double> levels;
    for (double v : f.values)
        if (v > 0.0) levels.push_back(v);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    double value = 0.0;
    double prev = 0.0;
    std::vector<std::array<double, 3>> breakdown;  // level, capacity, term
    for (double v : levels) {
        const double cap = C(TargetSet::from_indicator(f, prev));
        const double term = (std::pow(v, q) - std::pow(prev, q)) * cap;
        breakdown.push_back({v, cap, term});
        value += term;
        prev = v;
    }
    const double weak_value = weak ? weak_quasinorm(f, q, C) : 0.0;

    std::string data;
    if (format == "json") {
        ordered_json j;
        j["q"] = q;
        j["value"] = value;
        if (weak) j["weak_quasinorm"] = weak_value;
        ordered_json rows = ordered_json::array();
        for (const auto& b : breakdown)
            rows.push_back({{"level", b[0]}, {"capacity", b[1]}, {"term", b[2]}});
        j["levels"] = rows;
        j["solves"] = C.solves();
        data = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os.precision(17);
        os << "level,capacity,term\n";
        for (const auto& b : breakdown)
            os << b[0] << "," << b[1] << "," << b[2] << "\n";
        os << "total,," << value << "\n";
        data = os.str();
    }
    emit(out, data);
    std::ostringstream line;
    line << "choquet q=" << q << ": value=" << value;
    if (weak) line << " weak=" << weak_value;
    line << " (" << levels.size() << " levels, " << C.solves() << " solves)"
         << arrow(out);
    summarize(out, line.str());
    return 0;
}

// ------------------------------------------------------------------ verify

int run_verify(const VerifyConfig& cfg, const std::string& check,
               const std::string& out) {
    std::vector<CheckReport> reports;
    if (check == "all")
        reports = run_all(cfg);
    else
        reports.push_back(run_check(check, cfg));

    ordered_json top;
    ordered_json cj;
    cj["check"] = check;
    cj["seed"] = cfg.seed;
    cj["dim"] = cfg.dim;
    cj["h"] = cfg.h;
    cj["box"] = cfg.box;
    cj["rho"] = cfg.rho;
    cj["alpha"] = cfg.alpha;
    cj["p"] = cfg.p;
    cj["q"] = cfg.q;
    cj["instances"] = cfg.instances;
    cj["band"] = {cfg.band_lo, cfg.band_hi};
    cj["solver"] = solver_json(cfg.solver);
    top["config"] = cj;
    top["checks"] = ordered_json::parse(reports_to_json(reports));
    emit(out, top.dump(2) + "\n");

    std::size_t passed = 0;
    std::string failing;
    for (const auto& r : reports) {
        if (r.pass) {
            ++passed;
        } else {
            if (!failing.empty()) failing += ", ";
            failing += r.check_id;
        }
    }
    std::ostringstream line;
    line << "verify: " << passed << "/" << reports.size() << " checks passed";
    if (!failing.empty()) line << " (failing: " << failing << ")";
    line << arrow(out);
    summarize(out, line.str());
    return failing.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capax: weighted local potential theory workbench"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file, flags override");
    app.set_version_flag("--version", "capax 0.1.0");
    int schema = 1;
    app.add_option("--schema", schema, "config schema version (must be 1)");

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "build a grid, write a constant field");
    GridOpts grid_g;
    double grid_value = 1.0;
    std::string grid_out;
    add_grid_opts(grid_cmd, grid_g);
    grid_cmd->add_option("--value", grid_value, "fill value");
    grid_cmd->add_option("--out", grid_out, "output field file");

    // weight
    auto* weight_cmd = app.add_subcommand("weight", "Muckenhoupt constants of a weight");
    GridOpts weight_g;
    std::string weight_spec = "const";
    std::vector<double> weight_ps;
    double weight_rho = 0.5;
    std::string weight_policy = "aligned";
    bool weight_ainf = false, weight_rh = false;
    std::string weight_format = "json", weight_out;
    add_grid_opts(weight_cmd, weight_g);
    weight_cmd->add_option("--spec", weight_spec, "weight, e.g. power:a=0.5");
    weight_cmd->add_option("--p", weight_ps, "exponents, one row each")
        ->delimiter(',');
    weight_cmd->add_option("--rho", weight_rho, "locality scale");
    weight_cmd->add_option("--policy", weight_policy, "cube family")
        ->check(CLI::IsMember({"aligned", "centered"}));
    weight_cmd->add_flag("--ainf", weight_ainf, "add the A-infinity row");
    weight_cmd->add_flag("--reverse-holder", weight_rh,
                         "add the reverse Holder certificate (json only)");
    weight_cmd->add_option("--format", weight_format)
        ->check(CLI::IsMember({"json", "csv"}));
    weight_cmd->add_option("--out", weight_out, "output file (default stdout)");

    // maximal
    auto* maximal_cmd = app.add_subcommand("maximal", "local maximal functions");
    std::string maximal_in, maximal_mu, maximal_variant = "uncentered";
    std::string maximal_policy = "centered", maximal_out;
    double maximal_rho = 0.5, maximal_alpha = 0.5;
    maximal_cmd->add_option("--in", maximal_in, "input field (measure for fractional)")
        ->required();
    maximal_cmd->add_option("--out", maximal_out, "output field file")->required();
    maximal_cmd->add_option("--rho", maximal_rho, "locality scale");
    maximal_cmd->add_option("--variant", maximal_variant)
        ->check(CLI::IsMember({"uncentered", "centered", "fractional", "weighted"}));
    maximal_cmd->add_option("--alpha", maximal_alpha, "order of the fractional variant");
    maximal_cmd->add_option("--mu", maximal_mu, "measure for the weighted variant");
    maximal_cmd->add_option("--policy", maximal_policy, "cube family for uncentered")
        ->check(CLI::IsMember({"aligned", "centered"}));

    // potential
    auto* pot_cmd = app.add_subcommand("potential", "kernel and Wolff potentials");
    std::string pot_mu, pot_in, pot_kind = "riesz", pot_weight = "const", pot_out;
    double pot_alpha = 0.5, pot_p = 2.0, pot_rho = 0.5;
    pot_cmd->add_option("--mu", pot_mu, "input measure file");
    pot_cmd->add_option("--in", pot_in, "input density field (riesz, bessel)");
    pot_cmd->add_option("--kind", pot_kind)
        ->check(CLI::IsMember(
            {"riesz", "bessel", "nonlinear", "wolff", "wolff-variant", "vcal"}));
    pot_cmd->add_option("--alpha", pot_alpha, "kernel order");
    pot_cmd->add_option("--p", pot_p, "nonlinearity exponent");
    pot_cmd->add_option("--rho", pot_rho, "truncation scale");
    pot_cmd->add_option("--weight", pot_weight, "weight spec for nonlinear kinds");
    pot_cmd->add_option("--out", pot_out, "output field file")->required();

    // capacity
    auto* cap_cmd = app.add_subcommand("capacity", "weighted capacities with certified bounds");
    GridOpts cap_g;
    std::string cap_set, cap_weight = "const", cap_kernel = "riesz";
    std::string cap_eq_out, cap_out;
    double cap_alpha = 0.5, cap_p = 2.0, cap_rho = 0.5;
    SolverOpts cap_solver;
    add_grid_opts(cap_cmd, cap_g);
    cap_cmd->add_option("--set", cap_set, "target set, box:a,b or cells:file")
        ->required();
    cap_cmd->add_option("--weight", cap_weight, "weight spec");
    cap_cmd->add_option("--alpha", cap_alpha, "kernel order");
    cap_cmd->add_option("--p", cap_p, "energy exponent");
    cap_cmd->add_option("--rho", cap_rho, "truncation scale");
    cap_cmd->add_option("--kernel", cap_kernel)
        ->check(CLI::IsMember({"riesz", "bessel", "variant"}));
    add_solver_opts(cap_cmd, cap_solver);
    cap_cmd->add_option("--equilibrium", cap_eq_out,
                        "write the equilibrium measure (riesz kernel)");
    cap_cmd->add_option("--out", cap_out, "output json (default stdout)");

    // choquet
    auto* cho_cmd = app.add_subcommand("choquet", "Choquet integral against a capacity");
    std::string cho_in, cho_weight = "const", cho_kernel = "riesz", cho_out;
    std::string cho_format = "csv";
    double cho_alpha = 0.5, cho_p = 2.0, cho_rho = 0.5, cho_q = 1.0;
    bool cho_weak = false;
    SolverOpts cho_solver;
    cho_cmd->add_option("--in", cho_in, "input field file")->required();
    cho_cmd->add_option("--weight", cho_weight, "weight spec");
    cho_cmd->add_option("--alpha", cho_alpha, "kernel order");
    cho_cmd->add_option("--p", cho_p, "capacity exponent");
    cho_cmd->add_option("--rho", cho_rho, "truncation scale");
    cho_cmd->add_option("--q", cho_q, "integral exponent");
    cho_cmd->add_option("--kernel", cho_kernel)
        ->check(CLI::IsMember({"riesz", "variant"}));
    cho_cmd->add_flag("--weak", cho_weak, "also compute the weak quasinorm");
    add_solver_opts(cho_cmd, cho_solver);
    cho_cmd->add_option("--format", cho_format)
        ->check(CLI::IsMember({"json", "csv"}));
    cho_cmd->add_option("--out", cho_out, "output file (default stdout)");

    // verify
    auto* ver_cmd = app.add_subcommand("verify", "empirical constants for the inequality battery");
    VerifyConfig ver_cfg;
    std::string ver_check = "all", ver_out = "report.json";
    std::vector<double> ver_band{ver_cfg.band_lo, ver_cfg.band_hi};
    bool ver_list = false;
    ver_cmd->add_option("--check", ver_check, "check id or 'all'");
    ver_cmd->add_option("--seed", ver_cfg.seed, "instance seed");
    ver_cmd->add_option("--h", ver_cfg.h, "base cell size (refined pass uses h/2)");
    ver_cmd->add_option("--dim", ver_cfg.dim, "dimension")->check(CLI::Range(1, 2));
    ver_cmd->add_option("--box", ver_cfg.box, "half-width of the box [-box, box]");
    ver_cmd->add_option("--rho", ver_cfg.rho, "locality scale");
    ver_cmd->add_option("--alpha", ver_cfg.alpha, "kernel order");
    ver_cmd->add_option("--p", ver_cfg.p, "energy exponent");
    ver_cmd->add_option("--q", ver_cfg.q, "Choquet exponent (maximal_choquet)");
    ver_cmd->add_option("--instances", ver_cfg.instances,
                        "instances per check, 0 = per-check default");
    ver_cmd->add_option("--band", ver_band, "refinement ratio band lo,hi")
        ->expected(2)
        ->delimiter(',');
    ver_cmd->add_option("--tol", ver_cfg.solver.tol, "solver gap target");
    ver_cmd->add_option("--max-iter", ver_cfg.solver.max_iter, "solver iteration cap");
    ver_cmd->add_option("--polish-every", ver_cfg.solver.polish_every,
                        "solver polish cadence");
    ver_cmd->add_option("--out", ver_out, "report path");
    ver_cmd->add_flag("--list", ver_list, "print check ids and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (schema != 1) throw usage_error("unsupported config schema version");
        if (grid_cmd->parsed()) return run_grid(grid_g, grid_value, grid_out);
        if (weight_cmd->parsed())
            return run_weight(weight_g, weight_spec, weight_ps, weight_rho,
                              weight_policy, weight_ainf, weight_rh,
                              weight_format, weight_out);
        if (maximal_cmd->parsed())
            return run_maximal(maximal_in, maximal_mu, maximal_variant,
                               maximal_rho, maximal_alpha, maximal_policy,
                               maximal_out);
        if (pot_cmd->parsed())
            return run_potential(pot_mu, pot_in, pot_kind, pot_alpha, pot_p,
                                 pot_rho, pot_weight, pot_out);
        if (cap_cmd->parsed())
            return run_capacity(cap_g, cap_set, cap_weight, cap_alpha, cap_p,
                                cap_rho, cap_kernel, cap_solver, cap_eq_out,
                                cap_out);
        if (cho_cmd->parsed())
            return run_choquet(cho_in, cho_weight, cho_alpha, cho_p, cho_rho,
                               cho_q, cho_kernel, cho_solver, cho_weak,
                               cho_format, cho_out);
        if (ver_cmd->parsed()) {
            if (ver_list) {
                for (const auto& id : check_ids()) std::cout << id << "\n";
                return 0;
            }
            if (ver_band.size() == 2) {
                ver_cfg.band_lo = ver_band[0];
                ver_cfg.band_hi = ver_band[1];
            }
            return run_verify(ver_cfg, ver_check, ver_out);
        }
        throw usage_error("no subcommand");
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
