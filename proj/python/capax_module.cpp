#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "capax/capacity.hpp"
#include "capax/choquet.hpp"
#include "capax/grid.hpp"
#include "capax/io.hpp"
#include "capax/maximal.hpp"
#include "capax/potentials.hpp"
#include "capax/verify.hpp"
#include "capax/weights.hpp"

namespace py = pybind11;
using namespace capax;

PYBIND11_MODULE(_capax, m) {
    m.doc() = "weighted local potential theory workbench";

    py::register_exception<usage_error>(m, "UsageError");
    py::register_exception<solver_error>(m, "SolverError");
    py::register_exception<io_error>(m, "IoError");

    py::class_<Grid>(m, "Grid")
        .def_readonly("dim", &Grid::dim)
        .def_readonly("h", &Grid::h)
        .def_readonly("origin", &Grid::origin)
        .def_readonly("shape", &Grid::shape)
        .def("cell_count", &Grid::cell_count)
        .def("cell_volume", &Grid::cell_volume)
        .def("center", &Grid::center)
        .def("__repr__", [](const Grid& g) {
            return "Grid(dim=" + std::to_string(g.dim) +
                   ", h=" + std::to_string(g.h) +
                   ", cells=" + std::to_string(g.cell_count()) + ")";
        });

    m.def(
        "make_grid",
        [](int dim, double h, double lo, double hi) {
            return make_grid(dim, h, {lo, lo}, {hi, hi});
        },
        py::arg("dim"), py::arg("h"), py::arg("lo"), py::arg("hi"));

    py::class_<Field>(m, "Field")
        .def(py::init<const Grid&, double>(), py::arg("grid"),
             py::arg("fill") = 0.0)
        .def_readonly("grid", &Field::grid)
        .def_readwrite("values", &Field::values);

    py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
        .def(py::init<const Grid&>())
        .def_readonly("grid", &DiscreteMeasure::grid)
        .def_readwrite("masses", &DiscreteMeasure::masses)
        .def("total", &DiscreteMeasure::total);

    py::enum_<CubePolicy>(m, "CubePolicy")
        .value("centered", CubePolicy::centered)
        .value("aligned", CubePolicy::aligned);

    py::class_<CubeSpec>(m, "CubeSpec")
        .def(py::init([](const Point& c, double r) {
                 return CubeSpec{c, r};
             }),
             py::arg("center"), py::arg("half_len"))
        .def_readonly("center", &CubeSpec::center)
        .def_readonly("half_len", &CubeSpec::half_len);

    py::class_<CubeLattice>(m, "CubeLattice")
        .def_readonly("rho", &CubeLattice::rho)
        .def("__len__", [](const CubeLattice& l) { return l.cubes.size(); });

    py::class_<LogTimeGrid>(m, "LogTimeGrid")
        .def(py::init([](double t_min, double t_max, int nodes_per_octave) {
                 return LogTimeGrid{t_min, t_max, nodes_per_octave};
             }),
             py::arg("t_min"), py::arg("t_max"), py::arg("nodes_per_octave") = 8)
        .def_static("standard", &LogTimeGrid::standard);

    m.def("enumerate_cubes", &enumerate_cubes);
    m.def("cube_average", &cube_average);
    m.def("cube_weighted_volume", &cube_weighted_volume);
    m.def("cube_mass", &cube_mass);

    // weights
    m.def("weight_power", &weight_power);
    m.def("weight_exp", &weight_exp);
    m.def("weight_product", &weight_product);
    m.def("weight_truncate", &weight_truncate);
    m.def("weight_interpolate", &weight_interpolate);
    m.def("dual_weight", &dual_weight);
    m.def("conjugate_exponent", &conjugate_exponent);

    py::class_<ApReport>(m, "ApReport")
        .def_readonly("p", &ApReport::p)
        .def_readonly("rho", &ApReport::rho)
        .def_readonly("constant", &ApReport::constant)
        .def_readonly("argmax_cube", &ApReport::argmax_cube);

    m.def("ap_loc_constant", &ap_loc_constant);
    m.def("ainf_loc_constant", &ainf_loc_constant);

    py::class_<ReverseHolderCert>(m, "ReverseHolderCert")
        .def_readonly("gamma", &ReverseHolderCert::gamma)
        .def_readonly("constant", &ReverseHolderCert::constant)
        .def_readonly("rho", &ReverseHolderCert::rho)
        .def_readonly("validated", &ReverseHolderCert::validated);

    m.def("reverse_holder_search", &reverse_holder_search);
    m.def("reverse_holder_constant", &reverse_holder_constant);

    py::class_<A1Decomposition>(m, "A1Decomposition")
        .def_readonly("k", &A1Decomposition::k)
        .def_readonly("f", &A1Decomposition::f)
        .def_readonly("epsilon", &A1Decomposition::epsilon);

    m.def("decompose_a1", &decompose_a1);
    m.def("extend_periodic", &extend_periodic);

    // maximal
    m.def("uncentered_local_maximal", &uncentered_local_maximal);
    m.def("centered_local_maximal", &centered_local_maximal);
    m.def("fractional_local_maximal", &fractional_local_maximal);
    m.def("measure_weighted_maximal", [](const Field& f, const DiscreteMeasure& mu,
                                         double rho) {
        const MeasureMaximalResult r = measure_weighted_maximal(f, mu, rho);
        return py::make_tuple(r.field, r.all_cubes_empty_somewhere);
    });

    // potentials
    m.def("riesz_convolve",
          py::overload_cast<const DiscreteMeasure&, double, double>(&riesz_convolve));
    m.def("riesz_convolve_density",
          py::overload_cast<const Field&, double, double>(&riesz_convolve));
    m.def("bessel_convolve",
          py::overload_cast<const DiscreteMeasure&, double>(&bessel_convolve));
    m.def("bessel_convolve_density",
          py::overload_cast<const Field&, double>(&bessel_convolve));
    m.def("nonlinear_potential_V", &nonlinear_potential_V);
    m.def("wolff_cal", &wolff_cal);
    m.def("wolff_variant", &wolff_variant);
    m.def("nonlinear_V_cal", &nonlinear_V_cal);

    // capacity
    py::class_<TargetSet>(m, "TargetSet")
        .def_readonly("grid", &TargetSet::grid)
        .def_readonly("cells", &TargetSet::cells)
        .def("empty", &TargetSet::empty)
        .def_static("from_box", &TargetSet::from_box)
        .def_static("from_cells", &TargetSet::from_cells)
        .def_static("from_indicator", &TargetSet::from_indicator);

    m.def("intersect_cube", &intersect_cube);
    m.def("unite", &unite);

    py::class_<SolverParams>(m, "SolverParams")
        .def(py::init([](double tol, std::size_t max_iter, std::size_t polish_every) {
                 return SolverParams{tol, max_iter, polish_every};
             }),
             py::arg("tol") = 1e-6, py::arg("max_iter") = 50000,
             py::arg("polish_every") = 20)
        .def_readwrite("tol", &SolverParams::tol)
        .def_readwrite("max_iter", &SolverParams::max_iter)
        .def_readwrite("polish_every", &SolverParams::polish_every);

    py::class_<CapacitySolution>(m, "CapacitySolution")
        .def_readonly("value", &CapacitySolution::value)
        .def_readonly("value_lower", &CapacitySolution::value_lower)
        .def_readonly("primal_f", &CapacitySolution::primal_f)
        .def_readonly("dual_mu", &CapacitySolution::dual_mu)
        .def_readonly("gap", &CapacitySolution::gap)
        .def_readonly("iterations", &CapacitySolution::iterations)
        .def_readonly("converged", &CapacitySolution::converged);

    m.def(
        "capacity_riesz",
        [](const TargetSet& E, const Field& w, double alpha, double p, double rho,
           const SolverParams& sp) {
            return capacity_primal(E, w, LocalRieszKernel{alpha, rho}, p, {}, sp);
        },
        py::arg("E"), py::arg("omega"), py::arg("alpha"), py::arg("p"),
        py::arg("rho"), py::arg("params") = SolverParams{});
    m.def("bessel_capacity", &bessel_capacity, py::arg("E"), py::arg("omega"),
          py::arg("p"), py::arg("alpha"), py::arg("params") = SolverParams{});
    m.def("capacity_variant_R", &capacity_variant_R, py::arg("E"),
          py::arg("omega"), py::arg("alpha"), py::arg("p"), py::arg("rho"),
          py::arg("params") = SolverParams{});
    m.def("capacity_cube_formula", &capacity_cube_formula);

    py::class_<EquilibriumMeasure>(m, "EquilibriumMeasure")
        .def_readonly("mu", &EquilibriumMeasure::mu)
        .def_readonly("capacity", &EquilibriumMeasure::capacity)
        .def_readonly("max_potential_on_support",
                      &EquilibriumMeasure::max_potential_on_support)
        .def_readonly("min_potential_on_set",
                      &EquilibriumMeasure::min_potential_on_set);

    m.def("equilibrium_measure", &equilibrium_measure, py::arg("E"),
          py::arg("omega"), py::arg("alpha"), py::arg("p"), py::arg("rho"),
          py::arg("params") = SolverParams{});

    py::class_<ThinnessReport>(m, "ThinnessReport")
        .def_readonly("a", &ThinnessReport::a)
        .def_readonly("scales", &ThinnessReport::scales)
        .def_readonly("capacities", &ThinnessReport::capacities)
        .def_readonly("divergence_partial", &ThinnessReport::divergence_partial)
        .def_readonly("thinness_partial", &ThinnessReport::thinness_partial);

    m.def("thinness_diagnostic", &thinness_diagnostic, py::arg("E"), py::arg("a"),
          py::arg("omega"), py::arg("alpha"), py::arg("p"), py::arg("rho"),
          py::arg("kmax"), py::arg("params") = SolverParams{});

    // choquet
    py::class_<CapacityOracle>(m, "CapacityOracle")
        .def(py::init<Grid, CapacityOracle::SetFunction, double>(),
             py::arg("grid"), py::arg("fn"), py::arg("slack") = 1e-5)
        .def("__call__", &CapacityOracle::operator())
        .def("solves", &CapacityOracle::solves)
        .def("monotonicity_ok", &CapacityOracle::monotonicity_ok);

    m.def("riesz_capacity_oracle", &riesz_capacity_oracle, py::arg("grid"),
          py::arg("omega"), py::arg("alpha"), py::arg("p"), py::arg("rho"),
          py::arg("params") = SolverParams{});
    m.def("choquet_integral", &choquet_integral);
    m.def("weak_quasinorm", &weak_quasinorm);
    m.def(
        "c_functional",
        [](const Field& phi, const Field& w, double alpha, double p, double rho,
           const SolverParams& sp) {
            return c_functional(phi, w, LocalRieszKernel{alpha, rho}, p, sp);
        },
        py::arg("phi"), py::arg("omega"), py::arg("alpha"), py::arg("p"),
        py::arg("rho"), py::arg("params") = SolverParams{});

    // verify
    py::class_<VerifyConfig>(m, "VerifyConfig")
        .def(py::init<>())
        .def_readwrite("seed", &VerifyConfig::seed)
        .def_readwrite("dim", &VerifyConfig::dim)
        .def_readwrite("h", &VerifyConfig::h)
        .def_readwrite("box", &VerifyConfig::box)
        .def_readwrite("rho", &VerifyConfig::rho)
        .def_readwrite("alpha", &VerifyConfig::alpha)
        .def_readwrite("p", &VerifyConfig::p)
        .def_readwrite("q", &VerifyConfig::q)
        .def_readwrite("instances", &VerifyConfig::instances)
        .def_readwrite("band_lo", &VerifyConfig::band_lo)
        .def_readwrite("band_hi", &VerifyConfig::band_hi)
        .def_readwrite("solver", &VerifyConfig::solver);

    py::class_<CheckInstance>(m, "CheckInstance")
        .def_readonly("descriptor", &CheckInstance::descriptor)
        .def_readonly("lhs", &CheckInstance::lhs)
        .def_readonly("rhs", &CheckInstance::rhs)
        .def_readonly("constant", &CheckInstance::constant);

    py::class_<CheckReport>(m, "CheckReport")
        .def_readonly("check_id", &CheckReport::check_id)
        .def_readonly("seed", &CheckReport::seed)
        .def_readonly("h", &CheckReport::h)
        .def_readonly("h_fine", &CheckReport::h_fine)
        .def_readonly("instances", &CheckReport::instances)
        .def_readonly("constant_h", &CheckReport::constant_h)
        .def_readonly("constant_h2", &CheckReport::constant_h2)
        .def_readonly("refinement_ratio", &CheckReport::refinement_ratio)
        .def_readonly("pass_", &CheckReport::pass)
        .def_readonly("note", &CheckReport::note);

    m.def("check_ids", [] { return check_ids(); });
    m.def("run_check", &run_check);
    m.def("run_all", &run_all);
    m.def("reports_to_json", &reports_to_json);

    // io
    m.def("read_field", &read_field);
    m.def("write_field", &write_field);
    m.def("read_measure", &read_measure);
    m.def("write_measure", &write_measure);
}
