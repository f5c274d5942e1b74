"""Smoke test for the _capax module: one pass over the main operations."""

import os
import tempfile

import _capax as cx


def main():
    g = cx.make_grid(1, 1.0 / 32.0, -1.0, 1.0)
    assert g.cell_count() == 64
    assert abs(g.cell_volume() - 1.0 / 32.0) < 1e-15

    one = cx.Field(g, 1.0)
    lat = cx.enumerate_cubes(g, 0.5, cx.CubePolicy.aligned)
    rep = cx.ap_loc_constant(one, 2.0, lat)
    assert abs(rep.constant - 1.0) < 1e-12, rep.constant

    w = cx.weight_exp(g, 1.0)
    ap = cx.ap_loc_constant(w, 2.0, lat)
    assert ap.constant > 1.0
    ai = cx.ainf_loc_constant(w, lat)
    assert ai.constant <= ap.constant + 1e-12

    dual = cx.ap_loc_constant(cx.dual_weight(w, 2.0), 2.0, lat)
    assert abs(dual.constant - ap.constant) < 1e-10 * ap.constant

    mu = cx.DiscreteMeasure(g)
    masses = list(mu.masses)
    masses[32] = 1.0
    mu.masses = masses
    assert abs(mu.total() - 1.0) < 1e-15

    pot = cx.riesz_convolve(mu, 0.5, 0.5)
    assert max(pot.values) > 0.0

    mf = cx.uncentered_local_maximal(one, 0.5, lat)
    assert all(abs(v - 1.0) < 1e-12 for v in mf.values)

    frac = cx.fractional_local_maximal(mu, 0.5, 0.5)
    assert max(frac.values) > 0.0

    tg = cx.LogTimeGrid.standard(g.h, 0.5)
    wolff = cx.wolff_cal(mu, one, 0.5, 2.0, 0.5, tg)
    assert max(wolff.values) > 0.0

    E = cx.TargetSet.from_box(g, (-0.25, -0.25), (0.25, 0.25))
    sp = cx.SolverParams(tol=1e-4, max_iter=3000)
    sol = cx.capacity_riesz(E, one, 0.5, 2.0, 0.5, sp)
    assert sol.value >= sol.value_lower > 0.0
    assert sol.gap <= 1e-3

    C = cx.riesz_capacity_oracle(g, one, 0.5, 2.0, 0.5, sp)
    ind = cx.Field(g, 0.0)
    vals = list(ind.values)
    for i in E.cells:
        vals[i] = 1.0
    ind.values = vals
    ci = cx.choquet_integral(ind, 1.0, C)
    cap = C(E)
    assert abs(ci - cap) <= 1e-9 + 1e-6 * cap
    wq = cx.weak_quasinorm(ind, 1.0, C)
    assert wq <= ci + 1e-9
    assert C.monotonicity_ok()

    cfg = cx.VerifyConfig()
    cfg.h = 1.0 / 32.0
    cfg.instances = 2
    cfg.solver = cx.SolverParams(tol=1e-2, max_iter=400, polish_every=10)
    check = cx.run_check("weight_algebra", cfg)
    assert check.check_id == "weight_algebra"
    assert check.instances, "expected instance rows"
    js = cx.reports_to_json([check])
    assert "weight_algebra" in js

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "field.json")
        cx.write_field(path, pot)
        back = cx.read_field(path)
        assert back.values == pot.values
        mpath = os.path.join(d, "mu.txt")
        cx.write_measure(mpath, mu)
        mback = cx.read_measure(mpath)
        assert mback.masses == mu.masses

    print("smoke ok")


if __name__ == "__main__":
    main()
