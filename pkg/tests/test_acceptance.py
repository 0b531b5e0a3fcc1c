"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (bypassing output capture)
before asserting, so ``pytest -v`` shows the measured numbers next to the
pinned tolerances.
"""

import json
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from cavsqueeze.atomfield import compare_effective, derive_effective
from cavsqueeze.cli import main
from cavsqueeze.config import parse_config
from cavsqueeze.errors import TruncationOverflowError
from cavsqueeze.fock import FockSpace, fock_state
from cavsqueeze.gates import min_variance, odd_population, squeeze_static
from cavsqueeze.protocols import (
    CatSpec,
    optimal_time,
    pipeline_sdns,
    pipeline_sscs,
    transfer_probability,
)

TABLE_TIMES = (0.9254e-5, 0.4446e-5, 0.2879e-5)
TABLE_PROBS = (0.6, 0.8, 0.9)
TIME_RTOL = 5e-3
XI_STATED, XI_RTOL = 6.8e3, 0.015
R_STATED, R_RTOL = 1.36, 0.01
VAR_SCS, VAR_SNS, VAR_RTOL = 1.6e-2, 8e-2, 0.05
DEG_SCS, DEG_SNS, DEG_ATOL = 0.93, 0.67, 0.01
# first-run infidelity at t = 1e-5 s, dim 64, interaction frame: 7.632e-3; threshold keeps 10% slack
FROZEN_FIDELITY = 0.9916
EQUIV_ATOL = 1e-9
GROUP_ATOL = 1e-9
SQV_ATOL = 1e-6
UNCERTAINTY_FLOOR = 1 / 16 - 1e-9
ODD_MAX = 1e-10
CONVERGENCE_ATOL = 1e-8
DIM = 512


@pytest.fixture
def emit(capsys):
    def _emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
        return ok

    return _emit


@pytest.fixture(scope="module")
def params():
    return parse_config(overrides={"experiment": "table1", "preset": "paper"}).params


def squeeze_time(p, r):
    return r / (2 * abs(derive_effective(p).xi))


def test_criterion_01_interaction_times(params, emit):
    start = time.perf_counter()
    times = [optimal_time(params, n) for n in (0, 2, 4)]
    elapsed = time.perf_counter() - start
    errs = [abs(t / ref - 1) for t, ref in zip(times, TABLE_TIMES)]
    ok = max(errs) < TIME_RTOL and elapsed < 1.0
    emit(1, ok, f"t_k = {[f'{t:.4e}' for t in times]} s, max rel err {max(errs):.2e} "
                f"(< {TIME_RTOL}), {elapsed:.3f} s")
    assert ok


def test_criterion_02_transfer_probabilities(params, emit, tmp_path):
    start = time.perf_counter()
    probs = [transfer_probability(params, n, optimal_time(params, n)) for n in (0, 2, 4)]
    elapsed = time.perf_counter() - start
    main(["table1", "--preset", "paper", "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    both = {"P_numeric", "P_reference"} <= set(report["columns"])
    ok = all(p >= ref for p, ref in zip(probs, TABLE_PROBS)) and both \
        and bool(report["discrepancy_notes"]) and elapsed < 1.0
    emit(2, ok, f"P_numeric = {[round(p, 4) for p in probs]} >= {list(TABLE_PROBS)}, "
                f"report carries both columns and a note: {both}, {elapsed:.3f} s")
    assert ok


def test_criterion_03_effective_parameters(params, emit):
    xi = abs(derive_effective(params).xi)
    r = 2 * xi * 1e-4
    ok = (np.isclose(xi, 6.86e3, rtol=1e-12) and abs(xi / XI_STATED - 1) < XI_RTOL
          and np.isclose(r, 1.372, rtol=1e-12) and abs(r / R_STATED - 1) < R_RTOL)
    emit(3, ok, f"|xi| = {xi:.6g} s^-1 ({abs(xi / XI_STATED - 1):.2%} from 6.8e3), "
                f"r(1e-4 s) = {r:.6g} ({abs(r / R_STATED - 1):.2%} from 1.36)")
    assert ok


def test_criterion_04_squeezed_coherent_state(params, emit):
    rep = pipeline_sdns(params, 0, 1.0, squeeze_time(params, 1.36), space=FockSpace(DIM))
    q = rep.quadratures
    exact = math.exp(-2.72) / 4
    ok = (np.isclose(q.var_min, exact, rtol=1e-8) and abs(q.var_min / VAR_SCS - 1) < VAR_RTOL
          and abs(q.degree - DEG_SCS) <= DEG_ATOL)
    emit(4, ok, f"var_min = {q.var_min:.5e} (exact {exact:.5e}, {abs(q.var_min / VAR_SCS - 1):.2%} "
                f"from 1.6e-2), degree = {q.degree:.4f}")
    assert ok


def test_criterion_05_squeezed_number_state(params, emit):
    rep = pipeline_sdns(params, 2, 0, squeeze_time(params, 1.36), space=FockSpace(DIM))
    q = rep.quadratures
    ok = abs(q.var_min / VAR_SNS - 1) < VAR_RTOL and abs(q.degree - DEG_SNS) <= DEG_ATOL
    emit(5, ok, f"var_min = {q.var_min:.5e} ({abs(q.var_min / VAR_SNS - 1):.2%} from 8e-2), "
                f"degree = {q.degree:.4f}")
    assert ok


def test_criterion_06_effective_theory_oracle(params, emit):
    start = time.perf_counter()
    sp = FockSpace(64)
    base = compare_effective(params, fock_state(sp, 0), 1e-5, frame="interaction")
    far = replace(params, delta=10 * params.delta).with_resonant_drive()
    scaled = compare_effective(far, fock_state(sp, 0), 1e-5, frame="interaction")
    elapsed = time.perf_counter() - start
    ok = (base.final_fidelity > FROZEN_FIDELITY
          and scaled.final_infidelity < base.final_infidelity and elapsed < 60)
    emit(6, ok, f"fidelity {base.final_fidelity:.6f} > {FROZEN_FIDELITY}, |i> population "
                f"{base.population_i[-1]:.4f}, infidelity {base.final_infidelity:.3e} -> "
                f"{scaled.final_infidelity:.3e} with delta x10, {elapsed:.1f} s")
    assert ok


def test_criterion_07_closed_form_equivalence(params, emit):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        lg, le = rng.uniform(1e5, 2e6, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi, 2))
        p = replace(params, lambda_g=complex(lg), lambda_e=complex(le),
                    delta=float(rng.choice([-1, 1]) * rng.uniform(5e6, 5e7)))
        n = int(rng.choice([0, 2, 4]))
        t = float(rng.uniform(0, 3)) * optimal_time(p, n)
        worst = max(worst, abs(transfer_probability(p, n, t) - transfer_probability(p, n, t, "closed-form")))
    elapsed = time.perf_counter() - start
    ok = worst < EQUIV_ATOL and elapsed < 5
    emit(7, ok, f"max |numeric - closed form| over 100 draws = {worst:.2e} (< {EQUIV_ATOL}), {elapsed:.2f} s")
    assert ok


def test_criterion_08_squeeze_properties(params, emit):
    sp = FockSpace(DIM)
    vac = fock_state(sp, 0)
    u = np.exp(0.7j)
    lhs = squeeze_static(sp, 0.5 * u) @ (squeeze_static(sp, 0.86 * u) @ vac)
    group = float(np.max(np.abs(lhs.amps - (squeeze_static(sp, 1.36 * u) @ vac).amps)))

    var_err = max(abs(min_variance(squeeze_static(sp, r) @ vac).var_min - math.exp(-2 * r) / 4)
                  for r in (0.25, 0.5, 1.0, 1.36))

    t = squeeze_time(params, 1.36)
    reports = [
        pipeline_sdns(params, 0, 1.0, t, space=sp),
        pipeline_sdns(params, 2, 0, t, space=sp),
        pipeline_sdns(params, 1, 0.5 - 0.5j, t, "effective", space=sp),
        pipeline_sscs(params, CatSpec(2.0), t, space=sp),
        pipeline_sscs(params, CatSpec(2.0, sign="-"), t, space=sp),
    ]
    product = min(r.quadratures.uncertainty_product for r in reports)

    odd = max(odd_population(squeeze_static(sp, 1.36j) @ vac), odd_population(reports[3].simulated_state))
    ok = group < GROUP_ATOL and var_err < SQV_ATOL and product >= UNCERTAINTY_FLOOR and odd < ODD_MAX
    emit(8, ok, f"group law {group:.1e}, squeezed-vacuum variance err {var_err:.1e}, "
                f"min uncertainty product {product:.5f} (>= 1/16), max odd population {odd:.1e}")
    assert ok


def criterion_values(dim, tail_tol=1e-12):
    """Every truncation-dependent number checked by criteria 4, 5 and 8."""
    p = parse_config(overrides={"experiment": "sdns", "preset": "paper"}).params
    sp = FockSpace(dim, tail_tol)
    vac = fock_state(sp, 0)
    t = squeeze_time(p, 1.36)
    out = {}
    for label, rep in (("scs", pipeline_sdns(p, 0, 1.0, t, space=sp)),
                       ("sns", pipeline_sdns(p, 2, 0, t, space=sp))):
        out[f"{label}_var_min"] = rep.quadratures.var_min
        out[f"{label}_degree"] = rep.quadratures.degree
    for r in (0.25, 0.5, 1.0, 1.36):
        out[f"sqv_var_{r}"] = min_variance(squeeze_static(sp, r) @ vac).var_min
    out["cat_odd"] = odd_population(pipeline_sscs(p, CatSpec(2.0), t, space=sp).simulated_state)
    return out


def convergence(dim_lo, dim_hi, tail_tol=1e-12):
    a, b = criterion_values(dim_lo, tail_tol), criterion_values(dim_hi, tail_tol)
    return {k: abs(a[k] - b[k]) for k in a}


def test_criterion_09_truncation_convergence_64_to_128(emit):
    try:
        diffs = convergence(64, 128)
        detail = ""
    except TruncationOverflowError as exc:
        # with the truncation guard relaxed the raw change shows how far off dim 64 is
        diffs = convergence(64, 128, tail_tol=0.99)
        detail = f"guarded run refused dim 64 ({exc}); "
    worst = max(diffs, key=diffs.get)
    ok = not detail and diffs[worst] < CONVERGENCE_ATOL
    emit(9, ok, f"{detail}largest change 64 -> 128 is {worst} = {diffs[worst]:.3e} (required < {CONVERGENCE_ATOL})")
    assert ok


def test_criterion_09_converged_basis_512_to_1024(emit):
    diffs = convergence(512, 1024)
    worst = max(diffs, key=diffs.get)
    ok = diffs[worst] < CONVERGENCE_ATOL
    emit("9 (dim 512 -> 1024)", ok, f"largest change is {worst} = {diffs[worst]:.3e} (required < {CONVERGENCE_ATOL})")
    assert ok


def test_criterion_10_determinism(emit, tmp_path):
    runs = [
        ["sdns", "--preset", "paper", "--n", "1", "--alpha", "0.5,0.5", "--r", "1.36", "--wigner", "true",
         "--grid=-3,3,-3,3,31,31"],
        ["ladder", "--preset", "paper", "--mode", "monte-carlo", "--seed", "2024", "--trials", "100"],
    ]
    same = []
    for argv in runs:
        outs = [tmp_path / f"{argv[0]}_{k}" for k in range(2)]
        codes = [main(argv + ["--out", str(o)]) for o in outs]
        for f in sorted(p.name for p in outs[0].iterdir()):
            same.append(codes == [0, 0] and (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes())
    ok = all(same) and len(same) >= 4
    emit(10, ok, f"{sum(same)}/{len(same)} output files bit-identical across two runs")
    assert ok
