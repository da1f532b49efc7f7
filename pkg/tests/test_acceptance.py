"""Acceptance criteria, each run at its stated tolerance.

Every test records one pass/fail line (printed inline and again in the
terminal summary) before asserting, so a failing criterion still reports
its measured values.
"""

import math
import time

import numpy as np
import pytest

from adefrac import bench
from adefrac.ade import (
    ade_step_1d,
    ade_step_2d,
    build_step_matrix_1d,
    fill_boundary_1d,
    spectral_radius,
    sweep_backward_1d,
    sweep_forward_1d,
)
from adefrac.grid import BoundarySpec, Grid1D, Grid2D, convergence_rates, exact_solution, l2_norm
from adefrac.kernels import GlKernel, HistoryBuffer, gl_caputo_apply, lambda_sequence
from adefrac.oracles import (
    caputo_direct_quadrature,
    dense_ade_step_2d,
    dense_triangular_split_step,
    laplacian_1d,
    laplacian_2d,
)
from adefrac.output import pgm_bytes
from adefrac.solvers import NormTrace, SnapshotObserver, TuringProblem, init_turing, pattern_amplitude, run_to_final

ZERO = BoundarySpec.zero_dirichlet()


def within(values, targets, tol):
    return all(abs(v - t) <= tol for v, t in zip(values, targets)) and len(values) == len(targets)


def fmt(values):
    return "[" + ", ".join(f"{v:.3f}" for v in values) + "]"


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    # compile the sweep kernels outside the timed sections
    bench.run_exact(bench.RunConfig("heat1d-dirichlet"), 10, 4)
    bench.run_exact(bench.RunConfig("heat2d-dirichlet"), 6, 4)


def study(experiment, study_name="time", **kw):
    start = time.perf_counter()
    rep = bench.run_convergence_study(bench.RunConfig(experiment, study_name, **kw))
    return rep, time.perf_counter() - start


def test_criterion_1_heat1d_time(record):
    rep, elapsed = study("heat1d-dirichlet", "time")
    rates = rep.linf_rates
    final = rep.rows[-1][2]
    ok_rates = within(rates, [1.82, 1.95, 1.98], 0.15)
    ok_final = 7.72e-3 / 3 <= final <= 3 * 7.72e-3
    ok = ok_rates and ok_final and elapsed < 1.0
    record(1, ok, f"linf rates {fmt(rates)} vs [1.82, 1.95, 1.98] +/-0.15; "
                  f"final linf {final:.3e} vs 7.72e-3 (x3); {elapsed:.2f}s")
    assert ok


def test_criterion_2_heat1d_space(record):
    rep, elapsed = study("heat1d-dirichlet", "space")
    rates = rep.linf_rates
    ok = within(rates, [2.15, 2.07, 2.04], 0.15) and elapsed < 30.0
    record(2, ok, f"linf rates {fmt(rates)} vs [2.15, 2.07, 2.04] +/-0.15; {elapsed:.2f}s")
    assert ok


def test_criterion_3_heat2d(record):
    rep_t, el_t = study("heat2d-dirichlet", "time")
    rep_s, el_s = study("heat2d-dirichlet", "space")
    last = rep_t.l2_rates[-1]
    ok_t = abs(last - 2.02) <= 0.15
    ok_s = within(rep_s.l2_rates, [2.0] * 3, 0.15)
    ok = ok_t and ok_s and el_t + el_s < 300.0
    record(3, ok, f"time l2 rates {fmt(rep_t.l2_rates)} (last vs 2.02 +/-0.15); "
                  f"space l2 rates {fmt(rep_s.l2_rates)} at N=2e4 vs 2 +/-0.15; {el_t + el_s:.1f}s")
    assert ok


def neumann_rung(N, M=1000, T=2.0):
    ex = exact_solution("heat1d-neumann")
    g = Grid1D(0.0, 1.0, M)
    bc = ex.boundary
    dt = T / N
    u = fill_boundary_1d(np.array(ex.initial(g.x), dtype=float), bc, 0.0)
    worst = 0.0
    for n in range(N):
        t = n * dt
        b = ex.source(g.x, t + 0.5 * dt)
        p = sweep_forward_1d(u, dt, g.dx, bc, b, t)
        q = sweep_backward_1d(u, dt, g.dx, bc, b, t)
        worst = max(worst, abs(p[1] - p[0]), abs(q[-2] - q[-1]))
        u = fill_boundary_1d(0.5 * (p + q), bc, t + dt)
    return l2_norm(u - ex.u(g.x, T), g), worst


def test_criterion_4_neumann(record):
    start = time.perf_counter()
    results = [neumann_rung(N) for N in (500, 1000, 2000, 4000)]
    elapsed = time.perf_counter() - start
    rates = convergence_rates([(N, e) for N, (e, _) in zip((500, 1000, 2000, 4000), results)])
    closure = max(w for _, w in results)
    ok = abs(rates[-1] - 1.90) <= 0.2 and closure <= 1e-13 and elapsed < 60.0
    record(4, ok, f"l2 rates {fmt(rates)} (final vs 1.90 +/-0.2); "
                  f"max closure gap {closure:.1e} (<=1e-13); {elapsed:.1f}s")
    assert ok


def test_criterion_5_distributed_order(record):
    rep, elapsed = study("dist-order")
    rates = rep.l2_rates
    final = rep.rows[-1][1]
    ok = (within(rates, [1.76, 1.88, 1.94], 0.15) and 1.17e-3 / 3 <= final <= 3 * 1.17e-3
          and elapsed < 300.0)
    record(5, ok, f"l2 rates {fmt(rates)} vs [1.76, 1.88, 1.94] +/-0.15; "
                  f"N=80 l2 {final:.3e} vs 1.17e-3 (x3); {elapsed:.1f}s")
    assert ok


def test_criterion_6_stability(record):
    start = time.perf_counter()
    radii = []
    for M in (8, 16, 32):
        dx = 1.0 / M
        for r in (0.5, 1.0, 10.0, 100.0):
            radii.append(spectral_radius(build_step_matrix_1d(M, r * dx * dx, dx)))
    worst_radius = max(radii)

    M, dx = 16, 1.0 / 16
    dt = 100 * dx * dx
    x = Grid1D(0.0, 1.0, M).x
    starts = {"sin": np.sin(np.pi * x)}
    rand = np.zeros(M + 1)
    rand[1:-1] = np.random.default_rng(2024).normal(size=M - 1)
    starts["random"] = rand
    worst_ratio = 0.0
    for u0 in starts.values():
        u = u0.copy()
        base = l2_norm(u0, dx)
        for _ in range(1000):
            u = ade_step_1d(u, dt, dx, ZERO, np.zeros(M + 1), 0.0)
            worst_ratio = max(worst_ratio, l2_norm(u, dx) / base)
    elapsed = time.perf_counter() - start
    ok = worst_radius <= 1 + 1e-12 and worst_ratio <= 1 + 1e-9 and elapsed < 10.0
    record(6, ok, f"max spectral radius {worst_radius:.6f}; max |u^n|/|u^0| over 1000 steps "
                  f"at r=100 {worst_ratio:.4f}; {elapsed:.2f}s")
    assert ok


def test_criterion_7_oracle_equivalence(record):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_1d = worst_2d = 0.0
    M, dx = 16, 1.0 / 16
    op1 = laplacian_1d(M, dx)
    for k in range(20):
        dt = (1.0 if k % 2 == 0 else 100.0) * dx * dx
        u = np.zeros(M + 1)
        u[1:-1] = rng.normal(size=M - 1)
        got = ade_step_1d(u, dt, dx, ZERO, np.zeros(M + 1), 0.0)[1:-1]
        worst_1d = max(worst_1d, np.max(np.abs(got - dense_triangular_split_step(u[1:-1], dt, op1))))
    g = Grid2D(Grid1D(0.0, 1.0, 6), Grid1D(0.0, 1.4, 7))
    op2 = laplacian_2d(6, 7, g.dx, g.dy)
    for k in range(20):
        dt = rng.uniform(0.001, 0.5)
        u = np.zeros(g.shape)
        u[1:-1, 1:-1] = rng.normal(size=(5, 6))
        got = ade_step_2d(u, g, ZERO, np.zeros(g.shape), dt, 0.0)[1:-1, 1:-1]
        worst_2d = max(worst_2d, np.max(np.abs(got - dense_ade_step_2d(u[1:-1, 1:-1], dt, op2))))
    elapsed = time.perf_counter() - start
    ok = worst_1d <= 1e-12 and worst_2d <= 1e-12 and elapsed < 5.0
    record(7, ok, f"max deviation 1D {worst_1d:.1e}, 2D {worst_2d:.1e} (<=1e-12); {elapsed:.2f}s")
    assert ok


def gl_identity_error(alpha, K):
    dt = 1.0 / K
    hist = HistoryBuffer((1,), None)
    for m in range(1, K):
        hist.push([m * dt])
    approx = gl_caputo_apply(hist, [1.0], [0.0], GlKernel(alpha), dt)[0]
    ref = caputo_direct_quadrature(lambda s: s, alpha, 1.0, du=lambda s: np.ones_like(s))
    return abs(approx - ref) / ref


def lambda_unit_order(u, dt, n):
    lam = lambda_sequence(1.0, n)
    d = np.diff(u(dt * np.arange(n + 2))) / dt
    return sum(lam[k] * d[n - k] for k in range(n + 1)) / dt


def test_criterion_8_fractional_kernels(record):
    start = time.perf_counter()
    parts, ok = [], True
    for alpha in (0.3, 0.5, 0.92):
        errs = [gl_identity_error(alpha, K) for K in (64, 128, 256)]
        good = errs[1] < 5e-2 and errs[0] > errs[1] > errs[2]
        ok &= good
        parts.append(f"a={alpha}: {errs[1]:.2e}")
    # quadratics: exact curvature; a quartic shows the O(dt^2) behaviour
    quad_err = max(abs(lambda_unit_order(lambda t: 2.5 * t**2 - t + 4, dt, 16) - 5.0) for dt in (0.1, 0.01))
    quart = [abs(lambda_unit_order(lambda t: t**4, dt, round(1 / dt)) - 12 * (1 + 0.5 * dt) ** 2)
             for dt in (0.02, 0.01)]
    lam_rate = math.log2(quart[0] / quart[1])
    ok &= quad_err < 1e-9 and lam_rate > 1.8
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    record(8, ok, f"GL rel err at dt=1/128 {'; '.join(parts)} (<5e-2, decreasing); "
                  f"lambda quadratic err {quad_err:.1e}, quartic rate {lam_rate:.2f}; {elapsed:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def turing_full():
    prob = TuringProblem.standard_setup()
    noise_std = pattern_amplitude(init_turing(prob).u)
    snaps = SnapshotObserver(steps=(2000, 20000))
    trace = NormTrace()
    start = time.perf_counter()
    error = None
    try:
        run_to_final(prob, [snaps, trace])
    except Exception as exc:  # divergence is a criterion outcome, not a crash
        error = repr(exc)
    return dict(prob=prob, noise_std=noise_std, snaps=snaps, trace=trace,
                elapsed=time.perf_counter() - start, error=error)


def test_criterion_9_turing(record, turing_full):
    run = turing_full
    completed = run["error"] is None and 20000 in run["snaps"].snapshots

    zero = run_to_final(TuringProblem.standard_setup(steps=2000, noise=0.0))
    zero_dev = max(np.max(np.abs(zero.u)), np.max(np.abs(zero.v)))

    amp = drift = float("nan")
    if completed:
        rows = run["trace"].rows
        amp = rows[-1][1]
        tail = np.array([r[1] for r in rows if r[0] >= rows[-1][0] - 1000])
        drift = float(np.max(np.abs(tail - amp)) / amp)

    # determinism: an independent run over the first 2000 steps
    rerun = SnapshotObserver(steps=(2000,))
    run_to_final(TuringProblem.standard_setup(steps=2000), [rerun])
    identical = False
    if 2000 in run["snaps"].snapshots:
        a, b = run["snaps"].snapshots[2000]["u"], rerun.snapshots[2000]["u"]
        identical = a.tobytes() == b.tobytes() and pgm_bytes(a[1:-1, 1:-1]) == pgm_bytes(b[1:-1, 1:-1])

    ratio = amp / run["noise_std"]
    checks = {
        "completed": completed,
        "zero fixed point": zero_dev <= 1e-13,
        "amplitude > 10x noise": ratio > 10,
        "final-1000 drift < 1%": drift < 0.01,
        "byte-identical": identical,
        "runtime < 10 min": run["elapsed"] < 600,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    record(9, ok, f"std(u) {amp:.4f} = {ratio:.2f}x noise std {run['noise_std']:.4f}; drift {drift:.2%}; "
                  f"zero run max {zero_dev:.1e}; run {run['elapsed']:.0f}s"
                  + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok
