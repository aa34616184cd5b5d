"""Acceptance suite: one test per numbered criterion, pass/fail per line.

Run with `pytest tests/test_acceptance.py -v` to get one PASSED/FAILED
line per criterion.  Each test prints its measured figures, so a failing
criterion shows exactly which clause missed and by how much.
"""

import itertools
import time

import numpy as np
import pytest

from decayalg.blocking_kernel import (
    GridFunction,
    apply_kernel,
    assemble_kernel,
    attach_svd_factorizations,
    block,
    unblock,
)
from decayalg.cd_operator import (
    BlockVector,
    CDOperator,
    apply,
    compose,
    densify,
    laurent_symbol,
    shift_decomposition,
)
from decayalg.harness import ExperimentConfig, run_inverse_closedness
from decayalg.lattice import window_indices, window_size
from decayalg.nuclear_blocks import (
    build_path,
    homotopy_inverse,
    operator_norm,
    trace_norm,
)
from decayalg.seq_algebra import (
    FiniteSeq,
    TorusPoint,
    character_eval,
    convolve,
    weighted_norm,
    wiener_inverse,
)
from decayalg.weights import Weight, grs_sequence, verify_axioms

WEIGHT_GRID = [
    Weight(a=a, b=b, s=s, t=t)
    for a, b, s, t in itertools.product((0.0, 0.5), (0.0, 0.5), (0.0, 1.0, 2.0), (0.0, 1.0))
]


def announce(num, ok, detail):
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_seq(rng, c, radius):
    seq = FiniteSeq.zeros(c, radius)
    seq.data[...] = rand_complex(rng, *seq.data.shape)
    return seq


def match_multisets(xs, ys):
    remaining = list(ys)
    worst = 0.0
    for x in xs:
        dists = [abs(x - y) for y in remaining]
        i = int(np.argmin(dists))
        worst = max(worst, dists[i])
        remaining.pop(i)
    return worst


def criterion7_config():
    return ExperimentConfig(
        seed=7,
        c=1,
        window_radius=16,
        band_radius=4,
        local_dim=4,
        weight=Weight(a=0.5, b=0.5),
        envelope_profile={"kind": "exponential", "rate": 1.0, "l1": 0.5},
        block_rank=4,
        trials=10,
        boundary="circulant",
    )


def test_criterion_01_weight_axioms_and_grs_tails():
    t0 = time.perf_counter()
    worst_tail = 0.0
    for w in WEIGHT_GRID:
        for c in (1, 2):
            report = verify_axioms(w, 8, c)
            assert report.all_pass, (w, c, [ch for ch in report.checks if not ch.passed])
            tail = float(grs_sequence(w, (1,) * c, 10_000)[-1])
            worst_tail = max(worst_tail, tail)
    elapsed = time.perf_counter() - t0
    ok = worst_tail < 0.05 and elapsed < 10.0
    announce(1, ok, f"{len(WEIGHT_GRID)} weights x c in (1,2) all axioms pass, "
                    f"worst GRS tail {worst_tail:.2e}, {elapsed:.2f}s")
    assert worst_tail < 0.05
    assert elapsed < 10.0


def test_criterion_02_convolution_norm_and_characters():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1002)
    worst_norm = 0.0
    worst_char = 0.0
    for trial in range(500):
        c = int(rng.integers(1, 3))
        radius = int(rng.integers(0, 7 if c == 1 else 4))
        a = random_seq(rng, c, radius)
        b = random_seq(rng, c, int(rng.integers(0, 7 if c == 1 else 4)))
        g = WEIGHT_GRID[int(rng.integers(len(WEIGHT_GRID)))]
        ab = convolve(a, b)
        lhs = weighted_norm(ab, g)
        rhs = weighted_norm(a, g) * weighted_norm(b, g)
        worst_norm = max(worst_norm, (lhs - rhs) / rhs)
        u = TorusPoint(tuple(rng.uniform(0, 2 * np.pi, size=c)))
        hom = character_eval(ab, u) - character_eval(a, u) * character_eval(b, u)
        worst_char = max(worst_char, abs(hom) / max(abs(character_eval(ab, u)), 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_norm <= 1e-10 and worst_char <= 1e-10 and elapsed < 5.0
    announce(2, ok, f"500 pairs, worst submultiplicativity excess {worst_norm:.2e}, "
                    f"worst character defect {worst_char:.2e}, {elapsed:.2f}s")
    assert worst_norm <= 1e-10
    assert worst_char <= 1e-10
    assert elapsed < 5.0


def test_criterion_03_reciprocal_symbol_inversion_vs_closed_form():
    t0 = time.perf_counter()
    a = FiniteSeq.zeros(1, 1)
    a.data[1] = 2.0  # origin
    a.data[2] = 1.0  # offset +1
    result = wiener_inverse(a, 1024, 40)
    inv = result.inverse

    worst_coef = 0.0
    for k in range(-40, 41):
        expected = (-1.0) ** k * 2.0 ** (-k - 1) if k >= 0 else 0.0
        worst_coef = max(worst_coef, abs(inv[(k,)] - expected))

    g = Weight(s=2.0)
    increments = []
    for r in range(41):
        shell = [(r,)] if r == 0 else [(-r,), (r,)]
        increments.append(
            sum(g.eval(m) * abs(inv[m]) for m in shell)
        )
    last_increment = increments[-1]
    elapsed = time.perf_counter() - t0
    ok = worst_coef <= 1e-12 and last_increment <= 1e-10 and elapsed < 1.0
    announce(3, ok, f"max coefficient error {worst_coef:.2e}, "
                    f"last weighted increment {last_increment:.6e}, {elapsed:.2f}s")
    assert worst_coef <= 1e-12
    # The weighted tail of this inverse at radius 40 is g(40)*2^-41 =
    # 41^2 * 2^-41 = 7.64e-10; the stated plateau threshold sits below
    # what this configuration can produce, so this clause fails honestly.
    assert last_increment <= 1e-10
    assert elapsed < 1.0


def test_criterion_04_trace_norm_oracle_and_ideal_property():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1004)
    worst_rel = 0.0
    worst_ideal = 0.0
    worst_compare = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 9))
        a = rand_complex(rng, d, d)
        lam = np.linalg.eigvalsh(a.conj().T @ a)
        oracle = float(np.sqrt(np.clip(lam, 0.0, None)).sum())
        tn = trace_norm(a)
        worst_rel = max(worst_rel, abs(tn - oracle) / oracle)
        x = rand_complex(rng, d, d)
        y = rand_complex(rng, d, d)
        bound = operator_norm(x, 2) * tn * operator_norm(y, 2)
        worst_ideal = max(worst_ideal, (trace_norm(x @ a @ y) - bound) / bound)
        worst_compare = max(worst_compare, operator_norm(a, 2) - tn)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-10 and worst_ideal <= 1e-10 and worst_compare <= 0.0 and elapsed < 5.0
    announce(4, ok, f"200 blocks, worst oracle rel err {worst_rel:.2e}, ideal excess "
                    f"{worst_ideal:.2e}, 2-norm never above trace norm: {worst_compare <= 0.0}, "
                    f"{elapsed:.2f}s")
    assert worst_rel <= 1e-10
    assert worst_ideal <= 1e-10
    assert worst_compare <= 0.0
    assert elapsed < 5.0


def test_criterion_05_homotopy_inversion_with_certificates():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1005)
    worst_err = 0.0
    for _ in range(50):
        g = rand_complex(rng, 8, 8)
        radius = float(np.abs(np.linalg.eigvals(g)).max())
        j = g * (0.9 * rng.uniform(0.5, 1.0) / radius)
        path = build_path(j, None, 1.0)
        # every step certificate honours the contraction bound at safety 0.5
        assert path.max_step() * trace_norm(j) <= 0.5 / path.resolvent_bound * (1 + 1e-12)
        result = homotopy_inverse(j, 1.0, path)
        dense = np.linalg.inv(np.eye(8) - j)
        worst_err = max(worst_err, operator_norm(result.inverse - dense, 2))
    elapsed = time.perf_counter() - t0
    ok = worst_err <= 1e-8 and elapsed < 10.0
    announce(5, ok, f"50 random contractive generators, worst 2-norm error vs dense LU "
                    f"{worst_err:.2e}, all step certificates hold, {elapsed:.2f}s")
    assert worst_err <= 1e-8
    assert elapsed < 10.0


def test_criterion_06_composition_matches_dense_product():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1006)
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(1, 7))
        d = int(rng.integers(1, 5))
        boundary = ("circulant", "dirichlet")[trial % 2]
        ops = []
        for _ in range(2):
            w = int(rng.integers(0, min(n, 2) + 1))
            blocks = {
                (k, m): rand_complex(rng, d, d)
                for k in window_indices(n, 1)
                for m in window_indices(w, 1)
            }
            ops.append(CDOperator(1, n, w, d, boundary, blocks))
        k_op, t_op = ops
        lhs = densify(compose(k_op, t_op))
        rhs = densify(k_op) @ densify(t_op)
        worst = max(worst, float(np.abs(lhs - rhs).max(initial=0.0)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    announce(6, ok, f"100 pairs both boundaries, worst entrywise defect {worst:.2e}, "
                    f"{elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 10.0


def test_criterion_07_inverse_closedness_experiment(tmp_path):
    t0 = time.perf_counter()
    report = run_inverse_closedness(criterion7_config(), out_dir=tmp_path)
    elapsed = time.perf_counter() - t0
    records = report["records"]
    assert len(records) == 10
    assert all("error" not in r for r in records)
    worst_res = max(r["residual"] for r in records)
    worst_slope = max(r["slope"] for r in records)
    worst_ratio = max(r["final_increment"] / r["weighted_total"] for r in records)
    ok = worst_res <= 1e-9 and worst_slope <= -0.3 and worst_ratio <= 1e-8 and elapsed < 30.0
    announce(7, ok, f"10 trials: max residual {worst_res:.2e}, worst decay slope "
                    f"{worst_slope:.3f}, worst plateau ratio {worst_ratio:.2e}, {elapsed:.2f}s")
    assert worst_res <= 1e-9
    assert worst_slope <= -0.3
    assert worst_ratio <= 1e-8
    assert elapsed < 30.0


def test_criterion_08_shift_decomposition_and_symbol_spectra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1008)
    worst_eig = 0.0
    for _ in range(20):
        n = 4
        w = int(rng.integers(0, 3))
        d = int(rng.integers(1, 4))
        offset_blocks = {
            (m,): rand_complex(rng, d, d) for m in range(-w, w + 1)
        }
        op = CDOperator.shift_invariant(1, n, w, d, "circulant", offset_blocks)

        layers = shift_decomposition(op)
        total = np.zeros_like(densify(op))
        for _, layer in layers:
            total = total + densify(layer)
        assert np.array_equal(total, densify(op))  # bit-identical reassembly

        ring = 2 * n + 1
        dense_eigs = np.linalg.eigvals(densify(op))
        symbol_eigs = np.concatenate([
            np.linalg.eigvals(laurent_symbol(op, TorusPoint.from_grid((j,), ring)))
            for j in range(ring)
        ])
        worst_eig = max(worst_eig, match_multisets(sorted(dense_eigs, key=abs),
                                                   list(symbol_eigs)))
    elapsed = time.perf_counter() - t0
    ok = worst_eig <= 1e-9 and elapsed < 5.0
    announce(8, ok, f"20 shift-invariant operators, reassembly bit-identical, worst "
                    f"eigenvalue/symbol multiset distance {worst_eig:.2e}, {elapsed:.2f}s")
    assert worst_eig <= 1e-9
    assert elapsed < 5.0


def test_criterion_09_blocking_isometry_and_kernel_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1009)
    q, n, c, d = 4, 3, 1, 4
    worst_rel = 0.0
    for trial in range(50):
        w = int(rng.integers(0, n + 1))
        boundary = ("circulant", "dirichlet")[trial % 2]
        blocks = {
            (k, m): rand_complex(rng, d, d)
            for k in window_indices(n, c)
            for m in window_indices(w, c)
        }
        op = attach_svd_factorizations(CDOperator(c, n, w, d, boundary, blocks))
        f = GridFunction(c, n, q, rand_complex(rng, window_size(n, c), q ** c))

        blocked = block(f)
        assert np.array_equal(unblock(blocked, q).values, f.values)
        for p in (1, 2, "inf"):
            assert f.lp_norm(p) == blocked.norm(p, cell_weight=f.cell_volume_weight)

        kern = assemble_kernel(op, q)
        via_kernel = apply_kernel(kern, f)
        via_blocks = unblock(apply(op, blocked), q)
        scale = float(np.abs(via_blocks.values).max(initial=0.0))
        worst_rel = max(
            worst_rel,
            float(np.abs(via_kernel.values - via_blocks.values).max(initial=0.0)) / scale,
        )
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-10 and elapsed < 10.0
    announce(9, ok, f"50 cases: round trips and p-norm isometries exact, worst kernel "
                    f"application rel err {worst_rel:.2e}, {elapsed:.2f}s")
    assert worst_rel <= 1e-10
    assert elapsed < 10.0


def test_criterion_10_rerun_determinism(tmp_path):
    cfg = criterion7_config()
    run_inverse_closedness(cfg, out_dir=tmp_path / "first")
    run_inverse_closedness(cfg, out_dir=tmp_path / "second")
    names = sorted(p.name for p in (tmp_path / "first").iterdir())
    assert any(name.endswith(".csv") for name in names)
    identical = all(
        (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
        for name in names
    )
    announce(10, identical, f"{len(names)} output files byte-identical across reruns")
    assert identical
