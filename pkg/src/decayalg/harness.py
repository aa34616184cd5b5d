"""Batch experiment runner: random operators, inversion studies, reports.

Experiments are fully deterministic: every (seed, trial) pair opens its
own xoshiro256** stream, trials may run in parallel (capped by the
DECAYALG_THREADS environment variable) but are merged in trial order,
and all emitted JSON/CSV is byte-stable — sorted keys, repr'd floats,
no timestamps.
"""

from __future__ import annotations

import json
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .blocking_kernel import (
    GridFunction,
    apply_kernel,
    assemble_kernel,
    block,
    kernel_block_to_csv,
    unblock,
    write_grid_function,
)
from .cd_operator import (
    CDOperator,
    EnvelopeReport,
    NumericallySingular,
    apply,
    decay_slope,
    densify,
    fit_envelope,
    invert_one_plus,
)
from .lattice import window_indices, window_size
from .nuclear_blocks import NuclearFactorization, trace_norm
from .rng import Xoshiro256StarStar
from .seq_algebra import (
    FiniteSeq,
    SymbolVanishes,
    invertibility_test,
    wiener_inverse,
)
from .weights import Weight

__all__ = [
    "FORMAT_VERSION",
    "ConfigError",
    "ExperimentConfig",
    "envelope_values",
    "generate_operator",
    "run_inverse_closedness",
    "run_wiener",
    "run_kernel",
    "run_gen",
    "parse_symbol",
    "verify_report",
    "worker_count",
]

FORMAT_VERSION = 1

_PROFILE_KINDS = ("exponential", "polynomial", "table")


class ConfigError(ValueError):
    """The experiment configuration is malformed or inconsistent."""


@dataclass
class ExperimentConfig:
    """Everything one experiment needs, serializable and validated."""

    seed: int
    c: int = 1
    window_radius: int = 4
    band_radius: int = 1
    local_dim: int = 2
    q: int = 2
    weight: Weight = field(default_factory=Weight)
    envelope_profile: dict = field(default_factory=lambda: {"kind": "exponential", "rate": 1.0})
    block_rank: int = 1
    trials: int = 1
    boundary: str = "circulant"
    output_dir: Optional[str] = None

    def __post_init__(self):
        try:
            self.seed = int(self.seed)
            self.c = int(self.c)
            self.window_radius = int(self.window_radius)
            self.band_radius = int(self.band_radius)
            self.local_dim = int(self.local_dim)
            self.q = int(self.q)
            self.block_rank = int(self.block_rank)
            self.trials = int(self.trials)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-integer field: {exc}") from exc
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.c < 1:
            raise ConfigError("c must be at least 1")
        if self.window_radius < 0 or self.band_radius < 0:
            raise ConfigError("radii must be nonnegative")
        if self.local_dim < 1 or self.q < 1:
            raise ConfigError("d and q must be positive")
        if not (1 <= self.block_rank <= self.local_dim):
            raise ConfigError("block_rank must satisfy 1 <= block_rank <= d")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.boundary not in ("circulant", "dirichlet"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if not isinstance(self.weight, Weight):
            raise ConfigError("weight must be a Weight")
        self._validate_profile()

    def _validate_profile(self):
        prof = self.envelope_profile
        if not isinstance(prof, dict) or "kind" not in prof:
            raise ConfigError("envelope_profile needs a 'kind' field")
        kind = prof["kind"]
        if kind not in _PROFILE_KINDS:
            raise ConfigError(f"envelope kind must be one of {_PROFILE_KINDS}")
        if kind == "exponential":
            if not (float(prof.get("rate", 0)) > 0):
                raise ConfigError("exponential profile needs rate > 0")
        elif kind == "polynomial":
            if not (float(prof.get("power", 0)) > 0):
                raise ConfigError("polynomial profile needs power > 0")
        else:
            values = prof.get("values")
            want = window_size(self.band_radius, self.c)
            if values is None or len(values) != want:
                raise ConfigError(f"table profile needs exactly {want} values")
            if any(float(v) < 0 for v in values):
                raise ConfigError("table values must be nonnegative")
        if "l1" in prof and not (float(prof["l1"]) > 0):
            raise ConfigError("l1 target must be positive")

    def to_json(self) -> dict:
        out = {
            "format_version": FORMAT_VERSION,
            "seed": self.seed,
            "c": self.c,
            "N": self.window_radius,
            "W": self.band_radius,
            "d": self.local_dim,
            "q": self.q,
            "weight": self.weight.to_json(),
            "envelope_profile": self.envelope_profile,
            "block_rank": self.block_rank,
            "trials": self.trials,
            "boundary": self.boundary,
        }
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        version = obj.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ConfigError(f"unsupported format_version {version}")
        unknown = set(obj) - {
            "format_version", "seed", "c", "N", "W", "d", "q", "weight",
            "envelope_profile", "block_rank", "trials", "boundary", "output_dir",
        }
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "seed" not in obj:
            raise ConfigError("config needs a seed")
        try:
            weight = Weight.from_json(obj["weight"]) if "weight" in obj else Weight()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad weight: {exc}") from exc
        return cls(
            seed=obj["seed"],
            c=obj.get("c", 1),
            window_radius=obj.get("N", 4),
            band_radius=obj.get("W", 1),
            local_dim=obj.get("d", 2),
            q=obj.get("q", 2),
            weight=weight,
            envelope_profile=obj.get("envelope_profile", {"kind": "exponential", "rate": 1.0}),
            block_rank=obj.get("block_rank", 1),
            trials=obj.get("trials", 1),
            boundary=obj.get("boundary", "circulant"),
            output_dir=obj.get("output_dir"),
        )


def envelope_values(cfg: ExperimentConfig) -> np.ndarray:
    """The target envelope beta_m over the band, from the profile."""
    offsets = list(window_indices(cfg.band_radius, cfg.c))
    prof = cfg.envelope_profile
    kind = prof["kind"]
    if kind == "exponential":
        rate = float(prof["rate"])
        vals = np.array([np.exp(-rate * sum(abs(x) for x in m)) for m in offsets])
    elif kind == "polynomial":
        power = float(prof["power"])
        vals = np.array([(1.0 + sum(abs(x) for x in m)) ** -power for m in offsets])
    else:
        vals = np.array([float(v) for v in prof["values"]])
    if "l1" in prof:
        total = vals.sum()
        if total <= 0:
            raise ConfigError("cannot rescale an all-zero envelope to an l1 target")
        vals = vals * (float(prof["l1"]) / total)
    shape = (2 * cfg.band_radius + 1,) * cfg.c
    return vals.reshape(shape)


def _draw_matrix(rng: Xoshiro256StarStar, rows: int, cols: int) -> np.ndarray:
    out = np.empty((rows, cols), dtype=np.complex128)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = rng.complex_normal()
    return out


def generate_operator(cfg: ExperimentConfig, trial: int) -> CDOperator:
    """Draw the trial's operator: random rank-limited blocks under the envelope.

    Each stored block is X @ Y with X of shape (d, block_rank) and Y of
    shape (block_rank, d), rescaled so its trace norm is beta_m * r with
    r uniform in [0.5, 1]; the factorization (rows of Y against columns
    of X) is kept alongside.  Draw order is fixed (cells then offsets,
    lexicographic), so the operator is a pure function of (seed, trial).
    """
    rng = Xoshiro256StarStar(cfg.seed, stream=trial)
    beta = envelope_values(cfg)
    d, rank = cfg.local_dim, cfg.block_rank
    blocks = {}
    factorizations = {}
    for k in window_indices(cfg.window_radius, cfg.c):
        for m in window_indices(cfg.band_radius, cfg.c):
            target = float(beta[tuple(x + cfg.band_radius for x in m)])
            if target == 0.0:
                continue
            r_km = rng.uniform_in(0.5, 1.0)
            x = _draw_matrix(rng, d, rank)
            y = _draw_matrix(rng, rank, d)
            g = x @ y
            tn = trace_norm(g)
            if tn == 0.0:  # pragma: no cover - measure-zero draw
                continue
            scale = target * r_km / tn
            blocks[(k, m)] = g * scale
            factorizations[(k, m)] = NuclearFactorization(
                dim=d,
                terms=[(scale * y[i, :], x[:, i].copy()) for i in range(rank)],
            )
    op = CDOperator(
        c=cfg.c,
        window_radius=cfg.window_radius,
        band_radius=cfg.band_radius,
        local_dim=d,
        boundary=cfg.boundary,
        blocks=blocks,
    )
    op.factorizations = factorizations
    return op


def worker_count() -> int:
    """Worker cap from DECAYALG_THREADS (default: serial)."""
    raw = os.environ.get("DECAYALG_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"DECAYALG_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _map_trials(fn, n_trials: int) -> list:
    workers = worker_count()
    if workers <= 1 or n_trials <= 1:
        return [fn(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=min(workers, n_trials)) as pool:
        return list(pool.map(fn, range(n_trials)))


def _json_float(x) -> Optional[float]:
    """NaN/inf become null: reports stay strict JSON."""
    x = float(x)
    return x if np.isfinite(x) else None


def _write_report(report: dict, out_dir: Path) -> Path:
    path = out_dir / "report.json"
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return path


def _resolve_out_dir(cfg_output_dir, out_dir) -> Path:
    path = Path(out_dir if out_dir is not None else (cfg_output_dir or "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


# ------------------------------------------------------ inverse closedness


def _domination_holds(op: CDOperator, beta: np.ndarray, band_radius: int) -> bool:
    for (_, m), blk in op.blocks.items():
        bound = float(beta[tuple(x + band_radius for x in m)])
        if trace_norm(blk) > bound * (1.0 + 1e-12) + 1e-15:
            return False
    return True


def run_inverse_closedness(cfg: ExperimentConfig, out_dir=None,
                           fmt: str = "csv") -> dict:
    """Generate, certify, invert, and measure decay, one record per trial."""
    out_path = _resolve_out_dir(cfg.output_dir, out_dir)
    beta = envelope_values(cfg)

    def one_trial(trial: int) -> dict:
        op = generate_operator(cfg, trial)
        fitted = fit_envelope(op, "nuclear")
        env_l1 = fitted.l1()
        if env_l1 < 1.0:
            check = "envelope_l1"
        else:
            radius = float(np.abs(np.linalg.eigvals(densify(op))).max(initial=0.0))
            if radius < 1.0:
                check = "spectral_radius"
            else:
                return {
                    "trial": trial,
                    "error": "not certified invertible "
                             f"(envelope l1 {env_l1:.3f}, spectral radius {radius:.3f})",
                }
        try:
            res = invert_one_plus(op, cfg.weight)
        except NumericallySingular as exc:
            return {"trial": trial, "error": str(exc)}
        slope = decay_slope(fit_envelope(res.t1, "nuclear"))
        report = res.envelope_report
        return {
            "trial": trial,
            "residual": _json_float(res.residual),
            "condition": _json_float(res.condition),
            "slope": _json_float(slope),
            "weighted_total": _json_float(report.total),
            "final_increment": _json_float(report.final_increment),
            "envelope_l1": _json_float(env_l1),
            "invertibility_check": check,
            "envelope_dominates": _domination_holds(op, beta, cfg.band_radius),
            "_envelope_report": report,
        }

    raw = _map_trials(one_trial, cfg.trials)

    records = []
    for trial, rec in enumerate(raw):
        rec = dict(rec)
        report = rec.pop("_envelope_report", None)
        if report is not None:
            if fmt == "csv":
                name = f"envelope_trial_{trial:03d}.csv"
                report.to_csv(out_path / name)
                rec["envelope_csv"] = name
            else:
                rec["envelope_rows"] = [
                    list(m) + [beta_v, g, weighted, running]
                    for m, beta_v, g, weighted, running in report.rows
                ]
        records.append(rec)

    ok = [r for r in records if "error" not in r]
    slopes = [r["slope"] for r in ok if r["slope"] is not None]
    aggregates = {
        "trials_failed": len(records) - len(ok),
        "median_slope": statistics.median(slopes) if slopes else None,
        "max_residual": max((r["residual"] for r in ok), default=None),
        "max_condition": max((r["condition"] for r in ok), default=None),
    }
    report = {
        "format_version": FORMAT_VERSION,
        "kind": "inverse_closedness",
        "config": cfg.to_json(),
        "records": records,
        "aggregates": aggregates,
    }
    _write_report(report, out_path)
    return report


# ----------------------------------------------------------------- wiener


def parse_symbol(text: str, c: int = 1) -> FiniteSeq:
    """Parse a one-variable symbol like "2+u", "3+u+u^{-1}", "1-0.5*u^2".

    Terms are [coefficient][*][u[^exponent]]; exponents may be braced.
    Only c=1 symbols are expressible; richer inputs go through JSON.
    """
    if c != 1:
        raise ConfigError("symbol strings are one-dimensional; use a JSON seq")
    s = text.replace("−", "-").replace("⋅", "*").replace(" ", "")
    if not s:
        raise ConfigError("empty symbol")
    entries: dict = {}
    # split into signed terms
    terms = []
    start = 0
    for i, ch in enumerate(s):
        if ch in "+-" and i > start and s[i - 1] not in "eE^+-*({":
            terms.append(s[start:i])
            start = i
    terms.append(s[start:])
    for term in terms:
        if not term or term in "+-":
            raise ConfigError(f"malformed term in symbol {text!r}")
        sign = 1.0
        while term and term[0] in "+-":
            if term[0] == "-":
                sign = -sign
            term = term[1:]
        if "u" in term:
            head, _, tail = term.partition("u")
            head = head.rstrip("*")
            try:
                coef = complex(head) if head else 1.0 + 0j
            except ValueError as exc:
                raise ConfigError(f"bad coefficient in {term!r}") from exc
            if tail.startswith("^"):
                exp_text = tail[1:].strip("{}")
                try:
                    power = int(exp_text)
                except ValueError as exc:
                    raise ConfigError(f"bad exponent in {term!r}") from exc
            elif tail:
                raise ConfigError(f"malformed term {term!r}")
            else:
                power = 1
        else:
            try:
                coef = complex(term)
            except ValueError as exc:
                raise ConfigError(f"bad coefficient {term!r}") from exc
            power = 0
        entries[(power,)] = entries.get((power,), 0j) + sign * coef
    radius = max(abs(p[0]) for p in entries)
    out = FiniteSeq.zeros(1, radius)
    for (p,), v in entries.items():
        out.data[p + radius] = v
    return out


def _geometric_closed_form_error(seq: FiniteSeq, inverse: FiniteSeq) -> Optional[float]:
    """Exact-coefficient check for two-term symbols lam + gam * u^m0."""
    support = list(seq.support())
    if len(support) != 2:
        return None
    entries = dict(support)
    origin = (0,) * seq.c
    if origin not in entries:
        return None
    lam = entries.pop(origin)
    (m0, gam), = entries.items()
    if abs(lam) <= abs(gam):
        return None
    worst = 0.0
    r_out = inverse.radius
    j = 0
    while True:
        pos = tuple(j * x for x in m0)
        if max(abs(x) for x in pos) > r_out:
            break
        expected = (-gam) ** j / lam ** (j + 1)
        worst = max(worst, abs(inverse[pos] - expected))
        j += 1
    # everything off the geometric ray must vanish
    ray = {tuple(j * x for x in m0) for j in range(r_out * seq.radius + r_out + 2)}
    for pos, val in inverse.support():
        if pos not in ray:
            worst = max(worst, abs(val))
    return worst


def run_wiener(cfg: dict, out_dir=None, fmt: str = "csv") -> dict:
    """Invert a scalar symbol on the torus and report coefficient decay."""
    if not isinstance(cfg, dict):
        raise ConfigError("wiener config must be a JSON object")
    version = cfg.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported format_version {version}")
    out_path = _resolve_out_dir(cfg.get("output_dir"), out_dir)
    if "seq" in cfg:
        seq = FiniteSeq.from_json(cfg["seq"])
    elif "symbol" in cfg:
        seq = parse_symbol(cfg["symbol"], int(cfg.get("c", 1)))
    else:
        raise ConfigError("wiener config needs 'symbol' or 'seq'")
    try:
        grid = int(cfg["grid"])
        out_radius = int(cfg["out_radius"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"wiener config needs integer grid/out_radius: {exc}") from exc
    weight = Weight.from_json(cfg["weight"]) if "weight" in cfg else Weight()
    margin = float(cfg.get("margin", 0.0))

    probe = invertibility_test(seq, grid, margin)
    report: dict = {
        "format_version": FORMAT_VERSION,
        "kind": "wiener",
        "config": {
            "format_version": FORMAT_VERSION,
            "grid": grid,
            "out_radius": out_radius,
            "weight": weight.to_json(),
            "margin": margin,
            **({"symbol": cfg["symbol"]} if "symbol" in cfg else {"seq": cfg["seq"]}),
        },
        "min_modulus": _json_float(probe.min_modulus),
    }
    try:
        result = wiener_inverse(seq, grid, out_radius)
    except SymbolVanishes as exc:
        report["error"] = f"symbol_vanishes: {exc}"
        _write_report(report, out_path)
        return report

    closed = _geometric_closed_form_error(seq, result.inverse)
    partial = []
    running = 0.0
    by_radius: dict = {}
    for pos, val in result.inverse.support():
        by_radius.setdefault(max(abs(x) for x in pos), []).append((pos, val))
    for r in range(out_radius + 1):
        increment = 0.0
        for pos, val in sorted(by_radius.get(r, [])):
            coords = np.array([pos], dtype=float)
            increment += float(weight.eval_many(coords)[0]) * abs(val)
        running += increment
        partial.append((r, running, increment))

    report["residual"] = _json_float(result.residual)
    if closed is not None:
        report["closed_form_max_err"] = _json_float(closed)
    report["weighted_total"] = _json_float(running)
    report["final_increment"] = _json_float(partial[-1][2] if partial else 0.0)

    inverse_json = result.inverse.to_json()
    if fmt == "csv":
        (out_path / "inverse.json").write_text(
            json.dumps(inverse_json, sort_keys=True, indent=2) + "\n"
        )
        with open(out_path / "partial_sums.csv", "w", newline="") as fh:
            fh.write("radius,partial_sum,increment\n")
            for r, total, inc in partial:
                fh.write(f"{r},{total!r},{inc!r}\n")
        report["inverse_json"] = "inverse.json"
        report["partial_sums_csv"] = "partial_sums.csv"
    else:
        report["inverse"] = inverse_json
        report["partial_sums"] = [[r, total, inc] for r, total, inc in partial]
    _write_report(report, out_path)
    return report


# ----------------------------------------------------------------- kernel


def run_kernel(cfg: ExperimentConfig, out_dir=None, fmt: str = "csv") -> dict:
    """Blocking isometry + kernel consistency experiment."""
    if cfg.q ** cfg.c != cfg.local_dim:
        raise ConfigError(
            f"kernel experiments need d = q^c (got d={cfg.local_dim}, "
            f"q^c={cfg.q ** cfg.c})"
        )
    out_path = _resolve_out_dir(cfg.output_dir, out_dir)

    def one_trial(trial: int) -> dict:
        op = generate_operator(cfg, trial)
        rng = Xoshiro256StarStar(cfg.seed ^ 0x6B65726E, stream=trial)
        n_cells = window_size(cfg.window_radius, cfg.c)
        vals = np.empty((n_cells, cfg.q ** cfg.c), dtype=np.complex128)
        for i in range(n_cells):
            for j in range(cfg.q ** cfg.c):
                vals[i, j] = rng.complex_normal()
        f = GridFunction(cfg.c, cfg.window_radius, cfg.q, vals)

        kern = assemble_kernel(op, cfg.q)
        via_kernel = apply_kernel(kern, f)
        via_blocks = unblock(apply(op, block(f)), cfg.q)
        scale = max(1e-300, float(np.abs(via_blocks.values).max(initial=0.0)))
        rel_err = float(np.abs(via_kernel.values - via_blocks.values).max(initial=0.0)) / scale

        blocked = block(f)
        isometry = {
            str(p): f.lp_norm(p) == blocked.norm(p, cell_weight=f.cell_volume_weight)
            for p in (1, 2, "inf")
        }
        round_trip = bool(np.array_equal(unblock(blocked, cfg.q).values, f.values))
        return {
            "trial": trial,
            "kernel_rel_err": _json_float(rel_err),
            "isometry_exact": isometry,
            "round_trip_exact": round_trip,
            "_kernel": kern,
            "_grid": f,
        }

    raw = _map_trials(one_trial, cfg.trials)
    records = []
    for trial, rec in enumerate(raw):
        rec = dict(rec)
        kern = rec.pop("_kernel")
        grid = rec.pop("_grid")
        if trial == 0 and fmt == "csv":
            center = ((0,) * cfg.c, (0,) * cfg.c)
            if center in kern.blocks:
                name = "kernel_block_trial_000.csv"
                kernel_block_to_csv(kern, center[0], center[1], out_path / name)
                rec["kernel_block_csv"] = name
            gname = "input_trial_000.grid"
            write_grid_function(grid, out_path / gname)
            rec["grid_file"] = gname
        records.append(rec)

    aggregates = {
        "max_kernel_rel_err": max((r["kernel_rel_err"] for r in records), default=None),
        "all_isometries_exact": all(
            all(r["isometry_exact"].values()) for r in records
        ),
        "all_round_trips_exact": all(r["round_trip_exact"] for r in records),
        "trials_failed": 0,
    }
    report = {
        "format_version": FORMAT_VERSION,
        "kind": "kernel",
        "config": cfg.to_json(),
        "records": records,
        "aggregates": aggregates,
    }
    _write_report(report, out_path)
    return report


# -------------------------------------------------------------------- gen


def run_gen(cfg: ExperimentConfig, out_dir=None, fmt: str = "csv") -> dict:
    """Write the trial operators themselves (JSON) plus a manifest."""
    out_path = _resolve_out_dir(cfg.output_dir, out_dir)

    def one_trial(trial: int) -> dict:
        op = generate_operator(cfg, trial)
        return {
            "trial": trial,
            "n_blocks": len(op.blocks),
            "envelope_l1": _json_float(fit_envelope(op, "nuclear").l1()),
            "_op": op,
        }

    raw = _map_trials(one_trial, cfg.trials)
    records = []
    for trial, rec in enumerate(raw):
        rec = dict(rec)
        op = rec.pop("_op")
        name = f"operator_trial_{trial:03d}.json"
        (out_path / name).write_text(
            json.dumps(op.to_json(), sort_keys=True, indent=2) + "\n"
        )
        rec["operator_json"] = name
        records.append(rec)
    report = {
        "format_version": FORMAT_VERSION,
        "kind": "gen",
        "config": cfg.to_json(),
        "records": records,
        "aggregates": {"trials_failed": 0},
    }
    _write_report(report, out_path)
    return report


# ---------------------------------------------------------------- verify


def _verify_envelope_csv(path: Path, weight: Weight, c: int) -> list:
    problems = []
    if not path.exists():
        return [f"missing envelope CSV {path.name}"]
    lines = path.read_text().splitlines()
    want_header = ",".join(
        [f"m_{i + 1}" for i in range(c)] + ["beta", "weight", "weighted_beta", "cumsum"]
    )
    if not lines or lines[0] != want_header:
        return [f"{path.name}: bad header"]
    running = 0.0
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != c + 4:
            problems.append(f"{path.name}:{ln}: wrong column count")
            continue
        m = tuple(int(x) for x in parts[:c])
        beta, g, weighted, cumsum = (float(x) for x in parts[c:])
        g_expect = float(weight.eval_many(np.array([m], dtype=float))[0])
        if g != g_expect:
            problems.append(f"{path.name}:{ln}: weight column mismatch")
        if weighted != g * beta:
            problems.append(f"{path.name}:{ln}: weighted_beta mismatch")
        running += weighted
        if cumsum != running:
            problems.append(f"{path.name}:{ln}: cumsum mismatch")
    return problems


def verify_report(path) -> list:
    """Re-derive everything derivable in a report; list every mismatch."""
    path = Path(path)
    try:
        report = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        return [f"cannot load report: {exc}"]
    problems = []
    if report.get("format_version") != FORMAT_VERSION:
        problems.append(f"unsupported format_version {report.get('format_version')}")
        return problems
    kind = report.get("kind")
    records = report.get("records", [])
    aggregates = report.get("aggregates", {})

    ok = [r for r in records if "error" not in r]
    failed = len(records) - len(ok)
    if "records" in report and aggregates.get("trials_failed") != failed:
        problems.append("aggregate trials_failed does not match records")

    if kind == "inverse_closedness":
        slopes = [r["slope"] for r in ok if r.get("slope") is not None]
        median = statistics.median(slopes) if slopes else None
        if aggregates.get("median_slope") != median:
            problems.append("aggregate median_slope does not match records")
        max_res = max((r["residual"] for r in ok), default=None)
        if aggregates.get("max_residual") != max_res:
            problems.append("aggregate max_residual does not match records")
        for r in ok:
            if not r.get("envelope_dominates", False):
                problems.append(f"trial {r.get('trial')}: envelope domination violated")
        try:
            weight = Weight.from_json(report["config"]["weight"])
            c = int(report["config"]["c"])
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"config not reconstructible: {exc}")
            return problems
        for r in ok:
            name = r.get("envelope_csv")
            if name is not None:
                problems.extend(_verify_envelope_csv(path.parent / name, weight, c))
            rows = r.get("envelope_rows")
            if rows is not None:
                running = 0.0
                for row in rows:
                    beta_v, g, weighted, cumsum = row[c:]
                    if weighted != g * beta_v:
                        problems.append(
                            f"trial {r.get('trial')}: embedded weighted_beta mismatch"
                        )
                    running += weighted
                    if cumsum != running:
                        problems.append(
                            f"trial {r.get('trial')}: embedded cumsum mismatch"
                        )
    elif kind == "kernel":
        max_err = max((r["kernel_rel_err"] for r in ok), default=None)
        if aggregates.get("max_kernel_rel_err") != max_err:
            problems.append("aggregate max_kernel_rel_err does not match records")
        if aggregates.get("all_isometries_exact") != all(
            all(r["isometry_exact"].values()) for r in ok
        ):
            problems.append("aggregate all_isometries_exact does not match records")
    elif kind == "wiener":
        if "error" not in report and report.get("residual") is None:
            problems.append("wiener report has neither residual nor error")
    elif kind == "gen":
        for r in records:
            name = r.get("operator_json")
            if name is None or not (path.parent / name).exists():
                problems.append(f"trial {r.get('trial')}: operator file missing")
    else:
        problems.append(f"unknown report kind {kind!r}")
    return problems
