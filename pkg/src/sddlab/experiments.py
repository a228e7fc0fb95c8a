"""Randomized verification harnesses for the structural claims of the model.

Four experiments: cone invariance (the flow preserves the sign cones),
exact coincidence (variant p equals full on the positive cone, bitwise),
Lipschitz sampling (the kernel and delay-term bounds hold on random pairs),
and attraction rate (high-mode differences contract exponentially under the
certified variant; the measurable proxy for low-mode attraction).

Trials use per-trial generators seeded base + index, so runs are
reproducible and trial order is irrelevant.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .conditions import condition_report, lipschitz_M1
from .errors import ContractViolation
from .history import (HistorySegment, norm_C, norm_L1L1, theta_weights)
from .kernel import KernelVariant, eval_xi, l11_constant
from .nonlinear import delay_term
from .solver import ProblemSpec, evolve, steps_for_horizon
from .spectral import GridField, ModeVector, OperatorSpec, forward, inverse

FAMILIES = ("random_positive_fourier", "random_signed_fourier",
            "gaussian_bumps", "constant")
POSITIVE_FAMILIES = ("random_positive_fourier", "gaussian_bumps", "constant")

CONE_TOL = 1e-12
B1_TOL = 1e-8
KERNEL_TOL = 1e-10
NOISE_FLOOR = 1e-13
MIN_FIT_SAMPLES = 10
R2_MIN = 0.9


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int
    seed: int
    horizon: float
    family: str = "random_positive_fourier"
    amplitude: float = 1.0
    stride: int = 10
    alpha_min: Optional[float] = None

    def __post_init__(self):
        if not (isinstance(self.trials, int) and not isinstance(self.trials, bool)
                and self.trials >= 1):
            raise ContractViolation("trials must be an int >= 1")
        if not (isinstance(self.seed, int) and not isinstance(self.seed, bool)):
            raise ContractViolation("seed must be an int")
        if not (np.isfinite(self.horizon) and self.horizon > 0.0):
            raise ContractViolation("horizon must be finite and > 0")
        if self.family not in FAMILIES:
            raise ContractViolation(f"family must be one of {FAMILIES}")
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0.0):
            raise ContractViolation("amplitude must be finite and >= 0")
        if not (isinstance(self.stride, int) and not isinstance(self.stride, bool)
                and self.stride >= 1):
            raise ContractViolation("stride must be an int >= 1")


@dataclass(frozen=True)
class ExperimentResult:
    """pass/fail plus per-trial metrics; informational results never gate."""

    name: str
    passed: bool
    trials: list
    summary: dict
    informational: bool = False

    def summary_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "informational": self.informational,
            "summary": self.summary,
        }

    def to_dict(self) -> dict:
        out = self.summary_dict()
        out["trials"] = self.trials
        return out


def _map_trials(fn, n: int, jobs: int) -> list:
    """Run fn over trial indices; results ordered by index regardless of jobs."""
    if jobs <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, range(n)))


def _fourier_field(op: OperatorSpec, rng: np.random.Generator,
                   amplitude: float) -> np.ndarray:
    k = np.arange(1, op.modes + 1, dtype=float)
    coeffs = rng.normal(0.0, amplitude / k)
    return inverse(op, ModeVector(coeffs)).values


def make_initial_history(op: OperatorSpec, r: float, m: int, family: str,
                         amplitude: float, rng: np.random.Generator,
                         sign: float = 1.0) -> HistorySegment:
    """Draw one history segment; draws are independent of m (m only samples
    the underlying theta-smooth object), so refinements share initial data."""
    if family not in FAMILIES:
        raise ContractViolation(f"family must be one of {FAMILIES}")
    if not amplitude >= 0.0:
        raise ContractViolation("amplitude must be >= 0")
    s = (np.arange(m + 1) / m)[:, None]
    if family == "constant":
        rows = np.full((m + 1, op.grid_points), amplitude)
    elif family == "random_signed_fourier":
        f0 = _fourier_field(op, rng, amplitude)
        f1 = _fourier_field(op, rng, amplitude)
        rows = (1.0 - s) * f0 + s * f1
    elif family == "random_positive_fourier":
        # clip then offset: strict interior of the positive cone
        g0 = np.maximum(_fourier_field(op, rng, amplitude), 0.0)
        g1 = np.maximum(_fourier_field(op, rng, amplitude), 0.0)
        rows = (1.0 - s) * g0 + s * g1 + amplitude
    else:  # gaussian_bumps
        x = op.nodes()
        L = op.domain_length
        field = np.zeros(op.grid_points)
        for _ in range(3):
            a = rng.uniform(0.25, 1.0)
            c = rng.uniform(0.2, 0.8) * L
            w = rng.uniform(0.05, 0.15) * L
            field += a * np.exp(-((x - c) ** 2) / (2.0 * w * w))
        rows = (0.7 + 0.3 * s) * (amplitude * field)
    if sign != 1.0:
        rows = rows * sign
    return HistorySegment(operator=op, r=r, m=m, values=rows)


def _grid_l2(op: OperatorSpec, values: np.ndarray) -> float:
    return float(np.sqrt(op.h_x * np.dot(values, values)))


def run_cone_invariance(problem: ProblemSpec, cfg: ExperimentConfig,
                        cone: str = "positive", jobs: int = 1) -> ExperimentResult:
    """Evolve cone members and record the worst signed excursion per trial."""
    if cone not in ("positive", "negative"):
        raise ContractViolation("cone must be 'positive' or 'negative'")
    if cfg.family not in POSITIVE_FAMILIES:
        raise ContractViolation(
            f"family {cfg.family!r} does not produce members of the {cone} cone")
    sign = 1.0 if cone == "positive" else -1.0
    prob = replace(problem, steps=steps_for_horizon(problem.kernel, cfg.horizon))

    def trial(i: int) -> dict:
        rng = np.random.default_rng(cfg.seed + i)
        phi = make_initial_history(problem.operator, problem.r, problem.m,
                                   cfg.family, cfg.amplitude, rng, sign=sign)
        rec = evolve(prob, phi, stride=cfg.stride)
        if cone == "positive":
            extreme = rec.min_overall
            violation = max(0.0, -extreme)
        else:
            extreme = rec.max_overall
            violation = max(0.0, extreme)
        return {"trial": i, "extreme": extreme, "violation": violation,
                "passed": violation <= CONE_TOL}

    rows = _map_trials(trial, cfg.trials, jobs)
    max_violation = max(row["violation"] for row in rows)
    passed = all(row["passed"] for row in rows)
    summary = {
        "cone": cone,
        "variant": prob.variant.value,
        "tolerance": CONE_TOL,
        "max_violation": max_violation,
        "trials": cfg.trials,
        "horizon": cfg.horizon,
        "family": cfg.family,
        "amplitude": cfg.amplitude,
        "seed": cfg.seed,
    }
    return ExperimentResult(name=f"cone_invariance_{cone}", passed=passed,
                            trials=rows, summary=summary)


def _negate_node(phi: HistorySegment, amplitude: float) -> HistorySegment:
    """Flip one interior node strictly negative (coincidence witness datum)."""
    rows = phi.values.copy()
    j = phi.m // 2
    i = phi.operator.grid_points // 2
    rows[j, i] = -max(abs(rows[j, i]), amplitude)
    return HistorySegment(operator=phi.operator, r=phi.r, m=phi.m, values=rows)


def run_coincidence(problem: ProblemSpec, cfg: ExperimentConfig,
                    cone: str = "positive", include_witness: bool = True,
                    jobs: int = 1) -> ExperimentResult:
    """Variant full vs the one-sided variant on cone data; distance must be
    exactly zero (both runs take bitwise-identical evaluation paths)."""
    if cone not in ("positive", "negative"):
        raise ContractViolation("cone must be 'positive' or 'negative'")
    if cfg.family not in POSITIVE_FAMILIES:
        raise ContractViolation(
            f"family {cfg.family!r} does not produce members of the {cone} cone")
    sign = 1.0 if cone == "positive" else -1.0
    one_sided = KernelVariant.P if cone == "positive" else KernelVariant.N
    steps = steps_for_horizon(problem.kernel, cfg.horizon)
    prob_full = replace(problem, variant=KernelVariant.FULL, steps=steps)
    prob_side = replace(problem, variant=one_sided, steps=steps)
    op = problem.operator

    def pair_distance(phi: HistorySegment) -> float:
        rec_a = evolve(prob_full, phi, stride=cfg.stride, record_fields=True)
        rec_b = evolve(prob_side, phi, stride=cfg.stride, record_fields=True)
        diff = rec_a.fields - rec_b.fields
        return float(np.sqrt(op.h_x * (diff * diff).sum(axis=1)).max())

    def trial(i: int) -> dict:
        rng = np.random.default_rng(cfg.seed + i)
        phi = make_initial_history(op, problem.r, problem.m, cfg.family,
                                   cfg.amplitude, rng, sign=sign)
        dist = pair_distance(phi)
        return {"trial": i, "distance": dist, "informational": False,
                "passed": dist == 0.0}

    rows = _map_trials(trial, cfg.trials, jobs)
    witness_distance = None
    if include_witness and cone == "positive":
        rng = np.random.default_rng(cfg.seed + cfg.trials)
        phi = make_initial_history(op, problem.r, problem.m, cfg.family,
                                   cfg.amplitude, rng, sign=sign)
        witness_distance = pair_distance(_negate_node(phi, cfg.amplitude))
        rows.append({"trial": -1, "distance": witness_distance,
                     "informational": True, "passed": True})
    regular = [row for row in rows if not row["informational"]]
    passed = all(row["passed"] for row in regular)
    summary = {
        "cone": cone,
        "variants": ["full", one_sided.value],
        "tolerance": 0.0,
        "max_distance": max(row["distance"] for row in regular),
        "witness_distance": witness_distance,
        "trials": cfg.trials,
        "horizon": cfg.horizon,
        "family": cfg.family,
        "amplitude": cfg.amplitude,
        "seed": cfg.seed,
    }
    return ExperimentResult(name=f"coincidence_{cone}", passed=passed,
                            trials=rows, summary=summary)


def _trapezoid_abs(r: float, m: int, values: np.ndarray) -> float:
    return float(np.dot(theta_weights(r, m), np.abs(values)))


def run_lipschitz_sampling(problem: ProblemSpec, cfg: ExperimentConfig,
                           jobs: int = 1) -> ExperimentResult:
    """Sample segment pairs and check the kernel and delay-term bounds.

    Kernel bound:      int |xi(., v1) - xi(., v2)| <= l11 * ||v1 - v2||_L1L1
    Delay-term bound:  ||B1(v1) - B1(v2)||_L2 <= M1 * ||v1 - v2||_C

    per variant with its own constants.  Pair types cycle: independent draws,
    a scaled copy, and a nearby perturbation (covers clipped and unclipped
    gate regimes).  Zero-difference pairs are skipped.
    """
    op = problem.operator
    ks = problem.kernel
    nl = problem.nonlinearity
    m1 = {var: lipschitz_M1(problem, var) for var in KernelVariant}
    l11 = {var: l11_constant(ks, var) for var in KernelVariant}

    def trial(i: int) -> dict:
        rng = np.random.default_rng(cfg.seed + i)
        v1 = make_initial_history(op, problem.r, problem.m, cfg.family,
                                  cfg.amplitude, rng)
        kind = ("independent", "scaled", "near")[i % 3]
        if kind == "independent":
            v2 = make_initial_history(op, problem.r, problem.m, cfg.family,
                                      cfg.amplitude, rng)
        elif kind == "scaled":
            v2 = HistorySegment(operator=op, r=problem.r, m=problem.m,
                                values=rng.uniform(0.0, 2.0) * v1.values)
        else:
            small = make_initial_history(op, problem.r, problem.m, cfg.family,
                                         cfg.amplitude, rng)
            v2 = HistorySegment(operator=op, r=problem.r, m=problem.m,
                                values=v1.values + 1e-4 * small.values)
        delta = HistorySegment(operator=op, r=problem.r, m=problem.m,
                               values=v1.values - v2.values)
        dC = norm_C(delta)
        if dC == 0.0:
            return {"trial": i, "pair": kind, "status": "skipped",
                    "b1_ratio": None, "kernel_ratio_full": None,
                    "kernel_ratio_p": None, "kernel_ratio_n": None,
                    "passed": True}
        d11 = norm_L1L1(delta)
        row = {"trial": i, "pair": kind, "status": "ok"}
        ok = True
        for var in KernelVariant:
            num = _trapezoid_abs(problem.r, problem.m,
                                 eval_xi(ks, v1, var) - eval_xi(ks, v2, var))
            den = l11[var] * d11
            ratio = 0.0 if num == 0.0 else num / den
            row[f"kernel_ratio_{var.value}"] = ratio
            ok = ok and ratio <= 1.0 + KERNEL_TOL
        dB = (delay_term(nl, ks, v1, problem.variant).values
              - delay_term(nl, ks, v2, problem.variant).values)
        num = _grid_l2(op, dB)
        ratio = 0.0 if num == 0.0 else num / (m1[problem.variant] * dC)
        row["b1_ratio"] = ratio
        ok = ok and ratio <= 1.0 + B1_TOL
        row["passed"] = ok
        return row

    rows = _map_trials(trial, cfg.trials, jobs)
    used = [row for row in rows if row["status"] == "ok"]
    kernel_ratios = [row[f"kernel_ratio_{var.value}"] for row in used
                     for var in KernelVariant]
    b1_ratios = [row["b1_ratio"] for row in used]
    passed = all(row["passed"] for row in rows)
    summary = {
        "variant": problem.variant.value,
        "b1_tolerance": B1_TOL,
        "kernel_tolerance": KERNEL_TOL,
        "max_b1_ratio": max(b1_ratios) if b1_ratios else None,
        "max_kernel_ratio": max(kernel_ratios) if kernel_ratios else None,
        "M1": m1[problem.variant],
        "l11_full": l11[KernelVariant.FULL],
        "l11_p": l11[KernelVariant.P],
        "l11_n": l11[KernelVariant.N],
        "pairs_used": len(used),
        "pairs_skipped": len(rows) - len(used),
        "trials": cfg.trials,
        "family": cfg.family,
        "amplitude": cfg.amplitude,
        "seed": cfg.seed,
    }
    return ExperimentResult(name="lipschitz_sampling", passed=passed,
                            trials=rows, summary=summary)


def _fit_log_linear(t: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log q against t; returns (alpha_hat, R2)."""
    y = np.log(q)
    A = np.vstack([t, np.ones_like(t)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ np.array([slope, intercept])
    ss_res = float(((y - fit) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(r2)


def _high_mode_perturbation(op: OperatorSpec, N: int, amplitude: float,
                            rng: np.random.Generator) -> np.ndarray:
    """A field supported on modes N+1..K, sup-normalized to 0.4 * amplitude."""
    k = np.arange(1, op.modes + 1, dtype=float)
    coeffs = np.zeros(op.modes)
    coeffs[N:] = rng.normal(0.0, amplitude / k[N:])
    field = inverse(op, ModeVector(coeffs)).values
    peak = np.abs(field).max()
    if peak == 0.0:
        return field
    return field * (0.4 * amplitude / peak)


def run_attraction_rate(problem: ProblemSpec, cfg: ExperimentConfig,
                        N: int, jobs: int = 1) -> ExperimentResult:
    """Fit the exponential decay rate of high-mode trajectory differences.

    Pairs differ by a theta-constant perturbation supported on modes above N,
    so the high-mode component q(t) = ||(1-P_N)(u1-u2)|| starts at the full
    difference norm.  Fit window: samples after one delay span r, above the
    noise floor, before the pair enters the slaving cone q <= ||P_N delta||.
    Pass: median fitted rate >= alpha_min with median R2 >= 0.9, or every
    conclusive pair is slaved.  Too-short windows are inconclusive, not
    failures.
    """
    report = condition_report(problem, N)
    if not (report.A4_pass and report.A5_pass_p):
        raise ContractViolation(
            "attraction precondition failed: A4/A5 must pass for variant p "
            f"at N={N}")
    if cfg.family not in POSITIVE_FAMILIES:
        raise ContractViolation(
            f"family {cfg.family!r} does not produce positive-cone members")
    op = problem.operator
    prob = replace(problem, variant=KernelVariant.P,
                   steps=steps_for_horizon(problem.kernel, cfg.horizon))
    alpha_min = cfg.alpha_min if cfg.alpha_min is not None else report.mu / 2.0

    def trial(i: int) -> dict:
        rng = np.random.default_rng(cfg.seed + i)
        phi1 = make_initial_history(op, problem.r, problem.m, cfg.family,
                                    cfg.amplitude, rng)
        pert = _high_mode_perturbation(op, N, cfg.amplitude, rng)
        phi2 = HistorySegment(operator=op, r=problem.r, m=problem.m,
                              values=phi1.values + pert[None, :])
        rec1 = evolve(prob, phi1, stride=cfg.stride, record_fields=True)
        rec2 = evolve(prob, phi2, stride=cfg.stride, record_fields=True)
        diff = rec1.fields - rec2.fields
        full2 = op.h_x * (diff * diff).sum(axis=1)
        if full2[0] == 0.0:
            return {"trial": i, "status": "skipped", "alpha_hat": None,
                    "r2": None, "q0": 0.0, "cone_entry_t": None, "n_window": 0}
        low = np.stack([forward(op, GridField(d)).coeffs[:N] for d in diff])
        p2 = (low * low).sum(axis=1)
        q = np.sqrt(np.maximum(full2 - p2, 0.0))
        pn = np.sqrt(p2)
        t = rec1.times
        in_cone = q <= pn
        cone_idx = int(np.argmax(in_cone)) if bool(in_cone.any()) else None
        window = (t >= problem.r - 1e-12) & (q >= NOISE_FLOOR)
        if cone_idx is not None:
            window &= np.arange(t.size) < cone_idx
        n_window = int(window.sum())
        if n_window >= MIN_FIT_SAMPLES:
            alpha_hat, r2 = _fit_log_linear(t[window], q[window])
            return {"trial": i, "status": "fit", "alpha_hat": alpha_hat,
                    "r2": r2, "q0": float(q[0]),
                    "cone_entry_t": None if cone_idx is None else float(t[cone_idx]),
                    "n_window": n_window}
        if cone_idx is not None and bool(in_cone[cone_idx:].all()):
            return {"trial": i, "status": "slaved", "alpha_hat": None,
                    "r2": None, "q0": float(q[0]),
                    "cone_entry_t": float(t[cone_idx]), "n_window": n_window}
        return {"trial": i, "status": "inconclusive", "alpha_hat": None,
                "r2": None, "q0": float(q[0]), "cone_entry_t": None,
                "n_window": n_window}

    rows = _map_trials(trial, cfg.trials, jobs)
    fits = [row for row in rows if row["status"] == "fit"]
    slaved = [row for row in rows if row["status"] == "slaved"]
    inconclusive = [row for row in rows if row["status"] == "inconclusive"]
    median_alpha = float(np.median([row["alpha_hat"] for row in fits])) if fits else None
    median_r2 = float(np.median([row["r2"] for row in fits])) if fits else None
    informational = False
    if fits:
        passed = median_alpha >= alpha_min and median_r2 >= R2_MIN
    elif slaved and not inconclusive:
        passed = True
    else:
        passed = False
        informational = True  # nothing conclusive either way
    summary = {
        "N": N,
        "mu": report.mu,
        "alpha_min": alpha_min,
        "r2_min": R2_MIN,
        "median_alpha": median_alpha,
        "median_r2": median_r2,
        "noise_floor": NOISE_FLOOR,
        "min_fit_samples": MIN_FIT_SAMPLES,
        "window_policy": ("samples with t >= r, q >= noise floor, "
                          "before cone entry"),
        "n_fit": len(fits),
        "n_slaved": len(slaved),
        "n_inconclusive": len(inconclusive),
        "n_skipped": len(rows) - len(fits) - len(slaved) - len(inconclusive),
        "variant": "p",
        "trials": cfg.trials,
        "horizon": cfg.horizon,
        "stride": cfg.stride,
        "family": cfg.family,
        "amplitude": cfg.amplitude,
        "seed": cfg.seed,
    }
    return ExperimentResult(name="attraction_rate", passed=passed, trials=rows,
                            summary=summary, informational=informational)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(results: list, out_dir: str, format: str = "both") -> list[str]:
    """Write summary.json (summary statistics) and one CSV of per-trial rows
    per experiment into out_dir.  Deterministic: no timestamps, repr floats."""
    if format not in ("json", "csv", "both"):
        raise ContractViolation("format must be 'json', 'csv', or 'both'")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if format in ("json", "both"):
        path = os.path.join(out_dir, "summary.json")
        payload = [res.summary_dict() for res in results]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    if format in ("csv", "both"):
        for res in results:
            path = os.path.join(out_dir, f"{res.name}.csv")
            keys = []
            for row in res.trials:
                for key in row:
                    if key not in keys:
                        keys.append(key)
            lines = []
            if keys:
                lines.append(",".join(keys))
                for row in res.trials:
                    lines.append(",".join(_csv_cell(row.get(key)) for key in keys))
            with open(path, "w") as fh:
                fh.write("\n".join(lines) + ("\n" if lines else ""))
            written.append(path)
    return written
