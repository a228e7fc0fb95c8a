"""Spectral-gap certificates for low-mode attraction.

All arithmetic here uses the analytic eigenvalues lambda_k = (k pi / L)^2;
time stepping elsewhere uses the discrete ones.  The central constant is

    M1 = r sqrt(2 (L_b^2 M_xi^2 + M_b^2 l11^2 |Omega|))

with l11 the variant's kernel L^{1,1} constant.  Checked conditions:

    A4:      lambda_{N+1} - lambda_N >= 2 mu
    A5:      mu > 4 M1  and  delta = (2/mu) M1 exp((lambda_N + mu) r) <= 1/2
    bound3:  M1 <= (gap/8) exp(-(lambda_N + lambda_{N+1}) r / 2)

bound3 is the mu-free packaging: it holds iff A5 holds at mu = gap/2.
A verdict is a certificate that the sufficient conditions hold for a variant;
"neither_certified" never asserts nonexistence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError, ContractViolation
from .kernel import KernelVariant, l11_constant
from .nonlinear import NonlinearitySpec
from .solver import ProblemSpec
from .spectral import analytic_eigenvalues

VERDICTS = ("IM_exists", "PIM_only", "neither_certified")

VERDICT_NOTE = ("verdict certifies sufficient conditions for the named variant; "
                "'neither_certified' does not assert nonexistence")


def m1_constant(r: float, L_b: float, M_xi: float, M_b: float, l11: float,
                domain_length: float) -> float:
    """M1 = r sqrt(2 (L_b^2 M_xi^2 + M_b^2 l11^2 L))."""
    return r * np.sqrt(2.0 * (L_b * L_b * M_xi * M_xi
                              + M_b * M_b * l11 * l11 * domain_length))


def lipschitz_M1(problem: ProblemSpec, variant=None) -> float:
    """M1 for the problem's kernel/nonlinearity under the given variant."""
    if variant is None:
        variant = problem.variant
    variant = KernelVariant(variant)
    nl = problem.nonlinearity
    if not nl.constants_certified:
        raise CertificationError("nonlinearity constants are not certified")
    l11 = l11_constant(problem.kernel, variant)
    return m1_constant(problem.r, nl.L_b, problem.kernel.M_xi, nl.M_b, l11,
                       problem.operator.domain_length)


def gap_check(lambda_N: float, lambda_N1: float, mu: float, M1: float,
              r: float) -> tuple[bool, bool, float]:
    """(A4_pass, A5_pass, delta) at the given mu."""
    if not mu > 0.0:
        raise ContractViolation("mu must be > 0")
    a4 = lambda_N1 - lambda_N >= 2.0 * mu
    delta = (2.0 / mu) * M1 * np.exp((lambda_N + mu) * r)
    a5 = (mu > 4.0 * M1) and (delta <= 0.5)
    return bool(a4), bool(a5), float(delta)


def bound3_check(lambda_N: float, lambda_N1: float, r: float,
                 M1: float) -> tuple[float, bool]:
    """(bound3, M1 <= bound3) with bound3 = (gap/8) exp(-(l_N + l_{N+1}) r / 2)."""
    gap = lambda_N1 - lambda_N
    bound3 = (gap / 8.0) * np.exp(-(lambda_N + lambda_N1) * r / 2.0)
    return float(bound3), bool(M1 <= bound3)


def remark_caps(lambda_N: float, lambda_N1: float, r: float, M_b: float,
                L_b: float, M_xi: float, domain_length: float) -> dict:
    """Sufficient per-parameter caps that together imply bound3 for variant p.

    r_cap:       r <= gap E / (16 L_b M_xi)
    plus_cap:    int|xi_plus| <= gap E / (16 r M_b sqrt(L))
    minus_floor: int|xi_minus| > gap E / (8 r M_b sqrt(L))  (kills the full bound)
    minus_top:   r M_xi / 2, the largest integral the sup cap allows

    with E = exp(-(lambda_N + lambda_{N+1}) r / 2).
    """
    gap = lambda_N1 - lambda_N
    E = np.exp(-(lambda_N + lambda_N1) * r / 2.0)
    root = np.sqrt(domain_length)
    return {
        "E": float(E),
        "r_cap": float(gap * E / (16.0 * L_b * M_xi)),
        "plus_cap": float(gap * E / (16.0 * r * M_b * root)),
        "minus_floor": float(gap * E / (8.0 * r * M_b * root)),
        "minus_top": float(r * M_xi / 2.0),
    }


def certificate_values(*, lambda_N: float, lambda_N1: float, r: float, mu: float,
                       M_b: float, L_b: float, M_xi: float, l11_p: float,
                       l11_n: float, domain_length: float) -> dict:
    """All certificate numbers and flags from scalar inputs (single source)."""
    l11_full = max(l11_p, l11_n)
    M1_p = m1_constant(r, L_b, M_xi, M_b, l11_p, domain_length)
    M1_n = m1_constant(r, L_b, M_xi, M_b, l11_n, domain_length)
    M1_full = m1_constant(r, L_b, M_xi, M_b, l11_full, domain_length)
    A4, A5_p, delta_p = gap_check(lambda_N, lambda_N1, mu, M1_p, r)
    bound3, b3_full = bound3_check(lambda_N, lambda_N1, r, M1_full)
    _, b3_p = bound3_check(lambda_N, lambda_N1, r, M1_p)
    _, b3_n = bound3_check(lambda_N, lambda_N1, r, M1_n)
    caps = remark_caps(lambda_N, lambda_N1, r, M_b, L_b, M_xi, domain_length)
    return {
        "lambda_N": float(lambda_N),
        "lambda_N1": float(lambda_N1),
        "mu": float(mu),
        "M1_full": float(M1_full),
        "M1_p": float(M1_p),
        "M1_n": float(M1_n),
        "delta_p": float(delta_p),
        "bound3": float(bound3),
        "A4_pass": A4,
        "A5_pass_p": A5_p,
        "bound3_pass_full": b3_full,
        "bound3_pass_p": b3_p,
        "bound3_pass_n": b3_n,
        "remark17_pass": bool(r <= caps["r_cap"]),
        "remark18_pass": bool(l11_p <= caps["plus_cap"]),
        "remark19_pass": bool(l11_n > caps["minus_floor"]),
        "caps": caps,
    }


@dataclass(frozen=True)
class ConditionReport:
    N: int
    lambda_N: float
    lambda_N1: float
    mu: float
    M1_full: float
    M1_p: float
    M1_n: float
    delta_p: float
    bound3: float
    A4_pass: bool
    A5_pass_p: bool
    bound3_pass_full: bool
    bound3_pass_p: bool
    bound3_pass_n: bool
    remark17_pass: bool
    remark18_pass: bool
    remark19_pass: bool
    verdict: str
    note: str = VERDICT_NOTE
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ContractViolation(f"verdict must be one of {VERDICTS}")
        if self.verdict == "IM_exists" and not (self.A4_pass and self.bound3_pass_full):
            raise ContractViolation("IM_exists requires A4 and the full-kernel bound")
        if self.verdict == "PIM_only" and not (
                self.A4_pass and self.bound3_pass_p and not self.bound3_pass_full):
            raise ContractViolation(
                "PIM_only requires A4 and the plus-branch bound with the full bound failing")
        gap = self.lambda_N1 - self.lambda_N
        if not 0.0 < self.mu <= gap / 2.0:
            raise ContractViolation("mu must lie in (0, gap/2]")

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "lambda_N": self.lambda_N,
            "lambda_N1": self.lambda_N1,
            "mu": self.mu,
            "M1_full": self.M1_full,
            "M1_p": self.M1_p,
            "M1_n": self.M1_n,
            "delta_p": self.delta_p,
            "bound3": self.bound3,
            "flags": {
                "A4_pass": self.A4_pass,
                "A5_pass_p": self.A5_pass_p,
                "bound3_pass_full": self.bound3_pass_full,
                "bound3_pass_p": self.bound3_pass_p,
                "bound3_pass_n": self.bound3_pass_n,
                "remark17_pass": self.remark17_pass,
                "remark18_pass": self.remark18_pass,
                "remark19_pass": self.remark19_pass,
            },
            "verdict": self.verdict,
            "note": self.note,
            "inputs": self.inputs,
        }

    def csv_rows(self) -> list[tuple[str, str]]:
        rows = []
        d = self.to_dict()
        flags = d.pop("flags")
        d.pop("inputs")
        for key, val in d.items():
            rows.append((key, repr(val) if isinstance(val, float) else str(val)))
        for key, val in flags.items():
            rows.append((key, str(val)))
        return rows


def condition_report(problem: ProblemSpec, N: int, mu: float | None = None) -> ConditionReport:
    """Evaluate every certificate flag for low-mode count N.

    mu defaults to half the spectral gap (the largest value A4 allows).
    """
    op = problem.operator
    if not (isinstance(N, int) and not isinstance(N, bool)):
        raise ContractViolation("N must be an int")
    if not 1 <= N <= op.modes - 1:
        raise ContractViolation("N must be in 1..K-1 (lambda_{N+1} is needed)")
    lam = analytic_eigenvalues(op)
    lam_N, lam_N1 = float(lam[N - 1]), float(lam[N])
    gap = lam_N1 - lam_N
    if mu is None:
        mu = gap / 2.0
    mu = float(mu)
    if not 0.0 < mu <= gap / 2.0:
        raise ContractViolation("mu must lie in (0, gap/2]")

    nl = problem.nonlinearity
    vals = certificate_values(
        lambda_N=lam_N, lambda_N1=lam_N1, r=problem.r, mu=mu,
        M_b=nl.M_b, L_b=nl.L_b, M_xi=problem.kernel.M_xi,
        l11_p=l11_constant(problem.kernel, KernelVariant.P),
        l11_n=l11_constant(problem.kernel, KernelVariant.N),
        domain_length=op.domain_length)

    if vals["A4_pass"] and vals["bound3_pass_full"]:
        verdict = "IM_exists"
    elif vals["A4_pass"] and vals["bound3_pass_p"]:
        verdict = "PIM_only"
    else:
        verdict = "neither_certified"

    inputs = {
        "domain_length": op.domain_length,
        "modes": op.modes,
        "r": problem.r,
        "m": problem.m,
        "M_xi": problem.kernel.M_xi,
        "l11_p": l11_constant(problem.kernel, KernelVariant.P),
        "l11_n": l11_constant(problem.kernel, KernelVariant.N),
        "M_b": nl.M_b,
        "L_b": nl.L_b,
        "kind": nl.kind,
        "p": nl.p,
    }
    return ConditionReport(
        N=N, lambda_N=lam_N, lambda_N1=lam_N1, mu=vals["mu"],
        M1_full=vals["M1_full"], M1_p=vals["M1_p"], M1_n=vals["M1_n"],
        delta_p=vals["delta_p"], bound3=vals["bound3"],
        A4_pass=vals["A4_pass"], A5_pass_p=vals["A5_pass_p"],
        bound3_pass_full=vals["bound3_pass_full"],
        bound3_pass_p=vals["bound3_pass_p"],
        bound3_pass_n=vals["bound3_pass_n"],
        remark17_pass=vals["remark17_pass"],
        remark18_pass=vals["remark18_pass"],
        remark19_pass=vals["remark19_pass"],
        verdict=verdict, inputs=inputs)


@dataclass(frozen=True)
class SynthesisResult:
    feasible: bool
    params: dict | None
    certificate: dict
    search: dict

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "params": self.params,
            "certificate": self.certificate,
            "search": self.search,
        }


def default_r_grid() -> np.ndarray:
    return np.logspace(-3.0, 1.0, 60)


def default_mxi_grid() -> np.ndarray:
    return np.logspace(-6.0, 1.0, 120)


def synthesize_params(N: int, nonlinearity: NonlinearitySpec, domain_length: float,
                      margin: float = 0.1, r_grid=None, mxi_grid=None) -> SynthesisResult:
    """Search (r, M_xi) grids for a PIM-only operating point at low-mode count N.

    At each grid point the plus integral is set to (1 - margin) times its
    sufficient cap and the minus integral inside (minus_floor, r M_xi / 2].
    Returns the first feasible point in lexicographic (r, M_xi) order, or an
    infeasibility certificate naming the binding constraint.
    """
    if not nonlinearity.constants_certified:
        raise CertificationError("nonlinearity constants are not certified")
    if not (isinstance(N, int) and not isinstance(N, bool) and N >= 1):
        raise ContractViolation("N must be an int >= 1")
    L = float(domain_length)
    if not (np.isfinite(L) and L > 0.0):
        raise ContractViolation("domain_length must be finite and > 0")
    if not 0.0 <= margin < 1.0:
        raise ContractViolation("margin must lie in [0, 1)")
    r_grid = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    mxi_grid = default_mxi_grid() if mxi_grid is None else np.asarray(mxi_grid, dtype=float)
    if r_grid.size == 0 or mxi_grid.size == 0:
        raise ContractViolation("search grids must be non-empty")

    lam_N = (N * np.pi / L) ** 2
    lam_N1 = ((N + 1) * np.pi / L) ** 2
    gap = lam_N1 - lam_N
    mu = gap / 2.0
    M_b, L_b = nonlinearity.M_b, nonlinearity.L_b
    # the minus window (minus_floor, r M_xi / 2] is nonempty only for r above this
    r_threshold = 4.0 * L_b / (M_b * np.sqrt(L))

    n_r_cap_reject = 0
    n_window_empty = 0
    n_flag_reject = 0

    for r in r_grid:
        for M_xi in mxi_grid:
            caps = remark_caps(lam_N, lam_N1, r, M_b, L_b, M_xi, L)
            if r > caps["r_cap"]:
                n_r_cap_reject += 1
                continue
            hi = caps["minus_top"]
            if caps["minus_floor"] >= hi:
                n_window_empty += 1
                continue
            ip = (1.0 - margin) * min(caps["plus_cap"], hi)
            im = (1.0 - margin) * hi
            if im <= caps["minus_floor"]:
                im = 0.5 * (caps["minus_floor"] + hi)
            vals = certificate_values(
                lambda_N=lam_N, lambda_N1=lam_N1, r=float(r), mu=mu,
                M_b=M_b, L_b=L_b, M_xi=float(M_xi),
                l11_p=ip, l11_n=im, domain_length=L)
            ok = (vals["A4_pass"] and vals["A5_pass_p"] and vals["bound3_pass_p"]
                  and not vals["bound3_pass_full"] and not vals["bound3_pass_n"]
                  and vals["remark17_pass"] and vals["remark18_pass"]
                  and vals["remark19_pass"])
            if not ok:
                n_flag_reject += 1
                continue
            vals.pop("caps")
            return SynthesisResult(
                feasible=True,
                params={
                    "N": N,
                    "domain_length": L,
                    "r": float(r),
                    "M_xi": float(M_xi),
                    "plus_integral": float(ip),
                    "minus_integral": float(im),
                    "margin": margin,
                },
                certificate=vals,
                search={"r_points": int(r_grid.size), "mxi_points": int(mxi_grid.size)})

    # infeasible: name the binding constraint with the numbers that bind
    rejections = {
        "r_cap": n_r_cap_reject,
        "window_empty": n_window_empty,
        "flags": n_flag_reject,
    }
    rs_above = r_grid[r_grid > r_threshold]
    if rs_above.size == 0:
        certificate = {
            "binding_constraint": "delay_span_grid_below_threshold",
            "r_threshold": float(r_threshold),
            "detail": (
                "the xi_minus window (minus_floor, r*M_xi/2] is empty for every "
                f"r <= {r_threshold!r} and no r in the search grid exceeds that "
                "threshold"),
            "rejections": rejections,
        }
    elif n_flag_reject > 0:
        certificate = {
            "binding_constraint": "certificate_flags",
            "r_threshold": float(r_threshold),
            "detail": ("grid points satisfied the structural caps but no point "
                       "passed every certificate flag"),
            "rejections": rejections,
        }
    else:
        # every grid point died on a structural cap; quantify the squeeze:
        # for r above the threshold the r-cap bounds M_xi by gap*E/(16 L_b r)
        caps_above = (gap * np.exp(-(lam_N + lam_N1) * rs_above / 2.0)
                      / (16.0 * L_b * rs_above))
        mxi_cap = float(caps_above.max())
        certificate = {
            "binding_constraint": "xi_minus_window_empty",
            "r_threshold": float(r_threshold),
            "rejections": rejections,
        }
        if mxi_cap < float(mxi_grid.min()):
            certificate["max_M_xi_allowed_above_threshold"] = mxi_cap
            certificate["mxi_grid_floor"] = float(mxi_grid.min())
            certificate["detail"] = (
                "the xi_minus window (minus_floor, r*M_xi/2] is nonempty only "
                f"for r > {r_threshold!r}, and for every grid r above that "
                f"threshold the r-cap forces M_xi <= {mxi_cap!r}, below the "
                f"smallest grid value {float(mxi_grid.min())!r}")
        else:
            certificate["detail"] = (
                "every surveyed (r, M_xi) pair fails the r cap or has an "
                "empty xi_minus window (minus_floor, r*M_xi/2]")
    return SynthesisResult(feasible=False, params=None, certificate=certificate,
                           search={"r_points": int(r_grid.size),
                                   "mxi_points": int(mxi_grid.size)})
