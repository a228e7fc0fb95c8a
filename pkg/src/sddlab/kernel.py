"""State-dependent delay kernels.

The kernel acting on a history segment v is

    xi(theta, v) = xi_plus(theta) * min(||v_plus||_L1L1, 1)
                 + xi_minus(theta) * min(||v_minus||_L1L1, 1)

with xi_plus >= 0, xi_minus <= 0 and sup caps |xi_pm| <= M_xi / 2.  The "p"
variant keeps only the plus term, "n" only the minus term; on the positive
cone the minus gate is exactly 0.0, so "full" and "p" agree bitwise there.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CapViolation, ContractViolation, GridMismatch
from .history import HistorySegment, negative_part, norm_L1L1, positive_part, theta_weights


class KernelVariant(str, Enum):
    FULL = "full"
    P = "p"
    N = "n"


def _as_variant(variant) -> KernelVariant:
    if isinstance(variant, KernelVariant):
        return variant
    try:
        return KernelVariant(variant)
    except ValueError:
        raise ContractViolation(f"unknown kernel variant {variant!r}") from None


@dataclass(frozen=True)
class KernelSpec:
    """Kernel profiles sampled on the m+1 theta nodes of the delay window."""

    r: float
    m: int
    xi_plus: np.ndarray
    xi_minus: np.ndarray
    M_xi: float

    def __post_init__(self):
        if not (isinstance(self.m, int) and not isinstance(self.m, bool) and self.m >= 1):
            raise ContractViolation("m must be an int >= 1")
        r = float(self.r)
        if not (np.isfinite(r) and r > 0.0):
            raise ContractViolation("r must be finite and > 0")
        object.__setattr__(self, "r", r)
        M = float(self.M_xi)
        if not (np.isfinite(M) and M > 0.0):
            raise ContractViolation("M_xi must be finite and > 0")
        object.__setattr__(self, "M_xi", M)
        xp = np.asarray(self.xi_plus, dtype=float).copy()
        xn = np.asarray(self.xi_minus, dtype=float).copy()
        for name, arr in (("xi_plus", xp), ("xi_minus", xn)):
            if arr.ndim != 1 or arr.size != self.m + 1:
                raise ContractViolation(f"{name} must have m+1 = {self.m + 1} nodes")
            if not np.isfinite(arr).all():
                raise ContractViolation(f"{name} must be finite")
        if np.any(xp < 0.0):
            raise ContractViolation("xi_plus must be >= 0 at every node")
        if np.any(xn > 0.0):
            raise ContractViolation("xi_minus must be <= 0 at every node")
        half = M / 2.0
        if np.abs(xp).max() > half:
            raise CapViolation(
                f"sup|xi_plus| <= M_xi/2 violated: {np.abs(xp).max()!r} > {half!r}")
        if np.abs(xn).max() > half:
            raise CapViolation(
                f"sup|xi_minus| <= M_xi/2 violated: {np.abs(xn).max()!r} > {half!r}")
        xp.setflags(write=False)
        xn.setflags(write=False)
        object.__setattr__(self, "xi_plus", xp)
        object.__setattr__(self, "xi_minus", xn)

    @property
    def h_theta(self) -> float:
        return self.r / self.m


def make_constant_kernel(r: float, m: int, plus_integral: float,
                         minus_integral: float, M_xi: float) -> KernelSpec:
    """Constant-in-theta profiles realizing the requested absolute integrals.

    Levels are plus_integral / r and -minus_integral / r; both integrals are
    taken as absolute targets (>= 0).
    """
    for name, val in (("plus_integral", plus_integral), ("minus_integral", minus_integral)):
        if not (np.isfinite(val) and val >= 0.0):
            raise ContractViolation(f"{name} must be finite and >= 0")
    r = float(r)
    if not (np.isfinite(r) and r > 0.0):
        raise ContractViolation("r must be finite and > 0")
    half = float(M_xi) / 2.0
    cp = plus_integral / r
    cn = minus_integral / r
    if cp > half:
        raise CapViolation(
            f"plus_integral/r <= M_xi/2 violated: {cp!r} > {half!r}")
    if cn > half:
        raise CapViolation(
            f"minus_integral/r <= M_xi/2 violated: {cn!r} > {half!r}")
    return KernelSpec(r=r, m=m,
                      xi_plus=np.full(m + 1, cp),
                      xi_minus=np.full(m + 1, -cn),
                      M_xi=M_xi)


def clip_gate(norm: float) -> float:
    """The saturation gate min(norm, 1)."""
    return norm if norm < 1.0 else 1.0


def combine_profiles(spec: KernelSpec, s_plus: float, s_minus: float,
                     variant: KernelVariant) -> np.ndarray:
    """xi(theta_j) for given gate values; shared by eval_xi and the solver."""
    if variant is KernelVariant.P:
        return spec.xi_plus * s_plus
    if variant is KernelVariant.N:
        return spec.xi_minus * s_minus
    return spec.xi_plus * s_plus + spec.xi_minus * s_minus


def eval_xi(spec: KernelSpec, v: HistorySegment, variant=KernelVariant.FULL) -> np.ndarray:
    """Kernel values on the theta grid for the state v."""
    variant = _as_variant(variant)
    if v.m != spec.m or v.r != spec.r:
        raise GridMismatch(
            f"history window (r={v.r}, m={v.m}) does not match kernel "
            f"(r={spec.r}, m={spec.m})")
    s_plus = clip_gate(norm_L1L1(positive_part(v)))
    s_minus = clip_gate(norm_L1L1(negative_part(v)))
    return combine_profiles(spec, s_plus, s_minus, variant)


def l11_constant(spec: KernelSpec, variant=KernelVariant.FULL) -> float:
    """L^{1,1} constant of the variant: the relevant profile integrals.

    full -> max(int |xi_plus|, int |xi_minus|); p/n -> own integral.
    """
    variant = _as_variant(variant)
    w = theta_weights(spec.r, spec.m)
    ip = float(np.dot(w, np.abs(spec.xi_plus)))
    im = float(np.dot(w, np.abs(spec.xi_minus)))
    if variant is KernelVariant.P:
        return ip
    if variant is KernelVariant.N:
        return im
    return max(ip, im)


def kernel_to_config(spec: KernelSpec) -> dict:
    """JSON-ready description (profiles listed node by node)."""
    return {
        "r": spec.r,
        "m": spec.m,
        "M_xi": spec.M_xi,
        "xi_plus": [float(x) for x in spec.xi_plus],
        "xi_minus": [float(x) for x in spec.xi_minus],
    }


def kernel_from_config(cfg: dict) -> KernelSpec:
    return KernelSpec(r=cfg["r"], m=cfg["m"],
                      xi_plus=np.asarray(cfg["xi_plus"], dtype=float),
                      xi_minus=np.asarray(cfg["xi_minus"], dtype=float),
                      M_xi=cfg["M_xi"])
