"""Increment (proposal) distribution families, all symmetric about the origin.

Every family exposes the same dimension-aware scale rule: the effective
per-coordinate scale at dimension d is ``l * d**(-gamma)``.  Sweeping gamma
is how the experiments probe scalings other than the classical l/sqrt(d).

Families
--------
GAUSSIAN_ISO         iid N(0, (l d^-gamma)^2) coordinates; gamma = 1/2
                     reproduces the reference proposal N_d(0, l^2 I_d / d).
STUDENT_T_ISO        iid scaled Student-t(df) coordinates (heavy tails).
STABLE_ISO           iid symmetric alpha-stable coordinates drawn with the
                     Chambers-Mallows-Stuck transform; no density needed.
COORDINATE_GAUSSIAN  with probability p_move, one uniformly chosen
                     coordinate gets a N(0, (l d^-gamma)^2) kick; otherwise
                     the proposal is the zero vector.
SPHERICAL_SHELL      W = r * U with U uniform on the unit sphere and
                     r = +/- l * d^(1/2 - gamma) with equal probability, so
                     ||W|| matches the Gaussian family's scale at gamma=1/2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .errors import ConfigError


class Family(enum.Enum):
    GAUSSIAN_ISO = "gaussian_iso"
    STUDENT_T_ISO = "student_t_iso"
    STABLE_ISO = "stable_iso"
    COORDINATE_GAUSSIAN = "coordinate_gaussian"
    SPHERICAL_SHELL = "spherical_shell"


@dataclass(frozen=True)
class IncrementSpec:
    """A symmetric increment family plus its d-aware scale rule."""

    family: Family
    l: float
    gamma: float = 0.5
    df: Optional[float] = None
    alpha: Optional[float] = None
    p_move: Optional[float] = None

    def __post_init__(self):
        errors = []
        if not (self.l > 0 and math.isfinite(self.l)):
            errors.append(f"l must be a positive real, got {self.l}")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            errors.append(f"gamma must be >= 0, got {self.gamma}")
        if self.family is Family.STUDENT_T_ISO:
            if self.df is None or not (self.df > 0):
                errors.append(f"student_t_iso requires df > 0, got {self.df}")
        elif self.df is not None:
            errors.append("df is only valid for student_t_iso")
        if self.family is Family.STABLE_ISO:
            if self.alpha is None or not (0 < self.alpha <= 2):
                errors.append(f"stable_iso requires alpha in (0, 2], got {self.alpha}")
        elif self.alpha is not None:
            errors.append("alpha is only valid for stable_iso")
        if self.family is Family.COORDINATE_GAUSSIAN:
            if self.p_move is None or not (0 < self.p_move <= 1):
                errors.append(f"coordinate_gaussian requires p_move in (0, 1], got {self.p_move}")
        elif self.p_move is not None:
            errors.append("p_move is only valid for coordinate_gaussian")
        if errors:
            raise ConfigError(errors)

    def coordinate_scale(self, d: int) -> float:
        """Effective per-coordinate scale l * d**(-gamma)."""
        return self.l * float(d) ** (-self.gamma)

    def shell_radius(self, d: int) -> float:
        """Shell radius l * d**(1/2 - gamma) = coordinate_scale(d) * sqrt(d)."""
        return self.l * float(d) ** (0.5 - self.gamma)


def gaussian_iso(l: float, gamma: float = 0.5) -> IncrementSpec:
    return IncrementSpec(Family.GAUSSIAN_ISO, l, gamma)


def student_t_iso(l: float, df: float, gamma: float = 0.5) -> IncrementSpec:
    return IncrementSpec(Family.STUDENT_T_ISO, l, gamma, df=df)


def stable_iso(l: float, alpha: float, gamma: float = 0.5) -> IncrementSpec:
    return IncrementSpec(Family.STABLE_ISO, l, gamma, alpha=alpha)


def coordinate_gaussian(l: float, p_move: float = 1.0, gamma: float = 0.5) -> IncrementSpec:
    return IncrementSpec(Family.COORDINATE_GAUSSIAN, l, gamma, p_move=p_move)


def spherical_shell(l: float, gamma: float = 0.5) -> IncrementSpec:
    return IncrementSpec(Family.SPHERICAL_SHELL, l, gamma)


def _cms_symmetric_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Standard symmetric alpha-stable variates via Chambers-Mallows-Stuck.

    For alpha = 2 the transform collapses to 2 sqrt(E) sin(U), i.e.
    N(0, 2); for alpha = 1 it is the standard Cauchy tan(U).
    """
    u = math.pi * (rng.random(size) - 0.5)
    if alpha == 1.0:
        return np.tan(u)
    e = np.maximum(rng.standard_exponential(size), 1e-300)
    inv_alpha = 1.0 / alpha
    t1 = np.sin(alpha * u) / np.cos(u) ** inv_alpha
    t2 = (np.cos((1.0 - alpha) * u) / e) ** ((1.0 - alpha) * inv_alpha)
    return t1 * t2


def sample_increment_block(
    spec: IncrementSpec, d: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n iid draws of W ~ Gamma^d as rows of an (n, d) array."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    scale = spec.coordinate_scale(d)
    if spec.family is Family.GAUSSIAN_ISO:
        return scale * rng.standard_normal((n, d))
    if spec.family is Family.STUDENT_T_ISO:
        return scale * rng.standard_t(spec.df, size=(n, d))
    if spec.family is Family.STABLE_ISO:
        return scale * _cms_symmetric_stable(spec.alpha, (n, d), rng)
    if spec.family is Family.COORDINATE_GAUSSIAN:
        idx, val = _coordinate_proposal_block(spec, d, n, rng)
        out = np.zeros((n, d))
        out[np.arange(n), idx] = val
        return out
    if spec.family is Family.SPHERICAL_SHELL:
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return (signs * spec.shell_radius(d))[:, None] * g
    raise ConfigError([f"unknown increment family {spec.family}"])


def _coordinate_proposal_block(spec, d, n, rng):
    """(index, value) pairs for coordinate proposals; value 0 means no move.

    All three random draws are consumed for every step regardless of the
    move indicator, keeping stream consumption independent of outcomes.
    """
    move = rng.random(n) < spec.p_move
    idx = rng.integers(0, d, size=n)
    val = spec.coordinate_scale(d) * rng.standard_normal(n)
    return idx, np.where(move, val, 0.0)


def sample_increment(spec: IncrementSpec, d: int, rng: np.random.Generator) -> np.ndarray:
    """One draw of W ~ Gamma^d."""
    return sample_increment_block(spec, d, 1, rng)[0]


def sup_abs_bm_cdf(x: float) -> float:
    """P(sup_{t<=1} |W_t| <= x) for standard Brownian motion W."""
    if x <= 0:
        return 0.0
    total = 0.0
    for k in range(64):
        term = ((-1) ** k / (2 * k + 1)) * math.exp(
            -math.pi**2 * (2 * k + 1) ** 2 / (8.0 * x * x)
        )
        total += term
        if abs(term) < 1e-16:
            break
    return 4.0 / math.pi * total


def sup_abs_bm_quantile(p: float) -> float:
    """Quantile of sup_{t<=1} |W_t| by bisection."""
    lo, hi = 1e-6, 20.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sup_abs_bm_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SymmetryReport:
    """Result of a sign-flip symmetry check."""

    max_standardized: float
    threshold: float
    per_direction: np.ndarray
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.max_standardized <= self.threshold


def mirror_symmetry_report(
    samples: np.ndarray,
    rng: np.random.Generator,
    n_directions: int = 8,
    level: float = 0.99,
) -> SymmetryReport:
    """Compare {w_i} with {-w_i} on random 1-d projections.

    For each random unit direction v the two-sample KS statistic D between
    <w, v> and -<w, v> is standardized as sqrt(n) * D.  Under a symmetric
    law sqrt(n) * D converges to sup_{t<=1}|W_t| for a standard Brownian
    motion (the mirrored samples share one empirical process; the limit is
    NOT the usual two-sample KS law), so the threshold is that law's
    quantile, Bonferroni-adjusted across directions.
    """
    samples = np.asarray(samples, dtype=float)
    n, d = samples.shape
    dirs = rng.standard_normal((n_directions, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    proj = samples @ dirs.T
    stats_ = np.empty(n_directions)
    for j in range(n_directions):
        stats_[j] = stats.ks_2samp(proj[:, j], -proj[:, j], method="asymp").statistic
    standardized = stats_ * math.sqrt(n)
    threshold = sup_abs_bm_quantile(1.0 - (1.0 - level) / n_directions)
    return SymmetryReport(
        max_standardized=float(standardized.max()),
        threshold=threshold,
        per_direction=standardized,
        n_samples=n,
    )


def flip_symmetry_check(
    spec: IncrementSpec,
    d: int,
    n_samples: int,
    rng: np.random.Generator,
    n_directions: int = 8,
) -> SymmetryReport:
    """Statistical guard for the standing symmetry hypothesis on Gamma^d."""
    if n_samples < 1000:
        raise ValueError("flip_symmetry_check needs n_samples >= 1000")
    w = sample_increment_block(spec, d, n_samples, rng)
    return mirror_symmetry_report(w, rng, n_directions=n_directions)
