"""Separability tests and entanglement quantification for Gaussian states.

Covers the partial-time-reversal (PPT) test with its symplectic-eigenvalue
margin, negativity and logarithmic negativity, summed-variance separability
inequalities (Duan / van Loock-Furusawa family), the five-class taxonomy of
three-mode states, and an operational full-separability feasibility test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .core import (
    PSD_TOL,
    GaussianState,
    quadrature_variance,
    symplectic_eigenvalues,
    _check_modes,
)
from .errors import (
    BadIndexError,
    BadPartitionError,
    NotThreeModesError,
)

# gap tolerance and iteration cap of the full-separability solver
SEP_GAP_TOL = 1e-7
SEP_MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class Bipartition:
    """A two-sided split of the modes of an N-mode state."""

    side_a: tuple[int, ...]
    side_b: tuple[int, ...]

    def __post_init__(self) -> None:
        a = tuple(sorted(set(self.side_a)))
        b = tuple(sorted(set(self.side_b)))
        if not a or not b:
            raise BadPartitionError("both sides of a bipartition must be nonempty")
        if set(a) & set(b):
            raise BadPartitionError(f"sides overlap: {a} vs {b}")
        object.__setattr__(self, "side_a", a)
        object.__setattr__(self, "side_b", b)

    @classmethod
    def of_modes(cls, side_a: Iterable[int], n_modes: int) -> "Bipartition":
        a = tuple(sorted(set(int(m) for m in side_a)))
        b = tuple(m for m in range(n_modes) if m not in a)
        return cls(a, b)

    @classmethod
    def from_string(cls, text: str, n_modes: int) -> "Bipartition":
        """Parse cuts like ``"12|34"`` or ``"2|13"`` (1-based digits)."""
        parts = text.strip().split("|")
        if len(parts) != 2:
            raise BadPartitionError(f"cut {text!r} must contain exactly one '|'")
        try:
            a = tuple(sorted(int(ch) - 1 for ch in parts[0]))
            b = tuple(sorted(int(ch) - 1 for ch in parts[1]))
        except ValueError:
            raise BadPartitionError(f"cut {text!r} must list 1-based mode digits") from None
        cut = cls(a, b)
        if set(cut.side_a) | set(cut.side_b) != set(range(n_modes)):
            raise BadPartitionError(
                f"cut {text!r} does not cover all {n_modes} modes exactly once"
            )
        return cut

    def label(self) -> str:
        return "".join(str(m + 1) for m in self.side_a) + "|" + "".join(
            str(m + 1) for m in self.side_b
        )


def _side_modes(state: GaussianState, side) -> tuple[int, ...]:
    if isinstance(side, Bipartition):
        modes = side.side_a
    else:
        modes = tuple(side)
    return _check_modes(state.n_modes, modes)


def partial_time_reversal(state: GaussianState | np.ndarray, side) -> np.ndarray:
    """Covariance matrix with the momenta of the chosen modes sign-flipped."""
    if isinstance(state, GaussianState):
        cm = state.cm
        modes = _side_modes(state, side)
    else:
        cm = np.asarray(state, dtype=float)
        modes = _check_modes(cm.shape[0] // 2, tuple(side))
    flip = np.ones(cm.shape[0])
    for m in modes:
        flip[2 * m + 1] = -1.0
    return cm * np.outer(flip, flip)


class PptVerdict(NamedTuple):
    ppt: bool
    margin: float          # min symplectic eigenvalue of the reversed CM, minus 1
    min_symplectic: float


def ppt_verdict(state: GaussianState, side) -> PptVerdict:
    """PPT test across ``side | rest``; negative margin certifies entanglement."""
    reversed_cm = partial_time_reversal(state, side)
    nu_min = float(symplectic_eigenvalues(reversed_cm)[-1])
    return PptVerdict(nu_min >= 1.0 - PSD_TOL, nu_min - 1.0, nu_min)


def is_ppt(state: GaussianState, side) -> bool:
    return ppt_verdict(state, side).ppt


def log_negativity(state: GaussianState, side) -> float:
    """Sum of -ln(nu) over symplectic eigenvalues nu < 1 of the reversed CM."""
    nus = symplectic_eigenvalues(partial_time_reversal(state, side))
    return float(sum(-math.log(nu) for nu in nus if nu < 1.0))


def negativity(state: GaussianState, side) -> float:
    """(prod max(1, 1/nu) - 1) / 2 over the reversed CM's symplectic spectrum."""
    nus = symplectic_eigenvalues(partial_time_reversal(state, side))
    prod = 1.0
    for nu in nus:
        prod *= max(1.0, 1.0 / nu)
    return 0.5 * (prod - 1.0)


# ---------------------------------------------------------------------------
# summed-variance criteria


@dataclass(frozen=True)
class VarianceCriterion:
    """Coefficients of u = sum h_k x_k and v = sum g_k p_k."""

    h: tuple[float, ...]
    g: tuple[float, ...]

    def __post_init__(self) -> None:
        h = tuple(float(v) for v in self.h)
        g = tuple(float(v) for v in self.g)
        if len(h) != len(g):
            raise BadPartitionError("h and g must have the same length")
        if not any(h) and not any(g):
            raise BadPartitionError("h and g cannot both be zero")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @classmethod
    def duan(cls, lam: float = 1.0, n_modes: int = 2) -> "VarianceCriterion":
        """Two-mode pair |lam| x1 - x2/lam and |lam| p1 + p2/lam (modes 0, 1)."""
        if lam == 0:
            raise BadPartitionError("lambda must be nonzero")
        h = [abs(lam), -1.0 / lam] + [0.0] * (n_modes - 2)
        g = [abs(lam), 1.0 / lam] + [0.0] * (n_modes - 2)
        return cls(tuple(h), tuple(g))


def variance_inequality(
    state: GaussianState,
    crit: VarianceCriterion,
    l: int,
    m: int,
    set_i: Sequence[int] = (),
    set_i_prime: Sequence[int] = (),
) -> float:
    """Margin of the summed-variance separability bound.

    Any state separable across the splitting family ({l} u I) | ({m} u I')
    satisfies Var(u) + Var(v) >= f * hbar with
    f = |h_l g_l + sum_I h g| + |h_m g_m + sum_I' h g|; a negative margin
    therefore certifies entanglement.  Displacements never enter.
    """
    n = state.n_modes
    if len(crit.h) != n:
        raise BadPartitionError(f"criterion has {len(crit.h)} modes, state has {n}")
    groups = [l], [m], list(set_i), list(set_i_prime)
    flat = [idx for grp in groups for idx in grp]
    if sorted(flat) != list(range(n)):
        raise BadPartitionError(
            f"{{l}}, {{m}}, I, I' must partition the {n} modes, got {flat}"
        )
    cx = np.zeros(2 * n)
    cp = np.zeros(2 * n)
    cx[0::2] = crit.h
    cp[1::2] = crit.g
    var_sum = quadrature_variance(state, cx) + quadrature_variance(state, cp)
    f = abs(crit.h[l] * crit.g[l] + sum(crit.h[r] * crit.g[r] for r in set_i)) + abs(
        crit.h[m] * crit.g[m] + sum(crit.h[s] * crit.g[s] for s in set_i_prime)
    )
    return var_sum - f * state.hbar


def duan_margin(state: GaussianState, lam: float = 1.0) -> float:
    """Two-mode Duan margin at weight lam; negative means entangled."""
    if state.n_modes != 2:
        raise BadPartitionError("the Duan check applies to two-mode states")
    return variance_inequality(state, VarianceCriterion.duan(lam), l=0, m=1)


# ---------------------------------------------------------------------------
# verdict containers


@dataclass(frozen=True)
class CutReport:
    cut: str
    ppt: bool
    margin: float
    min_symplectic: float
    log_negativity: float
    negativity: float

    def to_dict(self) -> dict:
        return {
            "cut": self.cut,
            "ppt": self.ppt,
            "margin": self.margin,
            "min_symplectic_eig_of_pt": self.min_symplectic,
            "log_negativity": self.log_negativity,
            "negativity": self.negativity,
        }


def cut_report(state: GaussianState, cut: Bipartition) -> CutReport:
    verdict = ppt_verdict(state, cut)
    return CutReport(
        cut=cut.label(),
        ppt=verdict.ppt,
        margin=verdict.margin,
        min_symplectic=verdict.min_symplectic,
        log_negativity=log_negativity(state, cut),
        negativity=negativity(state, cut),
    )


@dataclass(frozen=True)
class EntanglementVerdict:
    """Per-cut PPT data plus optional variance margin and tripartite class."""

    cuts: tuple[CutReport, ...]
    variance_margin: float | None = None
    tripartite_class: int | None = None

    def cut(self, label: str) -> CutReport:
        for report in self.cuts:
            if report.cut == label:
                return report
        raise BadIndexError(f"no cut {label!r} in this verdict")

    def to_dict(self) -> dict:
        out: dict = {"cuts": {r.cut: r.to_dict() for r in self.cuts}}
        if self.variance_margin is not None:
            out["variance_margin"] = self.variance_margin
            out["duan_violated"] = bool(self.variance_margin < 0)
        if self.tripartite_class is not None:
            out["tripartite_class"] = self.tripartite_class
        return out


# ---------------------------------------------------------------------------
# full separability of three-mode states


@dataclass(frozen=True)
class SeparabilityResult:
    """Verdict of the block-diagonal decomposition feasibility test.

    ``separable`` is None when the solver hit its iteration cap without a
    stable answer; such points must be reported as undecided, never folded
    into a class.
    """

    separable: bool | None
    gap: float
    iterations: int
    witness: np.ndarray | None = None

    @property
    def undecided(self) -> bool:
        return self.separable is None


def _project_psd(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ vecs.T


def _nearest_hyperbola_point(b1: float, b2: float) -> float:
    """Coordinate t of the point (t, 1/t), t > 0, closest to (b1, b2).

    The feasible set {b1 b2 >= 1, b1 + b2 > 0} is convex, so the projection
    is unique and the distance derivative
    h(t) = (t - b1) - (1/t - b2) / t^2 has exactly one positive root;
    bisection with Newton acceleration finds it.
    """

    def h(t: float) -> float:
        return (t - b1) - (1.0 / t - b2) / (t * t)

    lo = 1e-9
    hi = max(b1, 1.0) + 1.0
    while h(hi) < 0:
        hi *= 2.0
    t = 0.5 * (lo + hi)
    for _ in range(200):
        ht = h(t)
        if ht > 0:
            hi = t
        else:
            lo = t
        dh = 1.0 + 3.0 / (t**4) - 2.0 * b2 / (t**3)
        step = t - ht / dh if dh > 0 else 0.5 * (lo + hi)
        t = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo < 1e-14 * max(1.0, hi):
            break
    return t


def _project_single_mode_physical(block: np.ndarray) -> np.ndarray:
    """Closest (Frobenius) 2x2 symmetric matrix with block + iJ >= 0.

    In the eigenframe the feasible set is {b1 b2 >= 1, b1 + b2 > 0}; outside
    it, the nearest point sits on the hyperbola b1' b2' = 1.
    """
    sym = 0.5 * (block + block.T)
    vals, vecs = np.linalg.eigh(sym)
    b1, b2 = float(vals[0]), float(vals[1])
    if b1 + b2 > 0 and b1 * b2 >= 1.0:
        return sym
    t = _nearest_hyperbola_point(b1, b2)
    proj = vecs @ np.diag([t, 1.0 / t]) @ vecs.T
    return 0.5 * (proj + proj.T)


def _project_block_physical(sigma: np.ndarray, n_modes: int) -> np.ndarray:
    out = np.zeros_like(sigma)
    for k in range(n_modes):
        sl = slice(2 * k, 2 * k + 2)
        out[sl, sl] = _project_single_mode_physical(sigma[sl, sl])
    return out


def fully_separable_3mode(
    state: GaussianState,
    gap_tol: float = SEP_GAP_TOL,
    max_iterations: int = SEP_MAX_ITERATIONS,
) -> SeparabilityResult:
    """Decide whether a 3-mode state is fully separable.

    The state is fully separable iff some sigma = s1 + s2 + s3 (direct sum)
    exists with every s_k + iJ >= 0 and cm - sigma >= 0.  The search runs
    alternating projections between the two convex sets

        C1 = { M : cm - M >= 0 }        (dominated by the state)
        C2 = { block-diagonal, physical single-mode blocks }

    and reports separable when the gap between the sets closes below
    ``gap_tol``, entangled when the gap stalls at a clearly positive value,
    and undecided otherwise.  The witness is the block-diagonal sigma.
    """
    if state.n_modes != 3:
        raise NotThreeModesError(f"full-separability test needs 3 modes, got {state.n_modes}")
    # NPT across any cut already rules full separability out
    for mode in range(3):
        verdict = ppt_verdict(state, (mode,))
        if not verdict.ppt:
            return SeparabilityResult(False, gap=-verdict.margin, iterations=0)

    gamma = np.asarray(state.cm)
    sigma = _project_block_physical(gamma, 3)
    gap_prev = np.inf
    stall_window = 50
    history: list[float] = []
    for iteration in range(1, max_iterations + 1):
        dominated = gamma - _project_psd(gamma - sigma)
        sigma = _project_block_physical(dominated, 3)
        gap = float(np.linalg.norm(dominated - sigma))
        if gap <= gap_tol:
            return SeparabilityResult(True, gap=gap, iterations=iteration, witness=sigma)
        history.append(gap)
        if len(history) > stall_window:
            improvement = history[-stall_window - 1] - gap
            if improvement < 1e-6 * gap and gap > 20 * gap_tol:
                return SeparabilityResult(False, gap=gap, iterations=iteration, witness=sigma)
        gap_prev = gap
    if gap_prev > 20 * gap_tol:
        return SeparabilityResult(False, gap=float(gap_prev), iterations=max_iterations)
    return SeparabilityResult(None, gap=float(gap_prev), iterations=max_iterations)


# ---------------------------------------------------------------------------
# tripartite classification

TRIPARTITE_CUTS = ("1|23", "2|13", "3|12")


@dataclass(frozen=True)
class TripartiteVerdict:
    """PPT pattern of the three single-mode cuts plus the class labels.

    Two labeling conventions circulate for the partially-PPT patterns, so
    both are reported.  ``class_by_biseparable_count`` assigns
    1 + (number of PPT cuts): one biseparable cut -> class 2, two -> class 3.
    ``class_single_ppt_as_3`` is the variant that numbers the one-PPT-cut
    pattern 3 and the two-PPT-cut pattern 2.  ``tripartite_class`` is the
    default (``class_by_biseparable_count``); None means the 4-vs-5 test was
    undecided.
    """

    cuts: tuple[CutReport, ...]
    npt_count: int
    class_by_biseparable_count: int | None
    class_single_ppt_as_3: int | None
    separability: SeparabilityResult | None

    @property
    def tripartite_class(self) -> int | None:
        return self.class_by_biseparable_count

    @property
    def undecided(self) -> bool:
        return self.class_by_biseparable_count is None

    def to_dict(self) -> dict:
        out = {
            "cuts": {r.cut: r.to_dict() for r in self.cuts},
            "npt_count": self.npt_count,
            "class_by_biseparable_count": self.class_by_biseparable_count,
            "class_single_ppt_as_3": self.class_single_ppt_as_3,
            "tripartite_class": self.tripartite_class,
        }
        if self.separability is not None:
            out["separability_gap"] = self.separability.gap
            out["separability_iterations"] = self.separability.iterations
        return out


def classify_tripartite(
    state: GaussianState,
    gap_tol: float = SEP_GAP_TOL,
    max_iterations: int = SEP_MAX_ITERATIONS,
) -> TripartiteVerdict:
    """Assign a 3-mode state to the five-class taxonomy.

    All three cuts NPT -> class 1 (genuinely inseparable everywhere).  With
    some cuts PPT the class follows the PPT pattern; with every cut PPT the
    full-separability test distinguishes bound entangled (4) from fully
    separable (5).  Undecided feasibility is surfaced, not guessed.
    """
    if state.n_modes != 3:
        raise NotThreeModesError(f"expected a 3-mode state, got {state.n_modes} modes")
    reports = tuple(
        cut_report(state, Bipartition.of_modes((mode,), 3)) for mode in range(3)
    )
    npt = sum(1 for r in reports if not r.ppt)
    separability = None
    if npt == 3:
        by_bisep = variant = 1
    elif npt == 2:  # one biseparable cut
        by_bisep, variant = 2, 3
    elif npt == 1:  # two biseparable cuts
        by_bisep, variant = 3, 2
    else:
        separability = fully_separable_3mode(state, gap_tol, max_iterations)
        if separability.separable is None:
            by_bisep = variant = None
        else:
            by_bisep = variant = 5 if separability.separable else 4
    return TripartiteVerdict(
        cuts=reports,
        npt_count=npt,
        class_by_biseparable_count=by_bisep,
        class_single_ppt_as_3=variant,
        separability=separability,
    )
