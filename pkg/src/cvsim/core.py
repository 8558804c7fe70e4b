"""Value-semantics engine for Gaussian states of canonical modes.

Conventions used throughout the package:

* phase-space coordinates are interleaved, ``(x_1, p_1, ..., x_N, p_N)``;
* the covariance matrix is dimensionless with vacuum = identity, so the
  variance of a quadrature combination ``c . R`` is ``(hbar/2) c^T cm c``;
* ``hbar = 1`` by default (kept as a field so variance formulas stay explicit);
* a symplectic matrix ``S`` acts as ``cm -> S^T cm S`` and ``disp -> S^T disp``.

All state objects are immutable; every operation returns a new state, so the
functions here are safe to evaluate concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadIndexError,
    DegenerateQuadratureError,
    NonPhysicalError,
    NonSymmetricError,
    NotSymplecticError,
    ShapeMismatchError,
)

# Symmetry / symplectic-identity tolerance and positivity margin.  The model
# itself is exact; these only absorb floating-point drift.
SYM_TOL = 1e-10
PSD_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal antisymmetric form J with 2x2 blocks [[0, 1], [-1, 0]]."""
    if n_modes < 1:
        raise ShapeMismatchError("need at least one mode")
    j = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        j[2 * k, 2 * k + 1] = 1.0
        j[2 * k + 1, 2 * k] = -1.0
    return j


def _as_square_even(matrix: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"{what} must be a square matrix, got shape {m.shape}")
    if m.shape[0] % 2 != 0 or m.shape[0] == 0:
        raise ShapeMismatchError(f"{what} must have even nonzero dimension, got {m.shape[0]}")
    return m


def _require_symmetric(m: np.ndarray, what: str, tol: float = SYM_TOL) -> None:
    if np.max(np.abs(m - m.T)) > tol:
        raise NonSymmetricError(f"{what} is not symmetric within {tol}")


def physicality_margin(cm: np.ndarray) -> float:
    """Smallest eigenvalue of cm + iJ; a state is physical iff this is >= 0."""
    cm = _as_square_even(cm, "covariance matrix")
    j = symplectic_form(cm.shape[0] // 2)
    return float(np.linalg.eigvalsh(cm + 1j * j)[0])


def symplectic_identity_defect(matrix: np.ndarray) -> float:
    """Max-norm of S^T J S - J; zero for an exact symplectic matrix."""
    s = _as_square_even(matrix, "symplectic candidate")
    j = symplectic_form(s.shape[0] // 2)
    return float(np.max(np.abs(s.T @ j @ s - j)))


@dataclass(frozen=True)
class SymplecticTransform:
    """A linear phase-space map S with S^T J S = J."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _as_square_even(self.matrix, "symplectic matrix")
        defect = symplectic_identity_defect(m)
        if defect > SYM_TOL:
            raise NotSymplecticError(
                f"matrix fails the symplectic identity by {defect:.3e} (tol {SYM_TOL})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n_modes: int) -> "SymplecticTransform":
        return cls(np.eye(2 * n_modes))

    def compose(self, other: "SymplecticTransform") -> "SymplecticTransform":
        """Transform equivalent to applying ``self`` first, then ``other``."""
        return SymplecticTransform(self.matrix @ other.matrix)


@dataclass(frozen=True)
class MeasurementRecord:
    """A single homodyne detection event on one mode."""

    mode_index: int
    quadrature: str  # "x" or "p"
    outcome: float

    def __post_init__(self) -> None:
        quad = self.quadrature.lower()
        if quad not in ("x", "p"):
            raise ValueError(f"quadrature must be 'x' or 'p', got {self.quadrature!r}")
        object.__setattr__(self, "quadrature", quad)

    @property
    def quadrature_offset(self) -> int:
        return 0 if self.quadrature == "x" else 1


def _default_labels(n_modes: int) -> tuple[str, ...]:
    return tuple(f"mode{k}" for k in range(n_modes))


@dataclass(frozen=True)
class GaussianState:
    """An N-mode Gaussian state: covariance matrix, displacement, mode labels.

    Construction validates symmetry and the positivity bound cm + iJ >= 0
    (within PSD_TOL), so every held instance is a physical state.
    """

    cm: np.ndarray
    disp: np.ndarray
    labels: tuple[str, ...] = ()
    hbar: float = 1.0

    def __post_init__(self) -> None:
        cm = _as_square_even(self.cm, "covariance matrix")
        _require_symmetric(cm, "covariance matrix")
        n = cm.shape[0] // 2
        disp = np.zeros(2 * n) if self.disp is None else np.asarray(self.disp, dtype=float)
        if disp.shape != (2 * n,):
            raise ShapeMismatchError(
                f"displacement must have length {2 * n}, got shape {disp.shape}"
            )
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        margin = physicality_margin(cm)
        if margin < -PSD_TOL:
            raise NonPhysicalError(
                f"covariance matrix violates positivity: min eig(cm + iJ) = {margin:.3e}"
            )
        labels = tuple(self.labels) if self.labels else _default_labels(n)
        if len(labels) != n:
            raise ShapeMismatchError(f"expected {n} labels, got {len(labels)}")
        cm = cm.copy()
        disp = disp.copy()
        cm.setflags(write=False)
        disp.setflags(write=False)
        object.__setattr__(self, "cm", cm)
        object.__setattr__(self, "disp", disp)
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self) -> int:
        return self.cm.shape[0] // 2

    def with_displacement(self, disp: np.ndarray) -> "GaussianState":
        return GaussianState(self.cm, np.asarray(disp, dtype=float), self.labels, self.hbar)

    def mode_block(self, mode: int) -> np.ndarray:
        """2x2 covariance block of a single mode."""
        _check_modes(self.n_modes, [mode])
        sl = slice(2 * mode, 2 * mode + 2)
        return np.array(self.cm[sl, sl])


def _check_modes(n_modes: int, modes: Iterable[int]) -> tuple[int, ...]:
    modes = tuple(int(m) for m in modes)
    if not modes:
        raise BadIndexError("mode index set must be nonempty")
    if len(set(modes)) != len(modes):
        raise BadIndexError(f"duplicate mode indices in {modes}")
    for m in modes:
        if not 0 <= m < n_modes:
            raise BadIndexError(f"mode index {m} out of range for {n_modes} modes")
    return modes


def coordinate_indices(modes: Iterable[int]) -> list[int]:
    """Interleaved (x, p) coordinate indices for the given mode indices."""
    out: list[int] = []
    for m in modes:
        out.extend((2 * m, 2 * m + 1))
    return out


# ---------------------------------------------------------------------------
# constructors


def make_state(
    blocks: Sequence[np.ndarray],
    disp: np.ndarray | None = None,
    labels: Sequence[str] | None = None,
    hbar: float = 1.0,
) -> GaussianState:
    """Build a state whose covariance matrix is the direct sum of the blocks.

    Each block must be a symmetric matrix of even dimension (2x2 for a single
    mode, 4x4 for a pair, ...).  Physicality of the assembled matrix is
    checked by the GaussianState constructor.
    """
    mats = []
    for k, b in enumerate(blocks):
        m = _as_square_even(np.atleast_2d(np.asarray(b, dtype=float)), f"block {k}")
        _require_symmetric(m, f"block {k}")
        mats.append(m)
    if not mats:
        raise ShapeMismatchError("need at least one block")
    dim = sum(m.shape[0] for m in mats)
    cm = np.zeros((dim, dim))
    at = 0
    for m in mats:
        cm[at : at + m.shape[0], at : at + m.shape[0]] = m
        at += m.shape[0]
    if disp is None:
        disp = np.zeros(dim)
    return GaussianState(cm, np.asarray(disp, dtype=float), tuple(labels or ()), hbar)


def vacuum_state(n_modes: int) -> GaussianState:
    return make_state([np.eye(2)] * n_modes)


def thermal_state(occupations: Sequence[float]) -> GaussianState:
    """Product of thermal modes, covariance n_k * identity per mode (n_k >= 1)."""
    blocks = []
    for n in occupations:
        if n < 1.0 - PSD_TOL:
            raise NonPhysicalError(f"thermal occupation parameter must be >= 1, got {n}")
        blocks.append(float(n) * np.eye(2))
    return make_state(blocks)


def thermal_occupation(temperature: float, frequency: float = 1.0) -> float:
    """Map temperature to the thermal variance parameter 1 / tanh(w / 2T)."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if frequency <= 0:
        raise ValueError("frequency must be positive")
    if temperature == 0:
        return 1.0
    arg = frequency / (2.0 * temperature)
    # tanh saturates to 1 well before overflow territory
    return 1.0 / math.tanh(arg) if arg < 350 else 1.0


def epr_state(r: float) -> GaussianState:
    """Two-mode squeezed state with reduced fluctuations in x1+x2 and p1-p2."""
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    cm = np.array(
        [
            [ch, 0.0, -sh, 0.0],
            [0.0, ch, 0.0, sh],
            [-sh, 0.0, ch, 0.0],
            [0.0, sh, 0.0, ch],
        ]
    )
    return GaussianState(cm, np.zeros(4))


def direct_sum(a: GaussianState, b: GaussianState) -> GaussianState:
    """Tensor product of two states (direct sum in phase space)."""
    if a.hbar != b.hbar:
        raise ValueError("cannot combine states with different hbar")
    na, nb = 2 * a.n_modes, 2 * b.n_modes
    cm = np.zeros((na + nb, na + nb))
    cm[:na, :na] = a.cm
    cm[na:, na:] = b.cm
    disp = np.concatenate([a.disp, b.disp])
    return GaussianState(cm, disp, a.labels + b.labels, a.hbar)


# ---------------------------------------------------------------------------
# operations


def apply_symplectic(state: GaussianState, s: SymplecticTransform | np.ndarray) -> GaussianState:
    """Evolve the state: cm -> S^T cm S and disp -> S^T disp."""
    mat = s.matrix if isinstance(s, SymplecticTransform) else np.asarray(s, dtype=float)
    mat = _as_square_even(mat, "symplectic matrix")
    if mat.shape[0] != 2 * state.n_modes:
        raise ShapeMismatchError(
            f"symplectic matrix is {mat.shape[0]}-dimensional but the state has "
            f"{state.n_modes} modes"
        )
    defect = symplectic_identity_defect(mat)
    if defect > SYM_TOL:
        raise NotSymplecticError(
            f"matrix fails the symplectic identity by {defect:.3e} (tol {SYM_TOL})"
        )
    cm = mat.T @ state.cm @ mat
    cm = 0.5 * (cm + cm.T)
    return GaussianState(cm, mat.T @ state.disp, state.labels, state.hbar)


def partial_trace(state: GaussianState, keep: Iterable[int]) -> GaussianState:
    """Restrict the state to the kept modes (marginal of the Wigner function)."""
    keep = _check_modes(state.n_modes, keep)
    idx = coordinate_indices(keep)
    cm = state.cm[np.ix_(idx, idx)]
    disp = state.disp[idx]
    labels = tuple(state.labels[m] for m in keep)
    return GaussianState(cm, disp, labels, state.hbar)


def condition_on_homodyne(state: GaussianState, meas: MeasurementRecord) -> GaussianState:
    """Conditional state after a homodyne detection on one mode.

    The measured mode is removed; the remaining covariance matrix is the Schur
    complement taken on the support of the projected quadrature (the single
    nonzero diagonal entry), so it never depends on the outcome.  The outcome
    enters only the displacement, which is updated by the standard rule for a
    beam prepared with zero mean,

        disp' = disp_kept + C[:, q] * outcome / var_q.

    Raises DegenerateQuadratureError when the measured variance is zero.
    """
    n = state.n_modes
    if n < 2:
        raise ShapeMismatchError("conditioning requires at least two modes")
    (mode,) = _check_modes(n, [meas.mode_index])
    q = meas.quadrature_offset
    keep = [m for m in range(n) if m != mode]
    kidx = coordinate_indices(keep)
    midx = [2 * mode, 2 * mode + 1]
    a = state.cm[np.ix_(kidx, kidx)]
    c = state.cm[np.ix_(kidx, midx)]
    var_q = state.cm[midx[q], midx[q]]
    if var_q <= PSD_TOL:
        raise DegenerateQuadratureError(
            f"measured {meas.quadrature} quadrature of mode {mode} has variance {var_q:.3e}"
        )
    col = c[:, q]
    cm = a - np.outer(col, col) / var_q
    cm = 0.5 * (cm + cm.T)
    disp = state.disp[kidx] + col * (meas.outcome / var_q)
    labels = tuple(state.labels[m] for m in keep)
    return GaussianState(cm, disp, labels, state.hbar)


def measure_x(state: GaussianState, mode: int, outcome: float = 0.0) -> GaussianState:
    return condition_on_homodyne(state, MeasurementRecord(mode, "x", outcome))


def measure_p(state: GaussianState, mode: int, outcome: float = 0.0) -> GaussianState:
    return condition_on_homodyne(state, MeasurementRecord(mode, "p", outcome))


def discard_unmeasured_beam(
    state: GaussianState,
    beam_index: int,
    rng: np.random.Generator | int | None = None,
    momentum_value: float | None = None,
) -> GaussianState | tuple[GaussianState, np.ndarray]:
    """Drop a beam mode that interacted but was never detected.

    Deterministic form (no rng, no momentum_value): the partial trace over the
    beam, i.e. the mixed state averaged over the beam's unknown momentum.

    Trajectory form: one realisation of that mixture.  The beam's conserved
    momentum is fixed to ``momentum_value`` or drawn from its marginal
    (true variance hbar/2 * cm_pp), and the atoms are conditioned on it.
    Returns ``(state, shift)`` where ``shift`` is the displacement kick of
    this trajectory; averaging trajectories recovers the deterministic form.
    """
    (beam,) = _check_modes(state.n_modes, [beam_index])
    keep = [m for m in range(state.n_modes) if m != beam]
    reduced = partial_trace(state, keep)
    if rng is None and momentum_value is None:
        return reduced

    pidx = 2 * beam + 1
    var_p = state.cm[pidx, pidx]
    if var_p <= PSD_TOL:
        raise DegenerateQuadratureError(
            f"beam {beam} momentum has variance {var_p:.3e}; nothing to sample"
        )
    mean_p = state.disp[pidx]
    if momentum_value is None:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        momentum_value = gen.normal(mean_p, math.sqrt(state.hbar * var_p / 2.0))
    kidx = coordinate_indices(keep)
    col = state.cm[kidx, pidx]
    shift = col * ((momentum_value - mean_p) / var_p)
    cm = reduced.cm - np.outer(col, col) / var_p
    cm = 0.5 * (cm + cm.T)
    traj = GaussianState(cm, reduced.disp + shift, reduced.labels, state.hbar)
    return traj, shift


def symplectic_eigenvalues(cm: np.ndarray) -> np.ndarray:
    """Williamson spectrum: |eigenvalues of iJ cm|, one value per mode, descending.

    A covariance matrix is physical iff all values are >= 1 (vacuum units).
    """
    cm = _as_square_even(cm, "covariance matrix")
    _require_symmetric(cm, "covariance matrix")
    n = cm.shape[0] // 2
    mags = np.sort(np.abs(np.linalg.eigvals(symplectic_form(n) @ cm)))[::-1]
    # eigenvalues come in +/- pairs of equal magnitude; average each pair
    return mags.reshape(n, 2).mean(axis=1)


def quadrature_variance(state: GaussianState, coeffs: Sequence[float]) -> float:
    """Variance of the combination sum_k coeffs_k R_k, equal to (hbar/2) c^T cm c."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (2 * state.n_modes,):
        raise ShapeMismatchError(
            f"coefficient vector must have length {2 * state.n_modes}, got {c.shape}"
        )
    return 0.5 * state.hbar * float(c @ state.cm @ c)


# ---------------------------------------------------------------------------
# serialization

STATE_SCHEMA_KEYS = ("hbar", "modes", "labels", "cm", "disp")


def state_to_dict(state: GaussianState) -> dict:
    return {
        "hbar": state.hbar,
        "modes": state.n_modes,
        "labels": list(state.labels),
        "cm": [[float(v) for v in row] for row in state.cm],
        "disp": [float(v) for v in state.disp],
    }


def state_from_dict(data: dict) -> GaussianState:
    missing = [k for k in STATE_SCHEMA_KEYS if k not in data]
    if missing:
        raise ShapeMismatchError(f"state record is missing keys: {missing}")
    cm = np.asarray(data["cm"], dtype=float)
    n = int(data["modes"])
    if cm.shape != (2 * n, 2 * n):
        raise ShapeMismatchError(
            f"state record declares {n} modes but cm has shape {cm.shape}"
        )
    return GaussianState(
        cm,
        np.asarray(data["disp"], dtype=float),
        tuple(data["labels"]),
        float(data["hbar"]),
    )


def save_state(state: GaussianState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh, indent=1)
        fh.write("\n")


def load_state(path) -> GaussianState:
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_dict(json.load(fh))
