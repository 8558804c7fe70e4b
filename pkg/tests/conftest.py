"""Shared helpers: random physical states and hand-derived reference matrices."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cvsim.core import GaussianState
from cvsim.interface import PassGeometry, interaction_symplectic


def rotation_symplectic(n_modes: int, mode: int, theta: float) -> np.ndarray:
    s = np.eye(2 * n_modes)
    c, sn = math.cos(theta), math.sin(theta)
    s[2 * mode, 2 * mode] = c
    s[2 * mode, 2 * mode + 1] = sn
    s[2 * mode + 1, 2 * mode] = -sn
    s[2 * mode + 1, 2 * mode + 1] = c
    return s


def squeeze_symplectic(n_modes: int, mode: int, r: float) -> np.ndarray:
    s = np.eye(2 * n_modes)
    s[2 * mode, 2 * mode] = math.exp(r)
    s[2 * mode + 1, 2 * mode + 1] = math.exp(-r)
    return s


def qnd_pass_symplectic(n_modes: int, a: int, b: int, angle: float, kappa: float) -> np.ndarray:
    """One beam pass between two modes, embedded in an n-mode system."""
    small = interaction_symplectic(1, PassGeometry.from_angles({0: angle}, kappa)).matrix
    s = np.eye(2 * n_modes)
    idx = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1]
    s[np.ix_(idx, idx)] = small
    return s


def random_symplectic(
    n_modes: int,
    rng: np.random.Generator,
    factors: int = 10,
    max_squeeze: float = 0.7,
    max_coupling: float = 1.2,
) -> np.ndarray:
    """Generic symplectic built from rotations, squeezers, and beam passes."""
    m = np.eye(2 * n_modes)
    for _ in range(factors):
        kind = rng.integers(3)
        if kind == 0 or n_modes == 1:
            m = m @ rotation_symplectic(n_modes, int(rng.integers(n_modes)), rng.uniform(0, 2 * np.pi))
        elif kind == 1:
            m = m @ squeeze_symplectic(n_modes, int(rng.integers(n_modes)), rng.uniform(-max_squeeze, max_squeeze))
        else:
            a, b = rng.choice(n_modes, size=2, replace=False)
            m = m @ qnd_pass_symplectic(
                n_modes, int(a), int(b), rng.uniform(0, 2 * np.pi), rng.uniform(0, max_coupling)
            )
    return m


def random_physical_state(
    n_modes: int,
    rng: np.random.Generator,
    mixed: bool = True,
    displaced: bool = True,
    max_nu: float = 2.5,
    max_squeeze: float = 0.7,
    max_coupling: float = 1.2,
) -> GaussianState:
    """Random valid state: a Williamson spectrum conjugated by a random symplectic."""
    s = random_symplectic(n_modes, rng, max_squeeze=max_squeeze, max_coupling=max_coupling)
    nus = rng.uniform(1.0, max_nu, size=n_modes) if mixed else np.ones(n_modes)
    cm = s.T @ np.diag(np.repeat(nus, 2)) @ s
    cm = 0.5 * (cm + cm.T)
    disp = rng.normal(0.0, 0.7, size=2 * n_modes) if displaced else np.zeros(2 * n_modes)
    return GaussianState(cm, disp)


# ---------------------------------------------------------------------------
# hand-derived reference matrices for the two-ensemble protocol
# (coordinates x1, p1, x2, p2[, xL, pL]; thermal parameters n1, n2, coupling k)


def two_ensemble_beam_cm(n1: float, n2: float, k: float) -> np.ndarray:
    """Joint atoms+beam covariance after the p1+p2-squeezing pass (fig1b)."""
    return np.array(
        [
            [n1 + k**2, 0, k**2, 0, 0, k],
            [0, n1, 0, 0, n1 * k, 0],
            [k**2, 0, n2 + k**2, 0, 0, k],
            [0, 0, 0, n2, n2 * k, 0],
            [0, n1 * k, 0, n2 * k, 1 + (n1 + n2) * k**2, 0],
            [k, 0, k, 0, 0, 1],
        ],
        dtype=float,
    )


def conditioned_pair_cm(n1: float, n2: float, k: float) -> np.ndarray:
    """Atomic covariance after X-homodyning the beam of the fig1b pass."""
    d = (n1 + n2) * k**2 + 1
    return np.array(
        [
            [n1 + k**2, 0, k**2, 0],
            [0, (n1 * n2 * k**2 + n1) / d, 0, -n1 * n2 * k**2 / d],
            [k**2, 0, n2 + k**2, 0],
            [0, -n1 * n2 * k**2 / d, 0, (n1 * n2 * k**2 + n2) / d],
        ],
        dtype=float,
    )


def erased_pair_cm(n1: float, n2: float, k: float) -> np.ndarray:
    """Diagonal covariance left after the tuned erasure beam is measured."""
    d = (n1 + n2) * k**2 + 1
    return np.diag(
        [
            (k**2 * n2 + n1 * (k**2 + n2)) / (2 * k**2 + n2),
            n1 * (2 * k**2 * n2 + 1) / d,
            (k**2 * n2 + n1 * (k**2 + n2)) / (2 * k**2 + n1),
            n2 * (2 * k**2 * n1 + 1) / d,
        ]
    )


def smolin_mixture_cm(r: float, k: float, var_p1: float, var_p2: float) -> np.ndarray:
    """Four-mode covariance after both displacing beams are traced out."""
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    a1, a2 = k**2 * var_p1 + ch, k**2 * var_p2 + ch
    c1, c2 = k**2 * var_p1 - sh, k**2 * var_p2 - sh
    e1, e2 = -(k**2) * var_p1, -(k**2) * var_p2
    cm = np.zeros((8, 8))
    xs = [0, 2, 4, 6]
    ps = [1, 3, 5, 7]
    cm[np.ix_(xs, xs)] = [
        [a1, c1, e1, e1],
        [c1, a1, e1, e1],
        [e1, e1, a1, c1],
        [e1, e1, c1, a1],
    ]
    cm[np.ix_(ps, ps)] = [
        [a2, -c2, e2, -e2],
        [-c2, a2, -e2, e2],
        [e2, -e2, a2, -c2],
        [-e2, e2, -c2, a2],
    ]
    return cm


def smolin_pair_basis_cm(r: float, f: float) -> np.ndarray:
    """The same state in sum/difference coordinates, equal beam variances."""
    hot, cold = math.exp(2 * r), math.exp(-2 * r)
    cm = np.diag([cold + f, hot, hot, cold + f] * 2)
    cm[0, 4] = cm[4, 0] = -f
    cm[3, 7] = cm[7, 3] = -f
    return cm


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
