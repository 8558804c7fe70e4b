"""Faraday-type light/matter interface in the "geometrical" configuration.

A single beam crosses a row of polarized ensembles, hitting ensemble ``i`` at
angle ``alpha_i`` with coupling ``kappa_i``.  The QND coupling is bilinear,
so the whole pass is one symplectic matrix acting on (ensembles + beam); the
beam's momentum is conserved, and for each ensemble the combination
``x sin(alpha) + p cos(alpha)`` is protected.

Heisenberg picture of a single pass (kappa = coupling, a = angle):

    x_A -> x_A - kappa p_L cos(a)
    p_A -> p_A + kappa p_L sin(a)
    x_L -> x_L - kappa (p_A cos(a) + x_A sin(a))
    p_L -> p_L
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .core import (
    PSD_TOL,
    GaussianState,
    SymplecticTransform,
    condition_on_homodyne,
    MeasurementRecord,
    apply_symplectic,
    direct_sum,
    discard_unmeasured_beam,
    make_state,
)
from .errors import BadGeometryError, NonPhysicalBeamError, UnknownScheduleError


class Pass(NamedTuple):
    """One crossing of the beam through one ensemble."""

    ensemble: int
    angle: float
    coupling: float


@dataclass(frozen=True)
class BeamSpec:
    """Second moments and mean of a light mode before it enters the interface."""

    var_x: float = 1.0
    var_p: float = 1.0
    mean: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.var_x <= 0 or self.var_p <= 0:
            raise NonPhysicalBeamError("beam variances must be positive")
        if self.var_x * self.var_p < 1.0 - PSD_TOL:
            raise NonPhysicalBeamError(
                f"beam violates the uncertainty bound: var_x * var_p = "
                f"{self.var_x * self.var_p:.6g} < 1"
            )

    def as_state(self) -> GaussianState:
        cm = np.diag([self.var_x, self.var_p])
        return make_state([cm], disp=np.array(self.mean), labels=("beam",))


@dataclass(frozen=True)
class PassGeometry:
    """Ordered list of (ensemble, angle, coupling) crossings of one beam."""

    passes: tuple[Pass, ...]

    def __post_init__(self) -> None:
        passes = tuple(Pass(int(e), float(a), float(k)) for e, a, k in self.passes)
        if not passes:
            raise BadGeometryError("a beam geometry needs at least one pass")
        seen = [p.ensemble for p in passes]
        if len(set(seen)) != len(seen):
            raise BadGeometryError(f"ensemble indices repeat within one beam: {seen}")
        for p in passes:
            if p.ensemble < 0:
                raise BadGeometryError(f"negative ensemble index {p.ensemble}")
            if not math.isfinite(p.angle):
                raise BadGeometryError(f"angle for ensemble {p.ensemble} is not finite")
            if p.coupling < 0 or not math.isfinite(p.coupling):
                raise BadGeometryError(
                    f"coupling for ensemble {p.ensemble} must be finite and >= 0"
                )
        object.__setattr__(self, "passes", passes)

    @classmethod
    def from_angles(
        cls,
        angles: Mapping[int, float] | Sequence[tuple[int, float]],
        coupling: float,
    ) -> "PassGeometry":
        items = angles.items() if isinstance(angles, Mapping) else angles
        return cls(tuple(Pass(e, a, coupling) for e, a in items))

    @property
    def ensembles(self) -> tuple[int, ...]:
        return tuple(p.ensemble for p in self.passes)


def interaction_symplectic(n_ensembles: int, geometry: PassGeometry) -> SymplecticTransform:
    """Symplectic matrix of one beam crossing the given ensembles.

    The beam is the last mode, so the matrix is (2 n_ensembles + 2)-dimensional.
    Ensembles the geometry does not mention are untouched (identity blocks).
    The block structure is order-free: all passes of one beam commute.
    """
    if n_ensembles < 1:
        raise BadGeometryError("need at least one ensemble")
    for p in geometry.passes:
        if p.ensemble >= n_ensembles:
            raise BadGeometryError(
                f"geometry touches ensemble {p.ensemble} but only {n_ensembles} exist"
            )
    dim = 2 * n_ensembles + 2
    s = np.eye(dim)
    lx, lp = dim - 2, dim - 1
    for ens, angle, kappa in geometry.passes:
        r = 2 * ens
        sin_a, cos_a = math.sin(angle), math.cos(angle)
        # ensemble rows pick up the beam's conserved momentum ...
        s[r, lx] = -kappa * sin_a
        s[r + 1, lx] = -kappa * cos_a
        # ... and the beam's position reads out one atomic combination
        s[lp, r] = -kappa * cos_a
        s[lp, r + 1] = kappa * sin_a
    return SymplecticTransform(s)


DISPOSALS = ("keep", "discard", "measureX", "measureP")


def run_beam(
    state: GaussianState,
    geometry: PassGeometry,
    beam: BeamSpec = BeamSpec(),
    disposal: str = "keep",
    outcome: float = 0.0,
    rng: np.random.Generator | int | None = None,
    momentum_value: float | None = None,
):
    """Append a beam, run it through the interface, then dispose of it.

    disposal:
        "keep"      retain the beam as the last mode for later analysis;
        "discard"   trace the beam out (pass ``rng`` or ``momentum_value`` for
                    the trajectory form, which returns ``(state, shift)``);
        "measureX"  homodyne the beam's x quadrature with ``outcome``;
        "measureP"  same for p.
    """
    if disposal not in DISPOSALS:
        raise ValueError(f"disposal must be one of {DISPOSALS}, got {disposal!r}")
    n_ens = state.n_modes
    joint = direct_sum(state, beam.as_state())
    joint = apply_symplectic(joint, interaction_symplectic(n_ens, geometry))
    if disposal == "keep":
        return joint
    if disposal == "discard":
        return discard_unmeasured_beam(joint, n_ens, rng=rng, momentum_value=momentum_value)
    quad = "x" if disposal == "measureX" else "p"
    return condition_on_homodyne(joint, MeasurementRecord(n_ens, quad, outcome))


# ---------------------------------------------------------------------------
# built-in angle schedules

_PI = math.pi
_HALF = math.pi / 2

# Each schedule is a tuple of beams; each beam a tuple of (ensemble, angle).
# Two-ensemble beams (an X homodyne after the pass squeezes the combination
# the beam's position picked up):
#   fig1a  squeezes x1 - x2
#   fig1b  squeezes p1 + p2 (both passes with cos = -1, which fixes the sign
#          of the light-atom correlations used by the bipartite protocol)
#   fig1c  squeezes x1 + x2 (the erasure geometry)
# Cluster rows squeeze p_a + sum of neighbour x_b for each graph node; the
# Smolin rows displace the two squeezed pair-combinations in opposite
# directions when the beams are left unmeasured.
_SCHEDULES: dict[str, tuple[tuple[tuple[int, float], ...], ...]] = {
    "fig1a": (((0, _HALF), (1, -_HALF)),),
    "fig1b": (((0, _PI), (1, _PI)),),
    "fig1c": (((0, _HALF), (1, _HALF)),),
    "linear": (
        ((0, 0.0), (1, _HALF)),
        ((0, _HALF), (1, 0.0), (2, _HALF)),
        ((1, _HALF), (2, 0.0)),
    ),
    "triangular": (
        ((0, 0.0), (1, _HALF), (2, _HALF)),
        ((0, _HALF), (1, 0.0), (2, _HALF)),
        ((0, _HALF), (1, _HALF), (2, 0.0)),
    ),
    "smolin": (
        ((0, 0.0), (1, 0.0), (2, _PI), (3, _PI)),
        ((0, _HALF), (1, -_HALF), (2, -_HALF), (3, _HALF)),
    ),
}


def angle_schedule(name: str, kappa: float = 1.0) -> list[PassGeometry]:
    """Return the list of beam geometries for one of the built-in schedules."""
    try:
        beams = _SCHEDULES[name]
    except KeyError:
        raise UnknownScheduleError(
            f"unknown schedule {name!r}; choose from {sorted(_SCHEDULES)}"
        ) from None
    return [PassGeometry.from_angles(beam, kappa) for beam in beams]


def schedule_names() -> tuple[str, ...]:
    return tuple(sorted(_SCHEDULES))


# ---------------------------------------------------------------------------
# geometry files


@dataclass(frozen=True)
class BeamRoute:
    """A beam geometry together with its light mode and disposal."""

    geometry: PassGeometry
    beam: BeamSpec = BeamSpec()
    disposal: str = "keep"
    outcome: float = 0.0

    def __post_init__(self) -> None:
        if self.disposal not in DISPOSALS:
            raise ValueError(f"disposal must be one of {DISPOSALS}, got {self.disposal!r}")


def run_routes(
    state: GaussianState,
    routes: Iterable[BeamRoute],
    rng: np.random.Generator | int | None = None,
) -> GaussianState:
    """Run several beams in sequence, applying each route's disposal."""
    for route in routes:
        result = run_beam(
            state,
            route.geometry,
            beam=route.beam,
            disposal=route.disposal,
            outcome=route.outcome,
            rng=rng if route.disposal == "discard" and rng is not None else None,
        )
        state = result[0] if isinstance(result, tuple) else result
    return state


def routes_to_dict(routes: Sequence[BeamRoute]) -> dict:
    # ensemble keys are 1-based in the file format
    beams = []
    for route in routes:
        couplings = {p.coupling for p in route.geometry.passes}
        entry: dict = {
            "angles": {str(p.ensemble + 1): p.angle for p in route.geometry.passes},
            "beam": {"var_x": route.beam.var_x, "var_p": route.beam.var_p},
            "disposal": route.disposal,
        }
        if len(couplings) == 1:
            entry["kappa"] = route.geometry.passes[0].coupling
        else:
            entry["kappas"] = {str(p.ensemble + 1): p.coupling for p in route.geometry.passes}
        if route.outcome:
            entry["outcome"] = route.outcome
        if route.beam.mean != (0.0, 0.0):
            entry["beam"]["mean"] = list(route.beam.mean)
        beams.append(entry)
    return {"beams": beams}


def routes_from_dict(data: dict) -> list[BeamRoute]:
    routes = []
    for k, entry in enumerate(data.get("beams", [])):
        try:
            angles = {int(key) - 1: float(v) for key, v in entry["angles"].items()}
        except (KeyError, ValueError) as exc:
            raise BadGeometryError(f"beam {k}: bad or missing angle table") from exc
        if "kappas" in entry:
            kappas = {int(key) - 1: float(v) for key, v in entry["kappas"].items()}
            passes = tuple(Pass(e, a, kappas[e]) for e, a in sorted(angles.items()))
            geometry = PassGeometry(passes)
        else:
            geometry = PassGeometry.from_angles(
                sorted(angles.items()), float(entry.get("kappa", 1.0))
            )
        beam_entry = entry.get("beam", {})
        beam = BeamSpec(
            var_x=float(beam_entry.get("var_x", 1.0)),
            var_p=float(beam_entry.get("var_p", 1.0)),
            mean=tuple(beam_entry.get("mean", (0.0, 0.0))),
        )
        routes.append(
            BeamRoute(
                geometry,
                beam=beam,
                disposal=entry.get("disposal", "keep"),
                outcome=float(entry.get("outcome", 0.0)),
            )
        )
    return routes


def save_routes(routes: Sequence[BeamRoute], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(routes_to_dict(routes), fh, indent=1)
        fh.write("\n")


def load_routes(path) -> list[BeamRoute]:
    with open(path, "r", encoding="utf-8") as fh:
        return routes_from_dict(json.load(fh))
