"""Beam geometries, the interaction symplectic, schedules, geometry files."""

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvsim.core import (
    apply_symplectic,
    quadrature_variance,
    symplectic_form,
    thermal_state,
    vacuum_state,
)
from cvsim.errors import BadGeometryError, NonPhysicalBeamError, UnknownScheduleError
from cvsim.interface import (
    BeamRoute,
    BeamSpec,
    PassGeometry,
    angle_schedule,
    interaction_symplectic,
    load_routes,
    routes_from_dict,
    routes_to_dict,
    run_beam,
    run_routes,
    save_routes,
    schedule_names,
)

from conftest import random_physical_state, two_ensemble_beam_cm

ANGLES = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)
COUPLINGS = st.floats(0.0, 3.0, allow_nan=False)


def heisenberg_single_pass(angle: float, kappa: float) -> np.ndarray:
    """Quadrature update of one pass, rows = (x_A, p_A, x_L, p_L) out."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array(
        [
            [1, 0, 0, -kappa * c],
            [0, 1, 0, kappa * s],
            [-kappa * s, -kappa * c, 1, 0],
            [0, 0, 0, 1],
        ]
    )


class TestInteractionSymplectic:
    @settings(max_examples=60, deadline=None)
    @given(angle=ANGLES, kappa=COUPLINGS)
    def test_single_pass_matches_quadrature_map(self, angle, kappa):
        s = interaction_symplectic(1, PassGeometry.from_angles({0: angle}, kappa))
        np.testing.assert_allclose(s.matrix.T, heisenberg_single_pass(angle, kappa), atol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(
        angles=st.lists(ANGLES, min_size=1, max_size=4),
        kappa=COUPLINGS,
    )
    def test_symplectic_identity(self, angles, kappa):
        n = len(angles)
        geometry = PassGeometry.from_angles(dict(enumerate(angles)), kappa)
        s = interaction_symplectic(n, geometry).matrix
        j = symplectic_form(n + 1)
        assert np.max(np.abs(s.T @ j @ s - j)) <= 1e-10

    def test_beam_momentum_is_conserved(self):
        geometry = PassGeometry.from_angles({0: 0.4, 1: 2.2, 2: -0.9}, 1.3)
        s = interaction_symplectic(3, geometry)
        # the Heisenberg map is S^T; its last row must be the unit vector on p_L
        expected = np.zeros(8)
        expected[7] = 1.0
        np.testing.assert_array_equal(s.matrix.T[7], expected)

    @settings(max_examples=40, deadline=None)
    @given(angle=ANGLES, kappa=COUPLINGS, seed=st.integers(0, 10**6))
    def test_protected_atomic_combination(self, angle, kappa, seed):
        # x_A sin(a) + p_A cos(a) commutes with the coupling: variance unchanged
        rng = np.random.default_rng(seed)
        state = random_physical_state(2, rng)
        coeffs = np.array([math.sin(angle), math.cos(angle), 0.0, 0.0])
        before = quadrature_variance(state, coeffs)
        out = apply_symplectic(state, interaction_symplectic(1, PassGeometry.from_angles({0: angle}, kappa)))
        assert quadrature_variance(out, coeffs) == pytest.approx(before, rel=1e-10)

    def test_pass_order_is_irrelevant(self):
        passes = [(0, 0.3, 1.1), (1, -1.2, 0.7), (2, 2.0, 0.4)]
        mats = []
        for perm in itertools.permutations(passes):
            mats.append(interaction_symplectic(3, PassGeometry(tuple(perm))).matrix)
        for m in mats[1:]:
            np.testing.assert_array_equal(m, mats[0])

    def test_geometry_validation(self):
        with pytest.raises(BadGeometryError):
            PassGeometry.from_angles({0: 0.0, 1: float("nan")}, 1.0)
        with pytest.raises(BadGeometryError):
            PassGeometry(((0, 0.1, 1.0), (0, 0.2, 1.0)))  # repeated ensemble
        with pytest.raises(BadGeometryError):
            PassGeometry(((0, 0.1, -0.5),))  # negative coupling
        with pytest.raises(BadGeometryError):
            interaction_symplectic(2, PassGeometry.from_angles({5: 0.0}, 1.0))

    def test_beam_spec_validation(self):
        with pytest.raises(NonPhysicalBeamError):
            BeamSpec(var_x=0.5, var_p=0.5)
        with pytest.raises(NonPhysicalBeamError):
            BeamSpec(var_x=-1.0, var_p=2.0)
        BeamSpec(var_x=0.25, var_p=4.0)  # squeezed but physical


class TestRunBeam:
    def test_reproduces_two_ensemble_joint_matrix(self):
        n1, n2, kappa = 1.5, 2.0, 0.7
        (geometry,) = angle_schedule("fig1b", kappa)
        joint = run_beam(thermal_state([n1, n2]), geometry, disposal="keep")
        np.testing.assert_allclose(joint.cm, two_ensemble_beam_cm(n1, n2, kappa), atol=1e-13)

    def test_tracing_the_beam_keeps_the_atomic_block(self):
        from cvsim.core import partial_trace

        n1, n2, kappa = 1.5, 2.0, 0.7
        (geometry,) = angle_schedule("fig1b", kappa)
        joint = run_beam(thermal_state([n1, n2]), geometry, disposal="keep")
        atoms = partial_trace(joint, [0, 1])
        np.testing.assert_allclose(atoms.cm, two_ensemble_beam_cm(n1, n2, kappa)[:4, :4], atol=1e-13)

    def test_disposals(self, rng):
        state = random_physical_state(2, rng)
        geometry = PassGeometry.from_angles({0: 0.2, 1: 1.4}, 0.8)
        kept = run_beam(state, geometry, disposal="keep")
        assert kept.n_modes == 3
        measured = run_beam(state, geometry, disposal="measureX", outcome=0.3)
        assert measured.n_modes == 2
        discarded = run_beam(state, geometry, disposal="discard")
        assert discarded.n_modes == 2
        traj, shift = run_beam(state, geometry, disposal="discard", rng=rng)
        assert traj.n_modes == 2 and shift.shape == (4,)
        with pytest.raises(ValueError):
            run_beam(state, geometry, disposal="teleport")


class TestSchedules:
    def test_known_names(self):
        assert set(schedule_names()) == {
            "fig1a",
            "fig1b",
            "fig1c",
            "linear",
            "triangular",
            "smolin",
        }
        with pytest.raises(UnknownScheduleError):
            angle_schedule("ring")

    def test_smolin_angle_table(self):
        beams = angle_schedule("smolin", 1.0)
        assert len(beams) == 2
        first = {p.ensemble: p.angle for p in beams[0].passes}
        assert first == {0: 0.0, 1: 0.0, 2: math.pi, 3: math.pi}
        second = {p.ensemble: p.angle for p in beams[1].passes}
        assert second[0] == math.pi / 2 and second[3] == math.pi / 2
        assert second[1] == -math.pi / 2 and second[2] == -math.pi / 2

    def test_linear_first_beam_touches_first_two_ensembles(self):
        beams = angle_schedule("linear", 1.0)
        assert [g.ensembles for g in beams] == [(0, 1), (0, 1, 2), (1, 2)]

    @pytest.mark.parametrize(
        "name,coeffs",
        [
            ("fig1a", [1, 0, -1, 0]),  # x1 - x2
            ("fig1b", [0, 1, 0, 1]),  # p1 + p2
            ("fig1c", [1, 0, 1, 0]),  # x1 + x2
        ],
    )
    def test_pair_schedules_squeeze_their_combination(self, name, coeffs):
        (geometry,) = angle_schedule(name, 1.0)
        out = run_beam(vacuum_state(2), geometry, disposal="measureX")
        vacuum_level = quadrature_variance(vacuum_state(2), coeffs)
        assert quadrature_variance(out, coeffs) < 0.6 * vacuum_level

    def test_couplings_fill_in(self):
        beams = angle_schedule("triangular", 0.37)
        assert all(p.coupling == 0.37 for g in beams for p in g.passes)


class TestGeometryFiles:
    def _routes(self):
        return [
            BeamRoute(
                PassGeometry.from_angles({0: 0.0, 1: math.pi / 2}, 1.2),
                beam=BeamSpec(var_x=2.0, var_p=0.6),
                disposal="measureX",
                outcome=0.4,
            ),
            BeamRoute(PassGeometry.from_angles({1: -0.7}, 0.5), disposal="discard"),
        ]

    def test_round_trip(self, tmp_path):
        routes = self._routes()
        path = tmp_path / "geometry.json"
        save_routes(routes, path)
        clone = load_routes(path)
        assert clone == routes

    def test_file_uses_one_based_ensemble_keys(self, tmp_path):
        path = tmp_path / "geometry.json"
        save_routes(self._routes(), path)
        data = json.loads(path.read_text())
        assert set(data["beams"][0]["angles"]) == {"1", "2"}
        assert data["beams"][0]["kappa"] == 1.2

    def test_run_routes_matches_direct_composition(self, rng):
        state = random_physical_state(2, rng)
        routes = self._routes()
        by_routes = run_routes(state, routes)
        direct = run_beam(
            state, routes[0].geometry, routes[0].beam, disposal="measureX", outcome=0.4
        )
        direct = run_beam(direct, routes[1].geometry, disposal="discard")
        np.testing.assert_allclose(by_routes.cm, direct.cm)
        np.testing.assert_allclose(by_routes.disp, direct.disp)

    def test_per_pass_couplings_survive_round_trip(self):
        geometry = PassGeometry(((0, 0.1, 0.5), (1, 0.2, 0.9)))
        routes = [BeamRoute(geometry)]
        clone = routes_from_dict(routes_to_dict(routes))
        assert clone == routes

    def test_bad_file_is_rejected(self):
        with pytest.raises(BadGeometryError):
            routes_from_dict({"beams": [{"kappa": 1.0}]})
