import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerotwin.kinematics import (
    JointAngles,
    JointLimits,
    LimitViolation,
    LinkGeometry,
    MassModel,
    PlanarPose,
    Unreachable,
    arm_com_point,
    fk_elbow,
    fk_grip,
    fk_wrist,
    ik_solve,
    static_torques,
    workspace_contains,
    wrap_angle,
)

ORIGIN = (0.0, 0.0)

# Module-level copies for hypothesis tests (frozen, safe to share).
GEOM = LinkGeometry(l1=0.30, l2=0.25, l3=0.19, l_dis=0.05)
LIMITS = JointLimits(
    theta=(math.radians(-120.0), math.radians(120.0)),
    beta=(0.0, math.radians(150.0)),
    alpha=(math.radians(-100.0), math.radians(100.0)),
    wrist_roll=(math.radians(-150.0), math.radians(150.0)),
)


def in_limit_angles(limits):
    """Strategy over arm configurations inside the joint limits."""
    def joint(bounds):
        lo, hi = bounds
        return st.floats(lo, hi, allow_nan=False, allow_infinity=False)

    return st.builds(
        JointAngles,
        theta=joint(limits.theta),
        beta=joint(limits.beta),
        alpha=joint(limits.alpha),
        wrist_roll=joint(limits.wrist_roll),
    )


class TestForwardKinematics:
    def test_elbow_zero_angle(self, geom):
        x, z = fk_elbow(geom, ORIGIN, JointAngles(0.0, 0.0, 0.0))
        assert (x, z) == (0.30, 0.05)

    def test_elbow_quarter_turn(self, geom):
        x, z = fk_elbow(geom, ORIGIN, JointAngles(math.pi / 2, 0.0, 0.0))
        assert x == pytest.approx(-0.05, abs=1e-15)
        assert z == pytest.approx(0.30, abs=1e-15)

    def test_elbow_frozen_oracle(self, geom):
        # Frozen from an independent evaluation of the elbow transform
        # at theta = 0.3 rad.
        x, z = fk_elbow(geom, ORIGIN, JointAngles(0.3, 0.0, 0.0))
        assert x == pytest.approx(0.2718249364046148, abs=1e-15)
        assert z == pytest.approx(0.13642288645468215, abs=1e-15)

    def test_wrist_zero_angles(self, geom):
        assert fk_wrist(geom, ORIGIN, JointAngles(0.0, 0.0, 0.0)) == (0.55, 0.05)

    def test_wrist_elbow_bend(self, geom):
        x, z = fk_wrist(geom, ORIGIN, JointAngles(0.0, math.pi / 2, 0.0))
        assert x == pytest.approx(0.30, abs=1e-15)
        assert z == pytest.approx(-0.20, abs=1e-15)

    def test_wrist_frozen_oracle(self, geom):
        # theta = 0.4, beta = 0.9 evaluated independently.
        x, z = fk_wrist(geom, ORIGIN, JointAngles(0.4, 0.9, 0.0))
        assert x == pytest.approx(0.47624302155802617, abs=1e-15)
        assert z == pytest.approx(0.043022167741688655, abs=1e-15)

    def test_grip_zero_pose_hits_total_length(self, geom):
        pose = fk_grip(geom, ORIGIN, JointAngles(0.0, 0.0, 0.0))
        assert pose.x == 0.74
        assert pose.z == 0.05
        assert pose.phi == 0.0

    def test_grip_phi_identity(self, geom):
        pose = fk_grip(geom, ORIGIN, JointAngles(math.pi / 2, math.pi / 2, 0.0))
        assert pose.phi == pytest.approx(0.0, abs=1e-15)

    def test_grip_frozen_oracle(self, geom):
        pose = fk_grip(geom, ORIGIN, JointAngles(0.25, 0.8, 0.4))
        assert pose.x == pytest.approx(0.6793011638731917, abs=1e-15)
        assert pose.z == pytest.approx(-0.036398243540759545, abs=1e-15)
        assert pose.phi == pytest.approx(-0.15, abs=1e-15)

    def test_fk_respects_base_offset(self, geom):
        q = JointAngles(0.2, 0.4, -0.1)
        x0, z0 = fk_wrist(geom, ORIGIN, q)
        x1, z1 = fk_wrist(geom, (1.5, -2.0), q)
        assert (x1 - x0, z1 - z0) == pytest.approx((1.5, -2.0), abs=1e-12)


class TestChainGeometry:
    @given(
        theta=st.floats(-math.pi, math.pi),
        beta=st.floats(-math.pi, math.pi),
        alpha=st.floats(-math.pi, math.pi),
    )
    def test_segment_norms(self, theta, beta, alpha):
        q = JointAngles(theta, beta, alpha)
        xe, ze = fk_elbow(GEOM, ORIGIN, q)
        xw, zw = fk_wrist(GEOM, ORIGIN, q)
        grip = fk_grip(GEOM, ORIGIN, q)
        assert math.hypot(xw - xe, zw - ze) == pytest.approx(GEOM.l2, abs=1e-12)
        assert math.hypot(grip.x - xw, grip.z - zw) == pytest.approx(GEOM.l3, abs=1e-12)

    def test_wrist_matches_closed_form(self):
        # The composed elbow+forearm transform and the closed-form wrist
        # expressions are two printed derivations of the same point; they
        # must agree to float noise.
        geom = GEOM
        rng = random.Random(7)
        for _ in range(500):
            theta = rng.uniform(-math.pi, math.pi)
            beta = rng.uniform(-math.pi, math.pi)
            xw, zw = fk_wrist(geom, ORIGIN, JointAngles(theta, beta, 0.0))
            x_cf = (
                geom.l1 * math.cos(theta)
                + geom.l2 * math.cos(beta - theta)
                - geom.l_dis * math.sin(theta)
            )
            z_cf = (
                geom.l1 * math.sin(theta)
                - geom.l2 * math.sin(beta - theta)
                + geom.l_dis * math.cos(theta)
            )
            assert abs(xw - x_cf) < 1e-12
            assert abs(zw - z_cf) < 1e-12


class TestInverseKinematics:
    def test_extended_pose_recovers_zero_angles(self, geom, limits):
        q = ik_solve(geom, PlanarPose(0.74, 0.05, 0.0), limits)
        assert q.theta == pytest.approx(0.0, abs=1e-9)
        assert q.beta == pytest.approx(0.0, abs=1e-9)
        assert q.alpha == pytest.approx(0.0, abs=1e-9)

    def test_beyond_total_reach_unreachable(self, geom, limits):
        with pytest.raises(Unreachable):
            ik_solve(geom, PlanarPose(2.0, 0.0, 0.0), limits)

    def test_inner_hole_unreachable(self, geom, limits):
        # Grip on the shoulder axis with phi=0 puts the wrist inside the
        # annulus hole.
        with pytest.raises(Unreachable):
            ik_solve(geom, PlanarPose(0.19, 0.0, 0.0), limits)

    def test_limit_violation_when_reachable_but_folded(self, geom):
        import aerotwin.kinematics as kin

        tight = kin.JointLimits(
            theta=(-0.1, 0.1), beta=(0.0, 0.1), alpha=(-0.1, 0.1),
            wrist_roll=(-1.0, 1.0),
        )
        with pytest.raises(LimitViolation):
            ik_solve(geom, PlanarPose(0.30, -0.30, 0.0), tight)

    def test_round_trip_1000_random(self, geom, limits):
        rng = random.Random(42)
        for _ in range(1000):
            q = JointAngles(
                rng.uniform(*limits.theta),
                rng.uniform(*limits.beta),
                rng.uniform(*limits.alpha),
            )
            target = fk_grip(geom, ORIGIN, q)
            solved = ik_solve(geom, target, limits)
            again = fk_grip(geom, ORIGIN, solved)
            assert abs(again.x - target.x) < 1e-9
            assert abs(again.z - target.z) < 1e-9
            assert abs(wrap_angle(again.phi - target.phi)) < 1e-9

    def test_orientation_identity_exact(self, geom, limits):
        # The identity is an angle identity: alpha may sit a full turn away
        # when the in-limit representative of the wrist angle requires it.
        rng = random.Random(9)
        for _ in range(500):
            q = JointAngles(
                rng.uniform(*limits.theta),
                rng.uniform(*limits.beta),
                rng.uniform(*limits.alpha),
            )
            target = fk_grip(geom, ORIGIN, q)
            solved = ik_solve(geom, target, limits)
            residual = solved.alpha - solved.beta + solved.theta - target.phi
            assert abs(wrap_angle(residual)) <= 1e-12

    def test_deterministic_bitwise(self, geom, limits):
        target = PlanarPose(0.41, -0.33, -0.2)
        a = ik_solve(geom, target, limits)
        b = ik_solve(geom, target, limits)
        assert (a.theta, a.beta, a.alpha) == (b.theta, b.beta, b.alpha)

    def test_prefers_elbow_down_branch(self, geom):
        import aerotwin.kinematics as kin

        wide = kin.JointLimits(
            theta=(-math.pi, math.pi), beta=(-math.pi + 0.01, math.pi),
            alpha=(-math.pi, math.pi), wrist_roll=(-math.pi, math.pi),
        )
        q = ik_solve(geom, PlanarPose(0.40, -0.30, 0.0), wide)
        assert q.beta >= 0.0


class TestWorkspace:
    def test_extended_pose_inside(self, geom, limits):
        pose = fk_grip(geom, ORIGIN, JointAngles(0.0, 0.0, 0.0))
        assert workspace_contains(geom, limits, pose)

    def test_beyond_reach_outside(self, geom, limits):
        assert not workspace_contains(geom, limits, PlanarPose(2.0, 0.0, 0.0))

    def test_never_raises_on_nonfinite(self, geom, limits):
        assert not workspace_contains(geom, limits, PlanarPose(math.nan, 0.0, 0.0))

    def test_grid_matches_ik_success(self, geom, limits):
        for x in [0.05 * i for i in range(-4, 17)]:
            for z in [0.05 * j for j in range(-12, 7)]:
                pose = PlanarPose(x, z, 0.0)
                try:
                    ik_solve(geom, pose, limits)
                    expected = True
                except (Unreachable, LimitViolation):
                    expected = False
                assert workspace_contains(geom, limits, pose) == expected


class TestStaticTorques:
    def test_rated_payload_extended_anchor(self, geom, masses):
        torques = static_torques(geom, masses, JointAngles(0.0, 0.0, 0.0), True)
        assert torques.t1 == pytest.approx(5.3, abs=0.1)

    def test_zero_masses(self, geom):
        empty = MassModel(arm_mass=0.0, arm_com_lever=0.0, payload_mass=0.0)
        torques = static_torques(geom, empty, JointAngles(0.3, 0.7, -0.2), True)
        assert (torques.t1, torques.t2, torques.t3) == (0.0, 0.0, 0.0)

    def test_straight_down_zero_lever(self):
        # With no frame offset the whole chain hangs on the joint axis, so
        # no horizontal lever remains.
        geom = LinkGeometry(0.30, 0.25, 0.19, 0.0)
        masses = MassModel(arm_mass=0.918, arm_com_lever=0.26975421, payload_mass=0.4)
        q = JointAngles(-math.pi / 2, 0.0, 0.0)
        torques = static_torques(geom, masses, q, True)
        assert abs(torques.t1) < 1e-12
        assert abs(torques.t2) < 1e-12
        assert abs(torques.t3) < 1e-12

    def test_monotone_lever_ordering_extended(self, geom, masses):
        torques = static_torques(geom, masses, JointAngles(0.0, 0.0, 0.0), True)
        assert torques.t1 >= torques.t2 >= torques.t3 >= 0.0

    def test_payload_strictly_increases_torques(self, geom, masses):
        import dataclasses

        q = JointAngles(0.1, 0.3, 0.05)
        lighter = static_torques(geom, masses, q, True)
        heavier = static_torques(
            geom, dataclasses.replace(masses, payload_mass=0.5), q, True
        )
        assert heavier.t1 > lighter.t1
        assert heavier.t2 > lighter.t2
        assert heavier.t3 > lighter.t3

    def test_payload_detached_drops_payload_term(self, geom, masses):
        q = JointAngles(0.0, 0.0, 0.0)
        with_payload = static_torques(geom, masses, q, True)
        without = static_torques(geom, masses, q, False)
        lever = fk_grip(geom, ORIGIN, q).x
        expected = masses.payload_mass * masses.gravity * lever
        assert with_payload.t1 - without.t1 == pytest.approx(expected, rel=1e-12)

    def test_com_point_at_full_lever_is_grip(self, geom):
        q = JointAngles(0.2, 0.5, -0.1)
        grip = fk_grip(geom, ORIGIN, q)
        com = arm_com_point(geom, q, geom.total_length + 1.0)
        assert com == pytest.approx((grip.x, grip.z), abs=1e-12)


class TestRoundTripProperty:
    @settings(max_examples=300, deadline=None)
    @given(q=in_limit_angles(LIMITS))
    def test_fk_ik_round_trip(self, q):
        target = fk_grip(GEOM, ORIGIN, q)
        solved = ik_solve(GEOM, target, LIMITS)
        again = fk_grip(GEOM, ORIGIN, solved)
        assert abs(again.x - target.x) < 1e-9
        assert abs(again.z - target.z) < 1e-9
        assert abs(wrap_angle(again.phi - target.phi)) < 1e-9


class TestWrapAngle:
    @pytest.mark.parametrize(
        "angle,expected",
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi, math.pi),
         (math.tau, 0.0), (-math.tau, 0.0)],
    )
    def test_known_points(self, angle, expected):
        assert wrap_angle(angle) == pytest.approx(expected, abs=1e-12)

    @given(st.floats(-50.0, 50.0))
    def test_range_and_equivalence(self, angle):
        w = wrap_angle(angle)
        assert -math.pi < w <= math.pi
        assert math.cos(w) == pytest.approx(math.cos(angle), abs=1e-9)
        assert math.sin(w) == pytest.approx(math.sin(angle), abs=1e-9)


class TestValidation:
    def test_geometry_rejects_nonpositive_links(self):
        with pytest.raises(ValueError):
            LinkGeometry(0.0, 0.25, 0.19, 0.05)

    def test_geometry_allows_zero_offset(self):
        assert LinkGeometry(0.3, 0.25, 0.19, 0.0).l_dis == 0.0

    def test_mass_model_rejects_negative(self):
        with pytest.raises(ValueError):
            MassModel(arm_mass=-1.0, arm_com_lever=0.1)

    def test_joint_angles_reject_nan(self):
        with pytest.raises(ValueError):
            JointAngles(math.nan, 0.0, 0.0)

    def test_limits_reject_inverted(self, limits):
        import dataclasses

        with pytest.raises(ValueError):
            dataclasses.replace(limits, beta=(1.0, -1.0))
