import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerotwin.actuation import (
    ArmServos,
    ContactDetector,
    GripperState,
    ServoState,
    grip_force_model,
    step_servo,
    step_servos,
)
from aerotwin.kinematics import JointAngles


def make_servos(rate=3.0, grip_rate=2.0):
    return ArmServos(
        theta=ServoState(0.0, 0.0, rate),
        beta=ServoState(0.0, 0.0, rate),
        alpha=ServoState(0.0, 0.0, rate),
        wrist_roll=ServoState(0.0, 0.0, rate),
        gripper=ServoState(0.0, 0.0, grip_rate),
    )


class TestServoTracking:
    def test_rate_limited_step(self):
        s = step_servo(ServoState(0.0, 0.0, 2.0), 1.0, 0.01)
        assert s.position == pytest.approx(0.02, abs=1e-15)

    def test_exact_arrival(self):
        s = step_servo(ServoState(0.999, 1.0, 2.0), 1.0, 0.01)
        assert s.position == 1.0

    def test_negative_direction(self):
        s = step_servo(ServoState(0.5, 0.0, 2.0), -1.0, 0.01)
        assert s.position == pytest.approx(0.48, abs=1e-15)

    def test_staircase_respects_rate(self):
        # Brute-force check over a stepped target profile.
        servo = ServoState(0.0, 0.0, 3.0)
        dt = 0.01
        position = servo.position
        for i in range(100):
            target = 0.8 if i < 50 else -0.4
            servo = step_servo(servo, target, dt)
            assert abs(servo.position - position) <= servo.max_rate * dt + 1e-15
            position = servo.position

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            step_servo(ServoState(0.0, 0.0, 1.0), 1.0, 0.0)

    def test_step_servos_hold_on_none(self):
        servos = make_servos()
        servos = step_servos(servos, JointAngles(0.5, 0.2, -0.1, 0.0), 0.6, 0.01)
        held = step_servos(servos, None, None, 0.01)
        assert held.theta.target == 0.5
        assert held.gripper.target == 0.6

    def test_grip_fraction_clamped(self):
        servos = step_servos(make_servos(), None, 1.7, 0.01)
        assert servos.gripper.target == 1.0

    @settings(max_examples=100, deadline=None)
    @given(
        targets=st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=50),
        rate=st.floats(0.5, 5.0),
    )
    def test_causality_property(self, targets, rate):
        servo = ServoState(0.0, 0.0, rate)
        dt = 0.01
        for target in targets:
            before = servo.position
            servo = step_servo(servo, target, dt)
            assert abs(servo.position - before) <= rate * dt * (1 + 1e-12)


class TestGripForceModel:
    def test_open_gripper_no_force(self):
        assert grip_force_model(0.0, 0.5, 1.0) == (0.0, 0.0)

    def test_engagement_boundary_zero(self):
        assert grip_force_model(0.5, 0.5, 1.0) == (0.0, 0.0)

    def test_linear_overclosure(self):
        assert grip_force_model(1.0, 0.5, 1.0) == (0.5, 0.5)

    def test_force_clamped_to_one(self):
        left, right = grip_force_model(1.0, 0.9, 1.0)
        assert left == right == pytest.approx(0.9)
        left, right = grip_force_model(1.0, 1.0, 1.0)
        assert left == right == 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            grip_force_model(1.5, 0.5, 1.0)

    @given(
        fraction=st.floats(0.0, 1.0),
        size=st.floats(0.0, 1.0),
        stiffness=st.floats(0.0, 1.0),
    )
    def test_symmetry_property(self, fraction, size, stiffness):
        left, right = grip_force_model(fraction, size, stiffness)
        assert left == right
        assert 0.0 <= left <= 1.0


def feed(detector, samples):
    """Run (t, left, right, fraction, within) samples through the detector."""
    events = []
    for t, left, right, fraction, within in samples:
        g = GripperState(fraction, left, right)
        events.extend(detector.detect_contact(t, g, within))
    return events


class TestContactDetector:
    def test_no_force_no_event(self):
        d = ContactDetector()
        assert feed(d, [(0.0, 0.0, 0.0, 0.0, True)]) == []

    def test_contact_then_grasp_same_tick(self):
        d = ContactDetector(threshold=0.05)
        events = feed(d, [(0.0, 0.0, 0.0, 0.2, True),
                          (0.1, 0.3, 0.3, 0.8, True)])
        assert [e.kind for e in events] == ["contact", "grasp"]
        assert events[0].timestamp == events[1].timestamp == 0.1

    def test_release_on_open(self):
        d = ContactDetector()
        samples = [
            (0.0, 0.3, 0.3, 0.8, True),   # contact + grasp
            (0.1, 0.3, 0.3, 0.8, True),
            (0.2, 0.0, 0.0, 0.0, True),   # commanded open
        ]
        events = feed(d, samples)
        assert [e.kind for e in events] == ["contact", "grasp", "release"]

    def test_drop_when_object_leaves_jaws(self):
        d = ContactDetector()
        samples = [
            (0.0, 0.3, 0.3, 0.8, True),
            (0.1, 0.3, 0.3, 0.8, False),  # object forced out while held
        ]
        events = feed(d, samples)
        assert [e.kind for e in events] == ["contact", "grasp", "drop"]

    def test_brush_contact_without_grasp(self):
        d = ContactDetector(grasp_fraction_min=0.3)
        samples = [
            (0.0, 0.1, 0.0, 0.1, True),   # one bar touches, fraction low
            (0.1, 0.0, 0.0, 0.1, True),   # fades
            (0.2, 0.1, 0.0, 0.1, True),   # touches again
        ]
        events = feed(d, samples)
        assert [e.kind for e in events] == ["contact", "contact"]

    def test_regrasp_after_release(self):
        d = ContactDetector()
        samples = [
            (0.0, 0.3, 0.3, 0.8, True),
            (0.1, 0.0, 0.0, 0.0, True),
            (0.2, 0.3, 0.3, 0.8, True),
        ]
        kinds = [e.kind for e in feed(d, samples)]
        assert kinds == ["contact", "grasp", "release", "contact", "grasp"]

    def test_timestamps_nondecreasing(self):
        d = ContactDetector()
        samples = [(0.01 * i, 0.3 if i % 7 else 0.0, 0.3 if i % 5 else 0.0,
                    0.5 if i % 3 else 0.1, i % 11 != 0) for i in range(200)]
        events = feed(d, samples)
        stamps = [e.timestamp for e in events]
        assert stamps == sorted(stamps)

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            ContactDetector(threshold=0.0)


GRAMMAR_STEP = st.tuples(
    st.floats(0.0, 1.0),          # commanded force level on both bars
    st.floats(0.0, 1.0),          # fraction
    st.booleans(),                # object within jaws
)


class TestEventGrammar:
    @settings(max_examples=200, deadline=None)
    @given(steps=st.lists(GRAMMAR_STEP, min_size=1, max_size=120))
    def test_event_sequence_matches_grammar(self, steps):
        d = ContactDetector()
        samples = [(0.01 * i, f, f, frac, within)
                   for i, (f, frac, within) in enumerate(steps)]
        events = feed(d, samples)
        # walk the regular pattern (contact (grasp (release|drop))?)*
        state = "start"
        for e in events:
            if state in ("start", "closed"):
                assert e.kind == "contact"
                state = "contacted"
            elif state == "contacted":
                assert e.kind in ("contact", "grasp")
                state = "grasped" if e.kind == "grasp" else "contacted"
            elif state == "grasped":
                assert e.kind in ("release", "drop")
                state = "closed"

    @settings(max_examples=200, deadline=None)
    @given(steps=st.lists(GRAMMAR_STEP, min_size=1, max_size=120))
    def test_grasp_always_preceded_by_contact(self, steps):
        d = ContactDetector()
        samples = [(0.01 * i, f, f, frac, within)
                   for i, (f, frac, within) in enumerate(steps)]
        events = feed(d, samples)
        seen_contact = False
        for e in events:
            if e.kind == "grasp":
                assert seen_contact
            seen_contact = e.kind == "contact"
