import math

import pytest

from aerotwin.kinematics import JointLimits, LinkGeometry, MassModel


@pytest.fixture
def geom() -> LinkGeometry:
    return LinkGeometry(l1=0.30, l2=0.25, l3=0.19, l_dis=0.05)


@pytest.fixture
def limits() -> JointLimits:
    return JointLimits(
        theta=(math.radians(-120.0), math.radians(120.0)),
        beta=(math.radians(0.0), math.radians(150.0)),
        alpha=(math.radians(-100.0), math.radians(100.0)),
        wrist_roll=(math.radians(-150.0), math.radians(150.0)),
    )


@pytest.fixture
def masses() -> MassModel:
    return MassModel(arm_mass=0.918, arm_com_lever=0.26975421, payload_mass=0.400)
