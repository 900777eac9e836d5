"""Digital twin of a quadrotor carrying a 4-DoF planar manipulator.

The package simulates the arm (kinematics, servos, gripper), the hovering
drone it hangs from, the human operator feeding it commands, and the
telemetry protocol that streams the whole state at 100 Hz.
"""

from aerotwin.kinematics import (
    JointAngles,
    JointLimits,
    JointTorques,
    LinkGeometry,
    MassModel,
    PlanarPose,
    fk_elbow,
    fk_grip,
    fk_wrist,
    ik_solve,
    static_torques,
    workspace_contains,
)

__version__ = "0.1.0"

__all__ = [
    "JointAngles",
    "JointLimits",
    "JointTorques",
    "LinkGeometry",
    "MassModel",
    "PlanarPose",
    "fk_elbow",
    "fk_grip",
    "fk_wrist",
    "ik_solve",
    "static_torques",
    "workspace_contains",
    "__version__",
]
