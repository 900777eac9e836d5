#!/usr/bin/env python3
"""Plot a recorded session: grip path, torques, roll and pitch over time.

Usage: python scripts/plot_session.py runs/gui_nine_point/record.jsonl [out.png]
"""

import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from aerotwin.telemetry import SessionRecord


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    record = SessionRecord.load(sys.argv[1])
    out = sys.argv[2] if len(sys.argv) > 2 else "session.png"

    t = [f.t for f in record.frames]
    fig, axes = plt.subplots(4, 1, figsize=(9, 11), sharex=True)

    axes[0].plot(t, [f.grip_pose.x for f in record.frames], label="x")
    axes[0].plot(t, [f.grip_pose.z for f in record.frames], label="z")
    axes[0].set_ylabel("grip pose [m]")
    axes[0].legend()

    for key, label in (("t1", "shoulder"), ("t2", "elbow"), ("t3", "wrist")):
        axes[1].plot(t, [getattr(f.torques, key) for f in record.frames],
                     label=label)
    axes[1].set_ylabel("torque [N*m]")
    axes[1].legend()

    axes[2].plot(t, [math.degrees(f.drone_attitude[0]) for f in record.frames])
    axes[2].set_ylabel("roll [deg]")

    axes[3].plot(t, [math.degrees(f.drone_attitude[1]) for f in record.frames])
    axes[3].set_ylabel("pitch [deg]")
    axes[3].set_xlabel("time [s]")

    for event in record.contact_events:
        for ax in axes:
            ax.axvline(event.timestamp, color="gray", alpha=0.4, ls="--")
        axes[0].annotate(event.kind, (event.timestamp, axes[0].get_ylim()[1]),
                         fontsize=8, rotation=90, va="top")

    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
