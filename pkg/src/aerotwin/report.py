"""Human-readable session reports for replay and analysis."""

from __future__ import annotations

import math

from aerotwin.operator import ScriptPlayer
from aerotwin.telemetry import (
    REFERENCE_TRIALS,
    DeviationStats,
    EmptyWindow,
    SessionRecord,
    compute_stats,
)


def settle_after_release(
    record: SessionRecord, threshold_deg: float = 0.5
) -> tuple[float, float] | None:
    """(release time, seconds until pitch stays within threshold) or None.

    Measured from the last release event; the settle time is the first
    moment after which |pitch| never leaves the threshold again. Returns
    inf seconds when the record ends outside the threshold.
    """
    releases = [e for e in record.contact_events if e.kind == "release"]
    if not releases:
        return None
    release_t = releases[-1].timestamp
    limit = math.radians(threshold_deg)
    settle_t = None
    for frame in record.frames:
        if frame.t < release_t:
            continue
        if abs(frame.drone_attitude[1]) >= limit:
            settle_t = None
        elif settle_t is None:
            settle_t = frame.t
    if settle_t is None:
        return (release_t, math.inf)
    return (release_t, settle_t - release_t)


def _stats_line(stats: DeviationStats, reference=None) -> str:
    line = (f"  {stats.signal:5s} max {stats.max_abs:6.2f} deg   "
            f"std {stats.std_dev:5.2f} deg   mean {stats.mean:+6.2f} deg")
    if reference is not None:
        ref_max, ref_std = reference
        ref_max_text = f"{ref_max:.2f}" if ref_max is not None else "  -- "
        line += f"   | reference trial: max {ref_max_text} deg, std {ref_std:.2f} deg"
    return line


def build_report(
    record: SessionRecord,
    player: ScriptPlayer | None = None,
    reference: str | None = None,
    window: tuple[float, float] | None = None,
) -> str:
    """Render stats, events, torque peaks and settle time as text."""
    lines = ["session report", "=============="]
    lines.append(f"frames: {len(record.frames)}   "
                 f"duration: {record.duration:.2f} s   "
                 f"commands: {len(record.commands)}")

    lines.append("attitude deviation from setpoint:")
    ref_table = REFERENCE_TRIALS.get(reference) if reference else None
    for signal in ("roll", "pitch"):
        try:
            stats = compute_stats(record, signal, window=window)
        except EmptyWindow:
            lines.append(f"  {signal:5s} (window selected no frames)")
            continue
        ref = ref_table.get(signal) if ref_table else None
        lines.append(_stats_line(stats, ref))
    if ref_table:
        lines.append("  (reference columns: deviations recorded in the "
                     "original hardware flight trials)")

    events = record.contact_events
    lines.append(f"events: {len(events)}")
    for event in events:
        entry = (f"  t={event.timestamp:7.2f} s  {event.kind:8s} "
                 f"force={event.force:.3f}")
        if player is not None:
            entry += f"  (waypoint {player.active_waypoint(event.timestamp)})"
        lines.append(entry)

    if record.frames:
        t1 = max(abs(f.torques.t1) for f in record.frames)
        t2 = max(abs(f.torques.t2) for f in record.frames)
        t3 = max(abs(f.torques.t3) for f in record.frames)
        lines.append(f"max |torques|: shoulder {t1:.3f}  elbow {t2:.3f}  "
                     f"wrist {t3:.3f} N*m")

    settle = settle_after_release(record)
    if settle is not None:
        release_t, seconds = settle
        if math.isinf(seconds):
            lines.append(f"release at t={release_t:.2f} s: pitch did not "
                         "settle within 0.5 deg before the record ended")
        else:
            lines.append(f"release at t={release_t:.2f} s: pitch settled "
                         f"within 0.5 deg after {seconds:.2f} s")
    return "\n".join(lines) + "\n"
