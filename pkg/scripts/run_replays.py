#!/usr/bin/env python3
"""Run both shipped missions and print their reports side by side."""

import sys
from pathlib import Path

from aerotwin.cli import main

RUNS = Path("runs")


if __name__ == "__main__":
    out = 0
    for mission in ("gui_nine_point", "vr_pick_place"):
        print(f"\n=== {mission} ===")
        out |= main([
            "replay",
            "--script", f"missions/{mission}.yaml",
            "--out", str(RUNS / mission),
        ])
    sys.exit(out)
