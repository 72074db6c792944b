#!/usr/bin/env python3
"""Identification with 1, 2 and 4 scales at noise 200%, aperture pi/8."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from electrosense.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", "fig_scale_ablation", "--ablation", "--out",
                   "reports/scale_ablation", "--verbose", *sys.argv[1:]]))
