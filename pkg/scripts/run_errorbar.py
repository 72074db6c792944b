#!/usr/bin/env python3
"""Identification error bars at aperture pi/16, noise 100% and 200%."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from electrosense.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", "fig_errorbar_pi16", "--out",
                   "reports/errorbar", "--verbose", *sys.argv[1:]]))
