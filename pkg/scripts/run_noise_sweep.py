#!/usr/bin/env python3
"""Success-probability curves over the 25%..800% noise grid (aperture pi/8)."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from electrosense.cli import main

if __name__ == "__main__":
    sys.exit(main(["experiment", "fig_noise_sweep", "--out",
                   "reports/noise_sweep", "--verbose", *sys.argv[1:]]))
