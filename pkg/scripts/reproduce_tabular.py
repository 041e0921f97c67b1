#!/usr/bin/env python3
"""Run the full tabular pipeline on the bundled wine-like dataset: two-step
counterfactuals, the three ablations, and the CFI baseline, aggregated over
five seeds into the Approach / Non-dis / Dis / L1 / AUROC table.

Usage: python scripts/reproduce_tabular.py [OUT_DIR]
"""

import sys
from pathlib import Path

from oodcf.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    args = ["run", "--config", str(ROOT / "configs" / "wine_like.ini")]
    if len(sys.argv) > 1:
        args += ["--out", sys.argv[1]]
    sys.exit(main(args))
