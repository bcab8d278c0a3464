#!/usr/bin/env python3
"""
Write the curve data behind the speedup figures

This script writes CSV curves into an output directory:
1. Classical Amdahl speedup for f = 0.8 (saturates at 5)
2. Trapezoid speedup for n = p, p*log(p), p^2
3. Matrix-vector product speedup for the same three growths
4. Approximate superlinearity threshold -1/(2p^2) - 1/p

Usage:
    python scripts/reproduce_figures.py [output_dir]
"""

import io
import os
import sys
from pathlib import Path

# Add parent directory to path to import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from speeduplab.cli import main as cli_main

GROWTHS = {"p": "p", "plogp": "p*log(p)", "p2": "p^2"}


def run(argv, path: Path) -> bool:
    """Run one CLI command and write its stdout to path"""
    buffer = io.StringIO()
    code = cli_main(argv, out=buffer)
    if code != 0:
        print(f"  ✗ {' '.join(argv)} exited with {code}")
        return False
    path.write_text(buffer.getvalue(), encoding="utf-8")
    print(f"  ✓ {path}")
    return True


def main():
    """Write all figure curves"""
    output_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
    output_dir.mkdir(parents=True, exist_ok=True)

    print("=" * 70)
    print("FIGURE DATA")
    print("=" * 70)
    print()

    ok = True

    print("Step 1: Amdahl speedup, f = 0.8...")
    ok &= run(["speedup", "--fraction", "0.8", "--p-max", "1000000"], output_dir / "amdahl_f08.csv")
    print()

    for step, model in ((2, "trapezoid"), (3, "matvec")):
        print(f"Step {step}: {model} speedup...")
        for label, growth in GROWTHS.items():
            ok &= run(["speedup", model, "--g", growth, "--p-max", "4096"],
                      output_dir / f"{model}_{label}.csv")
        print()

    print("Step 4: Superlinearity threshold...")
    ok &= run(["fig4", "--p-min", "2", "--p-max", "100"], output_dir / "superlinear_threshold.csv")
    print()

    return 0 if ok else 1


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
