#!/usr/bin/env python3
"""
Generate synthetic timing measurements from a bundled cost model

This script:
1. Loads a bundled model (trapezoid, matvec or fft)
2. Evaluates it on a (p, n) grid, p = 1 rows carrying the serial time
3. Applies optional multiplicative Gaussian noise (fixed seed)
4. Writes a p,n,time_seconds CSV that `speeduplab fit` reads

Usage:
    python scripts/generate_synthetic_timings.py trapezoid timings.csv --noise 0.01
"""

import argparse
import os
import sys

# Add parent directory to path to import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from speeduplab.errors import SpeedupLabError
from speeduplab.fitting import synthesize_samples, write_measurements_csv
from speeduplab.model_library import BUNDLED_MODEL_NAMES, load_bundled_model

DEFAULT_P = [1, 2, 4, 8, 16, 32, 64]
DEFAULT_N = {
    "trapezoid": [256, 1024, 4096, 16384],
    "matvec": [10, 20, 40, 80, 160],
    "fft": [64, 256, 1024, 4096],
}


def main():
    """Generate a synthetic measurement file"""
    parser = argparse.ArgumentParser(description="Synthetic timings from a bundled cost model")
    parser.add_argument("model", choices=BUNDLED_MODEL_NAMES)
    parser.add_argument("output", help="CSV file to write")
    parser.add_argument("--p", type=int, nargs="+", default=DEFAULT_P, help="Processor counts")
    parser.add_argument("--n", type=int, nargs="+", help="Problem dimensions")
    parser.add_argument("--noise", type=float, default=0.0, help="Relative noise level (default: 0)")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    parser.add_argument("--set", nargs="*", default=[], metavar="NAME=VALUE",
                        help="Override model constants, e.g. --set a=2 b=3")
    args = parser.parse_args()

    print("=" * 70)
    print("SYNTHETIC TIMINGS")
    print("=" * 70)
    print()

    try:
        # Step 1: Load model
        print("Step 1: Loading model...")
        model = load_bundled_model(args.model)
        overrides = {}
        for item in args.set:
            name, _, value = item.partition("=")
            overrides[name] = float(value)
        if overrides:
            model = model.with_constants(**overrides)
        print(f"  ✓ {model.name}: constants {dict(model.constants)}")
        print()

        # Step 2: Evaluate grid
        print("Step 2: Evaluating grid...")
        n_values = args.n or DEFAULT_N[args.model]
        samples = synthesize_samples(model, args.p, n_values, noise=args.noise, seed=args.seed)
        print(f"  ✓ {len(samples)} samples (noise {args.noise:g}, seed {args.seed})")
        print()

        # Step 3: Write CSV
        print("Step 3: Writing CSV...")
        path = write_measurements_csv(samples, args.output)
        print(f"  ✓ Written to {path}")
        print()
        return 0

    except ValueError as e:
        print(f"\n✗ Bad constant override: {e}")
        return 2
    except SpeedupLabError as e:
        print(f"\n✗ Error: {e}")
        return 1


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
