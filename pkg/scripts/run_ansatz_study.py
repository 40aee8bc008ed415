"""Solved-instance counts over ansatz family, entanglement and depth on 3-bin/3-item MKPs."""
import sys

from _common import main

if __name__ == "__main__":
    sys.exit(main("ansatz_study", __doc__, quick=dict(instances=3, max_evals=100, restarts=1, layer_grid=(0, 2))))
