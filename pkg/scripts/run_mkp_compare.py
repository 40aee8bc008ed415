"""QAOA against QRAO with Pauli and magic rounding on generated MKPs; also writes fig2.csv."""
import sys

from _common import main

if __name__ == "__main__":
    sys.exit(main("mkp_compare", __doc__, quick=dict(instances=10, max_evals=100, qaoa_max_evals=30, solve_cap=12)))
