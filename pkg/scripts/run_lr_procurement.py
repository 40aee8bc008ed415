"""LP-relaxation fixing followed by residual QRAO on risk-aware procurement instances."""
import sys

from _common import main

if __name__ == "__main__":
    sys.exit(main("lr_procurement", __doc__, quick=dict(instances=2, max_evals=100)))
