"""The 20-instance 3-bin/3-item QRAO comparison used by the acceptance suite, as a standalone run."""
import sys

from _common import main

CRITERION = dict(instances=20, bins_range=(3, 3), items_range=(3, 3), methods=("qrao",))

if __name__ == "__main__":
    sys.exit(main("mkp_compare", __doc__, quick=dict(instances=3, max_evals=100), base=CRITERION))
