"""Run the acceptance checks and print one line per criterion.

    python3 scripts/run_acceptance.py            # all
    python3 scripts/run_acceptance.py 3 4        # a subset
"""
import sys

from imopt.acceptance import run_all

if __name__ == "__main__":
    nums = [int(a) for a in sys.argv[1:]] or None
    results = run_all(nums)
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.ok for r in results) else 1)
