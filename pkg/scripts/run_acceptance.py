"""Print one pass/fail line per acceptance criterion; exit 1 if any fail."""

import argparse
import sys

from cbnorm import acceptance


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    results = acceptance.run_all(seed=args.seed, echo=print)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria pass")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
