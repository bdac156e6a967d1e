"""Run every property suite once and print the summaries."""
import sys

from unitalcap.suites import SUITES, run_suite


def main(seed: int = 0) -> int:
    ok = True
    for name in SUITES:
        res = run_suite(name, master_seed=seed)
        print(res.summary())
        ok &= res.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(int(sys.argv[1]) if len(sys.argv) > 1 else 0))
