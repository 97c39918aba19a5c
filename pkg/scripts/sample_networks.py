"""Write DOT files for small networks under the three named profiles.

Render with e.g. ``sfdp -Tpng homophily.dot -o homophily.png``.
"""
import argparse
from pathlib import Path

from bpagame.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--r", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("networks"))
    args = ap.parse_args()
    for profile in ("homophily", "heterophily", "unbiased"):
        stem = args.out / profile
        cli_main(["simulate", "--n", str(args.n), "--r", str(args.r), "--seed", str(args.seed),
                  "--profile", profile, "--dot", f"{stem}.dot", "--edges", f"{stem}.txt",
                  "--csv", f"{stem}.csv"])


if __name__ == "__main__":
    main()
