"""Print the grid equilibria and their stability tags across weights and rates.

    python scripts/equilibria_table.py --grid 20
"""
import argparse

from bpagame.game import GameConfig, find_equilibria


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=20)
    ap.add_argument("--rates", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--gammas", type=float, nargs="+",
                    default=[0.0, 0.1, 0.3, 0.49, 0.5, 0.51, 0.7, 0.9, 1.0])
    args = ap.parse_args()
    print(f"{'r':>5} {'gamma':>6}  equilibria")
    for r in args.rates:
        for gamma in args.gammas:
            rep = find_equilibria(GameConfig(r, gamma, args.grid))
            if len(rep.equilibria) > 4:
                desc = f"{len(rep.equilibria)} weak equilibria (ties)"
            else:
                desc = ", ".join(f"({a:g},{b:g}) {s.value}" for (a, b), s in rep.equilibria)
            print(f"{r:5.2f} {gamma:6.2f}  {desc}")


if __name__ == "__main__":
    main()
