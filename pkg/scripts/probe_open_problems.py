"""Random search for PA maps outside the Chatterjea and Ciric classes.

Whether PA maps must be Chatterjea or Ciric contractions is left open in the
literature this package follows.  Finite spaces are searched for instances
that are PA but not in each class; any hit is printed with its seed so it can
be reloaded.  Finding none proves nothing.
"""

import argparse
import json

from palab.report import dumps
from palab.search import SeparationQuery, search_separation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", default="3,6")
    ap.add_argument("--method", default="euclidean", choices=("euclidean", "repaired", "discrete"))
    ap.add_argument("--json", help="write all witnesses here")
    args = ap.parse_args()
    lo, hi = (int(v) for v in args.points.split(","))

    found = {}
    for fail in ("chatterjea", "ciric", "kannan"):
        q = SeparationQuery({"pa"}, {fail}, trials=args.trials, seed=args.seed,
                            point_counts=(lo, hi), method=args.method)
        res = search_separation(q)
        found[fail] = res.to_json()
        print(f"PA but not {fail}: {res.message}")
        if res.witnesses:
            w = res.witnesses[0]
            print(f"  first: seed={w.seed} trial={w.trial} table={list(w.map.table)}")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dumps(found))


if __name__ == "__main__":
    main()
