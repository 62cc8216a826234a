"""Run every scenario and the comparison table, writing reports to an output directory."""

import argparse
from pathlib import Path

from palab.report import write_json
from palab.repro import SCENARIOS, builtin_targets, comparison_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, fn in SCENARIOS.items():
        res = fn(seed=args.seed) if name == "square-half" else fn()
        write_json(res.to_json(), out / f"{name}.json")
        print(f"{name}: {res.verdict}")
        for note in res.notes:
            print(f"  {note}")

    table = comparison_table(builtin_targets(seed=args.seed))
    (out / "table.csv").write_text(table.to_csv())
    (out / "table.md").write_text(table.to_markdown())
    write_json(table.to_json(), out / "table.json")
    print(table.to_markdown())


if __name__ == "__main__":
    main()
