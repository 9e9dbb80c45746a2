"""Certificates against the Floquet verdict on the Mathieu family.

The potential is ``delta + eps cos t`` on a period of 2 pi. For each grid
point the script asks two questions: does the L^p majorant test certify
stable boundedness, and what do the Floquet multipliers say? The chart
uses

    C  certified (and Floquet agrees it is stable)
    s  stable by Floquet, but the sufficient test is inconclusive
    U  unbounded solutions exist
    .  outside the admissible class (negative mean)

A ``C`` sitting on a ``U`` would be a soundness bug; none appear.
Set LYACERT_STEPS=1024 for a faster run.
"""

import json
from importlib.resources import files

import numpy as np

from lyacert.cli import run_sweep


def main(size=16):
    template = json.loads((files("lyacert") / "specs" / "mathieu_template.json").read_text())
    deltas = np.linspace(-0.05, 0.5, size).tolist()
    epss = np.linspace(0.0, 0.6, size).tolist()
    header, rows = run_sweep(template, [("delta", deltas), ("eps", epss)], lambda1="none")
    col = {name: k for k, name in enumerate(header)}
    grid = {}
    for row in rows:
        if row[col["membership"]] == "NOT_IN_LAMBDA":
            mark = "."
        elif row[col["floquet"]] == "UNBOUNDED":
            mark = "U" if row[col["certificate"]] != "CERTIFIED_STABLY_BOUNDED" else "!"
        elif row[col["certificate"]] == "CERTIFIED_STABLY_BOUNDED":
            mark = "C"
        else:
            mark = "s"
        grid[(row[0], row[1])] = mark

    print("eps (rows, top = largest) against delta (columns)\n")
    for e in reversed(epss):
        print(f"{e:5.2f} " + " ".join(grid[(d, e)] for d in deltas))
    print(f"      delta from {deltas[0]:.2f} (left) to {deltas[-1]:.2f} (right) in {size} steps")
    counts = {m: sum(v == m for v in grid.values()) for m in "CsU.!"}
    print(f"\ncertified {counts['C']}, stable but uncertified {counts['s']}, "
          f"unbounded {counts['U']}, outside class {counts['.']}, contradictions {counts['!']}")
    print("Along eps = 0 the certified region ends at delta = 1/4, where the first")
    print("instability tongue touches the axis.")


if __name__ == "__main__":
    main()
