"""Negativity of Kerr-evolved squeezed vacuum under loss, with the Kerr-free numerical floor.

    python scripts/sv_kerr_loss.py --out runs/sv_kerr
"""

import argparse
from pathlib import Path

import numpy as np

from kerr_bsv.io import write_csv
from kerr_bsv.scenarios import sv_negativity_vs_loss

PAIRS = [(4.0, 0.02, 300), (20.0, 0.004, 700)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/sv_kerr"))
    ap.add_argument("--points", type=int, default=21, help="loss values between 0 and 0.5")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    losses = np.linspace(0.0, 0.5, args.points)
    cols, header = [losses], ["loss"]
    for n_s, chi_t, dim in PAIRS:
        cols.append(sv_negativity_vs_loss(n_s, chi_t, dim, losses))
        cols.append(sv_negativity_vs_loss(n_s, chi_t, dim, losses, reference=True))
        header += [f"neg_ns{n_s:g}", f"floor_ns{n_s:g}"]
    path = write_csv(args.out / "negativity_vs_loss.csv", header, np.column_stack(cols))

    print(" ".join(f"{h:>14}" for h in header))
    for row in np.column_stack(cols):
        print(" ".join(f"{v:14.4e}" for v in row))
    dim_, bright = cols[1], cols[3]
    cross = np.nonzero(np.diff(np.sign(bright - dim_)))[0]
    if cross.size:
        print(f"curves cross between R={losses[cross[0]]:.3f} and R={losses[cross[0] + 1]:.3f}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
