"""Plot conditional densities written by ``bigjump density --format csv``.

    bigjump density --model weibull:alpha=2 --d 20 --out w2.csv
    bigjump density --model weibull:alpha=0.5 --d 20 --out w05.csv
    python docs/plot_density.py w2.csv w05.csv -o densities.png

Needs matplotlib, which the library itself does not use.
"""

import argparse
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def read_table(path):
    with open(path) as fh:
        meta = json.loads(fh.readline()[1:])
    data = np.genfromtxt(path, delimiter=",", names=True, skip_header=1)
    return meta, data


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tables", nargs="+")
    ap.add_argument("-o", "--out", default="densities.png")
    ap.add_argument("--log", action="store_true", help="plot log f instead of f")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.tables:
        meta, t = read_table(path)
        y = t["log_pdf"] if args.log else t["pdf"]
        ax.plot(t["x"], y, label=f"{meta['model']}, d={meta['d']:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("log f(x)" if args.log else "f(x)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print("wrote", args.out)


if __name__ == "__main__":
    main()
