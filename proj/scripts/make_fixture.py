"""Regenerates data/meps_fixture.csv: 200 synthetic rows laid out like the
MEPS 2001 ambulatory-expenditure extract, drawn from a generalized Heckman
model with coefficients close to published estimates for that data."""

import csv
import math
import pathlib

import numpy as np

ROWS = 200
SEED = 20010


def main() -> None:
    rng = np.random.default_rng(SEED)
    age = np.round(rng.uniform(2.1, 6.4, ROWS), 1)
    female = rng.binomial(1, 0.52, ROWS)
    educ = np.clip(np.round(rng.normal(12.5, 2.9, ROWS)), 0, 17)
    blhisp = rng.binomial(1, 0.31, ROWS)
    totchr = np.minimum(rng.poisson(0.45, ROWS), 4)
    ins = rng.binomial(1, 0.39, ROWS)
    income = np.round(np.exp(rng.normal(2.9, 0.8, ROWS)), 3)

    mu1 = 5.704 + 0.184 * age + 0.250 * female + 0.001 * educ - 0.128 * blhisp \
        + 0.431 * totchr - 0.103 * ins
    mu2 = -0.590 + 0.086 * age + 0.630 * female + 0.057 * educ - 0.337 * blhisp \
        + 0.758 * totchr + 0.173 * ins + 0.002 * income
    sigma = np.exp(0.508 - 0.025 * age - 0.105 * totchr - 0.107 * ins)
    rho = np.tanh(-0.648 - 0.403 * female - 0.438 * totchr)

    eta = rng.standard_normal(ROWS)
    eps2 = rng.standard_normal(ROWS)
    eps1 = sigma * (rho * eps2 + np.sqrt(1 - rho**2) * eta)
    observed = (mu2 + eps2 > 0).astype(int)
    lnambx = mu1 + eps1

    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "meps_fixture.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ambexp", "lnambx", "dambexp", "age", "female", "educ", "blhisp",
                    "totchr", "ins", "income"])
        for i in range(ROWS):
            if observed[i]:
                y = f"{lnambx[i]:.6f}"
                amb = f"{math.exp(lnambx[i]):.0f}"
            else:
                y, amb = "NA", "0"
            w.writerow([amb, y, observed[i], f"{age[i]:.1f}", female[i], int(educ[i]),
                        blhisp[i], int(totchr[i]), ins[i], f"{income[i]:.3f}"])


if __name__ == "__main__":
    main()
