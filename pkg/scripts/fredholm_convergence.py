"""Node-doubling deltas of the Nystrom determinant in double and multiprecision."""
import argparse

from besselgap import log_det, validate

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--x", default="1,2,3")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--r", type=float, default=100.0)
    p.add_argument("--dps", type=int, default=120)
    a = p.parse_args()
    config = validate([float(v) for v in a.x.split(",")], a.alpha)
    for precision, dps in (("double", None), ("mp", a.dps)):
        try:
            res = log_det(a.r, config, m=8, precision=precision, dps=dps, min_levels=5, tol=1e-10)
        except ArithmeticError as exc:
            print(f"{precision}: {exc}")
            continue
        print(f"{precision}: log F = {res.log_F:.15g}; deltas "
              + ", ".join(f"{d:.2e}" for d in res.deltas))
