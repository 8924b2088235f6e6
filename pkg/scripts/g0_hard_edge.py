"""Single interval: how the fitted constant of log F(r) compares with the
Barnes-G constant log G(1+alpha) - (alpha/2) log(2 pi) - (alpha^2/4) log x1."""
import argparse
import math
from dataclasses import dataclass

import mpmath

from besselgap import log_det, validate


@dataclass(frozen=True)
class Settings:
    x1: float = 1.0
    alphas: tuple = (0.0, 0.5, 1.0, 2.0)
    radii: tuple = (100.0, 200.0, 400.0)


def barnes_constant(alpha, x1):
    return float(mpmath.log(mpmath.barnesg(1 + alpha))) - alpha / 2 * math.log(2 * math.pi) \
        - alpha ** 2 / 4 * math.log(x1)


def run(cfg: Settings):
    print("alpha,r,log_F - expansion,barnes constant")
    for alpha in cfg.alphas:
        config = validate((cfg.x1,), alpha)
        for r in cfg.radii:
            expansion = -cfg.x1 * r / 4 + alpha * math.sqrt(cfg.x1 * r) - alpha ** 2 / 4 * math.log(r)
            rest = log_det(r, config).log_F - expansion
            print(f"{alpha:g},{r:g},{rest:.6f},{barnes_constant(alpha, cfg.x1):.6f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--x1", type=float, default=1.0)
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    a = p.parse_args()
    run(Settings(a.x1, tuple(a.alpha)))
