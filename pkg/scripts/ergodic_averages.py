"""Time averages of B(-x_j, nu(t^2)) over growing horizons, and the torus average
of prod (z - b_k) against det(zI - T)."""
import argparse
from dataclasses import dataclass

import numpy as np

from besselgap import Flow, build_surface, classify_flow, validate


@dataclass(frozen=True)
class Settings:
    x: tuple = (1.0, 2.0, 3.0, 4.0, 5.0)
    horizons: tuple = (1e2, 1e3, 1e4)
    samples: int = 2 ** 14


def run(cfg: Settings):
    surface = build_surface(validate(cfg.x))
    flow = Flow(surface)
    print(f"Omega = {surface.Omega}; {classify_flow(surface.Omega)}")
    print("T,max |average - 2|")
    for T in cfg.horizons:
        avg = flow.time_averages(T).values
        print(f"{T:g},{np.max(np.abs(avg - 2)):.3e}")
    z = np.linspace(-cfg.x[-1] - 0.5, 0.5, 5)
    sa = flow.space_average_poly(z, n_samples=cfg.samples)
    print("z,qmc,stderr,det(zI-T)")
    for zi, est, err in zip(z, sa.estimate, sa.stderr):
        det = np.linalg.det(zi * np.eye(surface.g) - surface.T)
        print(f"{zi:.4g},{est:.10g},{err:.2e},{det:.10g}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--x", default="1,2,3,4,5")
    p.add_argument("--T", type=float, nargs="+", default=[1e2, 1e3, 1e4])
    a = p.parse_args()
    run(Settings(tuple(float(v) for v in a.x.split(",")), tuple(a.T)))
