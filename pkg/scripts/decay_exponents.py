"""Log-log slopes of weighted sup norms of free Gaussian evolution."""
import argparse

import numpy as np

from icqnls.grid import WaveField, make_grid
from icqnls.inequalities import free_decay_exponents


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--thetas", type=float, nargs="+", default=[0.0, 0.25, 0.5])
    ap.add_argument("--t0", type=float, default=2.0)
    ap.add_argument("--t1", type=float, default=10.0)
    ap.add_argument("--width", type=float, default=1.0)
    args = ap.parse_args()
    g = make_grid(256, 12.0)
    x1, x2 = g.coords
    phi = WaveField(g, np.exp(-(x1 ** 2 + x2 ** 2) / (2 * args.width ** 2)) + 0j)
    for th, fit in free_decay_exponents(phi, args.thetas, args.t0, args.t1).items():
        print(f"theta={th:.3g} slope={fit.slope:+.4f} predicted={-(1 - th):+.4f} rms={fit.residual:.1e}")


if __name__ == "__main__":
    main()
