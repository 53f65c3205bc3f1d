"""Energy drift and Duhamel residual of a smooth defocusing run as dt shrinks.

Usage: python scripts/convergence_study.py [--n 256] [--T 1.0] [--amplitude 1.0]
"""
import argparse
import json

from icqnls.identities import smooth_defocusing_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--L", type=float, default=12.0)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--amplitude", type=float, default=1.0)
    ap.add_argument("--dts", type=float, nargs="+", default=[2e-3, 1e-3, 5e-4])
    args = ap.parse_args()

    rows = []
    for dt in args.dts:
        _, recs, _ = smooth_defocusing_run(args.n, args.L, dt, args.T, args.amplitude, stride=10)
        drift = abs(recs[-1].energy - recs[0].energy)
        rows.append({"dt": dt, "energy_drift": drift,
                     "mass_drift": abs(recs[-1].mass - recs[0].mass) / recs[0].mass})
        print(f"dt={dt:.1e}  energy drift={drift:.4e}")
    for a, b in zip(rows, rows[1:]):
        print(f"ratio {a['dt']:.1e} -> {b['dt']:.1e}: {a['energy_drift'] / b['energy_drift']:.3f}")
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
