"""Normalized angular Strichartz ratios across dyadic annuli."""
import argparse

from icqnls.inequalities import sample_extended_strichartz


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=float, default=8.0)
    ap.add_argument("--lams", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--L", type=float, default=12.0)
    ap.add_argument("--mode", type=int, default=1)
    args = ap.parse_args()
    rep = sample_extended_strichartz(tuple(args.lams), args.r, args.n, args.L, mode=args.mode)
    for lam, v, w, c in zip(args.lams, rep.ratios, rep.params["windows"], rep.params["window_changes"]):
        print(f"lambda={lam:3d} ratio={v:.5f} window={w:g} last change={c:.2e}")
    print(f"slope {rep.params['slope']:+.4f}, max/min {rep.params['spread']:.4f}")


if __name__ == "__main__":
    main()
