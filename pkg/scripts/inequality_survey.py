"""Sup ratios of the weighted inequalities over seeded families, with refinement."""
import argparse
import json

from icqnls.inequalities import (TestFunctionFamily, check_angular_decay, check_corollary_decay,
                                 check_hardy_sobolev)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 7])
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--kind", default="bumps", choices=["bumps", "harmonics"])
    args = ap.parse_args()
    out = []
    for seed in args.seeds:
        fam = TestFunctionFamily(args.kind, seed=seed, count=args.count)
        for rep in (check_angular_decay(fam, 0.5), check_corollary_decay(fam, 4.0),
                    check_hardy_sobolev(fam, 0.25, 4.0), check_hardy_sobolev(fam, 0.45, 4.0)):
            out.append({"seed": seed, "inequality": rep.inequality, "params": rep.params,
                        "sup_ratio": rep.sup_ratio, "refinement_change": rep.refinement_change})
            print(f"seed {seed:3d} {rep.inequality:16s} sup={rep.sup_ratio:.4f} "
                  f"change={rep.refinement_change:.2e}")
    print(json.dumps(out, indent=2, default=str))


if __name__ == "__main__":
    main()
