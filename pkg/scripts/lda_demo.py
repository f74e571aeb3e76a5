"""Linear discriminant on separable blobs versus concentric rings, plus a
small DDA-trained net on the rings.

    python3 scripts/lda_demo.py --seeds 0 1 2 --n 500
"""
import argparse

from ddakit import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--n", type=int, default=500, help="samples per class")
    ap.add_argument("--no-net", action="store_true", help="skip the ring network")
    args = ap.parse_args()

    print(f"{'seed':>4}  {'sep acc':>8}  {'sep J':>9}  {'ring acc':>8}  {'ring cut':>8}  {'net acc':>8}")
    for seed in args.seeds:
        res = ex.run_lda_demo(seed, args.n, train_net=not args.no_net)
        sep, ring = res["separable"][1], res["inseparable"][1]
        net = f"{res['ring_net']['accuracy']:8.3f}" if "ring_net" in res else f"{'-':>8}"
        print(f"{seed:>4}  {sep['accuracy']:8.3f}  {sep['fisher']:9.2f}  "
              f"{ring['accuracy']:8.3f}  {ring['best_cut_accuracy']:8.3f}  {net}")


if __name__ == "__main__":
    main()
