"""Random-feature convergence: kernel approximation error against m, and
embedding error against set size n, both on log-log axes (printed as tables)."""
import argparse

import numpy as np

from setkernels.rff import feature_map, mean_embed, sample_basis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    x, y = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
    exact = np.exp(-np.sum((x - y) ** 2) / 2)
    print("m        mean |k_hat - k|")
    for m in (10, 30, 100, 300, 1000, 3000):
        errs = [abs(feature_map(x, b) @ feature_map(y, b) - exact)
                for b in (sample_basis(m, 2, 1.0, args.seed * 10**6 + r) for r in range(args.replicates))]
        print(f"{m:<8d} {np.mean(errs):.4f}")

    basis = sample_basis(50, 2, 1.0, args.seed)
    ref = mean_embed(rng.normal(size=(20000, 2)), basis)
    ns = np.array([10, 30, 100, 300, 1000, 3000])
    med = [np.median([np.linalg.norm(mean_embed(rng.normal(size=(n, 2)), basis) - ref) for _ in range(100)])
           for n in ns]
    print("\nn        median |mu_n - mu|")
    for n, v in zip(ns, med):
        print(f"{n:<8d} {v:.4f}")
    print(f"log-log slope {np.polyfit(np.log(ns), np.log(med), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
