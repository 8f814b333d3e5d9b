"""Exact K2 against the large-diffusion leading term and the lambda* sign law, over diffusion and decay rate."""

import argparse

import numpy as np

from kscompete.bifurcation import K2_leading_term, compute_K2, lambda_star
from kscompete.linear_analysis import critical_chi
from kscompete.model import ModelParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=0.5, help="competition coefficient a1 = a2")
    ap.add_argument("--L", type=float, default=1.0)
    args = ap.parse_args()
    print("d,lambda_over_lambda_star,k0,K2,leading,ratio,sign_law")
    for d in (1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6):
        for f in (0.25, 0.5, 0.9, 1.1, 2.0, 4.0):
            base = ModelParams(d1=d, d2=d, a1=args.a, a2=args.a, lam=1.0, L=args.L)
            k0 = critical_chi(base).argmin_k
            p = base.with_(lam=f * lambda_star(k0, base))
            k0 = critical_chi(p).argmin_k
            info = compute_K2(k0, p)
            lead = K2_leading_term(k0, p)
            ratio = info.K2 / lead if lead != 0 else float("nan")
            print(f"{d:g},{f:g},{k0},{info.K2:.10g},{lead:.10g},{ratio:.10g},{int(np.sign(lambda_star(k0, p) - p.lam))}")


if __name__ == "__main__":
    main()
