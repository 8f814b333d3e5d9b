"""Run chi = 6 on several interval lengths and report the selected wavemode against the linear prediction."""

import argparse

from kscompete.acceptance import wavemode_run
from kscompete.diagnostics import dominant_mode, mode_amplitudes
from kscompete.linear_analysis import critical_chi
from kscompete.model import WAVEMODE


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, nargs="+", default=[7.0, 9.0, 11.0, 13.0])
    args = ap.parse_args()
    print("L,linear_k0,selected_k,reason,t_final")
    for L in args.L:
        tr = wavemode_run(L)
        k = dominant_mode(mode_amplitudes(tr.final.u, tr.grid, 20)).k
        print(f"{L:g},{critical_chi(WAVEMODE.with_(L=L)).argmin_k},{k},{tr.reason.value},{tr.final.t:.10g}")


if __name__ == "__main__":
    main()
