"""Time-periodic patterns past the oscillatory threshold: period of u(0, t) and time-averaged spatial mode."""

import argparse

from kscompete.acceptance import hopf_run
from kscompete.diagnostics import detect_period, dominant_mode_rms
from kscompete.linear_analysis import critical_chi
from kscompete.model import OSCILLATORY


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, nargs="+", default=[4.0, 6.0, 8.0, 12.0, 14.0])
    args = ap.parse_args()
    print("L,linear_k1,rms_mode,verdict,period,peaks")
    for L in args.L:
        tr = hopf_run(L)
        s = tr.series
        est = detect_period(s["t"], s["u_at_x0"])
        late = [snap.u for snap in tr.snapshots if snap.t >= 0.5 * tr.final.t]
        k = dominant_mode_rms(late, tr.grid, 20).k
        print(f"{L:g},{critical_chi(OSCILLATORY.with_(L=L)).argmin_k},{k},{est.verdict.value},{est.period:.10g},{est.n_peaks}")


if __name__ == "__main__":
    main()
