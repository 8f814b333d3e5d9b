"""Print the threshold tables: modes on the short interval, wavemodes over L, oscillatory thresholds over L."""

import argparse
import sys

from kscompete.acceptance import SHORT_INTERVAL_REF, WAVEMODE_CHI0, WAVEMODE_K0, WAVEMODE_L, OSCILLATORY_CHI0, OSCILLATORY_K1, OSCILLATORY_L
from kscompete.cli import write_csv
from kscompete.linear_analysis import chi_hat, chi_tilde, critical_chi
from kscompete.model import SHORT_INTERVAL, WAVEMODE, OSCILLATORY


def main() -> None:
    argparse.ArgumentParser(description=__doc__).parse_args()
    rows = [[k, chi_tilde(k, SHORT_INTERVAL), chi_hat(k, SHORT_INTERVAL), rt, rh] for k, (rt, rh) in enumerate(SHORT_INTERVAL_REF, start=1)]
    sys.stdout.write(write_csv(None, ["k", "chi_tilde", "chi_hat", "ref_chi_tilde", "ref_chi_hat"], rows) + "\n")
    rows = []
    for L, k0, c0 in zip(WAVEMODE_L, WAVEMODE_K0, WAVEMODE_CHI0):
        rep = critical_chi(WAVEMODE.with_(L=float(L)))
        rows.append([L, rep.argmin_k, rep.chi0, rep.loss_type, k0, c0])
    sys.stdout.write(write_csv(None, ["L", "k0", "chi0", "loss_type", "ref_k0", "ref_chi0"], rows) + "\n")
    rows = []
    for L, k1, c0 in zip(OSCILLATORY_L, OSCILLATORY_K1, OSCILLATORY_CHI0):
        rep = critical_chi(OSCILLATORY.with_(L=float(L)))
        rows.append([L, rep.argmin_k, rep.chi0, rep.loss_type, k1, c0])
    sys.stdout.write(write_csv(None, ["L", "k1", "chi0", "loss_type", "ref_k1", "ref_chi0"], rows))


if __name__ == "__main__":
    main()
