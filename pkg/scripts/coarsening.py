"""Spike count over time for the strong cross-chemotaxis parameter set."""

import argparse

from kscompete.acceptance import coarsening_run, spike_history


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=10.0)
    ap.add_argument("--t-end", type=float, default=300.0)
    args = ap.parse_args()
    t, counts, spans = spike_history(coarsening_run(args.L, args.t_end))
    print("t,spikes,u_span")
    for a, b, c in zip(t, counts, spans):
        print(f"{a:.10g},{b},{c:.10g}")


if __name__ == "__main__":
    main()
