#!/usr/bin/env python3
"""Re-run the pilot measurements behind the two empirically pinned tolerances.

Two acceptance thresholds cannot be derived in closed form and were pinned
from these pilot runs before release:

* coupled_cubic direct-vs-multiscale max-abs error over t <= eps^-2 at
  eps = 0.1 with |A(0)| = |B(0)| = 0.3: measured 0.1384, pinned at 0.2.
  The leading-order reconstruction carries an un-removed eps^2 t secular
  phase, so the error saturates near the eps^-2 horizon instead of shrinking
  with eps (it is O(eps) at the eps^-1 horizon, also printed below).

* Klein-Gordon packet comparison at eps = 0.1, k = 1 (Gaussian envelope of
  10 carrier wavelengths, amplitude 0.5, order-1 reconstruction, N = 2048,
  dt = 0.02, rtol = 1e-9): relative L2 error 6.0e-4 at t = 1/eps, pinned
  at 0.05.
"""


from asymptotica import msode, mspde


def main():
    print("== coupled cubic oscillators ==")
    case = msode.catalog("coupled_cubic")
    for exponent in (1, 2):
        for eps in (0.1, 0.05):
            report = msode.compare(case, eps, exponent)
            print(
                f"eps={eps:5.3f}  horizon=eps^-{exponent}: "
                f"max_abs_error = {report.max_abs_error:.4f}"
            )
    print("pinned threshold: 0.2 at eps=0.1, horizon eps^-2\n")

    print("== Klein-Gordon wave packet ==")
    report = mspde.packet_compare(
        0.1, 1.0, amplitude=0.5, order=1, checkpoints=[1.0, 10.0, 50.0],
        dt=0.02, rtol=1e-9,
    )
    for t, err in zip(report.t, report.stats["relative_l2_per_checkpoint"]):
        print(f"t = {t:5.1f}: relative L2 error = {err:.3e}")
    print(
        f"grid N = {report.stats['grid_n']}, L = {report.stats['domain_length']:.1f}, "
        f"dt = {report.stats['dt']}, rtol = {report.stats['rtol']}"
    )
    print("pinned threshold: 0.05 at t = 1/eps")


if __name__ == "__main__":
    main()
