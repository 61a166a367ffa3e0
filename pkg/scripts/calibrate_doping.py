"""Tune the modulation-doping density so the wafer holds 2.1e11 cm^-2 electrons.

Run once; paste the printed value into ``sqpc.core.CALIBRATED_DOPING``.
"""

from scipy.optimize import brentq

from sqpc import bands, core

TARGET_CM2 = 2.1e11


def sheet(doping):
    wafer = core.reference_wafer(doping=doping)
    return bands.self_consistent_band(wafer, mixing=1.0, tol=1e-9).sheet_density_cm2


def main():
    doping = brentq(lambda d: sheet(d) - TARGET_CM2, 4e17, 8e17, xtol=1e12, rtol=1e-8)
    print(f"CALIBRATED_DOPING = {doping:.5e}  ->  n_s = {sheet(doping):.4e} cm^-2")


if __name__ == "__main__":
    main()
