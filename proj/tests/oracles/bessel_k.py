"""Reference values of log K_nu(z) for complex z, computed with mpmath at 40 digits.

Writes tests/data/bessel_k_mpmath.txt: one line per point with
nu, Re z, Im z, Re log K, Im log K (principal branch).
"""
import cmath
import math
import pathlib

import mpmath as mp

mp.mp.dps = 40

NUS = [0.0, 0.5, 1.0, 2.5, 3.0, 7.3, 20.0, 55.5]
RADII = [1e-3, 0.05, 0.5, 2.0, 10.0, 80.0, 600.0]
ANGLES = [-math.pi / 4, 0.0, 1.2, -1.45]


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "bessel_k_mpmath.txt"
    lines = []
    for nu in NUS:
        for r in RADII:
            for psi in ANGLES:
                z = r * cmath.exp(1j * psi)
                lk = mp.log(mp.besselk(nu, mp.mpc(z.real, z.imag)))
                lines.append("%.17g %.17g %.17g %.17g %.17g" % (nu, z.real, z.imag, float(mp.re(lk)), float(mp.im(lk))))
    out.write_text("\n".join(lines) + "\n")
    print(f"{len(lines)} points -> {out}")


if __name__ == "__main__":
    main()
