#!/usr/bin/env python3
"""Locate zeros of the entire symbol f(s) = exp(2(s^2+s/2))(s^2+s/2-1)+2.

Method: dense grid scan of |f| over a window, Newton polish from each
local minimum using the exact derivative, dedupe.  The polished zeros
are pasted into the zero-finder tests together with a rectangle that
isolates a known subset.  mpmath cross-check when available.
"""

import cmath

ALPHA = 2.0
BETA = 0.5


def f(s: complex) -> complex:
    u = s * s + BETA * s
    return cmath.exp(ALPHA * u) * (u - 1) + 2


def fprime(s: complex) -> complex:
    u = s * s + BETA * s
    du = 2 * s + BETA
    return cmath.exp(ALPHA * u) * du * (ALPHA * (u - 1) + 1)


def newton(s: complex) -> complex | None:
    for _ in range(200):
        fv = f(s)
        if abs(fv) < 1e-15:
            return s
        dv = fprime(s)
        if dv == 0:
            return None
        step = fv / dv
        if abs(step) > 1.0:
            step *= 1.0 / abs(step)
        s = s - step
    return s if abs(f(s)) < 1e-12 else None


def main() -> None:
    nx, ny = 481, 641
    x_lo, x_hi = -3.5, 2.5
    y_lo, y_hi = -4.0, 4.0
    found: list[complex] = []
    for ix in range(nx):
        x = x_lo + (x_hi - x_lo) * ix / (nx - 1)
        for iy in range(ny):
            y = y_lo + (y_hi - y_lo) * iy / (ny - 1)
            s0 = complex(x, y)
            if abs(f(s0)) > 0.8:
                continue
            root = newton(s0)
            if root is None:
                continue
            if not (x_lo - 0.2 < root.real < x_hi + 0.2):
                continue
            if not (y_lo - 0.2 < root.imag < y_hi + 0.2):
                continue
            if all(abs(root - r) > 1e-6 for r in found):
                found.append(root)

    found.sort(key=lambda z: (round(abs(z), 9), z.imag))
    print(f"# {len(found)} zeros in window [{x_lo},{x_hi}]x[{y_lo},{y_hi}]")
    for r in found:
        print(f"complex({r.real!r}, {r.imag!r})   |f| = {abs(f(r)):.2e}")

    try:
        import mpmath
    except ImportError:
        print("# mpmath unavailable, cross-check skipped")
        return
    mpmath.mp.dps = 30

    def mf(s):
        u = s * s + mpmath.mpf(BETA) * s
        return mpmath.exp(ALPHA * u) * (u - 1) + 2

    for r in found:
        ref = mpmath.findroot(mf, mpmath.mpc(r.real, r.imag))
        err = abs(complex(ref) - r)
        print(f"# cross-check {r:.6f}: |newton - mpmath| = {err:.3e}")


if __name__ == "__main__":
    main()
