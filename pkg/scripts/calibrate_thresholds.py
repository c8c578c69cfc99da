"""Direct evaluations behind the frozen superoscillation thresholds.

Prints the window error of the N=20, alpha=sqrt2 construction against
exp(i sqrt2 x) and the shift-superposition error for several coefficient
counts and Gaussian widths. The tests freeze:

    * window |x| <= 1, bound 0.05 (observed about 0.025)
    * Gaussian width 8, window target +- 4 widths, 14 coefficients, bound 0.1
"""
import math

import numpy as np

from twostate.superosc import SuperoscSpec, build_superoscillation, evaluate, gaussian, shift_demo_spec, shift_superposition


def window_errors() -> None:
    f = build_superoscillation(SuperoscSpec(math.sqrt(2), 20))
    for half in (0.5, 1.0, 1.5, 2.0, 3.0):
        xs = np.linspace(-half, half, 401)
        err = np.max(np.abs(evaluate(f, xs) - np.exp(1j * math.sqrt(2) * xs)))
        print(f"|x| <= {half:<4} max error {err:.4f}")


def shift_errors(target: float = 10.0) -> None:
    for width in (1.0, 2.0, 4.0, 8.0, 12.0):
        window = (target - 4 * width, target + 4 * width)
        errs = [shift_superposition(gaussian(width), shift_demo_spec(target, n), window=window, n_points=321) for n in (8, 14, 20)]
        print(f"width {width:>4}: " + "  ".join(f"N={n}: {e:.4g}" for n, e in zip((8, 14, 20), errs)))


if __name__ == "__main__":
    window_errors()
    shift_errors()
