"""Moller's scaled conjugate gradient for smooth unconstrained minimisation.

Each iteration estimates the curvature along the search direction with one
extra gradient evaluation and regulates the step through a Levenberg-Marquardt
style scale ``lambda`` instead of a line search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

FunGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


@dataclass
class ScgResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    n_iter: int
    n_success: int
    reason: str


def scaled_conjugate_gradient(fun_grad: FunGrad, x0, *, max_iter: int = 1000,
                              min_gradient: float = 1e-6, sigma: float = 1e-4,
                              lambda_init: float = 1e-6,
                              callback: Optional[Callable[[int, np.ndarray, float, float], bool]] = None
                              ) -> ScgResult:
    """Minimise ``f`` given ``fun_grad(x) -> (f(x), grad f(x))``.

    Stops after ``max_iter`` iterations, when the gradient norm drops below
    ``min_gradient`` (checked after every iteration), or when ``callback``
    returns True. ``callback(k, x, f, gnorm)`` is called after iteration
    ``k`` with the current iterate.
    """
    w = np.array(x0, dtype=float, copy=True)
    n = w.size
    f, g = fun_grad(w)
    r = -g
    p = r.copy()
    lam, lam_bar = lambda_init, 0.0
    success = True
    n_success = 0
    delta = 0.0
    reason = "max_iter"
    k = 0
    gnorm = float(np.linalg.norm(g))
    for k in range(1, max_iter + 1):
        p2 = float(p @ p)
        if p2 == 0.0:
            reason = "zero_direction"
            k -= 1
            break
        if success:
            sig = sigma / np.sqrt(p2)
            _, g_plus = fun_grad(w + sig * p)
            delta = float(p @ (g_plus - g)) / sig
        # scale the curvature estimate
        delta += (lam - lam_bar) * p2
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p2)
            delta = -delta + lam * p2
            lam = lam_bar
        mu = float(p @ r)
        alpha = mu / delta
        w_new = w + alpha * p
        f_new, g_new = fun_grad(w_new)
        big_delta = 2.0 * delta * (f - f_new) / mu ** 2 if mu != 0 else -1.0
        if big_delta >= 0 and np.isfinite(f_new):
            w, f, g = w_new, f_new, g_new
            r_new = -g
            lam_bar = 0.0
            success = True
            n_success += 1
            if n_success % n == 0:
                p = r_new
            else:
                beta = (float(r_new @ r_new) - float(r_new @ r)) / mu
                p = r_new + beta * p
                if p @ r_new <= 0:
                    p = r_new.copy()
            r = r_new
            if big_delta >= 0.75:
                lam *= 0.25
        else:
            lam_bar = lam
            success = False
        if big_delta < 0.25:
            lam += delta * (1.0 - big_delta) / p2
        gnorm = float(np.linalg.norm(g))
        if callback is not None and callback(k, w, f, gnorm):
            reason = "callback"
            break
        if gnorm < min_gradient:
            reason = "min_gradient"
            break
        if not np.isfinite(lam) or lam > 1e100:
            reason = "lambda_overflow"
            break
    return ScgResult(w, float(f), gnorm, k, n_success, reason)
