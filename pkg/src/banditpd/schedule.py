"""Step-size, dual, and exploration schedules.

All five sequences share one template::

    alpha(t) = r^2 / (20 p^2 F1^2 (t+1)^a)
    beta(t)  = 2 / t^b
    gamma(t) = 1 / t^(1-b)
    xi(t)    = 1 / (t+1)^c
    delta(t) = r / (t+1)^c

where ``(a, b, c)`` are the step, dual and exploration exponents. The three
variants differ only in how those exponents are chosen and validated:

* ``theorem1``: free ``g1, g2, g3`` with ``a=g1, b=g2, c=g3``.
* ``corollary1``: one knob ``g``; ``a = g + 3/4, b = g, c = 1/4``.
* ``corollary2``: one knob ``g``; ``a = 1, b = g, c = (1 - g) / 3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VARIANTS = ("theorem1", "corollary1", "corollary2")


def _pow(base, exp):
    if isinstance(base, (int, float)):
        return math.pow(base, exp)
    return np.asarray(base, dtype=float) ** exp


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterSchedule:
    variant: str
    step_exp: float
    dual_exp: float
    explore_exp: float
    r: float
    p: int
    F1: float
    g: float | None = None

    # Accessors return floats for scalar t and arrays for array t.

    def alpha(self, t):
        return self.r ** 2 / (20.0 * self.p ** 2 * self.F1 ** 2 * _pow(t + 1.0, self.step_exp))

    def beta(self, t):
        return 2.0 / _pow(t, self.dual_exp)

    def gamma(self, t):
        return 1.0 / _pow(t, 1.0 - self.dual_exp)

    def xi(self, t):
        return 1.0 / _pow(t + 1.0, self.explore_exp)

    def delta(self, t):
        return self.r / _pow(t + 1.0, self.explore_exp)

    def table(self, ts) -> list[dict]:
        return [
            {"t": int(t), "alpha": float(self.alpha(t)), "beta": float(self.beta(t)),
             "gamma": float(self.gamma(t)), "xi": float(self.xi(t)), "delta": float(self.delta(t))}
            for t in ts
        ]

    def check_monotone(self, horizon: int) -> None:
        ts = np.arange(1, horizon + 1)
        for name in ("alpha", "beta", "gamma", "xi", "delta"):
            seq = getattr(self, name)(ts)
            if np.any(seq <= 0.0) or np.any(np.diff(seq) > 0.0):
                raise ScheduleError(f"{name}(t) is not positive and non-increasing on [1, {horizon}]")
        xi = self.xi(ts)
        if np.any(xi >= 1.0):
            raise ScheduleError("xi(t) must lie in (0, 1)")
        if np.any(self.delta(ts) > self.r * xi * (1 + 1e-15)):
            raise ScheduleError("delta(t) must not exceed r * xi(t)")


def _open(name: str, value: float, lo: float, hi: float) -> None:
    if not lo < value < hi:
        raise ScheduleError(f"{name}={value} outside the open interval ({lo:g}, {hi:g})")


def make_schedule(variant: str, *, r: float, p: int, F1: float, g: float | None = None,
                  g1: float | None = None, g2: float | None = None, g3: float | None = None,
                  horizon: int | None = None) -> ParameterSchedule:
    """Build and validate a schedule.

    ``theorem1`` takes ``g1, g2, g3``; the corollary variants take ``g``.
    When ``horizon`` is given, monotonicity is checked over ``[1, horizon]``.
    """
    if r <= 0 or p < 1 or F1 <= 0:
        raise ScheduleError("need r > 0, p >= 1 and F1 > 0")
    if variant == "theorem1":
        if None in (g1, g2, g3):
            raise ScheduleError("theorem1 needs g1, g2 and g3")
        _open("g1", g1, 0.0, 1.0)
        _open("g2", g2, 0.0, g1 / 4.0)
        _open("g3", g3, g2, (g1 - 2.0 * g2) / 2.0)
        sched = ParameterSchedule(variant, g1, g2, g3, r, p, F1)
    elif variant in ("corollary1", "corollary2"):
        if g is None:
            raise ScheduleError(f"{variant} needs g")
        _open("g", g, 0.0, 0.25)
        if variant == "corollary1":
            sched = ParameterSchedule(variant, g + 0.75, g, 0.25, r, p, F1, g)
        else:
            sched = ParameterSchedule(variant, 1.0, g, (1.0 - g) / 3.0, r, p, F1, g)
    else:
        raise ScheduleError(f"unknown schedule variant {variant!r}; expected one of {VARIANTS}")
    if horizon is not None:
        sched.check_monotone(horizon)
    return sched
