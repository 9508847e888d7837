"""Admissible initial histories.

A history is a bounded continuous nonnegative function on (-inf, 0] with
strictly positive value at 0 in every component.  It is represented by a
finite segment on [-horizon, 0] (constant, base plus sinusoid, or a
sampled grid with cubic interpolation) extended constantly to the left by
its value at -horizon.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError


class HistoryFunction:
    """Eventually-constant continuous history on (-inf, 0]."""

    def __init__(self, kind, n, horizon, params):
        self.kind = kind
        self.n = n
        self.horizon = float(horizon)
        self.params = params
        self._validate()

    # -- constructors ---------------------------------------------------

    @staticmethod
    def constant(value, horizon=1.0):
        c = np.atleast_1d(np.asarray(value, dtype=float)).copy()
        c.setflags(write=False)
        return HistoryFunction("constant", c.size, horizon, {"value": c})

    @staticmethod
    def oscillatory(base, amplitude, frequency, horizon=10.0):
        """base + amplitude * sin(frequency * theta), frozen left of -horizon."""
        b = np.atleast_1d(np.asarray(base, dtype=float)).copy()
        a = np.atleast_1d(np.asarray(amplitude, dtype=float)).copy()
        w = np.atleast_1d(np.asarray(frequency, dtype=float)).copy()
        if not (a.shape == b.shape == w.shape):
            raise InvalidParameterError(
                "history", "base, amplitude and frequency must have equal length"
            )
        for arr in (b, a, w):
            arr.setflags(write=False)
        return HistoryFunction(
            "oscillatory", b.size, horizon, {"base": b, "amplitude": a, "frequency": w}
        )

    @staticmethod
    def sampled(times, values):
        """Cubic interpolation through samples on a grid of times in [-T, 0]."""
        from scipy.interpolate import CubicSpline

        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InvalidParameterError("history.times", "need at least two sample times")
        if not (np.diff(t) > 0).all():
            raise InvalidParameterError("history.times", "must be strictly increasing")
        if abs(t[-1]) > 1e-12:
            raise InvalidParameterError("history.times", "last sample time must be 0")
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != t.size:
            raise InvalidParameterError(
                "history.values", f"expected {t.size} rows, got {v.shape[0]}"
            )
        spline = CubicSpline(t, v, axis=0)
        return HistoryFunction(
            "sampled", v.shape[1], -t[0], {"times": t, "values": v, "spline": spline}
        )

    # -- validation -----------------------------------------------------

    def _validate(self):
        if not (self.horizon > 0):
            raise InvalidParameterError("history.horizon", "must be positive")
        x0 = self.value_at_zero()
        if not (x0 > 0).all():
            raise InvalidParameterError(
                "history", "value at time 0 must be strictly positive in every component"
            )
        if self.kind == "constant":
            return
        if self.kind == "oscillatory":
            low = self.params["base"] - np.abs(self.params["amplitude"])
            if (low < 0).any():
                raise InvalidParameterError(
                    "history", "base - |amplitude| must be nonnegative"
                )
            return
        probe = np.linspace(-self.horizon, 0.0, 4097)
        if self.eval(probe).min() < 0.0:
            raise InvalidParameterError("history", "sampled history dips below zero")

    # -- evaluation -----------------------------------------------------

    def value_at_zero(self):
        return self.eval(np.array([0.0]))[0]

    @property
    def constant_value(self):
        """The constant vector when the history is constant, else None."""
        if self.kind == "constant":
            return self.params["value"]
        return None

    def eval(self, thetas):
        """Vectorized evaluation; returns shape (len(thetas), n)."""
        th = np.atleast_1d(np.asarray(thetas, dtype=float))
        th = np.maximum(th, -self.horizon)  # constant extension to -inf
        if self.kind == "constant":
            return np.broadcast_to(self.params["value"], (th.size, self.n)).copy()
        if self.kind == "oscillatory":
            p = self.params
            return p["base"] + p["amplitude"] * np.sin(p["frequency"] * th[:, None])
        return self.params["spline"](th)

    def eval_component(self, j, thetas):
        th = np.atleast_1d(np.asarray(thetas, dtype=float))
        th = np.maximum(th, -self.horizon)
        if self.kind == "constant":
            return np.full(th.size, self.params["value"][j])
        if self.kind == "oscillatory":
            p = self.params
            return p["base"][j] + p["amplitude"][j] * np.sin(p["frequency"][j] * th)
        return self.params["spline"](th)[:, j]
