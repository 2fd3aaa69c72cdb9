"""Analytic test waveforms, callable on arrays of times (ps)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcx

from .envelope import GaussianPulseSpec


@dataclass(frozen=True)
class SuperGaussian:
    """``exp(-0.5 (|t - t0| / width)^(2 order))``; order 1 is a Gaussian."""

    width: float
    order: int = 3
    t0: float = 0.0
    amplitude: float = 1.0

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.t0) / self.width
        return self.amplitude * np.exp(-0.5 * np.abs(x) ** (2 * self.order)) + 0j


@dataclass(frozen=True)
class SmoothedExponential:
    """One-sided decaying exponential ``exp(-t / 2 tau)`` for ``t > t0`` convolved
    with a Gaussian onset ``exp(-t^2 / 2 rise^2)``.

    The Gaussian convolution keeps the spectrum band-limited, so the shape can be
    represented on a finite grid while staying strongly asymmetric.
    """

    tau: float
    rise: float
    t0: float = 0.0
    amplitude: float = 1.0

    def __call__(self, t):
        s = np.asarray(t, dtype=float) - self.t0
        w, tau = self.rise, self.tau
        x = (w / (2.0 * tau) - s / w) / math.sqrt(2.0)
        out = np.empty_like(s)
        pos = x >= 0
        out[pos] = erfcx(x[pos]) * np.exp(-s[pos] ** 2 / (2.0 * w**2))
        neg = ~pos
        out[neg] = erfc(x[neg]) * np.exp(w**2 / (8.0 * tau**2) - s[neg] / (2.0 * tau))
        return self.amplitude * w * math.sqrt(math.pi / 2.0) * out + 0j


@dataclass(frozen=True)
class DoublePulse:
    """Two transform-limited Gaussians; unequal amplitudes make it skewed."""

    sigma_t: float
    separation: float
    ratio: float = 1.0
    t0: float = 0.0

    def __call__(self, t):
        first = GaussianPulseSpec(self.sigma_t, self.t0 - self.separation / 2.0)
        second = GaussianPulseSpec(self.sigma_t, self.t0 + self.separation / 2.0, amplitude=self.ratio)
        return first(t) + second(t)


def parse_pulse(text: str):
    """Parse ``kind:key=value,...`` into a pulse callable.

    Kinds: ``gauss`` (sigma_t, t0, amplitude, c2), ``sgauss`` (width, order, t0),
    ``exp`` (tau, rise, t0), ``double`` (sigma_t, separation, ratio, t0).
    """
    kind, _, rest = text.partition(":")
    params: dict[str, float] = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed pulse parameter {item!r}")
        params[key.strip()] = float(value)
    kind = kind.strip().lower()
    if kind == "gauss":
        if "c2" in params:
            params["chirp_c2"] = params.pop("c2")
        return GaussianPulseSpec(**params)
    if kind == "sgauss":
        if "order" in params:
            params["order"] = int(params["order"])
        return SuperGaussian(**params)
    if kind == "exp":
        return SmoothedExponential(**params)
    if kind == "double":
        return DoublePulse(**params)
    raise ValueError(f"unknown pulse kind {kind!r}")
