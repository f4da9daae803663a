"""Rotation-type deformation of the two-torus.

With ``u = e^{2 pi i x}``, ``v = e^{2 pi i y}``, ``w = conj(u) v`` and ``h`` the
branch of ``(2/2 pi i) log w`` in ``[-1, 1)``, the flow ``alpha_t(u) = w^t u``,
``alpha_t(v) = w^t v`` is composition with ``(x, y) -> (x + t h/2, y + t h/2)``
and ``beta(u) = u``, ``beta(v) = u^2 conj(v)`` is composition with
``(x, y) -> (x, 2x - y)``.

The grid is staggered, ``x = (k + 1/2)/n`` and ``y = j/n``: then ``2(y - x)``
is never an odd integer, so no sample sits on the branch cut of ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _wrap(z: np.ndarray) -> np.ndarray:
    # representative in [-1, 1)
    return (z + 1.0) % 2.0 - 1.0


@dataclass(frozen=True)
class TorusGrid:
    n: int

    def __post_init__(self):
        if self.n < 64 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 64, got {self.n}")

    @property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.arange(self.n)
        return np.meshgrid((k + 0.5) / self.n, k / self.n, indexing="ij")

    def h(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return _wrap(2.0 * (y - x))


def monomial(a: int, b: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``u^a v^b`` at the given points."""
    return np.exp(2j * np.pi * (a * x + b * y))


def alpha_points(grid: TorusGrid, t: float, x, y):
    hh = grid.h(x, y)
    return x + t * hh / 2, y + t * hh / 2


def beta_points(x, y):
    return x, 2 * x - y


@dataclass
class TorusReport:
    t: float
    n: int
    residuals: dict[str, float]
    zero_mode_mean: complex
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "n": self.n,
            "residuals": self.residuals,
            "zero_mode_mean": [self.zero_mode_mean.real, self.zero_mode_mean.imag],
            "passed": self.passed,
        }


def torus_deformation(grid: TorusGrid, t: float, max_power: int = 3, tol: float = 1e-12) -> TorusReport:
    """Pointwise and Fourier checks of the torus deformation at parameter ``t``.

    * ``alpha_t . beta = beta . alpha_{-t}`` on ``u^a v^b`` for ``|a|, |b| <= max_power``;
    * ``beta^2 = id`` on the same monomials;
    * ``alpha_1(u) = v`` and ``alpha_1(u^m)`` has zero discrete Fourier coefficient
      against every function of ``x`` alone;
    * ``w^t u^m`` has zero mean for ``m != 0``.

    The mean of ``w^t`` itself is ``sin(pi t)/(pi t)`` in the continuum and is
    reported, not checked.
    """
    x, y = grid.xy
    n = grid.n
    powers = range(-max_power, max_power + 1)
    res = {"commutation": 0.0, "beta_involution": 0.0}
    # alpha_t(beta(f)) = f . beta . alpha_t ;  beta(alpha_{-t}(f)) = f . alpha_{-t} . beta
    ax, ay = alpha_points(grid, t, x, y)
    lx, ly = beta_points(ax, ay)
    bx, by = beta_points(x, y)
    rx, ry = alpha_points(grid, -t, bx, by)
    bbx, bby = beta_points(bx, by)
    for a in powers:
        for b in powers:
            res["commutation"] = max(res["commutation"], float(np.abs(monomial(a, b, lx, ly) - monomial(a, b, rx, ry)).max()))
            res["beta_involution"] = max(res["beta_involution"], float(np.abs(monomial(a, b, bbx, bby) - monomial(a, b, x, y)).max()))
    ux, uy = alpha_points(grid, 1.0, x, y)
    res["alpha1_u_is_v"] = float(np.abs(monomial(1, 0, ux, uy) - monomial(0, 1, x, y)).max())
    # Fourier coefficients of alpha_1(u^m) against e^{2 pi i l x}
    fourier = 0.0
    for m in range(1, max_power + 1):
        f = monomial(m, 0, ux, uy)
        for l in range(-max_power, max_power + 1):
            fourier = max(fourier, abs(np.mean(f * monomial(-l, 0, x, y))))
    res["alpha1_orthogonal_to_x"] = float(fourier)
    wt = np.exp(1j * np.pi * t * grid.h(x, y))
    haar = 0.0
    for m in powers:
        if m != 0:
            haar = max(haar, abs(np.mean(wt * monomial(m, 0, x, y))))
    res["haar_mean"] = float(haar)
    return TorusReport(float(t), n, res, complex(np.mean(wt)), tol)
