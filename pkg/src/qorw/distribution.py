"""Position statistics of a walk computed through the spectral kernel.

Conventions: a walker state ``rho_w`` with matrix elements ``<m|rho_w|m'>`` has
Fourier kernel ``rho(phi, phi') = sum rho_{m m'} exp(i m phi - i m' phi')``.
Then ``|0><0|`` maps to the constant 1 and the occupation probabilities are

    P_m^(n) = (2 pi)^-2 \\iint rho(phi, phi') A(phi, phi')^n exp(-i m (phi - phi')).

All integrands are trigonometric polynomials, so uniform grids with more
nodes than twice the degree integrate them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Mapping

import numpy as np

from . import kernel as K
from . import sampling
from .config import TOL, NumericError, ParameterError, UsageError
from .kernel import WalkModel


@dataclass(frozen=True, eq=False)
class WalkerInit:
    """Finitely supported walker state: a density matrix over ``sites``."""

    sites: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=int).ravel()
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (sites.size, sites.size) or sites.size == 0:
            raise ParameterError("walker matrix must be square over the listed sites")
        if np.unique(sites).size != sites.size:
            raise ParameterError("walker sites must be distinct")
        if abs(np.trace(rho) - 1.0) > TOL.trace or np.max(np.abs(rho - rho.conj().T)) > TOL.hermitian:
            raise ParameterError("walker state must be Hermitian with unit trace")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def localized(cls, m: int = 0) -> "WalkerInit":
        return cls(np.array([m]), np.ones((1, 1)))

    @classmethod
    def pure(cls, amplitudes: Mapping[int, complex]) -> "WalkerInit":
        sites = np.array(sorted(amplitudes))
        psi = np.array([amplitudes[m] for m in sites], dtype=complex)
        norm = np.vdot(psi, psi).real
        if abs(norm - 1.0) > TOL.trace:
            raise ParameterError(f"pure state has norm {norm}")
        return cls(sites, np.outer(psi, psi.conj()))

    @property
    def max_abs_site(self) -> int:
        return int(np.max(np.abs(self.sites)))

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    def diag_density(self, phi) -> np.ndarray:
        """``rho(phi, phi)``, a non-negative trigonometric polynomial of mean 1."""
        e = np.exp(1j * np.multiply.outer(np.asarray(phi, float), self.sites))
        return np.real(np.einsum("...i,ij,...j->...", e, self.matrix, e.conj()))

    def diag_cdf(self, x) -> np.ndarray:
        """Exact ``(1/2pi) \\int_0^x rho(phi, phi) d phi``."""
        x = np.asarray(x, dtype=float)
        delta = self.sites[:, None] - self.sites[None, :]
        safe = np.where(delta == 0, 1, delta)
        xs = x[..., None, None]
        prim = np.where(delta == 0, xs / (2 * np.pi), (np.exp(1j * safe * xs) - 1) / (2j * np.pi * safe))
        return np.real(np.sum(self.matrix * prim, axis=(-2, -1)))


def init_kernel(init: WalkerInit, m: int) -> np.ndarray:
    """``rho(phi_a, phi'_b)`` on the uniform ``m x m`` grid."""
    if m < 2 * init.max_abs_site + 2:
        raise ParameterError(f"grid size {m} too small for sites up to {init.max_abs_site}")
    e = np.exp(1j * np.multiply.outer(K.grid_angles(m), init.sites))
    return e @ init.matrix @ e.conj().T


@dataclass(frozen=True, eq=False)
class PositionDistribution:
    n: int
    sites: np.ndarray
    probs: np.ndarray

    @property
    def normalization_residual(self) -> float:
        return float(abs(self.probs.sum() - 1.0))

    def moment(self, s: int) -> float:
        return float(np.sum(self.sites.astype(float) ** s * self.probs))

    def as_dict(self) -> dict[int, float]:
        return {int(m): float(p) for m, p in zip(self.sites, self.probs)}

    def on_sites(self, sites) -> np.ndarray:
        """Probabilities on an arbitrary site list (zero off-support)."""
        lookup = self.as_dict()
        return np.array([lookup.get(int(m), 0.0) for m in sites])


def exact_grid_size(degree: int) -> int:
    """Power of two strictly above ``2 * degree + 1``."""
    m = 2 * degree + 2
    return 1 << (m - 1).bit_length()


def support(model: WalkModel, init: WalkerInit, n: int) -> np.ndarray:
    return np.arange(init.sites.min() - model.k * n, init.sites.max() + model.k * n + 1)


def probabilities(model: WalkModel, init: WalkerInit | None = None, n: int = 1,
                  grid: int | None = None, method: str = "grid") -> PositionDistribution:
    """Exact ``n``-step occupation probabilities.

    ``method="classical"`` convolves the initial populations with the
    one-dimensional step law of ``A(phi_-)``; it is only valid for models that
    pass :func:`kernel.classicality_test`.
    """
    init = WalkerInit.localized(0) if init is None else init
    if n < 0:
        raise ParameterError("n must be >= 0")
    degree = model.k * n + init.max_abs_site
    m = exact_grid_size(degree) if grid is None else grid
    if m < 2 * degree + 1:
        raise ParameterError(f"grid {m} cannot resolve degree {degree}")
    sites = support(model, init, n)
    if method == "classical":
        if not K.classicality_test(model):
            raise UsageError("classical quadrature requires a model passing the classicality test")
        probs = _classical_probs(model, init, n, sites, m)
    elif method == "grid":
        phi = K.grid_angles(m)
        b = init_kernel(init, m) * K.kernel_values(model, phi[:, None], phi[None, :]) ** n
        f = np.fft.fft2(b) / m**2
        vals = f[sites % m, (-sites) % m]
        if np.max(np.abs(vals.imag)) > TOL.normalization:
            raise NumericError("occupation probabilities have an imaginary part")
        probs = vals.real
    else:
        raise ParameterError(f"unknown method {method!r}")
    return PositionDistribution(n, sites, probs)


def _classical_probs(model, init, n, sites, m):
    minus = K.grid_angles(m)
    step = np.fft.fft(K.kernel_values(model, minus, 0.0) ** n) / m
    offsets = np.arange(-model.k * n, model.k * n + 1)
    law = step[offsets % m].real
    probs = np.zeros(sites.size)
    for site, pop in zip(init.sites, init.populations):
        probs[site + offsets - sites[0]] += pop * law
    return probs


# Taylor jets: arrays whose axis ``-1`` (scalars) or ``-3`` (matrices) holds
# the coefficients of delta^0 .. delta^order, with phi = phi_0 + delta.

def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
    for t in range(order):
        out[..., t] = np.sum(a[..., : t + 1] * b[..., t::-1], axis=-1)
    return out


def _jet_pow(a: np.ndarray, n: int) -> np.ndarray:
    result = np.zeros_like(a)
    result[..., 0] = 1.0
    base = a
    while n:
        if n & 1:
            result = _jet_mul(result, base)
        n >>= 1
        if n:
            base = _jet_mul(base, base)
    return result


def kernel_jet(model: WalkModel, phi0: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients of ``delta -> A(phi0 + delta, phi0)`` up to ``order``."""
    phi0 = np.asarray(phi0, dtype=float)
    t = np.arange(order + 1)
    sign = K._SHIFT
    # coefficient of delta^t in exp(i s delta) for each coin index
    shift_coef = (1j * sign[None, :]) ** t[:, None] / np.array([factorial(int(j)) for j in t])[:, None]
    phase = K.shift_phases(phi0, phi0)[..., None, :, :]
    jets = np.zeros(phi0.shape + (order + 1, 2, 2), dtype=complex)
    jets[..., 0, :, :] = model.entry_state
    for ch in model.quantizers:
        x = phase * K.coin.apply_kraus(ch.kraus, jets)
        new = np.zeros_like(x)
        for j in range(order + 1):
            new[..., j, :, :] = np.einsum("ua,...uab->...ab", shift_coef[: j + 1][::-1], x[..., : j + 1, :, :])
        jets = new
    return np.trace(jets, axis1=-2, axis2=-1)


def init_jet(init: WalkerInit, phi0: np.ndarray, order: int) -> np.ndarray:
    """Taylor coefficients of ``delta -> rho(phi0 + delta, phi0)``."""
    phi0 = np.asarray(phi0, dtype=float)
    sites = init.sites.astype(float)
    delta = sites[:, None] - sites[None, :]
    base = np.exp(1j * np.multiply.outer(phi0, delta)) * init.matrix
    row = base.sum(axis=-1)
    out = np.empty(phi0.shape + (order + 1,), dtype=complex)
    for t in range(order + 1):
        out[..., t] = row @ ((1j * sites) ** t) / factorial(t)
    return out


def spectral_moment(model: WalkModel, init: WalkerInit, n: int, s: int) -> float:
    """``<L^s>_n`` from the ``s``-th phi-derivative of ``rho A^n`` on the diagonal."""
    m = exact_grid_size(model.k * n + init.max_abs_site)
    phi = K.grid_angles(m)
    jet = _jet_mul(init_jet(init, phi, s), _jet_pow(kernel_jet(model, phi, s), n))
    val = factorial(s) * jet[..., s].mean() / 1j**s
    if abs(val.imag) > TOL.moment_agreement:
        raise NumericError(f"spectral moment has imaginary part {val.imag:.3g}")
    return float(val.real)


def moment(model: WalkModel, init: WalkerInit | None, n: int, s: int) -> float:
    """``<L^s>_n`` as a site sum, cross-checked against the spectral derivative form."""
    init = WalkerInit.localized(0) if init is None else init
    if s < 1 or n < 0:
        raise ParameterError("need s >= 1 and n >= 0")
    direct = probabilities(model, init, n).moment(s)
    spectral = spectral_moment(model, init, n, s)
    scale = max(1.0, abs(direct))
    if abs(direct - spectral) > TOL.moment_agreement * scale:
        raise NumericError(f"moment paths disagree: {direct} vs {spectral}")
    return direct


def _diag_nodes(model: WalkModel, init: WalkerInit, s: int) -> np.ndarray:
    # h has degree <= 2k, rho(phi, phi) degree <= 2 max|m|
    return K.grid_angles(max(64, 2 * (2 * model.k * s + 2 * init.max_abs_site) + 2))


def asymptotic_moment(model: WalkModel, init: WalkerInit | None = None, s: int = 1) -> float:
    """``lim <(L/n)^s>_n = (1/2pi) \\int rho(phi, phi) h(phi)^s d phi``."""
    init = WalkerInit.localized(0) if init is None else init
    if s < 1:
        raise ParameterError("s must be >= 1")
    phi = _diag_nodes(model, init, s)
    return float(np.mean(init.diag_density(phi) * K.acf_h(model, phi) ** s))


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    masses: np.ndarray
    count: int
    mode: str
    seed: int | None = None
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.widths

    def moment(self, s: int) -> float:
        return float(np.sum(self.centers**s * self.masses))


def asymptotic_pdf(model: WalkModel, init: WalkerInit | None = None, bins: int = 200,
                   nodes: int = 200_000, mode: str = "quadrature", seed: int | None = None,
                   workers: int = 1) -> Histogram:
    """Histogram of the limiting scaled position ``Y = h(phi)``.

    ``phi`` carries the weight ``rho(phi, phi) / 2pi``. Quadrature mode uses
    ``nodes`` midpoint angles with density weights; Monte Carlo mode draws
    ``nodes`` angles by inverse transform. Bin edges span the range of ``h``
    over the midpoint grid in both modes.
    """
    init = WalkerInit.localized(0) if init is None else init
    if bins < 1 or nodes < 10 * bins:
        raise ParameterError("need bins >= 1 and nodes >= 10 * bins")
    phi = 2.0 * np.pi * (np.arange(nodes) + 0.5) / nodes
    y = K.acf_h(model, phi)
    lo, hi = float(y.min()), float(y.max())
    if hi - lo < 1e-12:
        y0 = 0.5 * (lo + hi)
        edges = np.array([y0 - 1e-12, y0 + 1e-12])
        return Histogram(edges, np.ones(1), nodes, mode, seed, degenerate=True)
    if mode == "quadrature":
        weights = init.diag_density(phi)
    elif mode == "monte_carlo":
        if seed is None:
            raise ParameterError("monte_carlo mode requires a seed")
        grid = sampling.piecewise_linear_cdf(init.diag_cdf)
        parts = sampling.run_workers(
            seed, nodes, workers, lambda rng, c: K.acf_h(model, sampling.sample_angles(rng, c, grid)))
        y = np.clip(np.concatenate(parts), lo, hi)
        weights = np.ones_like(y)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    masses, edges = np.histogram(y, bins=bins, range=(lo, hi), weights=weights)
    masses = masses / masses.sum()
    return Histogram(edges, masses, nodes, mode, seed)
