"""Coin-side simulation of the walker's asymptotic statistics.

For a ``U``-quantized ``V^k`` model with ``V(phi) = V_cl(phi) U`` the limiting
moments of ``L / (k n)`` are expectation values of ``sigma^{(x) s}``
(``sigma = U^dagger sigma_3 U``) in the averaged coin state

    eps_bar^s = E_phi[ eps_phi(rho_c)^{(x) s} ],
    eps_phi(rho) = (1/k) sum_{j<k} V(phi)^j rho V(phi)^{dagger j},

with ``phi`` distributed as ``rho(phi, phi) / 2pi``. For ``k = 2`` the map
``eps_phi`` is dilated by a two-qubit unitary ``W(phi) = exp H(phi)``; the
average can also be estimated stochastically by random similarity
transformations ``V(phi)^nu``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import coin, sampling
from . import kernel as K
from .config import CAPS, ParameterError, ResourceError, UsageError
from .distribution import WalkerInit
from .kernel import WalkModel

ANCILLA_STATE = coin.PROJ_PLUS


@dataclass(frozen=True, eq=False)
class SimulatorSpec:
    model: WalkModel
    s: int = 1
    init: WalkerInit = field(default_factory=WalkerInit.localized)

    def __post_init__(self):
        K.common_unitary(self.model)
        if self.s < 1:
            raise ParameterError("moment order s must be >= 1")
        if 4**self.s > CAPS.max_tensor_dim:
            raise ResourceError(f"4**{self.s} exceeds the tensor cap {CAPS.max_tensor_dim}")

    @property
    def k(self) -> int:
        return self.model.k

    @property
    def unitary(self) -> np.ndarray:
        return K.common_unitary(self.model)

    @property
    def sigma(self) -> np.ndarray:
        u = self.unitary
        return coin.dagger(u) @ coin.SIGMA_3 @ u

    @property
    def coin_state(self) -> np.ndarray:
        return self.model.entry_state


def v_matrix(spec: SimulatorSpec, phi) -> np.ndarray:
    """``V(phi) = V_cl(phi) U`` (broadcast over ``phi``)."""
    phi = np.asarray(phi, dtype=float)
    return np.exp(1j * K._SHIFT * phi[..., None])[..., :, None] * spec.unitary


def _v_powers(spec: SimulatorSpec, phi) -> np.ndarray:
    """``V(phi)^j`` for ``j = 0..k-1``, shape ``(..., k, 2, 2)``."""
    v = v_matrix(spec, phi)
    powers = [np.broadcast_to(np.eye(2, dtype=complex), v.shape)]
    for _ in range(spec.k - 1):
        powers.append(v @ powers[-1])
    return np.stack(powers, axis=-3)


def eps_phi(spec: SimulatorSpec, rho: np.ndarray, phi) -> np.ndarray:
    vp = _v_powers(spec, phi)
    return np.mean(vp @ np.asarray(rho, dtype=complex) @ coin.dagger(vp), axis=-3)


def acf_via_sim(spec: SimulatorSpec, phi):
    """``h(phi) = k Tr[eps_phi(rho_c) sigma]``."""
    val = spec.k * np.real(np.trace(eps_phi(spec, spec.coin_state, phi) @ spec.sigma, axis1=-2, axis2=-1))
    return float(val) if np.ndim(val) == 0 else val


def _batched_tensor_power(m: np.ndarray, s: int) -> np.ndarray:
    out = m
    for _ in range(s - 1):
        d = out.shape[-1] * m.shape[-1]
        out = np.einsum("...ij,...kl->...ikjl", out, m).reshape(m.shape[:-2] + (d, d))
    return out


def average_nodes(spec: SimulatorSpec) -> np.ndarray:
    # entries of eps_phi^{(x)s} have degree <= 2s(k-1); the weight adds 2 max|m|
    degree = 2 * spec.s * (spec.k - 1) + 2 * spec.init.max_abs_site
    return K.grid_angles(max(32, 2 * degree + 2))


def eps_bar_s(spec: SimulatorSpec) -> np.ndarray:
    """Exact phi-average of ``eps_phi(rho_c)^{(x) s}`` by uniform-grid quadrature."""
    phi = average_nodes(spec)
    w = spec.init.diag_density(phi) / phi.size
    t = _batched_tensor_power(eps_phi(spec, spec.coin_state, phi), spec.s)
    avg = np.tensordot(w, t, axes=1)
    return 0.5 * (avg + avg.conj().T)


def simulated_moment(spec: SimulatorSpec) -> float:
    """``Tr[sigma^{(x) s} eps_bar^s]``, the limit of ``<(L / k n)^s>_n``."""
    sig = coin.tensor_power(spec.sigma, spec.s)
    return float(np.real(np.trace(sig @ eps_bar_s(spec))))


def _require_k2(spec: SimulatorSpec) -> None:
    if spec.k != 2:
        raise UsageError("the W(phi) dilation is defined for k = 2 only")


def build_W(spec: SimulatorSpec, phi: float) -> np.ndarray:
    """Ancilla (x) coin unitary ``(1/sqrt2) [[1, V^dagger], [-V, 1]]``."""
    _require_k2(spec)
    v = v_matrix(spec, phi)
    eye = np.eye(2)
    return np.block([[eye, coin.dagger(v)], [-v, eye]]) / np.sqrt(2)


def build_H(spec: SimulatorSpec, phi: float) -> np.ndarray:
    _require_k2(spec)
    v = v_matrix(spec, phi)
    return np.pi / 4 * (np.kron(coin.SIGMA_PLUS, coin.dagger(v)) - np.kron(coin.SIGMA_MINUS, v))


def build_Delta_H(spec: SimulatorSpec, phi: float, s: int | None = None) -> np.ndarray:
    """Sum of ``H(phi)`` acting on each of ``s`` ancilla+coin pairs."""
    s = spec.s if s is None else s
    if 4**s > CAPS.max_tensor_dim:
        raise ResourceError(f"4**{s} exceeds the tensor cap {CAPS.max_tensor_dim}")
    h = build_H(spec, phi)
    eye = np.eye(4, dtype=complex)
    total = np.zeros((4**s, 4**s), dtype=complex)
    for j in range(s):
        total += coin.kron_all([h if i == j else eye for i in range(s)])
    return total


def dilated_eps_phi(spec: SimulatorSpec, rho: np.ndarray, phi: float) -> np.ndarray:
    """``Tr_a W (|+><+| (x) rho) W^dagger``."""
    w = build_W(spec, phi)
    return coin.partial_trace_first(w @ np.kron(ANCILLA_STATE, rho) @ w.conj().T, 2)


def eps_bar_s_dilated(spec: SimulatorSpec) -> np.ndarray:
    """``eps_bar^s`` produced by evolving ``s`` ancilla+coin pairs with ``exp(Delta H)``
    and tracing every ancilla."""
    _require_k2(spec)
    phi = average_nodes(spec)
    w = spec.init.diag_density(phi) / phi.size
    pair = np.kron(ANCILLA_STATE, spec.coin_state)
    start = coin.tensor_power(pair, spec.s)
    keep = [2 * i + 1 for i in range(spec.s)]
    total = np.zeros((2**spec.s,) * 2, dtype=complex)
    for weight, angle in zip(w, phi):
        u = coin.matrix_exponential(build_Delta_H(spec, angle))
        total += weight * coin.partial_trace(u @ start @ u.conj().T, [2] * (2 * spec.s), keep)
    return total


def exhaustive_nu_average(spec: SimulatorSpec, phi: float) -> np.ndarray:
    """Average of ``(x)_i V^{nu_i} rho_c V^{dagger nu_i}`` over all ``nu`` in ``{0..k-1}^s``."""
    vp = _v_powers(spec, phi)
    rotated = vp @ spec.coin_state @ coin.dagger(vp)
    combos = itertools.product(range(spec.k), repeat=spec.s)
    return np.mean([coin.kron_all([rotated[j] for j in c]) for c in combos], axis=0)


@dataclass(frozen=True, eq=False)
class StochasticEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int
    workers: int


_BATCH = 16384


def _stochastic_block(spec: SimulatorSpec, grid, rng: np.random.Generator, count: int):
    dim = 2**spec.s
    total = np.zeros((dim, dim), dtype=complex)
    sq_re = np.zeros((dim, dim))
    sq_im = np.zeros((dim, dim))
    done = 0
    while done < count:
        b = min(_BATCH, count - done)
        phi = sampling.sample_angles(rng, b, grid)
        nu = rng.integers(0, spec.k, size=(b, spec.s))
        vp = _v_powers(spec, phi)
        rotated = vp @ spec.coin_state @ coin.dagger(vp)
        rows = np.arange(b)
        x = rotated[rows, nu[:, 0]]
        for i in range(1, spec.s):
            y = rotated[rows, nu[:, i]]
            d = x.shape[-1] * 2
            x = np.einsum("nij,nkl->nikjl", x, y).reshape(b, d, d)
        # each sample is a density matrix; drop rounding-level anti-Hermitian parts
        x = 0.5 * (x + coin.dagger(x))
        total += x.sum(axis=0)
        sq_re += (x.real**2).sum(axis=0)
        sq_im += (x.imag**2).sum(axis=0)
        done += b
    return total, sq_re, sq_im


def stochastic_estimate(spec: SimulatorSpec, samples: int, seed: int, workers: int = 1) -> StochasticEstimate:
    """Monte Carlo estimate of ``eps_bar^s`` with per-entry standard errors.

    Each sample draws ``phi`` from the walker's diagonal density and ``s``
    independent exponents ``nu_i`` uniform on ``{0..k-1}``. ``stderr`` holds
    the real-part error in its real component and the imaginary-part error in
    its imaginary component.
    """
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    grid = sampling.piecewise_linear_cdf(spec.init.diag_cdf)
    parts = sampling.run_workers(seed, samples, workers,
                                 lambda rng, c: _stochastic_block(spec, grid, rng, c))
    total = sum(p[0] for p in parts)
    sq_re = sum(p[1] for p in parts)
    sq_im = sum(p[2] for p in parts)
    mean = total / samples
    if samples > 1:
        var_re = np.maximum(sq_re / samples - mean.real**2, 0.0) * samples / (samples - 1)
        var_im = np.maximum(sq_im / samples - mean.imag**2, 0.0) * samples / (samples - 1)
        stderr = np.sqrt(var_re / samples) + 1j * np.sqrt(var_im / samples)
    else:
        stderr = np.full(mean.shape, np.inf + 1j * np.inf)
    return StochasticEstimate(mean, stderr, samples, seed, workers)


def estimator_convergence(spec: SimulatorSpec, sizes=(1000, 10_000, 100_000), seed: int = 0,
                          replicates: int = 16, workers: int = 1) -> list[tuple[int, float, float]]:
    """Rows ``(N, max_entry_error, predicted_sigma)`` averaged over independent replicates.

    Replicate ``r`` at size index ``i`` uses seed ``seed + 1000 * i + r``.
    """
    reference = eps_bar_s(spec)
    rows = []
    for i, n in enumerate(sizes):
        errs, sig = [], []
        for r in range(replicates):
            est = stochastic_estimate(spec, n, seed + 1000 * i + r, workers)
            errs.append(np.max(np.abs(est.mean - reference)))
            sig.append(np.max(np.abs(est.stderr)))
        rows.append((int(n), float(np.mean(errs)), float(np.mean(sig))))
    return rows


def loglog_slope(rows) -> float:
    n = np.log([r[0] for r in rows])
    e = np.log([r[1] for r in rows])
    return float(np.polyfit(n, e, 1)[0])
