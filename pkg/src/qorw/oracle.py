"""Brute-force reference engine on a truncated lattice.

The joint coin (x) walker density matrix is evolved directly: a fresh coin
is prepared each step, every sub-step applies ``eps_j (x) 1`` followed by the
conditional shift ``P_+ (x) E_+ + P_- (x) E_-``, and the coin is traced out at
the end of the step. Nothing here touches the Fourier kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coin
from .config import CAPS, TOL, LatticeTooSmallError, NumericError, ResourceError
from .distribution import PositionDistribution, WalkerInit, support
from .kernel import WalkModel


@dataclass(frozen=True, eq=False)
class JointState:
    """Coin (x) walker density matrix on sites ``-N..N``, stored as ``(2, S, 2, S)``."""

    half_width: int
    tensor: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    @property
    def matrix(self) -> np.ndarray:
        d = 2 * self.size
        return self.tensor.reshape(d, d)

    def walker(self) -> np.ndarray:
        return np.einsum("aiaj->ij", self.tensor)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.walker()))

    @classmethod
    def product(cls, coin_state: np.ndarray, walker: np.ndarray, half_width: int) -> "JointState":
        size = 2 * half_width + 1
        t = np.einsum("ab,ij->aibj", coin_state, walker).reshape(2, size, 2, size)
        return cls(half_width, t)


def embed_walker(init: WalkerInit, half_width: int) -> np.ndarray:
    size = 2 * half_width + 1
    if init.max_abs_site > half_width:
        raise LatticeTooSmallError("initial state does not fit on the lattice")
    idx = init.sites + half_width
    rho = np.zeros((size, size), dtype=complex)
    rho[np.ix_(idx, idx)] = init.matrix
    return rho


def _guard_clean(walker_tensor: np.ndarray, band: int) -> bool:
    """Zero amplitude on the ``band`` outermost sites of both lattice edges."""
    if band == 0:
        return True
    edge = np.r_[0:band, walker_tensor.shape[1] - band:walker_tensor.shape[1]]
    return not (np.any(np.abs(walker_tensor[:, edge, :, :]) > 0)
                or np.any(np.abs(walker_tensor[:, :, :, edge]) > 0))


def _shift(t: np.ndarray) -> np.ndarray:
    """Conditional shift on the row and column walker indices (guard band assumed clean)."""
    out = np.empty_like(t)
    for a, sa in ((0, 1), (1, -1)):
        for b, sb in ((0, 1), (1, -1)):
            out[a, :, b, :] = np.roll(np.roll(t[a, :, b, :], sa, axis=0), sb, axis=1)
    return out


def _coin_channel(kraus, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    for k in kraus:
        out += np.einsum("ab,bicj,dc->aidj", k, t, k.conj())
    return out


def oracle_step(model: WalkModel, state: JointState, fresh_coin: np.ndarray | None = None,
                check_positivity: bool = False) -> JointState:
    """One walk step: fresh coin in, ``k`` channel + shift sub-steps, state out.

    The coin of the incoming ``state`` is traced out before the fresh coin is
    attached, so the returned state still carries the post-step coin.
    """
    fresh = model.coin_init if fresh_coin is None else coin.check_density_matrix(fresh_coin)
    if model.entry_channel is not None:
        fresh = coin.apply_channel(model.entry_channel, fresh)
    walker = state.walker()
    joint = JointState.product(fresh, walker, state.half_width).tensor
    if not _guard_clean(joint, model.k):
        raise LatticeTooSmallError("walker amplitude entered the guard band; enlarge the lattice")
    for ch in model.quantizers:
        joint = _shift(_coin_channel(ch.kraus, joint))
    out = JointState(state.half_width, joint)
    trace_err = abs(np.trace(out.matrix) - 1.0)
    if trace_err > TOL.trace:
        raise NumericError(f"oracle step lost trace ({trace_err:.3g})")
    if check_positivity:
        w = out.walker()
        lam = np.linalg.eigvalsh((w + w.conj().T) / 2)[0]
        if lam < -TOL.psd_floor:
            raise NumericError(f"oracle walker state has eigenvalue {lam:.3g}")
    return out


def oracle_run(model: WalkModel, init: WalkerInit | None = None, n: int = 1,
               half_width: int | None = None, check_positivity: bool = False) -> PositionDistribution:
    init = WalkerInit.localized(0) if init is None else init
    if half_width is None:
        half_width = model.k * n + init.max_abs_site + model.k + 1
    if half_width > CAPS.max_lattice_half_width:
        raise ResourceError(f"lattice half-width {half_width} exceeds cap {CAPS.max_lattice_half_width}")
    state = JointState.product(model.coin_init, embed_walker(init, half_width), half_width)
    for _ in range(n):
        state = oracle_step(model, state, check_positivity=check_positivity)
    sites = support(model, init, n)
    pops = state.populations()
    return PositionDistribution(n, sites, pops[sites + half_width])
