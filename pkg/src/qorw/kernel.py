"""Walk models and the scalar Fourier kernel ``A(phi, phi')``.

In the walker's Fourier basis the conditional shift is ``V_cl(phi) =
diag(e^{i phi}, e^{-i phi})``. One walk step multiplies the walker kernel
``rho(phi, phi')`` by

    A(phi, phi') = Tr[ ... V_cl(phi) eps_1(M_0) V_cl(phi')^dagger ... ],

where ``M_0`` is the (entry-channel processed) coin state and each sub-step
applies its quantizing channel followed by the conditional shift. The
``U``-rule is the special case of single-unitary Kraus channels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import coin
from .coin import KrausChannel
from .config import TOL, NumericError, ParameterError, StructuralError, UsageError

# coin-index signs of the conditional shift: |+> moves right, |-> moves left
_SHIFT = np.array([1.0, -1.0])


@dataclass(frozen=True, eq=False)
class WalkModel:
    """A ``V^k`` walk: ``k`` sub-steps, each a quantizing channel then a shift."""

    quantizers: tuple[KrausChannel, ...]
    coin_init: np.ndarray
    entry_channel: KrausChannel | None = None
    label: str = "custom"

    def __post_init__(self):
        qs = tuple(self.quantizers)
        if not qs:
            raise ParameterError("a walk model needs k >= 1 sub-steps")
        for ch in qs + ((self.entry_channel,) if self.entry_channel is not None else ()):
            if ch.dim != 2:
                raise StructuralError(f"channel {ch.label} acts on dim {ch.dim}, coin is 2-level")
            report = coin.validate_cptp(ch)
            if not report.passed:
                raise ParameterError(f"channel {ch.label} is not trace preserving ({report.deviation:.3g})")
        rho = coin.check_density_matrix(self.coin_init)
        if rho.shape != (2, 2):
            raise StructuralError("coin state must be 2x2")
        rho.setflags(write=False)
        object.__setattr__(self, "quantizers", qs)
        object.__setattr__(self, "coin_init", rho)

    @property
    def k(self) -> int:
        return len(self.quantizers)

    @property
    def entry_state(self) -> np.ndarray:
        """Coin state at the start of each step (entry channel applied)."""
        if self.entry_channel is None:
            return self.coin_init
        return coin.apply_channel(self.entry_channel, self.coin_init)

    @property
    def is_u_quantized(self) -> bool:
        return all(ch.is_unitary for ch in self.quantizers)


def shift_phases(phi, phi_prime) -> np.ndarray:
    """Entrywise factors of ``X -> V_cl(phi) X V_cl(phi')^dagger``, shape ``(..., 2, 2)``."""
    phi = np.asarray(phi, dtype=float)[..., None, None]
    phi_prime = np.asarray(phi_prime, dtype=float)[..., None, None]
    return np.exp(1j * (_SHIFT[:, None] * phi - _SHIFT[None, :] * phi_prime))


def v_cl(phi: float) -> np.ndarray:
    return np.diag(np.exp(1j * _SHIFT * phi))


def _chain(model: WalkModel, phi, phi_prime, derivative: bool):
    phi, phi_prime = np.broadcast_arrays(np.asarray(phi, float), np.asarray(phi_prime, float))
    phase = shift_phases(phi, phi_prime)
    m = np.broadcast_to(model.entry_state, phi.shape + (2, 2)).astype(complex)
    d = np.zeros_like(m) if derivative else None
    sign = _SHIFT[:, None]
    for ch in model.quantizers:
        m = phase * coin.apply_kraus(ch.kraus, m)
        if derivative:
            # d/dphi V_cl(phi) = i sigma_3 V_cl(phi)
            d = 1j * sign * m + phase * coin.apply_kraus(ch.kraus, d)
    a = np.trace(m, axis1=-2, axis2=-1)
    da = np.trace(d, axis1=-2, axis2=-1) if derivative else None
    return a, da


def kernel_values(model: WalkModel, phi, phi_prime) -> np.ndarray:
    """Vectorized ``A(phi, phi')`` over broadcast angle arrays."""
    return _chain(model, phi, phi_prime, derivative=False)[0]


def kernel_at(model: WalkModel, phi: float, phi_prime: float) -> complex:
    return complex(kernel_values(model, phi, phi_prime))


def kernel_derivative(model: WalkModel, phi, phi_prime) -> np.ndarray:
    """Exact ``d A / d phi`` at ``(phi, phi')`` by forward-mode propagation."""
    return _chain(model, phi, phi_prime, derivative=True)[1]


def grid_angles(m: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(m) / m


@dataclass(frozen=True, eq=False)
class KernelSample:
    grid_size: int
    values: np.ndarray
    diag_derivative: np.ndarray

    @property
    def angles(self) -> np.ndarray:
        return grid_angles(self.grid_size)


def kernel_grid(model: WalkModel, m: int) -> KernelSample:
    if m < 2 * model.k + 1:
        raise ParameterError(f"grid size {m} < 2k+1 = {2 * model.k + 1}")
    phi = grid_angles(m)
    values = kernel_values(model, phi[:, None], phi[None, :])
    deriv = kernel_derivative(model, phi, phi)
    return KernelSample(m, values, deriv)


def acf_h(model: WalkModel, phi):
    """Asymptotic characteristic function ``h(phi) = -i dA/dphi`` on the diagonal."""
    val = -1j * kernel_derivative(model, phi, phi)
    resid = float(np.max(np.abs(np.imag(val)), initial=0.0))
    if resid > TOL.acf_imag:
        raise NumericError(f"acf has imaginary residue {resid:.3g}")
    real = np.real(val)
    return float(real) if np.ndim(real) == 0 else real


def common_unitary(model: WalkModel) -> np.ndarray:
    """The shared reshuffling unitary of a ``U``-quantized model."""
    if not model.is_u_quantized:
        raise UsageError(f"model {model.label!r} is not U-quantized")
    u = model.quantizers[0].kraus[0]
    for ch in model.quantizers[1:]:
        if np.max(np.abs(ch.kraus[0] - u)) > TOL.unitary:
            raise UsageError(f"model {model.label!r} uses different unitaries per sub-step")
    return u


def acf_h_unitary(model: WalkModel, phi):
    """``h(phi) = Tr[(sum_j V^{dagger j} sigma V^j) rho_c]`` with ``sigma = U^dagger sigma_3 U``."""
    u = common_unitary(model)
    sigma = coin.dagger(u) @ coin.SIGMA_3 @ u
    phi_arr = np.asarray(phi, dtype=float)
    v = np.exp(1j * _SHIFT * phi_arr[..., None])[..., :, None] * u
    term = np.broadcast_to(sigma, phi_arr.shape + (2, 2))
    total = np.zeros(phi_arr.shape + (2, 2), dtype=complex)
    for _ in range(model.k):
        total = total + term
        term = coin.dagger(v) @ term @ v
    h = np.real(np.trace(total @ model.entry_state, axis1=-2, axis2=-1))
    return float(h) if h.ndim == 0 else h


@dataclass(frozen=True)
class ClassicalityResult:
    classical: bool
    variation: float

    def __bool__(self):
        return self.classical


def classicality_test(model: WalkModel, m: int | None = None, tol: float = 1e-10) -> ClassicalityResult:
    """Does ``A`` depend on ``phi_- = phi - phi'`` only?

    ``A`` is a trigonometric polynomial of degree ``<= k`` in ``phi_+`` and in
    ``phi_-``. The variation is the largest peak-to-peak spread (real or
    imaginary part) over ``phi_+`` at fixed ``phi_-``.
    """
    m = 4 * model.k + 2 if m is None else m
    if m < 4 * model.k + 2:
        raise ParameterError(f"grid size {m} < 4k+2")
    plus = grid_angles(m)[:, None]
    minus = grid_angles(m)[None, :]
    a = kernel_values(model, (plus + minus) / 2, (plus - minus) / 2)
    spread = np.maximum(np.ptp(a.real, axis=0), np.ptp(a.imag, axis=0))
    variation = float(spread.max())
    return ClassicalityResult(variation <= tol, variation)


# built-in models

def u_model(k: int, u: Any, coin_init: Any, label: str = "u_rule") -> WalkModel:
    ch = coin.unitary_channel(u)
    return WalkModel((ch,) * k, np.asarray(coin_init, dtype=complex), label=label)


def example_i(q: float = 0.5) -> WalkModel:
    """Single shift, no reshuffle: the classical walk with bias ``q``."""
    return u_model(1, coin.IDENTITY, coin.coin_state(q), label="example_i")


def example_ii() -> WalkModel:
    return u_model(2, coin.rotation_unitary(np.pi / 4), coin.PROJ_PLUS, label="example_ii")


def example_iii(g_t: float = 0.3, g_tau: float = 0.5, q: float = 0.7) -> WalkModel:
    """Atom decaying before entering (``g_t``) and between the two shifts (``g_tau``)."""
    return WalkModel(
        (coin.identity_channel(), coin.amplitude_damping(g_tau)),
        coin.coin_state(q),
        entry_channel=coin.amplitude_damping(g_t),
        label="example_iii",
    )


def example_iv(q: float = 0.0) -> WalkModel:
    mix = coin.mixing_channel(coin.rotation_unitary(np.pi / 4), 0.5)
    return WalkModel((mix, mix), coin.coin_state(q), label="example_iv")


def example_v3() -> WalkModel:
    """The ``V^3`` model with the pi/4 rotation and an excited coin."""
    return u_model(3, coin.rotation_unitary(np.pi / 4), coin.PROJ_PLUS, label="example_v3")


def u_rule(k: int = 2, theta: float = np.pi / 4, q: float = 1.0) -> WalkModel:
    if k < 1:
        raise ParameterError("k must be >= 1")
    return u_model(k, coin.rotation_unitary(theta), coin.coin_state(q), label=f"u_rule_k{k}")


BUILTINS = {
    "example_i": example_i,
    "example_ii": example_ii,
    "example_iii": example_iii,
    "example_iv": example_iv,
    "example_v3": example_v3,
    "u_rule": u_rule,
}


def builtin(name: str, **params) -> WalkModel:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ParameterError(f"unknown built-in model {name!r}; choose from {sorted(BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name}: {exc}") from exc


# serialization

def channel_to_dict(ch: KrausChannel) -> dict:
    if ch.spec is not None:
        return dict(ch.spec)
    return {"type": "kraus_list", "kraus": [coin.matrix_to_dict(k) for k in ch.kraus]}


def channel_from_dict(d: dict) -> KrausChannel:
    kind = d.get("type")
    if kind == "identity":
        return coin.identity_channel()
    if kind == "unitary":
        u = coin.rotation_unitary(d["theta"]) if "theta" in d else coin.matrix_from_dict(d["matrix"])
        return coin.unitary_channel(u)
    if kind == "amplitude_damping":
        if "decay" in d:
            return coin.amplitude_damping(float(d["decay"]))
        return coin.amplitude_damping_from_time(float(d["rate"]), float(d["t"]))
    if kind == "mixing":
        u = coin.rotation_unitary(d["theta"]) if "theta" in d else coin.matrix_from_dict(d["matrix"])
        return coin.mixing_channel(u, float(d["p"]))
    if kind == "kraus_list":
        return coin.make_channel([coin.matrix_from_dict(m) for m in d["kraus"]],
                                 label=d.get("label", "kraus_list"))
    raise StructuralError(f"unknown channel type {kind!r}")


def model_to_dict(model: WalkModel) -> dict:
    out = {
        "label": model.label,
        "k": model.k,
        "coin_init": coin.matrix_to_dict(model.coin_init),
        "quantizers": [channel_to_dict(ch) for ch in model.quantizers],
    }
    if model.entry_channel is not None:
        out["entry_channel"] = channel_to_dict(model.entry_channel)
    return out


def model_from_dict(d: dict) -> WalkModel:
    try:
        quantizers = tuple(channel_from_dict(q) for q in d["quantizers"])
        rho = d["coin_init"]
        rho = coin.coin_state(float(rho["q"])) if "q" in rho else coin.matrix_from_dict(rho)
        entry = channel_from_dict(d["entry_channel"]) if d.get("entry_channel") else None
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed model document: {exc!r}") from exc
    if "k" in d and int(d["k"]) != len(quantizers):
        raise StructuralError(f"k={d['k']} but {len(quantizers)} quantizers given")
    return WalkModel(quantizers, rho, entry_channel=entry, label=d.get("label", "custom"))


def load_model(path: str | Path) -> WalkModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def dump_model(model: WalkModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def builtin_models() -> Sequence[WalkModel]:
    """One default-parameter instance of every named example."""
    return [example_i(), example_ii(), example_iii(), example_iv(), example_v3()]
