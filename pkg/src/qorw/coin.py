"""Two-level coin algebra: Pauli matrices, density matrices and Kraus channels.

Matrices are plain complex ``numpy`` arrays. Channels are immutable
:class:`KrausChannel` records holding a tuple of Kraus matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .config import CAPS, TOL, NumericError, ParameterError, ResourceError, StructuralError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_+ = |+><-|, sigma_- = |-><+| with |+> the first basis vector
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
PROJ_PLUS = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_MINUS = np.array([[0, 0], [0, 1]], dtype=complex)


def as_matrix(m: Any) -> np.ndarray:
    """Coerce ``m`` to a finite, square complex matrix."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise StructuralError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_unitary(u: np.ndarray, tol: float = TOL.unitary) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u @ dagger(u) - np.eye(u.shape[0]))) <= tol)


def coin_state(q: float) -> np.ndarray:
    """Diagonal coin state ``diag(q, 1 - q)``; ``q = 1`` is ``|+><+|``."""
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"coin population q={q} outside [0, 1]")
    return np.diag([q, 1.0 - q]).astype(complex)


def density_residuals(rho: np.ndarray) -> dict[str, float]:
    """Hermiticity, trace and positivity residuals of a candidate density matrix.

    The smallest eigenvalue is computed exactly for ``dim <= 16``; above that a
    shifted Cholesky probe only reports whether it exceeds ``-psd_floor``.
    """
    rho = as_matrix(rho)
    dim = rho.shape[0]
    herm = float(np.max(np.abs(rho - dagger(rho))))
    trace = float(abs(np.trace(rho) - 1.0))
    if dim <= 16:
        min_eig = float(np.linalg.eigvalsh((rho + dagger(rho)) / 2)[0])
    else:
        try:
            np.linalg.cholesky((rho + dagger(rho)) / 2 + TOL.psd_floor * np.eye(dim))
            min_eig = 0.0
        except np.linalg.LinAlgError:
            min_eig = -np.inf
    return {"hermitian": herm, "trace": trace, "min_eig": min_eig}


def is_density_matrix(rho: np.ndarray, tol=TOL) -> bool:
    r = density_residuals(rho)
    return r["hermitian"] <= tol.hermitian and r["trace"] <= tol.trace and r["min_eig"] >= -tol.psd_floor


def check_density_matrix(rho: Any, tol=TOL) -> np.ndarray:
    rho = as_matrix(rho)
    r = density_residuals(rho)
    if r["hermitian"] > tol.hermitian or r["trace"] > tol.trace or r["min_eig"] < -tol.psd_floor:
        raise ParameterError(f"not a density matrix: {r}")
    return rho


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map ``rho -> sum_i K_i rho K_i^dagger``.

    ``spec`` is an optional constructor record (``{"type": ..., params}``)
    used when the channel is serialized.
    """

    kraus: tuple[np.ndarray, ...]
    label: str = "kraus"
    spec: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus)
        if not ops:
            raise StructuralError("a channel needs at least one Kraus matrix")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise StructuralError("Kraus matrices have mismatched dimensions")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def is_unitary(self) -> bool:
        return len(self.kraus) == 1 and is_unitary(self.kraus[0])

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    deviation: float
    label: str = ""


def make_channel(kraus: Iterable[Any], label: str = "kraus", spec: dict | None = None) -> KrausChannel:
    return KrausChannel(tuple(kraus), label=label, spec=spec)


def validate_cptp(channel: KrausChannel, tol: float = TOL.completeness) -> ValidationReport:
    """Check the completeness relation ``sum_i K_i^dagger K_i = 1``."""
    total = sum(dagger(k) @ k for k in channel.kraus)
    dev = float(np.max(np.abs(total - np.eye(channel.dim))))
    return ValidationReport(dev <= tol, dev, channel.label)


def apply_kraus(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """Apply Kraus matrices to ``rho``; ``rho`` may carry leading batch axes."""
    out = np.zeros(np.shape(rho), dtype=complex)
    for k in kraus:
        out = out + k @ rho @ dagger(k)
    return out


def apply_channel(channel: KrausChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (channel.dim, channel.dim):
        raise StructuralError(f"channel of dim {channel.dim} applied to matrix of shape {rho.shape}")
    return apply_kraus(channel.kraus, rho)


def compose_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """The channel ``a o b`` (``b`` acts first), Kraus set ``{A_i B_j}``."""
    if a.dim != b.dim:
        raise StructuralError(f"cannot compose channels of dims {a.dim} and {b.dim}")
    return KrausChannel(
        tuple(ka @ kb for ka in a.kraus for kb in b.kraus),
        label=f"{a.label}*{b.label}",
    )


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),), label="identity", spec={"type": "identity"})


def unitary_channel(u: Any, label: str = "unitary") -> KrausChannel:
    u = as_matrix(u)
    if not is_unitary(u):
        raise ParameterError("matrix is not unitary")
    return KrausChannel((u,), label=label, spec={"type": "unitary", "matrix": matrix_to_dict(u)})


def amplitude_damping(decay: float, survival: float | None = None) -> KrausChannel:
    """Spontaneous decay of the upper level ``|+>`` with probability ``decay``.

    ``decay`` plays the role of ``sin^2(lambda t)``: ``S_0 = diag(sqrt(1-decay), 1)``
    and ``S_1 = sqrt(decay) |-><+|``. ``survival`` optionally supplies
    ``sqrt(1-decay)`` directly, which keeps full precision when ``decay`` is near 1.
    """
    if not 0.0 <= decay <= 1.0:
        raise ParameterError(f"decay={decay} outside [0, 1]")
    survival = np.sqrt(1.0 - decay) if survival is None else survival
    s0 = np.array([[survival, 0], [0, 1]], dtype=complex)
    s1 = np.array([[0, 0], [np.sqrt(decay), 0]], dtype=complex)
    return KrausChannel((s0, s1), label=f"amplitude_damping({decay:g})",
                        spec={"type": "amplitude_damping", "decay": float(decay)})


def decay_from_time(rate: float, t: float) -> float:
    """Decay probability ``1 - exp(-2 rate t)``, so survival multiplies over time."""
    if rate < 0 or t < 0:
        raise ParameterError("rate and time must be non-negative")
    return float(-np.expm1(-2.0 * rate * t))


def amplitude_damping_from_time(rate: float, t: float) -> KrausChannel:
    return amplitude_damping(decay_from_time(rate, t), survival=float(np.exp(-rate * t)))


def rotation_unitary(theta: float) -> np.ndarray:
    """``exp(i theta sigma_2) = [[cos, sin], [-sin, cos]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def mixing_channel(u: Any, p: float) -> KrausChannel:
    """Apply ``u`` with probability ``p``, else do nothing."""
    u = as_matrix(u)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p={p} outside [0, 1]")
    if not is_unitary(u):
        raise ParameterError("mixing_channel needs a unitary")
    kraus = (np.sqrt(1.0 - p) * np.eye(u.shape[0], dtype=complex), np.sqrt(p) * u)
    return KrausChannel(kraus, label=f"mixing({p:g})",
                        spec={"type": "mixing", "p": float(p), "matrix": matrix_to_dict(u)})


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def tensor_power(m: Any, s: int, max_dim: int = CAPS.max_tensor_dim) -> np.ndarray:
    m = as_matrix(m)
    if s < 1:
        raise ParameterError("tensor power needs s >= 1")
    if m.shape[0] ** s > max_dim:
        raise ResourceError(f"dimension {m.shape[0]}**{s} exceeds cap {max_dim}")
    return kron_all([m] * s)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    m = np.asarray(m)
    dims = list(dims)
    n = len(dims)
    if int(np.prod(dims)) != m.shape[-1]:
        raise StructuralError(f"dims {dims} do not factor matrix of size {m.shape[-1]}")
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace from the highest index down so remaining axis positions stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        cur = n - count
        t = np.trace(t, axis1=i, axis2=i + cur)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(kd, kd)


def partial_trace_first(m: Any, first_dim: int) -> np.ndarray:
    m = as_matrix(m)
    if first_dim < 1 or m.shape[0] % first_dim:
        raise StructuralError(f"dim {m.shape[0]} not divisible by {first_dim}")
    rest = m.shape[0] // first_dim
    return np.einsum("aiaj->ij", m.reshape(first_dim, rest, first_dim, rest))


def matrix_exponential(m: Any, max_terms: int = CAPS.expm_max_terms) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential for small dense matrices."""
    m = as_matrix(m)
    if m.shape[0] > CAPS.max_tensor_dim:
        raise ResourceError(f"dimension {m.shape[0]} exceeds cap {CAPS.max_tensor_dim}")
    norm = np.linalg.norm(m, 1)
    squarings = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    a = m / 2.0**squarings
    result = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for j in range(1, max_terms + 1):
        term = term @ a / j
        result = result + term
        if np.linalg.norm(term, 1) <= np.finfo(float).eps * np.linalg.norm(result, 1):
            break
    else:
        raise NumericError(f"Taylor series did not converge in {max_terms} terms")
    for _ in range(squarings):
        result = result @ result
    if not np.all(np.isfinite(result)):
        raise NumericError("matrix exponential overflowed")
    return result


def matrix_to_dict(m: Any) -> dict:
    m = as_matrix(m)
    return {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_dict(d: dict) -> np.ndarray:
    try:
        re = np.array(d["re"], dtype=float)
        im = np.array(d.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"bad matrix record: {exc}") from exc
    m = as_matrix(re + 1j * im)
    if "dim" in d and int(d["dim"]) != m.shape[0]:
        raise StructuralError(f"declared dim {d['dim']} != actual {m.shape[0]}")
    return m
