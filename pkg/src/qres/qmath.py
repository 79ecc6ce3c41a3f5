"""Dense complex-matrix helpers: Pauli operators, clock/shift operators,
named qubit states, random states and measurements, validators.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; pure
states are 1-d arrays. Every comparison takes an explicit tolerance.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError, InvalidDimensionError, InvalidInputError

__all__ = [
    "pauli",
    "generalized_pauli_x",
    "generalized_pauli_z",
    "qrac_state",
    "spectral_decomposition",
    "fix_phase",
    "ket",
    "proj",
    "named_state",
    "allclose",
    "is_hermitian",
    "check_pure_state",
    "check_density_matrix",
    "check_effect",
    "check_instrument",
    "independent_projector_basis",
    "random_pure_state",
    "random_density_matrix",
    "random_povm",
    "random_unitary",
]

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(which: str) -> np.ndarray:
    try:
        return _PAULI[which.lower()].copy()
    except (KeyError, AttributeError):
        raise InvalidInputError(f"unknown Pauli matrix {which!r}, expected one of x, y, z") from None


def _check_dim(d) -> int:
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def generalized_pauli_z(d: int) -> np.ndarray:
    """Clock operator ``sum_i w^i |i><i|`` with ``w = exp(2 pi i / d)``."""
    d = _check_dim(d)
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def generalized_pauli_x(d: int) -> np.ndarray:
    """Shift operator ``sum_i |i><i+1 mod d|``."""
    d = _check_dim(d)
    out = np.zeros((d, d), dtype=complex)
    out[np.arange(d), (np.arange(d) + 1) % d] = 1.0
    return out


def qrac_state(d: int, y0: int, y1: int) -> np.ndarray:
    """Encoding state ``X^y0 Z^y1 |psi_00>`` of the d-level random access code.

    ``|psi_00>`` is ``(sqrt(d)+1)|0> + sum_{i>0} |i>``, normalized.
    """
    d = _check_dim(d)
    for name, val in (("y0", y0), ("y1", y1)):
        if int(val) != val or not 0 <= val < d:
            raise InvalidInputError(f"{name}={val!r} out of range 0..{d - 1}")
    sd = np.sqrt(d)
    psi = np.ones(d, dtype=complex)
    psi[0] = sd + 1
    psi /= np.sqrt(2 * sd * (1 + sd))
    op = np.linalg.matrix_power(generalized_pauli_x(d), int(y0)) @ np.linalg.matrix_power(
        generalized_pauli_z(d), int(y1)
    )
    return op @ psi


def fix_phase(vec: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Multiply by a global phase so the first non-negligible entry is real positive."""
    vec = np.asarray(vec, dtype=complex)
    idx = np.flatnonzero(np.abs(vec) > atol)
    if idx.size == 0:
        return vec
    first = vec[idx[0]]
    return vec * (abs(first) / first)


def is_hermitian(m, atol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.all(np.abs(m - m.conj().T) <= atol))


def allclose(a, b, atol: float = 1e-12) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= atol))


def spectral_decomposition(m, atol: float = 1e-10) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of a Hermitian matrix, eigenvalues descending.

    Eigenvectors follow the phase convention of :func:`fix_phase`.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, atol):
        raise ContractViolationError("spectral_decomposition requires a Hermitian matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    return [(float(w[k]), fix_phase(v[:, k])) for k in order]


def ket(index: int, d: int = 2) -> np.ndarray:
    d = _check_dim(d)
    if not 0 <= index < d:
        raise InvalidInputError(f"basis index {index} out of range for d={d}")
    out = np.zeros(d, dtype=complex)
    out[index] = 1.0
    return out


def proj(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def _eigvec(m: np.ndarray, sign: int) -> np.ndarray:
    pairs = spectral_decomposition(m)
    return pairs[0][1] if sign > 0 else pairs[-1][1]


def _named_qubit_states() -> dict[str, np.ndarray]:
    s2 = np.sqrt(2)
    sx, sz = _PAULI["x"], _PAULI["z"]
    diag_obs = (sx + sz) / s2
    anti_obs = (sx - sz) / s2
    return {
        "0": ket(0),
        "1": ket(1),
        "plus": np.array([1, 1], dtype=complex) / s2,
        "minus": np.array([1, -1], dtype=complex) / s2,
        "plus_y": np.array([1, 1j], dtype=complex) / s2,
        "minus_y": np.array([1, -1j], dtype=complex) / s2,
        "bar0": _eigvec(diag_obs, +1),
        "bar1": _eigvec(diag_obs, -1),
        # |+bar> is the -1 eigenvector of (sx - sz)/sqrt2; only this labeling gives W_C = 3 + sqrt2
        "barplus": _eigvec(anti_obs, -1),
        "barminus": _eigvec(anti_obs, +1),
    }


_NAMED = _named_qubit_states()
_ALIASES = {"+": "plus", "-": "minus", "+y": "plus_y", "-y": "minus_y", "ket0": "0", "ket1": "1"}


def named_state(name: str) -> np.ndarray:
    """Qubit kets used by the reference realizations.

    ``bar0``/``bar1`` are the +1/-1 eigenvectors of (sx+sz)/sqrt2 and
    ``barplus``/``barminus`` the -1/+1 eigenvectors of (sx-sz)/sqrt2.
    """
    key = _ALIASES.get(name, name)
    if key not in _NAMED:
        raise InvalidInputError(f"unknown named state {name!r}; known: {sorted(_NAMED)}")
    return _NAMED[key].copy()


def check_pure_state(vec, atol: float = 1e-12) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    if vec.ndim != 1:
        raise ContractViolationError("pure state must be a 1-d amplitude vector")
    if abs(np.linalg.norm(vec) - 1) > atol:
        raise ContractViolationError(f"pure state norm {np.linalg.norm(vec):.3g} != 1")
    return vec


def check_density_matrix(rho, atol: float = 1e-12, eig_tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ContractViolationError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, atol):
        raise ContractViolationError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise ContractViolationError(f"density matrix trace {tr:.6g} != 1")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < -eig_tol:
        raise ContractViolationError(f"density matrix has negative eigenvalue {lo:.3g}")
    return rho


def check_effect(e, atol: float = 1e-12, eig_tol: float = 1e-10) -> np.ndarray:
    e = np.asarray(e, dtype=complex)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise ContractViolationError(f"effect must be square, got shape {e.shape}")
    if not is_hermitian(e, atol):
        raise ContractViolationError("effect is not Hermitian")
    w = np.linalg.eigvalsh(e)
    if w.min() < -eig_tol or w.max() > 1 + eig_tol:
        raise ContractViolationError(f"effect eigenvalues [{w.min():.3g}, {w.max():.3g}] leave [0, 1]")
    return e


def check_instrument(effects, atol: float = 1e-10) -> list[np.ndarray]:
    effects = [check_effect(e) for e in effects]
    d = effects[0].shape[0]
    total = sum(effects)
    if np.abs(total - np.eye(d)).max() > atol:
        raise ContractViolationError("instrument effects do not sum to the identity")
    return effects


def independent_projector_basis(d: int) -> list[np.ndarray]:
    """d**2 linearly independent rank-one projectors spanning all d x d operators.

    Order: ``|i>`` for each i, then ``(|i>+|k>)/sqrt2`` and ``(|i>+i|k>)/sqrt2``
    for each pair i < k. For d = 2 this is {|0>, |1>, |+>, |+y>}.
    """
    d = _check_dim(d)
    vecs = [ket(i, d) for i in range(d)]
    for i in range(d):
        for k in range(i + 1, d):
            vecs.append((ket(i, d) + ket(k, d)) / np.sqrt(2))
            vecs.append((ket(i, d) + 1j * ket(k, d)) / np.sqrt(2))
    return [proj(v) for v in vecs]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(d: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    v = rng.standard_normal(d)
    if not real:
        v = v + 1j * rng.standard_normal(d)
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None, real: bool = False) -> np.ndarray:
    rank = d if rank is None else rank
    a = rng.standard_normal((d, rank))
    if not real:
        a = a + 1j * rng.standard_normal((d, rank))
    rho = a @ a.conj().T
    return np.asarray(rho / np.trace(rho).real, dtype=complex)


def random_povm(d: int, n_outcomes: int, rng: np.random.Generator, real: bool = False) -> list[np.ndarray]:
    """Random POVM from normalized Wishart-like positive operators."""
    ops = []
    for _ in range(n_outcomes):
        a = rng.standard_normal((d, d))
        if not real:
            a = a + 1j * rng.standard_normal((d, d))
        ops.append(a @ a.conj().T)
    s = sum(ops)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    out = [s_inv_half @ o @ s_inv_half for o in ops]
    return [np.asarray((o + o.conj().T) / 2, dtype=complex) for o in out]
