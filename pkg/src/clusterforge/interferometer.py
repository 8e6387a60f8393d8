"""Device matrices: generator parameterisation, sampling, validation, dilation.

Unitary-mode parameters (length N**2) hold the diagonal of a Hermitian
generator H followed by (Re, Im) of each upper-triangular entry in
row-major order; the device is ``exp(iH)``. Contraction-mode parameters
(length 2*N**2) hold Re then Im of an arbitrary complex matrix, row-major.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np
import scipy.linalg

from .fock import DimensionError

UNITARY_TOL = 1e-10


class NotAContractionError(ValueError):
    pass


class UndefinedRatioError(ValueError):
    pass


def param_length(n: int, mode: str = "unitary") -> int:
    if mode == "unitary":
        return n * n
    if mode == "contraction":
        return 2 * n * n
    raise ValueError(f"unknown parameterization mode {mode!r}")


def hermitian_from_params(p, n: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (n * n,):
        raise DimensionError(f"expected {n * n} generator parameters, got {p.shape}")
    h = np.zeros((n, n), dtype=np.complex128)
    h[np.diag_indices(n)] = p[:n]
    iu = np.triu_indices(n, 1)
    off = p[n:].reshape(-1, 2)
    h[iu] = off[:, 0] + 1j * off[:, 1]
    h[(iu[1], iu[0])] = off[:, 0] - 1j * off[:, 1]
    return h


def params_from_hermitian(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    iu = np.triu_indices(n, 1)
    off = np.stack([h[iu].real, h[iu].imag], axis=1).ravel()
    return np.concatenate([np.diag(h).real, off])


def exp_map(p, n: int) -> np.ndarray:
    """U = exp(iH(p)), computed from the eigendecomposition of H."""
    h = hermitian_from_params(p, n)
    lam, q = np.linalg.eigh(h)
    return (q * np.exp(1j * lam)) @ q.conj().T


def log_map(u: np.ndarray) -> np.ndarray:
    """Parameters of a generator with exp_map(log_map(u)) == u.

    Eigenphases are taken in (-pi, pi].
    """
    u = np.asarray(u, dtype=np.complex128)
    t, z = scipy.linalg.schur(u, output="complex")
    theta = np.angle(np.diag(t))
    h = (z * theta) @ z.conj().T
    return params_from_hermitian(0.5 * (h + h.conj().T))


def random_haar(n: int, seed) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_contraction(n: int, seed) -> np.ndarray:
    """Complex Gaussian matrix rescaled so its largest singular value is at most 1."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
    smax = np.linalg.norm(z, 2)
    return z / max(1.0, smax)


def contraction_from_params(p, n: int) -> tuple[np.ndarray, float]:
    """Matrix for contraction-mode parameters and the clamp scale applied.

    If the raw matrix has largest singular value above one it is divided by
    that value; the returned scale is the divisor (1.0 when no clamp).
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (2 * n * n,):
        raise DimensionError(f"expected {2 * n * n} contraction parameters, got {p.shape}")
    m = (p[: n * n] + 1j * p[n * n :]).reshape(n, n)
    smax = float(np.linalg.norm(m, 2))
    scale = max(1.0, smax)
    return m / scale, scale


def params_from_matrix(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def matrix_from_params(p, n: int, mode: str = "unitary") -> np.ndarray:
    if mode == "unitary":
        return exp_map(p, n)
    if mode == "contraction":
        return contraction_from_params(p, n)[0]
    raise ValueError(f"unknown parameterization mode {mode!r}")


def unitarity_defect(u: np.ndarray) -> float:
    """max |(U^dagger U - I)_ij|."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_defect(u) <= tol


def is_contraction(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return float(np.linalg.norm(np.asarray(m), 2)) <= 1 + tol


def singular_value_ratio(m: np.ndarray) -> float:
    """sigma_min / sigma_max."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"square matrix required, got shape {m.shape}")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[0] == 0.0:
        raise UndefinedRatioError("singular value ratio undefined for the zero matrix")
    return float(sv[-1] / sv[0])


def dilate(m: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Unitary 2N x 2N matrix with ``m`` as its top-left block.

    Uses the defect operators sqrt(I - m m^dagger) and sqrt(I - m^dagger m):

        W = [[m,                    sqrt(I - m m^dagger)],
             [sqrt(I - m^dagger m), -m^dagger          ]]
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"square matrix required, got shape {m.shape}")
    u, sv, vh = np.linalg.svd(m)
    if sv[0] > 1 + tol:
        raise NotAContractionError(f"largest singular value {sv[0]:.6g} exceeds 1")
    defect = np.sqrt(np.clip(1.0 - sv**2, 0.0, None))
    left = (u * defect) @ u.conj().T
    right = (vh.conj().T * defect) @ vh
    return np.block([[m, left], [right, -m.conj().T]])


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {"n": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(data: Mapping) -> np.ndarray:
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise DimensionError("matrix re/im blocks must be 2-D and equally shaped")
    if re.shape[0] != re.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {re.shape}")
    if "n" in data and int(data["n"]) != re.shape[0]:
        raise DimensionError(f"declared n={data['n']} but blocks are {re.shape}")
    return re + 1j * im


def exp_map_pullback(p, n: int, g: np.ndarray) -> np.ndarray:
    """Gradient in generator parameters given G with dL = 2 Re sum_ij G_ij dU_ij.

    Uses the Daleckii-Krein form of the exponential's derivative in the
    eigenbasis of H, with divided differences written as a sinc so nearly
    equal eigenvalues stay well conditioned.
    """
    h = hermitian_from_params(p, n)
    lam, q = np.linalg.eigh(h)
    diff = lam[:, None] - lam[None, :]
    phi = np.exp(0.5j * (lam[:, None] + lam[None, :])) * np.sinc(diff / (2 * np.pi))
    b = q.conj().T @ g.T @ q
    k = q.conj() @ (b.T * phi) @ q.T
    # dL = 2 Re(i sum_ab K_ab dH_ab)
    iu = np.triu_indices(n, 1)
    kt = k.T
    dx = -2 * (k[iu] + kt[iu]).imag
    dy = -2 * (k[iu] - kt[iu]).real
    return np.concatenate([-2 * np.diag(k).imag, np.stack([dx, dy], axis=1).ravel()])


def contraction_pullback(p, n: int, g: np.ndarray) -> np.ndarray:
    """Gradient in contraction parameters, including the clamp M / sigma_max."""
    p = np.asarray(p, dtype=float)
    m = (p[: n * n] + 1j * p[n * n :]).reshape(n, n)
    u, sv, vh = np.linalg.svd(m)
    smax = sv[0]
    if smax > 1.0:
        load = np.sum(g * m).real
        g = g / smax - (load / smax**2) * np.outer(u[:, 0].conj(), vh[0].conj())
    return np.concatenate([2 * g.real.ravel(), -2 * g.imag.ravel()])
