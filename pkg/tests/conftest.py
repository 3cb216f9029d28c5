"""Shared helpers: independent oracles and random object factories.

Oracle functions here deliberately avoid the library code paths they are
used to check (explicit index loops, eigvalsh-based singular values,
convex-hull geometry), so that each assertion compares two independent
routes to the same quantity.
"""

from __future__ import annotations

import numpy as np


def rand_complex(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def rand_density_mat(rng: np.random.Generator, d: int, min_eig: float = 0.0) -> np.ndarray:
    """Random density matrix with eigenvalues bounded below by min_eig."""
    a = rand_complex(rng, d, d)
    q, r = np.linalg.qr(a)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    p = min_eig + (1.0 - d * min_eig) * rng.dirichlet(np.ones(d))
    return (q * p) @ q.conj().T


def rand_state_vec(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rand_complex(rng, d, 1).reshape(-1)
    return v / np.linalg.norm(v)


def kron_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Four-index loop definition of the tensor product (first factor slow)."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for mu in range(ra):
        for nu in range(ca):
            for i in range(rb):
                for j in range(cb):
                    out[mu * rb + i, nu * cb + j] = a[mu, nu] * b[i, j]
    return out


def partial_trace_oracle(m: np.ndarray, d_a: int, d_b: int, which: str) -> np.ndarray:
    """Explicit index-sum partial trace."""
    if which == "first":
        out = np.zeros((d_b, d_b), dtype=complex)
        for i in range(d_b):
            for j in range(d_b):
                out[i, j] = sum(m[k * d_b + i, k * d_b + j] for k in range(d_a))
    else:
        out = np.zeros((d_a, d_a), dtype=complex)
        for i in range(d_a):
            for j in range(d_a):
                out[i, j] = sum(m[i * d_b + k, j * d_b + k] for k in range(d_b))
    return out


def singular_values_oracle(m: np.ndarray) -> np.ndarray:
    """Singular values as square roots of the eigenvalues of m† m."""
    vals = np.linalg.eigvalsh(m.conj().T @ m)
    return np.sqrt(np.clip(vals, 0.0, None))[::-1]


def choi_elementwise_oracle(t) -> np.ndarray:
    """Choi matrix entry by entry: C[(mu,i),(nu,j)] = <mu| T(|i><j|) |nu>."""
    d1, d2 = t.dim_in, t.dim_out
    c = np.zeros((d2 * d1, d2 * d1), dtype=complex)
    for i in range(d1):
        for j in range(d1):
            unit = np.zeros((d1, d1), dtype=complex)
            unit[i, j] = 1.0
            block = t.apply_matrix(unit)
            for mu in range(d2):
                for nu in range(d2):
                    c[mu * d1 + i, nu * d1 + j] = block[mu, nu]
    return c


def apply_via_choi_oracle(t, rho: np.ndarray) -> np.ndarray:
    """Evaluate T(rho) as tr_in[(1 ⊗ rho^T) C] from the elementwise Choi."""
    d1, d2 = t.dim_in, t.dim_out
    c = choi_elementwise_oracle(t)
    lifted = np.kron(np.eye(d2), rho.T)
    prod = (lifted @ c).reshape(d2, d1, d2, d1)
    return np.einsum("aibi->ab", prod)


def channel_blocks_from_w_oracle(w: np.ndarray, eigvals, eigvecs, d2: int):
    """Recover T(|phi_i><phi_j|) blocks directly from the probe output.

    Rotates the ancilla slot of w into the reference eigenbasis and divides
    out the sqrt(p_i p_j) weights; completely independent of the
    isometry-based inversion.
    """
    d1 = len(eigvals)
    rot = np.kron(np.eye(d2), eigvecs)
    w_eig = rot.conj().T @ w @ rot
    w4 = w_eig.reshape(d2, d1, d2, d1)
    blocks = {}
    for i in range(d1):
        for j in range(d1):
            blocks[(i, j)] = w4[:, i, :, j] / np.sqrt(eigvals[i] * eigvals[j])
    return blocks


def choi_from_w_oracle(w: np.ndarray, eigvals, eigvecs, d2: int) -> np.ndarray:
    """Unnormalized Choi matrix of the probed channel, via block extraction."""
    d1 = len(eigvals)
    blocks = channel_blocks_from_w_oracle(w, eigvals, eigvecs, d2)
    c = np.zeros((d2 * d1, d2 * d1), dtype=complex)
    for a in range(d1):
        for b in range(d1):
            unit = np.zeros((d1, d1), dtype=complex)
            unit[a, b] = 1.0
            out = np.zeros((d2, d2), dtype=complex)
            for i in range(d1):
                for j in range(d1):
                    # <phi_i| E_ab |phi_j> weight of the (i, j) block
                    out += (eigvecs[:, i].conj() @ unit @ eigvecs[:, j]) * blocks[(i, j)]
            c += np.kron(out, unit)
    return c


def _point_segment_distance(p: complex, q: complex) -> float:
    # distance from the origin to the segment [p, q] in the complex plane
    d = q - p
    denom = abs(d) ** 2
    if denom == 0.0:
        return abs(p)
    t = -np.real(np.conj(d) * p) / denom
    t = min(1.0, max(0.0, t))
    return abs(p + t * d)


def unitary_pair_cb_distance_oracle(u: np.ndarray, v: np.ndarray) -> float:
    """CB distance between two unitary conjugations: 2 sqrt(1 - nu^2).

    nu is the distance from the origin to the convex hull of the
    eigenvalues of U†V; the hull membership test uses the angular-gap
    criterion for points on the unit circle.
    """
    z = np.linalg.eigvals(u.conj().T @ v)
    angles = np.sort(np.angle(z))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    if len(z) > 1 and np.max(gaps) <= np.pi + 1e-12:
        nu = 0.0
    else:
        nu = min(
            _point_segment_distance(z[a], z[b])
            for a in range(len(z))
            for b in range(len(z))
        )
    return 2.0 * np.sqrt(max(0.0, 1.0 - nu**2))
