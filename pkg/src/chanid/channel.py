"""Completely positive maps: Kraus, Choi and Stinespring forms.

Choi matrices live on (output ⊗ input) with the output factor varying
slowly, matching the package-wide index convention.  Stinespring pairs
use the dilation shape V: H_out -> H_in ⊗ E, so that
T(rho) = V† (rho ⊗ 1_E) V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DensityOperator,
    hermitian_part,
    operator_norm,
    random_unitary,
    spectral_decomposition,
    tensor_product,
)

TP_FLAG_TOL = 1e-9
CHOI_HERM_TOL = 1e-10
DOMINATION_PSD_TOL = 1e-9


class NotCompletelyPositiveError(ValueError):
    """Raised when a matrix that must be a CP-map Choi matrix is not PSD."""


@dataclass(frozen=True)
class KrausChannel:
    """CP map given by an ordered list of Kraus operators A_k: H_in -> H_out.

    The map is ``sum_k A_k rho A_k†``.  ``trace_preserving`` is computed at
    construction from ``||sum_k A_k† A_k - 1||_op <= 1e-9``; CP maps that are
    not channels (e.g. dominated maps, reconstructions from noisy data)
    simply carry the flag as False.
    """

    dim_in: int
    dim_out: int
    kraus: tuple[np.ndarray, ...]
    trace_preserving: bool = field(init=False)
    tp_defect: float = field(init=False)

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise ValueError("dimensions must be positive")
        ops = tuple(np.asarray(a, dtype=complex) for a in self.kraus)
        if not ops:
            raise ValueError("at least one Kraus operator is required")
        for a in ops:
            if a.shape != (self.dim_out, self.dim_in):
                raise ValueError(
                    f"Kraus operator shape {a.shape} != ({self.dim_out}, {self.dim_in})"
                )
            if not np.all(np.isfinite(a)):
                raise ValueError("Kraus entries must be finite")
        object.__setattr__(self, "kraus", ops)
        defect = operator_norm(self.dual_apply(np.eye(self.dim_out)) - np.eye(self.dim_in))
        object.__setattr__(self, "tp_defect", defect)
        object.__setattr__(self, "trace_preserving", defect <= TP_FLAG_TOL)

    def apply_matrix(self, x: np.ndarray) -> np.ndarray:
        """sum_k A_k X A_k† for any dim_in x dim_in matrix X."""
        x = np.asarray(x)
        if x.shape != (self.dim_in, self.dim_in):
            raise ValueError(f"expected {self.dim_in}x{self.dim_in} input, got {x.shape}")
        out = np.zeros((self.dim_out, self.dim_out), dtype=complex)
        for a in self.kraus:
            out += a @ x @ a.conj().T
        return out

    def apply(self, rho: DensityOperator) -> DensityOperator:
        """Schroedinger-picture action on a state; valid when trace-preserving."""
        return DensityOperator(self.apply_matrix(rho.mat))

    def dual_apply(self, x: np.ndarray) -> np.ndarray:
        """Heisenberg-picture dual: sum_k A_k† X A_k on observables of H_out."""
        x = np.asarray(x)
        if x.shape != (self.dim_out, self.dim_out):
            raise ValueError(f"expected {self.dim_out}x{self.dim_out} input, got {x.shape}")
        out = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for a in self.kraus:
            out += a.conj().T @ x @ a
        return out


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi matrix on H_out ⊗ H_in; PSD exactly when the map is CP."""

    dim_in: int
    dim_out: int
    mat: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        n = self.dim_out * self.dim_in
        if m.shape != (n, n):
            raise ValueError(f"Choi matrix must be {n}x{n}, got {m.shape}")
        defect = operator_norm(m - m.conj().T)
        if defect > CHOI_HERM_TOL:
            raise ValueError(f"Choi matrix not Hermitian: defect {defect:.3e}")
        object.__setattr__(self, "mat", m)


@dataclass(frozen=True)
class StinespringPair:
    """Dilation (V, E) with V: H_out -> H_in ⊗ E and T(rho) = V†(rho ⊗ 1_E)V."""

    v: np.ndarray
    dim_env: int


def _kraus_vec(a: np.ndarray) -> np.ndarray:
    # row-major flatten maps A[mu, i] to index mu * dim_in + i, the
    # (output, input) composite index of the Choi space
    return np.asarray(a).reshape(-1)


def choi(t: KrausChannel, normalized: bool = False) -> ChoiMatrix:
    """Choi matrix of a CP map: (T ⊗ id)(d_in · |Omega><Omega|), optionally / d_in."""
    n = t.dim_out * t.dim_in
    c = np.zeros((n, n), dtype=complex)
    for a in t.kraus:
        v = _kraus_vec(a)
        c += np.outer(v, v.conj())
    if normalized:
        c = c / t.dim_in
    return ChoiMatrix(dim_in=t.dim_in, dim_out=t.dim_out, mat=hermitian_part(c), normalized=normalized)


def from_choi(
    c: ChoiMatrix, rank_cutoff: float = 1e-10, psd_tol: float = 1e-8
) -> KrausChannel:
    """Extract a minimal Kraus set from a PSD Choi matrix.

    Eigenpairs with eigenvalue > ``rank_cutoff`` become Kraus operators
    ``sqrt(lam) * unvec(v)``; eigenvalues below ``-psd_tol`` mean the matrix
    is not a CP-map Choi matrix and raise
    :class:`NotCompletelyPositiveError`.  Eigenvector phases are fixed so
    the result is deterministic.
    """
    mat = c.mat * c.dim_in if c.normalized else c.mat
    spec = spectral_decomposition(mat)
    if float(spec.eigenvalues[0]) < -psd_tol:
        raise NotCompletelyPositiveError(
            f"Choi matrix has eigenvalue {spec.eigenvalues[0]:.3e} < -{psd_tol:.1e}"
        )
    ops = []
    for lam, vec in zip(spec.eigenvalues, spec.eigenvectors.T):
        if lam > rank_cutoff:
            ops.append(np.sqrt(lam) * vec.reshape(c.dim_out, c.dim_in))
    if not ops:
        ops.append(np.zeros((c.dim_out, c.dim_in), dtype=complex))
    return KrausChannel(dim_in=c.dim_in, dim_out=c.dim_out, kraus=tuple(ops))


def tensor_with_identity(t: KrausChannel, d_anc: int) -> KrausChannel:
    """T ⊗ id on an ancilla of dimension d_anc (Kraus set {A_k ⊗ 1})."""
    if d_anc < 1:
        raise ValueError("ancilla dimension must be >= 1")
    eye = np.eye(d_anc)
    return KrausChannel(
        dim_in=t.dim_in * d_anc,
        dim_out=t.dim_out * d_anc,
        kraus=tuple(tensor_product(a, eye) for a in t.kraus),
    )


def tensor_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Tensor product map with Kraus set {A_i ⊗ B_j}."""
    return KrausChannel(
        dim_in=a.dim_in * b.dim_in,
        dim_out=a.dim_out * b.dim_out,
        kraus=tuple(tensor_product(x, y) for x in a.kraus for y in b.kraus),
    )


def compose(after: KrausChannel, before: KrausChannel) -> KrausChannel:
    """Composition (after ∘ before) with the product Kraus set."""
    if before.dim_out != after.dim_in:
        raise ValueError(
            f"cannot compose: inner dims {before.dim_out} vs {after.dim_in} differ"
        )
    return KrausChannel(
        dim_in=before.dim_in,
        dim_out=after.dim_out,
        kraus=tuple(a @ b for a in after.kraus for b in before.kraus),
    )


def stinespring(t: KrausChannel) -> StinespringPair:
    """Stinespring dilation V = sum_k A_k† ⊗ |e_k> from the canonical Kraus set.

    The Kraus set is first canonicalized through the Choi eigendecomposition
    so the environment dimension equals the Choi rank.
    """
    canonical = from_choi(choi(t))
    k = len(canonical.kraus)
    v = np.zeros((t.dim_in * k, t.dim_out), dtype=complex)
    for j, a in enumerate(canonical.kraus):
        e = np.zeros((k, 1))
        e[j, 0] = 1.0
        v += tensor_product(a.conj().T, e)
    return StinespringPair(v=v, dim_env=k)


def is_completely_dominated(s: KrausChannel, t: KrausChannel, lam: float) -> bool:
    """Whether lam * T - S is completely positive (Choi PSD to -1e-9)."""
    if (s.dim_in, s.dim_out) != (t.dim_in, t.dim_out):
        raise ValueError("dimension pairs must match")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    diff = lam * choi(t).mat - choi(s).mat
    return bool(np.linalg.eigvalsh(hermitian_part(diff))[0] >= -DOMINATION_PSD_TOL)


def random_channel(d1: int, d2: int, kraus_rank: int, seed: int) -> KrausChannel:
    """Random exactly-trace-preserving channel, deterministic per seed.

    Kraus operators are the environment blocks of a Haar-random isometry:
    A_j = (1 ⊗ <e_j|) W with W the first d1 columns of a Haar unitary on
    H_out ⊗ C^rank.  Requires d2 * kraus_rank >= d1 or no trace-preserving
    channel of that rank exists.
    """
    if not 1 <= kraus_rank <= d1 * d2:
        raise ValueError(f"kraus_rank must be in [1, {d1 * d2}], got {kraus_rank}")
    if d2 * kraus_rank < d1:
        raise ValueError(
            f"no isometry H_in -> H_out ⊗ E exists for d1={d1}, d2={d2}, rank={kraus_rank}"
        )
    w = random_unitary(d2 * kraus_rank, seed)[:, :d1]
    # row (mu, j) of W is the mu-th output row of A_j
    blocks = w.reshape(d2, kraus_rank, d1)
    return KrausChannel(
        dim_in=d1, dim_out=d2, kraus=tuple(blocks[:, j, :] for j in range(kraus_rank))
    )


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(dim_in=d, dim_out=d, kraus=(np.eye(d, dtype=complex),))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("unitary must be square")
    if operator_norm(u.conj().T @ u - np.eye(u.shape[0])) > 1e-10:
        raise ValueError("matrix is not unitary")
    return KrausChannel(dim_in=u.shape[0], dim_out=u.shape[0], kraus=(u,))


def depolarizing_channel(lam: float, d: int) -> KrausChannel:
    """rho -> (1 - lam) rho + lam tr(rho) 1/d."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"depolarizing parameter must be in [0, 1], got {lam}")
    ops = []
    if lam < 1.0:
        ops.append(np.sqrt(1.0 - lam) * np.eye(d, dtype=complex))
    if lam > 0.0:
        for i in range(d):
            for j in range(d):
                a = np.zeros((d, d), dtype=complex)
                a[i, j] = np.sqrt(lam / d)
                ops.append(a)
    return KrausChannel(dim_in=d, dim_out=d, kraus=tuple(ops))


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    """Qubit amplitude damping with decay probability gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping parameter must be in [0, 1], got {gamma}")
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    a1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausChannel(dim_in=2, dim_out=2, kraus=(a0, a1))


def zero_map(d1: int, d2: int) -> KrausChannel:
    return KrausChannel(dim_in=d1, dim_out=d2, kraus=(np.zeros((d2, d1), dtype=complex),))
