"""Finite-dimensional operator algebra on dense complex matrices.

Operators are plain ``numpy.ndarray`` values of dtype complex128 in
row-major order.  Hermiticity is never assumed implicitly; routines that
need it check it explicitly.  Composite systems follow the convention
``atom (x) cavity``: the joint index is ``i_atom * fock_dim + n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvariantError, TruncationError

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_FLOOR = -1e-8
TAIL_TOL = 1e-6

# Pauli and ladder operators for a two-level system; the convention is
# sigma_p = |1><0|, sigma_m = |0><1| with |0>, |1> the basis order.
SIGMA_P = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_M = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class FockTruncation:
    """Highest retained Fock state of the cavity mode."""

    n_max: int = 15

    def __post_init__(self):
        if self.n_max < 1:
            raise InvariantError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor layout of a joint atom-cavity space (either factor may be trivial)."""

    atom_dim: int
    fock_dim: int

    @property
    def dim(self) -> int:
        return self.atom_dim * self.fock_dim


def as_operator(a) -> np.ndarray:
    """Coerce to a square, C-contiguous complex matrix."""
    m = np.ascontiguousarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise DimensionError("operator dimension must be >= 1")
    return m


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the row-major index convention (i*dim_b + k)."""
    return np.kron(as_operator(a), as_operator(b))


def annihilation(trunc: FockTruncation | int) -> np.ndarray:
    """Bosonic annihilation operator on the truncated Fock space.

    Entries a[n-1, n] = sqrt(n); the top state n_max has no outflow, which
    is the usual source of truncation error caught by `check_truncation`.
    """
    n_max = trunc.n_max if isinstance(trunc, FockTruncation) else int(trunc)
    dim = n_max + 1
    a = np.zeros((dim, dim), dtype=complex)
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def number_op(trunc: FockTruncation | int) -> np.ndarray:
    n_max = trunc.n_max if isinstance(trunc, FockTruncation) else int(trunc)
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)


def level_proj(i: int, j: int, dim: int) -> np.ndarray:
    """The transition operator |i><j| on a dim-level system."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.conj().T)


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest entrywise deviation of a from its adjoint."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return hermiticity_defect(a) <= tol * scale


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL, what: str = "operator"):
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    defect = hermiticity_defect(a)
    if defect > tol * scale:
        raise InvariantError(
            f"{what} is not Hermitian: max |A - A^dag| = {defect:.3e} "
            f"(tolerance {tol:.1e} x scale {scale:.3e})"
        )


def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    """<op> = trace(op @ rho)."""
    return complex(np.einsum("ij,ji->", op, rho))


def validate_density_matrix(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    eig_floor: float = POSITIVITY_FLOOR,
    what: str = "density matrix",
) -> None:
    """Check Hermiticity, unit trace and positivity up to numerical noise.

    Raises InvariantError on any violation; never renormalizes.
    """
    rho = as_operator(rho)
    defect = hermiticity_defect(rho)
    if defect > herm_tol:
        raise InvariantError(f"{what}: Hermiticity defect {defect:.3e} > {herm_tol:.1e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise InvariantError(f"{what}: trace {tr} deviates from 1 by more than {trace_tol:.1e}")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < eig_floor:
        raise InvariantError(f"{what}: minimum eigenvalue {w[0]:.3e} below floor {eig_floor:.1e}")


def pure_state_density(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """(1/2) * trace norm of the (Hermitian) difference."""
    d = as_operator(rho1) - as_operator(rho2)
    require_hermitian(d, tol=1e-8, what="state difference")
    w = np.linalg.eigvalsh(0.5 * (d + d.conj().T))
    return 0.5 * float(np.sum(np.abs(w)))


def partial_trace_cavity(rho: np.ndarray, space: HilbertSpace) -> np.ndarray:
    """Reduce an atom (x) cavity state to its atomic block."""
    na, nf = space.atom_dim, space.fock_dim
    if rho.shape != (na * nf, na * nf):
        raise DimensionError(f"state shape {rho.shape} does not match space {space}")
    return np.ascontiguousarray(np.einsum("injn->ij", rho.reshape(na, nf, na, nf)))


def project_atom_levels(rho: np.ndarray, space: HilbertSpace, keep: tuple[int, ...] = (0, 1)) -> np.ndarray:
    """Keep only the listed atomic levels (unnormalized block extraction)."""
    na, nf = space.atom_dim, space.fock_dim
    r4 = rho.reshape(na, nf, na, nf)
    keep = list(keep)
    block = r4[np.ix_(keep, range(nf), keep, range(nf))]
    k = len(keep)
    return np.ascontiguousarray(block.reshape(k * nf, k * nf))


def fock_populations(rho: np.ndarray, space: HilbertSpace) -> np.ndarray:
    """Diagonal populations of the cavity mode, traced over the atom."""
    na, nf = space.atom_dim, space.fock_dim
    r4 = rho.reshape(na, nf, na, nf)
    return np.real(np.einsum("inin->n", r4))


@dataclass(frozen=True)
class TailReport:
    populations: tuple[float, float]
    total: float
    tol: float
    passed: bool


def check_truncation(rho: np.ndarray, space: HilbertSpace, tol: float = TAIL_TOL) -> TailReport:
    """Population of the two highest Fock levels; passes iff below tol."""
    pops = fock_populations(rho, space)
    if len(pops) < 2:
        raise DimensionError("truncation check needs at least two Fock levels")
    p_top = (float(pops[-2]), float(pops[-1]))
    total = p_top[0] + p_top[1]
    return TailReport(populations=p_top, total=total, tol=tol, passed=total < tol)


def require_truncation_ok(rho: np.ndarray, space: HilbertSpace, tol: float = TAIL_TOL) -> TailReport:
    rep = check_truncation(rho, space, tol)
    if not rep.passed:
        raise TruncationError(
            f"tail occupation {rep.total:.3e} in the top two Fock levels exceeds {tol:.1e}; "
            "increase n_max"
        )
    return rep
