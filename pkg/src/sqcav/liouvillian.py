"""Generators of open-system dynamics.

A `Liouvillian` is a Hermitian (static) Hamiltonian, optional Hamiltonian
terms carrying pure phase factors exp(i w t) + h.c., and a list of
generalized dissipator channels.  Each channel holds a complex weight w,
a pair of operators (A, B) and a phase frequency w_ch, and contributes

    w * exp(i * w_ch * t) * (2 A rho B - B A rho - rho B A)

to d(rho)/dt.  This one form covers ordinary Lindblad damping (B = A^dag,
w real), the anomalous squeezing terms (A = B, completion vanishing when
A^2 = 0), and projector dephasing.  Channels whose weights or operators
are complex must appear in adjoint-conjugate pairs for the generator to
preserve Hermiticity; every builder in `sqcav.models` guarantees this.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, InvariantError
from .operators import HERMITICITY_TOL, HilbertSpace, as_operator, require_hermitian

_SPARSE_PRUNE_TOL = 0.0  # structural zeros only; never drop finite entries


@dataclass(frozen=True)
class DissipatorChannel:
    """One generalized damping channel: w * e^{i w_ch t} (2 A rho B - BA rho - rho BA)."""

    weight: complex
    left: np.ndarray
    right: np.ndarray
    phase_freq: float = 0.0

    def __post_init__(self):
        left = as_operator(self.left)
        right = as_operator(self.right)
        if left.shape != right.shape:
            raise DimensionError(
                f"channel operators disagree in shape: {left.shape} vs {right.shape}"
            )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "weight", complex(self.weight))
        object.__setattr__(self, "phase_freq", float(self.phase_freq))

    @property
    def dim(self) -> int:
        return self.left.shape[0]


@dataclass(frozen=True)
class Liouvillian:
    """Generator d(rho)/dt = -i[H, rho] + phased Hamiltonian terms + channels."""

    hamiltonian: np.ndarray
    channels: tuple[DissipatorChannel, ...] = ()
    ham_phases: tuple[tuple[np.ndarray, float], ...] = ()
    space: HilbertSpace | None = None

    def __post_init__(self):
        h = as_operator(self.hamiltonian)
        require_hermitian(h, tol=HERMITICITY_TOL, what="static Hamiltonian")
        object.__setattr__(self, "hamiltonian", h)
        chans = tuple(self.channels)
        for ch in chans:
            if ch.dim != h.shape[0]:
                raise DimensionError(
                    f"channel dim {ch.dim} does not match Hamiltonian dim {h.shape[0]}"
                )
        object.__setattr__(self, "channels", chans)
        phases = tuple((as_operator(hk), float(w)) for hk, w in self.ham_phases)
        for hk, _ in phases:
            if hk.shape != h.shape:
                raise DimensionError("phased Hamiltonian term has wrong shape")
        object.__setattr__(self, "ham_phases", phases)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def is_static(self) -> bool:
        return not self.ham_phases and all(ch.phase_freq == 0.0 for ch in self.channels)

    _fold_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def folded(self) -> "FoldedGenerator":
        if "fold" not in self._fold_cache:
            self._fold_cache["fold"] = fold_generator(self)
        return self._fold_cache["fold"]


def _csr(m: np.ndarray) -> sp.csr_matrix:
    s = sp.csr_matrix(m)
    s.eliminate_zeros()
    s.sort_indices()
    return s


def _csc(m: np.ndarray) -> sp.csc_matrix:
    s = sp.csc_matrix(m)
    s.eliminate_zeros()
    s.sort_indices()
    return s


@dataclass
class FoldedGenerator:
    """Precomputed application form of a Liouvillian.

    The static Hamiltonian and the Lindblad completion terms of all
    unphased channels are folded into a left factor KL = -iH - sum(w BA)
    and a right factor KR = +iH - sum(w BA), so that

        d(rho)/dt = KL rho + rho KR + sum_static 2w A rho B
                    + phased channel terms + phased Hamiltonian terms.

    All operators are stored sparse: CSR for left application, CSC for
    right application.  Both the compiled kernel and the pure-Python
    fallback consume exactly this structure.
    """

    dim: int
    kl: sp.csr_matrix
    kr: sp.csc_matrix
    st_a: list  # CSR, data prefolded with 2w
    st_b: list  # CSC
    ph_a2: list  # CSR, factor 2 folded (weight applied at runtime)
    ph_b: list  # CSC
    ph_ba_l: list  # CSR
    ph_ba_r: list  # CSC
    ph_w: np.ndarray  # complex weights
    ph_omega: np.ndarray  # phase frequencies
    hm_gp_l: list  # CSR of -i H_k
    hm_gp_r: list  # CSC of -i H_k
    hm_gm_l: list  # CSR of -i H_k^dag
    hm_gm_r: list  # CSC of -i H_k^dag
    hm_omega: np.ndarray

    @property
    def is_static(self) -> bool:
        return len(self.ph_w) == 0 and len(self.hm_omega) == 0

    def apply(self, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
        """Evaluate d(rho)/dt at time t (reference implementation)."""
        out = self.kl @ rho
        out += rho @ self.kr
        for a2, b in zip(self.st_a, self.st_b):
            out += (a2 @ rho) @ b
        for k in range(len(self.ph_w)):
            ph = self.ph_w[k] * np.exp(1j * self.ph_omega[k] * t)
            out += ph * ((self.ph_a2[k] @ rho) @ self.ph_b[k])
            out -= ph * (self.ph_ba_l[k] @ rho)
            out -= ph * (rho @ self.ph_ba_r[k])
        for k in range(len(self.hm_omega)):
            php = np.exp(1j * self.hm_omega[k] * t)
            out += php * (self.hm_gp_l[k] @ rho)
            out -= php * (rho @ self.hm_gp_r[k])
            phm = np.conj(php)
            out += phm * (self.hm_gm_l[k] @ rho)
            out -= phm * (rho @ self.hm_gm_r[k])
        return np.asarray(out)


def fold_generator(liou: Liouvillian) -> FoldedGenerator:
    d = liou.dim
    h = liou.hamiltonian
    kl = -1j * h.copy()
    kr = 1j * h.copy()
    st_a, st_b = [], []
    ph_a2, ph_b, ph_ba_l, ph_ba_r, ph_w, ph_omega = [], [], [], [], [], []
    for ch in liou.channels:
        ba = ch.right @ ch.left
        if ch.phase_freq == 0.0:
            kl -= ch.weight * ba
            kr -= ch.weight * ba
            st_a.append(_csr(2.0 * ch.weight * ch.left))
            st_b.append(_csc(ch.right))
        else:
            ph_a2.append(_csr(2.0 * ch.left))
            ph_b.append(_csc(ch.right))
            ph_ba_l.append(_csr(ba))
            ph_ba_r.append(_csc(ba))
            ph_w.append(complex(ch.weight))
            ph_omega.append(float(ch.phase_freq))
    hm_gp_l, hm_gp_r, hm_gm_l, hm_gm_r, hm_omega = [], [], [], [], []
    for hk, om in liou.ham_phases:
        gp = -1j * hk
        gm = -1j * hk.conj().T
        hm_gp_l.append(_csr(gp))
        hm_gp_r.append(_csc(gp))
        hm_gm_l.append(_csr(gm))
        hm_gm_r.append(_csc(gm))
        hm_omega.append(float(om))
    return FoldedGenerator(
        dim=d,
        kl=_csr(kl),
        kr=_csc(kr),
        st_a=st_a,
        st_b=st_b,
        ph_a2=ph_a2,
        ph_b=ph_b,
        ph_ba_l=ph_ba_l,
        ph_ba_r=ph_ba_r,
        ph_w=np.asarray(ph_w, dtype=complex),
        ph_omega=np.asarray(ph_omega, dtype=float),
        hm_gp_l=hm_gp_l,
        hm_gp_r=hm_gp_r,
        hm_gm_l=hm_gm_l,
        hm_gm_r=hm_gm_r,
        hm_omega=np.asarray(hm_omega, dtype=float),
    )


def apply_liouvillian(liou: Liouvillian, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
    """d(rho)/dt for the given generator, with all phases evaluated at t."""
    rho = as_operator(rho)
    if rho.shape[0] != liou.dim:
        raise DimensionError(f"state dim {rho.shape[0]} does not match generator dim {liou.dim}")
    return liou.folded().apply(rho, t)


def superoperator(liou: Liouvillian) -> np.ndarray:
    """Dense dim^2 x dim^2 matrix of a static generator on row-major vec(rho).

    Memory is O(dim^4); intended for the direct steady-state solve only.
    """
    if not liou.is_static:
        raise InvariantError("superoperator requires a time-independent generator")
    d = liou.dim
    eye = np.eye(d, dtype=complex)
    f = liou.folded()
    s = np.kron(f.kl.toarray(), eye)
    s += np.kron(eye, f.kr.toarray().T)
    for a2, b in zip(f.st_a, f.st_b):
        s += np.kron(a2.toarray(), b.toarray().T)
    return s
