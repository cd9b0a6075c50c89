"""Compact gauge groups as explicit matrices, and trace evaluation of chord diagrams.

A representation is stored as the list of images ``rho(e_a)`` of an orthonormal
basis of the Lie algebra under the ad-invariant inner product ``<X,Y> = -tr(XY)``
(positive definite on anti-Hermitian matrices).  The quadratic Casimir scalar
``kappa2`` is defined by ``sum_a rho(e_a) rho(e_a) = -kappa2 * Id``; it is the
number that controls area-law exponents downstream.

For one-dimensional representations (U(1) charge q, trivial) the stored matrices
are the representation images, not an orthonormal set themselves; orthonormality
lives on the abstract algebra there and the Casimir identity is what is enforced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import UnsupportedRepresentationError

__all__ = [
    "Representation",
    "ChordDiagram",
    "make_representation",
    "lie_factor",
    "trace_contracted_word",
    "casimir_matrix",
]

_ATOL = 1e-12

# Pauli matrices.
_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _gell_mann():
    """The eight Gell-Mann matrices (standard normalization tr(l_a l_b) = 2 d_ab)."""
    l = [np.zeros((3, 3), dtype=complex) for _ in range(8)]
    l[0][0, 1] = l[0][1, 0] = 1
    l[1][0, 1] = -1j
    l[1][1, 0] = 1j
    l[2][0, 0] = 1
    l[2][1, 1] = -1
    l[3][0, 2] = l[3][2, 0] = 1
    l[4][0, 2] = -1j
    l[4][2, 0] = 1j
    l[5][1, 2] = l[5][2, 1] = 1
    l[6][1, 2] = -1j
    l[6][2, 1] = 1j
    l[7] = np.diag([1, 1, -2]).astype(complex) / np.sqrt(3)
    return l


@dataclass(frozen=True, eq=False)
class Representation:
    """A concrete gauge-group representation.

    basis holds the matrices rho(e_a); for su(N) fundamental representations the
    e_a are orthonormal under <X,Y> = -tr(XY) (checked at construction).
    """

    group_id: str
    rep_id: str
    dim: int
    basis: tuple  # tuple of (dim x dim) complex ndarrays, anti-Hermitian
    casimir_scalar: float

    @property
    def lie_dim(self) -> int:
        return len(self.basis)

    @property
    def name(self) -> str:
        return f"{self.group_id}:{self.rep_id}"

    def casimir(self) -> np.ndarray:
        """sum_a rho(e_a) rho(e_a), a central matrix equal to -kappa2 * Id."""
        return casimir_matrix(self)


def casimir_matrix(rep: Representation) -> np.ndarray:
    acc = np.zeros((rep.dim, rep.dim), dtype=complex)
    for e in rep.basis:
        acc += e @ e
    return acc


def _check_faithful_basis(basis):
    """Orthonormality and anti-Hermiticity of an embedded basis, to 1e-12."""
    for a, ea in enumerate(basis):
        if not np.allclose(ea, -ea.conj().T, atol=_ATOL):
            raise AssertionError(f"basis element {a} is not anti-Hermitian")
        for b, eb in enumerate(basis):
            ip = -np.trace(ea @ eb)
            want = 1.0 if a == b else 0.0
            if abs(ip - want) > 1e-11:
                raise AssertionError(f"<e_{a}, e_{b}> = {ip}, expected {want}")


def _parse_rep(group_id, rep_id):
    """Normalize identifiers; accepts the combined form 'su2:fund' in group_id."""
    if rep_id is None and ":" in group_id:
        group_id, rep_id = group_id.split(":", 1)
    if rep_id is None:
        raise UnsupportedRepresentationError(
            f"unsupported representation: {group_id!r} (missing rep id)"
        )
    return group_id.strip().lower(), str(rep_id).strip().lower()


@lru_cache(maxsize=None)
def _make_representation_cached(group_id, rep_id):
    if group_id == "su2":
        if rep_id in ("fund", "fundamental"):
            basis = tuple(s / (1j * np.sqrt(2.0)) for s in _SIGMA)
            _check_faithful_basis(basis)
            return Representation("su2", "fund", 2, basis, 1.5)
        if rep_id == "trivial":
            zero = np.zeros((1, 1), dtype=complex)
            return Representation("su2", "trivial", 1, (zero,) * 3, 0.0)
    elif group_id == "su3":
        if rep_id in ("fund", "fundamental"):
            basis = tuple(l / (1j * np.sqrt(2.0)) for l in _gell_mann())
            _check_faithful_basis(basis)
            return Representation("su3", "fund", 3, basis, 8.0 / 3.0)
    elif group_id == "u1":
        try:
            q = int(rep_id)
        except ValueError:
            raise UnsupportedRepresentationError(
                f"unsupported representation: u1:{rep_id!r} (charge must be an integer)"
            ) from None
        basis = (np.array([[1j * q]], dtype=complex),)
        return Representation("u1", str(q), 1, basis, float(q * q))
    raise UnsupportedRepresentationError(
        f"unsupported representation: {group_id}:{rep_id}"
    )


def make_representation(group_id: str, rep_id: str | None = None) -> Representation:
    """Build a supported representation deterministically.

    Supported: ("su2", "fund"), ("su2", "trivial"), ("su3", "fund"),
    ("u1", q) for integer charge q.  The combined identifier form
    "su2:fund" / "u1:3" is accepted as the first argument.
    """
    group_id, rep_id = _parse_rep(group_id, rep_id)
    rep = _make_representation_cached(group_id, rep_id)
    # sanity: Casimir centrality as an exact matrix identity
    cas = casimir_matrix(rep)
    if not np.allclose(cas, -rep.casimir_scalar * np.eye(rep.dim), atol=1e-11):
        raise AssertionError("Casimir matrix is not -kappa2 * Id")
    return rep


@dataclass(frozen=True)
class ChordDiagram:
    """A perfect matching of 2n path-ordered insertion points.

    Slots are indexed 0..2n-1 in loop-parameter order (earliest first).
    ``slot_curve[k]`` records which curve slot k sits on; ``pairing`` is the
    fixed-point-free involution as a tuple of index pairs.  ``tadpole_flags``
    marks chords that pair adjacent slots on the same curve (these carry a
    Riemann weight in the Stratonovich bookkeeping, not a propagator overlap).
    """

    n: int
    slot_curve: tuple
    pairing: tuple  # tuple of (i, j) pairs, i < j
    tadpole_flags: frozenset = frozenset()

    def __post_init__(self):
        total = 2 * self.n
        if len(self.slot_curve) != total:
            raise ValueError("slot count mismatch with n")
        seen = set()
        for i, j in self.pairing:
            if i == j:
                raise ValueError("pairing has a fixed point")
            seen.update((i, j))
        if len(self.pairing) != self.n or seen != set(range(total)):
            raise ValueError("pairing is not a perfect matching on the slots")
        for c in self.tadpole_flags:
            i, j = self.pairing[c]
            if self.slot_curve[i] != self.slot_curve[j] or abs(i - j) != 1:
                raise ValueError(
                    "tadpole chord must pair adjacent slots on the same curve"
                )


def trace_contracted_word(
    rep: Representation,
    n_slots: int,
    pairing,
    casimir_positions=(),
) -> float:
    """Trace of a word of basis matrices with Lie indices contracted pairwise.

    Positions 0..n_slots-1 are in loop order; the matrix product is taken with
    the latest position leftmost.  Each pair in ``pairing`` shares one summed
    index a; positions in ``casimir_positions`` carry the fixed central matrix
    sum_a e_a e_a instead of a contracted slot.  Evaluated by explicit matrix
    arithmetic; the imaginary part must vanish to 1e-10.
    """
    paired = set()
    for i, j in pairing:
        paired.update((i, j))
    cas_set = set(casimir_positions)
    if paired & cas_set or paired | cas_set != set(range(n_slots)):
        raise ValueError("pairing and Casimir insertions must cover all slots exactly")

    d = rep.dim
    k = len(pairing)
    dim_g = rep.lie_dim
    cas = casimir_matrix(rep)

    # chord index for each slot
    chord_of = {}
    for c, (i, j) in enumerate(pairing):
        chord_of[i] = c
        chord_of[j] = c

    total = 0.0 + 0.0j
    # iterate over one summed Lie index per chord
    for assign in np.ndindex(*([dim_g] * k)):
        word = np.eye(d, dtype=complex)
        for pos in range(n_slots):  # loop order; left-multiply so latest ends leftmost
            m = cas if pos in cas_set else rep.basis[assign[chord_of[pos]]]
            word = m @ word
        total += np.trace(word)
    if abs(total.imag) > 1e-10:
        raise AssertionError(f"trace has non-negligible imaginary part: {total.imag}")
    return float(total.real)


def lie_factor(rep: Representation, diagram: ChordDiagram) -> float:
    """Contracted trace of the diagram's 2n-slot word (spectator Casimir factors
    for tadpole chords are included like any other chord; the flags are
    bookkeeping only)."""
    return trace_contracted_word(rep, 2 * diagram.n, diagram.pairing)
