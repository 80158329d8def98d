"""Permutation-invariant operator basis and its multiplication algebra.

A basis element ``T(m, n, h)`` is the normalized sum of all distinct
site-permutations of a product of single-site matrix units.  With
``|0>`` the spin-up state, the four single-site units are counted as

====================  =====================  ==========
unit                  matrix                 count
====================  =====================  ==========
``sigma+``            ``|0><1|``             ``a``
``sigma-``            ``|1><0|``             ``b``
``|0><0|``                                   ``c``
``|1><1|``                                   ``e``
====================  =====================  ==========

and the label is ``m = a + c`` (zeros in the ket), ``n = b + c`` (zeros in
the bra), ``h = a + b`` (Hamming distance between ket and bra).  The
coherence order of ``T(m, n, h)`` is ``q = m - n``.

Every element is scaled to unit Hilbert-Schmidt norm, so the coefficient
vector of an operator is its coordinate vector in an orthonormal basis.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, perm, sqrt

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import BasisMismatchError, LabelError, SizeError

DEFAULT_CAP = 64
SPARSE_FILL = 0.10


@lru_cache(maxsize=None)
def binomial_table(n: int) -> np.ndarray:
    table = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(i + 1):
            table[i, j] = float(comb(i, j))
    table.setflags(write=False)
    return table


def occupations(n_spins: int, m: int, n: int, h: int) -> tuple[int, int, int, int]:
    """Return the unit counts ``(a, b, c, e)`` of label ``(m, n, h)``."""
    a = (h + m - n) // 2
    b = (h - m + n) // 2
    c = (m + n - h) // 2
    return a, b, c, n_spins - a - b - c


def label_norm(n_spins: int, m: int, n: int, h: int) -> float:
    a, b, c, e = occupations(n_spins, m, n, h)
    return sqrt(factorial(n_spins) / (factorial(a) * factorial(b) * factorial(c) * factorial(e)))


def h_range(n_spins: int, m: int, n: int) -> range:
    return range(abs(m - n), min(m + n, 2 * n_spins - m - n) + 1, 2)


class SymmetricBasis:
    """Indexed basis ``T(m, n, h)`` of permutation-invariant operators on ``n_spins`` spins.

    Labels are stored in lexicographic ``(m, n, h)`` order, so all labels
    sharing ``(m, n)`` occupy one contiguous block of indices.
    """

    def __init__(self, n_spins: int, cap: int = DEFAULT_CAP):
        if not isinstance(n_spins, (int, np.integer)) or not 1 <= n_spins <= cap:
            raise SizeError(f"n_spins must be an integer in [1, {cap}], got {n_spins!r}")
        self.n_spins = ns = int(n_spins)
        labels = []
        start = np.zeros((ns + 1, ns + 1), dtype=np.int64)
        count = np.zeros((ns + 1, ns + 1), dtype=np.int64)
        for m in range(ns + 1):
            for n in range(ns + 1):
                start[m, n] = len(labels)
                hs = h_range(ns, m, n)
                count[m, n] = len(hs)
                labels.extend((m, n, h) for h in hs)
        self.labels = np.array(labels, dtype=np.int64)
        self.index = {lab: i for i, lab in enumerate(labels)}
        self.norms = np.array([label_norm(ns, *lab) for lab in labels])
        self.block_start = start
        self.block_count = count
        self.orders = self.labels[:, 0] - self.labels[:, 1]
        self.hamming = self.labels[:, 2].copy()
        self.dagger_perm = np.array([self.index[(n, m, h)] for m, n, h in labels], dtype=np.int64)
        for arr in (self.labels, self.norms, start, count, self.orders, self.hamming, self.dagger_perm):
            arr.setflags(write=False)
        self._binom = binomial_table(ns)
        self._chi = lru_cache(maxsize=40000)(self._chi_block)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"SymmetricBasis(n_spins={self.n_spins}, dim={self.dim})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SymmetricBasis) and other.n_spins == self.n_spins

    def __hash__(self) -> int:
        return hash(("SymmetricBasis", self.n_spins))

    def label_index(self, label) -> int:
        try:
            return self.index[tuple(int(x) for x in label)]
        except (KeyError, TypeError, ValueError):
            raise LabelError(f"{label!r} is not a valid label for {self.n_spins} spins") from None

    def block(self, m: int, n: int) -> slice:
        s = int(self.block_start[m, n])
        return slice(s, s + int(self.block_count[m, n]))

    def chi(self, m1: int, n1: int, n2: int) -> np.ndarray:
        """Structure-constant block for ``T(m1, n1, .) T(n1, n2, .)``, indexed ``[h1, h2, h]``."""
        return self._chi(int(m1), int(n1), int(n2))

    def _chi_block(self, m1, n1, n2):
        out = kernels.chi_block(self.n_spins, m1, n1, n2, self._binom)
        out.setflags(write=False)
        return out

    def rows(self):
        """Yield ``(index, m, n, h, norm)`` rows for the CSV dump."""
        for i, (m, n, h) in enumerate(self.labels):
            yield i, int(m), int(n), int(h), float(self.norms[i])


@lru_cache(maxsize=16)
def enumerate_basis(n_spins: int, cap: int = DEFAULT_CAP) -> SymmetricBasis:
    """Build (or fetch the shared) basis for ``n_spins`` spins."""
    return SymmetricBasis(n_spins, cap=cap)


def basis_size(n_spins: int) -> int:
    return (n_spins + 1) * (n_spins + 2) * (n_spins + 3) // 6


class SymOperator:
    """An operator expanded in a :class:`SymmetricBasis`."""

    __array_priority__ = 1000

    def __init__(self, basis: SymmetricBasis, coeffs=None):
        self.basis = basis
        if coeffs is None:
            coeffs = np.zeros(basis.dim, dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (basis.dim,):
            raise SizeError(f"expected {basis.dim} coefficients, got shape {coeffs.shape}")
        self.coeffs = coeffs

    def __repr__(self):
        return f"SymOperator(n_spins={self.basis.n_spins}, nnz={np.count_nonzero(self.coeffs)})"

    def copy(self) -> "SymOperator":
        return SymOperator(self.basis, self.coeffs.copy())

    def dag(self) -> "SymOperator":
        return SymOperator(self.basis, np.conj(self.coeffs[self.basis.dagger_perm]))

    def trace(self) -> complex:
        b = self.basis
        diag = [b.index[(m, m, 0)] for m in range(b.n_spins + 1)]
        return complex(np.dot(self.coeffs[diag], b.norms[diag]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        scale = max(1.0, self.norm())
        return bool(np.max(np.abs(self.coeffs - self.dag().coeffs), initial=0.0) <= atol * scale)

    def _check(self, other):
        if not isinstance(other, SymOperator):
            return NotImplemented
        if other.basis != self.basis:
            raise BasisMismatchError("operators live in different bases")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SymOperator(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SymOperator(self.basis, self.coeffs - other.coeffs)

    def __neg__(self):
        return SymOperator(self.basis, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SymOperator):
            return NotImplemented
        return SymOperator(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SymOperator(self.basis, self.coeffs / scalar)

    def __matmul__(self, other):
        if isinstance(other, SymOperator):
            return multiply(self, other)
        return NotImplemented


def _nonzero_blocks(op: SymOperator):
    b = op.basis
    ns = b.n_spins
    nz = op.coeffs != 0
    for m in range(ns + 1):
        for n in range(ns + 1):
            s = b.block(m, n)
            if nz[s].any():
                yield m, n, s


def structure_constants(e1, e2, basis: SymmetricBasis) -> dict[int, float]:
    """Expansion ``T(e1) T(e2) = sum_h chi[h] T(m1, n2, h)``.

    Returns an empty dict when the inner indices do not match.
    """
    i1, i2 = basis.label_index(e1), basis.label_index(e2)
    m1, n1, h1 = (int(x) for x in basis.labels[i1])
    m2, n2, h2 = (int(x) for x in basis.labels[i2])
    if n1 != m2:
        return {}
    block = basis.chi(m1, n1, n2)
    j1 = (h1 - abs(m1 - n1)) // 2
    j2 = (h2 - abs(n1 - n2)) // 2
    hmin = abs(m1 - n2)
    return {hmin + 2 * j: float(v) for j, v in enumerate(block[j1, j2]) if v != 0.0}


def multiply(a: SymOperator, b: SymOperator) -> SymOperator:
    """Operator product ``a @ b`` computed through the structure constants."""
    if a.basis != b.basis:
        raise BasisMismatchError("operators live in different bases")
    basis = a.basis
    out = np.zeros(basis.dim, dtype=complex)
    b_blocks: dict[int, list] = {}
    for n1, n2, s in _nonzero_blocks(b):
        b_blocks.setdefault(n1, []).append((n2, s))
    for m1, n1, sa in _nonzero_blocks(a):
        ca = a.coeffs[sa]
        for n2, sb in b_blocks.get(n1, ()):
            chi = basis.chi(m1, n1, n2)
            out[basis.block(m1, n2)] += np.einsum("i,j,ijk->k", ca, b.coeffs[sb], chi)
    return SymOperator(basis, out)


def hs_inner(a: SymOperator, b: SymOperator) -> complex:
    """Hilbert-Schmidt pairing ``Tr(a^dagger b)``."""
    if a.basis != b.basis:
        raise BasisMismatchError("operators live in different bases")
    return complex(np.vdot(a.coeffs, b.coeffs))


@dataclass(frozen=True)
class SuperOperator:
    """Matrix of a linear map on the symmetric Liouville space.

    ``matrix`` is a CSR matrix when sparse enough, otherwise a dense array.
    """

    basis: SymmetricBasis
    matrix: object

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def tocsr(self):
        return self.matrix.tocsr() if self.is_sparse else sp.csr_matrix(self.matrix)

    def apply(self, op: SymOperator) -> SymOperator:
        if op.basis != self.basis:
            raise BasisMismatchError("operator and superoperator live in different bases")
        return SymOperator(self.basis, self.matrix @ op.coeffs)

    def __matmul__(self, other):
        if isinstance(other, SymOperator):
            return self.apply(other)
        if isinstance(other, SuperOperator):
            return SuperOperator(self.basis, _finalize_matrix(self.matrix @ other.matrix))
        return NotImplemented

    def __add__(self, other):
        return SuperOperator(self.basis, _finalize_matrix(self.matrix + other.matrix))

    def __sub__(self, other):
        return SuperOperator(self.basis, _finalize_matrix(self.matrix - other.matrix))

    def __mul__(self, scalar):
        return SuperOperator(self.basis, self.matrix * scalar)

    __rmul__ = __mul__


def _finalize_matrix(mat):
    if sp.issparse(mat):
        mat = mat.tocsr()
        mat.eliminate_zeros()
        dim = mat.shape[0]
        if mat.nnz >= SPARSE_FILL * dim * dim:
            return mat.toarray()
        return mat
    mat = np.asarray(mat)
    if np.count_nonzero(mat) < SPARSE_FILL * mat.size:
        return sp.csr_matrix(mat)
    return mat


def _left_triples(a: SymOperator):
    basis = a.basis
    rows, cols, vals = [], [], []
    for m1, n1, sa in _nonzero_blocks(a):
        ca = a.coeffs[sa]
        for n2 in range(basis.n_spins + 1):
            block = np.tensordot(ca, basis.chi(m1, n1, n2), axes=(0, 0))  # [h2, h]
            r = np.arange(basis.block(m1, n2).start, basis.block(m1, n2).stop)
            c = np.arange(basis.block(n1, n2).start, basis.block(n1, n2).stop)
            rr, cc = np.meshgrid(r, c, indexing="ij")
            rows.append(rr.ravel())
            cols.append(cc.ravel())
            vals.append(block.T.ravel())
    return rows, cols, vals


def _right_triples(a: SymOperator):
    basis = a.basis
    rows, cols, vals = [], [], []
    for n1, n2, sa in _nonzero_blocks(a):
        ca = a.coeffs[sa]
        for m1 in range(basis.n_spins + 1):
            block = np.tensordot(basis.chi(m1, n1, n2), ca, axes=(1, 0))  # [h1, h]
            r = np.arange(basis.block(m1, n2).start, basis.block(m1, n2).stop)
            c = np.arange(basis.block(m1, n1).start, basis.block(m1, n1).stop)
            rr, cc = np.meshgrid(r, c, indexing="ij")
            rows.append(rr.ravel())
            cols.append(cc.ravel())
            vals.append(block.T.ravel())
    return rows, cols, vals


def _assemble(basis, parts):
    rows, cols, vals = [], [], []
    for (r, c, v), sign in parts:
        rows.extend(r)
        cols.extend(c)
        vals.extend(sign * x for x in v)
    dim = basis.dim
    if not rows:
        return SuperOperator(basis, sp.csr_matrix((dim, dim), dtype=complex))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
        dtype=complex,
    )
    return SuperOperator(basis, _finalize_matrix(mat))


def left_mult_superop(a: SymOperator) -> SuperOperator:
    """Matrix of ``x -> a x``."""
    return _assemble(a.basis, [(_left_triples(a), 1.0)])


def right_mult_superop(a: SymOperator) -> SuperOperator:
    """Matrix of ``x -> x a``."""
    return _assemble(a.basis, [(_right_triples(a), 1.0)])


def commutator_superop(a: SymOperator) -> SuperOperator:
    """Matrix of ``x -> [a, x]``; Hermitian when ``a`` is."""
    return _assemble(a.basis, [(_left_triples(a), 1.0), (_right_triples(a), -1.0)])


def anticommutator_superop(a: SymOperator) -> SuperOperator:
    """Matrix of ``x -> {a, x}``."""
    return _assemble(a.basis, [(_left_triples(a), 1.0), (_right_triples(a), 1.0)])


# --- named operators ---------------------------------------------------------

_UNITS = ((0, 0), (1, 1), (0, 1), (1, 0))  # |0><0| (c), |1><1| (e), sigma+ (a), sigma- (b)

IDENT2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SMINUS = np.array([[0, 0], [1, 0]], dtype=complex)


def local_sum(basis: SymmetricBasis, factors, coeff: complex = 1.0) -> SymOperator:
    """``coeff * sum over distinct ordered site tuples (i1, ..., ik) of f1_{i1} ... fk_{ik}``.

    Each factor is a 2x2 single-site matrix in the ``(|0>, |1>)`` basis; all
    other sites carry the identity.
    """
    ns = basis.n_spins
    k = len(factors)
    if k > ns:
        return SymOperator(basis)
    out = np.zeros(basis.dim, dtype=complex)
    for units in itertools.product(range(4), repeat=k):
        w = coeff
        for f, u in zip(factors, units):
            w = w * f[_UNITS[u]]
        if w == 0:
            continue
        n_c, n_e, n_a, n_b = (units.count(u) for u in range(4))
        for r in range(ns - k + 1):
            c = n_c + r
            e = n_e + (ns - k - r)
            # ordered tuples landing on one fixed string
            mult = perm(c, n_c) * perm(e, n_e) * factorial(n_a) * factorial(n_b)
            m, n, h = n_a + c, n_b + c, n_a + n_b
            i = basis.index[(m, n, h)]
            out[i] += w * mult * basis.norms[i]
    return SymOperator(basis, out)


def identity(basis: SymmetricBasis) -> SymOperator:
    return local_sum(basis, [])


def collective(basis: SymmetricBasis, axis: str) -> SymOperator:
    """Collective spin operator ``I_axis = sum_i I_axis_i`` for axis in x, y, z, +, -."""
    single = {"x": SX, "y": SY, "z": SZ, "+": SPLUS, "-": SMINUS}[axis]
    return local_sum(basis, [single])
