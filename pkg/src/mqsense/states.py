"""Model cluster states, reference states and coherence-order content."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import SymmetricBasis, SymOperator, collective, identity
from .errors import InputError, SpecError

GAUSS_CUTOFF = 1e-12


@dataclass
class CoherenceSpectrum:
    """Intensity per integer coherence order ``q``."""

    intensities: dict[int, float]
    n_spins: int
    normalized: bool = False
    zero_suppressed: bool = False

    def __post_init__(self):
        clean = {}
        for q, v in self.intensities.items():
            q = int(q)
            v = float(v)
            if abs(q) > self.n_spins:
                raise InputError(f"order {q} exceeds n_spins={self.n_spins}")
            if not v >= 0:
                raise InputError(f"intensity at q={q} is negative or NaN: {v}")
            clean[q] = v
        self.intensities = dict(sorted(clean.items()))

    def __getitem__(self, q: int) -> float:
        return self.intensities.get(int(q), 0.0)

    @property
    def orders(self) -> list[int]:
        return list(self.intensities)

    def total(self) -> float:
        return float(sum(self.intensities.values()))

    def normalize(self) -> "CoherenceSpectrum":
        tot = self.total()
        if tot == 0:
            raise InputError("cannot normalize an all-zero spectrum")
        return CoherenceSpectrum({q: v / tot for q, v in self.intensities.items()},
                                 self.n_spins, True, self.zero_suppressed)

    def even_nonnegative(self) -> "CoherenceSpectrum":
        """Restriction to ``q = 0, 2, 4, ...`` normalized to unit sum."""
        part = {q: v for q, v in self.intensities.items() if q >= 0 and q % 2 == 0}
        return CoherenceSpectrum(part, self.n_spins, self.normalized, self.zero_suppressed).normalize()

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        q = np.array(self.orders, dtype=int)
        return q, np.array([self.intensities[k] for k in q], dtype=float)


@dataclass(frozen=True)
class ClusterSpec:
    """Parameters of a model cluster state.

    ``weight_mode="equal"`` gives every supported coherence sector the same
    Hilbert-Schmidt weight; ``"gaussian"`` weights sector ``q`` by
    ``exp(-q**2 / (2 w**2))`` with ``w = gaussian_width`` (default ``N/3.5``).
    ``mixing`` scales the coherent part between 0 (maximally mixed) and 1
    (largest admixture allowed by the positivity bound).
    """

    n_spins: int
    max_order: int
    weight_mode: str = "equal"
    gaussian_width: float | None = None
    mixing: float = 1.0

    def __post_init__(self):
        if self.n_spins < 1:
            raise SpecError("n_spins must be positive")
        if self.max_order < 0 or self.max_order % 2 or self.max_order > self.n_spins:
            raise SpecError(f"max_order must be even and in [0, n_spins], got {self.max_order}")
        if self.weight_mode not in ("equal", "gaussian"):
            raise SpecError(f"unknown weight_mode {self.weight_mode!r}")
        if self.gaussian_width is not None and not self.gaussian_width > 0:
            raise SpecError("gaussian_width must be positive")
        if not 0 <= self.mixing <= 1:
            raise SpecError("mixing must lie in [0, 1]")

    @property
    def width(self) -> float:
        return self.gaussian_width if self.gaussian_width is not None else self.n_spins / 3.5

    def sector_weight(self, q: int) -> float:
        if self.weight_mode == "equal":
            return 1.0
        return float(np.exp(-q * q / (2 * self.width ** 2)))


def maximally_mixed(basis: SymmetricBasis) -> SymOperator:
    return identity(basis) / 2 ** basis.n_spins


def build_cluster(spec: ClusterSpec, basis: SymmetricBasis) -> SymOperator:
    """Density operator with coherences on the even orders ``2 <= |q| <= max_order``.

    Inside a sector every computational-basis element gets the same
    amplitude (coefficient proportional to the label norm); sectors are then
    rescaled to their target weights.  The traceless coherent part ``X`` is
    admixed as ``I/2^N + mixing * X / (2^N ||X||_HS)``, which is positive
    because the spectral norm never exceeds the Hilbert-Schmidt norm.
    """
    if basis.n_spins != spec.n_spins:
        raise SpecError("basis and spec disagree on n_spins")
    coeffs = np.zeros(basis.dim, dtype=complex)
    top = spec.sector_weight(0)
    for q in range(2, spec.max_order + 1, 2):
        w = spec.sector_weight(q)
        if w < GAUSS_CUTOFF * top:
            continue
        for sign in (1, -1):
            sel = basis.orders == sign * q
            amp = basis.norms[sel]
            coeffs[sel] = amp * np.sqrt(w) / np.linalg.norm(amp)
    rho = maximally_mixed(basis)
    xnorm = np.linalg.norm(coeffs)
    if xnorm > 0 and spec.mixing > 0:
        rho = rho + SymOperator(basis, coeffs * (spec.mixing / (2 ** basis.n_spins * xnorm)))
    return rho


def ghz_state(n_spins: int, basis: SymmetricBasis | None = None) -> SymOperator:
    """``|GHZ><GHZ|`` with ``|GHZ> = (|0...0> + |1...1>)/sqrt(2)``."""
    from .basis import enumerate_basis

    basis = basis or enumerate_basis(n_spins)
    out = np.zeros(basis.dim, dtype=complex)
    for lab in [(n_spins, n_spins, 0), (0, 0, 0), (n_spins, 0, n_spins), (0, n_spins, n_spins)]:
        out[basis.index[lab]] = 0.5  # each string is unique, norm 1
    return SymOperator(basis, out)


def thermal_state(n_spins: int, basis: SymmetricBasis | None = None) -> SymOperator:
    """Traceless deviation ``sum_i Iz_i`` scaled to unit Hilbert-Schmidt norm."""
    from .basis import enumerate_basis

    basis = basis or enumerate_basis(n_spins)
    iz = collective(basis, "z")
    return iz / iz.norm()


def coherence_spectrum(rho: SymOperator, traceless: bool = False, normalize: bool = False) -> CoherenceSpectrum:
    """Hilbert-Schmidt weight ``sum |c(m, n, h)|^2`` per order ``q = m - n``.

    ``traceless=True`` removes the identity component first, which otherwise
    dominates ``q = 0`` for highly mixed states.
    """
    basis = rho.basis
    coeffs = rho.coeffs
    if traceless:
        ident = identity(basis)
        coeffs = coeffs - ident.coeffs * (np.vdot(ident.coeffs, coeffs) / ident.norm() ** 2)
    w = np.abs(coeffs) ** 2
    ns = basis.n_spins
    sums = np.bincount(basis.orders + ns, weights=w, minlength=2 * ns + 1)
    spec = CoherenceSpectrum({q - ns: float(sums[q]) for q in range(2 * ns + 1)}, ns)
    return spec.normalize() if normalize else spec
