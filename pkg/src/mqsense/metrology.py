"""Sensing metrics: distortion variance, cluster-size fits and Fisher information."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import curve_fit
from scipy.sparse.linalg import minres

from .basis import SymmetricBasis, SymOperator, anticommutator_superop, collective, enumerate_basis, multiply
from .dynamics import EvolutionConfig, dephase, phase_scan, spectrum_from_scan
from .errors import (
    ConditioningWarning,
    FitError,
    InputError,
    NoSensitivityError,
    ParameterError,
    RangeError,
)
from .states import ClusterSpec, CoherenceSpectrum, build_cluster

FOUR_LN2 = 4.0 * math.log(2.0)
PINV_RTOL = 1e-10
DENSE_QFI_LIMIT = 6000


@dataclass(frozen=True)
class DistortionReport:
    delta: float
    m_c: int
    value: float


@dataclass(frozen=True)
class ClusterFit:
    """Gaussian fit ``A exp(-4 ln2 q^2 / fwhh^2)`` of a coherence spectrum."""

    fwhh: float
    amplitude: float
    n_cl: float
    residual: float

    def to_dict(self) -> dict:
        return {"fwhh": self.fwhh, "amplitude": self.amplitude, "n_cl": self.n_cl, "residual": self.residual}


def cluster_size(fwhh: float) -> float:
    """Number of correlated spins ``fwhh**2 / (4 ln 2)``."""
    return fwhh ** 2 / FOUR_LN2


def precision_bound(fisher: float, n_measurements: int = 1) -> float:
    """Cramer-Rao bound ``1 / sqrt(n_measurements * F)`` on the estimator spread."""
    if fisher < 0 or n_measurements < 1:
        raise ParameterError("need F >= 0 and n_measurements >= 1")
    return math.inf if fisher == 0 else 1.0 / math.sqrt(n_measurements * fisher)


def distortion_variance(s0: CoherenceSpectrum, s_delta: CoherenceSpectrum, m_c: int,
                        delta: float = 0.0, normalize: bool = False) -> DistortionReport:
    """Mean squared difference of two spectra over ``q = 0, 2, ..., m_c``.

    The spectra are used as given; ``normalize=True`` first rescales each to
    unit sum over its even non-negative orders.
    """
    if m_c < 0 or m_c % 2:
        raise RangeError(f"m_c must be even and non-negative, got {m_c}")
    if normalize:
        s0, s_delta = s0.even_nonnegative(), s_delta.even_nonnegative()
    for s in (s0, s_delta):
        if m_c > max(s.orders, default=-1):
            raise RangeError(f"m_c={m_c} exceeds the orders available in a spectrum")
    diffs = [(s0[q] - s_delta[q]) ** 2 for q in range(0, m_c + 1, 2)]
    return DistortionReport(delta, m_c, float(sum(diffs) / (m_c // 2 + 1)))


def _gauss(q, amplitude, fwhh):
    return amplitude * np.exp(-FOUR_LN2 * q * q / (fwhh * fwhh))


def gaussian_fit(s: CoherenceSpectrum, floor: float = 1e-12) -> ClusterFit:
    """Least-squares fit of intensity versus order, parameterized by the FWHH.

    Order 0 is left out of a zero-suppressed spectrum.
    """
    q, y = s.as_arrays()
    keep = np.ones_like(q, dtype=bool)
    if s.zero_suppressed:
        keep &= q != 0
    q, y = q[keep].astype(float), y[keep]
    if y.size == 0 or y.max() <= 0:
        raise FitError("spectrum is empty")
    support = y > floor * y.max()
    if np.unique(q[support]).size < 3:
        raise FitError("need at least three orders above the noise floor")
    var = np.sum(y * q * q) / np.sum(y)
    guess = (y.max(), max(math.sqrt(2 * FOUR_LN2 * var), 1e-3))
    try:
        popt, _ = curve_fit(_gauss, q, y, p0=guess, xtol=1e-15, ftol=1e-15, gtol=1e-15, maxfev=20000)
    except RuntimeError as exc:
        raise FitError(str(exc)) from exc
    amplitude, fwhh = float(popt[0]), abs(float(popt[1]))
    residual = float(np.sqrt(np.mean((_gauss(q, amplitude, fwhh) - y) ** 2)))
    return ClusterFit(fwhh, amplitude, cluster_size(fwhh), residual)


def _check_hermitian(op: SymOperator, name: str):
    if not op.is_hermitian(atol=1e-10 * max(1.0, op.norm())):
        raise InputError(f"{name} is not Hermitian")


def qfi(rho: SymOperator, generator: SymOperator | None = None, rtol: float = PINV_RTOL,
        method: str = "auto") -> float:
    """Quantum Fisher information ``2 <x| A^+ |x>`` with ``x = -i[G, rho]``.

    ``A`` is the anticommutator map ``y -> rho y + y rho`` restricted to the
    symmetric subspace, which it leaves invariant.  It is Hermitian, so the
    pseudo-inverse comes from an eigendecomposition, with eigenvalues below
    ``rtol`` times the largest treated as zero.  ``method="iterative"`` (the
    default above a few thousand basis elements) uses MINRES instead.  A
    :class:`ConditioningWarning` is issued when ``x`` has weight on the
    discarded subspace.
    """
    basis = rho.basis
    generator = generator if generator is not None else collective(basis, "z")
    _check_hermitian(rho, "rho")
    _check_hermitian(generator, "generator")
    x = -1j * (multiply(generator, rho) - multiply(rho, generator)).coeffs
    xnorm = np.linalg.norm(x)
    if xnorm == 0:
        return 0.0
    amat = anticommutator_superop(rho)
    if method == "auto":
        method = "dense" if basis.dim <= DENSE_QFI_LIMIT else "iterative"
    if method == "dense":
        a = amat.toarray()
        a = 0.5 * (a + a.conj().T)
        if not np.any(a.imag):
            a = a.real  # real symmetric solve is several times cheaper
        evals, evecs = np.linalg.eigh(a)
        cut = rtol * np.max(np.abs(evals))
        proj = evecs.conj().T @ x
        keep = np.abs(evals) > cut
        lost = np.linalg.norm(proj[~keep])
        if lost > 1e-8 * xnorm:
            warnings.warn(f"pseudo-inverse discarded {lost / xnorm:.2e} of the input", ConditioningWarning,
                          stacklevel=2)
        value = 2.0 * float(np.sum(np.abs(proj[keep]) ** 2 / evals[keep]))
    elif method == "iterative":
        # MINRES on the real form [[Re, -Im], [Im, Re]], symmetric for Hermitian A
        a = amat.tocsr()
        real_form = sparse.bmat([[a.real, -a.imag], [a.imag, a.real]], format="csr")
        rhs = np.concatenate([x.real, x.imag])
        y, info = minres(real_form, rhs, rtol=rtol, maxiter=20 * basis.dim)
        if info != 0:
            warnings.warn(f"MINRES stopped with code {info}", ConditioningWarning, stacklevel=2)
        value = 2.0 * float(rhs @ y)
    else:
        raise ParameterError("method must be 'auto', 'dense' or 'iterative'")
    return max(value, 0.0)


def cfi(family, alpha: float, dalpha: float, floor: float = 1e-12) -> float:
    """Classical Fisher information ``sum_i p_i (d ln p_i / d alpha)^2``.

    ``family(alpha)`` returns the outcome probabilities; the derivative is a
    central difference with step ``dalpha``.  Outcomes with ``p_i <= floor``
    are skipped.
    """
    if not dalpha > 0:
        raise ParameterError("dalpha must be positive")
    probs = []
    for a in (alpha - dalpha, alpha, alpha + dalpha):
        p = np.asarray(family(a), dtype=float)
        if p.ndim != 1 or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
            raise InputError(f"family({a}) is not a probability distribution")
        probs.append(p)
    lo, mid, hi = probs
    if not lo.shape == mid.shape == hi.shape:
        raise InputError("outcome count changes with alpha")
    keep = mid > floor
    deriv = (hi[keep] - lo[keep]) / (2 * dalpha)
    return float(np.sum(deriv ** 2 / mid[keep]))


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def qfi_vs_max_order(n_spins: int, m_c_list, p_list, mode: str = "equal", mixing: float = 1.0,
                     gaussian_width: float | None = None, basis: SymmetricBasis | None = None,
                     workers: int = 1) -> list[dict]:
    """Table of ``{"m_c", "p", "qfi"}`` rows for dephased cluster states, generator ``I_z``."""
    basis = basis or enumerate_basis(n_spins)
    gen = collective(basis, "z")
    clusters = {m: build_cluster(ClusterSpec(n_spins, m, mode, gaussian_width, mixing), basis) for m in m_c_list}
    grid = [(m, p) for m in m_c_list for p in p_list]

    def one(item):
        m, p = item
        return {"m_c": m, "p": p, "qfi": qfi(dephase(clusters[m], p), gen)}

    return _map(one, grid, workers)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.unique(x).size < 2:
        raise InputError("need at least two distinct x values")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), float(r2))


def estimate_threshold(samples, noise_rms: float) -> float:
    """Jitter amplitude where the fitted line ``D = a delta + b`` reaches ``noise_rms``."""
    if noise_rms < 0:
        raise ParameterError("noise_rms must be non-negative")
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InputError("samples must be (delta, D) pairs")
    fit = linear_fit(pts[:, 0], pts[:, 1])
    if not fit.slope > 0:
        raise NoSensitivityError(f"fitted slope {fit.slope:.3e} is not positive")
    return max(0.0, (noise_rms - fit.intercept) / fit.slope)


def jitter_sweep(rho_seed: SymOperator, config: EvolutionConfig, deltas, m_c_list, phis,
                 suppress_zero: bool = True, workers: int = 1) -> tuple[list[dict], dict[float, CoherenceSpectrum]]:
    """Distortion variance table over jitter amplitudes and cut-off orders.

    Spectra come from the phase scan (zero order suppressed by default, as
    for measured data) and are normalized over even non-negative orders; the
    reference is the scan with ``jitter=0``.  Returns
    ``({"delta", "m_c", "D"} rows, spectra by delta)``.
    """
    n = rho_seed.basis.n_spins
    amps = sorted(set([0.0, *map(float, deltas)]))

    def spectrum(delta):
        cfg = EvolutionConfig(**{**config.__dict__, "jitter": delta})
        scan = phase_scan(rho_seed, cfg, phis)
        return spectrum_from_scan(scan, suppress_zero, phis=phis, n_spins=n).even_nonnegative()

    spectra = dict(zip(amps, _map(spectrum, amps, workers)))
    ref = spectra[0.0]
    rows = [{"delta": d, "m_c": m, "D": distortion_variance(ref, spectra[d], m, d).value}
            for d in map(float, deltas) for m in m_c_list]
    return rows, spectra
