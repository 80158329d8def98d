"""Evolutions and channels in the symmetric Liouville space.

Time is in seconds and couplings in rad/s.  One loop is one pass of the
eight-pulse cycle, of duration ``cycle_time``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .basis import SY, SZ, SPLUS, SMINUS, SymmetricBasis, SymOperator, commutator_superop, local_sum
from .errors import AccuracyWarning, GridError, ParameterError, ResolutionError
from .oracle import AHT_SCALE, jitter_weights
from .states import CoherenceSpectrum, thermal_state

#: Dissipator constant for ``kappa = c * delta**2 * cycle_time`` with ``delta``
#: in units of the pi/2 pulse width: uniform width variance ``delta**2 / 12``,
#: flip-angle error ``(pi/2) * width error``, and the per-pulse weights of the
#: first-order error Hamiltonian averaged over the 12 time units of a cycle.
JITTER_CONSTANT = float((np.pi / 2) ** 2 * np.sum(jitter_weights() ** 2) / (12 * 144 * 2))

RUN_PLANS = ("echo-matched", "partial-reversal")


@dataclass(frozen=True)
class EvolutionConfig:
    """Parameters of the prepare / encode / reverse / detect protocol.

    ``jitter`` is the width-jitter amplitude in units of the pi/2 pulse
    width.  ``dephasing`` is applied once to the prepared state.  With the
    ``"echo-matched"`` plan the ``L2`` jittered reversal loops are followed by
    ``L1 - L2`` jitter-free reversal loops; ``"partial-reversal"`` stops after
    the ``L2`` loops.
    """

    coupling: float
    cycle_time: float
    loops_prepare: int
    loops_reverse: int
    jitter: float = 0.0
    jitter_constant: float = JITTER_CONSTANT
    steps_per_loop: int = 16
    dephasing: float = 0.0
    plan: str = "echo-matched"
    method: str = "expm"

    def __post_init__(self):
        if not self.cycle_time > 0:
            raise ParameterError("cycle_time must be positive")
        if self.jitter < 0 or self.jitter_constant < 0:
            raise ParameterError("jitter and jitter_constant must be non-negative")
        if self.loops_prepare < 0 or self.loops_reverse < 0:
            raise ParameterError("loop counts must be non-negative")
        if self.steps_per_loop < 1:
            raise ParameterError("steps_per_loop must be >= 1")
        if not 0 <= self.dephasing <= 1:
            raise ParameterError("dephasing must lie in [0, 1]")
        if self.plan not in RUN_PLANS:
            raise ParameterError(f"plan must be one of {RUN_PLANS}")
        if self.plan == "echo-matched" and self.loops_reverse > self.loops_prepare:
            raise ParameterError("echo-matched plan needs loops_reverse <= loops_prepare")
        if self.method not in ("expm", "rk4"):
            raise ParameterError("method must be 'expm' or 'rk4'")

    @property
    def kappa(self) -> float:
        return self.jitter_constant * self.jitter ** 2 * self.cycle_time

    @property
    def aht_coupling(self) -> float:
        return AHT_SCALE * self.coupling


def dq_hamiltonian(basis: SymmetricBasis, d: float) -> SymOperator:
    """``-(d/2) sum_{i != j} (I+_i I+_j + I-_i I-_j)``."""
    return local_sum(basis, [SPLUS, SPLUS], -d / 2) + local_sum(basis, [SMINUS, SMINUS], -d / 2)


def v_operator(basis: SymmetricBasis, d_aht: float) -> SymOperator:
    """``(3/2) d' sum_{i<j} (Iy_i Iz_j + Iz_i Iy_j)`` for uniform ``d'``."""
    return local_sum(basis, [SY, SZ], 1.5 * d_aht)


def rotate_z(rho: SymOperator, phi: float) -> SymOperator:
    """``exp(-i phi Iz) rho exp(i phi Iz)``."""
    return SymOperator(rho.basis, rho.coeffs * np.exp(-1j * phi * rho.basis.orders))


def dephase(rho: SymOperator, p: float) -> SymOperator:
    """Collective per-spin dephasing: scales ``T(m, n, h)`` by ``(1 - p)**(h/2)``."""
    if not 0 <= p <= 1:
        raise ParameterError(f"dephasing strength must lie in [0, 1], got {p}")
    return SymOperator(rho.basis, rho.coeffs * (1.0 - p) ** (rho.basis.hamming / 2))


def liouvillian(h: SymOperator, v: SymOperator | None = None, kappa: float = 0.0):
    """Sparse generator of ``d rho/dt = -i[h, rho] - kappa [v, [v, rho]]``."""
    gen = -1j * commutator_superop(h).tocsr()
    if v is not None and kappa:
        cv = commutator_superop(v).tocsr()
        gen = gen - kappa * (cv @ cv)
    return sp.csr_matrix(gen)


def _rk4(gen, y, t, steps):
    dt = t / steps
    for _ in range(steps):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * dt * k1)
        k3 = gen @ (y + 0.5 * dt * k2)
        k4 = gen @ (y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def evolve(gen, coeffs: np.ndarray, t: float, method: str = "expm", steps: int = 64,
           rtol: float = 1e-10, max_halvings: int = 10) -> np.ndarray:
    """Apply ``exp(gen * t)`` to a coefficient vector."""
    if t < 0:
        raise ParameterError("t must be non-negative")
    if t == 0:
        return coeffs.copy()
    if method == "expm":
        return expm_multiply(gen * t, coeffs)
    coarse = _rk4(gen, coeffs, t, steps)
    scale = max(np.linalg.norm(coeffs), 1e-300)
    for _ in range(max_halvings):
        steps *= 2
        fine = _rk4(gen, coeffs, t, steps)
        if np.linalg.norm(fine - coarse) <= rtol * scale:
            return fine
        coarse = fine
    warnings.warn(f"RK4 did not reach rtol={rtol} with {steps} steps", AccuracyWarning, stacklevel=2)
    return coarse


def propagate(rho0: SymOperator, h: SymOperator, v: SymOperator | None = None, kappa: float = 0.0,
              t: float = 0.0, steps: int | None = None, method: str = "expm") -> SymOperator:
    """Integrate ``d rho/dt = -i[h, rho] - kappa [v, [v, rho]]`` up to time ``t``.

    ``method="rk4"`` uses fixed-step RK4 starting from ``steps`` steps and
    doubling until successive results agree; an :class:`AccuracyWarning` is
    emitted if that fails.
    """
    if kappa < 0:
        raise ParameterError("kappa must be non-negative")
    gen = liouvillian(h, v, kappa)
    out = SymOperator(rho0.basis, evolve(gen, rho0.coeffs, t, method, steps or 64))
    drift = abs(out.trace() - rho0.trace())
    if drift > 1e-9 * max(1.0, abs(rho0.trace())):
        warnings.warn(f"trace drifted by {drift:.3e}", AccuracyWarning, stacklevel=2)
    return out


def _check_grid(phis):
    phis = np.asarray(phis, dtype=float)
    if phis.ndim != 1 or phis.size == 0:
        raise GridError("phase grid must be a non-empty 1-D sequence")
    if phis[0] < -1e-12 or phis[-1] > np.pi + 1e-12:
        raise GridError("phase grid must lie in [0, pi]")
    if np.any(np.diff(phis) <= 0):
        raise GridError("phase grid must be strictly ascending")
    return phis


def default_phase_grid(n_points: int = 181) -> np.ndarray:
    return np.linspace(0.0, np.pi, n_points)


def _reversal_generators(basis, config):
    h = dq_hamiltonian(basis, config.coupling)
    v = v_operator(basis, config.aht_coupling)
    blocks = [(liouvillian(-h, v, config.kappa), config.loops_reverse * config.cycle_time)]
    if config.plan == "echo-matched":
        rest = config.loops_prepare - config.loops_reverse
        blocks.append((liouvillian(-h), rest * config.cycle_time))
    return h, blocks


def prepare(rho_seed: SymOperator, config: EvolutionConfig) -> SymOperator:
    """Forward evolution for ``loops_prepare`` loops, then the configured dephasing."""
    h = dq_hamiltonian(rho_seed.basis, config.coupling)
    gen = liouvillian(h)
    rho = SymOperator(rho_seed.basis, evolve(gen, rho_seed.coeffs, config.loops_prepare * config.cycle_time,
                                             config.method, config.steps_per_loop * max(config.loops_prepare, 1)))
    if config.dephasing:
        rho = dephase(rho, config.dephasing)
    return rho


def phase_scan(rho_seed: SymOperator, config: EvolutionConfig, phis, method: str = "adjoint") -> np.ndarray:
    """Detected signal ``S(phi)`` for every phase in ``phis``.

    The state is prepared, rotated by ``phi`` about z, evolved backwards
    (with the jitter dissipator on the first ``loops_reverse`` loops),
    rotated back, and projected on the normalized ``Iz``.  The default
    ``"adjoint"`` method propagates the observable backwards once instead of
    propagating the state once per phase; ``"direct"`` does the latter.
    """
    phis = _check_grid(phis)
    basis = rho_seed.basis
    rho1 = prepare(rho_seed, config)
    _, blocks = _reversal_generators(basis, config)
    obs = thermal_state(basis.n_spins, basis)
    steps = config.steps_per_loop * max(config.loops_prepare, 1)
    if method == "adjoint":
        back = obs.coeffs
        for gen, t in reversed(blocks):
            back = evolve(gen.conj().T.tocsr(), back, t, config.method, steps)
        phases = np.exp(-1j * np.outer(phis, basis.orders))
        return np.real(phases @ (np.conj(back) * rho1.coeffs))
    if method != "direct":
        raise ParameterError("method must be 'adjoint' or 'direct'")
    out = np.empty(len(phis))
    for k, phi in enumerate(phis):
        x = rotate_z(rho1, phi).coeffs
        for gen, t in blocks:
            x = evolve(gen, x, t, config.method, steps)
        final = rotate_z(SymOperator(basis, x), -phi)
        out[k] = np.real(np.vdot(obs.coeffs, final.coeffs))
    return out


def spectrum_from_scan(signals, suppress_zero: bool = False, phis=None, n_spins: int | None = None,
                       max_order: int | None = None) -> CoherenceSpectrum:
    """Coherence-order intensities from a phase scan over ``[0, pi]``.

    The grid must be uniform.  A final point at ``phi = pi`` duplicates
    ``phi = 0`` for even orders and is dropped, leaving ``M`` periodic
    samples with spacing ``pi/M``.  Order ``q = 2j`` is read from the
    ``j``-th discrete Fourier coefficient; orders with ``|q| >= M`` alias,
    and odd orders are not resolvable on a half-period grid.  Intensities
    are coefficient magnitudes.  With ``suppress_zero`` the mean of the
    ``M`` periodic samples is subtracted and ``q = 0`` is reported as 0.
    Without ``phis`` the endpoint-inclusive grid ``linspace(0, pi, len)`` is
    assumed.
    """
    s = np.asarray(signals, dtype=float)
    if s.ndim != 1 or s.size < 2:
        raise ResolutionError("need at least two samples")
    phis = default_phase_grid(s.size) if phis is None else _check_grid(phis)
    if phis.shape != s.shape:
        raise GridError("signals and phases differ in length")
    if abs(phis[0]) > 1e-12:
        raise GridError("phase grid must start at 0")
    if abs(phis[-1] - np.pi) < 1e-12:
        s, phis = s[:-1], phis[:-1]
    m = s.size
    if m > 1 and not np.allclose(np.diff(phis), np.pi / m, rtol=1e-9, atol=1e-12):
        raise GridError("phase grid must be uniform with spacing pi/M")
    resolvable = (m - 1) - (m - 1) % 2
    if max_order is None:
        max_order = resolvable if n_spins is None else min(resolvable, n_spins - n_spins % 2)
    if max_order > resolvable or max_order >= m:
        raise ResolutionError(f"max_order {max_order} needs more than {m} samples on [0, pi)")
    if suppress_zero:
        s = s - s.mean()
    coeffs = np.fft.ifft(s)
    out = {}
    for q in range(-max_order, max_order + 1, 2):
        out[q] = float(abs(coeffs[(q // 2) % m]))
    if suppress_zero:
        out[0] = 0.0
    return CoherenceSpectrum(out, n_spins if n_spins is not None else max_order, zero_suppressed=suppress_zero)
