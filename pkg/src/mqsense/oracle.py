"""Exact small-system simulator used to validate the symmetric engine.

Operators here are dense ``2**N x 2**N`` arrays in the computational basis
with ``|0>`` = spin up, site 0 the most significant tensor factor.

Coupling conventions
--------------------
``SpinSystem.couplings`` holds the ``d_ij`` of the secular dipolar
Hamiltonian ``H_dd = sum_{i != j} d_ij (3 Iz_i Iz_j - I_i . I_j)``.  The
toggling-frame Hamiltonians ``h_z``/``h_y`` and ``V`` use pair sums over
``i < j`` with ``d'_ij = 4 d_ij``, which makes ``h_z == h_dd``.  With this
choice the zeroth-order average over the eight-pulse cycle is the
double-quantum Hamiltonian ``-(1/2) sum_{i != j} d_ij (I+I+ + I-I-)`` with
the *same* ``d_ij`` (checked in the tests).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, expm_multiply

from .basis import SX, SY, SZ, SPLUS, SMINUS, SymmetricBasis, SymOperator
from .errors import InputError, ParameterError, SizeError

MAX_SPINS = 12
AHT_SCALE = 4.0  # d' = AHT_SCALE * d

_AXES = {"x": SX, "y": SY, "z": SZ, "+": SPLUS, "-": SMINUS}


def _check_size(n_spins):
    if not 1 <= n_spins <= MAX_SPINS:
        raise SizeError(f"oracle supports 1..{MAX_SPINS} spins, got {n_spins}")


def site_op(single: np.ndarray, site: int, n_spins: int) -> np.ndarray:
    _check_size(n_spins)
    eye = np.eye(2, dtype=complex)
    return reduce(np.kron, [single if k == site else eye for k in range(n_spins)])


def collective_op(n_spins: int, axis: str) -> np.ndarray:
    single = _AXES[axis]
    return sum(site_op(single, i, n_spins) for i in range(n_spins))


def _popcount(x):
    return np.bitwise_count(x).astype(np.int64)


def _label_grid(n_spins):
    dim = 2 ** n_spins
    x = np.arange(dim, dtype=np.uint64)
    zeros = n_spins - _popcount(x)
    ham = _popcount(x[:, None] ^ x[None, :])
    return zeros[:, None], zeros[None, :], ham


def embed(op: SymOperator) -> np.ndarray:
    """Dense computational-basis matrix of a symmetric operator."""
    basis = op.basis
    _check_size(basis.n_spins)
    m, n, h = _label_grid(basis.n_spins)
    ns = basis.n_spins
    lookup = np.full((ns + 1, ns + 1, ns + 1), -1, dtype=np.int64)
    lookup[basis.labels[:, 0], basis.labels[:, 1], basis.labels[:, 2]] = np.arange(basis.dim)
    idx = lookup[m, n, h]
    return op.coeffs[idx] / basis.norms[idx]


def project(matrix: np.ndarray, basis: SymmetricBasis) -> SymOperator:
    """Orthogonal projection of a dense operator onto the symmetric subspace."""
    ns = basis.n_spins
    _check_size(ns)
    m, n, h = _label_grid(ns)
    m, n = np.broadcast_to(m, h.shape), np.broadcast_to(n, h.shape)
    flat = (m * (ns + 1) + n) * (ns + 1) + h
    sums = np.bincount(flat.ravel(), weights=matrix.real.ravel(), minlength=(ns + 1) ** 3)
    sums = sums + 1j * np.bincount(flat.ravel(), weights=matrix.imag.ravel(), minlength=(ns + 1) ** 3)
    lab = basis.labels
    coeffs = sums[(lab[:, 0] * (ns + 1) + lab[:, 1]) * (ns + 1) + lab[:, 2]] / basis.norms
    return SymOperator(basis, coeffs)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# --- Hamiltonians --------------------------------------------------------------


@dataclass(frozen=True)
class SpinSystem:
    """Dipolar-coupled spins; ``couplings[i, j]`` in rad/s, zero diagonal."""

    couplings: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.couplings, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InputError("couplings must be a square matrix")
        _check_size(d.shape[0])
        if not np.allclose(d, d.T) or np.any(np.diag(d) != 0):
            raise InputError("couplings must be symmetric with zero diagonal")
        object.__setattr__(self, "couplings", d)

    @classmethod
    def uniform(cls, n_spins: int, d: float) -> "SpinSystem":
        return cls(d * (np.ones((n_spins, n_spins)) - np.eye(n_spins)))

    @property
    def n_spins(self) -> int:
        return self.couplings.shape[0]

    @property
    def aht_couplings(self) -> np.ndarray:
        return AHT_SCALE * self.couplings


def _pair_sum(system, couplings, a, b, ordered):
    ns = system.n_spins
    out = 0
    for i in range(ns):
        for j in range(ns):
            if i == j or (not ordered and j < i) or couplings[i, j] == 0:
                continue
            out = out + couplings[i, j] * site_op(a, i, ns) @ site_op(b, j, ns)
    return out if not np.isscalar(out) else np.zeros((2 ** ns, 2 ** ns), dtype=complex)


def h_dd(system: SpinSystem) -> np.ndarray:
    d = system.couplings
    zz = _pair_sum(system, d, SZ, SZ, True)
    dot = sum(_pair_sum(system, d, s, s, True) for s in (SX, SY, SZ))
    return 3 * zz - dot


def _h_axis(system, main, others):
    dp = system.aht_couplings
    out = _pair_sum(system, dp, main, main, False)
    for s in others:
        out = out - 0.5 * _pair_sum(system, dp, s, s, False)
    return out


def h_z(system: SpinSystem) -> np.ndarray:
    return _h_axis(system, SZ, (SY, SX))


def h_y(system: SpinSystem) -> np.ndarray:
    return _h_axis(system, SY, (SZ, SX))


def h_dq(system: SpinSystem) -> np.ndarray:
    d = system.couplings
    return -0.5 * (_pair_sum(system, d, SPLUS, SPLUS, True) + _pair_sum(system, d, SMINUS, SMINUS, True))


def v_full(system: SpinSystem) -> np.ndarray:
    dp = system.aht_couplings
    return 1.5 * (_pair_sum(system, dp, SY, SZ, False) + _pair_sum(system, dp, SZ, SY, False))


def commutator(a, b):
    return a @ b - b @ a


# --- pulse sequences --------------------------------------------------------------

_PULSE_AXES = {"+x": (SX, 1.0), "-x": (SX, -1.0), "+y": (SY, 1.0), "-y": (SY, -1.0)}


@dataclass(frozen=True)
class Delay:
    duration: float


@dataclass(frozen=True)
class Pulse:
    axis: str
    angle: float
    width: float


@dataclass(frozen=True)
class PulseSequence:
    """Timed delay/pulse events of one cycle.

    ``delta_pulses`` marks the idealized limit in which pulses are
    instantaneous rotations and their ``width`` is bookkeeping only.
    """

    events: tuple
    delta: float
    tau: float
    delta_pulses: bool = False

    def __post_init__(self):
        for ev in self.events:
            if isinstance(ev, Delay) and ev.duration <= 0:
                raise ParameterError("delays must be positive")
            if isinstance(ev, Pulse):
                if ev.axis not in _PULSE_AXES:
                    raise ParameterError(f"unknown pulse axis {ev.axis!r}")
                if not self.delta_pulses and ev.width <= 0:
                    raise ParameterError("finite pulses need a positive width")

    @property
    def delta_prime(self) -> float:
        return 2 * self.delta + (0.0 if self.delta_pulses else self.tau)

    @property
    def pulses(self) -> list[Pulse]:
        return [ev for ev in self.events if isinstance(ev, Pulse)]

    @property
    def free_time(self) -> float:
        return sum(ev.duration for ev in self.events if isinstance(ev, Delay))

    @property
    def cycle_time(self) -> float:
        pulse_time = 0.0 if self.delta_pulses else sum(p.width for p in self.pulses)
        return self.free_time + pulse_time

    def interval_weights(self) -> np.ndarray:
        """Durations between pulse centres (half pulse widths attached to each side)."""
        weights = []
        cur = 0.0
        for k, ev in enumerate(self.events):
            if isinstance(ev, Delay):
                cur += ev.duration
            else:
                half = 0.0 if self.delta_pulses else ev.width / 2
                weights.append(cur + half)
                cur = half
        weights.append(cur)
        return np.array(weights)


def eight_pulse_cycle(delta: float, tau: float, delta_pulses: bool = False) -> PulseSequence:
    """Eight pi/2 pulses (four about +x, four about -x) with delays
    ``Delta/2, Delta', Delta, Delta', Delta, Delta', Delta, Delta', Delta/2``
    and ``Delta' = 2 Delta + tau`` (``2 Delta`` for delta pulses).
    """
    if delta <= 0 or tau <= 0:
        raise ParameterError("delta and tau must be positive")
    dprime = 2 * delta + (0.0 if delta_pulses else tau)
    delays = [delta / 2, dprime, delta, dprime, delta, dprime, delta, dprime, delta / 2]
    axes = ["+x"] * 4 + ["-x"] * 4
    events = [Delay(delays[0])]
    for ax, dl in zip(axes, delays[1:]):
        events.append(Pulse(ax, np.pi / 2, tau))
        events.append(Delay(dl))
    return PulseSequence(tuple(events), delta, tau, delta_pulses)


def _rotation(axis, angle):
    single, sign = _PULSE_AXES[axis]
    return sla.expm(-1j * sign * angle * single)


def _collective_rotation(axis, angle, n_spins):
    r = _rotation(axis, angle)
    return reduce(np.kron, [r] * n_spins)


def toggling_average(system: SpinSystem, sequence: PulseSequence, eps=None, split: bool = False):
    """Time-weighted average of the toggling-frame Hamiltonians of one cycle.

    ``eps[k]`` is the flip-angle error (radians) of pulse ``k``.  The
    toggled Hamiltonians are exact; the average is the zeroth-order average
    Hamiltonian of the cycle with those errors.  With ``split=True`` a dict
    ``{"z": ..., "y": ...}`` of the contributions from frames whose nominal
    form is ``h_z``/``h_y`` is returned (x-axis sequences only).
    """
    pulses = sequence.pulses
    eps = np.zeros(len(pulses)) if eps is None else np.asarray(eps, dtype=float)
    if eps.shape != (len(pulses),):
        raise ParameterError(f"expected {len(pulses)} errors, got {eps.shape}")
    ns = system.n_spins
    h = h_dd(system)
    weights = sequence.interval_weights()
    total = weights.sum()
    cum = np.eye(2 ** ns, dtype=complex)
    parts = {"z": np.zeros_like(h), "y": np.zeros_like(h)}
    nominal = 0.0
    for k, w in enumerate(weights):
        toggled = cum.conj().T @ h @ cum
        if split:
            if any(p.axis not in ("+x", "-x") for p in pulses):
                raise ParameterError("split averaging needs an x-axis sequence")
            quarter = int(round(nominal / (np.pi / 2)))
            parts["z" if quarter % 2 == 0 else "y"] += w * toggled / total
        else:
            parts["z"] += w * toggled / total
        if k < len(pulses):
            p = pulses[k]
            cum = _collective_rotation(p.axis, p.angle + eps[k], ns) @ cum
            nominal += _PULSE_AXES[p.axis][1] * p.angle
    if split:
        return parts
    return parts["z"]


# Coefficient rows of the first-order error Hamiltonian, multiplying eps_k in
# front of [Ix, H_y] and [Ix, H_z].  The derived rows follow from summing the
# weighted toggled frames; the reference y row differs in the sixth entry.
HERR_Y_ROW = np.array([8, 6, 6, 4, -4, -2, -2, 0], dtype=float)
HERR_Z_ROW = 0.5 * np.array([7, 7, 5, 5, -3, -3, -1, -1], dtype=float)
HERR_Y_ROW_REFERENCE = np.array([8, 6, 6, 4, -4, -4, -2, 0], dtype=float)
HERR_Z_ROW_REFERENCE = HERR_Z_ROW.copy()


def _herr_rows(reference):
    return (HERR_Y_ROW_REFERENCE, HERR_Z_ROW_REFERENCE) if reference else (HERR_Y_ROW, HERR_Z_ROW)


def h_err(system: SpinSystem, eps, reference: bool = False) -> np.ndarray:
    """Closed-form first-order error Hamiltonian of the eight-pulse cycle,
    including the ``i/12`` prefactor of the averaged toggled frames."""
    eps = np.asarray(eps, dtype=float)
    ix = collective_op(system.n_spins, "x")
    cy = commutator(ix, h_y(system))
    cz = commutator(ix, h_z(system))
    y_row, z_row = _herr_rows(reference)
    return 1j / 12 * (y_row @ eps * cy + z_row @ eps * cz)


def jitter_weights(reference: bool = False) -> np.ndarray:
    """Per-pulse weights ``w_k`` with ``H_err = (1/12) (sum_k w_k eps_k) V``."""
    y_row, z_row = _herr_rows(reference)
    return z_row - y_row


# --- exact propagation ----------------------------------------------------------


class _CycleFactors:
    """Pre-diagonalized pieces of one cycle for fast repeated propagation."""

    def __init__(self, system: SpinSystem, sequence: PulseSequence):
        self.system = system
        self.sequence = sequence
        ns = system.n_spins
        h = h_dd(system)
        self.h = h
        evals, evecs = np.linalg.eigh(h)
        self.delays = [evecs @ np.diag(np.exp(-1j * evals * ev.duration)) @ evecs.conj().T
                       if isinstance(ev, Delay) else None for ev in sequence.events]
        self.pulse_eig = {}
        for p in sequence.pulses:
            if p.axis in self.pulse_eig:
                continue
            single, sign = _PULSE_AXES[p.axis]
            gen = sign * collective_op(ns, "x" if single is SX else "y")
            if sequence.delta_pulses:
                w, v = np.linalg.eigh(gen)
                self.pulse_eig[p.axis] = (w, v, 1.0)
            else:
                omega1 = p.angle / p.width
                w, v = np.linalg.eigh(h + omega1 * gen)
                self.pulse_eig[p.axis] = (w, v, omega1)

    def pulse_phases(self, pulse: Pulse, deviation):
        """Eigenphases of one pulse for width deviations ``deviation`` (seconds)."""
        w, v, omega1 = self.pulse_eig[pulse.axis]
        deviation = np.asarray(deviation, dtype=float)
        if self.sequence.delta_pulses:
            angle = pulse.angle * (1.0 + deviation / pulse.width)
            return np.exp(-1j * np.multiply.outer(angle, w))
        return np.exp(-1j * np.multiply.outer(pulse.width + deviation, w))


def cycle_propagator(system: SpinSystem, sequence: PulseSequence, deviations=None) -> np.ndarray:
    """Exact unitary of one cycle; ``deviations[k]`` is the width error of pulse ``k`` (s)."""
    fac = _CycleFactors(system, sequence)
    pulses = sequence.pulses
    deviations = np.zeros(len(pulses)) if deviations is None else np.asarray(deviations, dtype=float)
    u = np.eye(2 ** system.n_spins, dtype=complex)
    k = 0
    for ev, dmat in zip(sequence.events, fac.delays):
        if dmat is not None:
            u = dmat @ u
        else:
            w, v, _ = fac.pulse_eig[ev.axis]
            ph = fac.pulse_phases(ev, deviations[k])
            u = v @ (ph[:, None] * (v.conj().T @ u))
            k += 1
    return u


def toggling_cycle_propagator(system: SpinSystem, sequence: PulseSequence, deviations=None) -> np.ndarray:
    """``U_rf^dag U`` for one cycle: the coupled cycle with the net rotation of
    the same pulses, without couplings, taken out."""
    free = SpinSystem(np.zeros_like(system.couplings))
    rf = cycle_propagator(free, sequence, deviations)
    return rf.conj().T @ cycle_propagator(system, sequence, deviations)


def floquet_hamiltonian(system: SpinSystem, sequence: PulseSequence, deviations=None) -> np.ndarray:
    """Exact effective Hamiltonian ``i log(W) / T`` of one toggling-frame cycle.

    Without deviations ``W`` is the plain cycle propagator, since the
    nominal pulses of the cycle compose to the identity.
    """
    u = toggling_cycle_propagator(system, sequence, deviations)
    h = 1j * sla.logm(u) / sequence.cycle_time
    return 0.5 * (h + h.conj().T)


def jitter_mean_shift(system: SpinSystem, sequence: PulseSequence, amplitude: float,
                      step: float | None = None) -> np.ndarray:
    """Second-order mean correction to the effective Hamiltonian under jitter.

    For i.i.d. zero-mean width deviations of variance ``amplitude**2 / 12``
    the mean of ``floquet_hamiltonian(deviations)`` is, to second order,
    ``H_F + (var/2) sum_k d^2 H_F / d dev_k^2``; the returned matrix is the
    second term, evaluated by central differences.
    """
    pulses = sequence.pulses
    step = step if step is not None else 1e-2 * min(p.width for p in pulses)
    h0 = floquet_hamiltonian(system, sequence)
    out = np.zeros_like(h0)
    for k in range(len(pulses)):
        dev = np.zeros(len(pulses))
        dev[k] = step
        out += floquet_hamiltonian(system, sequence, dev) + floquet_hamiltonian(system, sequence, -dev) - 2 * h0
    return out * (amplitude ** 2 / 12) / (2 * step ** 2)


@dataclass(frozen=True)
class JitterModel:
    """Pulse widths drawn uniformly from ``[tau - amplitude/2, tau + amplitude/2]``."""

    amplitude: float
    tau: float
    seed: int = 0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ParameterError("jitter amplitude must be non-negative")

    def deviations(self, sample: int, shape) -> np.ndarray:
        rng = np.random.default_rng([self.seed, sample])
        return rng.uniform(-self.amplitude / 2, self.amplitude / 2, size=shape)


def _fixed_factors(fac, dim):
    """Matrices between successive pulse eigenbases, and the final one."""
    fixed = []
    left = np.eye(dim, dtype=complex)
    for ev, dmat in zip(fac.sequence.events, fac.delays):
        if dmat is not None:
            left = dmat @ left
        else:
            _, v, _ = fac.pulse_eig[ev.axis]
            fixed.append(v.conj().T @ left)
            left = v
    fixed.append(left)
    return fixed


def _batched_cycle(fac, fixed, devs):
    """One-cycle unitaries ``(b, dim, dim)`` for width deviations ``devs`` of shape ``(b, n_pulses)``."""
    dim = fixed[0].shape[0]
    b = devs.shape[0]
    u = np.tile(np.eye(dim, dtype=complex)[:, None, :], (1, b, 1))  # (dim, b, dim)
    for k, p in enumerate(fac.sequence.pulses):
        u = (fixed[k] @ u.reshape(dim, -1)).reshape(dim, b, dim)
        u *= fac.pulse_phases(p, devs[:, k]).T[:, :, None]
    u = (fixed[-1] @ u.reshape(dim, -1)).reshape(dim, b, dim)
    return u.transpose(1, 0, 2)


def _batched_cycles(fac, devs, rf=None):
    """Unitaries ``(b, dim, dim)`` of ``devs.shape[1]`` cycles for each of ``b`` samples.

    With ``rf`` given, each cycle is left-multiplied by the inverse of the
    coupling-free cycle with the same deviations.
    """
    dim = 2 ** fac.system.n_spins
    fixed = _fixed_factors(fac, dim)
    rf_fixed = _fixed_factors(rf, dim) if rf is not None else None
    b, n_cycles, _ = devs.shape
    u = np.tile(np.eye(dim, dtype=complex), (b, 1, 1))
    for c in range(n_cycles):
        step = _batched_cycle(fac, fixed, devs[:, c])
        if rf is not None:
            step = np.conj(np.swapaxes(_batched_cycle(rf, rf_fixed, devs[:, c]), 1, 2)) @ step
        u = step @ u
    return u


def monte_carlo_jitter(rho0: np.ndarray, system: SpinSystem, sequence: PulseSequence,
                       jitter: JitterModel, n_cycles: int, n_samples: int,
                       antithetic: bool = False, frame: str = "toggling",
                       batch_size: int = 1024) -> np.ndarray:
    """Ensemble-averaged state after ``n_cycles`` jittered cycles.

    Every sample draws fresh i.i.d. width deviations for every pulse of every
    cycle from a generator seeded by ``(seed, sample_index)``, so the result
    does not depend on ``batch_size``.  With ``antithetic=True`` odd samples
    reuse the negated deviations of the preceding even sample.

    ``frame="lab"`` returns the plain ensemble average.  ``frame="toggling"``
    removes, cycle by cycle, the net rotation the jittered pulses would
    produce without couplings, i.e. it propagates with ``U_rf(eps_c)^dag
    U(eps_c)`` for cycle ``c``.  This is the per-cycle toggling frame in
    which the average-Hamiltonian error term, and hence the dissipator, is
    defined.  In the lab frame each cycle also carries a collective kick
    about x that is first order in the flip-angle errors and independent of
    the couplings; those kicks accumulate as a random walk.
    """
    if n_samples < 1 or n_cycles < 0:
        raise ParameterError("need n_samples >= 1 and n_cycles >= 0")
    if antithetic and n_samples % 2:
        raise ParameterError("antithetic sampling needs an even sample count")
    if frame not in ("lab", "toggling"):
        raise ParameterError("frame must be 'lab' or 'toggling'")
    fac = _CycleFactors(system, sequence)
    rf = _CycleFactors(SpinSystem(np.zeros_like(system.couplings)), sequence) if frame == "toggling" else None
    n_p = len(sequence.pulses)
    dim = 2 ** system.n_spins

    acc = np.zeros((dim, dim), dtype=complex)
    for start in range(0, n_samples, batch_size):
        idx = np.arange(start, min(start + batch_size, n_samples))
        devs = np.empty((len(idx), n_cycles, n_p))
        for j, s in enumerate(idx):
            if antithetic:
                devs[j] = (-1) ** (s % 2) * jitter.deviations(s - s % 2, (n_cycles, n_p))
            else:
                devs[j] = jitter.deviations(s, (n_cycles, n_p))
        ub = _batched_cycles(fac, devs, rf)
        acc += np.einsum("bij,jk,blk->il", ub, rho0, ub.conj())
    return acc / n_samples


def unitary_evolve(rho: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    u = sla.expm(-1j * h * t)
    return u @ rho @ u.conj().T


def lindblad_evolve(rho: np.ndarray, h: np.ndarray, v: np.ndarray, kappa: float, t: float) -> np.ndarray:
    """``d rho/dt = -i[h, rho] - kappa [v, [v, rho]]`` by the exponential of the
    Liouvillian, applied matrix-free."""
    dim = h.shape[0]

    def gen(x, sign=1.0):
        x = x.reshape(dim, dim)
        cv = v @ x - x @ v
        return t * (-1j * sign * (h @ x - x @ h) - kappa * (v @ cv - cv @ v)).reshape(-1)

    # the adjoint (needed for norm estimation) flips the Hamiltonian part
    op = LinearOperator((dim * dim, dim * dim), matvec=gen, rmatvec=lambda x: gen(x, -1.0), dtype=complex)
    # trace of the generator: tr C_h = 0 and tr C_v^2 = 2 dim tr(v^2) - 2 |tr v|^2
    tr = -kappa * (2 * dim * np.trace(v @ v) - 2 * abs(np.trace(v)) ** 2)
    out = expm_multiply(op, rho.reshape(-1).astype(complex), traceA=tr * t)
    return out.reshape(dim, dim)


# --- channels and Fisher information --------------------------------------------


def kraus_operators(p: float, reference: bool = False):
    """Per-spin dephasing Kraus pair.

    The trace-preserving pair is ``diag(1, sqrt(1-p))``, ``diag(0, sqrt(p))``;
    ``reference=True`` returns ``diag(0, p)`` for the second element, which is
    not trace preserving for ``0 < p < 1``.
    """
    if not 0 <= p <= 1:
        raise ParameterError("p must lie in [0, 1]")
    e1 = np.diag([1.0, np.sqrt(1 - p)]).astype(complex)
    e2 = np.diag([0.0, p if reference else np.sqrt(p)]).astype(complex)
    return e1, e2


def dephase_kraus(rho: np.ndarray, p: float, reference: bool = False) -> np.ndarray:
    """Apply the product of per-spin dephasing channels."""
    dim = rho.shape[0]
    ns = int(round(np.log2(dim)))
    _check_size(ns)
    kraus = kraus_operators(p, reference)
    t = rho.reshape((2,) * (2 * ns))
    for i in range(ns):
        new = 0
        for e in kraus:
            x = np.moveaxis(np.tensordot(e, t, axes=(1, i)), 0, i)
            x = np.moveaxis(np.tensordot(x, e.conj(), axes=(ns + i, 0)), -1, ns + i)
            new = new + x
        t = new
    return t.reshape(dim, dim)


def qfi_exact(rho: np.ndarray, generator: np.ndarray, cutoff: float = 1e-12) -> float:
    """Spectral QFI ``2 sum (l_i - l_j)^2 / (l_i + l_j) |G_ij|^2``."""
    if not np.allclose(rho, rho.conj().T, atol=1e-12):
        raise InputError("rho must be Hermitian")
    lam, vec = np.linalg.eigh(rho)
    if lam.min() < -1e-10 * max(1.0, abs(lam).max()):
        raise InputError("rho must be positive semidefinite")
    g = vec.conj().T @ generator @ vec
    s = lam[:, None] + lam[None, :]
    d = lam[:, None] - lam[None, :]
    keep = s > cutoff
    return float(2 * np.sum(np.where(keep, d ** 2 / np.where(keep, s, 1.0), 0.0) * np.abs(g) ** 2))


@dataclass
class ComparisonRecord:
    test: str
    n_spins: int
    tolerance: float
    max_deviation: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.max_deviation < self.tolerance)

    def to_dict(self) -> dict:
        return {"test": self.test, "n_spins": self.n_spins, "tolerance": self.tolerance,
                "max_deviation": self.max_deviation, "pass": self.passed}
