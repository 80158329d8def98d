"""Randomized comparisons of the symmetric engine against the exact simulator."""
from __future__ import annotations

import numpy as np

from . import oracle
from .basis import SymmetricBasis, SymOperator, collective, enumerate_basis, multiply
from .dynamics import dephase, propagate, rotate_z
from .metrology import qfi
from .oracle import ComparisonRecord
from .states import coherence_spectrum


def random_operator(basis: SymmetricBasis, rng: np.random.Generator, hermitian: bool = False) -> SymOperator:
    c = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    op = SymOperator(basis, c)
    if hermitian:
        op = (op + op.dag()) * 0.5
    return op


def random_state(basis: SymmetricBasis, rng: np.random.Generator, rank_mix: float = 0.1) -> SymOperator:
    """Random full-rank symmetric density operator."""
    a = random_operator(basis, rng)
    rho = multiply(a, a.dag())
    rho = rho / rho.trace().real
    from .states import maximally_mixed

    return rho * (1 - rank_mix) + maximally_mixed(basis) * rank_mix


def check_multiply(n, rng):
    b = enumerate_basis(n)
    x, y = random_operator(b, rng), random_operator(b, rng)
    dev = np.abs(oracle.embed(multiply(x, y)) - oracle.embed(x) @ oracle.embed(y)).max()
    return ComparisonRecord("multiply", n, 1e-10, float(dev))


def check_rotate_z(n, rng):
    b = enumerate_basis(n)
    rho = random_state(b, rng)
    phi = rng.uniform(0, 2 * np.pi)
    u = np.diag(np.exp(-1j * phi * np.diag(oracle.collective_op(n, "z"))))
    dev = np.abs(oracle.embed(rotate_z(rho, phi)) - u @ oracle.embed(rho) @ u.conj().T).max()
    return ComparisonRecord("rotate_z", n, 1e-12, float(dev))


def check_dephase(n, rng):
    b = enumerate_basis(n)
    rho = random_state(b, rng)
    p = rng.uniform()
    dev = np.abs(oracle.embed(dephase(rho, p)) - oracle.dephase_kraus(oracle.embed(rho), p)).max()
    return ComparisonRecord("dephase", n, 1e-10, float(dev))


def check_propagate(n, rng):
    b = enumerate_basis(n)
    rho = random_state(b, rng)
    h = random_operator(b, rng, hermitian=True)
    v = random_operator(b, rng, hermitian=True)
    h, v = h / h.norm(), v / v.norm()
    kappa, t = rng.uniform(0, 0.5), rng.uniform(0.1, 2.0)
    ours = oracle.embed(propagate(rho, h, v, kappa, t))
    ref = oracle.lindblad_evolve(oracle.embed(rho), oracle.embed(h), oracle.embed(v), kappa, t)
    return ComparisonRecord("propagate", n, 1e-8, oracle.trace_distance(ours, ref))


def check_coherence_spectrum(n, rng):
    b = enumerate_basis(n)
    rho = random_state(b, rng)
    spec = coherence_spectrum(rho)
    zeros = n - np.bitwise_count(np.arange(2 ** n, dtype=np.uint64)).astype(int)
    order = zeros[:, None] - zeros[None, :]
    w = np.abs(oracle.embed(rho)) ** 2
    dev = max(abs(spec[q] - w[order == q].sum()) for q in range(-n, n + 1))
    return ComparisonRecord("coherence_spectrum", n, 1e-10, float(dev))


def check_qfi(n, rng):
    b = enumerate_basis(n)
    rho = random_state(b, rng)
    ours = qfi(rho, collective(b, "z"))
    ref = oracle.qfi_exact(oracle.embed(rho), oracle.collective_op(n, "z"))
    return ComparisonRecord("qfi", n, 1e-6, abs(ours - ref) / max(abs(ref), 1e-300))


def check_aht(n, rng):
    """Zero-error cycle average against the double-quantum form, random couplings."""
    d = np.triu(rng.normal(size=(n, n)), 1)
    system = oracle.SpinSystem(d + d.T)
    seq = oracle.eight_pulse_cycle(1.5e-6, 2.9e-6, delta_pulses=True)
    avg = oracle.toggling_average(system, seq)
    ref = oracle.h_dq(system)
    return ComparisonRecord("aht", n, 1e-12, float(np.abs(avg - ref).max() / np.abs(ref).max()))


CHECKS = {
    "multiply": check_multiply,
    "rotate_z": check_rotate_z,
    "dephase": check_dephase,
    "propagate": check_propagate,
    "coherence_spectrum": check_coherence_spectrum,
    "qfi": check_qfi,
    "aht": check_aht,
}


def run_checks(n_values, samples: int, seed: int = 0, names=None) -> list[ComparisonRecord]:
    """``samples`` randomized comparisons per check and system size.

    Each (check, size, sample) triple gets its own generator, so results do
    not depend on the order in which checks run.
    """
    names = list(names or CHECKS)
    out = []
    keys = list(CHECKS)
    for name in names:
        for n in n_values:
            for s in range(samples):
                rng = np.random.default_rng([seed, keys.index(name), n, s])
                out.append(CHECKS[name](n, rng))
    return out
