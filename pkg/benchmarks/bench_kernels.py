"""Compare the compiled and numpy structure-constant kernels.

Run with ``python3 benchmarks/bench_kernels.py [N ...]``.  For each spin
count it times (a) every structure-constant block of the basis and (b) the
assembly of the commutator superoperator of the double-quantum Hamiltonian
from a cold block cache, once per backend.
"""
import sys
import time

import numpy as np

from mqsense import kernels
from mqsense.basis import SymmetricBasis, binomial_table, commutator_superop
from mqsense.dynamics import dq_hamiltonian


def all_blocks(fn, n):
    binom = binomial_table(n)
    t0 = time.perf_counter()
    total = 0.0
    for m1 in range(n + 1):
        for n1 in range(n + 1):
            for n2 in range(n + 1):
                total += float(np.sum(fn(n, m1, n1, n2, binom)))
    return time.perf_counter() - t0, total


def assembly(fn, n):
    saved = kernels.chi_block
    kernels.chi_block = fn
    try:
        basis = SymmetricBasis(n)  # fresh instance, empty block cache
        h = dq_hamiltonian(basis, 1.0)
        t0 = time.perf_counter()
        commutator_superop(h)
        return time.perf_counter() - t0
    finally:
        kernels.chi_block = saved


def main(sizes):
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the numpy kernel can be timed")
    backends = {"numpy": kernels.python_chi_block}
    if kernels.BACKEND == "cython":
        backends["cython"] = kernels.chi_block
    print(f"{'N':>4} {'backend':>8} {'all blocks (s)':>15} {'superop (s)':>12}")
    for n in sizes:
        checks = {}
        for name, fn in backends.items():
            t_blocks, checks[name] = all_blocks(fn, n)
            t_asm = assembly(fn, n)
            print(f"{n:>4} {name:>8} {t_blocks:>15.4f} {t_asm:>12.4f}")
        if len(checks) == 2 and not np.isclose(*checks.values(), rtol=1e-12):
            raise SystemExit(f"backends disagree at N={n}")


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [8, 16, 24])
