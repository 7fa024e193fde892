"""Seeded random instances and the oracle-equivalence run."""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .cones import is_pseudo_effective
from .lattice import DivisorClass, SurfaceLattice
from .models import del_pezzo
from .nonvanishing import AlgorithmTrace, nonvanish
from .verify import verify_trace

MAX_DENOMINATOR = 6


def random_effective(lattice: SurfaceLattice, rng: random.Random, density: float = 0.5,
                     max_numerator: int = 12) -> DivisorClass:
    """Nonnegative combination of listed curves with denominators <= 6."""
    coeffs = {}
    for i in range(len(lattice.curves)):
        if rng.random() < density:
            coeffs[i] = Fraction(rng.randint(1, max_numerator), rng.randint(1, MAX_DENOMINATOR))
    return lattice.combination(coeffs)


def sample_instance(lattice: SurfaceLattice, rng: random.Random, max_tries: int = 10_000) -> DivisorClass:
    """Rejection-sample L until K + L is pseudo-effective."""
    for _ in range(max_tries):
        L = random_effective(lattice, rng)
        if is_pseudo_effective(lattice, lattice.canonical + L):
            return L
    raise RuntimeError("rejection sampling did not find an instance")


@dataclass
class InstanceResult:
    index: int
    r: int
    L: DivisorClass
    ok: bool
    oracle: bool
    verified: bool
    message: str = ""
    trace: AlgorithmTrace | None = None
    lattice: SurfaceLattice | None = None
    certificate: object = None


@dataclass
class SuiteReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.ok and r.oracle and r.verified)

    def __bool__(self):
        return self.passed == len(self.results)


def _instance_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


def run_instance(seed: int, index: int, ranks=range(1, 7)) -> InstanceResult:
    rng = random.Random(_instance_seed(seed, index))
    ranks = list(ranks)
    r = ranks[index % len(ranks)]
    lattice = del_pezzo(r)
    L = sample_instance(lattice, rng)
    try:
        cert, trace = nonvanish(lattice, L)
    except Exception as exc:  # reported, not raised: the suite counts failures
        return InstanceResult(index, r, L, False, False, False, f"{type(exc).__name__}: {exc}", lattice=lattice)
    target = lattice.canonical + L
    oracle = bool(is_pseudo_effective(lattice, target)) and cert.total() == target
    check = verify_trace(lattice, cert, trace)
    return InstanceResult(index, r, L, True, oracle, bool(check), check.reason, trace, lattice, cert)


def run_suite(instances: int = 100, seed: int = 0, workers: int = 1) -> SuiteReport:
    """Instances cycle through r = 1..6; each has its own derived seed."""
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda i: run_instance(seed, i), range(instances)))
    else:
        results = [run_instance(seed, i) for i in range(instances)]
    return SuiteReport(results)
