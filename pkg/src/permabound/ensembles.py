"""Seeded random matrix ensembles.

Every trial draws from its own counter-based stream keyed by ``(seed, trial)``,
so results do not depend on the order in which trials are scheduled.
"""

from __future__ import annotations

import numpy as np

from .core import ColumnPartition, PermaboundError

ENSEMBLES = (
    "gaussian-complex",
    "bernoulli01",
    "block-constant-modulus",
    "rank-one-phase",
    "paired-columns",
    "identical-rows",
)


class UnknownEnsembleError(PermaboundError):
    pass


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def gaussian_complex(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def unit_phases(rng: np.random.Generator, size) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(size))


def _block_of(n: int, partition: ColumnPartition) -> np.ndarray:
    owner = np.empty(n, dtype=int)
    for k, b in enumerate(partition.blocks):
        owner[list(b.indices)] = k
    return owner


def block_constant_modulus(rng, n: int, partition: ColumnPartition) -> np.ndarray:
    """Random phases, moduli depending only on (row, block)."""
    owner = _block_of(n, partition)
    mod = rng.exponential(size=(n, len(partition)))
    return mod[:, owner] * unit_phases(rng, (n, n))


def rank_one_phase(rng, n: int, partition: ColumnPartition) -> np.ndarray:
    """``xi_j zeta_r y_k``: unit row and column phases, one positive modulus per block."""
    owner = _block_of(n, partition)
    y = rng.uniform(0.5, 2.0, size=len(partition))
    return np.outer(unit_phases(rng, n), unit_phases(rng, n)) * y[owner]


def sample(name: str, rng: np.random.Generator, n: int,
           partition: ColumnPartition | None = None) -> np.ndarray:
    """One ``n x n`` draw from the named ensemble.

    ``paired-columns`` copies column 0 into column 1 and ``identical-rows``
    repeats one row; both are nonnegative real.
    """
    if partition is None:
        partition = ColumnPartition.singletons(n)
    if name == "gaussian-complex":
        return gaussian_complex(rng, n)
    if name == "bernoulli01":
        return rng.integers(0, 2, size=(n, n)).astype(np.complex128)
    if name == "block-constant-modulus":
        return block_constant_modulus(rng, n, partition)
    if name == "rank-one-phase":
        return rank_one_phase(rng, n, partition)
    if name == "paired-columns":
        z = rng.random((n, n))
        if n >= 2:
            z[:, 1] = z[:, 0]
        return z.astype(np.complex128)
    if name == "identical-rows":
        row = rng.random(n)
        return np.tile(row, (n, 1)).astype(np.complex128)
    raise UnknownEnsembleError(f"unknown ensemble {name!r}; choose from {', '.join(ENSEMBLES)}")


def random_partition(rng: np.random.Generator, columns,
                     universe_size: int | None = None) -> ColumnPartition:
    """Uniformly shuffled columns cut at a random set of positions."""
    cols = list(columns)
    n_universe = max(cols) + 1 if universe_size is None else universe_size
    cols = [cols[i] for i in rng.permutation(len(cols))]
    cuts = [i for i in range(1, len(cols)) if rng.random() < 0.5]
    groups, last = [], 0
    for c in cuts + [len(cols)]:
        groups.append(cols[last:c])
        last = c
    return ColumnPartition.from_groups(groups, n_universe)
