from dataclasses import dataclass

import numpy as np

from core.exceptions import DomainError


@dataclass(frozen=True, eq=False)
class LabeledBatch:
    """n labeled pairs (x_i, y_i), stored column-wise."""
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int8)
        ys = np.asarray(self.ys, dtype=np.int8)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise DomainError("Labeled batch needs two 1-d bit arrays of equal length.")
        if xs.size < 1:
            raise DomainError("Labeled batch must hold at least one pair.")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return int(self.xs.size)

    def __eq__(self, other):
        return (isinstance(other, LabeledBatch)
                and np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys))

    @property
    def pairs(self):
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        if not pairs:
            raise DomainError("Labeled batch must hold at least one pair.")
        xs, ys = zip(*pairs)
        return cls(np.array(xs), np.array(ys))


@dataclass(frozen=True, eq=False)
class UnlabeledBatch:
    """N covariates without labels."""
    xs: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int8)
        if xs.ndim != 1 or xs.size < 1:
            raise DomainError("Unlabeled batch must be a non-empty 1-d bit array.")
        object.__setattr__(self, "xs", xs)

    def __len__(self):
        return int(self.xs.size)

    def __eq__(self, other):
        return isinstance(other, UnlabeledBatch) and np.array_equal(self.xs, other.xs)


def draw_pairs(dist, size, generator):
    """
    Raw i.i.d. draws from the joint table: two int8 arrays of shape ``size``.
    Works for any shape, e.g. (M, n) for M datasets at once.
    """
    cells = generator.choice(4, size=size, p=dist.cells())
    # cells: 0=(1,1) 1=(1,0) 2=(0,1) 3=(0,0)
    xs = (cells < 2).astype(np.int8)
    ys = ((cells % 2) == 0).astype(np.int8)
    return xs, ys


def draw_covariates(dist, size, generator):
    """Raw i.i.d. draws from the marginal of X."""
    return (generator.random(size) < dist.theta_x).astype(np.int8)


def sample_labeled(dist, n, rng):
    if n < 1:
        raise DomainError(f"Labeled batch size must be at least 1, got {n}.")
    xs, ys = draw_pairs(dist, int(n), rng.generator())
    return LabeledBatch(xs, ys)


def sample_unlabeled(dist, N, rng):
    if N < 1:
        raise DomainError(f"Unlabeled batch size must be at least 1, got {N}.")
    return UnlabeledBatch(draw_covariates(dist, int(N), rng.generator()))
