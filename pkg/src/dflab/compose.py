"""Tensor composition of DFs and n-fold composability checks.

Independent systems compose by the Kronecker product of their matrices over
the product history space. Composability of n copies is a weak-positivity
question about D^(tensor n); for block-diagonal D it decomposes exactly,
because a block-diagonal quadratic form separates over blocks and the blocks
of D^(tensor n) are n-fold tensor products of the blocks of D. Tensor factors
can be permuted without leaving the binary cube, so only the multiset of
block choices matters; blocks are scanned by their type vector in
lexicographic order, which keeps witnesses deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .axioms import Strategy, Verdict
from .core import (
    DENSE_DIM_CAP,
    TOL_EQ,
    TOL_POS,
    DecoherenceFunctional,
    DflabError,
    DimensionCapError,
    Event,
    HistorySpace,
    ValidationLevel,
    make_space,
    space_product,
)
from .kernels import connected_components, key_to_indicator, scan_ascending

COMPOSE_ENUM_MAX_DIM = 24   # per-block / whole-matrix enumeration cap (2^dim vectors)


@dataclass(frozen=True, eq=False)
class BlockStructure:
    """A partition of matrix indices with no coupling across parts."""

    block_labels: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def index_blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(indices for _, indices in self.block_labels)

    def __len__(self) -> int:
        return len(self.block_labels)


@dataclass(frozen=True, eq=False)
class ComposabilityReport:
    """Weak-positivity verdict for D^(tensor n), with block-level witnesses."""

    n: int
    strategy: Strategy
    verdict: Verdict
    witness_block: tuple[int, ...] | None     # type vector of the failing block
    witness_indices: tuple[int, ...] | None   # flat indices in the n-copy space
    witness_value: float | None
    vectors_checked: int

    @property
    def passed(self) -> bool:
        return self.verdict in (Verdict.PASS, Verdict.CERTIFIED)


def _require_hermitian_level(D: DecoherenceFunctional) -> None:
    if D.validation_level < ValidationLevel.HERMITIAN:
        from .core import hermiticity_deviation

        dev = hermiticity_deviation(D.matrix)
        if dev > TOL_EQ:
            raise DflabError(
                f"tensor composition needs Hermitian inputs: deviation {dev:.3e}"
            )


def tensor(
    D1: DecoherenceFunctional,
    D2: DecoherenceFunctional,
    dim_cap: int = DENSE_DIM_CAP,
) -> DecoherenceFunctional:
    """Joint DF of two independent systems: Kronecker product of the matrices.

    Hermiticity and normalization survive by construction (the entry sum is
    multiplicative). Strong positivity survives when both inputs carry it;
    weak positivity does not transfer, so such inputs come back Normalized.
    """
    _require_hermitian_level(D1)
    _require_hermitian_level(D2)
    product_dim = D1.dim * D2.dim
    if product_dim > dim_cap:
        raise DimensionCapError(
            f"product dimension {product_dim} exceeds the dense cap {dim_cap}"
        )
    space = space_product(D1.space, D2.space)
    matrix = np.kron(D1.matrix, D2.matrix)
    lmin = min(D1.validation_level, D2.validation_level)
    if lmin == ValidationLevel.STRONGLY_POSITIVE:
        level = ValidationLevel.STRONGLY_POSITIVE
    elif lmin == ValidationLevel.WEAKLY_POSITIVE:
        level = ValidationLevel.NORMALIZED
    else:
        level = lmin
    return DecoherenceFunctional(space, matrix, level)


def singleton_df() -> DecoherenceFunctional:
    """The trivial DF [1] on a one-history space (unit of composition)."""
    space = make_space(("()",))
    return DecoherenceFunctional(
        space, np.array([[1.0 + 0.0j]]), ValidationLevel.STRONGLY_POSITIVE
    )


def tensor_power(
    D: DecoherenceFunctional, n: int, dim_cap: int = DENSE_DIM_CAP
) -> DecoherenceFunctional:
    """n-fold tensor product of D with itself; n = 0 gives the singleton DF."""
    if n < 0:
        raise DflabError("tensor power needs n >= 0")
    if n == 0:
        return singleton_df()
    if D.dim ** n > dim_cap:
        raise DimensionCapError(
            f"dimension {D.dim}^{n} exceeds the dense cap {dim_cap}"
        )
    result = D
    for _ in range(n - 1):
        result = tensor(result, D, dim_cap=dim_cap)
    return result


def copy_space(space: HistorySpace, n: int) -> HistorySpace:
    """Product of n copies of a space (n >= 1), matching tensor_power's space."""
    if n < 1:
        raise DflabError("copy_space needs n >= 1")
    return reduce(space_product, [space] * n)


def event_product(e1: Event, e2: Event, space: HistorySpace | None = None) -> Event:
    """Rectangle event A1 x A2 on the product space."""
    if space is None:
        space = space_product(e1.space, e2.space)
    return Event(space, np.kron(e1.indicator, e2.indicator))


def detect_blocks(D: DecoherenceFunctional, tol: float = TOL_EQ) -> BlockStructure:
    """Connected components of the nonzero-pattern graph of the matrix."""
    _require_hermitian_level(D)
    comps = connected_components(D.matrix, tol)
    labeled = tuple(
        (f"b{k}", tuple(int(i) for i in comp)) for k, comp in enumerate(comps)
    )
    return BlockStructure(labeled)


def _type_vectors(r: int, n: int) -> Iterator[tuple[int, ...]]:
    """All (n_1..n_r) with sum n, in lexicographic ascending order."""
    if r == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _type_vectors(r - 1, n - first):
            yield (first,) + rest


def _entrywise_nonnegative(matrix: np.ndarray, tol: float) -> bool:
    return bool(
        (np.abs(matrix.imag) <= tol).all() and (matrix.real >= -tol).all()
    )


def check_composability(
    D: DecoherenceFunctional,
    n: int,
    strategy: Strategy = Strategy.BRUTE_FORCE,
    tol: float = TOL_POS,
) -> ComposabilityReport:
    """Weak-positivity verdict for the n-fold tensor power of D.

    Brute force materializes D^(tensor n) and enumerates its binary cube.
    Block-reduced never materializes the full power: it detects the blocks of
    D and enumerates one representative tensor product per block multiset.
    Blocks with entrywise non-negative entries pass without enumeration
    (every binary form there is a sum of non-negative terms).
    """
    _require_hermitian_level(D)
    if n < 0:
        raise DflabError("composability check needs n >= 0")
    if n == 0:
        return ComposabilityReport(
            0, strategy, Verdict.PASS, None, None, None, 0
        )

    if strategy is Strategy.BRUTE_FORCE:
        full_dim = D.dim ** n
        if full_dim > COMPOSE_ENUM_MAX_DIM:
            raise DflabError(
                f"brute force needs dim^n <= {COMPOSE_ENUM_MAX_DIM}, got {full_dim}"
            )
        Dn = tensor_power(D, n)
        key, value, checked = scan_ascending(Dn.matrix, tol)
        if key is None:
            return ComposabilityReport(
                n, strategy, Verdict.PASS, None, None, None, checked
            )
        indicator = key_to_indicator(key, full_dim)
        indices = tuple(int(i) for i in np.nonzero(indicator)[0])
        return ComposabilityReport(
            n, strategy, Verdict.FAIL, None, indices, value, checked
        )

    if strategy is Strategy.BLOCK_REDUCED:
        structure = detect_blocks(D)
        blocks = [np.asarray(b, dtype=np.int64) for b in structure.index_blocks]
        submatrices = [D.matrix[np.ix_(b, b)] for b in blocks]
        checked_total = 0
        for type_vector in _type_vectors(len(blocks), n):
            sequence = [
                i for i, count in enumerate(type_vector) for _ in range(count)
            ]
            dims = [blocks[i].size for i in sequence]
            block_dim = int(np.prod(dims))
            if block_dim > COMPOSE_ENUM_MAX_DIM:
                raise DflabError(
                    f"tensor block of dimension {block_dim} exceeds the "
                    f"enumeration cap {COMPOSE_ENUM_MAX_DIM}"
                )
            T = reduce(np.kron, [submatrices[i] for i in sequence])
            if _entrywise_nonnegative(T, TOL_EQ):
                continue  # binary forms are sums of non-negative terms
            key, value, checked = scan_ascending(T, tol)
            checked_total += checked
            if key is not None:
                local = key_to_indicator(key, block_dim)
                indices = _lift_block_indices(
                    np.nonzero(local)[0], dims, sequence, blocks, D.dim, n
                )
                return ComposabilityReport(
                    n,
                    strategy,
                    Verdict.FAIL,
                    type_vector,
                    indices,
                    value,
                    checked_total,
                )
        return ComposabilityReport(
            n, strategy, Verdict.PASS, None, None, None, checked_total
        )

    raise DflabError(f"strategy {strategy} is not available for this check")


def _lift_block_indices(
    local_indices: np.ndarray,
    dims: Sequence[int],
    sequence: Sequence[int],
    blocks: Sequence[np.ndarray],
    base_dim: int,
    n: int,
) -> tuple[int, ...]:
    """Map block-local tensor indices to flat indices of the n-copy space."""
    out = []
    for local in local_indices:
        local = int(local)
        positions = []
        for d in reversed(dims):
            local, rem = divmod(local, d)
            positions.append(rem)
        positions.reverse()
        flat = 0
        for copy_index, pos in enumerate(positions):
            flat = flat * base_dim + int(blocks[sequence[copy_index]][pos])
        out.append(flat)
    return tuple(sorted(out))


def reassemble_blocks(
    D: DecoherenceFunctional, structure: BlockStructure
) -> np.ndarray:
    """Scatter block submatrices back into a full matrix (zeros elsewhere)."""
    out = np.zeros_like(D.matrix)
    for _, indices in structure.block_labels:
        idx = np.asarray(indices, dtype=np.int64)
        out[np.ix_(idx, idx)] = D.matrix[np.ix_(idx, idx)]
    return out


