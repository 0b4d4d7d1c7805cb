"""The two-parameter 4x4 family with bounded self-composability.

For lam > 1 and 0 < eps <= 1/(1+lam), the matrix

    D = (1/2) eps A (x) |0><0|  +  (1/2) (I - eps A) (x) |1><1|,
    A = [[1, lam], [lam, 1]],

is a weakly positive, normalized DF over the four histories (a, b) with flat
index 2a + b (the b value selects the block). Its n-fold tensor power stays
weakly positive for suitable parameters, while an explicit two-point vector
on the (n+1)-copy space makes the quadratic form negative:

    <V| D^(x)(n+1) |V> = (1/2^n) eps^n [1 - eps (1 + lam^(n+1))],

which is negative exactly when eps > 1/(lam^(n+1) + 1). Choosing
eps = 1/(lam^(n+1/2) + 1) lands strictly inside that window.

Positivity of the n-copy power is decided block by block: the blocks of
D^(x)n are scalar multiples of A^(x)n1 (x) B^(x)n2 with B = I - eps A, and
the n2 = 0 block is trivial (all entries non-negative). Each block either
carries a norm certificate derived from the exact 2x2 eigenvalues of A and B
or is settled by direct enumeration over its binary cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .axioms import PositivityReport, Strategy, Verdict
from .core import (
    TOL_EQ,
    TOL_POS,
    DecoherenceFunctional,
    DflabError,
    Event,
    HistorySpace,
    df_from_matrix,
    make_space,
    space_product,
)
from .kernels import key_to_indicator, scan_ascending

BLOCK_ENUM_MAX_DIM = 24       # per-block enumeration cap (2^dim vectors)
LAMBDA_SEARCH_CAP = 2.0 ** 20


class UndecidableBlockError(DflabError):
    """A block has no certificate and is too large to enumerate."""


@dataclass(frozen=True)
class Lemma1Params:
    """A point of the family plus the copy count being tested."""

    lam: float
    eps: float
    n: int

    def __post_init__(self) -> None:
        if not self.lam > 1.0:
            raise DflabError("lam must exceed 1")
        if not 0.0 < self.eps <= 1.0 / (1.0 + self.lam):
            raise DflabError("eps must lie in (0, 1/(1+lam)]")
        if self.n < 1:
            raise DflabError("n must be a positive integer")


@dataclass(frozen=True, eq=False)
class Lemma1Report:
    """Outcome of the full experiment at one parameter point."""

    params: Lemma1Params
    n_copy_verdict: PositivityReport
    witness_value: float            # closed form on the (n+1)-copy space
    witness_value_numeric: float    # factorized matrix evaluation of the same form
    lemma_holds: bool


def coupling_matrix(lam: float) -> np.ndarray:
    return np.array([[1.0, lam], [lam, 1.0]], dtype=np.complex128)


def lemma1_space() -> HistorySpace:
    labels = ("(0,0)", "(0,1)", "(1,0)", "(1,1)")
    return make_space(labels, factors=(("a", 2), ("b", 2)))


def lemma1_df(lam: float, eps: float) -> DecoherenceFunctional:
    """The 4x4 family member at (lam, eps), Hermitian and normalized."""
    Lemma1Params(lam, eps, 1)  # parameter bounds
    A = coupling_matrix(lam)
    p0 = np.diag([1.0, 0.0]).astype(np.complex128)
    p1 = np.diag([0.0, 1.0]).astype(np.complex128)
    matrix = 0.5 * np.kron(eps * A, p0) + 0.5 * np.kron(np.eye(2) - eps * A, p1)
    return df_from_matrix(matrix, lemma1_space(), require_normalized=True)


def lemma1_epsilon(lam: float, n: int) -> float:
    """eps = 1/(lam^(n+1/2) + 1): inside (0, 1/(1+lam)] and past the
    negativity threshold 1/(lam^(n+1) + 1) for the (n+1)-copy witness."""
    if not lam > 1.0:
        raise DflabError("lam must exceed 1")
    if n < 1:
        raise DflabError("n must be a positive integer")
    return 1.0 / (lam ** (n + 0.5) + 1.0)


def _witness_histories(n: int) -> tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]:
    """Per-copy (a, b) values of the two histories spanned by the witness."""
    first = tuple([(0, 0)] * n + [(0, 1)])
    second = tuple([(1, 0)] * n + [(1, 1)])
    return first, second


def _flat_index(copies: tuple[tuple[int, int], ...]) -> int:
    flat = 0
    for a, b in copies:
        flat = flat * 4 + 2 * a + b
    return flat


def lemma1_copy_space(copies: int) -> HistorySpace:
    return reduce(space_product, [lemma1_space()] * copies)


def lemma1_witness(n: int) -> Event:
    """Two-point event on the (n+1)-copy space whose form goes negative."""
    if n < 1:
        raise DflabError("n must be a positive integer")
    first, second = _witness_histories(n)
    space = lemma1_copy_space(n + 1)
    return Event.from_indices(space, [_flat_index(first), _flat_index(second)])


def lemma1_witness_value(lam: float, eps: float, n: int) -> float:
    """Closed form of the witness quadratic form on the (n+1)-copy power."""
    Lemma1Params(lam, eps, n)
    return (eps ** n / 2.0 ** n) * (1.0 - eps * (1.0 + lam ** (n + 1)))


def witness_is_negative(lam: float, eps: float, n: int, tol: float = TOL_POS) -> bool:
    """Sign test for the witness value at any scale.

    The value factors as (eps^n / 2^n) * (1 - eps (1 + lam^(n+1))) with a
    positive prefactor that shrinks below any absolute tolerance by n = 5, so
    the cutoff is applied to the scale-free bracket instead.
    """
    Lemma1Params(lam, eps, n)
    return 1.0 - eps * (1.0 + lam ** (n + 1)) < -tol


def lemma1_witness_value_numeric(lam: float, eps: float, n: int) -> float:
    """Same form evaluated from matrix entries, copy by copy.

    The witness spans two basis histories g, h; the (n+1)-copy entry is the
    product of per-copy entries, so the form is D[g,g] + D[h,h] + 2 Re D[g,h]
    with each term a product over copies. No tensor power is materialized.
    """
    Lemma1Params(lam, eps, n)
    M = lemma1_df(lam, eps).matrix
    first, second = _witness_histories(n)

    def product_entry(rows, cols) -> complex:
        value = 1.0 + 0.0j
        for (ra, rb), (ca, cb) in zip(rows, cols):
            value *= M[2 * ra + rb, 2 * ca + cb]
        return value

    diag = product_entry(first, first).real + product_entry(second, second).real
    cross = 2.0 * product_entry(first, second).real
    return float(diag + cross)


def norm_bound(lam: float, eps: float, n1: int, n2: int) -> float:
    """Certified lower bound on the normalized binary form of A^n1 (x) B^n2.

    For unit-normalized non-negative vectors, <w|A^n1 (x) I|w> >= 1 because
    A - I has non-negative entries; subtracting the operator norm of
    A^n1 (x) (B^n2 - I) (exact from the 2x2 eigenvalues: A has 1 +/- lam, B
    has 1 - eps(1 -/+ lam)) leaves a lower bound. A positive bound certifies
    the block with no enumeration.
    """
    if n1 < 0 or n2 < 1:
        raise DflabError("norm_bound needs n1 >= 0 and n2 >= 1")
    norm_a = 1.0 + lam
    beta_minus = 1.0 - eps * (1.0 + lam)
    beta_plus = 1.0 - eps * (1.0 - lam)
    deviation = max(
        abs(beta_minus ** k * beta_plus ** (n2 - k) - 1.0) for k in range(n2 + 1)
    )
    return 1.0 - norm_a ** n1 * deviation


def _block_matrix(lam: float, eps: float, n1: int, n2: int) -> np.ndarray:
    A = coupling_matrix(lam)
    B = np.eye(2, dtype=np.complex128) - eps * A
    parts = [A] * n1 + [B] * n2
    return reduce(np.kron, parts)


def _lift_block_witness(local_key: int, n1: int, n2: int, n: int) -> Event:
    """Embed a block-local violator into the n-copy space.

    The block with b-pattern 0^n1 1^n2 equals (eps^n1 / 2^n) A^n1 (x) B^n2,
    so the global form value is the local one scaled by that factor.
    """
    local = key_to_indicator(local_key, 2 ** n)
    space = lemma1_copy_space(n)
    indices = []
    for local_index in np.nonzero(local)[0]:
        bits = [(int(local_index) >> (n - 1 - k)) & 1 for k in range(n)]
        copies = tuple(
            (bits[k], 0 if k < n1 else 1) for k in range(n)
        )
        indices.append(_flat_index(copies))
    return Event.from_indices(space, indices)


def block_positivity_check(
    lam: float, eps: float, n: int, tol: float = TOL_POS
) -> PositivityReport:
    """Enumerate every nontrivial block of the n-copy power.

    For each split n1 + n2 = n with n2 >= 1 (the n2 = 0 block has only
    non-negative entries), the 2^n-dimensional block A^n1 (x) B^n2 is scanned
    over its full binary cube; scalar prefactors are positive and cannot flip
    a sign. Splits are visited in lexicographic (n1, n2) order.
    """
    Lemma1Params(lam, eps, n)
    if 2 ** n > BLOCK_ENUM_MAX_DIM:
        raise DflabError(
            f"block dimension 2^{n} exceeds the enumeration cap {BLOCK_ENUM_MAX_DIM}"
        )
    checked_total = 0
    for n1 in range(0, n):  # lexicographic in (n1, n2); n2 = n - n1 >= 1
        n2 = n - n1
        block = _block_matrix(lam, eps, n1, n2)
        key, value, checked = scan_ascending(block, tol)
        checked_total += checked
        if key is not None:
            witness = _lift_block_witness(key, n1, n2, n)
            scale = (eps ** n1) / (2.0 ** n)
            return PositivityReport(
                Verdict.FAIL,
                witness,
                value * scale,
                checked_total,
                Strategy.BLOCK_REDUCED,
            )
    return PositivityReport(
        Verdict.PASS, None, None, checked_total, Strategy.BLOCK_REDUCED
    )


def ncopy_positivity_check(
    lam: float, eps: float, n: int, tol: float = TOL_POS
) -> PositivityReport:
    """Block check with norm certificates first, enumeration as fallback.

    When every block is certified the verdict is Certified with no vectors
    scanned; any uncertified block falls back to its enumeration.
    """
    Lemma1Params(lam, eps, n)
    checked_total = 0
    all_certified = True
    for n1 in range(0, n):
        n2 = n - n1
        if norm_bound(lam, eps, n1, n2) > 0.0:
            continue
        all_certified = False
        if 2 ** n > BLOCK_ENUM_MAX_DIM:
            raise UndecidableBlockError(
                f"no certificate and block dimension 2^{n} exceeds the "
                f"enumeration cap {BLOCK_ENUM_MAX_DIM}"
            )
        block = _block_matrix(lam, eps, n1, n2)
        key, value, checked = scan_ascending(block, tol)
        checked_total += checked
        if key is not None:
            witness = _lift_block_witness(key, n1, n2, n)
            scale = (eps ** n1) / (2.0 ** n)
            return PositivityReport(
                Verdict.FAIL,
                witness,
                value * scale,
                checked_total,
                Strategy.BLOCK_REDUCED,
            )
    if all_certified:
        return PositivityReport(
            Verdict.CERTIFIED, None, None, 0, Strategy.NORM_BOUND
        )
    return PositivityReport(
        Verdict.PASS, None, None, checked_total, Strategy.BLOCK_REDUCED
    )


def find_lambda(
    n: int,
    lam_start: float = 2.0,
    lam_max: float = LAMBDA_SEARCH_CAP,
    tol: float = TOL_POS,
) -> Lemma1Params:
    """Double lam from lam_start until eps = lemma1_epsilon(lam, n) gives a
    positive n-copy verdict and a negative (n+1)-copy witness value.

    A lam whose blocks are neither certified nor enumerable counts as a miss
    (certificates cover every split once lam is large enough).
    """
    if n < 1:
        raise DflabError("n must be a positive integer")
    lam = float(lam_start)
    while lam <= lam_max:
        eps = lemma1_epsilon(lam, n)
        try:
            passed = ncopy_positivity_check(lam, eps, n, tol).passed
        except UndecidableBlockError:
            passed = False
        if passed and witness_is_negative(lam, eps, n, tol):
            return Lemma1Params(lam, eps, n)
        lam *= 2.0
    raise DflabError(f"no lam <= {lam_max} succeeded for n = {n}")


def lemma1_experiment(
    n: int,
    lam: float | None = None,
    eps: float | None = None,
    tol: float = TOL_POS,
) -> Lemma1Report:
    """Run the whole experiment: choose parameters, verify both halves.

    With lam omitted, the doubling search picks it; eps defaults to
    lemma1_epsilon(lam, n). The lemma holds at the point when the n-copy
    check passes and the closed-form witness value is negative.
    """
    if lam is None:
        params = find_lambda(n, tol=tol)
        if eps is not None:
            params = Lemma1Params(params.lam, eps, n)
    else:
        params = Lemma1Params(lam, eps if eps is not None else lemma1_epsilon(lam, n), n)
    verdict = ncopy_positivity_check(params.lam, params.eps, params.n, tol)
    closed = lemma1_witness_value(params.lam, params.eps, params.n)
    numeric = lemma1_witness_value_numeric(params.lam, params.eps, params.n)
    if not math.isclose(closed, numeric, rel_tol=0.0, abs_tol=TOL_EQ):
        raise DflabError(
            f"closed-form and factorized witness values disagree: "
            f"{closed!r} vs {numeric!r}"
        )
    holds = verdict.passed and witness_is_negative(
        params.lam, params.eps, params.n, tol
    )
    return Lemma1Report(
        params=params,
        n_copy_verdict=verdict,
        witness_value=closed,
        witness_value_numeric=numeric,
        lemma_holds=holds,
    )
