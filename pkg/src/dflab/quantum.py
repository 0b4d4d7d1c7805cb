"""Quantum DF constructions from states and projective measurements.

Two builders live here. ``quantum_df`` turns a density matrix plus commuting
projector families for two parties into the DF whose entry for a pair of
histories is tr{E(a)F(b) rho F(b')† E(a')†}, with per-party operator products
taken in ascending setting order (that ordering is fixed once and documented;
it only matters when same-side projectors fail to commute). ``dv_family``
builds, for a unit vector v, the 2m-history quantum DF generated by the
computational-basis projectors E_a = |a><a| together with F_0 = (1/m) * ones,
F_1 = I - F_0. Its entries are always computed from the operator products
directly; the rank-structured closed form is a separate function so the two
routes can check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import bell_history_space
from .core import (
    TOL_EQ,
    TOL_POS,
    DecoherenceFunctional,
    DflabError,
    df_from_matrix,
    make_space,
)


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """One measurement setting: orthogonal projectors summing to the identity."""

    label: str
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        projs = tuple(
            np.asarray(P, dtype=np.complex128) for P in self.projectors
        )
        if not projs:
            raise DflabError("a projector family needs at least one projector")
        dim = projs[0].shape[0]
        for P in projs:
            if P.shape != (dim, dim):
                raise DflabError("projectors must share one Hilbert dimension")
            if np.abs(P - P.conj().T).max() > TOL_EQ:
                raise DflabError(f"projector in family {self.label!r} is not Hermitian")
            if np.abs(P @ P - P).max() > TOL_EQ:
                raise DflabError(f"operator in family {self.label!r} is not idempotent")
        total = sum(projs)
        if np.abs(total - np.eye(dim)).max() > TOL_EQ:
            raise DflabError(
                f"projectors in family {self.label!r} do not sum to the identity"
            )
        frozen = []
        for P in projs:
            P = P.copy()
            P.flags.writeable = False
            frozen.append(P)
        object.__setattr__(self, "projectors", tuple(frozen))

    @property
    def hilbert_dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True, eq=False)
class QuantumModel:
    """State and measurements of a bipartite experiment.

    Both parties have the same number of settings and outcomes per setting;
    every Alice projector commutes with every Bob projector.
    """

    hilbert_dim: int
    rho: np.ndarray
    alice: tuple[ProjectorFamily, ...]
    bob: tuple[ProjectorFamily, ...]

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=np.complex128)
        d = self.hilbert_dim
        if rho.shape != (d, d):
            raise DflabError(f"state must be {d}x{d}, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > TOL_EQ:
            raise DflabError("state is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TOL_EQ:
            raise DflabError("state trace is not 1")
        if np.linalg.eigvalsh(rho)[0] < -TOL_POS:
            raise DflabError("state has a negative eigenvalue")
        alice = tuple(self.alice)
        bob = tuple(self.bob)
        if not alice or not bob:
            raise DflabError("each party needs at least one measurement setting")
        if len(alice) != len(bob):
            raise DflabError("both parties must have the same number of settings")
        outcome_counts = {fam.outcomes for fam in alice} | {fam.outcomes for fam in bob}
        if len(outcome_counts) != 1:
            raise DflabError("all settings must share one outcome count")
        for fam in alice + bob:
            if fam.hilbert_dim != d:
                raise DflabError("projector family dimension mismatch")
        for a_fam in alice:
            for E in a_fam.projectors:
                for b_fam in bob:
                    for F in b_fam.projectors:
                        if np.abs(E @ F - F @ E).max() > TOL_EQ:
                            raise DflabError(
                                "Alice and Bob projectors must commute"
                            )
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)

    @property
    def settings(self) -> int:
        return len(self.alice)

    @property
    def outcomes(self) -> int:
        return self.alice[0].outcomes


def _history_operators(model: QuantumModel) -> np.ndarray:
    """G(omega) = E(1,a_1)..E(m,a_m) F(1,b_1)..F(m,b_m) for every history."""
    m, d = model.settings, model.outcomes
    dim = model.hilbert_dim

    def side_products(families: tuple[ProjectorFamily, ...]) -> np.ndarray:
        count = d ** m
        out = np.empty((count, dim, dim), dtype=np.complex128)
        for flat in range(count):
            digits = []
            rest = flat
            for _ in range(m):
                rest, r = divmod(rest, d)
                digits.append(r)
            digits.reverse()  # first setting most significant
            op = np.eye(dim, dtype=np.complex128)
            for setting, outcome in enumerate(digits):
                op = op @ families[setting].projectors[outcome]
            out[flat] = op
        return out

    alice_ops = side_products(model.alice)
    bob_ops = side_products(model.bob)
    n_hist = (d ** m) ** 2
    ops = np.empty((n_hist, dim, dim), dtype=np.complex128)
    for i, E in enumerate(alice_ops):
        ops[i * (d ** m):(i + 1) * (d ** m)] = E @ bob_ops
    return ops


def quantum_df(model: QuantumModel, dim_cap: int = 4096) -> DecoherenceFunctional:
    """DF over all outcome tuples (a_1..a_m, b_1..b_m) from a quantum model.

    Entry (omega, omega') = tr{G(omega) rho G(omega')†}. The result is a Gram
    form in disguise, so it is positive semidefinite for every valid model.
    """
    m, d = model.settings, model.outcomes
    n_hist = d ** (2 * m)
    if n_hist > dim_cap:
        raise DflabError(
            f"history space dimension {n_hist} exceeds the cap {dim_cap}"
        )
    space = bell_history_space(m, d)
    ops = _history_operators(model)
    flat = ops.reshape(n_hist, -1)
    weighted = (ops @ model.rho).reshape(n_hist, -1)
    matrix = weighted @ flat.conj().T
    return df_from_matrix(matrix, space, require_normalized=True)


def behavior_table(model: QuantumModel) -> np.ndarray:
    """P(a,b|x,y) = tr(rho E(x,a) F(y,b)), indexed [x][y][a][b]."""
    m, d = model.settings, model.outcomes
    table = np.empty((m, m, d, d), dtype=np.float64)
    for x in range(m):
        for y in range(m):
            for a in range(d):
                for b in range(d):
                    E = model.alice[x].projectors[a]
                    F = model.bob[y].projectors[b]
                    table[x, y, a, b] = float(np.real(np.trace(model.rho @ E @ F)))
    return table


def _dv_space(m: int):
    labels = [f"({a},{b})" for a in range(m) for b in range(2)]
    return make_space(labels, factors=(("a", m), ("b", 2)))


def _dv_projectors(m: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    basis = [np.zeros((m, m), dtype=np.complex128) for _ in range(m)]
    for a in range(m):
        basis[a][a, a] = 1.0
    uniform = np.full((m, m), 1.0 / m, dtype=np.complex128)
    return basis, [uniform, np.eye(m, dtype=np.complex128) - uniform]


def dv_family(v: np.ndarray, tol: float = TOL_EQ) -> DecoherenceFunctional:
    """The 2m-history quantum DF attached to a unit vector v.

    Histories are pairs (a, b) with a in 0..m-1 and b in {0, 1}; the entry for
    ((a,b), (a',b')) is <v| E_a' F_b' F_b E_a |v>. Computed from the operator
    products themselves, never from the closed form.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    m = v.size
    if m < 2:
        raise DflabError("dv_family needs a vector of dimension >= 2")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise DflabError(f"vector must be normalized, got |v| = {norm!r}")
    e_projs, f_projs = _dv_projectors(m)
    # u(a,b) = F_b E_a |v>; entry(row,col) = u(col)† u(row), a Gram transpose
    u = np.empty((2 * m, m), dtype=np.complex128)
    for a in range(m):
        for b in range(2):
            u[2 * a + b] = f_projs[b] @ (e_projs[a] @ v)
    gram = u.conj() @ u.T
    matrix = gram.T
    return df_from_matrix(matrix, _dv_space(m), require_normalized=True)


def dv_closed_form(v: np.ndarray, tol: float = TOL_EQ) -> np.ndarray:
    """Rank-structured form of the same matrix: one projector per b-sector.

    (1/m)|v><v| on the b=0 sector and diag(|v_a|^2) - (1/m)|v><v| on b=1.
    Kept independent of ``dv_family`` so the two act as mutual oracles.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    m = v.size
    if m < 2:
        raise DflabError("dv_closed_form needs a vector of dimension >= 2")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise DflabError(f"vector must be normalized, got |v| = {norm!r}")
    vv = np.outer(v, v.conj())
    block0 = vv / m
    block1 = np.diag(np.abs(v) ** 2).astype(np.complex128) - vv / m
    p0 = np.diag([1.0, 0.0]).astype(np.complex128)
    p1 = np.diag([0.0, 1.0]).astype(np.complex128)
    return np.kron(block0, p0) + np.kron(block1, p1)


def contraction_check(
    v: np.ndarray, tol: float = TOL_EQ
) -> tuple[np.ndarray, bool]:
    """Partial trace identity for the dv construction.

    With w = sum_a |a>_A |a,0>_B on the bipartite space (A of dimension m, B
    the 2m histories of dv_family), computes tr_B{|w><w| (I_A x D_v)} and
    reports whether it equals (1/m)|v*><v*|, v* the entrywise conjugate.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    m = v.size
    D = dv_family(v, tol).matrix
    w = np.zeros((m, 2 * m), dtype=np.complex128)
    for a in range(m):
        w[a, 2 * a] = 1.0
    result = w @ D.T @ w.conj().T
    expected = np.outer(v.conj(), v) / m
    matches = bool(np.abs(result - expected).max() <= tol)
    return result, matches


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases.conj()


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_projector_family(
    rng: np.random.Generator, dim: int, outcomes: int, label: str
) -> ProjectorFamily:
    """Random complete family: unitary columns grouped into ``outcomes`` ranks."""
    if outcomes > dim:
        raise DflabError("cannot split a basis into more groups than dimensions")
    u = haar_unitary(rng, dim)
    sizes = [dim // outcomes] * outcomes
    for i in range(dim % outcomes):
        sizes[i] += 1
    projectors = []
    start = 0
    for size in sizes:
        cols = u[:, start:start + size]
        projectors.append(cols @ cols.conj().T)
        start += size
    return ProjectorFamily(label, tuple(projectors))


def random_tensor_model(
    rng: np.random.Generator,
    dim_alice: int = 2,
    dim_bob: int = 2,
    settings: int = 2,
    outcomes: int = 2,
) -> QuantumModel:
    """Random model on H_A x H_B with commuting-by-construction projectors."""
    dim = dim_alice * dim_bob
    eye_a = np.eye(dim_alice, dtype=np.complex128)
    eye_b = np.eye(dim_bob, dtype=np.complex128)
    alice = []
    for x in range(settings):
        local = random_projector_family(rng, dim_alice, outcomes, f"A{x}")
        alice.append(
            ProjectorFamily(
                f"A{x}", tuple(np.kron(P, eye_b) for P in local.projectors)
            )
        )
    bob = []
    for y in range(settings):
        local = random_projector_family(rng, dim_bob, outcomes, f"B{y}")
        bob.append(
            ProjectorFamily(
                f"B{y}", tuple(np.kron(eye_a, P) for P in local.projectors)
            )
        )
    rho = random_density_matrix(rng, dim)
    return QuantumModel(dim, rho, tuple(alice), tuple(bob))
