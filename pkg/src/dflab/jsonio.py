"""JSON serialization for DFs, behaviors, quantum models, and reports.

The DF file format is a fixed contract shared by every CLI command:

    { "dim": int, "labels": [str, ...],
      "factors": [[name, cardinality], ...] | null,
      "entries": [[re, im], ...] }        # row-major, length dim^2

Reports mirror their in-memory types with camelCase keys; witness events
serialize as sorted index lists. Serialization is deterministic (sorted keys,
fixed indentation), so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .axioms import (
    DecoherenceReport,
    PositivityReport,
    SpectralReport,
    ValidationReport,
)
from .bell import Behavior, ConsistencyReport
from .compose import ComposabilityReport
from .core import (
    LEVEL_NAMES,
    DecoherenceFunctional,
    DflabError,
    Event,
    make_space,
)
from .lemma1 import Lemma1Report
from .maximality import Lemma2Report, PnnViolation
from .quantum import ProjectorFamily, QuantumModel


def matrix_to_entries(matrix: np.ndarray) -> list[list[float]]:
    flat = np.asarray(matrix, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def entries_to_matrix(entries: Any, dim: int) -> np.ndarray:
    if len(entries) != dim * dim:
        raise DflabError(
            f"expected {dim * dim} entries for dimension {dim}, got {len(entries)}"
        )
    flat = np.array(
        [complex(float(re), float(im)) for re, im in entries], dtype=np.complex128
    )
    return flat.reshape(dim, dim)


def vector_to_entries(vector: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(vector, dtype=np.complex128)]


def df_to_dict(D: DecoherenceFunctional) -> dict[str, Any]:
    return {
        "dim": D.dim,
        "labels": list(D.space.labels),
        "factors": (
            [[name, card] for name, card in D.space.factors]
            if D.space.factors is not None
            else None
        ),
        "entries": matrix_to_entries(D.matrix),
    }


def df_from_dict(data: dict[str, Any]) -> DecoherenceFunctional:
    """Raw (unvalidated) DF from the standard file format."""
    try:
        dim = int(data["dim"])
        labels = [str(lab) for lab in data["labels"]]
        factors = data.get("factors")
        entries = data["entries"]
    except (KeyError, TypeError) as exc:
        raise DflabError(f"malformed DF object: {exc}") from exc
    if len(labels) != dim:
        raise DflabError(f"label count {len(labels)} does not match dim {dim}")
    space = make_space(
        labels,
        None if factors is None else [(str(n), int(c)) for n, c in factors],
    )
    matrix = entries_to_matrix(entries, dim)
    return DecoherenceFunctional(space, matrix)


def save_df(D: DecoherenceFunctional, path: str | Path) -> None:
    Path(path).write_text(dump_json(df_to_dict(D)), encoding="utf-8")


def load_df(path: str | Path) -> DecoherenceFunctional:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return df_from_dict(data)


def behavior_to_dict(behavior: Behavior) -> dict[str, Any]:
    return {
        "m": behavior.settings,
        "d": behavior.outcomes,
        "P": behavior.table.tolist(),
    }


def behavior_from_dict(data: dict[str, Any]) -> Behavior:
    try:
        m = int(data["m"])
        d = int(data["d"])
        table = np.asarray(data["P"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise DflabError(f"malformed behavior object: {exc}") from exc
    return Behavior(m, d, table)


def save_behavior(behavior: Behavior, path: str | Path) -> None:
    Path(path).write_text(dump_json(behavior_to_dict(behavior)), encoding="utf-8")


def load_behavior(path: str | Path) -> Behavior:
    return behavior_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def model_to_dict(model: QuantumModel) -> dict[str, Any]:
    return {
        "dim": model.hilbert_dim,
        "rho": matrix_to_entries(model.rho),
        "alice": [
            [matrix_to_entries(P) for P in fam.projectors] for fam in model.alice
        ],
        "bob": [
            [matrix_to_entries(P) for P in fam.projectors] for fam in model.bob
        ],
    }


def model_from_dict(data: dict[str, Any]) -> QuantumModel:
    try:
        dim = int(data["dim"])
        rho = entries_to_matrix(data["rho"], dim)
        alice = tuple(
            ProjectorFamily(
                f"A{x}", tuple(entries_to_matrix(P, dim) for P in fam)
            )
            for x, fam in enumerate(data["alice"])
        )
        bob = tuple(
            ProjectorFamily(
                f"B{y}", tuple(entries_to_matrix(P, dim) for P in fam)
            )
            for y, fam in enumerate(data["bob"])
        )
    except (KeyError, TypeError) as exc:
        raise DflabError(f"malformed quantum model object: {exc}") from exc
    return QuantumModel(dim, rho, alice, bob)


def load_model(path: str | Path) -> QuantumModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _witness_indices(event: Event | None) -> list[int] | None:
    return None if event is None else list(event.indices)


def positivity_report_to_dict(report: PositivityReport) -> dict[str, Any]:
    return {
        "verdict": report.verdict.value,
        "witness": _witness_indices(report.witness),
        "witnessValue": report.witness_value,
        "vectorsChecked": report.vectors_checked,
        "strategy": report.strategy.value,
    }


def spectral_report_to_dict(report: SpectralReport) -> dict[str, Any]:
    return {
        "minEigenvalue": report.min_eigenvalue,
        "minEigenvector": vector_to_entries(report.min_eigenvector),
        "isSP": report.is_sp,
        "residual": report.residual,
    }


def decoherence_report_to_dict(report: DecoherenceReport) -> dict[str, Any]:
    return {
        "mode": report.mode,
        "verdict": report.verdict,
        "probabilities": (
            None if report.probabilities is None else list(report.probabilities)
        ),
        "maxOffDiagonal": report.max_off_diagonal,
    }


def validation_report_to_dict(report: ValidationReport) -> dict[str, Any]:
    return {
        "hermitian": {"ok": report.hermitian, "maxDeviation": report.hermiticity_deviation},
        "normalization": {
            "ok": report.normalized,
            "value": [
                float(report.normalization_value.real),
                float(report.normalization_value.imag),
            ],
        },
        "weakPositivity": positivity_report_to_dict(report.weak),
        "strongPositivity": (
            None if report.strong is None else spectral_report_to_dict(report.strong)
        ),
        "level": LEVEL_NAMES[report.level],
    }


def composability_report_to_dict(report: ComposabilityReport) -> dict[str, Any]:
    return {
        "n": report.n,
        "strategy": report.strategy.value,
        "verdict": report.verdict.value,
        "witnessBlock": (
            None if report.witness_block is None else list(report.witness_block)
        ),
        "witnessIndices": (
            None if report.witness_indices is None else list(report.witness_indices)
        ),
        "witnessValue": report.witness_value,
    }


def lemma1_report_to_dict(report: Lemma1Report) -> dict[str, Any]:
    return {
        "params": {
            "lambda": report.params.lam,
            "epsilon": report.params.eps,
            "n": report.params.n,
        },
        "nCopyVerdict": positivity_report_to_dict(report.n_copy_verdict),
        "witnessValue": report.witness_value,
        "witnessValueNumeric": report.witness_value_numeric,
        "lemmaHolds": report.lemma_holds,
    }


def lemma2_report_to_dict(report: Lemma2Report) -> dict[str, Any]:
    return {
        "inputDim": report.input_dim,
        "minEigenvalue": report.min_eigenvalue,
        "v": vector_to_entries(report.v),
        "partner": df_to_dict(report.partner),
        "witness": list(report.witness.indices),
        "lhs": report.lhs,
        "rhs": report.rhs,
        "matched": report.matched,
    }


def pnn_violation_to_dict(violation: PnnViolation | None) -> dict[str, Any]:
    if violation is None:
        return {"found": False, "partner": None, "witness": None, "value": None}
    return {
        "found": True,
        "partner": [[float(x) for x in row] for row in violation.partner],
        "witness": list(violation.witness.indices),
        "value": violation.value,
    }


def consistency_report_to_dict(report: ConsistencyReport) -> dict[str, Any]:
    return {
        "verdict": report.verdict,
        "worstDeviation": report.worst_deviation,
        "partitions": [
            {
                "kind": check.kind,
                "party": check.party,
                "x": check.x,
                "y": check.y,
                "g": None if check.g is None else list(check.g),
                "decoherence": decoherence_report_to_dict(check.decoherence),
                "behaviorDeviation": check.behavior_deviation,
            }
            for check in report.partitions
        ],
    }


def dump_json(obj: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
