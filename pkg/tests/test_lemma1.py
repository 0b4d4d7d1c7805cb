import numpy as np
import pytest

from dflab.axioms import Strategy, Verdict, check_weak_positivity, validate_df
from dflab.compose import tensor_power
from dflab.core import DflabError, ValidationLevel, df_evaluate
from dflab.kernels import quadratic_form
from dflab.lemma1 import (
    Lemma1Params,
    block_positivity_check,
    find_lambda,
    lemma1_copy_space,
    lemma1_df,
    lemma1_epsilon,
    lemma1_experiment,
    lemma1_witness,
    lemma1_witness_value,
    lemma1_witness_value_numeric,
    ncopy_positivity_check,
    norm_bound,
)

EPS1 = lemma1_epsilon(2.0, 1)


def test_params_validation():
    with pytest.raises(DflabError):
        Lemma1Params(1.0, 0.1, 1)
    with pytest.raises(DflabError):
        Lemma1Params(2.0, 0.5, 1)  # eps above 1/(1+lam)
    with pytest.raises(DflabError):
        Lemma1Params(2.0, 0.1, 0)
    Lemma1Params(2.0, 1.0 / 3.0, 1)  # boundary allowed


def test_family_blocks():
    D = lemma1_df(2.0, EPS1)
    b0 = D.matrix[np.ix_([0, 2], [0, 2])].real
    b1 = D.matrix[np.ix_([1, 3], [1, 3])].real
    assert np.allclose(b0, [[0.130602, 0.261204], [0.261204, 0.130602]], atol=1e-6)
    assert np.allclose(b1, [[0.369398, -0.261204], [-0.261204, 0.369398]], atol=1e-6)
    # cross-block entries vanish
    assert np.abs(D.matrix[np.ix_([0, 2], [1, 3])]).max() == 0.0


def test_family_partitions_strongly_decohere():
    from dflab.axioms import check_partition_decoherence
    from dflab.core import single_property_partition

    for lam in (1.5, 2.0, 5.0):
        D = lemma1_df(lam, lemma1_epsilon(lam, 1))
        for k in (0, 1):
            part = single_property_partition(D.space, k)
            assert check_partition_decoherence(D, part, mode="strong").verdict


def test_epsilon_values():
    assert EPS1 == pytest.approx(0.26120387, abs=1e-8)
    assert lemma1_epsilon(4.0, 2) == pytest.approx(1.0 / 33.0, abs=1e-15)
    assert lemma1_epsilon(1e6, 1) < 1e-8
    for lam in (1.1, 2.0, 7.0):
        for n in (1, 2, 5):
            assert lemma1_epsilon(lam, n) <= 1.0 / (1.0 + lam) + 1e-15


def test_witness_indices():
    w1 = lemma1_witness(1)
    assert w1.space.size == 16
    assert w1.indices == (1, 11)
    w2 = lemma1_witness(2)
    assert w2.space.size == 64
    # independent index computation through the space encoding
    space = lemma1_copy_space(3)
    assert w2.indices == (
        space.encode((0, 0, 0, 0, 0, 1)),
        space.encode((1, 0, 1, 0, 1, 1)),
    )
    assert w2.indices == (1, 43)
    for n in (1, 2, 3, 5):
        assert lemma1_witness(n).weight == 2


def test_witness_value_closed_vs_materialized():
    # oracle: evaluate the explicit two-point form on the materialized power
    for lam, n in ((2.0, 1), (4.0, 2)):
        eps = lemma1_epsilon(lam, n)
        closed = lemma1_witness_value(lam, eps, n)
        D_power = tensor_power(lemma1_df(lam, eps), n + 1)
        direct = df_evaluate(D_power, lemma1_witness(n), lemma1_witness(n)).real
        assert closed == pytest.approx(direct, abs=1e-10)


def test_witness_value_factorized_matches_closed():
    for lam in (1.5, 2.0, 4.0, 16.0):
        for n in (1, 2, 3, 6):
            eps = lemma1_epsilon(lam, n)
            closed = lemma1_witness_value(lam, eps, n)
            numeric = lemma1_witness_value_numeric(lam, eps, n)
            assert closed == pytest.approx(numeric, abs=1e-10)


def test_witness_value_sign_threshold():
    for lam in (1.5, 2.0, 4.0):
        for n in (1, 2):
            threshold = 1.0 / (lam ** (n + 1) + 1.0)
            for frac in (0.5, 0.9, 1.1):
                eps = frac * threshold
                if eps > 1.0 / (1.0 + lam):
                    continue
                value = lemma1_witness_value(lam, eps, n)
                if frac < 1.0:
                    assert value > 1e-12
                else:
                    assert value < -1e-12


def test_witness_value_zero_at_threshold():
    lam, n = 2.0, 1
    eps = 1.0 / (lam ** (n + 1) + 1.0)
    assert abs(lemma1_witness_value(lam, eps, n)) < 1e-12


def test_block_positivity_small_cases():
    assert block_positivity_check(2.0, EPS1, 1).verdict is Verdict.PASS
    assert block_positivity_check(4.0, 1.0 / 33.0, 2).verdict is Verdict.PASS


def test_block_positivity_matches_full_brute_force():
    for lam in (1.5, 2.0, 4.0):
        for frac in (0.4, 0.8, 1.0):
            eps = frac / (1.0 + lam)
            for n in (1, 2):
                block = block_positivity_check(lam, eps, n)
                full = check_weak_positivity(
                    tensor_power(lemma1_df(lam, eps), n)
                )
                assert block.passed == full.passed, (lam, frac, n)


def test_block_positivity_fail_witness_lifts():
    lam, eps, n = 2.0, 1.0 / 3.0, 2  # boundary eps breaks two copies
    report = block_positivity_check(lam, eps, n)
    assert report.verdict is Verdict.FAIL
    D2 = tensor_power(lemma1_df(lam, eps), n)
    value = quadratic_form(D2.matrix, report.witness.indicator).real
    assert value == pytest.approx(report.witness_value, abs=1e-12)


def test_norm_bound_values():
    bound = norm_bound(4.0, 1.0 / 33.0, 0, 1)
    assert bound == pytest.approx(1.0 - 5.0 / 33.0, abs=1e-12)
    assert bound == pytest.approx(0.8485, abs=1e-4)
    with pytest.raises(DflabError):
        norm_bound(2.0, 0.1, 1, 0)


def test_norm_bound_certificate_sound():
    # a positive bound must imply a passing enumeration
    for lam in (2.0, 4.0, 8.0):
        for n in (1, 2, 3):
            eps = lemma1_epsilon(lam, n)
            for n1 in range(0, n):
                n2 = n - n1
                if norm_bound(lam, eps, n1, n2) > 0.0:
                    from dflab.lemma1 import _block_matrix
                    from dflab.kernels import scan_ascending

                    key, _, _ = scan_ascending(_block_matrix(lam, eps, n1, n2), 1e-10)
                    assert key is None, (lam, n, n1, n2)


def test_norm_bound_tends_to_one():
    lam = 2.0 ** 20
    for n in (1, 2, 3):
        eps = lemma1_epsilon(lam, n)
        for n1 in range(0, n):
            assert norm_bound(lam, eps, n1, n - n1) > 0.99


def test_ncopy_check_certifies_lam4():
    report = ncopy_positivity_check(4.0, 1.0 / 33.0, 2)
    assert report.verdict is Verdict.CERTIFIED
    assert report.strategy is Strategy.NORM_BOUND
    assert report.vectors_checked == 0


def test_find_lambda_small_n():
    # with the certificate-then-enumeration fallback, lam = 2 already passes
    # for every small n (cross-checked against full brute force above)
    for n in (1, 2, 3):
        params = find_lambda(n)
        assert params.lam == 2.0
        assert params.eps == pytest.approx(lemma1_epsilon(2.0, n), abs=1e-15)
        assert lemma1_witness_value(params.lam, params.eps, n) < -1e-10


def test_find_lambda_result_satisfies_contract():
    for n in (1, 2, 3, 4):
        params = find_lambda(n)
        assert params.lam <= 2.0 ** 20
        assert ncopy_positivity_check(params.lam, params.eps, n).passed
        assert lemma1_witness_value(params.lam, params.eps, n) < -1e-10


def test_find_lambda_certificate_only_regime():
    # beyond the per-block enumeration cap only certificates can decide; the
    # witness value scale collapses but its sign test still fires
    from dflab.lemma1 import witness_is_negative

    params = find_lambda(5)
    assert params.lam == 8.0
    report = ncopy_positivity_check(params.lam, params.eps, 5)
    assert report.verdict is Verdict.CERTIFIED
    value = lemma1_witness_value(params.lam, params.eps, 5)
    assert value < 0
    assert witness_is_negative(params.lam, params.eps, 5)
    assert lemma1_experiment(5).lemma_holds


def test_experiment_reports():
    for n in (1, 2, 3):
        report = lemma1_experiment(n)
        assert report.lemma_holds
        assert report.witness_value == pytest.approx(
            report.witness_value_numeric, abs=1e-10
        )
        assert report.n_copy_verdict.passed


def test_experiment_explicit_params():
    report = lemma1_experiment(1, lam=2.0)
    assert report.params.eps == pytest.approx(EPS1, abs=1e-15)
    assert report.witness_value == pytest.approx(-0.039967, abs=1e-6)


def test_family_never_strongly_positive():
    for lam in (1.5, 2.0, 3.0, 8.0):
        for frac in (0.3, 0.7, 1.0):
            eps = frac / (1.0 + lam)
            report = validate_df(lemma1_df(lam, eps))
            assert report.level == ValidationLevel.WEAKLY_POSITIVE
            assert report.strong.min_eigenvalue == pytest.approx(
                eps * (1.0 - lam) / 2.0, abs=1e-10
            )
