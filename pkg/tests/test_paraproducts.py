import json

import numpy as np
import pytest

from haarlab.bmo import bmo_norm, default_family
from haarlab.grid import (analyze2d, cancellative_mask, haar_profiles,
                          indicator_profiles, inner, l2norm, project_cancellative, synthesize2d)
from haarlab.operators import adjoint_symbol, multiply
from haarlab.paraproducts import (CASES, VARIANTS, ParaproductSpec, apply_paraproduct,
                                  apply_paraproduct_samples, case_operator, case_samples,
                                  decomposition_check, decomposition_record, nine_term_commutator_check,
                                  nine_term_expand, paraproduct_adjoint, paraproduct_operator,
                                  product_identity_check, product_record, record_json,
                                  restricted_term, _t2_case_samples)
from haarlab import oracles
from haarlab.experiments import generate_symbol

from conftest import cnormal


def symbol(rng, n, d, max_level=None):
    depth = n.bit_length() - 1
    return cnormal(rng, (n, n, d, d)) * cancellative_mask(depth, max_level)[..., None, None]


@pytest.mark.parametrize("variant", sorted(VARIANTS))
def test_zero_symbol(rng, variant):
    f = cnormal(rng, (8, 8, 2))
    p = ParaproductSpec(variant, np.zeros((8, 8, 2, 2)))
    assert not np.abs(apply_paraproduct(p, f)).max() > 0


def test_p3_single_coefficient_by_hand():
    # B^(R0) = A with R0 = [0,1/2) x [3/4,1); f = h1_{R0} e_1 pairs to 1 against h1_{R0}
    N, n = 3, 8
    A = np.array([[1 + 1j, 2], [0.5j, -1]])
    B = np.zeros((n, n, 2, 2), dtype=complex)
    px, py = 2, 7
    B[px, py] = A
    H1 = indicator_profiles(N)
    f = np.zeros((n, n, 2))
    f[..., 0] = np.outer(H1[px], H1[py])
    out = apply_paraproduct(ParaproductSpec("P3", B), analyze2d(f))
    expect = np.zeros((n, n, 2), dtype=complex)
    expect[px, py] = A[:, 0] * np.sqrt(8.0)
    np.testing.assert_allclose(out, expect, atol=1e-13)


@pytest.mark.parametrize("variant", sorted(VARIANTS))
@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("sign", ["haar", "plus"])
def test_direct_summation_oracle(rng, variant, d, sign):
    B = symbol(rng, 8, d)
    f = cnormal(rng, (8, 8, d))
    got = apply_paraproduct_samples(ParaproductSpec(variant, B, sign=sign), f)
    ref = oracles.direct_paraproduct(variant, B, f, sign)
    assert np.linalg.norm(got - ref) <= 1e-10 * np.linalg.norm(ref)


def test_p2_adjoint_is_p1_type_with_adjoint_symbol(rng):
    B = symbol(rng, 8, 2)
    adj = paraproduct_adjoint(ParaproductSpec("P2", B))
    assert adj.variant == "P1"
    np.testing.assert_array_equal(adj.symbol, adjoint_symbol(B))
    for _ in range(30):
        f, g = cnormal(rng, (8, 8, 2)), cnormal(rng, (8, 8, 2))
        lhs = inner(apply_paraproduct_samples(ParaproductSpec("P2", B), f), g)
        rhs = inner(f, apply_paraproduct_samples(adj, g))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


@pytest.mark.parametrize("variant", sorted(VARIANTS))
@pytest.mark.parametrize("generation", [1, 2])
def test_adjoint_pairing_all_variants(rng, variant, generation):
    B = symbol(rng, 16, 2)
    p = ParaproductSpec(variant, B, generation=generation)
    adj = paraproduct_adjoint(p)
    for _ in range(10):
        f, g = cnormal(rng, (16, 16, 2)), cnormal(rng, (16, 16, 2))
        lhs = inner(apply_paraproduct_samples(p, f), g)
        rhs = inner(f, apply_paraproduct_samples(adj, g))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_real_symmetric_scalar_symbol_adjoint_exact(rng):
    B = rng.standard_normal((8, 8, 1, 1)) * cancellative_mask(3)[..., None, None]
    p = ParaproductSpec("P3", B)
    np.testing.assert_array_equal(paraproduct_adjoint(p).symbol, B)
    T = paraproduct_operator(p)
    f, g = rng.standard_normal((8, 8, 1)), rng.standard_normal((8, 8, 1))
    assert np.vdot(g, T.apply(f)) == pytest.approx(np.vdot(T.adjoint(g), f), abs=1e-13)


def test_generation_two_reaches_grandchildren(rng):
    B = np.zeros((16, 16, 1, 1))
    B[1, 1] = 1.0
    f = cnormal(rng, (16, 16, 1))
    out = analyze2d(apply_paraproduct_samples(ParaproductSpec("P1", B, generation=2), f))
    ys = np.nonzero(np.abs(out[..., 0]).max(axis=0) > 1e-14)[0]
    assert set(ys) <= {4, 5, 6, 7}


def test_invalid_specs():
    with pytest.raises(ValueError):
        ParaproductSpec("P6", np.zeros((4, 4, 1, 1)))
    with pytest.raises(ValueError):
        ParaproductSpec("P1", np.zeros((4, 4, 1, 1)), generation=3)


@pytest.mark.parametrize("case", CASES)
def test_zero_symbol_cases(rng, case):
    T = case_operator(case, np.zeros((8, 8, 1, 1)))
    assert not np.abs(T.apply(cnormal(rng, (8, 8, 1)))).max() > 0


def test_unknown_case():
    with pytest.raises(ValueError):
        case_operator("I>K,J=L", np.zeros((8, 8, 1, 1)))


def test_equal_case_single_coefficient_matches_restricted_sum(rng):
    B = np.zeros((8, 8, 1, 1), dtype=complex)
    B[2, 3] = 1.3 - 0.4j
    f = cnormal(rng, (8, 8, 1)) * cancellative_mask(3, 1)[..., None]
    got = synthesize2d(case_operator("I=K,J=L", B).apply(f))
    ref = oracles.restricted_term(B, f, 2, "I=K,J=L")
    np.testing.assert_allclose(got, ref, atol=1e-12)


@pytest.mark.parametrize("term", [1, 2, 3, 4])
@pytest.mark.parametrize("case", CASES)
@pytest.mark.parametrize("depth,d", [(3, 1), (3, 2), (4, 1)])
def test_cases_match_restricted_sums(rng, term, case, depth, d):
    n = 2 ** depth
    B = symbol(rng, n, d, depth - 2)
    f = project_cancellative(cnormal(rng, (n, n, d)), depth - 2)
    fs = synthesize2d(f)
    got = _t2_case_samples(case, B, fs) if term == 2 else case_samples(case, B, fs, term)
    ref = oracles.restricted_term(B, f, term, case)
    assert np.linalg.norm(got - ref) <= 1e-10 * max(1.0, np.linalg.norm(ref))
    if term == 2:
        np.testing.assert_allclose(got, case_samples(case, B, fs, 2), atol=1e-12)


def test_restricted_terms_assemble(rng):
    B = symbol(rng, 8, 2, 1)
    f = project_cancellative(cnormal(rng, (8, 8, 2)), 1)
    for t in (1, 2, 3, 4):
        np.testing.assert_allclose(restricted_term(B, synthesize2d(f), t),
                                   oracles.restricted_term(B, f, t), atol=1e-12)


def test_decomposition_constant_symbol(rng):
    B = np.zeros((8, 8, 2, 2), dtype=complex)
    B[0, 0] = cnormal(rng, (2, 2))
    f = project_cancellative(cnormal(rng, (8, 8, 2)), 1)
    assert decomposition_check(B, f) < 1e-14


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("depth", [3, 4])
def test_decomposition_random(rng, depth, d):
    n = 2 ** depth
    for _ in range(5):
        B = symbol(rng, n, d, depth - 2)
        f = project_cancellative(cnormal(rng, (n, n, d)), depth - 2)
        assert decomposition_check(B, f) <= 1e-10


def test_haar_sign_is_needed_in_equal_case(rng):
    # with every child sign +1 the equal case no longer matches the restricted sum
    B = symbol(rng, 8, 1, 1)
    f = project_cancellative(cnormal(rng, (8, 8, 1)), 1)
    fs = synthesize2d(f)
    from haarlab.operators import shift_samples
    ref = oracles.restricted_term(B, f, 2, "I=K,J=L")
    plus = shift_samples(apply_paraproduct_samples(ParaproductSpec("P1", B, sign="plus"),
                                                   shift_samples(fs, 1)), 0)
    assert np.linalg.norm(plus - ref) > 1e-3 * np.linalg.norm(ref)


def test_decomposition_record_format(rng):
    B = symbol(rng, 8, 1, 1)
    f = project_cancellative(cnormal(rng, (8, 8, 1)), 1)
    rec = json.loads(record_json(decomposition_record(B, f)))
    assert set(rec) == {"case", "N", "d", "residual"}
    assert rec["N"] == 3 and rec["d"] == 1 and rec["residual"] < 1e-10


def test_nine_terms_constant_function(rng):
    B = cnormal(rng, (8, 8, 2, 2))
    f = np.broadcast_to(cnormal(rng, 2), (8, 8, 2)).copy()
    exp = nine_term_expand(B)
    c = analyze2d(f)
    assert product_identity_check(B, f) < 1e-12
    cancel_only = sum(T.apply(c) for T in exp.terms if _pairs_f_cancellatively(exp, T))
    assert np.abs(cancel_only).max() < 1e-12


def _pairs_f_cancellatively(exp, T):
    (px, py) = exp.patterns[exp.terms.index(T)]
    return px[1] == 0 or py[1] == 0


def test_nine_terms_single_product():
    H = haar_profiles(3)
    h = np.outer(H[3], H[6])
    B = h[..., None, None]
    f = h[..., None]
    exp = nine_term_expand(B)
    total = synthesize2d(sum(T.apply(analyze2d(f)) for T in exp.all_terms()))
    np.testing.assert_allclose(total[..., 0], (h != 0) * 8.0, atol=1e-12)   # |R| = 1/2 * 1/4


def test_nine_term_count_and_order():
    exp = nine_term_expand(np.zeros((4, 4, 1, 1)))
    assert len(exp.terms) == 9
    assert [T.name for T in exp.terms] == [f"T{i}" for i in range(1, 10)]


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("depth", [3, 4])
def test_nine_term_identity(rng, depth, d):
    n = 2 ** depth
    B, f = cnormal(rng, (n, n, d, d)), cnormal(rng, (n, n, d))
    assert product_identity_check(B, f) <= 1e-10
    assert nine_term_commutator_check(B, f) <= 1e-10


def test_nine_term_adjoints(rng):
    B = cnormal(rng, (8, 8, 2, 2))
    for T in nine_term_expand(B).all_terms():
        f, g = cnormal(rng, (8, 8, 2)), cnormal(rng, (8, 8, 2))
        assert np.vdot(g, T.apply(f)) == pytest.approx(np.vdot(T.adjoint(g), f), abs=1e-10)


def test_product_record(rng):
    B, f = cnormal(rng, (8, 8, 2, 2)), cnormal(rng, (8, 8, 2))
    rec = product_record(B, f)
    assert rec["case"] == "nine-term" and rec["residual"] < 1e-10
    np.testing.assert_allclose(multiply(B, f), np.einsum("xyij,xyj->xyi", B, f), atol=1e-13)


def test_boundedness_constants_recorded(rng):
    family = default_family(3, 0)
    worst = {v: 0.0 for v in VARIANTS}
    for _ in range(200):
        B = generate_symbol("random-gaussian", 3, 2, rng)
        b = bmo_norm(B, family).openset_norm
        f = cnormal(rng, (8, 8, 2))
        for v in VARIANTS:
            out = apply_paraproduct_samples(ParaproductSpec(v, B), f)
            worst[v] = max(worst[v], l2norm(out) / l2norm(f) / (2 * b))
    assert all(np.isfinite(x) and x > 0 for x in worst.values())
    print("max ||P f|| / (d ||B||_BMO ||f||):", {k: round(v, 3) for k, v in worst.items()})
