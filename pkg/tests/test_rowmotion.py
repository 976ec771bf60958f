import json
import sys
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from ncrowmotion.algebra import UNDEFINED, Matrix, StructureError, parse_ring
from ncrowmotion.poset import chain, claw, random_poset, rectangle
from ncrowmotion.rng import SplitMix64
from ncrowmotion.rowmotion import (
    Labeling,
    Orbit,
    check_extension_independence,
    check_implicit_recurrence,
    check_normalize_bottom,
    check_well_definedness,
    iterate,
    normalize_bottom,
    random_labeling,
    rowmotion,
    rowmotion_via_extension,
    toggle,
    toggle_commutes,
)

Q = parse_ring("q")
MAT2 = parse_ring("mat:2")
F = Fraction


def sym(m: Matrix):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m.rows()])


def golden_labels(seed):
    """a, w, x, y, z, b as sympy matrices plus the matching labeling."""
    P = rectangle(2, 2)
    f = random_labeling(P, MAT2, seed)
    keys = ["BOT", "(1,1)", "(2,1)", "(1,2)", "(2,2)", "TOP"]
    a, w, x, y, z, b = (sym(f[k]) for k in keys)
    return f, (a, w, x, y, z, b)


def example_rational_labeling():
    P = rectangle(2, 2)
    return Labeling.from_mapping(P, Q, {
        "BOT": F(12), "(1,1)": F(5), "(2,1)": F(-2), "(1,2)": F(7), "(2,2)": F(10), "TOP": F(14),
    })


# -- toggles -----------------------------------------------------------------


def test_toggle_rational_example():
    f = example_rational_labeling()
    g = toggle(f, f.poset.element((2, 2)))
    assert g["(2,2)"] == 7
    for k in ("BOT", "TOP", "(1,1)", "(1,2)", "(2,1)"):
        assert g[k] == f[k]


def test_toggle_all_ones():
    P = rectangle(2, 2)
    f = Labeling(P, Q, [F(1)] * 6)
    assert toggle(f, P.element((2, 2)))["(2,2)"] == 2


def test_toggle_zero_label_is_undefined():
    f = example_rational_labeling().replace(0, F(0))
    assert toggle(f, 0) is UNDEFINED
    assert toggle(UNDEFINED, 0) is UNDEFINED


def test_toggle_sentinel_is_structural_error():
    f = example_rational_labeling()
    with pytest.raises(StructureError):
        toggle(f, f.poset.n)
    with pytest.raises(StructureError):
        toggle(f, f.poset.n + 1)


@given(st.integers(0, 10**6), st.integers(0, 7))
def test_toggle_locality(seed, k):
    P = random_poset(6, seed)
    f = random_labeling(P, MAT2, seed)
    v = k % max(P.n, 1)
    if P.n == 0:
        return
    g = toggle(f, v)
    if g is not UNDEFINED:
        assert all(g.values[w] == f.values[w] for w in range(P.n + 2) if w != v)


def test_toggle_commutes_examples():
    P = rectangle(2, 2)
    f = random_labeling(P, MAT2, 3)
    a, b = P.element((1, 2)), P.element((2, 1))
    assert toggle_commutes(f, a, b).passed
    assert toggle_commutes(f, a, a).passed
    assert toggle_commutes(f, P.element((1, 1)), a).status == "not_applicable"


# -- rowmotion --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_golden_2x2_closed_forms(seed):
    f, (a, w, x, y, z, b) = golden_labels(seed)
    inv = lambda m: m.inv()
    o = Orbit(f)
    got = [{k: sym(o[l][k]) for k in ("(1,1)", "(1,2)", "(2,1)", "(2,2)")} for l in range(1, 5)]
    s = x + y
    r1 = {
        "(2,2)": s * inv(z) * b,
        "(2,1)": w * inv(x) * s * inv(z) * b,
        "(1,2)": w * inv(y) * s * inv(z) * b,
        "(1,1)": a * inv(z) * b,
    }
    r2 = {
        "(2,2)": w * (inv(x) + inv(y)) * b,
        "(2,1)": a * inv(y) * b,
        "(1,2)": a * inv(x) * b,
        "(1,1)": a * inv(b) * z * inv(s) * b,
    }
    r3 = {
        "(2,2)": a * inv(w) * b,
        "(2,1)": a * inv(b) * z * inv(s) * y * inv(w) * b,
        "(1,2)": a * inv(b) * z * inv(s) * x * inv(w) * b,
        "(1,1)": a * inv(b) * inv(inv(x) + inv(y)) * inv(w) * b,
    }
    labels = {"(1,1)": w, "(2,1)": x, "(1,2)": y, "(2,2)": z}
    r4 = {k: a * inv(b) * v * inv(a) * b for k, v in labels.items()}
    for expected, actual in zip((r1, r2, r3, r4), got):
        for k in expected:
            assert actual[k] == sympy.simplify(expected[k]), k
    # the unsimplified form of (R^2 f)(2,1)
    assert got[1]["(2,1)"] == a * inv(s) * x * (inv(x) + inv(y)) * b


def test_single_element_poset():
    P = chain(1)
    f = Labeling(P, Q, [F(3), F(2), F(5)])
    assert rowmotion(f)["c0"] == F(2) / 3 * 5


def test_nonunit_top_on_nonempty_poset_is_undefined():
    P = chain(2)
    f = Labeling(P, Q, [F(1), F(1), F(1), F(0)])
    assert rowmotion(f) is UNDEFINED


def test_boundary_labels_are_constant():
    f = random_labeling(rectangle(3, 2), MAT2, 4)
    for g in iterate(f, 5):
        if g is UNDEFINED:
            break
        assert g.bottom == f.bottom and g.top == f.top


def test_iterate_length_and_zero():
    f = random_labeling(rectangle(2, 2), MAT2, 1)
    assert iterate(f, 0) == [f]
    assert len(iterate(f, 4)) == 5
    with pytest.raises(StructureError):
        iterate(f, -1)


def test_undefined_is_absorbing_along_orbit():
    f = example_rational_labeling().replace(0, F(0))
    states = iterate(f, 3)
    assert states[0] == f and all(s is UNDEFINED for s in states[1:])
    assert Orbit(f).last_defined(3) == 0


@given(st.integers(0, 10**6))
def test_monotone_definedness(seed):
    # small entries make singular sums common
    f = random_labeling(rectangle(2, 3), MAT2, seed, bound=1)
    states = iterate(f, 6)
    seen_undefined = False
    for s in states:
        if s is UNDEFINED:
            seen_undefined = True
        else:
            assert not seen_undefined


@pytest.mark.parametrize("p,q", [(1, 1), (2, 2), (2, 3), (3, 3), (4, 4)])
def test_commutative_unit_boundary_is_periodic(p, q):
    P = rectangle(p, q)
    for seed in range(3):
        f = random_labeling(P, Q, seed, unit_boundary=True)
        g = Orbit(f)[p + q]
        if g is not UNDEFINED:
            assert g == f


def test_extension_choice_does_not_matter_2x2():
    P = rectangle(2, 2)
    exts, _ = P.all_linear_extensions()
    assert len(exts) == 2
    for seed in range(10):
        f = random_labeling(P, MAT2, seed)
        results = {rowmotion_via_extension(f, e) for e in exts}
        assert results == {rowmotion(f)}


def test_rowmotion_via_bad_extension_rejected():
    P = rectangle(2, 2)
    f = random_labeling(P, MAT2, 0)
    with pytest.raises(StructureError):
        rowmotion_via_extension(f, [P.element(c) for c in ((1, 1), (1, 2), (2, 2), (2, 1))])


@given(st.integers(0, 10**6), st.integers(0, 6))
def test_extension_lattice_check(seed, n):
    P = random_poset(n, seed)
    assert check_extension_independence(random_labeling(P, MAT2, seed)).passed


def test_extension_lattice_catches_order_dependence(monkeypatch):
    rm = sys.modules["ncrowmotion.rowmotion"]
    real = rm._toggled_label
    P = claw()
    q1, q2 = P.element("q1"), P.element("q2")

    def skewed(f, v):
        # reads the incomparable q1 when toggling q2, so the order matters
        x = real(f, v)
        return f.ring.mul(x, f.values[q1]) if v == q2 else x

    monkeypatch.setattr(rm, "_toggled_label", skewed)
    v = check_extension_independence(random_labeling(P, MAT2, 2))
    assert v.status == "fail"
    assert v.failures[0]["location"]["up_set"]


@given(st.integers(0, 10**6))
def test_implicit_recurrence(seed):
    f = random_labeling(rectangle(2, 3), MAT2, seed)
    o = Orbit(f)
    for l in range(3):
        for v in range(f.poset.n):
            assert check_implicit_recurrence(o, l, v).ok


def test_implicit_recurrence_not_applicable_when_undefined():
    f = example_rational_labeling().replace(0, F(0))
    assert check_implicit_recurrence(Orbit(f), 0, 1).status == "not_applicable"


# -- bottom normalization and definedness ------------------------------------


def test_normalize_bottom_examples():
    f = random_labeling(rectangle(2, 2), MAT2, 8)
    g = normalize_bottom(f)
    assert g.bottom == MAT2.one and g.values[:-2] == f.values[:-2] and g.top == f.top
    rf, rg = rowmotion(f), rowmotion(g)
    assert rf["(1,1)"] == MAT2.mul(f.bottom, rg["(1,1)"])
    assert rf["(2,2)"] == rg["(2,2)"]
    h = random_labeling(claw(), MAT2, 8)
    rh, rk = rowmotion(h), rowmotion(normalize_bottom(h))
    assert rh["p"] == MAT2.mul(h.bottom, rk["p"])
    assert all(rh[q] == rk[q] for q in ("q1", "q2", "q3"))


def test_normalize_bottom_identity_case():
    f = random_labeling(rectangle(2, 2), MAT2, 8).replace(4, MAT2.one)
    assert normalize_bottom(f) == f
    assert check_normalize_bottom(f).passed


@given(st.integers(0, 10**6), st.integers(1, 6))
def test_normalize_bottom_property(seed, n):
    f = random_labeling(random_poset(n, seed), MAT2, seed)
    assert check_normalize_bottom(f).ok


@given(st.integers(0, 10**6), st.integers(0, 6), st.integers(1, 3))
def test_well_definedness_ladder(seed, n, bound):
    P = random_poset(n, seed)
    # plain draws, so non-invertible labels actually occur
    r = SplitMix64(seed)
    f = Labeling(P, MAT2, [MAT2.draw(r, bound) for _ in range(P.n + 2)])
    assert check_well_definedness(f).ok
    assert check_well_definedness(random_labeling(P, MAT2, seed, bound=bound)).ok


# -- serialization ------------------------------------------------------------


def test_labeling_json_round_trip():
    f = random_labeling(rectangle(2, 2), MAT2, 5)
    text = json.dumps(f.to_json(), sort_keys=True)
    g = Labeling.from_json(f.poset, json.loads(text))
    assert g == f
    assert json.dumps(g.to_json(), sort_keys=True) == text


def test_labeling_json_errors_name_the_key():
    f = random_labeling(rectangle(2, 2), Q, 5)
    obj = f.to_json()
    del obj["labels"]["(1,2)"]
    with pytest.raises(StructureError, match=r"\(1,2\)"):
        Labeling.from_json(f.poset, obj)
    obj = f.to_json()
    obj["labels"]["(2,1)"] = "3/0"
    with pytest.raises(StructureError, match=r"\(2,1\)"):
        Labeling.from_json(f.poset, obj)
    with pytest.raises(StructureError, match="ring"):
        Labeling.from_json(f.poset, {"labels": {}})


def test_labeling_rejects_wrong_length_and_ring():
    P = rectangle(1, 1)
    with pytest.raises(StructureError):
        Labeling(P, Q, [F(1)] * 2)
    with pytest.raises(StructureError):
        Labeling(P, Q, [F(1), F(1), MAT2.one])
