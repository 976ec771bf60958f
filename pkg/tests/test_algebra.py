from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from ncrowmotion.algebra import (
    UNDEFINED,
    Matrix,
    MatrixRing,
    RingDescriptor,
    StructureError,
    Tropical,
    add,
    check_inverse_laws,
    check_sum_inverse_identity,
    format_fraction,
    make_ring,
    mul,
    parse_fraction,
    parse_ring,
    random_invertible,
    try_invert,
)
from ncrowmotion.rng import SplitMix64

fractions = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 12))


def matrices(dim):
    return st.lists(fractions, min_size=dim * dim, max_size=dim * dim).map(
        lambda xs: Matrix.from_rows([xs[i * dim:(i + 1) * dim] for i in range(dim)])
    )


def to_sympy(m: Matrix):
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m.rows()])


def from_sympy(s):
    return Matrix.from_rows([[Fraction(int(s[i, j].p), int(s[i, j].q)) for j in range(s.cols)] for i in range(s.rows)])


# -- SplitMix64 ------------------------------------------------------------


def test_splitmix_reference_outputs():
    # published reference values for seed 1234567
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(5)] == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
        4593380528125082431,
        16408922859458223821,
    ]
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


@given(st.integers(0, 2**64 - 1), st.integers(-50, 50), st.integers(0, 100))
def test_randint_stays_in_range(seed, lo, span):
    rng = SplitMix64(seed)
    for _ in range(5):
        assert lo <= rng.randint(lo, lo + span) <= lo + span


def test_randint_rejects_empty_range():
    with pytest.raises(ValueError):
        SplitMix64(1).randint(3, 2)


# -- rationals ----------------------------------------------------------------


def test_fraction_text_round_trip():
    assert format_fraction(Fraction(-3, 6)) == "-1/2"
    assert format_fraction(Fraction(4)) == "4/1"
    assert parse_fraction("-1/2") == Fraction(-1, 2)
    assert parse_fraction("7") == 7
    assert parse_fraction(5) == 5


@pytest.mark.parametrize("bad", ["p/0", "1/0", "1.5", "", "a", True, None, 1.5])
def test_fraction_parse_errors(bad):
    with pytest.raises(StructureError):
        parse_fraction(bad)


@given(fractions)
def test_fraction_json_round_trip(x):
    ring = parse_ring("q")
    assert ring.from_json(ring.to_json(x)) == x


def test_rational_inverse():
    q = parse_ring("q")
    assert q.try_invert(Fraction(0)) is UNDEFINED
    assert q.try_invert(Fraction(-2, 3)) == Fraction(-3, 2)


# -- matrices -----------------------------------------------------------------


def test_matrix_canonical_form():
    a = Matrix(2, [2, 4, 6, 8], 2)
    b = Matrix(2, [-1, -2, -3, -4], -1)
    assert a == b and hash(a) == hash(b)
    assert a.den == 1 and a.nums == (1, 2, 3, 4)


def test_matrix_rejects_bad_shapes():
    with pytest.raises(StructureError):
        Matrix(2, [1, 2, 3])
    with pytest.raises(StructureError):
        Matrix.from_rows([[1, 2], [3]])
    with pytest.raises(StructureError):
        Matrix.identity(2) * Matrix.identity(3)


@given(matrices(2), matrices(2))
def test_matrix_arithmetic_matches_sympy(x, y):
    assert to_sympy(x + y) == to_sympy(x) + to_sympy(y)
    assert to_sympy(x * y) == to_sympy(x) * to_sympy(y)
    assert to_sympy(x - y) == to_sympy(x) - to_sympy(y)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_matrix_inverse_matches_sympy(dim):
    rng = SplitMix64(dim)
    ring = MatrixRing(dim)
    singular = 0
    for _ in range(60):
        m = ring.draw(rng, 2)
        s = to_sympy(m)
        assert m.determinant() == Fraction(str(s.det()))
        inv = m.inverse()
        if s.det() == 0:
            singular += 1
            assert inv is None
        else:
            assert inv == from_sympy(s.inv())
    assert singular > 0


@given(matrices(3))
def test_matrix_inverse_is_two_sided(m):
    inv = m.inverse()
    if inv is None:
        assert to_sympy(m).det() == 0
    else:
        one = Matrix.identity(3)
        assert m * inv == one and inv * m == one


def test_matrix_json_round_trip():
    ring = parse_ring("mat:2")
    m = Matrix.from_rows([[Fraction(1, 2), -3], [0, Fraction(5, 7)]])
    assert ring.to_json(m) == [["1/2", "-3/1"], ["0/1", "5/7"]]
    assert ring.from_json(ring.to_json(m)) == m
    with pytest.raises(StructureError):
        ring.from_json([["1/2"]])
    with pytest.raises(StructureError):
        ring.from_json([["1/0", "0"], ["0", "1"]])


# -- tropical -----------------------------------------------------------------


def test_tropical_operations():
    t = parse_ring("trop")
    assert t.add(Tropical(3), Tropical(-1)) == Tropical(3)
    assert t.mul(Tropical(3), Tropical(-1)) == Tropical(2)
    assert t.add(t.zero, Tropical(5)) == Tropical(5)
    assert t.mul(t.zero, Tropical(5)) == t.zero
    assert t.try_invert(Tropical(4)) == Tropical(-4)
    assert t.try_invert(t.zero) is UNDEFINED
    assert t.sum([]) == t.zero


def test_tropical_json():
    t = parse_ring("trop")
    assert t.to_json(Tropical(None)) == {"t": "-inf"}
    assert t.from_json({"t": "3/2"}) == Tropical(Fraction(3, 2))
    with pytest.raises(StructureError):
        t.from_json({"x": "1"})


# -- rings and partial arithmetic --------------------------------------------


@pytest.mark.parametrize("spec", ["q", "mat:1", "mat:3", "trop"])
def test_ring_spec_and_descriptor_round_trip(spec):
    ring = parse_ring(spec)
    assert ring.descriptor.spec == spec
    assert make_ring(RingDescriptor.from_json(ring.descriptor.to_json())) == ring


@pytest.mark.parametrize("bad", ["mat:0", "mat:", "z", "matrix:2"])
def test_bad_ring_spec(bad):
    with pytest.raises(StructureError):
        parse_ring(bad)


def test_descriptor_validation():
    with pytest.raises(StructureError):
        RingDescriptor("rational_matrix")
    with pytest.raises(StructureError):
        RingDescriptor("exact_rational", 2)
    with pytest.raises(StructureError):
        RingDescriptor("integers")


def test_undefined_absorbs():
    one = Fraction(1)
    assert add(UNDEFINED, one) is UNDEFINED
    assert mul(one, UNDEFINED) is UNDEFINED
    assert try_invert(UNDEFINED) is UNDEFINED
    ring = parse_ring("mat:2")
    assert ring.sum([ring.one, UNDEFINED, ring.one]) is UNDEFINED
    assert ring.prod([UNDEFINED]) is UNDEFINED


def test_ring_mismatch_is_structural():
    with pytest.raises(StructureError):
        add(Fraction(1), Matrix.identity(2))
    with pytest.raises(StructureError):
        parse_ring("mat:2").mul(Matrix.identity(3), Matrix.identity(3))


def test_random_invertible_is_deterministic():
    d = RingDescriptor("rational_matrix", 3)
    x = random_invertible(d, 42, 9)
    assert x == random_invertible(d, 42, 9)
    assert x.inverse() is not None
    with pytest.raises(StructureError):
        random_invertible(d, 42, 0)


def test_draw_invertible_gives_up():
    class ZeroRing(type(parse_ring("q"))):
        def draw(self, rng, bound):
            return Fraction(0)

    with pytest.raises(StructureError):
        ZeroRing().draw_invertible(SplitMix64(0), 3, max_tries=5)


@given(matrices(2), matrices(2))
def test_inverse_laws(x, y):
    assert check_inverse_laws(x, y).ok


@given(matrices(2), matrices(2))
def test_sum_inverse_identities(x, y):
    assert check_sum_inverse_identity(x, y).ok


def test_sum_inverse_identity_not_applicable_when_sum_singular():
    x = Matrix.identity(2)
    v = check_sum_inverse_identity(x, -x)
    assert v.status == "not_applicable"
