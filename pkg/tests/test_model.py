import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

import markov_dichotomy as md
from markov_dichotomy.model import _canonical_vector

MINIMAL = {
    "alphabet": ["a", "b"],
    "sided": "one",
    "pi0": [0.5, 0.5],
    "step0": [[0.5, 0.5], [0.5, 0.5]],
    "transitions": {
        "prefix": [[[0.9, 0.1], [0.2, 0.8]]],
        "tail": {"kind": "constant", "P": [[0.5, 0.5], [0.5, 0.5]]},
    },
}


def doc(**overrides):
    out = json.loads(json.dumps(MINIMAL))
    out.update(overrides)
    return out


def test_parse_minimal_one_sided():
    spec = md.parse_spec(json.dumps(MINIMAL))
    assert spec.n_states == 2
    assert spec.alphabet == ("a", "b")


def test_parse_two_sided_squares_the_state_space():
    two = doc(sided="two", step0=[[0.25] * 4] * 2)
    two["transitions"] = {
        "prefix": [],
        "tail": {"kind": "constant", "P": [[0.25] * 4] * 4},
    }
    spec = md.parse_spec(json.dumps(two))
    assert spec.n_states == 4
    assert spec.states[1] == ("a", "b")


def test_bad_row_sum_names_the_row():
    bad = doc(step0=[[0.49, 0.49], [0.5, 0.5]])
    with pytest.raises(md.SpecNumericError, match="step0 row 0"):
        md.parse_spec(json.dumps(bad))


def test_negative_entry_rejected_with_location():
    bad = doc(pi0=[-0.1, 1.1])
    with pytest.raises(md.SpecNumericError, match="pi0.*negative"):
        md.parse_spec(json.dumps(bad))


def test_missing_field_named():
    bad = doc()
    del bad["pi0"]
    with pytest.raises(md.SpecFormatError, match="pi0"):
        md.parse_spec(json.dumps(bad))


def test_non_json_is_a_schema_error():
    with pytest.raises(md.SpecFormatError, match="JSON"):
        md.parse_spec("{not json")


def test_duplicate_symbols_rejected():
    with pytest.raises(md.SpecFormatError, match="distinct"):
        md.parse_spec(json.dumps(doc(alphabet=["a", "a"])))


def test_roundtrip_is_bitwise_identity():
    # 0.3 + 0.7 != 1 exactly in binary, so parsing renormalizes; the second
    # pass must then be a no-op on every stored float.
    text = json.dumps(doc(pi0=[0.3, 0.7], step0=[[0.3, 0.7], [0.7, 0.3]]))
    first = md.parse_spec(text)
    second = md.parse_spec(md.serialize_spec(first))
    assert np.array_equal(first.pi0, second.pi0)
    assert np.array_equal(first.step0, second.step0)
    for p, q in zip(first.transitions.prefix, second.transitions.prefix):
        assert np.array_equal(p, q)
    assert np.array_equal(first.transitions.tail.matrix, second.transitions.tail.matrix)


def test_canonicalize_point_mass_composition():
    spec = md.spec_from_dict(doc(pi0=[1.0, 0.0], step0=[[0.0, 1.0], [1.0, 0.0]]))
    chain = md.canonicalize(spec)
    assert np.array_equal(chain.lambda1, [0.0, 1.0])


def test_canonicalize_uniform_rows_stay_uniform():
    chain = md.canonicalize(md.spec_from_dict(MINIMAL))
    assert np.array_equal(chain.lambda1, [0.5, 0.5])


def test_canonicalize_matrix_vector_product():
    spec = md.spec_from_dict(doc(pi0=[0.3, 0.7], step0=[[0.5, 0.5], [0.2, 0.8]]))
    chain = md.canonicalize(spec)
    assert chain.lambda1 == pytest.approx([0.29, 0.71], abs=1e-15)
    assert chain.lambda1.sum() == pytest.approx(1.0, abs=1e-12)


def test_transition_at_prefix_is_bit_identical():
    chain = md.canonicalize(md.spec_from_dict(MINIMAL))
    stored = chain.transitions.prefix[0]
    assert md.transition_at(chain, 1) is stored


def test_transition_at_constant_tail():
    chain = md.canonicalize(md.spec_from_dict(MINIMAL))
    for n in (2, 5, 1000):
        assert np.array_equal(md.transition_at(chain, n), np.full((2, 2), 0.5))


def test_transition_at_power_tail_formula():
    base = np.full((2, 2), 0.5)
    delta = np.array([[1.0, -1.0], [-1.0, 1.0]])
    chain = md.build_chain(
        ["a", "b"], md.ONE_SIDED, [0.5, 0.5], [], md.PowerTail(base, delta, 0.1, 1.0)
    )
    expected = base + 0.01 * delta
    assert np.array_equal(md.transition_at(chain, 10), expected)
    # pure function: repeated calls agree exactly
    assert np.array_equal(md.transition_at(chain, 10), md.transition_at(chain, 10))


def test_support_pattern_strictly_positive():
    chain = md.canonicalize(md.spec_from_dict(MINIMAL))
    assert md.support_pattern(chain, 2).all()


def test_support_pattern_permutation():
    swap = [[0.0, 1.0], [1.0, 0.0]]
    chain = md.build_chain(["a", "b"], md.ONE_SIDED, [0.5, 0.5], [swap], md.ConstantTail(swap))
    assert np.array_equal(md.support_pattern(chain, 1), np.array(swap, dtype=bool))


def test_support_pattern_constant_over_power_tail():
    base = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])
    delta = np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 1.0, -1.0]])
    chain = md.build_chain(
        ["a", "b", "c"], md.ONE_SIDED, [1, 0, 0], [], md.PowerTail(base, delta, 0.2, 0.5)
    )
    pattern = md.support_pattern(chain, 1)
    for n in (2, 7, 10_000):
        assert np.array_equal(md.support_pattern(chain, n), pattern)


def test_power_tail_must_vanish_off_the_base_support():
    base = [[1.0, 0.0], [0.5, 0.5]]
    delta = [[-1.0, 1.0], [0.0, 0.0]]
    with pytest.raises(md.SpecNumericError, match="base matrix vanishes"):
        md.build_chain(["a", "b"], md.ONE_SIDED, [1, 0], [], md.PowerTail(base, delta, 0.1, 1.0))


def test_power_tail_must_stay_positive_at_first_index():
    base = np.full((2, 2), 0.5)
    delta = np.array([[1.0, -1.0], [1.0, -1.0]])
    with pytest.raises(md.SpecNumericError, match="strictly positive"):
        md.build_chain(["a", "b"], md.ONE_SIDED, [1, 0], [], md.PowerTail(base, delta, 0.5, 1.0))


def test_power_tail_delta_row_sums_must_vanish():
    base = np.full((2, 2), 0.5)
    delta = np.array([[1.0, -0.5], [0.0, 0.0]])
    with pytest.raises(md.SpecNumericError, match="row sum"):
        md.build_chain(["a", "b"], md.ONE_SIDED, [1, 0], [], md.PowerTail(base, delta, 0.1, 1.0))


def test_incompatible_chains_detected():
    one = md.canonicalize(md.spec_from_dict(MINIMAL))
    other = md.build_chain(["x", "y"], md.ONE_SIDED, [1, 0],
                           [], md.ConstantTail(np.full((2, 2), 0.5)))
    with pytest.raises(md.IncompatibleChainsError):
        md.hellinger_integral(one, other, 2)


def test_types_are_immutable():
    chain = md.canonicalize(md.spec_from_dict(MINIMAL))
    with pytest.raises(ValueError):
        chain.lambda1[0] = 0.9
    with pytest.raises(ValueError):
        chain.transitions.prefix[0][0, 0] = 0.9


@given(st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=1, max_size=6))
def test_vector_canonicalization_is_idempotent(raw):
    import math

    total = sum(raw)
    vec = _canonical_vector([x / total for x in raw], "vec")
    assert math.fsum(vec.tolist()) == 1.0
    again = _canonical_vector(vec, "vec")
    assert np.array_equal(vec, again)
