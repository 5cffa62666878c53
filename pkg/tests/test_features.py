import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from gipkernel.dynamics import JointState, builtin_robot, random_robot
from gipkernel.errors import InvalidInputError
from gipkernel.features import (
    AugmentedLayout,
    Convention,
    MonomialSet,
    augment,
    augmented_dim,
    certify_polynomial_dynamics,
    count_monomials,
    enumerate_monomials,
    evaluate_monomials,
    random_states,
)


def brute_force_count(letters, convention, reduced=False):
    """Filter every exponent vector with entries <= 2 against the definition."""
    layout = AugmentedLayout(letters)
    av = layout.av_columns()
    count = 0
    for e in itertools.product(range(3), repeat=layout.dim):
        e = np.array(e)
        if np.any(e[av] > 1) or e.sum() > 2 * layout.n + 1:
            continue
        pairs = [layout.cs_pair(b) for b in range(layout.n_r)]
        if any(e[c] + e[s] > 2 for c, s in pairs):
            continue
        if reduced and any(e[s] == 2 for _, s in pairs):
            continue
        if convention is Convention.GIP_RKHS and e[av].sum() > 1:
            continue
        count += 1
    return count


def test_augmented_layout_scara():
    layout = AugmentedLayout("RRPR")
    assert layout.dim == augmented_dim("RRPR") == 2 * 3 + 1 + 10 + 4
    assert layout.velocity_pairs()[:4] == [(0, 0), (0, 1), (0, 2), (0, 3)]
    assert len(layout.variable_names()) == layout.dim


def test_augment_values():
    s = JointState([0.3, 0.1, -0.4], [1.0, 2.0, 3.0], [0.5, 0.6, 0.7])
    x = augment(s, "RPR").as_array()
    assert_allclose(x[:2], np.cos([0.3, -0.4]))
    assert_allclose(x[2:4], np.sin([0.3, -0.4]))
    assert x[4] == 0.1
    assert_allclose(x[5:11], [1, 2, 3, 4, 6, 9])
    assert_allclose(x[11:], [0.5, 0.6, 0.7])


def test_augment_rejects_wrong_width():
    with pytest.raises(InvalidInputError):
        augment(JointState([0.0], [0.0], [0.0]), "RR")


@pytest.mark.parametrize("letters", ["R", "P", "RR", "RP", "PR", "PP"])
@pytest.mark.parametrize("convention", list(Convention))
@pytest.mark.parametrize("reduced", [False, True])
def test_counts_match_brute_force(letters, convention, reduced):
    expected = brute_force_count(letters, convention, reduced)
    assert count_monomials(letters, convention, reduced) == expected
    ms = enumerate_monomials(letters, convention, reduced=reduced)
    assert len(ms) == expected
    assert len({tuple(r) for r in ms.exponents}) == expected


def test_large_counts():
    assert count_monomials("RRPR", Convention.GIP_RKHS) == 216 * 3 * 15
    assert count_monomials("RRPR", Convention.GIP_RKHS, reduced=True) == 125 * 3 * 15
    assert count_monomials("RRPR", Convention.FULL) == 1_600_556
    assert count_monomials("RRRRRR", Convention.GIP_RKHS) == 6 ** 6 * 28
    with pytest.raises(InvalidInputError):
        enumerate_monomials("RRRRRR", Convention.FULL)


def test_count_requires_joints():
    with pytest.raises(InvalidInputError):
        count_monomials("")


def test_evaluate_monomials_against_direct_product():
    ms = enumerate_monomials("RP")
    x = np.random.default_rng(0).normal(size=(5, ms.exponents.shape[1]))
    direct = np.prod(x[:, None, :] ** ms.exponents[None].astype(float), axis=-1)
    assert_allclose(evaluate_monomials(x, ms), direct, rtol=1e-13)


def test_monomial_set_json_round_trip():
    ms = enumerate_monomials("PR", reduced=True)
    back = MonomialSet.from_json(ms.to_json())
    assert_array_equal(back.exponents, ms.exponents)
    assert back.convention is ms.convention and back.reduced


def test_without_drops_velocity_terms():
    ms = enumerate_monomials("RR")
    ablated = ms.without(ms.layout.vel)
    assert not np.any(ablated.exponents[:, ms.layout.vel] > 0)
    assert len(ablated) == 36 * (1 + 2)


@pytest.mark.parametrize("name", ["rr", "rp", "pr", "pp"])
def test_certification_passes_for_two_link_chains(name):
    model = builtin_robot(name)
    reports = certify_polynomial_dynamics(model, random_states(model.joint_types, 400, 0))
    assert all(r.passed for r in reports), [r.residual for r in reports]


def test_certification_on_non_reduced_set_uses_rank_revealing_path():
    model = random_robot("RR", 3)
    ms = enumerate_monomials("RR")
    report = certify_polynomial_dynamics(model, random_states("RR", 500, 1), 0, ms)
    assert report.passed
    assert report.rank == count_monomials("RR", reduced=True) < len(ms)


def test_certification_detects_missing_velocity_terms():
    model = random_robot("RR", 4)
    ms = enumerate_monomials("RR", reduced=True)
    reports = certify_polynomial_dynamics(model, random_states("RR", 400, 2), None, ms.without(ms.layout.vel))
    assert max(r.residual for r in reports) > 1e-3


def test_certification_rejects_too_few_samples():
    model = builtin_robot("rr")
    with pytest.raises(InvalidInputError):
        certify_polynomial_dynamics(model, random_states("RR", 100, 0), 0)
    with pytest.raises(InvalidInputError):
        certify_polynomial_dynamics(model, random_states("RR", 400, 0), 5)


@settings(max_examples=15, deadline=None)
@given(st.text(alphabet="RP", min_size=1, max_size=2), st.integers(0, 1000))
def test_random_chains_are_polynomial_in_augmented_input(letters, seed):
    model = random_robot(letters, seed)
    reports = certify_polynomial_dynamics(model, random_states(letters, 400, seed))
    assert max(r.residual for r in reports) < 1e-8


@pytest.mark.parametrize("letters", ["".join(p) for p in itertools.product("RP", repeat=3)] + ["RPRP", "PRRP"])
def test_longer_random_chains_are_polynomial_in_augmented_input(letters):
    model = random_robot(letters, len(letters) * 100 + letters.count("R"))
    ms = enumerate_monomials(letters, reduced=True)
    samples = random_states(letters, int(1.5 * len(ms)) + 1, 5)
    reports = certify_polynomial_dynamics(model, samples, monomials=ms)
    assert max(r.residual for r in reports) < 1e-8, [r.residual for r in reports]
