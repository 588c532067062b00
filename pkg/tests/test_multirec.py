from __future__ import annotations

import numpy as np
import pytest

from ncrecur.algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    State,
    alg_mul,
    alg_star,
    indicator_element,
    state_eval,
)
from ncrecur.dynamics import (
    DynMap,
    StarDynamicalSystem,
    conjugation_from_unitary,
    koopman_from_map,
    tau_at,
    validated,
)
from ncrecur.ergodic import khintchine_recurrence
from ncrecur.exceptions import PreconditionError
from ncrecur.gns import gns_build, gns_lift
from ncrecur.multirec import (
    Endomorphism,
    endo_pullback,
    multiple_recurrence_search,
    multiple_recurrence_tensor_oracle,
    tensor_elements,
    tensor_systems,
)
from ncrecur.semigroup import SemigroupModel, box_folner_net, word_ball

from oracles import overlap

CONE1 = SemigroupModel.cone(1)


def shift_system(m, step=1, model=CONE1):
    t = koopman_from_map(lambda x: (x + step) % m, m)
    return validated(StarDynamicalSystem(t.descriptor, State.uniform(m), model, (t,)))


def unitary_system(desc, rng):
    blocks = []
    for n in desc.block_dims:
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        blocks.append(q)
    t = conjugation_from_unitary(blocks, desc)
    return validated(StarDynamicalSystem(desc, State.tracial(desc), CONE1, (t,)))


def test_tensor_dimensions():
    rng = np.random.default_rng(0)
    s = tensor_systems([
        unitary_system(AlgebraDescriptor.matrices(2), rng),
        unitary_system(AlgebraDescriptor.matrices(3), rng),
    ])
    assert s.descriptor.block_dims == (6,)
    assert s.descriptor.dim == 36
    assert s.validation.passed and s.validation.omega_isometric


def test_tensor_state_factorizes():
    rng = np.random.default_rng(1)
    d1, d2 = AlgebraDescriptor((2, 1)), AlgebraDescriptor((1, 2))
    s1, s2 = unitary_system(d1, rng), unitary_system(d2, rng)
    big = tensor_systems([s1, s2])
    for _ in range(10):
        a1, a2 = AlgebraElement.random(d1, rng), AlgebraElement.random(d2, rng)
        got = state_eval(big.state, tensor_elements([a1, a2]))
        assert got == pytest.approx(state_eval(s1.state, a1) * state_eval(s2.state, a2))


def test_tensor_of_shifts_is_product_rotation():
    m = 4
    s = shift_system(m)
    big = tensor_systems([s, s])
    product = koopman_from_map(lambda p: ((p // m + 1) % m) * m + (p % m + 1) % m, m * m)
    assert np.max(np.abs(big.generator_maps[0].matrix - product.matrix)) <= 1e-12


def test_tensor_factorization_of_correlations():
    rng = np.random.default_rng(2)
    d1, d2 = AlgebraDescriptor.matrices(2), AlgebraDescriptor((1, 1, 1))
    s1 = unitary_system(d1, rng)
    t = koopman_from_map([2, 0, 1])
    s2 = validated(StarDynamicalSystem(d2, State.uniform(3), CONE1, (t,)))
    big = tensor_systems([s1, s2])
    for g in word_ball(CONE1, 3):
        a1, b1 = AlgebraElement.random(d1, rng), AlgebraElement.random(d1, rng)
        a2, b2 = AlgebraElement.random(d2, rng), AlgebraElement.random(d2, rng)
        lhs = state_eval(big.state, alg_mul(
            alg_star(tensor_elements([a1, a2])), tau_at(big, g)(tensor_elements([b1, b2]))
        ))
        f1 = state_eval(s1.state, alg_mul(alg_star(a1), tau_at(s1, g)(b1)))
        f2 = state_eval(s2.state, alg_mul(alg_star(a2), tau_at(s2, g)(b2)))
        assert abs(lhs - f1 * f2) <= 1e-9


def test_tensor_preconditions():
    t = koopman_from_map([0, 0, 1])
    lossy = StarDynamicalSystem(t.descriptor, State.uniform(3), CONE1, (t,))
    with pytest.raises(PreconditionError):
        tensor_systems([shift_system(3), lossy])
    other = shift_system(3, model=SemigroupModel.lattice(1))
    with pytest.raises(ValueError):
        tensor_systems([shift_system(3), other])


def test_tensor_gns_dimension():
    rng = np.random.default_rng(3)
    d1, d2 = AlgebraDescriptor.matrices(2), AlgebraDescriptor((1, 1))
    s1 = unitary_system(d1, rng)
    s2 = validated(StarDynamicalSystem(d2, State.uniform(2), CONE1, (koopman_from_map([1, 0]),)))
    big = tensor_systems([s1, s2])
    hdims = [gns_build(s.descriptor, s.state).hdim for s in (s1, s2, big)]
    assert hdims[2] == hdims[0] * hdims[1]

    # a non-faithful factor shrinks the product space
    pure = State(d1, (np.diag([1.0, 0.0]),))
    t = conjugation_from_unitary(np.diag([1.0, 1j]))
    s3 = validated(StarDynamicalSystem(d1, pure, CONE1, (t,)))
    big2 = tensor_systems([s3, s2])
    assert gns_build(big2.descriptor, big2.state).hdim <= 2 * 2


def test_pullback_examples():
    s = shift_system(6)
    same = endo_pullback(s, 1)
    assert np.allclose(same.generator_maps[0].matrix, s.generator_maps[0].matrix)
    twice = endo_pullback(s, 2)
    want = koopman_from_map(lambda x: (x + 2) % 6, 6)
    assert np.allclose(twice.generator_maps[0].matrix, want.matrix)
    assert twice.validation.passed
    with pytest.raises(ValueError):
        endo_pullback(s, 0)


def test_endomorphism_law():
    lat = SemigroupModel.lattice(2)
    for n in (1, 2, 5):
        assert Endomorphism(n=n).check(lat, samples=100)
    with pytest.raises(ValueError):
        Endomorphism(n=0)
    with pytest.raises(ValueError):
        Endomorphism()


def test_search_unit_element():
    s = shift_system(5)
    one = AlgebraElement.unit(s.descriptor)
    report = multiple_recurrence_search(s, one, [1, 3], 0.05, box_folner_net(CONE1, [5, 10]))
    assert report.all_pass
    for r in report.records:
        assert np.allclose(r.factor_values, 1)
        assert abs(r.product) > 1 - 0.05


def test_search_cyclic_64_against_brute_force():
    m, subset, eps = 64, range(16), 0.01
    s = shift_system(m)
    a = indicator_element(m, subset)
    hs = [CONE1.element(h) for h in (0, 1, 7, 40, 64)]
    report = multiple_recurrence_search(s, a, [1, 2], eps, box_folner_net(CONE1, [32, 64]), hs)
    assert report.lower_bound == pytest.approx(0.25**4 - 0.01)
    assert report.all_pass
    for r in report.records:
        h = r.h.coords[0]
        window = range(h, h + report.alpha0_schedule_value)
        products = [overlap(m, subset, subset, g) * overlap(m, subset, subset, 2 * g) for g in window]
        assert abs(r.product) == pytest.approx(max(products), abs=1e-12)
        assert all(abs(v) > 0 for v in r.factor_values)
    at64 = next(r for r in report.records if r.h.coords == (64,))
    assert at64.witness.coords == (64,)
    assert np.allclose(at64.factor_values, [0.25, 0.25])


def test_search_q1_matches_khintchine():
    m = 9
    s = shift_system(m)
    rep = gns_lift(gns_build(s.descriptor, s.state), s)
    a = indicator_element(m, [0, 1, 5])
    net = box_folner_net(CONE1, [9, 18])
    hs = word_ball(CONE1, 3)
    multi = multiple_recurrence_search(s, a, [1], 0.05, net, hs)
    single = khintchine_recurrence(s, rep, a, a, 0.05, net, hs)
    assert multi.alpha0 == single.alpha0
    for mr, sr in zip(multi.records, single.records):
        assert mr.witness == sr.witness
        assert mr.factor_values[0] == pytest.approx(sr.witness_value, abs=1e-12)
        assert mr.window_average == pytest.approx(sr.window_average, abs=1e-12)


def test_search_matches_tensor_oracle():
    m = 6
    s = shift_system(m)
    a = indicator_element(m, [0, 2])
    net = box_folner_net(CONE1, [6, 12])
    hs = word_ball(CONE1, 3)
    fast = multiple_recurrence_search(s, a, [1, 2], 0.02, net, hs)
    slow = multiple_recurrence_tensor_oracle(s, a, [1, 2], 0.02, net, hs)
    assert fast.alpha0 == slow.alpha0
    assert fast.limit_value == pytest.approx(slow.lower_bound, abs=1e-10)
    for fr, sr in zip(fast.records, slow.records):
        assert abs(fr.product) == pytest.approx(abs(sr.witness_value), abs=1e-12)
        assert fr.window_average == pytest.approx(sr.window_average, abs=1e-12)


def test_search_quantum_factor():
    rng = np.random.default_rng(5)
    desc = AlgebraDescriptor.matrices(2)
    t = conjugation_from_unitary(np.diag([1.0, np.exp(0.7j)]))
    s = validated(StarDynamicalSystem(desc, State.tracial(desc), CONE1, (t,)))
    a = AlgebraElement.random(desc, rng)
    report = multiple_recurrence_search(s, a, [1, 3], 0.05,
                                        box_folner_net(CONE1, [10, 100, 1000, 10000]))
    assert report.all_pass and report.readback_residual <= 1e-9


def test_search_preconditions():
    s = shift_system(4)
    a = indicator_element(4, [0])
    net = box_folner_net(CONE1, [4])
    with pytest.raises(ValueError):
        multiple_recurrence_search(s, a, [], 0.1, net)
    with pytest.raises(ValueError):
        multiple_recurrence_search(s, a, [1], -1.0, net)
    t = koopman_from_map([0, 0, 1, 2])
    lossy = StarDynamicalSystem(t.descriptor, State.uniform(4), CONE1, (t,))
    with pytest.raises(PreconditionError):
        multiple_recurrence_search(lossy, a, [1], 0.1, net)
    h = SemigroupModel.heisenberg()
    ident = DynMap.identity(AlgebraDescriptor.points(2))
    hs = StarDynamicalSystem(ident.descriptor, State.uniform(2), h, (ident,) * 3)
    with pytest.raises(ValueError):
        multiple_recurrence_search(hs, indicator_element(2, [0]), [1], 0.1, box_folner_net(h, [2]))
