import math

import numpy as np
import pytest

from conftest import random_channel, random_state
from qcapacity import linalg
from qcapacity.capacity import (
    EXACT,
    LOWER_BOUND,
    ZERO,
    CapacityError,
    CapacityResult,
    bottleneck_bound,
    capacity_or_bounds,
    coherent_information,
    convex_upper_bound,
    qubit_capacity,
    qubit_objective,
    single_letter_capacity,
)
from qcapacity.channel import (
    NormalFormParams,
    QuantumChannel,
    compose,
    convex_mixture,
    from_isometry,
    from_normal_form,
    identity_channel,
)
from qcapacity.degradability import Verdict, classify

PI = math.pi
SZ = np.diag([1.0, -1.0])

# Maxima of the diagonal-input coherent information computed with mpmath at
# 40 digits (root of the derivative in p), independent of the grid+Brent path.
GOLDEN = {
    (PI / 8, 0.0): (0.6105058863625936506, 0.455407535932464361),
    (PI / 8, PI / 16): (0.5489565397428188149, 0.47257048067412859317),
}


def test_coherent_information_examples():
    assert coherent_information(identity_channel(), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert coherent_information(from_normal_form((PI / 4, PI / 4)), np.eye(2) / 2) == pytest.approx(0.0, abs=1e-12)
    # output pure, conjugate unitary: J = 0 - h(0.3)
    J = coherent_information(from_normal_form((PI / 2, 0)), np.diag([0.3, 0.7]))
    assert J == pytest.approx(-0.88129089923069261822, abs=1e-12)


def test_coherent_information_rejects_bad_state():
    with pytest.raises(ValueError):
        coherent_information(identity_channel(), np.eye(3) / 3)
    with pytest.raises(linalg.LinAlgToleranceError):
        coherent_information(identity_channel(), np.diag([1.2, -0.2]))


def test_qubit_capacity_examples():
    r = qubit_capacity((0, 0))
    assert r.value == pytest.approx(1.0, abs=1e-12) and r.kind == EXACT
    r = qubit_capacity((PI / 4, 0))
    assert r.value == 0.0 and r.kind == ZERO
    # dephasing line: 1 - h(sin^2 a) = 1 - h(1/4)
    assert qubit_capacity((PI / 6, PI / 6)).value == pytest.approx(0.18872187554086713609, abs=1e-10)


@pytest.mark.parametrize("angles", list(GOLDEN))
def test_qubit_capacity_golden(angles):
    value, p_star = GOLDEN[angles]
    r = qubit_capacity(angles)
    assert r.value == pytest.approx(value, abs=1e-10)
    assert r.achieved_input == pytest.approx(p_star, abs=1e-5)


def test_qubit_capacity_matches_grid_search(rng):
    for _ in range(30):
        a, b = rng.uniform(0, PI, 2)
        r = qubit_capacity((a, b))
        if r.kind == ZERO:
            continue
        p = np.linspace(0, 1, 200001)
        assert r.value >= qubit_objective(p, a, b).max() - 1e-10


def test_qubit_objective_is_coherent_information(rng):
    for _ in range(20):
        a, b = rng.uniform(0, PI, 2)
        p = rng.uniform()
        J = coherent_information(from_normal_form((a, b)), np.diag([p, 1 - p]))
        assert float(qubit_objective(p, a, b)) == pytest.approx(J, abs=1e-12)


def test_zero_region_law_on_grid():
    grid = np.linspace(0, PI, 201)
    for a in grid:
        for b in grid[::5]:
            ca, cb = math.cos(2 * a), math.cos(2 * b)
            q = qubit_capacity((a, b)).value
            if abs(ca) < 1e-12 or abs(cb) < 1e-12 or ca * cb < 0:
                assert q == 0.0
            else:
                assert q > 0.0


def test_single_letter_identity_and_qubit_agreement():
    assert single_letter_capacity(identity_channel()).value == pytest.approx(1.0, abs=1e-9)
    r = single_letter_capacity(from_normal_form((PI / 8, PI / 16)))
    assert r.kind == EXACT
    assert r.value == pytest.approx(qubit_capacity((PI / 8, PI / 16)).value, abs=1e-6)
    # the maximizer is diagonal
    rho = r.achieved_input
    assert abs(rho[0, 1]) <= 1e-4


def test_single_letter_near_identity_qutrit(rng):
    V0 = np.kron(np.eye(3), np.array([[1.0], [0.0]]))
    G = V0 + 0.05 * (rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3)))
    T = from_isometry(np.linalg.qr(G)[0], 2)
    assert classify(T).degradable
    r = single_letter_capacity(T, seed=3)
    assert 0 <= r.value <= math.log2(3)
    assert r.achieved_input.shape == (3, 3)
    assert r.diagnostics["duality_gap"] <= 1e-6
    # no random state does better
    for _ in range(200):
        assert coherent_information(T, random_state(3, rng)) <= r.value + 1e-9


def test_single_letter_refuses_non_degradable():
    with pytest.raises(CapacityError, match="not certified"):
        single_letter_capacity(from_normal_form((3 * PI / 8, 0)))


def test_single_letter_is_seed_deterministic(rng):
    T = from_normal_form((0.3, 0.1))
    a = single_letter_capacity(T, seed=11)
    b = single_letter_capacity(T, seed=11)
    assert a.value == b.value and np.array_equal(a.achieved_input, b.achieved_input)


def test_capacity_or_bounds_routing(rng):
    r = capacity_or_bounds(from_normal_form((3 * PI / 8, 0)))
    assert r.value == 0.0 and r.kind == ZERO
    r = capacity_or_bounds(from_normal_form((PI / 8, 0)))
    assert r.kind == EXACT and r.value == pytest.approx(GOLDEN[(PI / 8, 0.0)][0], abs=1e-6)
    neither = None
    for _ in range(200):
        T = random_channel(3, 3, rng)
        if classify(T).verdict is Verdict.NEITHER:
            neither = T
            break
    assert neither is not None
    r = capacity_or_bounds(neither)
    assert r.kind == LOWER_BOUND and r.value >= 0


def test_convex_upper_bound_examples():
    T = from_normal_form((0.3, 0.1))
    assert convex_upper_bound([(1.0, T)]) == pytest.approx(qubit_capacity((0.3, 0.1)).value, abs=1e-6)
    zero = convex_upper_bound([(0.4, from_normal_form((3 * PI / 8, 0))), (0.6, from_normal_form((1.2, 0.3)))])
    assert zero == 0.0
    bound = convex_upper_bound([(0.5, NormalFormParams(PI / 6, PI / 6)), (0.5, NormalFormParams(PI / 4, PI / 4))])
    assert bound == pytest.approx(0.5 * 0.18872187554086713609, abs=1e-10)
    # the mixture is the dephasing channel with cos^2 g = (cos^2(pi/6) + cos^2(pi/4)) / 2 = 0.625
    g = math.acos(math.sqrt(0.625))
    direct = qubit_capacity((g, g)).value
    assert direct == pytest.approx(1 - linalg.binary_entropy(0.375), abs=1e-10)
    assert direct <= bound


def test_convex_upper_bound_refuses_inexact(rng):
    with pytest.raises(CapacityError, match="no exact capacity"):
        convex_upper_bound([(1.0, CapacityResult(0.2, LOWER_BOUND))])
    with pytest.raises(CapacityError, match="sum to 1"):
        convex_upper_bound([(0.7, CapacityResult(0.2, EXACT))])


def test_bottleneck():
    assert bottleneck_bound(1.0, 0.3) == 0.3
    assert bottleneck_bound(0.0, 0.8) == 0.0
    with pytest.raises(CapacityError):
        bottleneck_bound(-0.1, 0.2)


def test_bottleneck_on_composition():
    # two dephasings compose to a dephasing, which stays degradable
    comp = compose(from_normal_form((0.2, 0.2)), from_normal_form((0.3, 0.3)))
    r = capacity_or_bounds(comp)
    assert r.kind == EXACT
    bound = bottleneck_bound(qubit_capacity((0.2, 0.2)).value, qubit_capacity((0.3, 0.3)).value)
    assert r.value <= bound + 1e-9
    # generic compositions have a larger environment; the achievable rate still obeys the bound
    comp = compose(from_normal_form((0.2, 0.1)), from_normal_form((0.3, 0.25)))
    r = capacity_or_bounds(comp)
    bound = bottleneck_bound(qubit_capacity((0.2, 0.1)).value, qubit_capacity((0.3, 0.25)).value)
    assert r.value <= bound + 1e-9


def test_midpoint_concavity_on_degradable(rng):
    for _ in range(40):
        a, b = rng.uniform(0, PI / 4 - 0.01, 2)
        T = from_normal_form((a, b))
        r1, r2 = random_state(2, rng), random_state(2, rng)
        mid = coherent_information(T, (r1 + r2) / 2)
        assert mid >= 0.5 * coherent_information(T, r1) + 0.5 * coherent_information(T, r2) - 1e-9


def test_covariance_dominance(rng):
    for _ in range(40):
        a, b = rng.uniform(0, PI / 4 - 0.01, 2)
        T = from_normal_form((a, b))
        rho = random_state(2, rng)
        assert coherent_information(T, (rho + SZ @ rho @ SZ) / 2) >= coherent_information(T, rho) - 1e-9


def test_antidegradable_coherent_information_nonpositive(rng):
    count = 0
    while count < 30:
        a, b = rng.uniform(0, PI, 2)
        T = from_normal_form((a, b))
        if classify(T).verdict is not Verdict.ANTI_DEGRADABLE:
            continue
        count += 1
        for _ in range(10):
            assert coherent_information(T, random_state(2, rng)) <= 1e-9


def test_result_serialization():
    d = qubit_capacity((0, 0)).to_dict()
    assert d["value"] == pytest.approx(1.0) and d["kind"] == "exact"
    d = single_letter_capacity(identity_channel()).to_dict()
    assert len(d["achieved_input"]) == 2 and len(d["achieved_input"][0][0]) == 2


def test_mixture_of_dephasings_full_pipeline(rng):
    a1, a2, w = 0.3, 0.5, 0.4
    mix = convex_mixture([(w, from_normal_form((a1, a1))), (1 - w, from_normal_form((a2, a2)))])
    g = math.acos(math.sqrt(w * math.cos(a1) ** 2 + (1 - w) * math.cos(a2) ** 2))
    r = capacity_or_bounds(mix)
    assert r.kind == EXACT
    assert r.value == pytest.approx(qubit_capacity((g, g)).value, abs=1e-6)
    assert isinstance(mix, QuantumChannel) and mix.d_env == 4
