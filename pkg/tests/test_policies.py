import numpy as np
import pytest

from rsgp import geometry, gp, policies, satisficing as S
from rsgp.errors import InvalidArgumentError
from rsgp.gp import ConfidenceField
from rsgp.kernels import KernelSpec
from rsgp.policies import PolicySpec


def field(ucb, lcb=None):
    ucb = np.asarray(ucb, dtype=float)
    lcb = ucb - 1.0 if lcb is None else np.asarray(lcb, dtype=float)
    mean = (ucb + lcb) / 2
    return ConfidenceField(lcb, ucb, 1.0, 1, mean, (ucb - lcb) / 2)


def random_fields(rng, n=100, size=20):
    for _ in range(n):
        u = rng.normal(size=size)
        yield field(u, u - rng.exponential(size=size))


def test_flat_ucb_selects_first(line5):
    cf = field(np.ones(5))
    for sel in (policies.select_advers1(cf, line5, 0.0), policies.select_advers2(cf, line5, 0.0),
                policies.select_gp_ucb(cf)):
        assert sel.index == 0 and not sel.fallback


def test_two_point_examples(two_point):
    assert policies.select_advers1(field([0, 1]), two_point, 1.0).index == 1
    sel = policies.select_advers_g(field([0.36, 1.0]), two_point, 1.0, 2.0)
    assert sel.index == 1 and sel.acquisition[1] == pytest.approx(0.8)


def test_plateau_center(line5):
    cf = field([0, 2, 2, 2, 0])
    assert policies.select_advers2(cf, line5, 1.0).index == 2
    assert policies.select_stableopt(cf, line5, 0.25).index == 2


def test_infeasible_fallback(line5):
    cf = field([0.1, 0.5, 0.3, 0.2, 0.0])
    for sel in (policies.select_advers1(cf, line5, 1.0), policies.select_advers2(cf, line5, 1.0),
                policies.select_advers_g(cf, line5, 1.0, 3.0)):
        assert sel.fallback and sel.index == 1


def test_certificate_is_pessimistic_measure(line5):
    cf = field([2, 2, 2, 2, 2], [0, 1.5, 1.5, 1.5, 0])
    sel = policies.select_advers2(cf, line5, 1.0)
    assert sel.certificate == S.critical_radius(cf.lcb, line5, 1.0).values[sel.index]
    sel = policies.select_advers1(cf, line5, 1.0)
    assert sel.certificate == S.fragility(cf.lcb, line5, 1.0).values[sel.index]


def test_reductions(rng):
    g = geometry.from_points(rng.uniform(0, 1, (20, 2)))
    for cf in random_fields(rng):
        assert policies.select_advers_g(cf, g, 0.0, 1.0).index == policies.select_advers1(cf, g, 0.0).index
        assert policies.select_stableopt(cf, g, 0.0).index == policies.select_gp_ucb(cf).index


def test_saturated_stableopt(line5):
    cf = field([3, 1, 2, 5, 4])
    sel = policies.select_stableopt(cf, line5, 10.0)
    assert sel.index == 0 and np.all(sel.acquisition == 1)
    with pytest.raises(InvalidArgumentError):
        policies.select_stableopt(cf, line5, -1.0)


def test_shift_invariance(rng):
    g = geometry.build_grid([[0, 1]], 20)
    for cf in random_fields(rng, 30):
        c = float(rng.normal())
        shifted = field(cf.ucb + c, cf.lcb + c)
        assert policies.select_gp_ucb(shifted).index == policies.select_gp_ucb(cf).index
        assert policies.select_stableopt(shifted, g, 0.2).index == policies.select_stableopt(cf, g, 0.2).index
        assert policies.select_advers1(shifted, g, 0.1 + c).index == policies.select_advers1(cf, g, 0.1).index
        assert policies.select_advers2(shifted, g, 0.1 + c).index == policies.select_advers2(cf, g, 0.1).index


def test_thompson_zero_variance_matches_mean_field():
    g = geometry.build_grid([[0, 1]], 15)
    kern = KernelSpec("rbf", (0.2,))
    X = np.repeat(g.points, 4, axis=0)
    post = gp.fit(kern, X, np.sin(6 * X[:, 0]), 1e-9)
    mean, _ = gp.predict_batch(post, g.points)
    sel = policies.select_advers_g_ts(post, g, 0.2, 2.0, np.random.default_rng(0))
    assert sel.index == policies.select_advers_g(field(mean, mean), g, 0.2, 2.0).index


def test_thompson_deterministic_and_dispersed():
    g = geometry.build_grid([[0, 1]], 21)
    post = gp.fit(KernelSpec("rbf", (0.2,)), np.zeros((0, 1)), [], 0.01)
    a = policies.select_advers_g_ts(post, g, 0.0, 2.0, np.random.default_rng(4))
    b = policies.select_advers_g_ts(post, g, 0.0, 2.0, np.random.default_rng(4))
    assert a.index == b.index
    chosen = {policies.select_advers_g_ts(post, g, 0.0, 2.0, np.random.default_rng(s)).index
              for s in range(1000)}
    assert len(chosen) >= 0.25 * g.size


def test_dynamic_tau():
    cf = field([0, 1, 1], [-1, 0.5, 0])
    assert policies.dynamic_tau(cf, 0.0) == 0.5
    assert policies.dynamic_tau(cf, 0.1) == 0.5 - 0.1
    prior = gp.confidence_field(gp.fit(KernelSpec(), np.zeros((0, 1)), [], 1.0),
                                geometry.build_grid([[0, 1]], 4), 1.0)
    assert policies.dynamic_tau(prior, 0.3) == -1.3
    with pytest.raises(InvalidArgumentError):
        policies.dynamic_tau(cf, -0.1)


def test_policy_spec_rules():
    assert PolicySpec("adversg").p == 2.0
    assert PolicySpec("stableopt", r=0.5).label == "stableopt(r=0.5)"
    for bad in (dict(kind="stableopt"), dict(kind="advers2", r=0.5), dict(kind="advers1", p=2.0),
                dict(kind="adversg", p=0.5), dict(kind="bogus")):
        with pytest.raises(InvalidArgumentError):
            PolicySpec(**bad)
