import numpy as np
import pytest

from skewlab.exceptions import DimensionMismatch, GraphTransformUndefined, InvalidInput, SingularJet
from skewlab.helpers import make_rng
from skewlab.jets import (
    BlockLinearMap,
    JetPoly,
    first_order_graph_transform,
    graph_jet,
    h1_cross_check,
    jet_compose,
    jet_family,
    jet_graph_transform,
    jet_invert,
    q_norm_bound,
    q_operator,
    random_jet,
    scaled_norm,
    search_scale,
    verify_fiber_contraction,
)


@pytest.fixture
def x2y() -> JetPoly:
    return JetPoly.from_monomials(2, 1, 3, {(2, 1): 1.0})


def test_monomials(x2y) -> None:
    monomials = x2y.to_monomials()

    assert [(2, 1)] == list(monomials)
    assert np.allclose([1.0], monomials[(2, 1)])
    assert x2y.is_symmetric()


def test_evaluate_and_jacobian(x2y) -> None:
    assert np.allclose([12.0], x2y.evaluate([2.0, 3.0]))
    assert np.allclose([[12.0, 4.0]], x2y.jacobian([2.0, 3.0]))


def test_from_monomials_rejects_high_degree() -> None:
    with pytest.raises(DimensionMismatch):
        JetPoly.from_monomials(2, 1, 2, {(2, 1): 1.0})


def test_compose_polynomials() -> None:
    square = JetPoly.create([0.0, 0.0, 1.0])
    shift = JetPoly.create([1.0, 1.0, 0.0])

    composed = jet_compose(square, shift)

    assert JetPoly.create([1.0, 2.0, 1.0]).max_difference(composed) < 1e-14


@pytest.mark.parametrize("seed", range(8))
def test_compose_is_associative(seed) -> None:
    rng = make_rng(seed)
    inner = random_jet(2, 3, 3, rng, scale=0.5, center=rng.standard_normal(2))
    middle = random_jet(3, 2, 3, rng, scale=0.5, center=inner.tensors[0])
    outer = random_jet(2, 1, 3, rng, scale=0.5, center=middle.tensors[0])

    left = jet_compose(jet_compose(outer, middle), inner)
    right = jet_compose(outer, jet_compose(middle, inner))

    assert left.max_difference(right) <= 1e-10


def test_compose_dimension_mismatch(x2y) -> None:
    with pytest.raises(DimensionMismatch):
        jet_compose(x2y, JetPoly.identity(3, 2))


def test_invert_one_dimensional() -> None:
    inverse = jet_invert(JetPoly.create([0.0, 1.0, 1.0]))

    assert JetPoly.create([0.0, 1.0, -1.0]).max_difference(inverse) < 1e-14


def test_invert_random_jet() -> None:
    rng = make_rng(5)
    jet = random_jet(2, 2, 3, rng, scale=0.3)
    jet = jet.evolve_self(tensors=(jet.tensors[0], jet.tensors[1] + 2.0 * np.eye(2)) + jet.tensors[2:])

    inverse = jet_invert(jet)
    composed = jet_compose(jet, inverse)

    assert JetPoly.identity(2, 3, center=jet.tensors[0]).max_difference(composed) < 1e-10


def test_invert_singular() -> None:
    with pytest.raises(SingularJet):
        jet_invert(JetPoly.create([0.0, 0.0, 1.0]))


def test_graph_jet() -> None:
    psi = JetPoly.create([0.5, 2.0, 3.0])

    graph = graph_jet(psi)

    assert np.allclose([0.1, 0.5 + 0.2 + 0.03], graph.evaluate([0.1]))


def test_graph_transform_of_linear_map() -> None:
    H = JetPoly.from_monomials(2, 2, 2, {(1, 0): [2.0, 0.0], (0, 1): [0.0, 0.5]})
    psi = JetPoly.create([0.0, 1.0, 1.0])

    image = jet_graph_transform(H, psi)

    assert JetPoly.create([0.0, 0.25, 0.125]).max_difference(image) < 1e-14


def test_graph_transform_undefined() -> None:
    H = JetPoly.from_monomials(2, 2, 1, {(1, 0): [1.0, 0.0], (0, 1): [1.0, 1.0]})

    with pytest.raises(GraphTransformUndefined):
        jet_graph_transform(H, JetPoly.create([0.0, -1.0]))


def test_first_order_cross_check() -> None:
    rng = make_rng(11)
    H = random_jet(2, 2, 2, rng, scale=0.1)
    H = H.evolve_self(tensors=(H.tensors[0], H.tensors[1] + np.diag([2.0, 0.5])) + H.tensors[2:])
    psi = random_jet(1, 1, 2, rng, scale=0.3)

    assert h1_cross_check(H, psi) <= 1e-10


def test_linear_blocks() -> None:
    blocks = BlockLinearMap.create(2.0, 0.0, 0.3, 0.5)

    assert 0.125 == pytest.approx(q_norm_bound(blocks, 2))
    assert np.allclose([[[0.125]]], q_operator(blocks, np.ones((1, 1, 1))))
    assert np.allclose([[0.4]], first_order_graph_transform(blocks, 1.0))

    with pytest.raises(SingularJet):
        BlockLinearMap.create(0.0, 0.0, 0.3, 0.5)


def test_scaled_norm() -> None:
    assert 120.0 == scaled_norm(10.0, [1.0, 2.0])
    assert 3.0 == scaled_norm(1.0, [np.array([1.0]), np.array([2.0])])


def test_diagonal_family_contracts() -> None:
    family = jet_family("diagonal")

    report = verify_fiber_contraction(family.H, family.kappa, family.epsilon, 1.0, 50, seed=0)

    assert report.holds
    assert report.max_ratio <= 0.25 + 1e-9
    assert 50 == report.pairs_used + report.skipped


@pytest.mark.parametrize("name", ["coupled", "nonlinear"])
def test_scale_search(name) -> None:
    family = jet_family(name)

    report = search_scale(family.H, family.kappa, family.epsilon, 40, seed=1)

    assert report.holds
    assert report.L <= 100.0


def test_identity_family_is_not_strict() -> None:
    family = jet_family("identity")

    report = verify_fiber_contraction(family.H, family.kappa, family.epsilon, 1.0, 20, seed=2)

    assert 1.0 == pytest.approx(report.max_ratio)
    assert report.holds


def test_violating_family() -> None:
    family = jet_family("violating")

    report = verify_fiber_contraction(family.H, family.kappa, family.epsilon, 1.0, 20, seed=3)

    assert not report.hypotheses_hold
    assert not report.holds


def test_unknown_family() -> None:
    with pytest.raises(InvalidInput):
        jet_family("circular")
