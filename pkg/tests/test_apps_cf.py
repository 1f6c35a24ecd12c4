import numpy as np
import pytest

from segcsr import EdgeList, GraphError, build_csr, symmetrize
from segcsr.apps import collaborative_filter, rating_error
from segcsr.apps.cf import latent_gradient
from conftest import segment_for_k
from oracles import cf_gradient_reference


def ratings_graph(pairs, vertex_count, ratings):
    el = symmetrize(EdgeList.from_pairs(pairs, vertex_count=vertex_count, weights=ratings))
    return build_csr(el, "in")


def random_bipartite(seed, users, items, edges):
    rng = np.random.default_rng(seed)
    src = rng.integers(0, users, edges).astype(np.uint32)
    dst = (rng.integers(0, items, edges) + users).astype(np.uint32)
    ratings = rng.uniform(1.0, 5.0, edges)
    el = symmetrize(
        EdgeList(src=src, dst=dst, vertex_count=users + items, weights=ratings)
    )
    return build_csr(el, "in"), el


def test_zero_factors_have_zero_gradient():
    g = ratings_graph([(0, 1)], 2, [3.0])
    res = collaborative_filter(segment_for_k(g, 1), iterations=3, factors=2,
                               init=np.zeros((2, 2)))
    assert (res.values == 0.0).all()


def test_single_edge_unit_factors_regularization_only():
    g = ratings_graph([(0, 1)], 2, [1.0])
    step, reg = 1e-3, 1e-2
    res = collaborative_filter(
        segment_for_k(g, 1), iterations=1, factors=1, step=step, reg=reg,
        init=np.ones((2, 1)),
    )
    # p_u . p_v - r = 0, so only the regularization term moves the factors
    assert res.values.ravel().tolist() == [1.0 - step * reg, 1.0 - step * reg]


def test_rejects_unweighted_graph():
    g = build_csr(EdgeList.from_pairs([(0, 1), (1, 0)], vertex_count=2), "in")
    with pytest.raises(GraphError):
        collaborative_filter(segment_for_k(g, 1), iterations=1)


def test_rejects_factor_mismatch():
    g = ratings_graph([(0, 1)], 2, [1.0])
    with pytest.raises(GraphError):
        collaborative_filter(segment_for_k(g, 1), iterations=1, factors=4,
                             init=np.zeros((2, 2)))


def test_gradient_matches_dense_reference():
    g, el = random_bipartite(90, 40, 25, 300)
    rng = np.random.default_rng(4)
    latent = rng.standard_normal((65, 8)) * 0.3
    for k in (1, 3, 8):
        grad = latent_gradient(segment_for_k(g, k), latent)
        want = cf_gradient_reference(
            el.src.astype(np.int64), el.dst.astype(np.int64), el.weights, latent
        )
        assert np.max(np.abs(grad - want)) <= 1e-10


def test_objective_non_increasing():
    g, _ = random_bipartite(91, 60, 40, 500)
    sg = segment_for_k(g, 4)
    latent = np.random.default_rng(5).standard_normal((100, 8)) * 0.1
    errors = []
    for _ in range(5):
        res = collaborative_filter(sg, iterations=1, factors=8, init=latent)
        latent = res.values
        errors.append(rating_error(sg, latent))
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_worker_count_invariance():
    g, _ = random_bipartite(92, 50, 30, 400)
    sg = segment_for_k(g, 3)
    init = np.random.default_rng(6).standard_normal((80, 8)) * 0.1
    runs = [
        collaborative_filter(sg, iterations=3, factors=8, init=init, workers=w).values.tobytes()
        for w in (1, 2, 8)
    ]
    assert len(set(runs)) == 1


def test_default_init_seeded():
    g, _ = random_bipartite(93, 20, 10, 100)
    sg = segment_for_k(g, 2)
    a = collaborative_filter(sg, iterations=2, seed=7).values
    b = collaborative_filter(sg, iterations=2, seed=7).values
    assert a.tobytes() == b.tobytes()
