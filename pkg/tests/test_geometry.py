import math

import numpy as np
import pytest

from hcontent.geometry import (
    Ball,
    DyadicCube,
    GridError,
    GridFunction,
    GridSet,
    ball_masks,
    ball_volume,
    cell_center_distance,
    cell_centers,
    cell_corners,
    cell_width,
    check_grid,
    cube_cells,
    discretize_ball,
    flat_index,
    morton_perm,
    radius_ladder,
    unflat_index,
)


def test_check_grid_limits():
    check_grid(2, 0)
    for n, L in [(0, 1), (4, 1), (2, -1), (2, 40)]:
        with pytest.raises(GridError):
            check_grid(n, L)


def test_cube_children_and_containment():
    q = DyadicCube(2, 1, (1, 0))
    kids = q.children()
    assert [k.index for k in kids] == [(2, 0), (2, 1), (3, 0), (3, 1)]
    assert all(q.contains(k) for k in kids)
    assert not kids[0].contains(q)
    assert q.center == (0.75, 0.25)
    with pytest.raises(GridError):
        DyadicCube(2, 1, (2, 0))


def test_flat_index_round_trip():
    for n, L in [(1, 3), (2, 2), (3, 1)]:
        for k in range(1 << (n * L)):
            assert flat_index(unflat_index(k, n, L), n, L) == k
    with pytest.raises(GridError):
        flat_index((4, 0), 2, 2)


def test_morton_children_are_contiguous():
    n, L = 2, 3
    perm = morton_perm(n, L)
    assert sorted(perm.tolist()) == list(range(1 << (n * L)))
    # Morton block [4k, 4k+4) is exactly one level-2 parent's children
    for k in range(16):
        idx = [unflat_index(int(c), n, L) for c in perm[4 * k:4 * k + 4]]
        parents = {tuple(i // 2 for i in t) for t in idx}
        assert len(parents) == 1
        q = DyadicCube(n, L - 1, parents.pop())
        assert [c.index for c in q.children()] == idx


def test_set_operations():
    A = GridSet.from_indices(2, 2, [(0, 0), (1, 1)])
    B = GridSet.from_indices(2, 2, [(1, 1), (3, 3)])
    assert (A | B).count == 3
    assert (A & B).count == 1
    assert (A - B).count == 1
    assert (~A).count == 14
    assert (A & B).issubset(A)
    assert A == GridSet.from_indices(2, 2, [(1, 1), (0, 0)])
    with pytest.raises(GridError):
        A | GridSet.empty(2, 3)


def test_upsample_and_embed():
    A = GridSet.from_indices(2, 2, [(1, 2)])
    U = A.upsample(2)
    assert U.L == 4 and U.count == 16
    assert U.indices().min(axis=0).tolist() == [4, 8]
    E = A.embed(1)
    assert E.L == 3 and E.count == 1 and E.indices().tolist() == [[1, 2]]


def test_digest_distinguishes_level_and_content():
    A = GridSet.from_indices(2, 2, [(0, 0)])
    assert A.digest() == GridSet.from_indices(2, 2, [(0, 0)]).digest()
    assert A.digest() != A.upsample(1).digest()
    f = GridFunction.indicator(A)
    assert f.digest() != A.digest()
    assert f.digest() != f.scale(2.0).digest()


def test_grid_function_basics():
    f = GridFunction(1, 2, [-1.0, 0.0, 2.0, np.inf])
    assert f.values.tolist() == [1.0, 0.0, 2.0, np.inf]
    assert f.support().count == 3
    assert f.has_infinite()
    with pytest.raises(GridError):
        GridFunction(1, 2, [np.nan, 0, 0, 0])
    with pytest.raises(GridError):
        GridFunction(1, 2, [0, 0, 0])
    g = f.restrict(GridSet.from_indices(1, 2, [(2,)]))
    assert g.values.tolist() == [0.0, 0.0, 2.0, 0.0]
    assert (f.power(2.0)).values[2] == 4.0
    with pytest.raises(ValueError):
        f.values[0] = 3.0


def test_centers_corners_and_distance():
    c = cell_centers(2, 1)
    assert c.tolist() == [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]]
    assert cell_corners(1, 2).reshape(-1).tolist() == [0, 0.25, 0.5, 0.75, 1.0]
    assert cell_center_distance((0, 0), (3, 4), 2, 3) == pytest.approx(5 / 8)


def test_ball_discretizations_are_nested():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(1, 4))
        L = int(rng.integers(1, 5 if n < 3 else 3))
        center = rng.random(n)
        r = float(rng.uniform(0.05, 0.6))
        inner, mid, outer = (ball_masks(center, [r], n, L, m)[0] for m in ("inner", "center", "outer"))
        assert not (inner & ~mid).any()
        assert not (mid & ~outer).any()


def test_refinement_keeps_inner_outer_bracket():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(1, 3))
        L = int(rng.integers(1, 5))
        b = Ball(tuple(rng.random(n)), float(rng.uniform(0.05, 0.5)))
        inner = discretize_ball(b, n, L, "inner").upsample(1)
        outer = discretize_ball(b, n, L, "outer").upsample(1)
        fine_in = discretize_ball(b, n, L + 1, "inner")
        fine_out = discretize_ball(b, n, L + 1, "outer")
        assert inner.issubset(fine_in)
        assert fine_in.issubset(fine_out)
        assert fine_out.issubset(outer)


def test_ball_validation():
    with pytest.raises(GridError):
        Ball((0.5, 0.5), 0.0)
    with pytest.raises(GridError):
        discretize_ball(Ball((1.5, 0.5), 0.1), 2, 2)


def test_cube_cells_and_ladder():
    E = cube_cells(DyadicCube(2, 1, (1, 1)), 3)
    assert E.count == 16
    lad = radius_ladder(2, 3)
    assert lad[0] == cell_width(3)
    assert lad[-1] == pytest.approx(math.sqrt(2))
    assert all(b > a for a, b in zip(lad, lad[1:]))
    assert ball_volume(2, 1.0) == pytest.approx(math.pi)
    assert ball_volume(3, 2.0) == pytest.approx(4 / 3 * math.pi * 8)
