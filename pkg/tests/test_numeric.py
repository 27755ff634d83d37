"""
tests/test_numeric.py
~~~~~~~~~~~~~~~~~~~~~
Domains, mirror steps and the small dense solves behind the exact oracles.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from mdp_smd.exceptions import DomainError, NonFiniteIterate, SingularMatrix
from mdp_smd.numeric import (
    BoxDomain,
    CappedOrthantDomain,
    SimplexDomain,
    capped_entropic_step,
    entropic_step,
    inf_operator_norm,
    invert,
    project_box,
    solve_linear,
)

HALF = np.array([[0.5, 0.5], [0.5, 0.5]])


# ──────────────────────────────────────────────────────── projections

class TestProjectBox:
    def test_clamps_each_coordinate(self):
        assert project_box([3.0, -5.0, 1.0], 2.0).tolist() == [2.0, -2.0, 1.0]

    def test_interior_point_fixed(self):
        assert project_box([0.5], 1.0).tolist() == [0.5]

    def test_degenerate_box(self):
        assert project_box([-7.0, 7.0], 0.0).tolist() == [0.0, 0.0]

    def test_negative_radius_rejected(self):
        with pytest.raises(DomainError):
            project_box([1.0], -1.0)

    def test_idempotent_and_nonexpansive(self):
        gen = np.random.default_rng(3)
        for _ in range(50):
            u, w = gen.normal(0, 3, 4), gen.normal(0, 3, 4)
            pu, pw = project_box(u, 1.5), project_box(w, 1.5)
            assert np.array_equal(project_box(pu, 1.5), pu)
            assert np.linalg.norm(pu - pw) <= np.linalg.norm(u - w) + 1e-12


class TestEntropicStep:
    def test_reweights_and_renormalises(self):
        out = entropic_step([0.5, 0.5], [math.log(2.0), 0.0])
        assert out == pytest.approx([1 / 3, 2 / 3])

    def test_zero_gradient_is_fixed_point(self):
        assert entropic_step([0.2, 0.8], [0.0, 0.0]) == pytest.approx([0.2, 0.8])

    def test_constant_shift_invariance(self):
        mu = [0.25, 0.25, 0.5]
        for c in (-50.0, 0.0, 3.0, 700.0):
            assert entropic_step(mu, [c, c, c]) == pytest.approx(mu)

    def test_large_gradients_stay_in_simplex(self):
        out = entropic_step([0.3, 0.3, 0.4], [900.0, -900.0, 0.0])
        assert SimplexDomain(3).contains(out)
        assert out[1] == pytest.approx(1.0)

    def test_zero_entries_stay_zero(self):
        out = entropic_step([0.0, 1.0], [-5.0, 0.0])
        assert out.tolist() == [0.0, 1.0]

    def test_non_finite_gradient_rejected(self):
        with pytest.raises(DomainError):
            entropic_step([0.5, 0.5], [float("-inf"), 0.0])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError):
            entropic_step([0.5, 0.5], [0.0])


class TestCappedEntropicStep:
    def test_feasible_fixed_point(self):
        assert capped_entropic_step([1.0, 1.0], [0.0, 0.0], 2.0) == pytest.approx([1.0, 1.0])

    def test_rescales_onto_cap(self):
        assert capped_entropic_step([1.5, 1.0], [0.0, 0.0], 2.0) == pytest.approx([1.2, 0.8])

    def test_no_rescale_below_cap(self):
        assert capped_entropic_step([1.0, 1.0], [math.log(4.0), 0.0], 2.0) == pytest.approx([0.25, 1.0])

    def test_overflow_raises(self):
        with pytest.raises(NonFiniteIterate):
            capped_entropic_step([1.0], [-1e6], 2.0)

    def test_output_in_domain(self):
        gen = np.random.default_rng(5)
        domain = CappedOrthantDomain(3, 2.0)
        s = domain.initial()
        for _ in range(100):
            s = capped_entropic_step(s, gen.normal(0, 1, 3), 2.0)
            assert domain.contains(s)


# ──────────────────────────────────────────────────────── linear algebra

class TestSolveLinear:
    def test_identity(self):
        assert solve_linear(np.eye(2), [3.0, 4.0]) == pytest.approx([3.0, 4.0])

    def test_diagonal(self):
        assert solve_linear([[2.0, 0.0], [0.0, 4.0]], [2.0, 2.0]) == pytest.approx([1.0, 0.5])

    def test_discounted_resolvent(self):
        assert solve_linear(np.eye(2) - 0.5 * HALF, [1.0, 0.0]) == pytest.approx([1.5, 0.5])

    def test_matrix_right_hand_side(self):
        A = np.array([[4.0, 1.0], [2.0, 3.0]])
        assert solve_linear(A, np.eye(2)) @ A == pytest.approx(np.eye(2))

    @pytest.mark.parametrize("n", [1, 5, 20, 50])
    def test_residual_on_random_matrices(self, n):
        gen = np.random.default_rng(n)
        for _ in range(10):
            # strictly diagonally dominant, so well conditioned
            A = (n + 1) * np.eye(n) + gen.uniform(-1.0, 1.0, (n, n))
            b = gen.normal(0.0, 10.0, n)
            x = solve_linear(A, b)
            assert np.max(np.abs(A @ x - b)) <= 1e-8 * (1.0 + np.max(np.abs(b)))

    def test_singular_raises(self):
        with pytest.raises(SingularMatrix):
            solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])

    def test_non_square_rejected(self):
        with pytest.raises(DomainError):
            solve_linear(np.ones((2, 3)), [1.0, 1.0])


class TestInfOperatorNorm:
    def test_identity(self):
        assert inf_operator_norm(np.eye(3)) == 1.0

    def test_max_absolute_row_sum(self):
        assert inf_operator_norm([[1.0, -2.0], [0.0, 0.5]]) == 3.0

    def test_discounted_inverse(self):
        assert inf_operator_norm(invert(np.eye(2) - 0.5 * HALF)) == pytest.approx(2.0)


class TestDomains:
    def test_box_contains(self):
        box = BoxDomain(2, 1.0)
        assert box.contains([1.0, -1.0])
        assert not box.contains([1.1, 0.0])
        assert box.divergence_radius() == 4.0

    def test_simplex_radius(self):
        assert SimplexDomain(4).divergence_radius() == pytest.approx(math.log(4))
        assert SimplexDomain(1).divergence_radius() == 0.0

    def test_capped_contains(self):
        capped = CappedOrthantDomain(2, 2.0)
        assert capped.contains([1.0, 1.0])
        assert not capped.contains([1.5, 1.0])
        assert not capped.contains([-0.1, 0.5])
        assert capped.divergence_radius() == pytest.approx(2 * math.log(4) + 1)
