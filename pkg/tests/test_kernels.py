import itertools
import math

import pytest

from ucompare.dataset import Dataset
from ucompare.designs import OrderedSplit, UnorderedSubset
from ucompare.kernels import (
    ComparisonKernel,
    KernelEvaluator,
    eval_kappa_kernel,
    eval_phi,
    eval_phi0,
    eval_theta2_kernel,
    phi0_value,
    phi_value,
)
from ucompare.learners import (
    centroid_learner,
    constant_learner,
    knn_learner,
    misclassification_loss,
    stump_learner,
)


def four_rows() -> Dataset:
    return Dataset.from_arrays(
        [(0.0,), (1.0,), (2.0,), (3.0,)],
        [0, 1, 1, 0],
    )


def knn_vs_const(g: int = 1) -> ComparisonKernel:
    return ComparisonKernel(knn_learner(1), constant_learner(0), g=g)


class TestPointwiseKernel:
    def test_identical_learners_give_zero(self):
        data = four_rows()
        kernel = ComparisonKernel(knn_learner(1), knn_learner(1), g=1)
        for learn, test in [((2,), 1), ((1,), 4), ((3,), 2)]:
            assert eval_phi(kernel, data, OrderedSplit(learn=learn, test=test)) == 0.0

    def test_constant_pair_is_one_minus_two_y(self):
        data = four_rows()
        kernel = ComparisonKernel(constant_learner(1), constant_learner(0), g=1)
        for test in range(1, 5):
            learn = (1,) if test != 1 else (2,)
            value = eval_phi(kernel, data, OrderedSplit(learn=learn, test=test))
            assert value == 1 - 2 * data.observation(test).y

    def test_nearest_neighbour_beats_constant_here(self):
        # Learning row (1.0, 1), testing row (2.0, 1): the nearest neighbour
        # is right, the constant-0 rule is wrong, so the difference is -1.
        data = four_rows()
        value = eval_phi(knn_vs_const(), data, OrderedSplit(learn=(2,), test=3))
        assert value == -1.0

    def test_wrong_learning_size_rejected(self):
        data = four_rows()
        with pytest.raises(ValueError, match="learning"):
            phi_value(knn_vs_const(), data.subset((1, 2)), data.observation(3))

    def test_loss_scaling_scales_phi(self):
        data = four_rows()
        scaled = ComparisonKernel(
            knn_learner(1),
            constant_learner(0),
            loss=lambda p, y: 0.5 * misclassification_loss(p, y),
            g=1,
        )
        for learn, test in [((2,), 1), ((2,), 3), ((1,), 2)]:
            split = OrderedSplit(learn=learn, test=test)
            assert eval_phi(scaled, data, split) == 0.5 * eval_phi(
                knn_vs_const(), data, split
            )


class TestSymmetrizedKernel:
    def test_two_point_average_by_hand(self):
        # Test position 1 gives +1, test position 2 gives 0 (both predictors
        # miss the label 1), so the symmetrized value is 1/2.
        data = four_rows()
        assert eval_phi0(knn_vs_const(), data, UnorderedSubset(frozenset({1, 2}))) == 0.5

    def test_constant_pair_averages_labels(self):
        data = four_rows()
        kernel = ComparisonKernel(constant_learner(1), constant_learner(0), g=2)
        for members in itertools.combinations(range(1, 5), 3):
            expected = math.fsum(
                1 - 2 * data.observation(i).y for i in members
            ) / 3
            assert eval_phi0(kernel, data, members) == pytest.approx(expected, abs=1e-15)

    def test_rotation_average_equals_full_permutation_average(self):
        data = Dataset.from_arrays(
            [(0.0, 1.0), (1.0, 0.5), (2.0, -1.0), (0.5, 2.0)],
            [0, 1, 1, 0],
        )
        kernel = ComparisonKernel(stump_learner(), centroid_learner(), g=2)
        for members in itertools.combinations(range(1, 5), 3):
            obs = data.subset(members)
            by_rotation = phi0_value(kernel, obs)
            orderings = [
                phi_value(kernel, perm[:2], perm[2])
                for perm in itertools.permutations(obs)
            ]
            assert by_rotation == pytest.approx(
                math.fsum(orderings) / len(orderings), abs=1e-15
            )

    def test_bounded_by_one_for_zero_one_loss(self):
        data = four_rows()
        for kernel in (knn_vs_const(1), knn_vs_const(2)):
            for members in itertools.combinations(range(1, 5), kernel.m):
                assert abs(eval_phi0(kernel, data, members)) <= 1.0

    def test_wrong_subset_size_rejected(self):
        data = four_rows()
        with pytest.raises(ValueError):
            phi0_value(knn_vs_const(2), data.subset((1, 2)))


class TestProductKernels:
    def test_overlap_windows_multiply(self):
        data = four_rows()
        kernel = knn_vs_const(1)
        first = eval_phi0(kernel, data, (1, 2))
        second = eval_phi0(kernel, data, (2, 3))
        assert eval_kappa_kernel(kernel, data, 1, (1, 2, 3)) == first * second

    def test_full_overlap_squares(self):
        data = four_rows()
        kernel = knn_vs_const(1)
        value = eval_phi0(kernel, data, (1, 2))
        assert eval_kappa_kernel(kernel, data, 2, (1, 2)) == value * value

    def test_disjoint_windows_multiply(self):
        data = four_rows()
        kernel = knn_vs_const(1)
        first = eval_phi0(kernel, data, (1, 2))
        second = eval_phi0(kernel, data, (3, 4))
        assert eval_theta2_kernel(kernel, data, (1, 2, 3, 4)) == first * second

    def test_overlap_out_of_range_rejected(self):
        data = four_rows()
        with pytest.raises(ValueError, match="overlap"):
            eval_kappa_kernel(knn_vs_const(1), data, 3, (1, 2, 3))
        with pytest.raises(ValueError, match="overlap"):
            eval_kappa_kernel(knn_vs_const(1), data, 0, (1, 2, 3))

    def test_wrong_index_count_rejected(self):
        data = four_rows()
        with pytest.raises(ValueError, match="expected"):
            eval_kappa_kernel(knn_vs_const(1), data, 1, (1, 2, 3, 4))

    def test_repeated_indices_rejected(self):
        data = four_rows()
        with pytest.raises(ValueError, match="distinct"):
            eval_theta2_kernel(knn_vs_const(1), data, (1, 2, 1, 3))


class TestKernelEvaluator:
    def test_phi0_ignores_index_order(self):
        data = four_rows()
        ev = KernelEvaluator(knn_vs_const(2), data)
        reference = ev.phi0((1, 2, 3))
        for perm in itertools.permutations((1, 2, 3)):
            assert ev.phi0(perm) == reference

    def test_equal_valued_rows_share_results(self):
        data = Dataset.from_arrays(
            [(0.0,), (1.0,), (2.0,), (0.0,)],
            [0, 1, 1, 0],
        )
        ev = KernelEvaluator(knn_vs_const(1), data)
        # Rows 1 and 4 carry the same observation, so any split using one is
        # interchangeable with the other.
        assert ev.phi((1,), 2) == ev.phi((4,), 2)
        assert ev.phi0((1, 3)) == ev.phi0((4, 3))

    def test_batch_matches_single_evaluations(self):
        data = Dataset.from_arrays(
            [(float(i), float(i % 3)) for i in range(12)],
            [i % 2 for i in range(12)],
        )
        kernel = ComparisonKernel(knn_learner(3), stump_learner(), g=3)
        ev = KernelEvaluator(kernel, data)
        learn = (1, 5, 9)
        tests = [i for i in range(1, 13) if i not in learn]
        batch = ev.phi_batch(learn, tests)
        assert batch == [ev.phi(learn, t) for t in tests]

    def test_complement_total_matches_explicit_sum(self):
        data = Dataset.from_arrays(
            [(float(i), float((i * 7) % 5)) for i in range(10)],
            [(i * 3) % 2 for i in range(10)],
        )
        kernel = ComparisonKernel(knn_learner(3), centroid_learner(), g=2)
        ev = KernelEvaluator(kernel, data)
        for learn in [(1, 2), (9, 10), (4, 7)]:
            held_out = [i for i in range(1, 11) if i not in learn]
            assert ev.phi_complement_total(learn) == math.fsum(
                ev.phi_batch(learn, held_out)
            )

    def test_complement_total_checks_learning_size(self):
        ev = KernelEvaluator(knn_vs_const(1), four_rows())
        with pytest.raises(ValueError, match="learning"):
            ev.phi_complement_total((1, 2))

    def test_phi_rejects_test_inside_learning_part(self):
        ev = KernelEvaluator(knn_vs_const(2), four_rows())
        with pytest.raises(ValueError, match="learning"):
            ev.phi((1, 2), 2)

    def test_phi0_rejects_repeats_and_bad_size(self):
        ev = KernelEvaluator(knn_vs_const(1), four_rows())
        with pytest.raises(ValueError, match="distinct"):
            ev.phi0((1, 1))
        with pytest.raises(ValueError, match="distinct"):
            ev.phi0((1, 2, 3))

    def test_subset_size_must_fit_sample(self):
        with pytest.raises(ValueError, match="exceeds"):
            KernelEvaluator(knn_vs_const(4), four_rows())

    def test_kernel_requires_positive_g(self):
        with pytest.raises(ValueError, match="g"):
            ComparisonKernel(knn_learner(1), constant_learner(0), g=0)
