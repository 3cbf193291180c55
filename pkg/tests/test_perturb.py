"""Tests for the decentralized perturbation and the magnitude sweep."""

import math

import numpy as np
import pytest

from netspec.graph import build_w, generate_graph, validate_assumption1
from netspec.linalg import krylov_matrix, rank
from netspec.perturb import PerturbationSpec, SweepResult, SweepRow, perturb_w, perturbation_sweep
from netspec.spectrum import oracle_spectrum
from netspec.stage1 import init_y0
from netspec.utils import ValidationError


@pytest.fixture
def k3():
    """K3 adjacency: not cyclic."""
    return build_w(generate_graph("complete", 3), "adjacency")


class TestPerturbationSpec:
    """Test perturbation parameters."""

    @pytest.mark.parametrize("magnitude", [0.0, -0.1, math.inf])
    def test_magnitude_positive(self, magnitude):
        """a must be positive and finite."""
        with pytest.raises(ValidationError):
            PerturbationSpec(magnitude)


class TestPerturbW:
    """Test perturb_w."""

    def test_deterministic(self, k3):
        """Same seed, same perturbed W."""
        spec = PerturbationSpec(0.1, seed=3)
        np.testing.assert_array_equal(perturb_w(k3, spec).w, perturb_w(k3, spec).w)

    def test_tiny_magnitude(self, scenario2):
        """As a goes to zero W approaches W-bar."""
        wa = perturb_w(scenario2.w, PerturbationSpec(1e-15, seed=1))
        assert np.max(np.abs(wa.w - scenario2.w.w)) <= 1e-15 + np.spacing(1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_pattern_and_bound(self, seed):
        """Non-edges stay exactly zero and every change is at most a."""
        wbar = build_w(generate_graph("erdos_renyi", 8, 0.4, seed=seed), "laplacian")
        wa = perturb_w(wbar, PerturbationSpec(0.2, seed=seed))
        assert validate_assumption1(wa) == []
        assert np.max(np.abs(wa.w - wbar.w)) <= 0.2 + 1e-12

    def test_asymmetric(self, k3):
        """w_ij and w_ji get independent draws."""
        wa = perturb_w(k3, PerturbationSpec(0.1, seed=0))
        assert not np.allclose(wa.w, wa.w.T)

    def test_draw_order(self):
        """Draws go node by node, diagonal first, neighbors ascending."""
        wbar = build_w(generate_graph("path", 3), "adjacency")
        wa = perturb_w(wbar, PerturbationSpec(0.5, seed=9))
        draws = np.random.default_rng(9).uniform(-0.5, 0.5, 7)
        expected = wbar.w.copy()
        for (i, j), d in zip([(0, 0), (0, 1), (1, 1), (1, 0), (1, 2), (2, 2), (2, 1)], draws):
            expected[i, j] += d
        np.testing.assert_array_equal(wa.w, expected)

    @pytest.mark.parametrize("kind", ["complete", "cycle"])
    def test_restores_controllability(self, kind):
        """Non-cyclic adjacency becomes controllable after perturbation in >= 49/50 trials."""
        wbar = build_w(generate_graph(kind, 4), "adjacency")
        full = 0
        for trial in range(50):
            wa = perturb_w(wbar, PerturbationSpec(0.1, seed=trial))
            full += rank(krylov_matrix(wa.w, init_y0(4, seed=100 + trial))) == 4
        assert full >= 49


class TestPerturbationSweep:
    """Test the magnitude sweep."""

    def test_k3_nonsingular_fraction(self, k3):
        """Perturbed K3 is always nonsingular; the a = 0 control never is."""
        sweep = perturbation_sweep(k3, [0.1], trials=50, seed=0)
        assert sweep.stats_for(0.1).nonsingular_fraction == 1.0
        control = sweep.stats_for(0.0)
        assert control.nonsingular_fraction == 0.0
        assert control.median_condition == math.inf
        assert len(sweep.rows) == 100

    def test_without_control(self, k3):
        """control=False skips the a = 0 rows."""
        sweep = perturbation_sweep(k3, [0.1], trials=3, seed=0, control=False)
        assert {row.magnitude for row in sweep.rows} == {0.1}
        with pytest.raises(KeyError):
            sweep.stats_for(0.0)

    def test_smaller_magnitude_smaller_error(self, scenario2):
        """Median spectrum error at a = 0.02 is below that at a = 0.2."""
        sweep = perturbation_sweep(scenario2.w, [0.2, 0.02], trials=50, seed=11)
        assert sweep.stats_for(0.02).median_spectrum_error < sweep.stats_for(0.2).median_spectrum_error
        assert sweep.stats_for(0.0).median_spectrum_error < 1e-6

    def test_deterministic(self, k3):
        """The same seed reproduces every row."""
        a = perturbation_sweep(k3, [0.1, 0.01], trials=5, seed=4)
        b = perturbation_sweep(k3, [0.1, 0.01], trials=5, seed=4)
        assert a.rows == b.rows

    def test_rows_independent_of_magnitude_list(self, k3):
        """Adding a level after 0.1 leaves the 0.1 rows unchanged."""
        one = perturbation_sweep(k3, [0.1], trials=4, seed=2)
        two = perturbation_sweep(k3, [0.1, 0.05], trials=4, seed=2)
        assert [r for r in one.rows if r.magnitude == 0.1] == [r for r in two.rows if r.magnitude == 0.1]

    def test_progress_callback(self, k3):
        """on_trial fires once per (magnitude, trial)."""
        seen = []
        perturbation_sweep(k3, [0.1], trials=3, seed=0, on_trial=lambda a, t: seen.append((a, t)))
        assert seen == [(0.0, 0), (0.0, 1), (0.0, 2), (0.1, 0), (0.1, 1), (0.1, 2)]

    @pytest.mark.parametrize("magnitudes,trials", [([], 5), ([0.1, -0.1], 5), ([0.1], 0)])
    def test_invalid_inputs(self, k3, magnitudes, trials):
        """Empty or non-positive magnitudes and zero trials are rejected."""
        with pytest.raises(ValidationError):
            perturbation_sweep(k3, magnitudes, trials=trials)

    def test_spectrum_error_reference(self, k3):
        """Spectrum errors are measured against the unperturbed spectrum."""
        sweep = perturbation_sweep(k3, [0.1], trials=5, seed=0, control=False)
        reference = oracle_spectrum(k3.w)
        assert np.allclose(np.sort(reference.real), [-1.0, -1.0, 2.0], atol=1e-6)
        assert all(0.0 < row.spectrum_error < 0.5 for row in sweep.rows)


class TestSweepStats:
    """Test per-magnitude statistics."""

    def test_nonsingular_counts_rank(self):
        """Only rows with rank N count as nonsingular, whatever their condition number."""
        sweep = SweepResult(
            size=3,
            rows=[
                SweepRow(magnitude=0.1, trial=0, rank=3, condition=12.0, spectrum_error=0.01),
                SweepRow(magnitude=0.1, trial=1, rank=2, condition=5.0e9, spectrum_error=0.02),
                SweepRow(magnitude=0.1, trial=2, rank=3, condition=40.0, spectrum_error=math.nan),
                SweepRow(magnitude=0.1, trial=3, rank=1, condition=math.inf, spectrum_error=0.03),
            ],
        )
        stats = sweep.stats_for(0.1)
        assert stats.trials == 4
        assert stats.nonsingular_fraction == 0.5
        assert stats.median_spectrum_error == 0.02

    def test_size_from_swept_matrix(self, k3):
        """The sweep records the node count of W."""
        assert perturbation_sweep(k3, [0.1], trials=1, seed=0).size == 3
