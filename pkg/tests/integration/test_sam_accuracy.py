"""
Integration tests: SAM errors against reference solutions

Anchor values are known error-table entries; the harness must land
within a relative band of them.
"""

import functools
import math

import numpy as np
import pytest

from sam_dde.bench import (
    ErrorTable,
    ReferenceCache,
    SweepSpec,
    column_ratios,
    diagonal_ratios,
    loglog_slope,
    preset,
    row_spread,
    run_sweep,
)
from sam_dde.core.averaging import averaged_rhs_phase2, slope_oracle
from sam_dde.core.refsolve import solve_averaged, solve_oscillatory
from sam_dde.core.sam import sam_solve
from sam_dde.error_handling import NonStroboscopicComparison
from sam_dde.models import SlopeKind, make_grid
from sam_dde.problems import get_problem
from sam_dde.problems.toggle import hill_slope, toggle_fourier, toggle_oscillatory

PI = math.pi


def _single(problem: str, N: int, Omega: float, reference: str = "averaged") -> float:
    table = run_sweep(SweepSpec(problem, (N,), (Omega,), reference=reference))
    return table.error(N, Omega)


class TestToggleNonStroboscopic:
    """Step points that are not whole periods, compared with the averaged reference"""

    @pytest.mark.integration
    def test_single_step_per_delay(self):
        assert _single("toggle", 1, 25.0) == pytest.approx(6.28e-2, rel=0.2)

    @pytest.mark.integration
    def test_eight_steps_per_delay(self):
        assert _single("toggle", 8, 200.0) == pytest.approx(1.80e-4, rel=0.2)

    @pytest.mark.integration
    def test_small_sweep_layout(self):
        table = run_sweep(SweepSpec("toggle", (1, 2), (25.0, 50.0)))

        assert table.cell(2, 25.0).excluded
        assert table.error(2, 25.0) is None
        assert not table.cell(2, 50.0).excluded
        assert table.error(2, 50.0) < table.error(1, 50.0)
        assert table.cell(1, 25.0).evals == 18

    @pytest.mark.integration
    @pytest.mark.slow
    def test_diagonal_is_second_order(self):
        """Expected around 6.9 and 6.2 from (2, 50) to (8, 200)."""
        table = run_sweep(SweepSpec("toggle", (2, 4, 8), (50.0, 100.0, 200.0)))

        ratios = diagonal_ratios(table)

        assert len(ratios) == 2
        assert all(3.0 <= r <= 8.0 for r in ratios)


class TestToggleStroboscopic:
    """Whole-period step points, compared with the oscillatory solution itself"""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_anchor(self):
        assert _single("toggle", 8, 64 * PI, reference="oscillatory") == pytest.approx(9.25e-5, rel=0.3)

    @pytest.mark.integration
    def test_non_stroboscopic_comparison_is_rejected(self):
        spec = SweepSpec("toggle", (1,), (25.0,), reference="oscillatory")

        with pytest.raises(NonStroboscopicComparison):
            run_sweep(spec)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_averaged_solution_tracks_oscillatory_at_whole_periods(self):
        """max |x - X| over t = 0.25 k decays like 1 / Omega^2."""
        omegas = [64 * PI, 128 * PI, 256 * PI, 512 * PI]
        times = np.arange(1, 9) * 0.25
        gaps = []
        for Omega in omegas:
            bundle = get_problem("toggle", Omega)
            osc = solve_oscillatory(bundle.oscillatory, omega=Omega)
            avg = solve_averaged(bundle.averaged)
            gaps.append(float(np.max(np.abs(osc.eval_many(times) - avg.eval_many(times)))))

        assert loglog_slope(omegas, gaps) <= -1.8


class TestDelayedModes:
    """Oscillatory modes that depend on the delayed state"""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_whole_period_delay_keeps_second_order(self):
        err = _single("newpro", 64, 512 * PI)

        assert err <= 1.3e-5

    @pytest.mark.integration
    @pytest.mark.slow
    def test_off_period_delay_loses_accuracy(self):
        err = _single("newpro", 64, 512 * PI + PI)

        assert err >= 2.5e-5


class TestLargeForcing:
    """Forcing amplitude proportional to Omega"""

    @pytest.mark.integration
    def test_gene_anchor(self):
        assert _single("toggle-gene", 1, 8 * PI) == pytest.approx(4.10e-2, rel=0.3)


class TestSweepMachinery:
    @pytest.mark.integration
    def test_references_are_cached(self):
        cache = ReferenceCache()
        spec = SweepSpec("toggle", (1, 2), (25.0, 50.0))

        first = run_sweep(spec, cache=cache)
        second = run_sweep(spec, cache=cache)

        assert len(cache) == 2
        assert cache.get_stats()["hits"] >= 2
        assert second.error(1, 50.0) == first.error(1, 50.0)

    @pytest.mark.integration
    def test_workers_do_not_change_results(self):
        spec = SweepSpec("toggle", (1, 2), (25.0, 50.0))

        serial = run_sweep(spec, max_workers=1)
        parallel = run_sweep(spec, max_workers=2)

        for n in spec.N_list:
            for w in spec.Omega_list:
                assert serial.error(n, w) == parallel.error(n, w)

    @pytest.mark.integration
    def test_persisted_reference_is_reused(self, tmp_path):
        spec = SweepSpec("toggle", (1,), (50.0,))
        run_sweep(spec, cache=ReferenceCache(persist=True, cache_dir=str(tmp_path)))

        fresh = ReferenceCache(persist=True, cache_dir=str(tmp_path))
        table = run_sweep(spec, cache=fresh)

        assert len(list((tmp_path / "references").glob("*.npz"))) == 1
        assert fresh.get_stats()["misses"] == 1
        assert table.error(1, 50.0) is not None


class TestSlopeConsistency:
    """Difference quotients SAM computes against the averaged slopes they approximate"""

    N = 4
    NU_MAX = 32

    @pytest.fixture
    def solver(self, toggle_params):
        def solve(Omega: float, t_max: float):
            osc = toggle_oscillatory(toggle_params, Omega)
            return sam_solve(osc, make_grid(self.N, self.NU_MAX, Omega, toggle_params.tau), t_max=t_max)

        return solve, toggle_fourier(toggle_params)

    @staticmethod
    def _aug(x: np.ndarray, t: float) -> np.ndarray:
        return np.concatenate([x, [t]])

    @pytest.mark.integration
    @pytest.mark.parametrize("Omega", [200.0, 800.0])
    def test_forward_slope_at_start_is_f0_plus_first_order(self, solver, toggle_params, Omega):
        """(0.5, 2) has f_0 = 0; the B / Omega lift of x1 leaves hill'(0.5) B / Omega in x2."""
        solve, fourier = solver
        sol = solve(Omega, 0.5)
        first = sol.slopes[0]
        history = fourier.history

        oracle = np.real(slope_oracle(fourier, 1, history(0.0), history(-toggle_params.tau)))[:2]
        gap = float(np.max(np.abs(first.value - oracle)))

        assert first.kind == SlopeKind.FORWARD
        assert gap * Omega == pytest.approx(abs(hill_slope(toggle_params, 0.5)) * toggle_params.B, rel=0.05)

    @pytest.mark.integration
    def test_central_slope_before_delay_matches_phase1(self, solver, toggle_params):
        solve, fourier = solver
        Omega = 200.0
        sol = solve(Omega, 0.5)
        t1 = float(sol.times[1])
        X, Y = self._aug(sol.states[1], t1), fourier.history(t1 - toggle_params.tau)
        central = sol.slopes[1]

        oracle = np.real(slope_oracle(fourier, 2, X, Y, t=t1, Omega=Omega))[:2]
        f_zero = np.real(slope_oracle(fourier, 1, X, Y))[:2]
        gap = float(np.max(np.abs(central.value - oracle)))

        assert central.kind == SlopeKind.CENTRAL
        assert gap <= 2e-3
        # the first-order drift is resolved, not just f_0
        assert float(np.max(np.abs(central.value - f_zero))) >= 10 * gap

    @pytest.mark.integration
    @pytest.mark.parametrize("Omega", [200.0, 200.0 + PI])
    def test_central_slope_after_delay_matches_phase2(self, solver, toggle_params, Omega):
        """Without delayed modes the missing exp(i k Omega tau) factor does not matter."""
        solve, fourier = solver
        tau = toggle_params.tau
        n = self.N + 1
        sol = solve(Omega, 0.75)
        t = float(sol.times[n])
        X = self._aug(sol.states[n], t)
        Y = self._aug(sol.states[1], float(sol.times[1]))
        Z = fourier.history(t - 2 * tau)

        oracle = np.real(slope_oracle(fourier, 4, X, Y, Z, Omega=Omega))

        np.testing.assert_allclose(oracle, averaged_rhs_phase2(fourier, X, Y, Z, Omega).value, atol=1e-12)
        assert sol.slopes[n].kind == SlopeKind.CENTRAL
        assert float(np.max(np.abs(sol.slopes[n].value - oracle[:2]))) <= 2e-3
        assert oracle[0] == pytest.approx(
            np.real(slope_oracle(fourier, 1, X, Y))[0] - toggle_params.B / Omega, abs=1e-12
        )


# Published toggle errors, rows N = 1..128 and columns Omega = 25 * 2^j; None where H < 2T
TAB4_PUBLISHED = [
    [6.28e-2, 3.42e-2, 1.71e-2, 7.87e-3, 3.14e-3, 1.66e-3, 2.04e-3, 2.30e-3],
    [None, 7.66e-3, 3.74e-3, 1.66e-3, 8.27e-4, 7.56e-4, 7.20e-4, 7.02e-4],
    [None, None, 1.11e-3, 4.45e-4, 2.60e-4, 2.20e-4, 1.99e-4, 1.88e-4],
    [None, None, None, 1.80e-4, 6.35e-5, 5.57e-5, 5.06e-5, 4.77e-5],
    [None, None, None, None, 3.20e-5, 1.27e-5, 1.22e-5, 1.18e-5],
    [None, None, None, None, None, 6.31e-6, 2.81e-6, 2.85e-6],
    [None, None, None, None, None, None, 1.36e-6, 6.46e-7],
    [None, None, None, None, None, None, None, 3.22e-7],
]


@functools.lru_cache(maxsize=None)
def _regenerated(name: str) -> ErrorTable:
    return run_sweep(preset(name))


class TestTableReproduction:
    """Full 8 x 8 sweeps against the published error tables"""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_toggle_table_cell_by_cell(self):
        table = _regenerated("tab4")

        for i, n in enumerate(table.N_list):
            for j, w in enumerate(table.Omega_list):
                published = TAB4_PUBLISHED[i][j]
                if published is None:
                    assert table.cell(n, w).excluded
                else:
                    assert table.error(n, w) == pytest.approx(published, rel=0.3), (n, w)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_toggle_table_anchors(self):
        table = _regenerated("tab4")

        assert table.error(1, 25.0) == pytest.approx(6.28e-2, rel=0.2)
        assert table.error(8, 200.0) == pytest.approx(1.80e-4, rel=0.2)
        assert table.error(128, 3200.0) == pytest.approx(3.22e-7, rel=0.2)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_last_column_is_second_order_until_the_floor(self):
        """Rows 1..64 of the Omega = 3200 column; the last pair is limited by the h / Omega floor."""
        ratios = column_ratios(_regenerated("tab4"))

        assert len(ratios) == 7
        assert all(3.0 <= r <= 6.0 for r in ratios[:6])

    @pytest.mark.integration
    @pytest.mark.slow
    def test_rows_saturate_in_omega(self):
        spread = row_spread(_regenerated("tab4"))

        # rows 1..16 have three populated off-diagonal cells at the right edge
        assert all(s <= 0.5 for s in spread[:5])

    @pytest.mark.integration
    @pytest.mark.slow
    def test_multiples_of_pi_match_powers_of_25(self):
        """Stroboscopic step points change the table very little."""
        tab4, tab2 = _regenerated("tab4"), _regenerated("tab2")

        for n in tab4.N_list:
            for w4, w2 in zip(tab4.Omega_list, tab2.Omega_list):
                e4, e2 = tab4.error(n, w4), tab2.error(n, w2)
                assert (e4 is None) == (e2 is None), (n, w4)
                if e4 is not None:
                    assert e2 == pytest.approx(e4, rel=0.3), (n, w2)

    @pytest.mark.integration
    @pytest.mark.slow
    def test_gene_fine_anchor(self):
        assert _single("toggle-gene", 128, 1024 * PI) == pytest.approx(1.63e-6, rel=0.3)
