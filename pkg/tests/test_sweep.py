"""Sweeps over (q_low, lambda): shape of the manipulable region and the
CSV rendering."""

import warnings

import pytest

from juryrig.analysis import Classification, classify
from juryrig.model import JuryrigWarning, ModelDomainError, PopulationProfile
from juryrig.sweep import (
    COLUMNS, SweepSpec, is_monotone, nonmanipulable_counts,
    nonmonotone_in_lambda, render_csv, run_sweep, sweep_row,
)


def _at(mapping: dict, q: float):
    (key,) = [k for k in mapping if abs(k - q) < 1e-9]
    return mapping[key]


@pytest.fixture(scope="module")
def default_rows():
    return run_sweep(SweepSpec())


# =============================================================================
# SweepSpec and axes
# =============================================================================

class TestSweepSpec:

    def test_default_grid_is_21_by_21(self):
        spec = SweepSpec()
        assert len(spec.q_low_values()) == 21
        assert len(spec.lambda_values()) == 21
        assert spec.q_low_values()[-1] == pytest.approx(0.7)
        assert spec.lambda_values()[-1] == pytest.approx(1.0)

    def test_q_low_range_above_q_high_refused(self):
        with pytest.raises(ModelDomainError, match="q_low range"):
            SweepSpec(q_high=0.65, q_low=(0.5, 0.7, 0.01))

    def test_non_positive_step_refused(self):
        with pytest.raises(ModelDomainError, match="step"):
            SweepSpec(lam=(0.0, 1.0, 0.0))

    def test_oracle_step_checked(self):
        with pytest.raises(ModelDomainError, match="grid step"):
            SweepSpec(oracle_step=0.05)


# =============================================================================
# Shape of the manipulable region
# =============================================================================

class TestSweepShape:

    def test_rows_in_lexicographic_order(self, default_rows):
        assert len(default_rows) == 21 * 21
        keys = [(r.q_low, r.lam) for r in default_rows]
        assert keys == sorted(keys)

    def test_manipulability_is_not_monotone_in_lambda(self, default_rows):
        flipping = nonmonotone_in_lambda(default_rows)
        assert any(abs(q - 0.6) < 1e-9 for q in flipping)

    def test_not_manipulable_measure_is_not_monotone_in_q_low(self, default_rows):
        counts = nonmanipulable_counts(default_rows)
        assert _at(counts, 0.69) == 0
        assert _at(counts, 0.6) > _at(counts, 0.51) > 0
        assert not is_monotone([counts[q] for q in sorted(counts)])

    def test_low_q_high_is_always_manipulable(self):
        rows = run_sweep(SweepSpec(q_high=0.65, q_low=(0.5, 0.65, 0.01)))
        assert rows
        assert all(r.classification is not Classification.NOT_MANIPULABLE for r in rows)

    def test_single_cell_matches_classify(self):
        row = sweep_row(PopulationProfile.homogeneous(0.7))
        report = classify(PopulationProfile.homogeneous(0.7))
        assert row.classification is report.classification
        assert row.n_witnesses == 1
        assert row.best_candidate_id == "HH"
        assert row.bias_min == pytest.approx(0.0, abs=1e-12)

    def test_not_manipulable_cell_has_no_bias(self):
        row = sweep_row(PopulationProfile(0.3, 0.6, 0.7))
        assert row.classification is Classification.NOT_MANIPULABLE
        assert row.n_witnesses == 0
        assert row.bias_min is None and row.bias_max is None
        assert row.cells()[5:7] == ["", ""]

    def test_oracle_agrees_on_a_coarse_sweep(self):
        spec = SweepSpec(q_low=(0.5, 0.7, 0.05), lam=(0.0, 1.0, 0.25),
                         oracle_step=0.01)
        with warnings.catch_warnings():
            warnings.simplefilter("error", JuryrigWarning)
            rows = run_sweep(spec)
        assert all(r.oracle_agrees for r in rows)


# =============================================================================
# CSV rendering
# =============================================================================

class TestRenderCsv:

    def test_header_and_fixed_precision(self):
        rows = run_sweep(SweepSpec(q_low=(0.6, 0.6, 0.01), lam=(0.3, 0.3, 0.05)))
        text = render_csv(rows)
        header, line = text.splitlines()
        assert header == ",".join(COLUMNS)
        assert line.startswith("0.6000,0.7000,0.3000,NotManipulable,0,,,")

    def test_rendering_is_deterministic(self):
        spec = SweepSpec(q_low=(0.5, 0.7, 0.05), lam=(0.0, 1.0, 0.1))
        assert render_csv(run_sweep(spec)) == render_csv(run_sweep(spec))

    def test_oracle_column(self):
        spec = SweepSpec(q_low=(0.7, 0.7, 0.01), lam=(0.0, 0.0, 0.05),
                         oracle_step=0.01)
        text = render_csv(run_sweep(spec), with_oracle=True)
        header, line = text.splitlines()
        assert header.endswith(",oracle_agrees")
        assert line.endswith(",true")
