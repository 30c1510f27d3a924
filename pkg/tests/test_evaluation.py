import math
from datetime import date

import numpy as np
import pytest

from sentistock.errors import EmptyInput, LengthMismatch, ZeroActual
from sentistock.evaluation import (
    EvalReport,
    VariantRecord,
    accuracy,
    mape,
    render_table,
    report_from_json,
    report_to_json,
    rmse,
    run_comparison,
)
from sentistock.lstm import TrainConfig

from fixtures import make_coupled_fixture


class TestMape:
    def test_perfect_prediction(self):
        assert mape([100.0, 50.0], [100.0, 50.0]) == 0.0

    def test_hand_computed(self):
        assert mape([100.0, 200.0], [110.0, 180.0]) == pytest.approx(10.0, abs=1e-12)

    def test_zero_actual(self):
        with pytest.raises(ZeroActual):
            mape([0.0, 1.0], [1.0, 1.0])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mape([1.0], [1.0, 2.0])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            mape([], [])


class TestAccuracy:
    def test_perfect(self):
        assert accuracy([10.0], [10.0]) == 100.0

    def test_ten_percent_error(self):
        assert accuracy([100.0, 200.0], [110.0, 180.0]) == pytest.approx(90.0, abs=1e-12)

    def test_average_of_reference_accuracies(self):
        # Reference check on the averaging rule: mean(95.41, 97.18, 92.38) -> 94.99.
        mean = (95.41 + 97.18 + 92.38) / 3
        assert f"{mean:.2f}" == "94.99"

    def test_accuracy_plus_mape_is_100_exactly(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 30))
            a = rng.uniform(1, 100, size=n)
            p = a + rng.normal(0, 10, size=n)
            m = mape(a, p)
            acc = accuracy(a, p)
            assert acc == 100.0 - m
            assert acc + m == 100.0


class TestRmse:
    def test_identical(self):
        assert rmse([3.0, 4.0], [3.0, 4.0]) == 0.0

    def test_hand_computed(self):
        assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5), abs=1e-12)

    def test_single_element(self):
        assert rmse([1.0], [3.0]) == 2.0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(1, 10, size=20)
        p = rng.uniform(1, 10, size=20)
        perm = rng.permutation(20)
        assert rmse(a, p) == pytest.approx(rmse(a[perm], p[perm]), abs=1e-12)
        assert mape(a, p) == pytest.approx(mape(a[perm], p[perm]), abs=1e-12)


def record(variant, epochs, acc):
    return VariantRecord(
        variant=variant, epochs=epochs, accuracy_pct=acc, mape_pct=100.0 - acc,
        rmse=1.0, dates=(date(2020, 1, 6),), real=(100.0,), predicted=(99.0,),
    )


REFERENCE_ACCURACIES = {
    ("dlpm", 5): 91.59, ("hisa", 5): 95.41,
    ("dlpm", 10): 94.56, ("hisa", 10): 97.18,
    ("dlpm", 15): 83.46, ("hisa", 15): 92.38,
}


def reference_report() -> EvalReport:
    records = [
        record(variant, epochs, acc)
        for (variant, epochs), acc in sorted(REFERENCE_ACCURACIES.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    ]
    return EvalReport.from_records(records)


class TestEvalReport:
    def test_averages_are_arithmetic_means(self):
        report = reference_report()
        assert report.average_for("dlpm") == pytest.approx((91.59 + 94.56 + 83.46) / 3, abs=1e-12)
        assert report.average_for("hisa") == pytest.approx((95.41 + 97.18 + 92.38) / 3, abs=1e-12)

    def test_render_has_eight_data_rows(self):
        table = render_table(reference_report())
        lines = [ln for ln in table.strip().splitlines()]
        # header + separator + 6 variant-epoch rows + 2 average rows
        assert len(lines) == 10
        assert sum(ln.startswith("Average") for ln in lines) == 2

    def test_render_reproduces_reference_averages(self):
        table = render_table(reference_report())
        assert "89.87%" in table
        assert "94.99%" in table

    def test_json_roundtrip(self):
        report = reference_report()
        again = report_from_json(report_to_json(report))
        assert again == report


@pytest.fixture(scope="module")
def small_inputs():
    return make_coupled_fixture(n_days=70, seed=11)


@pytest.fixture(scope="module")
def small_config():
    return TrainConfig(epochs=2, learning_rate=0.02, batch_size=16, seed=5,
                       grad_clip_norm=5.0, optimizer="adam", hidden_size=8)


class TestRunComparison:
    def test_structure(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        report = run_comparison(series, tweets, lexicon, [2, 3], small_config, lookback=6)
        assert len(report.records) == 4
        assert [r.variant for r in report.records] == ["dlpm", "hisa", "dlpm", "hisa"]
        assert [r.epochs for r in report.records] == [2, 2, 3, 3]
        assert len(report.averages) == 2

    def test_real_series_shared_across_variants(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        report = run_comparison(series, tweets, lexicon, [2], small_config, lookback=6)
        dlpm, hisa = report.records
        assert dlpm.dates == hisa.dates
        assert dlpm.real == hisa.real

    def test_real_series_is_raw_targets(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        report = run_comparison(series, tweets, lexicon, [2], small_config, lookback=6)
        raw_close = [b.close for b in series.bars]
        rec = report.records[0]
        rows = len(series.bars) - 1
        split = int(0.75 * rows)
        expected = raw_close[split + 1:]
        assert np.max(np.abs(np.array(rec.real) - np.array(expected))) < 1e-9

    def test_deterministic_reports(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        a = run_comparison(series, tweets, lexicon, [2], small_config, lookback=6)
        b = run_comparison(series, tweets, lexicon, [2], small_config, lookback=6)
        assert report_to_json(a) == report_to_json(b)

    def test_accuracy_identity_on_records(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        report = run_comparison(series, tweets, lexicon, [2], small_config, lookback=6)
        for rec in report.records:
            assert rec.accuracy_pct == 100.0 - rec.mape_pct

    def test_checkpoint_sink_called_per_run(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        seen = []
        run_comparison(series, tweets, lexicon, [2, 3], small_config, lookback=6,
                       checkpoint_sink=lambda v, e, cp: seen.append((v, e, cp.config.epochs)))
        assert seen == [("dlpm", 2, 2), ("hisa", 2, 2), ("dlpm", 3, 3), ("hisa", 3, 3)]

    def test_empty_epoch_sizes_rejected(self, small_inputs, small_config):
        series, tweets, lexicon = small_inputs
        with pytest.raises(ValueError):
            run_comparison(series, tweets, lexicon, [], small_config)
