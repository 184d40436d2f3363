import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrashift import (
    BandlimitedEncoder,
    FrequencyBand,
    ProbeConfig,
    RandomProjectionEncoder,
    SpectralEncoder,
    TimeSeries,
    TrainConfig,
    evaluate_head,
    generate_probe_pair,
    make_encoder,
    roc_auc,
    run_probe_experiment,
    train_head,
)
from spectrashift.errors import (
    DivergenceError,
    InvalidInputError,
    UndefinedAUCError,
)
from spectrashift.probing import LinearHead, standardization

from conftest import sinusoid


def brute_force_auc(scores, labels):
    """All-pairs rank statistic; ties count one half. Independent oracle."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    pos = scores[labels]
    neg = scores[~labels]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (pos.size * neg.size)


class TestRocAuc:
    def test_worked_example(self):
        scores = np.array([0.1, 0.4, 0.35, 0.8])
        labels = np.array([0, 0, 1, 1])
        assert roc_auc(scores, labels) == 0.75

    def test_perfect_separation(self):
        assert roc_auc(np.array([0.1, 0.2, 0.8, 0.9]), np.array([0, 0, 1, 1])) == 1.0

    def test_all_ties_give_half(self):
        assert roc_auc(np.full(6, 0.5), np.array([0, 1, 0, 1, 0, 1])) == 0.5

    def test_single_class_is_undefined(self):
        with pytest.raises(UndefinedAUCError):
            roc_auc(np.array([0.1, 0.2]), np.array([1, 1]))

    @given(
        n=st.integers(min_value=2, max_value=200),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        coarse=st.booleans(),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_exactly(self, n, seed, coarse):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        if coarse:
            # tiny score alphabet forces plenty of ties
            scores = rng.integers(0, 4, size=n) / 4.0
        else:
            scores = rng.normal(size=n)
        assert roc_auc(scores, labels) == brute_force_auc(scores, labels)


class TestBuiltinEncoders:
    def test_spectral_peak_coordinate(self):
        enc = SpectralEncoder(64)
        emb = enc.embed(TimeSeries(sinusoid(64, 8 / 64)))
        assert emb.shape == (32,)
        # coordinate i holds bin i+1, so the tone at bin 8 peaks at index 7
        assert int(np.argmax(emb)) == 7
        assert emb[7] == pytest.approx(1.0, abs=1e-9)

    def test_bandlimited_zeroes_out_of_band_tone(self):
        enc = BandlimitedEncoder(64, FrequencyBand(0.0, 0.2))
        emb = enc.embed(TimeSeries(sinusoid(64, 0.3)))  # on-bin 19.2/64? 0.3*64=19.2
        in_band = emb[: int(0.2 * 64)]
        # out-of-band content is zeroed; only leakage below 0.2 can remain
        assert np.all(emb[int(0.2 * 64) :] == 0.0)
        assert np.max(in_band) < 0.2

    def test_bandlimited_keeps_in_band_tone(self):
        enc = BandlimitedEncoder(64, FrequencyBand(0.0, 0.2))
        emb = enc.embed(TimeSeries(sinusoid(64, 8 / 64)))
        assert emb[7] == pytest.approx(1.0, abs=1e-9)

    def test_frozen_contract(self):
        series = TimeSeries(sinusoid(64, 8 / 64))
        for enc in (
            SpectralEncoder(64),
            BandlimitedEncoder(64, FrequencyBand(0.05, 0.3)),
            RandomProjectionEncoder(64, seed=5),
        ):
            a = enc.embed(series)
            b = enc.embed(series)
            assert np.array_equal(a, b)

    def test_randproj_dim_and_determinism(self):
        a = RandomProjectionEncoder(100, seed=4)
        b = RandomProjectionEncoder(100, seed=4)
        c = RandomProjectionEncoder(100, seed=5)
        x = np.random.default_rng(0).normal(size=(3, 100))
        assert a.embed_batch(x).shape == (3, 128)
        assert np.array_equal(a.embed_batch(x), b.embed_batch(x))
        assert not np.array_equal(a.embed_batch(x), c.embed_batch(x))

    def test_make_encoder_parsing(self):
        assert isinstance(make_encoder("spectral", 64), SpectralEncoder)
        enc = make_encoder("bandlimited:0.1,0.3", 64)
        assert isinstance(enc, BandlimitedEncoder)
        assert enc.band.low == 0.1
        assert isinstance(make_encoder("randproj:9", 64), RandomProjectionEncoder)
        with pytest.raises(InvalidInputError):
            make_encoder("bandlimited:oops", 64)
        with pytest.raises(InvalidInputError):
            make_encoder("mystery", 64)


class TestTrainHead:
    def test_realizable_linear_target(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(256, 8))
        w_true = np.array([0.05, -0.03, 0.02, 0.0, 0.04, -0.05, 0.01, 0.03])
        y = x @ w_true + 0.02
        config = TrainConfig(seed=1)
        head, _ = train_head(x[:192], y[:192], x[192:], y[192:], config)
        final_train_mse = float(np.mean((head.scores(x[:192]) - y[:192]) ** 2))
        assert final_train_mse <= 1e-3

    def test_uninformative_features_hit_the_chance_floor(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(1500, 32))
        y = rng.normal(size=1500)
        y = (y - y[:1000].mean()) / y[:1000].std()
        config = TrainConfig(seed=3)
        head, _ = train_head(x[:1000], y[:1000], x[1000:1250], y[1000:1250], config)
        test_mse = float(np.mean((head.scores(x[1250:]) - y[1250:]) ** 2))
        assert 0.85 <= test_mse <= 1.15

    def test_best_checkpoint_is_returned(self):
        # tiny noisy problem that overfits: validation worsens late, so the
        # returned parameters must come from the early best epoch
        rng = np.random.default_rng(11)
        x = rng.normal(size=(40, 60))
        y = rng.normal(size=40)
        config = TrainConfig(seed=5, epochs=60, batch_size=8)
        head_a, best_epoch = train_head(x[:30], y[:30], x[30:], y[30:], config)
        assert best_epoch < 60
        rerun = TrainConfig(seed=5, epochs=best_epoch, batch_size=8)
        head_b, best_b = train_head(x[:30], y[:30], x[30:], y[30:], rerun)
        assert best_b == best_epoch
        assert np.array_equal(head_a.weights, head_b.weights)
        assert head_a.bias == head_b.bias

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(100, 10))
        y = rng.normal(size=100)
        config = TrainConfig(seed=17, epochs=5)
        head_a, ep_a = train_head(x[:80], y[:80], x[80:], y[80:], config)
        head_b, ep_b = train_head(x[:80], y[:80], x[80:], y[80:], config)
        assert ep_a == ep_b
        assert np.array_equal(head_a.weights, head_b.weights)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_raises_with_epoch(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(64, 4)) * 1e150
        y = rng.normal(size=64) * 1e150
        config = TrainConfig(seed=0, learning_rate=1e150, epochs=3)
        with pytest.raises(DivergenceError) as err:
            train_head(x[:48], y[:48], x[48:], y[48:], config)
        assert err.value.epoch >= 1

    def test_bce_loss_trains_a_separator(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(400, 4))
        y = (x[:, 0] + 0.1 * rng.normal(size=400) > 0).astype(float)
        config = TrainConfig(seed=2, loss="bce")
        head, _ = train_head(x[:300], y[:300], x[300:], y[300:], config)
        metrics = evaluate_head(head, x[300:], y[300:], "classification")
        assert metrics["auc"] > 0.9


class TestEvaluateHead:
    def test_regression_metrics_and_jensen(self):
        rng = np.random.default_rng(6)
        head = LinearHead(weights=rng.normal(size=5), bias=0.1)
        x = rng.normal(size=(50, 5))
        y = rng.normal(size=50)
        metrics = evaluate_head(head, x, y, "regression")
        assert metrics["mae"] ** 2 <= metrics["mse"] + 1e-15

    def test_classification_accuracy_threshold(self):
        head = LinearHead(weights=np.array([10.0]), bias=0.0)
        x = np.array([[-1.0], [1.0], [2.0], [-2.0]])
        y = np.array([0.0, 1.0, 1.0, 0.0])
        metrics = evaluate_head(head, x, y, "classification")
        assert metrics["accuracy"] == 1.0
        assert metrics["auc"] == 1.0


class TestStandardization:
    def test_zero_variance_dims_pass_through(self):
        x = np.array([[1.0, 7.0], [1.0, 9.0], [1.0, 11.0]])
        mu, sigma = standardization(x)
        assert sigma[0] == 1.0
        z = (x - mu) / sigma
        assert np.all(z[:, 0] == 0.0)
        assert z[:, 1].std() == pytest.approx(1.0)


@pytest.fixture(scope="module")
def probe_pair():
    config = ProbeConfig(
        band=FrequencyBand(0.05, 0.2),
        n_samples=120,
        length=128,
        seed=23,
        classification_mode="median-bin",
    )
    return generate_probe_pair(config)


class TestRunProbeExperiment:
    def test_reports_and_determinism(self, probe_pair):
        seen, unseen = probe_pair
        enc = SpectralEncoder(128)
        config = TrainConfig(seed=31, epochs=8)
        rep_a = run_probe_experiment(seen, unseen, enc, "regression", config, repeats=2)
        rep_b = run_probe_experiment(seen, unseen, enc, "regression", config, repeats=2)
        assert rep_a.to_json() == rep_b.to_json()
        assert rep_a.repeats == 2
        for variant in ("seen", "unseen"):
            assert len(rep_a.runs[variant]) == 2
            for report in rep_a.runs[variant]:
                assert report.mae**2 <= report.mse + 1e-15
                assert 1 <= report.best_epoch <= 8

    def test_identical_datasets_give_small_deltas(self, probe_pair):
        seen, _ = probe_pair
        enc = SpectralEncoder(128)
        config = TrainConfig(seed=13, epochs=10)
        report = run_probe_experiment(seen, seen, enc, "regression", config, repeats=2)
        # both variants see the same data; only head seeds differ
        assert abs(report.deltas()["mse"]) < 0.1

    def test_classification_path(self, probe_pair):
        seen, unseen = probe_pair
        enc = SpectralEncoder(128)
        config = TrainConfig(seed=41, epochs=10)
        report = run_probe_experiment(seen, unseen, enc, "classification", config, repeats=1)
        for variant in ("seen", "unseen"):
            run = report.runs[variant][0]
            assert 0.0 <= run.accuracy <= 1.0
            assert 0.0 <= run.auc <= 1.0
        assert report.selection_metric == "val_loss"

    def test_render_table_mentions_both_variants(self, probe_pair):
        seen, unseen = probe_pair
        enc = SpectralEncoder(128)
        report = run_probe_experiment(
            seen, unseen, enc, "regression", TrainConfig(seed=1, epochs=3), repeats=1
        )
        table = report.render_table()
        assert "Seen" in table and "Unseen" in table
        assert "Test MSE" in table and "Test MAE" in table

    def test_unknown_task(self, probe_pair):
        seen, unseen = probe_pair
        with pytest.raises(InvalidInputError):
            run_probe_experiment(
                seen, unseen, SpectralEncoder(128), "forecasting", TrainConfig()
            )
