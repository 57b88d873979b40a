import math

import numpy as np
import pytest

from driftml.detectors import (
    DDM,
    EDDM,
    Adwin,
    AdwinDetector,
    DetectorVerdict,
    NullDetector,
    make_detector,
)


def bernoulli_step(seed, n_before, n_after, p_before, p_after):
    rng = np.random.default_rng(seed)
    head = (rng.random(n_before) < p_before).astype(int)
    tail = (rng.random(n_after) < p_after).astype(int)
    return np.concatenate([head, tail])


def first_drift_index(detector, errors):
    for i, e in enumerate(errors):
        if detector.update(int(e)) is DetectorVerdict.DRIFT:
            return i
    return None


class TestDDM:
    def test_constant_correct_stream_never_drifts(self):
        ddm = DDM()
        assert all(
            ddm.update(0) is DetectorVerdict.IN_CONTROL for _ in range(5000)
        )

    def test_warmup_is_silent(self):
        ddm = DDM()
        verdicts = [ddm.update(1) for _ in range(29)]
        assert all(v is DetectorVerdict.IN_CONTROL for v in verdicts)

    def test_detects_error_step(self):
        errors = bernoulli_step(seed=1, n_before=2000, n_after=1000, p_before=0.1, p_after=0.5)
        idx = first_drift_index(DDM(), errors)
        assert idx is not None
        assert idx - 2000 <= 300

    def test_resets_after_drift(self):
        errors = bernoulli_step(seed=2, n_before=2000, n_after=500, p_before=0.1, p_after=0.6)
        ddm = DDM()
        idx = first_drift_index(ddm, errors)
        assert idx is not None
        assert ddm.n == 0 and ddm.p_min == math.inf

    def test_few_false_alarms_when_stationary(self):
        rng = np.random.default_rng(7)
        ddm = DDM()
        drifts = sum(
            ddm.update(int(rng.random() < 0.2)) is DetectorVerdict.DRIFT
            for _ in range(50_000)
        )
        assert drifts <= 2


class TestEDDM:
    def test_periodic_errors_never_drift(self):
        eddm = EDDM()
        for i in range(5000):
            verdict = eddm.update(1 if i % 10 == 0 else 0)
            assert verdict is DetectorVerdict.IN_CONTROL

    def test_first_29_errors_in_control(self):
        eddm = EDDM()
        verdicts = []
        for i in range(29 * 3):
            verdicts.append(eddm.update(1 if i % 3 == 0 else 0))
        assert all(v is DetectorVerdict.IN_CONTROL for v in verdicts)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_detects_gap_halving(self, seed):
        # Mean gap between errors halves (20 -> 10) after the 200th error.
        rng = np.random.default_rng(seed)
        eddm = EDDM()
        errors_seen = 0
        while errors_seen < 200:
            e = int(rng.random() < 1 / 20)
            errors_seen += e
            eddm.update(e)
        post_errors = 0
        fired = None
        for _ in range(20_000):
            e = int(rng.random() < 1 / 10)
            post_errors += e
            if eddm.update(e) is DetectorVerdict.DRIFT:
                fired = post_errors
                break
        assert fired is not None and fired <= 50

    def test_detects_bernoulli_step(self):
        errors = bernoulli_step(seed=3, n_before=2000, n_after=1000, p_before=0.1, p_after=0.5)
        idx = first_drift_index(EDDM(), errors)
        assert idx is not None and idx - 2000 <= 1000

    def test_reset_after_drift(self):
        errors = bernoulli_step(seed=4, n_before=2000, n_after=1000, p_before=0.05, p_after=0.6)
        eddm = EDDM()
        idx = first_drift_index(eddm, errors)
        assert idx is not None
        assert eddm.n == 0 and eddm.error_count == 0


class TestAdwin:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Adwin().update(1.5)

    def test_mean_matches_retained_values_exactly(self):
        rng = np.random.default_rng(11)
        adwin = Adwin(delta=0.01)
        mirror = []
        for i in range(4000):
            p = 0.2 if i < 2000 else 0.8
            v = float(rng.random() < p)
            mirror.append(v)
            adwin.update(v)
            del mirror[: len(mirror) - adwin.width]
            assert adwin.width == len(mirror)
            assert adwin.mean == pytest.approx(np.mean(mirror), abs=1e-12)

    def test_detects_mean_step_quickly(self):
        rng = np.random.default_rng(5)
        adwin = Adwin(delta=0.002)
        cut_at = None
        for i in range(12_000):
            p = 0.2 if i < 10_000 else 0.8
            if adwin.update(float(rng.random() < p)) and i >= 10_000:
                cut_at = i
                break
        assert cut_at is not None and cut_at - 10_000 <= 400

    def test_false_positive_rate_on_stationary_stream(self):
        total_cut_events = 0
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            adwin = Adwin(delta=0.002)
            cuts = sum(
                adwin.update(float(rng.random() < 0.2)) for _ in range(50_000)
            )
            assert cuts <= 5
            total_cut_events += cuts
        assert total_cut_events <= 20

    def test_memory_bound(self):
        rng = np.random.default_rng(6)
        adwin = Adwin(delta=0.5)  # aggressive cutting stresses the structure
        for i in range(20_000):
            adwin.update(float(rng.random()))
            n = adwin.width
            if n >= 32:
                assert adwin.bucket_count <= 6 * math.ceil(math.log2(n))

    def test_window_keeps_recent_side_after_cut(self):
        rng = np.random.default_rng(8)
        adwin = Adwin(delta=0.002)
        for i in range(3000):
            adwin.update(float(rng.random() < 0.1))
        for i in range(600):
            adwin.update(float(rng.random() < 0.9))
        # After the change the retained window mean should be near the new level.
        assert adwin.mean > 0.5


class TestDetectorContract:
    def test_replay_determinism(self):
        errors = bernoulli_step(seed=9, n_before=3000, n_after=2000, p_before=0.1, p_after=0.4)
        for factory in (DDM, EDDM, AdwinDetector):
            a = [factory().update(int(e)) for e in errors]
            b = [factory().update(int(e)) for e in errors]
            assert a == b

    def test_all_three_fire_on_step(self):
        # "Fires within 1000 post-step samples" counts any drift verdict in
        # that window; early false alarms (with their resets) do not disqualify.
        fired = {"DDM": 0, "EDDM": 0, "ADWIN": 0}
        seeds = range(3)
        for seed in seeds:
            errors = bernoulli_step(seed, 2000, 1000, 0.1, 0.5)
            for name in fired:
                detector = make_detector(name)
                verdicts = [detector.update(int(e)) for e in errors]
                if any(v is DetectorVerdict.DRIFT for v in verdicts[2000:3000]):
                    fired[name] += 1
        assert all(count == len(list(seeds)) for count in fired.values())

    def test_null_detector(self):
        detector = NullDetector()
        assert all(detector.update(1) is DetectorVerdict.IN_CONTROL for _ in range(100))

    def test_make_detector_unknown(self):
        with pytest.raises(ValueError, match="unknown detector"):
            make_detector("bogus")
