import math

import numpy as np
import pytest

from qinterro.bench import BenchConfig, OneArmAbsorber, detection_prob, i_prob
from qinterro.exceptions import DomainError
from qinterro.sources import (
    CoherentSource,
    CountRecord,
    FringeScan,
    HeraldedSource,
    derived_rng,
    sample_counts,
    simulate_fringe_scan,
    simulate_interrogation_prob,
)


def test_source_validation():
    with pytest.raises(DomainError):
        HeraldedSource(pairs_per_window=-1)
    with pytest.raises(DomainError):
        HeraldedSource(pairs_per_window=2.5)
    with pytest.raises(DomainError):
        CoherentSource(nbar=-1.0)
    with pytest.raises(DomainError):
        HeraldedSource(10, epsilon=1.5)
    with pytest.raises(DomainError):
        CoherentSource(10.0, background_rate=-0.1)


def test_sample_counts_degenerate_probabilities():
    src = HeraldedSource(pairs_per_window=10_000)
    assert sample_counts(src, 1.0, seed=1).counts == 10_000
    assert sample_counts(src, 0.0, seed=1).counts == 0
    with pytest.raises(DomainError):
        sample_counts(src, 1.5, seed=1)


def test_sample_counts_poisson_mean():
    # brute-force frequency check of the Poisson detection model
    src = CoherentSource(nbar=10_000.0)
    rng = derived_rng(2024)
    draws = [sample_counts(src, 0.25, rng).counts for _ in range(1000)]
    mean = float(np.mean(draws))
    assert abs(mean - 2500.0) <= 150.0
    assert np.std(draws) == pytest.approx(50.0, rel=0.2)


def test_sample_counts_heralded_never_exceeds_pairs():
    src = HeraldedSource(pairs_per_window=40)
    rng = derived_rng(7)
    assert all(sample_counts(src, 0.9, rng).counts <= 40 for _ in range(500))


def test_sample_counts_background_adds():
    src = HeraldedSource(pairs_per_window=0, background_rate=5.0)
    rng = derived_rng(3)
    draws = [sample_counts(src, 0.5, rng).counts for _ in range(2000)]
    assert float(np.mean(draws)) == pytest.approx(5.0, rel=0.1)


def test_count_record_validation():
    with pytest.raises(DomainError):
        CountRecord(phase_setting=0.0, counts=-1)


def test_determinism_bit_identical():
    src = HeraldedSource(pairs_per_window=200)
    cfg = BenchConfig(epsilon=0.9)
    grid = np.linspace(0, 2 * math.pi, 17)
    a = simulate_fringe_scan(src, cfg, OneArmAbsorber(0.5), grid, 10, seed=99)
    b = simulate_fringe_scan(src, cfg, OneArmAbsorber(0.5), grid, 10, seed=99)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.phases, b.phases)
    assert np.array_equal(a.expected_probs, b.expected_probs)
    c = simulate_fringe_scan(src, cfg, OneArmAbsorber(0.5), grid, 10, seed=100)
    assert not np.array_equal(a.counts, c.counts)

    r1 = sample_counts(src, 0.37, seed=5)
    r2 = sample_counts(src, 0.37, seed=5)
    assert r1 == r2


def test_scan_uses_total_phase_and_expected_probs():
    src = HeraldedSource(pairs_per_window=100)
    cfg = BenchConfig(epsilon=1.0, phi1=0.4)
    grid = np.linspace(0, 2 * math.pi, 9)
    scan = simulate_fringe_scan(src, cfg, phase_grid=grid, windows_per_point=3, seed=1)
    expected = [detection_prob(cfg.with_total_phase(p)) for p in grid]
    assert np.allclose(scan.expected_probs, expected, atol=1e-12)
    assert scan.windows_per_point == 3
    assert scan.mean_rate == 100.0
    assert len(scan) == 9
    assert scan.points[0][0] == 0.0


def test_scan_law_of_large_numbers():
    """Empirical rate converges to detection_prob within 3 relative sigmas.

    Checked over 300 derived seeds; at the Poisson/Binomial scale used the
    3-sigma window must cover at least 99 percent of repetitions.
    """
    src = HeraldedSource(pairs_per_window=200)
    cfg = BenchConfig(epsilon=0.8)
    grid = np.array([0.0, math.pi / 3, math.pi / 2, math.pi])
    reps = 300
    checks = 0
    hits = 0
    for rep in range(reps):
        scan = simulate_fringe_scan(
            src, cfg, phase_grid=grid, windows_per_point=50, seed=(4242, rep)
        )
        offered = src.mean_rate * scan.windows_per_point
        for k in range(len(scan)):
            expected_total = offered * scan.expected_probs[k]
            rel_err = abs(scan.counts[k] / offered - scan.expected_probs[k])
            checks += 1
            hits += rel_err <= 3.0 * math.sqrt(expected_total) / offered
    assert hits >= 0.99 * checks


def test_scan_validation():
    src = HeraldedSource(pairs_per_window=10)
    with pytest.raises(DomainError):
        simulate_fringe_scan(src, BenchConfig(), phase_grid=[], seed=0)
    with pytest.raises(DomainError):
        simulate_fringe_scan(src, BenchConfig(), phase_grid=[0.0, 1.0], windows_per_point=0, seed=0)
    with pytest.raises(DomainError):
        simulate_fringe_scan(src, BenchConfig(), phase_grid=[0.0, 1.0], seed=-1)


def test_fringe_scan_validation():
    with pytest.raises(DomainError):
        FringeScan(phases=np.array([0.0, 1.0]), counts=np.array([1.0]))
    with pytest.raises(DomainError):
        FringeScan(phases=np.array([0.0]), counts=np.array([-2.0]))


def test_interrogation_prob_monte_carlo_tracks_ideal():
    for src in (HeraldedSource(2000, epsilon=1.0), CoherentSource(2000.0, epsilon=1.0)):
        for mu in (0.0, 0.5, 1.0):
            est = simulate_interrogation_prob(src, mu, windows=200, seed=11)
            ideal = i_prob(mu, src.epsilon)
            # 400k offered photons per leg: statistical error well under 0.01
            assert abs(est - ideal) < 0.01


def test_interrogation_prob_deterministic():
    src = HeraldedSource(500)
    a = simulate_interrogation_prob(src, 0.3, windows=50, seed=8)
    b = simulate_interrogation_prob(src, 0.3, windows=50, seed=8)
    assert a == b
