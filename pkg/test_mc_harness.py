import math

import pytest
from scipy.stats import binom

from app.core.exceptions import InputError, InvariantViolation
from app.models.experiment import EstimateResult, ExperimentConfig, ExperimentId, ParityReport, UniformityReport
from app.models.graph import EdgeSlot
from app.models.properties import AttackOutcome, AttackReason
from app.services import graphcore, lowerbound_kit, mc_harness

EDGE_12 = EdgeSlot.of(1, 2)


def config(experiment: ExperimentId, **kwargs) -> ExperimentConfig:
    kwargs.setdefault("n", 200)
    kwargs.setdefault("trials", 40)
    return ExperimentConfig(experiment=experiment, **kwargs)


def strip_timing(doc: dict) -> dict:
    return {key: value for key, value in doc.items() if key != "elapsed_s"}


def test_wilson_ci_examples():
    low, high = mc_harness.wilson_ci(0, 100, 1.96)
    assert low == 0.0 and high == pytest.approx(0.0370, abs=1e-3)
    low, high = mc_harness.wilson_ci(100, 100, 1.96)
    assert high == 1.0 and low == pytest.approx(0.9630, abs=1e-3)
    low, high = mc_harness.wilson_ci(50, 100, 1.96)
    assert low == pytest.approx(0.404, abs=1e-3) and high == pytest.approx(0.596, abs=1e-3)


@pytest.mark.parametrize("successes,trials", [(-1, 10), (11, 10), (0, 0)])
def test_wilson_ci_rejects_bad_counts(successes, trials):
    with pytest.raises(InputError):
        mc_harness.wilson_ci(successes, trials)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(experiment=ExperimentId.mod_uniformity, n=100, trials=10)
    with pytest.raises(ValueError):
        ExperimentConfig(experiment=ExperimentId.degree_range, n=200, trials=10, part="6")
    with pytest.raises(ValueError):
        ExperimentConfig(experiment=ExperimentId.prob_qk, n=200, trials=10, k=13, schedule="k.txt")
    with pytest.raises(ValueError):
        ExperimentConfig(experiment=ExperimentId.prob_qk, n=200, trials=0)


def test_always_true_property():
    result = mc_harness.estimate_property(config(ExperimentId.prob_qk, n=10, trials=50), decide=lambda g: True)
    assert result.successes == 50 and result.frequency == 1.0
    assert result.ci_high == 1.0 and result.ci_low < 1.0


def test_single_edge_property_has_frequency_one_half():
    result = mc_harness.estimate_property(
        config(ExperimentId.prob_qk, n=20, trials=2000, seed=7), decide=lambda g: g.has_edge(1, 2)
    )
    assert abs(result.frequency - 0.5) < 0.05
    assert result.ci_low <= result.frequency <= result.ci_high


def test_stub_attack_always_succeeds():
    def attack(g):
        if g.has_edge(1, 2):
            return g, AttackOutcome(success=True, reason=AttackReason.already_in_property)
        return graphcore.flip(g, EDGE_12), AttackOutcome(
            success=True, flipped=EDGE_12, reason=AttackReason.code_flip_applied
        )

    result = mc_harness.estimate_attack_success(
        config(ExperimentId.attack_qk, n=12, trials=100), attack=attack, decide=lambda g: g.has_edge(1, 2)
    )
    assert result.successes == 100


def test_attack_claiming_false_success_aborts():
    def attack(g):
        return g, AttackOutcome(success=True, reason=AttackReason.already_in_property)

    with pytest.raises(InvariantViolation):
        mc_harness.estimate_attack_success(
            config(ExperimentId.attack_qk, n=12, trials=50), attack=attack, decide=lambda g: False
        )


def test_attack_flipping_two_slots_aborts():
    def attack(g):
        h = graphcore.flip(graphcore.flip(g, EDGE_12), EdgeSlot.of(3, 4))
        return h, AttackOutcome(success=False, reason=AttackReason.no_flip_found)

    with pytest.raises(InvariantViolation):
        mc_harness.estimate_attack_success(
            config(ExperimentId.attack_qk, n=12, trials=5), attack=attack, decide=lambda g: True
        )


def test_custom_attack_needs_its_decision():
    with pytest.raises(InputError):
        mc_harness.estimate_attack_success(
            config(ExperimentId.attack_qk, n=12, trials=5),
            attack=lambda g: (g, AttackOutcome(success=False, reason=AttackReason.no_flip_found)),
        )


def test_results_do_not_depend_on_jobs():
    cfg = config(ExperimentId.prob_a, n=200, trials=24, seed=3)
    one = mc_harness.estimate_property(cfg, jobs=1)
    two = mc_harness.estimate_property(cfg, jobs=2)
    assert strip_timing(one.model_dump()) == strip_timing(two.model_dump())


def test_prob_a_notes_report_baselines():
    result = mc_harness.estimate_property(config(ExperimentId.prob_a, n=500, trials=10))
    notes = result.notes
    assert notes["baseline_code_density"] == pytest.approx(2.0 ** -7)
    assert notes["baseline_asymptotic"] == pytest.approx(2 / (500 * math.log(500)))


def test_echo_fills_in_code_lengths():
    result = mc_harness.estimate_property(config(ExperimentId.prob_a, n=500, trials=4))
    assert (result.config["down_len"], result.config["up_len"]) == (12, 12)
    keys = list(result.model_dump().keys())
    assert keys[:11] == [
        "experiment", "n", "k", "m", "trials", "seed", "successes", "frequency", "ci_low", "ci_high", "elapsed_s",
    ]
    attack = mc_harness.estimate_attack_success(config(ExperimentId.attack_a, n=500, trials=4))
    assert attack.config["down_len"] == attack.config["up_len"] == 12


def test_echo_fills_in_derived_k(tmp_path):
    schedule = tmp_path / "k.txt"
    schedule.write_text("200 13\n")
    cfg = config(ExperimentId.resolution_rate, n=300, trials=4, schedule=str(schedule))
    result = mc_harness.estimate_property(cfg)
    assert result.k == 13
    assert result.config["k"] == 13
    assert cfg.k is None


def test_resolution_rate_with_fixed_k():
    result = mc_harness.estimate_property(config(ExperimentId.resolution_rate, n=300, trials=10, k=13))
    assert result.k == 13
    assert result.successes + round(result.notes["p_not_b"] * 10) == 10


def test_attack_a_reports_reasons():
    result = mc_harness.estimate_attack_success(config(ExperimentId.attack_a, n=300, trials=10))
    assert sum(result.notes["reasons"].values()) == 10
    assert result.notes["strict"] is False
    assert 0 < result.notes["strict_expected_success"] < 1


def test_degree_range_runs_p_conditions():
    result = mc_harness.run_experiment(config(ExperimentId.degree_range, n=1000, trials=10, part="P2"))
    assert isinstance(result, EstimateResult)
    assert result.notes == {"part": "P2"}
    assert result.successes >= 9


def test_mod_uniformity():
    report = mc_harness.mod_uniformity_test(n=101, m=5, trials=3000, seed=11)
    assert isinstance(report, UniformityReport)
    assert sum(report.marginal_counts) == 3000
    assert report.marginal_tv < 0.05
    assert report.pair_tv < 0.08


@pytest.mark.parametrize("m", [2, 4, 1])
def test_mod_uniformity_needs_odd_modulus(m):
    with pytest.raises(InputError):
        mc_harness.mod_uniformity_test(n=101, m=m, trials=10)


def test_parity_uniformity():
    report = mc_harness.parity_uniformity_test(n=300, trials=400, seed=2)
    assert isinstance(report, ParityReport)
    assert report.max_bit_deviation < 0.12
    assert sum(report.z_mod4) == pytest.approx(1.0)
    assert report.good_z_frequency == pytest.approx(report.z_mod4[0] + report.z_mod4[1])


def test_parity_uniformity_needs_trials():
    with pytest.raises(InputError):
        mc_harness.parity_uniformity_test(n=300, trials=0)


def test_run_experiment_dispatch():
    cfg = config(ExperimentId.mod_uniformity, n=51, m=3, trials=20)
    assert isinstance(mc_harness.run_experiment(cfg, jobs=1), UniformityReport)
    cfg = config(ExperimentId.parity_uniformity, n=200, trials=5)
    assert isinstance(mc_harness.run_experiment(cfg, jobs=1), ParityReport)


@pytest.mark.slow
def test_prob_a_matches_code_density():
    result = mc_harness.estimate_property(config(ExperimentId.prob_a, n=500, trials=100_000), jobs=4)
    baseline = result.notes["baseline_code_density"]
    assert baseline / 3 <= result.frequency <= 3 * baseline


@pytest.mark.slow
def test_attack_a_success_rate():
    result = mc_harness.estimate_attack_success(config(ExperimentId.attack_a, n=500, trials=2000), jobs=4)
    assert result.frequency >= 0.90
    assert result.config["down_len"] == result.config["up_len"] == 12


@pytest.mark.slow
def test_parity_bits_are_balanced_at_scale():
    report = mc_harness.parity_uniformity_test(n=500, trials=100_000, jobs=4)
    assert all(0.47 <= mean <= 0.53 for mean in report.ydown_means + report.yup_means)
    assert abs(report.good_z_frequency - 0.50) <= 0.01


@pytest.mark.slow
@pytest.mark.parametrize("m", [3, 13])
def test_degree_residues_are_uniform_at_scale(m):
    report = mc_harness.mod_uniformity_test(n=200, m=m, trials=50_000, jobs=4)
    assert report.marginal_tv <= 0.02
    assert report.pair_tv <= 0.05


@pytest.mark.slow
def test_attack_qk_at_scale():
    result = mc_harness.estimate_attack_success(config(ExperimentId.attack_qk, n=5000, trials=200, k=13), jobs=4)
    assert 0.70 <= result.frequency <= 0.95
    assert result.notes["expected_success"] == pytest.approx((11 / 12) ** 2)


@pytest.mark.slow
def test_qk_rarity_certificate_at_scale():
    result = mc_harness.estimate_property(config(ExperimentId.prob_qk, n=5000, trials=200, k=13), jobs=4)
    notes = result.notes
    assert 1 - notes["p_not_b"] >= 0.9
    assert notes["certificate"] < 0.1 + 2e-7
    assert notes["certificate"] == pytest.approx(notes["p_not_b"] + 2.0 ** -notes["min_order"])


@pytest.mark.slow
def test_degree_range_part1_matches_binomial_tail():
    n = 2000
    t = lowerbound_kit.thresholds(n)
    half = n / 2
    inside = binom.cdf(math.ceil(half + t.a) - 1, n - 1, 0.5) - binom.cdf(math.floor(half - t.a), n - 1, 0.5)
    result = mc_harness.estimate_property(config(ExperimentId.degree_range, n=n, trials=500, part="1"), jobs=4)
    assert abs(result.frequency - inside ** n) <= 0.06


@pytest.mark.slow
def test_degree_range_part5_at_scale():
    result = mc_harness.estimate_property(config(ExperimentId.degree_range, n=1000, trials=200, part="5"), jobs=4)
    assert result.frequency >= 0.95
