"""
Seeded Monte Carlo over G(n, 1/2).

Trial i always uses the random stream (seed, i). Trials are split into
contiguous chunks and every chunk returns a vector of counters, so results
are sums and do not depend on how many workers ran them.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.stats import binomtest, chisquare, norm

from app.core.config import settings
from app.core.exceptions import InputError, InvariantViolation
from app.models.experiment import (
    EstimateResult,
    ExperimentConfig,
    ExperimentId,
    ExperimentReport,
    ParityReport,
    UniformityReport,
)
from app.models.graph import Graph, SeedSpec
from app.models.properties import ACodes, AttackOutcome, AttackReason
from app.services import canon_prop, degseq_prop, graphcore, lowerbound_kit

logger = logging.getLogger(__name__)

Decision = Callable[[Graph], bool]
Attack = Callable[[Graph], Tuple[Graph, AttackOutcome]]
TrialFn = Callable[[Graph], np.ndarray]

# code orders above this never occur for word lengths below 2^63
ORDER_BINS = 64
REASONS = list(AttackReason)


def wilson_ci(successes: int, trials: int, z: Optional[float] = None) -> Tuple[float, float]:
    z = settings.WILSON_Z if z is None else z
    if trials < 1 or not 0 <= successes <= trials:
        raise InputError(f"wilson_ci needs 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    confidence = 2 * norm.cdf(z) - 1
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    freq = successes / trials
    return min(max(ci.low, 0.0), freq), max(min(ci.high, 1.0), freq)


def _graph(cfg: ExperimentConfig, trial: int) -> Graph:
    return graphcore.random_graph(cfg.n, SeedSpec(seed=cfg.seed, stream=trial))


def _k_for(cfg: ExperimentConfig) -> int:
    if cfg.k is not None:
        return cfg.k
    schedule = canon_prop.load_schedule(cfg.schedule) if cfg.schedule else canon_prop.default_schedule()
    return canon_prop.choose_k(cfg.n, schedule)


def _codes_for(cfg: ExperimentConfig) -> ACodes:
    return degseq_prop.default_codes(degseq_prop.window(cfg.n), cfg.down_len, cfg.up_len)


# ---------------- Trial kernels ----------------

def _qk_kernel(cfg: ExperimentConfig, count_resolved: bool) -> TrialFn:
    k = _k_for(cfg)

    def trial(g: Graph) -> np.ndarray:
        d = canon_prop.decide_qk(g, k)
        row = np.zeros(2 + ORDER_BINS, dtype=np.int64)
        row[0] = d.resolved if count_resolved else d.in_qk
        row[1] = not d.resolved
        if d.resolved:
            row[2 + d.code_order] = 1
        return row

    return trial


def _a_kernel(cfg: ExperimentConfig) -> TrialFn:
    codes = _codes_for(cfg)
    win = degseq_prop.window(cfg.n)
    return lambda g: np.array([degseq_prop.decide_a(degseq_prop.profile(g, win), codes)], dtype=np.int64)


def _attack_kernel(attack: Attack, decide: Decision) -> TrialFn:
    def trial(g: Graph) -> np.ndarray:
        out, outcome = attack(g)
        changed = graphcore.diff_slots(g, out)
        if len(changed) > 1:
            logger.error(f"Adversary changed {len(changed)} slots")
            raise InvariantViolation(f"Adversary output differs from its input in {len(changed)} slots")
        if outcome.success and not decide(out):
            logger.error(f"Adversary claimed success ({outcome.reason.value}) but the decision fails")
            raise InvariantViolation("Adversary reported success on a graph outside the property")
        row = np.zeros(1 + len(REASONS), dtype=np.int64)
        row[0] = outcome.success
        row[1 + REASONS.index(outcome.reason)] = 1
        return row

    return trial


def _default_attack(cfg: ExperimentConfig) -> Tuple[Attack, Decision]:
    if cfg.experiment == ExperimentId.attack_qk:
        k = _k_for(cfg)
        return (
            lambda g: canon_prop.adversary_qk(g, k, exhaustive=cfg.exhaustive),
            lambda g: canon_prop.decide_qk(g, k).in_qk,
        )
    codes = _codes_for(cfg)
    return (
        lambda g: degseq_prop.adversary_a(g, codes, strict=cfg.strict_attack),
        lambda g: degseq_prop.decide_a(degseq_prop.profile(g), codes),
    )


def _degree_range_kernel(cfg: ExperimentConfig) -> TrialFn:
    t = lowerbound_kit.thresholds(cfg.n)
    if cfg.part.startswith("P"):
        def trial(g: Graph) -> np.ndarray:
            report = lowerbound_kit.check_P_conditions(lowerbound_kit.seq_stats(g.degrees()), t)
            return np.array([getattr(report, cfg.part.lower())], dtype=np.int64)
    else:
        def trial(g: Graph) -> np.ndarray:
            return np.array([lowerbound_kit.check_degree_range(g, t).part(int(cfg.part))], dtype=np.int64)
    return trial


def _mod_kernel(cfg: ExperimentConfig) -> TrialFn:
    m = cfg.m

    def trial(g: Graph) -> np.ndarray:
        row = np.zeros(m + m * m, dtype=np.int64)
        r1, r2 = g.degree(1) % m, g.degree(2) % m
        row[r1] = 1
        row[m + r1 * m + r2] = 1
        return row

    return trial


def _parity_kernel(cfg: ExperimentConfig) -> TrialFn:
    win = degseq_prop.window(cfg.n)
    codes = _codes_for(cfg)

    def trial(g: Graph) -> np.ndarray:
        p = degseq_prop.profile(g, win)
        z_bins = np.zeros(4, dtype=np.int64)
        z_bins[p.z % 4] = 1
        in_a = np.array([degseq_prop.decide_a(p, codes)], dtype=np.int64)
        return np.concatenate([p.ydown.bits.astype(np.int64), p.yup.bits.astype(np.int64), z_bins, in_a])

    return trial


def _kernel(cfg: ExperimentConfig, decide: Optional[Decision], attack: Optional[Attack]) -> TrialFn:
    if attack is not None:
        if decide is None:
            raise InputError("A custom adversary needs the decision it targets")
        return _attack_kernel(attack, decide)
    if decide is not None:
        return lambda g: np.array([decide(g)], dtype=np.int64)
    builders: Dict[ExperimentId, Callable[[], TrialFn]] = {
        ExperimentId.prob_qk: lambda: _qk_kernel(cfg, count_resolved=False),
        ExperimentId.resolution_rate: lambda: _qk_kernel(cfg, count_resolved=True),
        ExperimentId.prob_a: lambda: _a_kernel(cfg),
        ExperimentId.attack_qk: lambda: _attack_kernel(*_default_attack(cfg)),
        ExperimentId.attack_a: lambda: _attack_kernel(*_default_attack(cfg)),
        ExperimentId.degree_range: lambda: _degree_range_kernel(cfg),
        ExperimentId.mod_uniformity: lambda: _mod_kernel(cfg),
        ExperimentId.parity_uniformity: lambda: _parity_kernel(cfg),
    }
    return builders[cfg.experiment]()


# ---------------- Chunked execution ----------------

def _run_chunk(
    cfg: ExperimentConfig,
    start: int,
    stop: int,
    decide: Optional[Decision] = None,
    attack: Optional[Attack] = None,
) -> np.ndarray:
    trial = _kernel(cfg, decide, attack)
    total = None
    for i in range(start, stop):
        row = trial(_graph(cfg, i))
        total = row if total is None else total + row
    logger.debug(f"{cfg.experiment.value}: trials {start}..{stop - 1} done")
    return total


def _chunks(trials: int, jobs: int):
    size = math.ceil(trials / jobs)
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def _run_trials(
    cfg: ExperimentConfig,
    jobs: int = 1,
    decide: Optional[Decision] = None,
    attack: Optional[Attack] = None,
) -> np.ndarray:
    jobs = max(1, min(jobs, cfg.trials))
    if jobs == 1 or decide is not None or attack is not None:
        return _run_chunk(cfg, 0, cfg.trials, decide, attack)
    bounds = _chunks(cfg.trials, jobs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_chunk, cfg, lo, hi) for lo, hi in bounds]
        parts = [f.result() for f in futures]
    return np.sum(parts, axis=0)


def _echo(cfg: ExperimentConfig, k: Optional[int] = None, codes: Optional[ACodes] = None) -> dict:
    doc = cfg.model_dump(mode="json")
    if k is not None:
        doc["k"] = k
    if codes is not None:
        doc["down_len"], doc["up_len"] = codes.down.length, codes.up.length
    return doc


def _estimate(
    cfg: ExperimentConfig,
    counts: np.ndarray,
    started: float,
    k: Optional[int] = None,
    notes: Optional[dict] = None,
    codes: Optional[ACodes] = None,
) -> EstimateResult:
    successes = int(counts[0])
    low, high = wilson_ci(successes, cfg.trials, cfg.z)
    return EstimateResult(
        experiment=cfg.experiment,
        n=cfg.n,
        k=k,
        m=cfg.m,
        trials=cfg.trials,
        seed=cfg.seed,
        successes=successes,
        frequency=successes / cfg.trials,
        ci_low=low,
        ci_high=high,
        z=cfg.z,
        elapsed_s=round(time.perf_counter() - started, 3),
        notes=notes or {},
        config=_echo(cfg, k, codes),
    )


def _qk_notes(cfg: ExperimentConfig, counts: np.ndarray) -> dict:
    """Rarity certificate: P[Q_k] <= P[not B] + 2^-r over the code orders seen."""
    p_not_b = int(counts[1]) / cfg.trials
    seen = np.flatnonzero(counts[2:])
    notes = {"p_not_b": p_not_b, "order_histogram": {int(r): int(counts[2 + r]) for r in seen}}
    if seen.size:
        min_order = int(seen.min())
        notes["min_order"] = min_order
        notes["certificate"] = p_not_b + 2.0 ** -min_order
    return notes


def _attack_notes(cfg: ExperimentConfig, counts: np.ndarray, k: Optional[int]) -> dict:
    notes = {"reasons": {r.value: int(c) for r, c in zip(REASONS, counts[1:]) if c}}
    if cfg.experiment == ExperimentId.attack_qk and k is not None:
        notes["expected_success"] = (1 - 1 / (k - 1)) ** 2
    elif cfg.experiment == ExperimentId.attack_a:
        codes = _codes_for(cfg)
        notes["strict"] = cfg.strict_attack
        notes["strict_expected_success"] = (1 - 2.0 ** -codes.down.order) * (1 - 2.0 ** -codes.up.order)
    return notes


def estimate_property(
    cfg: ExperimentConfig, jobs: int = 1, decide: Optional[Decision] = None
) -> EstimateResult:
    """
    Frequency of a property over cfg.trials samples. `decide` replaces the
    property named by cfg.experiment and forces in-process execution.
    """
    started = time.perf_counter()
    logger.info(f"Estimating {cfg.experiment.value}: n={cfg.n}, trials={cfg.trials}, seed={cfg.seed}")
    counts = _run_trials(cfg, jobs, decide=decide)
    k, notes, codes = None, {}, None
    if decide is None and cfg.experiment in (ExperimentId.prob_qk, ExperimentId.resolution_rate):
        k = _k_for(cfg)
        notes = _qk_notes(cfg, counts)
    elif decide is None and cfg.experiment == ExperimentId.prob_a:
        codes = _codes_for(cfg)
        notes = {
            "baseline_asymptotic": 2 / (cfg.n * math.log(cfg.n)),
            "baseline_code_density": 2.0 ** -(codes.down.order + codes.up.order + 1),
        }
    elif decide is None and cfg.experiment == ExperimentId.degree_range:
        notes = {"part": cfg.part}
    result = _estimate(cfg, counts, started, k=k, notes=notes, codes=codes)
    logger.info(f"{cfg.experiment.value}: {result.successes}/{cfg.trials} (freq {result.frequency:.6f})")
    return result


def estimate_attack_success(
    cfg: ExperimentConfig,
    jobs: int = 1,
    attack: Optional[Attack] = None,
    decide: Optional[Decision] = None,
) -> EstimateResult:
    """
    Adversary success rate. Every trial checks that the output differs in at
    most one slot and that a claimed success really satisfies the decision;
    either failure aborts the run with InvariantViolation.
    """
    started = time.perf_counter()
    logger.info(f"Estimating {cfg.experiment.value}: n={cfg.n}, trials={cfg.trials}, seed={cfg.seed}")
    counts = _run_trials(cfg, jobs, decide=decide, attack=attack)
    k = _k_for(cfg) if cfg.experiment == ExperimentId.attack_qk and attack is None else None
    notes = _attack_notes(cfg, counts, k) if attack is None else {}
    codes = _codes_for(cfg) if cfg.experiment == ExperimentId.attack_a and attack is None else None
    result = _estimate(cfg, counts, started, k=k, notes=notes, codes=codes)
    logger.info(f"{cfg.experiment.value}: {result.successes}/{cfg.trials} successes")
    return result


def _total_variation(counts: np.ndarray) -> float:
    freq = counts / counts.sum()
    return 0.5 * float(np.abs(freq - 1.0 / counts.size).sum())


def mod_uniformity_test(n: int, m: int, trials: int, seed: int = 0, jobs: int = 1) -> UniformityReport:
    """deg(1) mod m and (deg(1), deg(2)) mod m against the uniform law; m must be odd."""
    if m < 3 or m % 2 == 0:
        raise InputError(f"mod_uniformity_test needs an odd modulus m >= 3, got {m}")
    if n < 2:
        raise InputError(f"mod_uniformity_test needs n >= 2, got {n}")
    cfg = ExperimentConfig(experiment=ExperimentId.mod_uniformity, n=n, m=m, trials=trials, seed=seed)
    started = time.perf_counter()
    counts = _run_trials(cfg, jobs)
    marginal, pair = counts[:m], counts[m:]
    marginal_chi2 = chisquare(marginal)
    pair_chi2 = chisquare(pair)
    report = UniformityReport(
        n=n,
        m=m,
        trials=trials,
        seed=seed,
        marginal_counts=[int(c) for c in marginal],
        marginal_tv=_total_variation(marginal),
        marginal_chi2=float(marginal_chi2.statistic),
        marginal_pvalue=float(marginal_chi2.pvalue),
        pair_tv=_total_variation(pair),
        pair_chi2=float(pair_chi2.statistic),
        pair_pvalue=float(pair_chi2.pvalue),
        elapsed_s=round(time.perf_counter() - started, 3),
        config=_echo(cfg),
    )
    logger.info(f"mod_uniformity m={m}: marginal TV {report.marginal_tv:.4f}, pair TV {report.pair_tv:.4f}")
    return report


def parity_uniformity_test(
    n: int,
    trials: int,
    seed: int = 0,
    codes: Optional[ACodes] = None,
    jobs: int = 1,
) -> ParityReport:
    if trials < 1:
        raise InputError(f"parity_uniformity_test needs trials >= 1, got {trials}")
    win = degseq_prop.window(n)
    cfg = ExperimentConfig(
        experiment=ExperimentId.parity_uniformity,
        n=n,
        trials=trials,
        seed=seed,
        down_len=codes.down.length if codes else None,
        up_len=codes.up.length if codes else None,
    )
    started = time.perf_counter()
    counts = _run_trials(cfg, jobs)
    down = counts[: win.delta1] / trials
    up = counts[win.delta1: win.delta1 + win.delta2] / trials
    z_bins = counts[win.delta1 + win.delta2: win.delta1 + win.delta2 + 4] / trials
    report = ParityReport(
        n=n,
        trials=trials,
        seed=seed,
        ydown_means=[float(x) for x in down],
        yup_means=[float(x) for x in up],
        max_bit_deviation=float(np.abs(np.concatenate([down, up]) - 0.5).max()),
        z_mod4=[float(x) for x in z_bins],
        good_z_frequency=float(z_bins[0] + z_bins[1]),
        a_frequency=float(counts[-1] / trials),
        elapsed_s=round(time.perf_counter() - started, 3),
        config=_echo(cfg, codes=codes or _codes_for(cfg)),
    )
    logger.info(f"parity_uniformity n={n}: max bit deviation {report.max_bit_deviation:.4f}")
    return report


def run_experiment(cfg: ExperimentConfig, jobs: Optional[int] = None) -> ExperimentReport:
    jobs = settings.JOBS if jobs is None else jobs
    if cfg.experiment == ExperimentId.mod_uniformity:
        return mod_uniformity_test(cfg.n, cfg.m, cfg.trials, cfg.seed, jobs)
    if cfg.experiment == ExperimentId.parity_uniformity:
        codes = _codes_for(cfg) if cfg.down_len is not None or cfg.up_len is not None else None
        return parity_uniformity_test(cfg.n, cfg.trials, cfg.seed, codes, jobs)
    if cfg.experiment in (ExperimentId.attack_qk, ExperimentId.attack_a):
        return estimate_attack_success(cfg, jobs)
    return estimate_property(cfg, jobs)
