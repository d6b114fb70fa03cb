"""
Closed-loop acceptance checks on synthetic data with known answers.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy import stats as distributions

from django_postural_synergies.core.utils import Direction
from django_postural_synergies.exceptions import CableError
from django_postural_synergies.simulator.calibration import calibrate_threshold
from django_postural_synergies.simulator.rig import BodyModel, RigModel, cable_tensions, resultant
from django_postural_synergies.simulator.synthesis import ground_truth_synergies, synthesize_activation_matrix
from django_postural_synergies.simulator.utils import GRAVITY
from django_postural_synergies.stats import Mode, mann_whitney_u, u_statistic
from django_postural_synergies.synergy.factorization import nmf_factorize, vaf
from django_postural_synergies.synergy.matching import match_synergies
from django_postural_synergies.synergy.selection import select_n_syn

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def as_data(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def stiff_body(stiffness: float = 5000.0, damping_ratio: float = 5.0, support: float = 0.55) -> BodyModel:
    """Overdamped stiff pendulum whose dynamic and static tipping thresholds coincide within one step."""
    return BodyModel(
        com_height=1.0,
        stiffness=stiffness,
        damping=2.0 * damping_ratio * np.sqrt(stiffness),
        support_half_length_ap=support * (1.0 + GRAVITY / stiffness),
        support_half_length_ml=support * (1.0 + GRAVITY / stiffness),
    )


def random_rig(rng: np.random.Generator) -> RigModel:
    """Four pulleys, one per quadrant, at random radii and angles."""
    while True:
        angles = np.pi / 4 + np.arange(4) * np.pi / 2 + rng.uniform(-0.6, 0.6, 4)
        radii = rng.uniform(1.0, 3.0, 4)
        pulleys = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        try:
            return RigModel(pulley_positions=pulleys, max_cable_tension=1e6)
        except CableError:
            continue


def check_vaf() -> CheckResult:
    identity = np.eye(2)
    values = (vaf(identity, identity), vaf(identity, np.zeros((2, 2))), vaf(identity, np.diag([1.0, 0.0])))
    passed = np.allclose(values, (100.0, 0.0, 50.0), atol=1e-12)
    return CheckResult("vaf", bool(passed), "vaf(V, V), vaf(V, 0), hand case = {:.6g}, {:.6g}, {:.6g}".format(*values))


def random_factors(rng: np.random.Generator, rows: int = 14, n: int = 4, columns: int = 16, density: float = 0.5):
    """
    Sparse non-negative W0 (rows x n) and C0 (n x columns).

    Every synergy keeps one muscle and one condition of its own so the product has a unique factorization.
    """
    W0 = rng.uniform(0.0, 1.0, (rows, n)) * (rng.random((rows, n)) < density)
    C0 = rng.uniform(0.0, 1.0, (n, columns)) * (rng.random((n, columns)) < density)
    own_rows = rng.choice(rows, n, replace=False)
    own_columns = rng.choice(columns, n, replace=False)
    for index in range(n):
        W0[own_rows[index]] = 0.0
        W0[own_rows[index], index] = 1.0
        C0[:, own_columns[index]] = 0.0
        C0[index, own_columns[index]] = 1.0
    return W0, C0


def check_nmf_recovery(seeds: int = 20, restarts: int = 5) -> CheckResult:
    worst_vaf, worst_cosine = np.inf, np.inf
    for seed in range(seeds):
        W0, C0 = random_factors(np.random.default_rng(seed))
        synergy_set = nmf_factorize(W0 @ C0, 4, seed=seed, restarts=restarts, max_iter=5000, tol=1e-10)
        matching = match_synergies(W0, synergy_set)
        worst_vaf = min(worst_vaf, synergy_set.vaf_total)
        worst_cosine = min(worst_cosine, min(similarity for _, _, similarity in matching.pairs))
    passed = worst_vaf >= 99.0 and worst_cosine >= 0.95
    return CheckResult("nmf_recovery", passed, f"worst VAF {worst_vaf:.3f}%, worst cosine {worst_cosine:.4f}")


def check_model_order(seeds: int = 20, restarts: int = 3, noise: float = 0.05) -> CheckResult:
    details, passed = [], True
    for n in (4, 8):
        hits = 0
        for seed in range(seeds):
            truth = ground_truth_synergies(n, seed=seed)
            V = synthesize_activation_matrix(truth, noise=noise, seed=seed)
            hits += select_n_syn(V, seed=seed, restarts=restarts, max_iter=2000, tol=1e-8).n_syn == n
        passed = passed and hits >= int(np.ceil(0.8 * seeds))
        details.append(f"n={n}: {hits}/{seeds}")
    return CheckResult("model_order", passed, ", ".join(details))


def check_tensions(cases: int = 1000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_residual, lowest = 0.0, np.inf
    for _ in range(cases):
        rig = random_rig(rng)
        force = rng.uniform(-500.0, 500.0, 2)
        tensions = cable_tensions(rig, np.zeros(2), force)
        worst_residual = max(worst_residual, float(np.linalg.norm(resultant(rig, np.zeros(2), tensions) - force)))
        lowest = min(lowest, float(tensions.min()))
    passed = worst_residual <= 1e-6 and lowest >= 0.0
    return CheckResult("tensions", passed, f"worst residual {worst_residual:.3g} N, lowest tension {lowest:.3g} N")


def check_calibration(step: float = 0.01) -> CheckResult:
    rig = RigModel(body=stiff_body())
    threshold = rig.body.tipping_force() / rig.body.body_weight
    result = calibrate_threshold(rig, Direction.FORWARD, start=0.40, step=step)
    passed = not result.flagged and threshold - step - 1e-9 <= result.fraction <= threshold + 1e-9
    return CheckResult("calibration", passed, f"calibrated {result.fraction:.2f} BW, analytic {threshold:.4f} BW")


def check_mann_whitney(samples: int = 500, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    symmetric, worst = True, 0.0
    for _ in range(samples):
        a = rng.normal(size=rng.integers(1, 9))
        b = rng.normal(size=rng.integers(1, 9))
        symmetric = symmetric and np.isclose(u_statistic(a, b) + u_statistic(b, a), a.size * b.size)
    for _ in range(50):
        a, b = rng.normal(size=4), rng.normal(size=4)
        reference = distributions.mannwhitneyu(a, b, alternative="two-sided", method="exact").pvalue
        worst = max(worst, abs(mann_whitney_u(a, b, mode=Mode.EXACT).p_value - reference))
    passed = bool(symmetric) and worst <= 1e-12
    return CheckResult("mann_whitney", passed, f"U symmetry {'holds' if symmetric else 'fails'}, "
                                               f"largest exact p difference {worst:.3g}")


CHECKS = {
    "vaf": check_vaf,
    "nmf_recovery": check_nmf_recovery,
    "model_order": check_model_order,
    "tensions": check_tensions,
    "calibration": check_calibration,
    "mann_whitney": check_mann_whitney,
}


def run_selftest(names=None, seeds: int = 20) -> List[CheckResult]:
    results = []
    for name in names or CHECKS:
        check: Callable = CHECKS[name]
        if name in ("nmf_recovery", "model_order"):
            result = check(seeds=seeds)
        else:
            result = check()
        logger.info("%s: %s (%s)", name, "passed" if result.passed else "FAILED", result.detail)
        results.append(result)
    return results
