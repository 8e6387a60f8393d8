"""Acceptance criteria for reproducing Table 1, one PASS/FAIL line each.

Campaigns use the bundled configuration (seed 2013, 50 cycles) and are run
once per session. The C8 criterion re-evaluates a stored record from a
prior long campaign unless ``--run-long`` is given.
"""

import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from clusterforge.config import CZ_FUSION, PUBLISHED_OPTIMUM, load_config
from clusterforge.fock import StateVector, enumerate_basis, inner_product
from clusterforge.interferometer import random_haar
from clusterforge.objectives import evaluate
from clusterforge.optimizer import multi_start, read_jsonl, unitarity_audit
from clusterforge.permanent import permanent_naive, permanent_ryser
from clusterforge.states import HADAMARD, bell_product, encode_dual_rail, linear_cluster, local_qubit_rotation
from clusterforge.transform import DualRailLayout, apply_full, project_coincidence, projected_output

from conftest import ACCEPTANCE_LINES

CONFIG = load_config()
FAST = ["c2-product", "c3-product", "c4-product", "c4-bell"]
EXTENDED = ["c5-product", "c6-product", "c6-bell"]
STORED_C8 = Path(__file__).parent / "data" / "c8-bell-best.jsonl"


def verdict(criterion: str, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


@pytest.fixture(scope="session")
def campaign_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("campaigns")


_runs: dict[str, list] = {}


def campaign(name, directory):
    """Records of the bundled campaign ``name``, with s and f recomputed from params."""
    if name not in _runs:
        spec = CONFIG.get(name)
        records = multi_start(spec, directory / f"{name}.jsonl")
        fresh = []
        for r in records:
            rep = evaluate(np.asarray(r.params), spec)
            ok = not rep.degenerate and 1 - rep.fidelity <= 1e-6
            fresh.append((rep.success, rep.fidelity, ok, r))
        _runs[name] = fresh
    return _runs[name]


def best_converged(rows):
    good = [row for row in rows if row[2]]
    return max(good, key=lambda row: row[0]) if good else None


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def test_criterion_1_kernel_oracle():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 8))
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        worst = max(worst, rel(permanent_ryser(m), permanent_naive(m)))
    elapsed = time.perf_counter() - t0
    verdict("1", worst <= 1e-10 and elapsed < 10, f"200 matrices, max rel err {worst:.1e}, {elapsed:.1f}s")


def random_state(rng, modes, photons):
    basis = enumerate_basis(modes, photons)
    v = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    return StateVector(dict(zip(basis, v / np.linalg.norm(v))), modes)


def max_diff(a, b):
    return max((abs(a[k] - b[k]) for k in set(a) | set(b)), default=0.0)


def test_criterion_2_homomorphism():
    rng = np.random.default_rng(2)
    worst_hom = worst_norm = 0.0
    for _ in range(20):
        u1, u2 = random_haar(3, rng.integers(1 << 31)), random_haar(3, rng.integers(1 << 31))
        psi = random_state(rng, 3, 2)
        once = apply_full(u1 @ u2, psi)
        worst_hom = max(worst_hom, max_diff(apply_full(u2, apply_full(u1, psi)), once))
        worst_norm = max(worst_norm, abs(inner_product(once, once).real - 1))
    verdict("2", worst_hom <= 1e-10 and worst_norm <= 1e-10,
            f"composition err {worst_hom:.1e}, norm err {worst_norm:.1e}")


def test_criterion_3_projection():
    rng = np.random.default_rng(3)
    layout = DualRailLayout.standard(2)
    worst = 0.0
    for _ in range(50):
        q = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi = encode_dual_rail(q / np.linalg.norm(q), layout)
        u = random_haar(4, rng.integers(1 << 31))
        worst = max(worst, max_diff(projected_output(u, psi, layout),
                                    project_coincidence(apply_full(u, psi), layout)))
    verdict("3", worst <= 1e-10, f"50 unitaries, max deviation {worst:.1e}")


def test_criterion_4_morph():
    overlap = abs(np.vdot(linear_cluster(2), local_qubit_rotation(bell_product(1), 1, HADAMARD)))
    verdict("4", overlap >= 1 - 1e-12, f"|<C2|H Phi+>| = {overlap:.15f}")


def check_tier(criterion, name, tol, directory):
    rows = campaign(name, directory)
    target = float(PUBLISHED_OPTIMUM[name])
    best = best_converged(rows)
    if best is None:
        verdict(criterion, False, f"{name}: no converged cycle out of {len(rows)}")
    s, f = best[0], best[1]
    passed = len(rows) >= 50 and abs(s - target) <= tol and 1 - f <= 1e-6
    verdict(criterion, passed,
            f"{name}: best s={s:.6f} vs {PUBLISHED_OPTIMUM[name]} (|diff| {abs(s - target):.1e}, "
            f"tol {tol:g}), 1-f={1 - f:.1e}, {len(rows)} cycles")


@pytest.mark.parametrize("name", FAST)
def test_criterion_5_fast_tier(name, campaign_dir):
    check_tier("5", name, 2e-3, campaign_dir)


@pytest.mark.parametrize("name", EXTENDED)
def test_criterion_6_extended_tier(name, campaign_dir):
    check_tier("6", name, 5e-3, campaign_dir)


def check_c8(rec):
    spec = CONFIG.get("c8-bell")
    rep = evaluate(np.asarray(rec.params), spec)
    verdict("7", rep.success >= 0.0155 and 1 - rep.fidelity <= 1e-5,
            f"c8-bell cycle {rec.cycle}: s={rep.success:.6f} (need >= 0.0155), 1-f={1 - rep.fidelity:.1e}")


def test_criterion_7_c8_stored():
    records = read_jsonl(STORED_C8)
    check_c8(max(records, key=lambda r: r.s))


@pytest.mark.long
def test_criterion_7_c8_live(campaign_dir):
    rows = campaign("c8-bell", campaign_dir)
    check_c8(max((row for row in rows if row[2]), key=lambda row: row[0])[3])


@pytest.mark.parametrize("name", FAST + EXTENDED)
def test_criterion_8_ceiling(name, campaign_dir):
    rows = campaign(name, campaign_dir)
    target = float(PUBLISHED_OPTIMUM[name])
    over = [(row[3].cycle, row[0]) for row in rows if row[2] and row[0] - target > 1e-3]
    top = max((row[0] for row in rows if row[2]), default=math.nan)
    detail = f"{name}: max converged s={top:.6f} vs {PUBLISHED_OPTIMUM[name]}"
    if over:
        detail += f", {len(over)} cycle(s) above by > 1e-3: " + ", ".join(
            f"#{c} s={s:.6f}" for c, s in over[:5])
    verdict("8", not over, detail)


def test_criterion_9_factor_two(campaign_dir):
    product = best_converged(campaign("c4-product", campaign_dir))[0]
    bell = best_converged(campaign("c4-bell", campaign_dir))[0]
    ratio = product / bell
    gain = PUBLISHED_OPTIMUM["c4-bell"] / CZ_FUSION["c4-bell"]
    verdict("9", 0.48 <= ratio <= 0.52 and gain == Fraction(9, 4),
            f"C4 product/Bell = {ratio:.4f}, (1/4)/(1/9) = {gain}")


def test_criterion_10_unitarity_audit(campaign_dir):
    spec = CONFIG.get("c4-bell-contraction")
    records = multi_start(spec, campaign_dir / f"{spec.name}.jsonl")
    audit = unitarity_audit(records, threshold=0.16, min_ratio=0.99)
    low = min((r for _, _, r in audit.checked), default=math.nan)
    verdict("10", audit.ok and bool(audit.checked),
            f"{len(audit.checked)} records with s > 0.16, min singular-value ratio {low:.4f}, "
            f"{len(audit.flagged)} flagged")


def test_criterion_11_determinism(campaign_dir):
    first = campaign_dir / "c4-bell.jsonl"
    campaign("c4-bell", campaign_dir)
    again = campaign_dir / "c4-bell-rerun.jsonl"
    multi_start(CONFIG.get("c4-bell"), again)
    same = first.read_bytes() == again.read_bytes()
    verdict("11", same, f"c4-bell rerun with seed {CONFIG.get('c4-bell').seed}: "
            f"{'byte-identical' if same else 'differs'} ({len(first.read_bytes())} bytes)")
