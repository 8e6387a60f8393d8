"""Multi-start, fidelity-penalised maximisation of the success probability.

Each cycle draws a random start, then runs BFGS on the penalised merit for a
sequence of penalty stages, multiplying the penalty weight by the growth
factor until the stage optimum satisfies 1 - f <= fidelity_tol.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .experiment import ExperimentSpec
from .interferometer import (
    contraction_from_params,
    exp_map,
    log_map,
    matrix_from_params,
    params_from_matrix,
    random_contraction,
    random_haar,
    singular_value_ratio,
)
from .objectives import Merit, evaluate

log = logging.getLogger(__name__)

THREADS_ENV = "CLUSTERFORGE_THREADS"
DEGENERATE_SUCCESS = 1e-12
PLATEAU_TOL = 1e-3


@dataclass
class RunRecord:
    experiment: str
    cycle: int
    seed: int
    mode: str
    params: list[float]
    s: float
    f: float
    gamma: float
    sv_ratio: float
    scale: float
    penalty: float
    stages: int
    iterations: int
    grad_norm: float
    status: str
    converged: bool
    attempts: int = 1
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self) -> str:
        """One JSONL line; wall time is left out so reruns are byte-identical."""
        data = asdict(self)
        del data["wall_time"]
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))

    def matrix(self, modes: int) -> np.ndarray:
        return matrix_from_params(np.asarray(self.params), modes, self.mode)


def finite_diff_gradient(objective: Callable[[np.ndarray], float], p, h: float = 1e-5) -> np.ndarray:
    """Central differences (obj(p + h e_k) - obj(p - h e_k)) / 2h for every k."""
    if h <= 0:
        raise ValueError("step h must be positive")
    p = np.asarray(p, dtype=float)
    grad = np.empty_like(p)
    for k in range(p.size):
        step = np.zeros_like(p)
        step[k] = h
        grad[k] = (objective(p + step) - objective(p - step)) / (2 * h)
    return grad


def child_seed(master: int, cycle: int, attempt: int = 0) -> int:
    """Per-cycle seed, independent of execution order."""
    ss = np.random.SeedSequence([int(master), int(cycle), int(attempt)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def start_params(spec: ExperimentSpec, seed: int) -> np.ndarray:
    if spec.mode == "unitary":
        return log_map(random_haar(spec.modes, seed))
    return params_from_matrix(random_contraction(spec.modes, seed))


def _status(res) -> str:
    if res.status == 0:
        return "gradient"
    if res.status == 1:
        return "iteration_cap"
    return "line_search"


def local_optimize(
    spec: ExperimentSpec,
    start,
    seed: int = 0,
    *,
    cycle: int = 0,
    on_step: Callable[[int, float], None] | None = None,
) -> RunRecord:
    """Optimise one start point through the penalty schedule.

    ``on_step(stage, merit)`` is called after every accepted BFGS step.
    """
    t0 = time.perf_counter()
    start = np.asarray(start, dtype=float)
    if start.shape != (spec.param_length,):
        raise ValueError(f"{spec.name}: start has shape {start.shape}, expected ({spec.param_length},)")
    n = spec.modes
    unitary = spec.mode == "unitary"
    base = exp_map(start, n) if unitary else None
    x = None if unitary else start.copy()
    penalty = spec.penalty_initial
    iterations = 0
    status = "gradient"
    grad_norm = math.inf
    stage = 0
    rep = None
    for stage in range(1, spec.penalty_stages + 1):
        merit = Merit(spec, penalty, base)
        q0 = np.zeros(spec.param_length) if unitary else x

        def neg(q, merit=merit):
            j, g = merit.value_and_grad(q)
            return -j, -g

        callback = None
        if on_step is not None:
            def callback(q, merit=merit, stage=stage):
                on_step(stage, merit.value(q))

        res = minimize(
            neg,
            q0,
            jac=True,
            method="BFGS",
            callback=callback,
            options={"gtol": spec.grad_tol, "maxiter": spec.max_iter},
        )
        iterations += int(res.nit)
        status = _status(res)
        grad_norm = float(np.max(np.abs(res.jac)))
        if unitary:
            base = base @ exp_map(res.x, n)
            rep = merit.report(np.zeros(spec.param_length))
        else:
            x = res.x
            rep = merit.report(x)
        if rep.degenerate or 1.0 - rep.fidelity <= spec.fidelity_tol:
            break
        penalty *= spec.penalty_growth

    if unitary:
        params = log_map(base)
        u, scale = exp_map(params, n), 1.0
    else:
        params = x
        u, scale = contraction_from_params(x, n)
    final = evaluate(params, spec)
    converged = (not final.degenerate) and 1.0 - final.fidelity <= spec.fidelity_tol
    return RunRecord(
        experiment=spec.name,
        cycle=cycle,
        seed=int(seed),
        mode=spec.mode,
        params=[float(v) for v in params],
        s=final.success,
        f=final.fidelity,
        gamma=final.distance,
        sv_ratio=singular_value_ratio(u),
        scale=float(scale),
        penalty=float(penalty),
        stages=stage,
        iterations=iterations,
        grad_norm=grad_norm,
        status=status,
        converged=bool(converged),
        wall_time=time.perf_counter() - t0,
    )


def run_cycle(spec: ExperimentSpec, cycle: int) -> RunRecord:
    """One multi-start cycle, resampling starts that collapse to s ~ 0."""
    rec = None
    for attempt in range(spec.resamples + 1):
        seed = child_seed(spec.seed, cycle, attempt)
        rec = local_optimize(spec, start_params(spec, seed), seed, cycle=cycle)
        rec.attempts = attempt + 1
        if rec.s > DEGENERATE_SUCCESS:
            break
        log.info("%s cycle %d attempt %d degenerate, resampling", spec.name, cycle, attempt)
    return rec


def sort_records(records: Iterable[RunRecord]) -> list[RunRecord]:
    """Converged runs ascending by (s, cycle), then non-converged runs likewise."""
    return sorted(records, key=lambda r: (not r.converged, r.s, r.cycle))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        cap = int(raw) if raw else 1
    except ValueError:
        log.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        cap = 1
    return max(1, min(cap, os.cpu_count() or 1))


def read_jsonl(path: Path) -> list[RunRecord]:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(RunRecord.from_json(line))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: not a run record ({exc})") from None
    return records


def _resume_state(path: Path) -> list[RunRecord]:
    """Records already on disk; a torn trailing line is cut off."""
    if not path.exists():
        return []
    raw = path.read_bytes()
    if raw and not raw.endswith(b"\n"):
        raw = raw[: raw.rfind(b"\n") + 1]
        path.write_bytes(raw)
    return read_jsonl(path)


def multi_start(
    spec: ExperimentSpec,
    out: Path | str | None = None,
    workers: int | None = None,
    progress: Callable[[RunRecord], None] | None = None,
) -> list[RunRecord]:
    """Run ``spec.cycles`` cycles and return the sorted records.

    With ``out`` set, records are appended to that JSONL file in cycle order
    as they finish; cycles already present in the file are not rerun.
    """
    done: dict[int, RunRecord] = {}
    sink = None
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        for rec in _resume_state(out):
            if rec.experiment != spec.name:
                raise ValueError(f"{out} holds records for {rec.experiment!r}, not {spec.name!r}")
            done[rec.cycle] = rec
        sink = open(out, "a")
    todo = [c for c in range(spec.cycles) if c not in done]
    workers = worker_count() if workers is None else max(1, workers)
    try:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(run_cycle, [spec] * len(todo), todo)
                for rec in results:
                    _accept(rec, done, sink, progress)
        else:
            for cycle in todo:
                _accept(run_cycle(spec, cycle), done, sink, progress)
    finally:
        if sink is not None:
            sink.close()
    return sort_records(done[c] for c in range(spec.cycles) if c in done)


def _accept(rec, done, sink, progress):
    done[rec.cycle] = rec
    if sink is not None:
        sink.write(rec.to_json() + "\n")
        sink.flush()
    if progress is not None:
        progress(rec)


@dataclass
class AuditSummary:
    threshold: float
    min_ratio: float
    checked: list[tuple[int, float, float]]
    flagged: list[tuple[int, float, float]]

    @property
    def ok(self) -> bool:
        return not self.flagged


def unitarity_audit(
    records: Sequence[RunRecord], threshold: float = 0.16, min_ratio: float = 0.99
) -> AuditSummary:
    """Singular-value ratios of every record whose success exceeds ``threshold``."""
    checked, flagged = [], []
    for rec in records:
        if rec.s <= threshold:
            continue
        entry = (rec.cycle, rec.s, rec.sv_ratio)
        checked.append(entry)
        if rec.sv_ratio < min_ratio:
            flagged.append(entry)
    return AuditSummary(threshold, min_ratio, checked, flagged)


def plateaus(values: Sequence[float], tol: float = PLATEAU_TOL) -> list[tuple[float, int]]:
    """Cluster sorted values into runs whose neighbours differ by at most ``tol``.

    Returns (mean, size) per plateau in ascending order.
    """
    out: list[list[float]] = []
    for v in sorted(values):
        if out and v - out[-1][-1] <= tol:
            out[-1].append(v)
        else:
            out.append([v])
    return [(float(np.mean(g)), len(g)) for g in out]
