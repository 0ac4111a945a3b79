"""Seeded execution of every (method, grid point, repetition) in a spec."""
import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..baselines import ce_pmc, crude_mc, ss_is
from ..engine import SaisConfig, run_sais


@dataclass
class ResultRow:
    benchmark: str
    method: str
    N: int
    K: int
    d_x: int
    rho: float
    lam: float
    repetition: int
    seed: int
    p_f: float
    p_f_recycled: float
    iterations: int | None
    performance_calls: int | None
    wall_time_ms: float
    error: str = ""
    kind: str = ""

    @property
    def failed(self):
        return bool(self.error)


def derive_seed(master_seed, label, point, repetition):
    """63-bit seed from the master seed, method label, grid point and repetition.

    Keyed on identity rather than run order, so adding or removing a method
    leaves every other method's streams untouched.
    """
    key = f"{master_seed}|{label}|{point['N']}|{point['K']}|{point['d_x']}|{repetition}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big") >> 1


@dataclass
class _Task:
    benchmark: object
    method: object
    point: dict
    repetition: int
    seed: int


def _execute(task):
    m, o, point = task.method, task.method.options, task.point
    ls = task.benchmark.limit_state(point["d_x"])
    rng = np.random.default_rng(task.seed)
    nan = float("nan")
    rho = o.get("rho", nan)
    lam = o.get("lambda", nan)
    start = time.perf_counter()
    p_f, p_rec, iterations, calls, error = nan, nan, None, None, ""
    try:
        if m.method == "crude_mc":
            res = crude_mc(ls, point["K"], rng)
            p_f, iterations, calls = res.estimate, 1, res.samples
        elif m.method == "ss_is":
            res = ss_is(ls, point["K"], rho, o["max_iterations"], rng, o["sigma"])
            p_f, iterations, calls = res.estimate, res.iterations, res.performance_calls
        elif m.method == "ce_pmc":
            res = ce_pmc(ls, point["N"], point["K"], rho, o["max_iterations"], rng,
                         init_box=o["init_box"], sigma=o["sigma"])
            p_f, iterations, calls = res.estimate, res.iterations, res.performance_calls
        else:
            extra = {k: o[k] for k in ("eta_schedule", "threshold_order", "ess_scope",
                                       "lw_centered") if k in o}
            config = SaisConfig(n_proposals=point["N"], samples_per_proposal=point["K"], rho=rho,
                                forgetting=lam, max_iterations=o["max_iterations"],
                                init_box=o["init_box"], sigma=o["sigma"], **extra)
            res = run_sais(config, ls, rng)
            p_f, p_rec = res.p_f_last_iteration, res.p_f_recycled
            iterations, calls = res.iterations_used, res.performance_calls
    except Exception as exc:  # a failed run becomes an error row
        error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    elapsed = (time.perf_counter() - start) * 1000.0
    return ResultRow(task.benchmark.name, m.label, point["N"], point["K"], point["d_x"], rho, lam,
                     task.repetition, task.seed, p_f, p_rec, iterations, calls, elapsed, error,
                     m.method)


def build_tasks(spec, repetitions=None):
    """Tasks in output order: method, then grid point, then repetition."""
    reps = spec.repetitions if repetitions is None else repetitions
    tasks = []
    for m in spec.methods:
        for point in spec.grid(m):
            for r in range(reps):
                seed = derive_seed(spec.master_seed, m.label, point, r)
                tasks.append(_Task(spec.benchmark, m, point, r, seed))
    return tasks


def run_experiment(spec, repetitions=None, workers=None, on_row=None):
    """Run every task and return rows in deterministic order.

    ``on_row`` is called with each row as soon as it and all rows before it
    are available, so incremental output keeps the final ordering.
    """
    tasks = build_tasks(spec, repetitions)
    if workers is None:
        workers = os.cpu_count() or 1
    rows = []
    if workers <= 1 or len(tasks) <= 1:
        results = map(_execute, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_execute, tasks, chunksize=max(1, len(tasks) // (8 * workers)))
    try:
        for row in results:
            rows.append(row)
            if on_row is not None:
                on_row(row)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows
