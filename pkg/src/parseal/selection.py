"""Best-subset model selection under a hard VIF cap.

The exhaustive search scores every subset of the screened dictionary up to
``max_subset_size`` columns, skipping any candidate whose design is rank
deficient or whose largest VIF reaches the cap (infeasibility is a value, not
an error).  The objective is the adjusted R^2 of the least-squares fit with
intercept; ties break toward the smaller subset and then the
lexicographically smaller tuple of canonical term keys, which makes the
result independent of both term order and scheduling.

Candidate scoring may run on several threads (capped by the
``PARSEAL_THREADS`` environment variable); results are reduced in the
deterministic candidate order, so the selected model is byte-for-byte
identical at any worker count.
"""

from __future__ import annotations

import collections
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dictionary import (
    IDENTITY,
    Dictionary,
    Factor,
    TermExpr,
    _is_constant,
    canonical_key,
)
from .errors import (
    BudgetExceeded,
    InsufficientData,
    NoFeasibleSubset,
    NonFinite,
    PerfectCollinearity,
    ZeroVariance,
)
from .linalg import DesignMatrix, _solve_from_factorization, qr_factorize
from .screening import ImportanceRule
from .stats import ModelFit, ols_fit, vif

_CHUNK = 256


@dataclass(frozen=True)
class SelectionConfig:
    """Pipeline knobs with their defaults.

    ``search_budget`` caps the number of candidate fits the exhaustive
    search may attempt; exceeding it is an error, not a silent downgrade.
    """

    alpha: int = 2
    mixture_m: int = 2
    importance: ImportanceRule = field(default_factory=ImportanceRule)
    varsigma: float = 0.8
    vif_cap: float = 10.0
    max_subset_size: int = 8
    search_budget: int = 2**22
    search_mode: str = "exhaustive"
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.mixture_m < 1:
            raise ValueError(f"mixture_m must be >= 1, got {self.mixture_m}")
        if not (0.0 < self.varsigma < 1.0):
            raise ValueError(f"varsigma must lie in (0, 1), got {self.varsigma}")
        if not self.vif_cap > 1.0:
            raise ValueError(f"vif_cap must exceed 1, got {self.vif_cap}")
        if self.max_subset_size < 1:
            raise ValueError(f"max_subset_size must be >= 1, got {self.max_subset_size}")
        if self.search_budget < 1:
            raise ValueError(f"search_budget must be >= 1, got {self.search_budget}")
        if self.search_mode not in ("exhaustive", "greedy_forward"):
            raise ValueError(
                f"search_mode must be 'exhaustive' or 'greedy_forward', got {self.search_mode!r}"
            )


@dataclass(frozen=True)
class SelectedModel:
    terms: tuple
    fit: ModelFit
    objective: float
    candidates_evaluated: int
    feasible_candidates: int
    best_by_size: dict


def worker_count(workers: int | None = None) -> int:
    """Resolve the scoring worker cap (explicit argument beats the env var)."""
    if workers is not None:
        return max(1, int(workers))
    raw = os.environ.get("PARSEAL_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def subset_feasible(design: DesignMatrix, vif_cap: float):
    """Rank check first, then the VIF cap.

    Returns ``(feasible, vifs)``; ``vifs`` is None when the design is rank
    deficient or perfectly collinear, else the VIF vector of the predictor
    columns.  Single-predictor designs are always VIF-feasible.
    """
    fact = qr_factorize(design)
    feasible, vifs, _ = _feasibility_from(fact, design, vif_cap)
    return feasible, vifs


def _feasibility_from(fact, design: DesignMatrix, vif_cap: float):
    if fact.rank < design.k:
        return False, None, fact
    predictors = design.predictors()
    if predictors.shape[1] == 1:
        vifs = np.array([1.0])
    else:
        try:
            vifs = vif(predictors)
        except (PerfectCollinearity, ZeroVariance):
            return False, None, fact
    return bool(np.max(vifs) < vif_cap), vifs, fact


def _check_y(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise NonFinite(f"response shape {y.shape} does not match {n} rows")
    if not np.all(np.isfinite(y)):
        raise NonFinite("response contains NaN or infinite entries")
    return y


def _make_scorer(columns: np.ndarray, y: np.ndarray, vif_cap: float, tss: float):
    n = columns.shape[0]

    def score_one(combo):
        design = DesignMatrix.with_intercept(columns[:, combo])
        fact = qr_factorize(design)
        feasible, _, _ = _feasibility_from(fact, design, vif_cap)
        if not feasible:
            return combo, None
        solution = _solve_from_factorization(fact, design, y)
        k = len(combo)
        r2 = 1.0 - solution.residual_sum_squares / tss
        r2_adj = 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)
        return combo, r2_adj

    def score_chunk(combos):
        return [score_one(c) for c in combos]

    return score_chunk


def _chunks(iterable, size):
    iterator = iter(iterable)
    while True:
        block = list(itertools.islice(iterator, size))
        if not block:
            return
        yield block


def _windowed_map(pool, fn, blocks, window: int):
    """Like pool.map but with bounded submission; results in input order."""
    pending = collections.deque()
    blocks = iter(blocks)
    for block in itertools.islice(blocks, window):
        pending.append(pool.submit(fn, block))
    while pending:
        result = pending.popleft().result()
        nxt = next(blocks, None)
        if nxt is not None:
            pending.append(pool.submit(fn, nxt))
        yield result


def _scored_candidates(score_chunk, candidates, workers: int):
    if workers <= 1:
        for block in _chunks(candidates, _CHUNK):
            yield from score_chunk(block)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for block in _windowed_map(pool, score_chunk, _chunks(candidates, _CHUNK), 2 * workers):
            yield from block


def _key_order(zr: Dictionary):
    keys = zr.keys()
    return sorted(range(len(zr)), key=lambda i: keys[i]), keys


def _finish(zr: Dictionary, y, combo, keys, vif_cap, counters, best_by_size) -> SelectedModel:
    design = DesignMatrix.with_intercept(zr.columns[:, combo])
    fit = ols_fit(design, y, term_labels=[keys[i] for i in combo])
    feasible, _ = subset_feasible(design, vif_cap)
    assert feasible, "selected model failed its own feasibility check"
    return SelectedModel(
        terms=tuple(zr.terms[i] for i in combo),
        fit=fit,
        objective=fit.r_squared_adj,
        candidates_evaluated=counters[0],
        feasible_candidates=counters[1],
        best_by_size=dict(sorted(best_by_size.items())),
    )


def _search_bounds(zr: Dictionary, y, cfg: SelectionConfig):
    n = zr.n
    if len(zr) == 0:
        raise NoFeasibleSubset("the screened dictionary is empty")
    y = _check_y(y, n)
    k_cap = min(cfg.max_subset_size, len(zr), n - 2)
    if k_cap < 1:
        raise InsufficientData(f"cannot fit any subset with n={n} rows")
    centered = y - y.mean()
    tss = float(centered @ centered)
    if tss == 0.0:
        raise ZeroVariance("response is constant")
    return y, k_cap, tss


def best_subset_search(
    zr: Dictionary, y, cfg: SelectionConfig, workers: int | None = None
) -> SelectedModel:
    """Exhaustive feasible-subset search maximizing adjusted R^2.

    Subsets are enumerated by size, then lexicographically by canonical term
    key; the first candidate attaining the best objective wins, which
    realizes the (size, key-tuple) tie-break exactly.

    Raises
    ------
    BudgetExceeded
        If the enumeration needs more fits than ``cfg.search_budget``.
    NoFeasibleSubset
        If no candidate passes the rank and VIF checks.
    """
    y, k_cap, tss = _search_bounds(zr, y, cfg)
    order, keys = _key_order(zr)
    required = sum(math.comb(len(zr), k) for k in range(1, k_cap + 1))
    if required > cfg.search_budget:
        raise BudgetExceeded(required, cfg.search_budget)

    score_chunk = _make_scorer(zr.columns, y, cfg.vif_cap, tss)
    workers = worker_count(workers)

    evaluated = 0
    feasible = 0
    best_obj = -math.inf
    best_combo = None
    best_by_size = {}
    candidates = (
        combo for k in range(1, k_cap + 1) for combo in itertools.combinations(order, k)
    )
    for combo, objective in _scored_candidates(score_chunk, candidates, workers):
        evaluated += 1
        if objective is None:
            continue
        feasible += 1
        k = len(combo)
        if k not in best_by_size or objective > best_by_size[k]:
            best_by_size[k] = objective
        if objective > best_obj:
            best_obj = objective
            best_combo = combo
    if best_combo is None:
        raise NoFeasibleSubset(
            f"none of the {evaluated} candidate subsets passed the rank and VIF checks"
        )
    return _finish(zr, y, best_combo, keys, cfg.vif_cap, (evaluated, feasible), best_by_size)


def greedy_forward_search(
    zr: Dictionary, y, cfg: SelectionConfig, workers: int | None = None
) -> SelectedModel:
    """Greedy forward fallback for searches that exceed the exhaustive budget.

    Adds the feasible term that most improves adjusted R^2, stopping at the
    size cap or when no addition strictly improves the objective.  The result
    is approximate and is flagged as such in run reports.
    """
    y, k_cap, tss = _search_bounds(zr, y, cfg)
    order, keys = _key_order(zr)
    score_chunk = _make_scorer(zr.columns, y, cfg.vif_cap, tss)
    workers = worker_count(workers)

    evaluated = 0
    feasible = 0
    current: tuple = ()
    current_obj = -math.inf
    best_by_size = {}
    while len(current) < k_cap:
        in_current = set(current)
        step_candidates = []
        for i in order:
            if i in in_current:
                continue
            # Keep the design in canonical-key order as terms are added.
            combo = tuple(sorted(current + (i,), key=lambda j: keys[j]))
            step_candidates.append(combo)
        step_best = None
        step_obj = -math.inf
        for combo, objective in _scored_candidates(score_chunk, step_candidates, workers):
            evaluated += 1
            if objective is None:
                continue
            feasible += 1
            if objective > step_obj:
                step_obj = objective
                step_best = combo
        if step_best is None or step_obj <= current_obj:
            break
        current = step_best
        current_obj = step_obj
        best_by_size[len(current)] = step_obj
    if not current:
        raise NoFeasibleSubset("no single term produced a feasible design")
    return _finish(zr, y, current, keys, cfg.vif_cap, (evaluated, feasible), best_by_size)


def baseline_best_subset(
    dataset, y, cfg: SelectionConfig, workers: int | None = None
) -> SelectedModel:
    """Best-subset search over the raw input columns (no transformations).

    Constant columns are excluded up front, exactly as the dictionary builder
    would exclude them.
    """
    columns = np.asarray(dataset.columns, dtype=np.float64)
    names = tuple(dataset.variable_names)
    usable = [i for i in range(columns.shape[1]) if not _is_constant(columns[:, i])]
    if not usable:
        raise ZeroVariance("every raw input column is constant")
    terms = [TermExpr((Factor(i, IDENTITY, Fraction(1)),)) for i in usable]
    keyed = sorted(zip((canonical_key(t) for t in terms), terms, usable))
    raw = Dictionary(
        terms=tuple(t for _, t, _ in keyed),
        columns=columns[:, [i for _, _, i in keyed]],
        source_labels=names,
        census=None,
    )
    return best_subset_search(raw, y, cfg, workers=workers)
