"""Transformation dictionary: candidate terms built from the input columns.

A *factor* is one transformed variable, ``x_i^e`` with a rational exponent
(half-integers come from powers of sqrt(x)) or ``log(x_i)^e`` with an integer
exponent.  A *term* multiplies factors of up to ``mixture`` distinct
variables, one factor each.  Which factors are admissible is decided from the
data itself: square roots and logs need strictly positive columns, negative
powers need columns bounded away from zero, and negative log powers
additionally need ``log(x)`` bounded away from zero.

Terms are canonical by construction -- ``(sqrt x)^2`` folds to ``x`` -- and
are ordered lexicographically by their canonical key so every build is
deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DictionaryTooLarge, DomainViolation, NonFinite

# Entries with magnitude at or below this count as zero for admissibility.
ZERO_TOL = 1e-12

# Terms whose evaluated column is (numerically) constant are pruned.
_CONSTANT_SD_REL = 1e-12

IDENTITY = "identity"
LOG = "log"

DEFAULT_TERM_BUDGET = 200_000


@dataclass(frozen=True)
class Factor:
    """One transformed variable inside a term."""

    variable_index: int
    transform: str
    exponent: Fraction

    def __post_init__(self):
        if self.variable_index < 0:
            raise ValueError(f"variable_index must be >= 0, got {self.variable_index}")
        if self.transform not in (IDENTITY, LOG):
            raise ValueError(f"unknown transform {self.transform!r}")
        exponent = Fraction(self.exponent)
        if exponent == 0:
            raise ValueError("factor exponents must be nonzero")
        if self.transform == LOG and exponent.denominator != 1:
            raise ValueError("log factors take integer exponents only")
        if self.transform == IDENTITY and exponent.denominator not in (1, 2):
            raise ValueError("identity exponents must be integers or half-integers")
        object.__setattr__(self, "exponent", exponent)


@dataclass(frozen=True)
class TermExpr:
    """A product of factors over distinct variables, sorted by variable."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(sorted(self.factors, key=lambda f: f.variable_index))
        if not factors:
            raise ValueError("a term needs at least one factor")
        indices = [f.variable_index for f in factors]
        if len(set(indices)) != len(indices):
            raise ValueError(f"duplicate variable indices in term: {indices}")
        object.__setattr__(self, "factors", factors)

    @property
    def variables(self) -> tuple:
        return tuple(f.variable_index for f in self.factors)


def canonical_key(term: TermExpr) -> str:
    """Injective, sortable string form: ``v0^1/2*log(v2)^-1`` style."""
    parts = []
    for f in term.factors:
        if f.transform == LOG:
            parts.append(f"log(v{f.variable_index})^{f.exponent.numerator}")
        else:
            parts.append(
                f"v{f.variable_index}^{f.exponent.numerator}/{f.exponent.denominator}"
            )
    return "*".join(parts)


def _format_factor(f: Factor, name: str) -> str:
    a = abs(f.exponent)
    if f.transform == LOG:
        base = f"log({name})"
        return base if a == 1 else f"({base})^{a.numerator}"
    if a.denominator == 1:
        return name if a == 1 else f"{name}^{a.numerator}"
    root = f"sqrt({name})"
    return root if a.numerator == 1 else f"{root}^{a.numerator}"


def format_term(term: TermExpr, names) -> str:
    """Human-readable rendering, e.g. ``D*A`` or ``A^2/sqrt(D)``."""
    numerator = []
    denominator = []
    for f in term.factors:
        rendered = _format_factor(f, names[f.variable_index])
        (numerator if f.exponent > 0 else denominator).append(rendered)
    num = "*".join(numerator) if numerator else "1"
    if not denominator:
        return num
    if len(denominator) == 1:
        return f"{num}/{denominator[0]}"
    return f"{num}/({'*'.join(denominator)})"


def _admissible_with_reasons(column: np.ndarray, alpha: int):
    """Canonical (transform, exponent) pairs for one column plus skip reasons."""
    col = np.asarray(column, dtype=np.float64)
    strictly_positive = bool(np.min(col) > 0.0)
    bounded_from_zero = bool(np.min(np.abs(col)) > ZERO_TOL)

    pairs = set()
    reasons = []
    for k in range(1, alpha + 1):
        pairs.add((IDENTITY, Fraction(k)))
    if bounded_from_zero:
        for k in range(1, alpha + 1):
            pairs.add((IDENTITY, Fraction(-k)))
    else:
        reasons.append("negative powers excluded: entries within 1e-12 of zero")
    if strictly_positive:
        # Half-integer exponents are odd powers of sqrt(x); even powers fold
        # back into the integer exponents above.
        for j in range(1, alpha + 1, 2):
            pairs.add((IDENTITY, Fraction(j, 2)))
            if bounded_from_zero:
                pairs.add((IDENTITY, Fraction(-j, 2)))
        logs = np.log(col)
        log_bounded = bool(np.min(np.abs(logs)) > ZERO_TOL)
        for k in range(1, alpha + 1):
            pairs.add((LOG, Fraction(k)))
            if log_bounded:
                pairs.add((LOG, Fraction(-k)))
        if not log_bounded:
            reasons.append("negative log powers excluded: entries with log(x) within 1e-12 of zero")
    else:
        reasons.append("log and square-root powers excluded: column not strictly positive")
    return pairs, reasons


def admissible_factors(column, alpha: int) -> frozenset:
    """The set of (transform, exponent) pairs admissible for one column."""
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    col = np.asarray(column, dtype=np.float64)
    if not np.all(np.isfinite(col)):
        raise NonFinite("column contains NaN or infinite entries")
    pairs, _ = _admissible_with_reasons(col, alpha)
    return frozenset(pairs)


@dataclass(frozen=True)
class DictionaryCensus:
    """Build accounting: candidate/kept counts and everything excluded."""

    candidate_terms: int
    kept_terms: int
    candidates_by_mixture: dict
    kept_by_mixture: dict
    excluded_terms: tuple  # (canonical key, reason) pairs
    factor_restrictions: dict  # variable name -> tuple of reasons

    def to_dict(self) -> dict:
        return {
            "candidate_terms": self.candidate_terms,
            "kept_terms": self.kept_terms,
            "candidates_by_mixture": {str(m): c for m, c in sorted(self.candidates_by_mixture.items())},
            "kept_by_mixture": {str(m): c for m, c in sorted(self.kept_by_mixture.items())},
            "excluded_terms": [
                {"term": key, "reason": reason} for key, reason in self.excluded_terms
            ],
            "factor_restrictions": {
                name: list(reasons) for name, reasons in sorted(self.factor_restrictions.items())
            },
        }


@dataclass(frozen=True)
class Dictionary:
    """Evaluated candidate terms, ordered by canonical key."""

    terms: tuple
    columns: np.ndarray  # shape (n, len(terms))
    source_labels: tuple
    census: DictionaryCensus | None = None

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=np.float64)
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "source_labels", tuple(self.source_labels))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    def keys(self) -> list:
        return [canonical_key(t) for t in self.terms]

    def labels(self) -> list:
        return [format_term(t, self.source_labels) for t in self.terms]

    def column(self, i: int) -> np.ndarray:
        return self.columns[:, i]

    def subset(self, indices) -> "Dictionary":
        indices = list(indices)
        return Dictionary(
            terms=tuple(self.terms[i] for i in indices),
            columns=self.columns[:, indices],
            source_labels=self.source_labels,
            census=None,
        )


def _evaluate_factor(f: Factor, col: np.ndarray) -> np.ndarray:
    needs_positive = f.transform == LOG or f.exponent.denominator == 2
    if needs_positive:
        bad = np.flatnonzero(col <= 0.0)
        if bad.size:
            raise DomainViolation(
                f"row {bad[0]}: {f.transform} factor needs strictly positive entries "
                f"(found {col[bad[0]]!r})",
                row=int(bad[0]),
                factor=f,
            )
    if f.exponent < 0:
        if f.transform == IDENTITY:
            bad = np.flatnonzero(np.abs(col) <= ZERO_TOL)
            if bad.size:
                raise DomainViolation(
                    f"row {bad[0]}: negative power needs entries bounded away from zero",
                    row=int(bad[0]),
                    factor=f,
                )
        else:
            bad = np.flatnonzero(np.abs(np.log(col)) <= ZERO_TOL)
            if bad.size:
                raise DomainViolation(
                    f"row {bad[0]}: negative log power needs log(x) bounded away from zero",
                    row=int(bad[0]),
                    factor=f,
                )
    if f.transform == LOG:
        return np.log(col) ** int(f.exponent)
    base = col if f.exponent.denominator == 1 else np.sqrt(col)
    return base ** f.exponent.numerator


def evaluate_term(term: TermExpr, dataset) -> np.ndarray:
    """Evaluate one term on a dataset (anything with an (n, p) ``columns``).

    Domain violations are defensive: the builder only emits admissible
    factors, so hitting one means the data changed under us.
    """
    columns = np.asarray(getattr(dataset, "columns", dataset), dtype=np.float64)
    out = None
    for f in term.factors:
        values = _evaluate_factor(f, columns[:, f.variable_index])
        out = values if out is None else out * values
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise DomainViolation(
            f"row {bad}: term {canonical_key(term)} evaluated to a non-finite value",
            row=bad,
            factor=term.factors[0],
        )
    return out


def _is_constant(values: np.ndarray) -> bool:
    sd = float(values.std())
    return sd <= _CONSTANT_SD_REL * abs(float(values.mean())) + 1e-300


def build_dictionary(
    dataset,
    alpha: int,
    mixture: int,
    budget: int = DEFAULT_TERM_BUDGET,
) -> Dictionary:
    """Enumerate, evaluate, and order every admissible term of a dataset.

    Parameters
    ----------
    dataset : Dataset
        Anything with an (n, p) ``columns`` array and ``variable_names``.
    alpha : int
        Largest absolute integer exponent.
    mixture : int
        Largest number of distinct variables per term.
    budget : int
        Hard cap on the candidate term count, checked before evaluation.

    Raises
    ------
    DictionaryTooLarge
        If the candidate count exceeds ``budget``.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if mixture < 1:
        raise ValueError(f"mixture must be >= 1, got {mixture}")
    columns = np.asarray(dataset.columns, dtype=np.float64)
    if columns.ndim != 2 or columns.shape[1] == 0:
        raise ValueError(f"need a 2-d (n, p) column matrix, got shape {columns.shape}")
    if not np.all(np.isfinite(columns)):
        raise NonFinite("input columns contain NaN or infinite entries")
    n, p = columns.shape
    names = tuple(str(nm) for nm in dataset.variable_names)
    if len(names) != p:
        raise ValueError(f"got {len(names)} names for {p} columns")
    mixture = min(mixture, p)

    per_variable = []
    restrictions = {}
    for i in range(p):
        pairs, reasons = _admissible_with_reasons(columns[:, i], alpha)
        per_variable.append(sorted(pairs))  # deterministic enumeration order
        if reasons:
            restrictions[names[i]] = tuple(reasons)

    sizes = [len(pairs) for pairs in per_variable]
    candidates_by_mixture = {}
    for m in range(1, mixture + 1):
        count = 0
        for combo in itertools.combinations(range(p), m):
            count += math.prod(sizes[i] for i in combo)
        candidates_by_mixture[m] = count
    candidate_total = sum(candidates_by_mixture.values())
    if candidate_total > budget:
        raise DictionaryTooLarge(candidate_total, budget)

    keyed = []
    for m in range(1, mixture + 1):
        for combo in itertools.combinations(range(p), m):
            for choice in itertools.product(*(per_variable[i] for i in combo)):
                term = TermExpr(
                    tuple(
                        Factor(i, transform, exponent)
                        for i, (transform, exponent) in zip(combo, choice)
                    )
                )
                keyed.append((canonical_key(term), term))
    keyed.sort(key=lambda pair: pair[0])

    kept_terms = []
    kept_columns = []
    kept_by_mixture = {m: 0 for m in range(1, mixture + 1)}
    excluded = []
    for key, term in keyed:
        values = evaluate_term(term, columns)
        if _is_constant(values):
            excluded.append((key, "constant column"))
            continue
        kept_terms.append(term)
        kept_columns.append(values)
        kept_by_mixture[len(term.factors)] += 1

    census = DictionaryCensus(
        candidate_terms=candidate_total,
        kept_terms=len(kept_terms),
        candidates_by_mixture=candidates_by_mixture,
        kept_by_mixture=kept_by_mixture,
        excluded_terms=tuple(excluded),
        factor_restrictions=restrictions,
    )
    matrix = np.column_stack(kept_columns) if kept_terms else np.empty((n, 0))
    return Dictionary(
        terms=tuple(kept_terms),
        columns=matrix,
        source_labels=names,
        census=census,
    )
