"""Minkowski events, light-cone ordering and the boosted chain of experiments.

Units have c = 1 and the metric signature is (+, -, -, -).  Coordinates are
floats. The pigeonhole bookkeeping on signalling probabilities is exact.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .behavior import as_fraction, format_fraction
from .errors import BudgetExceeded, NullInterval, ParameterOutOfRange, Undefined
from .simplex import find_feasible_point

NULL_EPSILON = 1e-9
PIGEONHOLE_LP_LIMIT = 15


@dataclass(frozen=True)
class Event:
    t: float
    x: float
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterOutOfRange(f"event coordinate {name}={value} is not finite")
            object.__setattr__(self, name, value)

    def as_tuple(self):
        return (self.t, self.x, self.y, self.z)


class IntervalClass(enum.Enum):
    TIMELIKE_FUTURE = "timelike-future"
    TIMELIKE_PAST = "timelike-past"
    SPACELIKE = "spacelike"


def interval_squared(a: Event, b: Event) -> float:
    dt, dx, dy, dz = (q - p for p, q in zip(a.as_tuple(), b.as_tuple()))
    return dt * dt - dx * dx - dy * dy - dz * dz


def classify_interval(a: Event, b: Event, epsilon: float = NULL_EPSILON) -> IntervalClass:
    """Where ``b`` lies relative to the light cone of ``a``.

    Raises:
        NullInterval: if ``|s^2|`` is within ``epsilon`` times the larger of
            ``dt^2`` and ``|dr|^2`` (and of 1), i.e. on the light cone.
    """
    dt = b.t - a.t
    dr2 = (b.x - a.x) ** 2 + (b.y - a.y) ** 2 + (b.z - a.z) ** 2
    s2 = dt * dt - dr2
    scale = max(dt * dt, dr2, 1.0)
    if abs(s2) <= epsilon * scale:
        raise NullInterval(f"events {a} and {b} are null separated")
    if s2 < 0:
        return IntervalClass.SPACELIKE
    return IntervalClass.TIMELIKE_FUTURE if dt > 0 else IntervalClass.TIMELIKE_PAST


def boost(e: Event, rapidity: float) -> Event:
    """Standard boost along x: ``t' = t cosh - x sinh``, ``x' = x cosh - t sinh``."""
    if not math.isfinite(rapidity):
        raise ParameterOutOfRange("rapidity must be finite")
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    return Event(e.t * ch - e.x * sh, e.x * ch - e.t * sh, e.y, e.z)


@dataclass(frozen=True)
class ExperimentEvents:
    """One Bell experiment of the chain, at rest in the frame boosted by ``k * phi``."""

    k: int
    velocity: float
    prep_a: Event
    prep_b: Event
    meas_a: Event
    meas_b: Event


@dataclass(frozen=True)
class BoostedConfiguration:
    """``2N+1`` experiments; side A on the lower sign branch, side B on the upper one."""

    n: int
    length: float
    phi: float
    tau: float
    experiments: tuple

    @property
    def ks(self):
        return [e.k for e in self.experiments]

    def experiment(self, k: int) -> ExperimentEvents:
        return self.experiments[k + self.n]

    def event_rows(self) -> list[dict]:
        rows = []
        for e in self.experiments:
            for label, ev in (("prep_a", e.prep_a), ("prep_b", e.prep_b),
                              ("meas_a", e.meas_a), ("meas_b", e.meas_b)):
                rows.append({"k": e.k, "velocity": e.velocity, "event": label,
                             "t": ev.t, "x": ev.x, "y": ev.y, "z": ev.z})
        return rows

    def relations(self, epsilon: float = NULL_EPSILON) -> dict:
        """Pairwise cone relations used by the chained argument.

        For every pair ``j < k``: ``a_meas`` and ``b_meas`` place experiment
        ``j``'s measurement relative to the light cone of experiment ``k``'s;
        ``relay_a`` places ``prep_a`` of ``k`` relative to ``meas_a`` of ``j``
        (a classical relay needs timelike-future); ``b_back`` places
        ``meas_b`` of ``k`` relative to ``prep_b`` of ``j``.
        Inside each experiment, both preparation/measurement cross pairs are
        classified.
        """
        pairs = []
        for ej, ek in itertools.combinations(self.experiments, 2):
            pairs.append({
                "j": ej.k, "k": ek.k,
                "a_meas": classify_interval(ek.meas_a, ej.meas_a, epsilon).value,
                "b_meas": classify_interval(ek.meas_b, ej.meas_b, epsilon).value,
                "relay_a": classify_interval(ej.meas_a, ek.prep_a, epsilon).value,
                "b_back": classify_interval(ej.prep_b, ek.meas_b, epsilon).value,
            })
        within = [{"k": e.k,
                   "preparations": classify_interval(e.prep_a, e.prep_b, epsilon).value,
                   "prep_a_meas_b": classify_interval(e.prep_a, e.meas_b, epsilon).value,
                   "prep_b_meas_a": classify_interval(e.prep_b, e.meas_a, epsilon).value}
                  for e in self.experiments]
        return {"pairs": pairs, "within": within}


def default_tau(length: float, phi: float) -> float:
    return length * math.sinh(phi) / 100


def generate_configuration(n: int, length: float, phi: float, tau: float | None = None) -> BoostedConfiguration:
    """Preparation events ``(-+ L sinh k phi, +- L cosh k phi, 0, 0)`` for ``k = -N..N``.

    Each experiment is the standard-frame pair ``(0, -L)`` / ``(0, +L)``
    boosted by rapidity ``k phi``; its measurements happen a proper time
    ``tau`` later on the same worldlines.  ``tau=None`` means
    ``L sinh(phi) / 100``.

    Raises:
        ParameterOutOfRange: unless ``N >= 1``, ``L > 0``, ``phi > 0`` and
            ``0 < tau < L sinh(phi)``.
    """
    if not isinstance(n, int) or n < 1:
        raise ParameterOutOfRange(f"N must be a positive integer, got {n!r}")
    if not (length > 0 and math.isfinite(length)):
        raise ParameterOutOfRange(f"L must be positive, got {length!r}")
    if not (phi > 0 and math.isfinite(phi)):
        raise ParameterOutOfRange(f"phi must be positive, got {phi!r}")
    if tau is None:
        tau = default_tau(length, phi)
    if not 0 < tau < length * math.sinh(phi):
        raise ParameterOutOfRange(
            f"tau must lie in (0, L sinh phi) = (0, {length * math.sinh(phi)}), got {tau!r}")
    experiments = []
    for k in range(-n, n + 1):
        r = k * phi
        experiments.append(ExperimentEvents(
            k=k,
            velocity=math.tanh(r),
            prep_a=boost(Event(0.0, -length), r),
            prep_b=boost(Event(0.0, length), r),
            meas_a=boost(Event(tau, -length), r),
            meas_b=boost(Event(tau, length), r)))
    return BoostedConfiguration(n, float(length), float(phi), float(tau), tuple(experiments))


def minimal_pigeonhole_n(p_s) -> int:
    """Least ``N >= 1`` with ``p_s > 1/(2N+1)``."""
    p = as_fraction(p_s)
    if p <= 0 or p > 1:
        raise Undefined(f"signalling probability must lie in (0, 1], got {p}")
    # p > 1/(2N+1)  <=>  N > (1/p - 1)/2
    return max(1, math.floor((1 / p - 1) / 2) + 1)


@dataclass(frozen=True)
class PigeonholeResult:
    """Both routes to deciding whether ``m`` events of probability ``p`` can be pairwise disjoint."""

    p: Fraction
    m: int
    union_bound: Fraction
    union_infeasible: bool
    lp_infeasible: bool | None
    witness: dict | None = None
    farkas: dict | None = None

    @property
    def infeasible(self) -> bool:
        return self.union_infeasible

    @property
    def agree(self) -> bool:
        return self.lp_infeasible is None or self.lp_infeasible == self.union_infeasible

    def to_json(self) -> dict:
        out = {"p": format_fraction(self.p), "M": self.m,
               "union_bound": format_fraction(self.union_bound),
               "infeasible": self.infeasible,
               "lp_infeasible": self.lp_infeasible}
        if self.witness is not None:
            out["witness"] = [{"cell": cell, "mass": format_fraction(w)}
                              for cell, w in sorted(self.witness.items())]
        if self.farkas is not None:
            out["certificate"] = {name: format_fraction(v) for name, v in self.farkas.items()}
        return out


@lru_cache(maxsize=None)
def _disjointness_columns(m: int):
    """Columns over all ``2^m`` indicator outcomes.

    Rows: normalisation, ``m`` marginals, ``m(m-1)/2`` pairwise overlaps.
    """
    cells = list(itertools.product((0, 1), repeat=m))
    names = ["total"] + [f"marginal_{e}" for e in range(m)] + \
        [f"overlap_{a}_{b}" for a, b in itertools.combinations(range(m), 2)]
    columns = [[1] + list(s) + [s[a] * s[b] for a, b in itertools.combinations(range(m), 2)]
               for s in cells]
    return cells, names, columns


def _rhs(p: Fraction, m: int) -> list:
    return [Fraction(1)] + [p] * m + [Fraction(0)] * (m * (m - 1) // 2)


@lru_cache(maxsize=None)
def _presolve(m: int, forcing: tuple) -> list:
    """Columns surviving presolve: a zero-rhs row with nonnegative entries forces its support to 0."""
    _, _, columns = _disjointness_columns(m)
    return [c for c, col in enumerate(columns) if not any(col[r] for r in forcing)]


@lru_cache(maxsize=None)
def _supports(m: int, forcing: tuple) -> list:
    """Per column: its nonzero non-forcing rows, and its first forcing row (None if kept)."""
    _, _, columns = _disjointness_columns(m)
    forcing_set = set(forcing)
    out = []
    for col in columns:
        live = tuple(r for r, v in enumerate(col) if v and r not in forcing_set)
        force = next((r for r in forcing if col[r]), None)
        out.append((live, force))
    return out


def pigeonhole_lp(p, m: int, limit: int = PIGEONHOLE_LP_LIMIT):
    """Exact LP for pairwise-disjoint events ``E_1..E_m`` each of probability ``p``.

    Returns ``(feasible, witness, farkas)``.  ``witness`` maps cells
    (strings of 0/1 indicators) to masses. ``farkas`` maps row names to
    multipliers whose combination is nonnegative on all ``2^m`` columns and
    negative on the right-hand side.
    """
    p = as_fraction(p)
    if m > limit:
        raise BudgetExceeded(f"pigeonhole LP over 2^{m} cells exceeds limit 2^{limit}")
    cells, names, columns = _disjointness_columns(m)
    rhs = _rhs(p, m)
    # every coefficient is 0 or 1, so only the rhs decides which rows force zeros
    forcing = tuple(r for r, v in enumerate(rhs) if v == 0)
    kept = _presolve(m, forcing)
    live_rows = [r for r in range(len(names)) if r not in forcing]
    a = [[columns[c][r] for c in kept] for r in live_rows]
    b = [rhs[r] for r in live_rows]
    result = find_feasible_point(a, b) if kept else None
    if result is not None and result.feasible:
        witness = {"".join(map(str, cells[c])): x for c, x in zip(kept, result.x) if x}
        return True, witness, None
    z = [Fraction(0)] * len(names)
    if result is None:
        # nothing survives presolve: the total row alone is contradictory
        z[0] = Fraction(-1)
    else:
        for r, v in zip(live_rows, result.farkas):
            z[r] = v
    # removed columns: raise forcing-row multipliers until each is covered;
    # integer arithmetic over a common denominator keeps this cheap at 2^m
    scale = math.lcm(*(v.denominator for v in z))
    zi = [int(v * scale) for v in z]
    for c, (live, force) in enumerate(_supports(m, forcing)):
        if force is None:
            continue
        value = sum(zi[r] for r in live)
        if value < 0:
            zi[force] = max(zi[force], -value)
    z = [Fraction(v, scale) for v in zi]
    return False, None, dict(zip(names, z))


def pigeonhole_infeasible(p_s, m: int, use_lp: bool = True,
                          limit: int = PIGEONHOLE_LP_LIMIT) -> PigeonholeResult:
    """Can ``m`` signalling events, each of probability ``p_s``, avoid every overlap?

    Union bound route: disjoint events need ``m * p_s <= 1``.  LP route:
    exact feasibility over all ``2^m`` joint indicator outcomes (only when
    ``use_lp`` and ``m <= limit``).
    """
    p = as_fraction(p_s)
    if not 0 <= p <= 1:
        raise Undefined(f"probability must lie in [0, 1], got {p}")
    if not isinstance(m, int) or m < 1:
        raise ParameterOutOfRange(f"M must be a positive integer, got {m!r}")
    bound = m * p
    union_infeasible = bound > 1
    lp_infeasible = witness = farkas = None
    if use_lp:
        feasible, witness, farkas = pigeonhole_lp(p, m, limit)
        lp_infeasible = not feasible
    return PigeonholeResult(p, m, bound, union_infeasible, lp_infeasible, witness, farkas)


def check_pigeonhole_farkas(p, m: int, farkas: dict) -> bool:
    """Exhaustively verify a pigeonhole certificate over all ``2^m`` cells."""
    p = as_fraction(p)
    cells, names, columns = _disjointness_columns(m)
    z = [farkas[name] for name in names]
    rhs = _rhs(p, m)
    if any(sum(v * w for v, w in zip(col, z)) < 0 for col in columns):
        return False
    return sum(v * w for v, w in zip(rhs, z)) < 0
