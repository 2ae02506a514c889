"""Conditional probability tables Pr(j|i) and distributions over transfer functions.

Every probability here is a :class:`fractions.Fraction`; floats are rejected
at the boundary so that sums and comparisons stay exact.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from .errors import InvalidInput, ShapeMismatch
from .tfcore import (
    ExperimentShape,
    TransferFunction,
    classify_signalling,
    format_transfer_function,
    parse_transfer_function,
)

SCHEMA = "1"


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings; refuse floats."""
    if isinstance(value, bool):
        raise InvalidInput(f"not a rational: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InvalidInput(f"not a rational: {value!r}") from None
    raise InvalidInput(f"probabilities must be exact rationals, got {value!r}")


def format_fraction(q: Fraction) -> str:
    """Always ``num/den``, including integers (``0/1``, ``1/1``)."""
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Behavior:
    """Exact table ``table[input_index][output_index] = Pr(j|i)``."""

    shape: ExperimentShape
    table: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        shape = self.shape
        table = tuple(tuple(as_fraction(p) for p in row) for row in self.table)
        if len(table) != shape.n_inputs or any(len(row) != shape.n_outputs for row in table):
            raise ShapeMismatch(f"table dimensions do not match shape {shape}")
        for i, row in zip(shape.joint_inputs, table):
            if any(p < 0 for p in row):
                raise InvalidInput(f"negative probability for input {i}")
            if sum(row) != 1:
                raise InvalidInput(f"probabilities for input {i} sum to {sum(row)}, not 1")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, shape: ExperimentShape, prob) -> "Behavior":
        """Build from ``prob(i, j)`` evaluated over all joint inputs/outputs."""
        return cls(shape, tuple(tuple(prob(i, j) for j in shape.joint_outputs)
                                for i in shape.joint_inputs))

    @classmethod
    def from_entries(cls, shape: ExperimentShape, entries: Mapping) -> "Behavior":
        """Build from ``{(i, j): p}``; missing entries are 0."""
        table = [[Fraction(0)] * shape.n_outputs for _ in range(shape.n_inputs)]
        for (i, j), p in entries.items():
            table[shape.input_index(i)][shape.output_index(j)] = as_fraction(p)
        return cls(shape, tuple(tuple(row) for row in table))

    def prob(self, i, j) -> Fraction:
        return self.table[self.shape.input_index(i)][self.shape.output_index(j)]

    def row(self, i) -> dict:
        return dict(zip(self.shape.joint_outputs, self.table[self.shape.input_index(i)]))

    def marginal(self, i, party: int) -> tuple[Fraction, ...]:
        """Distribution of ``party``'s outcome given joint input ``i``."""
        out = [Fraction(0)] * self.shape.output_sizes[party]
        for j, p in zip(self.shape.joint_outputs, self.table[self.shape.input_index(i)]):
            out[j[party]] += p
        return tuple(out)

    def to_json(self) -> dict:
        entries = [{"input": list(i), "output": list(j), "p": format_fraction(p)}
                   for i, row in zip(self.shape.joint_inputs, self.table)
                   for j, p in zip(self.shape.joint_outputs, row) if p != 0]
        return {"schema": SCHEMA, "shape": str(self.shape), "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "Behavior":
        shape = ExperimentShape.parse(data["shape"])
        entries = {}
        for e in data.get("entries", []):
            key = (tuple(e["input"]), tuple(e["output"]))
            if key in entries:
                raise InvalidInput(f"duplicate entry {key}")
            entries[key] = as_fraction(e["p"])
        return cls.from_entries(shape, entries)


class TFDistribution:
    """A finite probability distribution over transfer functions of one shape.

    Atoms with zero weight are dropped; repeated atoms are merged.  Atoms are
    kept in canonical order, so equal distributions compare and hash equal.
    """

    def __init__(self, shape: ExperimentShape, weights):
        if isinstance(weights, Mapping):
            weights = weights.items()
        merged = defaultdict(Fraction)
        for f, w in weights:
            if f.shape != shape:
                raise ShapeMismatch(f"atom {f} has shape {f.shape}, expected {shape}")
            w = as_fraction(w)
            if w < 0:
                raise InvalidInput(f"negative weight {w} on {f}")
            merged[f] += w
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise InvalidInput(f"weights sum to {total}, not 1")
        self.shape = shape
        self.atoms = tuple(sorted((f, w) for f, w in merged.items() if w != 0))

    @classmethod
    def point(cls, f: TransferFunction) -> "TFDistribution":
        return cls(f.shape, {f: 1})

    @property
    def weights(self) -> dict:
        return dict(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def __eq__(self, other):
        return isinstance(other, TFDistribution) and (self.shape, self.atoms) == (other.shape, other.atoms)

    def __hash__(self):
        return hash((self.shape, self.atoms))

    def __repr__(self):
        body = ", ".join(f"{format_transfer_function(f)}: {w}" for f, w in self.atoms)
        return f"TFDistribution({self.shape}, {{{body}}})"

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "shape": str(self.shape),
                "atoms": [{"tf": format_transfer_function(f), "w": format_fraction(w)}
                          for f, w in self.atoms]}

    @classmethod
    def from_json(cls, data: dict) -> "TFDistribution":
        shape = ExperimentShape.parse(data["shape"])
        return cls(shape, [(parse_transfer_function(a["tf"], shape), as_fraction(a["w"]))
                           for a in data["atoms"]])


def expand_weights(shape: ExperimentShape, weighted: Iterable) -> list[list[Fraction]]:
    """Raw table of ``sum_F w_F delta(j, F(i))`` for arbitrary (even signed) weights."""
    table = [[Fraction(0)] * shape.n_outputs for _ in range(shape.n_inputs)]
    for f, w in weighted:
        if f.shape != shape:
            raise ShapeMismatch(f"atom {f} has shape {f.shape}, expected {shape}")
        for k, j in enumerate(f.table):
            table[k][shape.output_index(j)] += w
    return table


def behavior_from_distribution(d: TFDistribution) -> Behavior:
    """``Pr(j|i) = sum_F Pr(F) delta(j, F(i))``."""
    table = expand_weights(d.shape, d.atoms)
    return Behavior(d.shape, tuple(tuple(row) for row in table))


def check_no_signalling(b: Behavior) -> dict:
    """Behavior-level signalling per ordered pair ``(x, y)``.

    ``x`` signals to ``y`` when ``y``'s marginal changes with ``x``'s setting
    for some fixing of the other settings.
    """
    shape = b.shape
    n = shape.n_parties
    result = {(x, y): False for x in range(n) for y in range(n) if x != y}
    for x in range(n):
        for i in shape.joint_inputs:
            if i[x] != 0:
                continue
            base = [b.marginal(i, y) for y in range(n)]
            for v in range(1, shape.input_sizes[x]):
                other = i[:x] + (v,) + i[x + 1:]
                for y in range(n):
                    if y != x and b.marginal(other, y) != base[y]:
                        result[(x, y)] = True
    return result


def weak_signalling_probability(d: TFDistribution, pair: tuple[int, int]) -> Fraction:
    """Total weight of atoms in which party ``pair[0]`` signals to ``pair[1]``."""
    x, y = pair
    if x == y or not (0 <= x < d.shape.n_parties and 0 <= y < d.shape.n_parties):
        raise InvalidInput(f"bad party pair {pair}")
    return sum((w for f, w in d.atoms if classify_signalling(f).signals(x, y)), Fraction(0))


def mix_distributions(d1: TFDistribution, d2: TFDistribution, lam) -> TFDistribution:
    """``lam * d1 + (1 - lam) * d2``."""
    lam = as_fraction(lam)
    if d1.shape != d2.shape:
        raise ShapeMismatch("cannot mix distributions of different shapes")
    if not 0 <= lam <= 1:
        raise InvalidInput(f"mixing weight {lam} outside [0, 1]")
    return TFDistribution(d1.shape, [(f, lam * w) for f, w in d1.atoms]
                          + [(f, (1 - lam) * w) for f, w in d2.atoms])


def mix_behaviors(b1: Behavior, b2: Behavior, lam) -> Behavior:
    lam = as_fraction(lam)
    if b1.shape != b2.shape:
        raise ShapeMismatch("cannot mix behaviors of different shapes")
    if not 0 <= lam <= 1:
        raise InvalidInput(f"mixing weight {lam} outside [0, 1]")
    return Behavior(b1.shape, tuple(
        tuple(lam * p + (1 - lam) * q for p, q in zip(r1, r2))
        for r1, r2 in zip(b1.table, b2.table)))
