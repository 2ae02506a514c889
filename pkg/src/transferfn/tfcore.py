"""Experiment shapes, transfer functions and their signalling structure.

A transfer function of an experiment with parties ``A, B, ...`` maps every
joint input ``(i_A, i_B, ...)`` to a joint output ``(j_A, j_B, ...)``.
Settings and outcomes are 0-based integers.  For two-outcome parties the
outcome ``0`` is rendered ``+`` and ``1`` is rendered ``-``.

Text forms
----------
Product-form functions render per party, outcomes listed in setting order::

    [+-,+-]          # j_A = F_A(i_A), j_B = F_B(i_B)

Anything else renders as a dense table, inputs in lexicographic order::

    {00->++,01->+-,10->-+,11->--}

Shapes render as ``settingsxoutcomes`` per party joined by ``:``, e.g.
``2x2:2x2``.
"""

from __future__ import annotations

import itertools
import math
import re
import string
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .errors import BudgetExceeded, InvalidInput, ShapeMismatch

DEFAULT_BUDGET = 10**7

_DIGITS = string.digits + string.ascii_lowercase
_SIGNS = "+-"


def party_name(index: int) -> str:
    return string.ascii_uppercase[index] if index < 26 else f"P{index}"


@dataclass(frozen=True, order=True)
class Party:
    input_size: int
    output_size: int

    def __post_init__(self):
        for value in (self.input_size, self.output_size):
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise InvalidInput(f"party sizes must be positive integers, got {self}")


@dataclass(frozen=True, order=True)
class ExperimentShape:
    """Ordered parties, each with a number of settings and of outcomes."""

    parties: tuple[Party, ...]

    def __post_init__(self):
        parties = tuple(p if isinstance(p, Party) else Party(*p) for p in self.parties)
        if not parties:
            raise InvalidInput("an experiment needs at least one party")
        object.__setattr__(self, "parties", parties)

    @classmethod
    def uniform(cls, n_parties: int, input_size: int, output_size: int) -> "ExperimentShape":
        return cls(tuple(Party(input_size, output_size) for _ in range(n_parties)))

    @classmethod
    def parse(cls, text: str) -> "ExperimentShape":
        """Parse ``"2x2:2x2"`` (settings x outcomes per party)."""
        parties = []
        for chunk in text.strip().split(":"):
            m = re.fullmatch(r"\s*(\d+)\s*x\s*(\d+)\s*", chunk)
            if not m:
                raise InvalidInput(f"bad shape {text!r}; expected e.g. '2x2:2x2'")
            parties.append(Party(int(m.group(1)), int(m.group(2))))
        return cls(tuple(parties))

    def __str__(self):
        return ":".join(f"{p.input_size}x{p.output_size}" for p in self.parties)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def input_sizes(self) -> tuple[int, ...]:
        return tuple(p.input_size for p in self.parties)

    @property
    def output_sizes(self) -> tuple[int, ...]:
        return tuple(p.output_size for p in self.parties)

    @property
    def n_inputs(self) -> int:
        return math.prod(self.input_sizes)

    @property
    def n_outputs(self) -> int:
        return math.prod(self.output_sizes)

    @cached_property
    def joint_inputs(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(n) for n in self.input_sizes)))

    @cached_property
    def joint_outputs(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(*(range(n) for n in self.output_sizes)))

    @cached_property
    def _input_lookup(self):
        return {i: k for k, i in enumerate(self.joint_inputs)}

    @cached_property
    def _output_lookup(self):
        return {j: k for k, j in enumerate(self.joint_outputs)}

    def input_index(self, i: Sequence[int]) -> int:
        try:
            return self._input_lookup[tuple(i)]
        except KeyError:
            raise InvalidInput(f"{tuple(i)} is not a joint input of shape {self}") from None

    def output_index(self, j: Sequence[int]) -> int:
        try:
            return self._output_lookup[tuple(j)]
        except KeyError:
            raise InvalidInput(f"{tuple(j)} is not a joint output of shape {self}") from None

    def outcome_symbol(self, party: int, outcome: int) -> str:
        if self.parties[party].output_size == 2:
            return _SIGNS[outcome]
        return _DIGITS[outcome]

    def parse_outcome(self, party: int, symbol: str) -> int:
        size = self.parties[party].output_size
        alphabet = _SIGNS if size == 2 else _DIGITS[:size]
        if symbol not in alphabet:
            raise InvalidInput(f"bad outcome {symbol!r} for party {party_name(party)}")
        return alphabet.index(symbol)


@dataclass(frozen=True, order=True)
class TransferFunction:
    """A total map from joint inputs to joint outputs, stored densely.

    ``table[k]`` is the joint output for ``shape.joint_inputs[k]``.  Ordering
    and equality follow the table, so sorting a list of functions of one shape
    gives the canonical lexicographic order.
    """

    shape: ExperimentShape
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        table = tuple(tuple(int(c) for c in j) for j in self.table)
        if len(table) != self.shape.n_inputs:
            raise InvalidInput(
                f"table has {len(table)} rows, shape {self.shape} needs {self.shape.n_inputs}")
        for j in table:
            if len(j) != self.shape.n_parties or any(
                    not 0 <= c < n for c, n in zip(j, self.shape.output_sizes)):
                raise InvalidInput(f"{j} is not a joint output of shape {self.shape}")
        object.__setattr__(self, "table", table)

    def __call__(self, i: Sequence[int]) -> tuple[int, ...]:
        return self.table[self.shape.input_index(i)]

    @classmethod
    def from_factors(cls, shape: ExperimentShape, factors: Sequence[Sequence[int]]) -> "TransferFunction":
        """Build the product-form function whose party ``p`` answers ``factors[p][i_p]``."""
        if len(factors) != shape.n_parties:
            raise ShapeMismatch(f"need {shape.n_parties} factors, got {len(factors)}")
        for p, (factor, party) in enumerate(zip(factors, shape.parties)):
            if len(factor) != party.input_size:
                raise ShapeMismatch(f"factor for party {party_name(p)} has wrong length")
        table = tuple(tuple(factors[p][i[p]] for p in range(shape.n_parties))
                      for i in shape.joint_inputs)
        return cls(shape, table)

    @classmethod
    def from_callable(cls, shape: ExperimentShape, func) -> "TransferFunction":
        return cls(shape, tuple(tuple(func(i)) for i in shape.joint_inputs))

    @classmethod
    def parse(cls, text: str, shape: ExperimentShape) -> "TransferFunction":
        return parse_transfer_function(text, shape)

    def __str__(self):
        return format_transfer_function(self)


@dataclass(frozen=True)
class SignallingClass:
    """Which ordered party pairs ``(x, y)`` carry a signal from ``x`` to ``y``."""

    n_parties: int
    pairs: frozenset

    def signals(self, x: int, y: int) -> bool:
        return (x, y) in self.pairs

    @property
    def is_null(self) -> bool:
        return not self.pairs

    @property
    def label(self) -> str:
        """``3a``..``3d`` for two parties; a pair listing otherwise."""
        if self.n_parties == 2:
            return {(False, False): "3a", (True, False): "3b",
                    (False, True): "3c", (True, True): "3d"}[
                        (self.signals(0, 1), self.signals(1, 0))]
        if self.is_null:
            return "null"
        return ",".join(f"{party_name(x)}->{party_name(y)}" for x, y in sorted(self.pairs))

    @property
    def description(self) -> str:
        if self.n_parties == 2:
            return {"3a": "No signals between A and B",
                    "3b": "Signal from A to B only",
                    "3c": "Signal from B to A only",
                    "3d": "Signals both ways"}[self.label]
        if self.is_null:
            return "No signals"
        return "Signals " + ", ".join(
            f"{party_name(x)} to {party_name(y)}" for x, y in sorted(self.pairs))


def count_transfer_functions(shape: ExperimentShape) -> int:
    return shape.n_outputs ** shape.n_inputs


def count_local_deterministic(shape: ExperimentShape) -> int:
    """Number of product-form transfer functions: prod over parties of outputs**inputs."""
    return math.prod(p.output_size ** p.input_size for p in shape.parties)


def enumerate_transfer_functions(shape: ExperimentShape,
                                 budget: int = DEFAULT_BUDGET) -> Iterator[TransferFunction]:
    """Iterate over every transfer function of ``shape`` in canonical order.

    Raises:
        BudgetExceeded: if there are more than ``budget`` functions.  The
            check happens at call time, before iteration starts.
    """
    count = count_transfer_functions(shape)
    if count > budget:
        raise BudgetExceeded(
            f"shape {shape} has {count} transfer functions, budget is {budget}")
    outputs = shape.joint_outputs
    return (TransferFunction(shape, table)
            for table in itertools.product(outputs, repeat=shape.n_inputs))


def enumerate_local_deterministic(shape: ExperimentShape,
                                  budget: int = DEFAULT_BUDGET) -> list[TransferFunction]:
    """All product-form transfer functions, sorted canonically."""
    count = count_local_deterministic(shape)
    if count > budget:
        raise BudgetExceeded(
            f"shape {shape} has {count} local deterministic functions, budget is {budget}")
    per_party = [list(itertools.product(range(p.output_size), repeat=p.input_size))
                 for p in shape.parties]
    return sorted(TransferFunction.from_factors(shape, factors)
                  for factors in itertools.product(*per_party))


def classify_signalling(f: TransferFunction) -> SignallingClass:
    """Exact signalling analysis by scanning all single-component input changes."""
    shape = f.shape
    n = shape.n_parties
    pairs = set()
    for x in range(n):
        if shape.input_sizes[x] == 1:
            continue
        for k, i in enumerate(shape.joint_inputs):
            if i[x] != 0:
                continue
            # i has i_x == 0; compare against every other value of i_x
            for v in range(1, shape.input_sizes[x]):
                other = f.table[shape.input_index(i[:x] + (v,) + i[x + 1:])]
                for y in range(n):
                    if y != x and other[y] != f.table[k][y]:
                        pairs.add((x, y))
    return SignallingClass(n, frozenset(pairs))


def product_factors(f: TransferFunction):
    """Per-party tables ``F_p(i_p)`` if ``f`` is product-form, else ``None``."""
    shape = f.shape
    factors = [[None] * s for s in shape.input_sizes]
    for i, j in zip(shape.joint_inputs, f.table):
        for p in range(shape.n_parties):
            seen = factors[p][i[p]]
            if seen is None:
                factors[p][i[p]] = j[p]
            elif seen != j[p]:
                return None
    return tuple(tuple(t) for t in factors)


def is_product_form(f: TransferFunction, return_factors: bool = False):
    """Whether each party's output depends only on its own input.

    With ``return_factors=True`` returns ``(flag, factors)`` where ``factors``
    is the tuple of per-party tables, or ``None`` when ``flag`` is false.
    """
    factors = product_factors(f)
    if return_factors:
        return factors is not None, factors
    return factors is not None


def relabel(f: TransferFunction, party: int, setting_perm=None, outcome_perm=None) -> TransferFunction:
    """Rename one party's settings and/or outcomes.

    ``setting_perm[s]`` is the new label of old setting ``s``; likewise for
    outcomes.  The result computes the same physical map under new labels.
    """
    shape = f.shape
    sp = list(setting_perm) if setting_perm is not None else list(range(shape.input_sizes[party]))
    op = list(outcome_perm) if outcome_perm is not None else list(range(shape.output_sizes[party]))
    if sorted(sp) != list(range(shape.input_sizes[party])) or \
            sorted(op) != list(range(shape.output_sizes[party])):
        raise InvalidInput("relabelling must be a permutation")
    inverse = [0] * len(sp)
    for old, new in enumerate(sp):
        inverse[new] = old

    def mapped(i):
        old_i = i[:party] + (inverse[i[party]],) + i[party + 1:]
        j = f(old_i)
        return j[:party] + (op[j[party]],) + j[party + 1:]

    return TransferFunction.from_callable(shape, mapped)


def format_transfer_function(f: TransferFunction) -> str:
    shape = f.shape
    factors = product_factors(f)
    if factors is not None:
        return "[" + ",".join(
            "".join(shape.outcome_symbol(p, o) for o in factor)
            for p, factor in enumerate(factors)) + "]"
    rows = []
    for i, j in zip(shape.joint_inputs, f.table):
        rows.append("".join(_DIGITS[s] for s in i) + "->"
                    + "".join(shape.outcome_symbol(p, o) for p, o in enumerate(j)))
    return "{" + ",".join(rows) + "}"


def parse_transfer_function(text: str, shape: ExperimentShape) -> TransferFunction:
    """Inverse of :func:`format_transfer_function` (either text form)."""
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        chunks = text[1:-1].split(",")
        if len(chunks) != shape.n_parties:
            raise ShapeMismatch(f"{text!r} has {len(chunks)} parties, shape {shape} has {shape.n_parties}")
        factors = []
        for p, chunk in enumerate(chunks):
            chunk = chunk.strip()
            if len(chunk) != shape.input_sizes[p]:
                raise ShapeMismatch(f"party {party_name(p)} of {text!r} needs "
                                    f"{shape.input_sizes[p]} outcomes")
            factors.append([shape.parse_outcome(p, s) for s in chunk])
        return TransferFunction.from_factors(shape, factors)
    if text.startswith("{") and text.endswith("}"):
        table = {}
        for row in text[1:-1].split(","):
            try:
                left, right = row.strip().split("->")
            except ValueError:
                raise InvalidInput(f"bad table row {row!r}") from None
            if len(left) != shape.n_parties or len(right) != shape.n_parties:
                raise ShapeMismatch(f"row {row!r} does not match shape {shape}")
            i = tuple(_DIGITS.index(s) if s in _DIGITS else -1 for s in left)
            j = tuple(shape.parse_outcome(p, s) for p, s in enumerate(right))
            table[shape.input_index(i)] = j
        if len(table) != shape.n_inputs:
            raise InvalidInput(f"table {text!r} is not total over shape {shape}")
        return TransferFunction(shape, tuple(table[k] for k in range(shape.n_inputs)))
    raise InvalidInput(f"cannot parse transfer function {text!r}")
