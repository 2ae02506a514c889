"""Membership in the local-deterministic polytope and Bell-type inequalities.

A behavior is local when it is a convex mixture of product-form transfer
functions.  :func:`local_membership` decides this exactly and returns either
a mixing witness or a separating inequality.  The remaining functions cover
the symmetric spin-singlet settings with two and three measurement angles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .behavior import (
    Behavior,
    TFDistribution,
    as_fraction,
    expand_weights,
    format_fraction,
)
from .errors import ShapeMismatch, SymmetryViolated
from .simplex import find_feasible_point
from .tfcore import (
    ExperimentShape,
    TransferFunction,
    count_local_deterministic,
    enumerate_local_deterministic,
    format_transfer_function,
)

LP_BUDGET = 10**5
DEFAULT_DENOMINATOR_BOUND = 10**6

PLUS, MINUS = 0, 1


def rationalize(x: float, max_denominator: int = DEFAULT_DENOMINATOR_BOUND) -> Fraction:
    """Closest fraction with denominator at most ``max_denominator`` (continued fractions)."""
    return Fraction(x).limit_denominator(max_denominator)


@dataclass(frozen=True)
class BellInequality:
    """Linear functional ``sum c[i, j] Pr(j|i) >= threshold`` on behaviors."""

    shape: ExperimentShape
    coeffs: dict = field(hash=False)
    threshold: Fraction = Fraction(0)

    def evaluate(self, b: Behavior) -> Fraction:
        if b.shape != self.shape:
            raise ShapeMismatch(f"inequality is for shape {self.shape}, behavior has {b.shape}")
        return sum((c * b.prob(i, j) for (i, j), c in self.coeffs.items()), Fraction(0))

    def evaluate_deterministic(self, f: TransferFunction) -> Fraction:
        return sum((c for (i, j), c in self.coeffs.items() if f(i) == j), Fraction(0))

    def violation(self, b: Behavior) -> Fraction:
        """``value - threshold``; negative means the inequality is violated."""
        return self.evaluate(b) - self.threshold

    def to_json(self) -> dict:
        return {"coeffs": [{"input": list(i), "output": list(j), "c": format_fraction(c)}
                           for (i, j), c in sorted(self.coeffs.items()) if c != 0],
                "threshold": format_fraction(self.threshold)}


@dataclass(frozen=True)
class LPVerdict:
    """Outcome of :func:`local_membership`.

    Feasible verdicts carry ``witness``; infeasible ones carry ``certificate``
    and ``violation`` (the certificate's value on the queried behavior minus
    its threshold, always negative).
    """

    feasible: bool
    witness: TFDistribution | None = None
    certificate: BellInequality | None = None
    violation: Fraction | None = None

    def to_json(self) -> dict:
        if self.feasible:
            return {"verdict": "feasible",
                    "witness": [{"tf": format_transfer_function(f), "w": format_fraction(w)}
                                for f, w in self.witness.atoms]}
        cert = self.certificate.to_json()
        cert["violation"] = format_fraction(self.violation)
        return {"verdict": "infeasible", "certificate": cert}


def local_membership(b: Behavior, budget: int = LP_BUDGET) -> LPVerdict:
    """Decide whether ``b`` is a mixture of product-form transfer functions.

    The unknowns are the weights of all product-form functions; the equality
    constraints reproduce every entry of ``b`` plus total weight one.  When
    infeasible, the Farkas vector of the exact simplex becomes a Bell-type
    inequality, normalised so its largest coefficient has magnitude 1 and its
    threshold is tight (attained by some deterministic point).
    """
    shape = b.shape
    atoms = enumerate_local_deterministic(shape, budget)
    rows = []
    rhs = []
    keys = []
    for k_in, i in enumerate(shape.joint_inputs):
        for k_out, j in enumerate(shape.joint_outputs):
            rows.append([1 if f.table[k_in] == j else 0 for f in atoms])
            rhs.append(b.table[k_in][k_out])
            keys.append((i, j))
    rows.append([1] * len(atoms))
    rhs.append(1)
    result = find_feasible_point(rows, rhs)
    if result.feasible:
        witness = TFDistribution(shape, [(f, w) for f, w in zip(atoms, result.x) if w])
        return LPVerdict(True, witness=witness)

    coeffs = dict(zip(keys, result.farkas))
    # rows of a behavior sum to 1, so shifting one input's coefficients by a
    # constant moves both sides equally; make every row's minimum 0
    for i in shape.joint_inputs:
        low = min(coeffs[(i, j)] for j in shape.joint_outputs)
        for j in shape.joint_outputs:
            coeffs[(i, j)] -= low
    scale = max(abs(c) for c in coeffs.values())
    coeffs = {key: c / scale for key, c in coeffs.items() if c}
    ineq = BellInequality(shape, coeffs)
    threshold = min(ineq.evaluate_deterministic(f) for f in atoms)
    ineq = BellInequality(shape, coeffs, threshold)
    return LPVerdict(False, certificate=ineq, violation=ineq.violation(b))


def pr_box(shape: ExperimentShape | None = None) -> Behavior:
    """Perfect correlation unless both settings are 1, then perfect anti-correlation."""
    shape = shape or ExperimentShape.parse("2x2:2x2")

    def prob(i, j):
        want_equal = not (i[0] == 1 and i[1] == 1)
        return Fraction(1, 2) if (j[0] == j[1]) == want_equal else Fraction(0)

    return Behavior.from_function(shape, prob)


@dataclass(frozen=True)
class SymmetricSingletScenario:
    """Two parties sharing ``n_settings`` angles, outcomes ``+``/``-``.

    ``reversed_zero`` records the convention that the two parties measure
    angles from opposite zeros, so equal settings give equal signs.
    """

    n_settings: int
    reversed_zero: bool = True

    def __post_init__(self):
        if self.n_settings not in (2, 3):
            raise ValueError("only 2 or 3 settings have closed forms")
        if not self.reversed_zero:
            raise ValueError("the closed forms assume the reversed-zero convention")

    @property
    def shape(self) -> ExperimentShape:
        return ExperimentShape.uniform(2, self.n_settings, 2)

    @property
    def labels(self) -> tuple[str, ...]:
        return ("P1", "P2") if self.n_settings == 2 else ("P0", "P1", "P2", "P3")

    def atoms(self, label: str) -> tuple[TransferFunction, TransferFunction]:
        """The two mirror-image atoms carrying probability ``label``."""
        n = self.n_settings
        if n == 2:
            base = {"P1": (PLUS, PLUS), "P2": (PLUS, MINUS)}[label]
        else:
            # P_k flips the sign at setting k relative to P_0
            k = int(label[1])
            base = tuple(MINUS if s + 1 == k else PLUS for s in range(3))
        mirror = tuple(1 - s for s in base)
        return (TransferFunction.from_factors(self.shape, (base, base)),
                TransferFunction.from_factors(self.shape, (mirror, mirror)))

    def distribution(self, values: dict) -> TFDistribution:
        """Put weight ``values[label]`` on each of the two atoms for ``label``."""
        weighted = []
        for label in self.labels:
            w = as_fraction(values[label])
            weighted += [(f, w) for f in self.atoms(label)]
        return TFDistribution(self.shape, weighted)

    def forward_table(self, values: dict) -> list[list[Fraction]]:
        """Signed linear map from the ``P`` values to a raw probability table."""
        weighted = []
        for label in self.labels:
            w = as_fraction(values[label])
            weighted += [(f, w) for f in self.atoms(label)]
        return expand_weights(self.shape, weighted)


@dataclass(frozen=True)
class SymmetricProbabilities:
    n_settings: int
    values: dict

    @property
    def negative(self) -> list[str]:
        return [k for k, v in self.values.items() if v < 0]

    @property
    def bell_violated(self) -> bool:
        return bool(self.negative)

    def __getitem__(self, label):
        return self.values[label]


def _pr(b: Behavior, ja, jb, ia, ib) -> Fraction:
    return b.prob((ia, ib), (ja, jb))


def derive_symmetric_probabilities(scenario: SymmetricSingletScenario,
                                   b: Behavior) -> SymmetricProbabilities:
    """Solve for the atom probabilities of the symmetric scenario.

    Two settings: ``P1 = Pr(++|12)`` and ``P2 = Pr(+-|12)``.  Three settings::

        2 P0 = Pr(++|23) + Pr(++|31) + Pr(++|12) - 1/2
        2 P1 = Pr(+-|31) + Pr(+-|12) - Pr(+-|23)        (and cyclic)

    Values may come out negative for behaviors outside the local polytope;
    that is the Bell violation.  The solved values are substituted back and
    must reproduce ``b`` exactly.

    Raises:
        ShapeMismatch: ``b`` is not on the scenario's shape.
        SymmetryViolated: ``b`` lacks same-sign correlation at equal
            settings, sign-reversal symmetry, or the mirror-atom structure.
    """
    if b.shape != scenario.shape:
        raise ShapeMismatch(f"scenario needs shape {scenario.shape}, got {b.shape}")
    n = scenario.n_settings
    half = Fraction(1, 2)
    for s in range(n):
        for ja, jb in ((PLUS, MINUS), (MINUS, PLUS)):
            if _pr(b, ja, jb, s, s) != 0:
                raise SymmetryViolated(
                    f"equal settings {s + 1},{s + 1} must give equal signs",
                    entry=((s, s), (ja, jb)))
    for i in b.shape.joint_inputs:
        for j in b.shape.joint_outputs:
            flipped = (1 - j[0], 1 - j[1])
            if b.prob(i, j) != b.prob(i, flipped):
                raise SymmetryViolated("probabilities must be invariant under reversing all signs",
                                       entry=(i, j))

    if n == 2:
        values = {"P1": _pr(b, PLUS, PLUS, 0, 1), "P2": _pr(b, PLUS, MINUS, 0, 1)}
    else:
        def pp(a, c):
            return _pr(b, PLUS, PLUS, a, c)

        def pm(a, c):
            return _pr(b, PLUS, MINUS, a, c)

        values = {"P0": (pp(1, 2) + pp(2, 0) + pp(0, 1) - half) / 2}
        for k in range(3):
            a, nb, c = k, (k + 1) % 3, (k + 2) % 3
            values[f"P{k + 1}"] = (pm(c, a) + pm(a, nb) - pm(nb, c)) / 2

    rebuilt = scenario.forward_table(values)
    for k_in, i in enumerate(b.shape.joint_inputs):
        for k_out, j in enumerate(b.shape.joint_outputs):
            if rebuilt[k_in][k_out] != b.table[k_in][k_out]:
                raise SymmetryViolated(
                    f"behavior is not generated by the symmetric atoms: Pr({j}|{i}) is "
                    f"{b.table[k_in][k_out]}, symmetric solution gives {rebuilt[k_in][k_out]}",
                    entry=(i, j))
    return SymmetricProbabilities(n, values)


_THREE = ExperimentShape.uniform(2, 3, 2)


def bell_functional(cyclic_index: int) -> BellInequality:
    """``Pr(+-|ca) + Pr(+-|ab) - Pr(+-|bc) >= 0`` with ``(a, b, c)`` the cyclic shift."""
    if cyclic_index not in (1, 2, 3):
        raise ValueError("cyclic_index must be 1, 2 or 3")
    a = cyclic_index - 1
    nb, c = (a + 1) % 3, (a + 2) % 3
    pm = (PLUS, MINUS)
    coeffs = {((c, a), pm): Fraction(1), ((a, nb), pm): Fraction(1), ((nb, c), pm): Fraction(-1)}
    return BellInequality(_THREE, coeffs, Fraction(0))


def bell_expression(b: Behavior, cyclic_index: int) -> Fraction:
    """Exact value of the cyclic Bell expression (twice a ``P`` value); negative means violation."""
    if b.shape != _THREE:
        raise ShapeMismatch(f"Bell expression needs shape {_THREE}, got {b.shape}")
    return bell_functional(cyclic_index).evaluate(b)


def expectation_from_behavior(b: Behavior, settings) -> Fraction:
    """Product expectation in the common-origin sign convention: ``4 Pr(+-|settings) - 1``."""
    if b.shape.n_parties != 2 or b.shape.output_sizes != (2, 2):
        raise ShapeMismatch("expectation needs two parties with two outcomes each")
    return 4 * b.prob(tuple(settings), (PLUS, MINUS)) - 1
