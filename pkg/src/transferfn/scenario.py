"""Chained Bell experiments and the search for backward-causal witnesses.

Two Bell experiments are linked by a classical relay: the outcome at A of
the first experiment selects the setting at A of the second.  If a
transfer-function atom of the first lets B's setting change A's outcome, and
an atom of the second lets A's setting change B's outcome, then B's setting in
the first experiment changes B's outcome in the second.  In the boosted
configuration that effect runs into the past light cone.

Party 0 is A and party 1 is B throughout.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .behavior import SCHEMA, TFDistribution, as_fraction, format_fraction, weak_signalling_probability
from .errors import InvalidInput, MarginalMismatch, RelayUndefined, ShapeMismatch
from .spacetime import (
    BoostedConfiguration,
    IntervalClass,
    PigeonholeResult,
    classify_interval,
    pigeonhole_infeasible,
)
from .tfcore import (
    ExperimentShape,
    TransferFunction,
    classify_signalling,
    format_transfer_function,
    parse_transfer_function,
)

A, B = 0, 1
DEFAULT_SEED = 0


class JointTFDistribution:
    """Distribution over tuples of transfer functions, one per experiment."""

    def __init__(self, shapes: Sequence[ExperimentShape], weights):
        self.shapes = tuple(shapes)
        if isinstance(weights, Mapping):
            weights = weights.items()
        merged = defaultdict(Fraction)
        for fs, w in weights:
            fs = tuple(fs)
            if len(fs) != len(self.shapes) or any(f.shape != s for f, s in zip(fs, self.shapes)):
                raise ShapeMismatch("joint atom does not match the experiment shapes")
            w = as_fraction(w)
            if w < 0:
                raise InvalidInput(f"negative weight {w}")
            merged[fs] += w
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise InvalidInput(f"joint weights sum to {total}, not 1")
        self.atoms = tuple(sorted((fs, w) for fs, w in merged.items() if w))

    @classmethod
    def product(cls, dists: Sequence[TFDistribution]) -> "JointTFDistribution":
        weights = []
        for combo in itertools.product(*(d.atoms for d in dists)):
            w = Fraction(1)
            for _, wi in combo:
                w *= wi
            weights.append((tuple(f for f, _ in combo), w))
        return cls([d.shape for d in dists], weights)

    @property
    def n_experiments(self) -> int:
        return len(self.shapes)

    def marginal(self, e: int) -> TFDistribution:
        return TFDistribution(self.shapes[e], [(fs[e], w) for fs, w in self.atoms])

    def pair_marginal(self, j: int, k: int) -> dict:
        out = defaultdict(Fraction)
        for fs, w in self.atoms:
            out[(fs[j], fs[k])] += w
        return dict(out)

    def __eq__(self, other):
        return isinstance(other, JointTFDistribution) and \
            (self.shapes, self.atoms) == (other.shapes, other.atoms)

    def __hash__(self):
        return hash((self.shapes, self.atoms))

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "shapes": [str(s) for s in self.shapes],
                "atoms": [{"tfs": [format_transfer_function(f) for f in fs], "w": format_fraction(w)}
                          for fs, w in self.atoms]}

    @classmethod
    def from_json(cls, data: dict) -> "JointTFDistribution":
        shapes = [ExperimentShape.parse(s) for s in data["shapes"]]
        weights = []
        for atom in data["atoms"]:
            if len(atom["tfs"]) != len(shapes):
                raise ShapeMismatch("joint atom has the wrong number of experiments")
            weights.append((tuple(parse_transfer_function(t, s) for t, s in zip(atom["tfs"], shapes)),
                            as_fraction(atom["w"])))
        return cls(shapes, weights)


def parse_relay(text: str) -> dict:
    """``"+:1,-:2"`` -> ``{0: 0, 1: 1}``; outcomes as symbols, settings 1-based."""
    relay = {}
    for item in text.split(","):
        try:
            outcome, setting = item.split(":")
            outcome = outcome.strip()
            key = "+-".index(outcome) if outcome in ("+", "-") else int(outcome)
            relay[key] = int(setting) - 1
        except ValueError:
            raise RelayUndefined(f"cannot parse relay entry {item!r}") from None
    return relay


@dataclass(frozen=True)
class BackwardCausalityWitness:
    """One atom pair and one context in which B's setting upstream flips B's outcome downstream."""

    first: TransferFunction
    second: TransferFunction
    a1_setting: int
    b2_setting: int
    b1_settings: tuple[int, int]
    a1_outcomes: tuple[int, int]
    a2_settings: tuple[int, int]
    b2_outcomes: tuple[int, int]
    weight: Fraction

    def sort_key(self):
        return (self.first, self.second, self.a1_setting, self.b2_setting, self.b1_settings)

    def reverify(self, relay: Mapping[int, int]) -> bool:
        """Re-run both chains from scratch and confirm the flip."""
        outs = []
        for b1 in self.b1_settings:
            ja1 = self.first((self.a1_setting, b1))[A]
            outs.append(self.second((relay[ja1], self.b2_setting))[B])
        return outs[0] != outs[1] and tuple(outs) == self.b2_outcomes

    def to_json(self) -> dict:
        return {"tf1": format_transfer_function(self.first),
                "tf2": format_transfer_function(self.second),
                "a1_setting": self.a1_setting + 1, "b2_setting": self.b2_setting + 1,
                "b1_settings": [s + 1 for s in self.b1_settings],
                "a1_outcomes": ["+-"[o] if o < 2 else str(o) for o in self.a1_outcomes],
                "a2_settings": [s + 1 for s in self.a2_settings],
                "b2_outcomes": ["+-"[o] if o < 2 else str(o) for o in self.b2_outcomes],
                "w": format_fraction(self.weight)}


@dataclass(frozen=True)
class ChainedScenario:
    """Bell experiments in chain order with a relay from each A outcome to the next A setting.

    ``relay`` maps A outcomes of the upstream experiment to (0-based) A
    settings of the downstream one.  Without ``joint`` the experiments are
    independent.  ``geometry`` and ``positions`` optionally place experiment
    ``e`` at boost index ``positions[e]`` of a boosted configuration.
    """

    experiments: tuple
    relay: dict
    joint: JointTFDistribution | None = None
    geometry: BoostedConfiguration | None = None
    positions: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "experiments", tuple(self.experiments))
        if len(self.experiments) < 2:
            raise InvalidInput("a chain needs at least two experiments")
        for d in self.experiments:
            if d.shape.n_parties != 2:
                raise ShapeMismatch("chained experiments must have two parties")
        if self.joint is not None:
            if self.joint.shapes != tuple(d.shape for d in self.experiments):
                raise ShapeMismatch("joint distribution shapes do not match the experiments")
            for e, d in enumerate(self.experiments):
                if self.joint.marginal(e) != d:
                    raise MarginalMismatch(f"joint marginal of experiment {e + 1} differs from it")
        if self.positions is not None and len(self.positions) != len(self.experiments):
            raise InvalidInput("one position per experiment is required")

    @classmethod
    def from_joint(cls, joint: JointTFDistribution, relay, **kwargs) -> "ChainedScenario":
        dists = tuple(joint.marginal(e) for e in range(joint.n_experiments))
        return cls(dists, relay, joint=joint, **kwargs)

    def pair_weights(self, j: int, k: int) -> dict:
        if self.joint is not None:
            return self.joint.pair_marginal(j, k)
        return {(f, g): w * v for f, w in self.experiments[j].atoms
                for g, v in self.experiments[k].atoms}

    def check_relay(self, j: int, k: int):
        up, down = self.experiments[j].shape, self.experiments[k].shape
        for outcome in range(up.output_sizes[A]):
            if outcome not in self.relay:
                raise RelayUndefined(f"relay has no setting for A outcome {outcome}")
            if not 0 <= self.relay[outcome] < down.input_sizes[A]:
                raise RelayUndefined(f"relay sends outcome {outcome} to invalid setting "
                                     f"{self.relay[outcome] + 1}")


@dataclass
class ChainResult:
    pair: tuple
    witnesses: list
    probability: object
    mode: str = "exhaustive"
    b_to_a_upstream: Fraction | None = None
    a_to_b_downstream: Fraction | None = None
    geometry: dict | None = field(default=None)

    def to_json(self) -> dict:
        prob = (format_fraction(self.probability) if isinstance(self.probability, Fraction)
                else float(self.probability))
        out = {"schema": SCHEMA, "pair": [p + 1 for p in self.pair], "mode": self.mode,
               "probability": prob, "witness_count": len(self.witnesses),
               "witnesses": [w.to_json() for w in self.witnesses]}
        if self.b_to_a_upstream is not None:
            out["weak_signalling"] = {"upstream_B_to_A": format_fraction(self.b_to_a_upstream),
                                      "downstream_A_to_B": format_fraction(self.a_to_b_downstream)}
        if self.geometry is not None:
            out["geometry"] = self.geometry
        return out


def _contexts(up: ExperimentShape, down: ExperimentShape):
    """``(a1_setting, b2_setting)`` pairs, the all-zero default first."""
    return list(itertools.product(range(up.input_sizes[A]), range(down.input_sizes[B])))


def find_witness(f1: TransferFunction, f2: TransferFunction, relay: Mapping[int, int],
                 weight: Fraction = Fraction(1)) -> BackwardCausalityWitness | None:
    """First context (default context first) where sweeping B's upstream setting flips B downstream."""
    for a1, b2 in _contexts(f1.shape, f2.shape):
        runs = []
        for b1 in range(f1.shape.input_sizes[B]):
            ja1 = f1((a1, b1))[A]
            a2 = relay[ja1]
            runs.append((b1, ja1, a2, f2((a2, b2))[B]))
        for r, s in itertools.combinations(runs, 2):
            if r[3] != s[3]:
                return BackwardCausalityWitness(
                    f1, f2, a1, b2, (r[0], s[0]), (r[1], s[1]), (r[2], s[2]), (r[3], s[3]), weight)
    return None


def chain_geometry(s: ChainedScenario, j: int, k: int) -> dict | None:
    """Cone relations along the causal chain of the pair, if geometry is attached."""
    if s.geometry is None or s.positions is None:
        return None
    up, down = s.geometry.experiment(s.positions[j]), s.geometry.experiment(s.positions[k])
    return {
        "b1_prep_to_a1_meas": classify_interval(up.prep_b, up.meas_a).value,
        "a1_meas_to_a2_prep": classify_interval(up.meas_a, down.prep_a).value,
        "a2_prep_to_b2_meas": classify_interval(down.prep_a, down.meas_b).value,
        "b2_meas_from_b1_prep": classify_interval(up.prep_b, down.meas_b).value,
        "b2_meas_from_b1_meas": classify_interval(up.meas_b, down.meas_b).value,
    }


def detect_backward_causality(s: ChainedScenario, pair: tuple = (0, 1), mode: str = "exhaustive",
                              samples: int = 10_000, seed: int = DEFAULT_SEED) -> ChainResult:
    """Sweep all positively weighted atom pairs of experiments ``pair = (j, k)``.

    In ``exhaustive`` mode the probability is the exact total weight of
    witnessing atom pairs.  ``monte-carlo`` draws ``samples`` atom pairs with
    a seeded generator and returns a float estimate.  In both modes the
    witness list is sorted canonically.

    Raises:
        RelayUndefined: the relay is not a total map into valid settings.
    """
    j, k = pair
    s.check_relay(j, k)
    weights = s.pair_weights(j, k)
    upstream = weak_signalling_probability(s.experiments[j], (B, A))
    downstream = weak_signalling_probability(s.experiments[k], (A, B))
    geometry = chain_geometry(s, j, k)
    if mode == "exhaustive":
        witnesses = []
        for (f1, f2), w in sorted(weights.items()):
            found = find_witness(f1, f2, s.relay, w)
            if found is not None:
                witnesses.append(found)
        prob = sum((w.weight for w in witnesses), Fraction(0))
        return ChainResult(pair, witnesses, prob, mode, upstream, downstream, geometry)
    if mode == "monte-carlo":
        keys = sorted(weights)
        p = np.array([float(weights[key]) for key in keys])
        rng = np.random.default_rng(seed)
        draws = rng.choice(len(keys), size=samples, p=p / p.sum())
        cache = {}
        hits = 0
        for d in draws:
            if d not in cache:
                cache[d] = find_witness(*keys[d], s.relay, weights[keys[d]])
            hits += cache[d] is not None
        witnesses = sorted((w for w in cache.values() if w is not None), key=BackwardCausalityWitness.sort_key)
        return ChainResult(pair, witnesses, hits / samples, "monte-carlo (probabilistic estimate)",
                           upstream, downstream, geometry)
    raise ValueError(f"unknown mode {mode!r}")


def detect_all_pairs(s: ChainedScenario) -> dict:
    """Exhaustive detection for every chain-ordered pair ``j < k``."""
    return {(j, k): detect_backward_causality(s, (j, k))
            for j, k in itertools.combinations(range(len(s.experiments)), 2)}


def interchange_symmetry(d: TFDistribution) -> dict:
    """Weak signalling probability in both directions, and whether they match."""
    ab = weak_signalling_probability(d, (A, B))
    ba = weak_signalling_probability(d, (B, A))
    return {"A_to_B": ab, "B_to_A": ba, "symmetric": ab == ba}


def default_atoms(shape: ExperimentShape | None = None) -> tuple[TransferFunction, TransferFunction]:
    """``(signalling, null)`` atoms: the two-way copier ``j_A=i_B, j_B=i_A`` and constant ``+``."""
    shape = shape or ExperimentShape.parse("2x2:2x2")
    signal = TransferFunction.from_callable(shape, lambda i: (i[B], i[A]))
    null = TransferFunction.from_callable(shape, lambda i: (0, 0))
    return signal, null


@dataclass
class EscapeVerdict:
    """Can ``m`` experiments keep their signalling atoms from ever co-occurring?

    ``status`` is ``impossible`` when the pigeonhole bound forbids it,
    ``achieved`` / ``not-achieved`` when a given joint distribution does or
    does not avoid co-signalling, and ``possible`` with ``construction``
    when no joint was given and one was built.
    """

    status: str
    p: Fraction
    m: int
    pigeonhole: PigeonholeResult
    co_signalling: dict | None = None
    construction: JointTFDistribution | None = None

    def to_json(self) -> dict:
        out = {"schema": SCHEMA, "status": self.status, "p": format_fraction(self.p), "M": self.m,
               "pigeonhole": self.pigeonhole.to_json()}
        if self.co_signalling is not None:
            out["co_signalling"] = [{"pair": [j + 1, k + 1], "p": format_fraction(v)}
                                    for (j, k), v in sorted(self.co_signalling.items())]
        if self.construction is not None:
            out["construction"] = self.construction.to_json()
        return out


def _is_signalling(f: TransferFunction) -> bool:
    return not classify_signalling(f).is_null


def co_signalling(joint: JointTFDistribution) -> dict:
    """Probability that the atoms of experiments ``j`` and ``k`` are both signalling."""
    flags = [(tuple(_is_signalling(f) for f in fs), w) for fs, w in joint.atoms]
    return {(j, k): sum((w for fl, w in flags if fl[j] and fl[k]), Fraction(0))
            for j, k in itertools.combinations(range(joint.n_experiments), 2)}


def signalling_marginals(joint: JointTFDistribution) -> list[Fraction]:
    return [sum((w for fs, w in joint.atoms if _is_signalling(fs[e])), Fraction(0))
            for e in range(joint.n_experiments)]


def anticorrelation_escape_check(p_s, m: int | None = None, joint: JointTFDistribution | None = None,
                                 atoms: tuple | None = None) -> EscapeVerdict:
    """Check whether correlated hidden variables can avoid all co-signalling.

    With ``joint`` given, its per-experiment signalling marginals must all
    equal ``p_s``; the verdict reports its pairwise co-signalling.  Without
    it, a disjoint construction is built from ``atoms = (signalling, null)``
    whenever the pigeonhole bound permits.

    Raises:
        MarginalMismatch: a marginal of ``joint`` differs from ``p_s``.
    """
    p = as_fraction(p_s)
    if joint is not None:
        if m is not None and m != joint.n_experiments:
            raise InvalidInput(f"M={m} but the joint covers {joint.n_experiments} experiments")
        m = joint.n_experiments
    if m is None:
        raise InvalidInput("need M or a joint distribution")
    ph = pigeonhole_infeasible(p, m)
    if joint is not None:
        for e, q in enumerate(signalling_marginals(joint)):
            if q != p:
                raise MarginalMismatch(f"experiment {e + 1} signals with probability {q}, expected {p}")
        co = co_signalling(joint)
        avoided = all(v == 0 for v in co.values())
        if ph.infeasible:
            if avoided:
                raise AssertionError("pigeonhole bound contradicted; this is a bug")
            return EscapeVerdict("impossible", p, m, ph, co)
        return EscapeVerdict("achieved" if avoided else "not-achieved", p, m, ph, co)
    if ph.infeasible:
        return EscapeVerdict("impossible", p, m, ph)
    signal, null = atoms or default_atoms()
    shapes = [signal.shape] * m
    weights = [(tuple(signal if e == c else null for e in range(m)), p) for c in range(m)]
    weights.append((tuple([null] * m), 1 - m * p))
    construction = JointTFDistribution(shapes, weights)
    return EscapeVerdict("possible", p, m, ph, co_signalling(construction), construction)
