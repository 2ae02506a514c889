"""Spin-singlet behaviors from an explicit two-qubit state vector.

Party B measures its angles from a zero pointing opposite to A's, so equal
settings give equal signs.  The probabilities come out of projector algebra
on the 4-dimensional singlet. The closed forms ``cos^2(d/2)`` / ``sin^2(d/2)``
are kept only as a cross-check.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .behavior import Behavior
from .errors import InvalidInput, ShapeMismatch
from .localpoly import DEFAULT_DENOMINATOR_BOUND, rationalize
from .tfcore import ExperimentShape

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)

# the angle triple of the worked three-setting example
THIRDS = (0.0, -math.pi / 3, math.pi / 3)

# sin^2(n pi / 12) for the n whose value is rational
_EXACT_SIN2 = {0: Fraction(0), 2: Fraction(1, 4), 3: Fraction(1, 2), 4: Fraction(3, 4),
               6: Fraction(1), 8: Fraction(3, 4), 9: Fraction(1, 2), 10: Fraction(1, 4)}


def rotation(theta: float) -> np.ndarray:
    """``exp(-i theta sigma_y / 2)``: turns the z axis by ``theta`` in the x-z plane."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def spin_projector(theta: float, outcome: int) -> np.ndarray:
    """Projector onto spin ``+`` (outcome 0) or ``-`` (outcome 1) along ``theta``."""
    basis = np.eye(2, dtype=complex)[outcome]
    v = rotation(theta) @ basis
    return np.outer(v, v.conj())


def joint_probabilities(theta_a: float, theta_b: float) -> np.ndarray:
    """``out[ja, jb]`` for the singlet, B's angle measured from the reversed zero."""
    out = np.empty((2, 2))
    for ja in range(2):
        pa = spin_projector(theta_a, ja)
        for jb in range(2):
            pb = spin_projector(theta_b + math.pi, jb)
            out[ja, jb] = np.real(SINGLET.conj() @ np.kron(pa, pb) @ SINGLET)
    return out


def closed_form_probabilities(theta_a: float, theta_b: float) -> np.ndarray:
    d = theta_a - theta_b
    same = math.cos(d / 2) ** 2 / 2
    diff = math.sin(d / 2) ** 2 / 2
    return np.array([[same, diff], [diff, same]])


def exact_opposite_probability(delta: float, atol: float = 1e-9) -> Fraction:
    """Exact ``sin^2(delta/2)`` for ``delta`` a multiple of pi/3 or pi/2.

    Raises:
        InvalidInput: for any other angle difference.
    """
    steps = delta / (math.pi / 6)
    n = round(steps)
    if abs(steps - n) > atol or (n % 2 and n % 3):
        raise InvalidInput(
            f"angle difference {delta!r} is not a multiple of pi/3 or pi/2; "
            "drop exact mode to rationalize instead")
    return _EXACT_SIN2[n % 12]


def _check_angles(angles) -> list[float]:
    angles = [float(a) for a in angles]
    if not angles or not all(math.isfinite(a) for a in angles):
        raise InvalidInput("angles must be a non-empty list of finite reals")
    return angles


def singlet_behavior(angles: Sequence[float], exact: bool = False,
                     max_denominator: int = DEFAULT_DENOMINATOR_BOUND,
                     shape: ExperimentShape | None = None) -> Behavior:
    """Exact-rational behavior of the singlet at the shared angle list.

    Settings index into ``angles`` for both parties.  With ``exact=True``
    every angle difference must be a multiple of pi/3 or pi/2, and the
    probabilities are exact.  Otherwise the state-vector probability of
    opposite signs is rationalized with denominator at most
    ``max_denominator``, and the result is the behavior nearest to it that
    keeps uniform marginals.
    """
    angles = _check_angles(angles)
    expected = ExperimentShape.uniform(2, len(angles), 2)
    if shape is not None and shape != expected:
        raise ShapeMismatch(f"singlet behavior needs shape {expected}, got {shape}")
    half = Fraction(1, 2)
    rows = []
    for ia, ib in expected.joint_inputs:
        if exact:
            opposite = exact_opposite_probability(angles[ia] - angles[ib])
        else:
            p = joint_probabilities(angles[ia], angles[ib])
            opposite = rationalize(float(p[0, 1] + p[1, 0]), max_denominator)
            opposite = min(max(opposite, Fraction(0)), Fraction(1))
        diff = opposite * half
        same = half - diff
        rows.append((same, diff, diff, same))
    return Behavior(expected, tuple(rows))


def float_behavior(angles: Sequence[float]) -> np.ndarray:
    """Unrationalized state-vector table ``out[ia, ib, ja, jb]``."""
    angles = _check_angles(angles)
    n = len(angles)
    out = np.empty((n, n, 2, 2))
    for ia in range(n):
        for ib in range(n):
            out[ia, ib] = joint_probabilities(angles[ia], angles[ib])
    return out
