"""Independent reference computations used to check the library.

None of these call into the code under test except for plain data types.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from transferfn.behavior import TFDistribution
from transferfn.tfcore import ExperimentShape, TransferFunction


# --- signalling census from raw truth tables ----------------------------------

def census_2x2_binary():
    """Classify all 4^4 maps {0,1}^2 -> {0,1}^2 by direct table comparison."""
    inputs = [(0, 0), (0, 1), (1, 0), (1, 1)]
    counts = {"3a": 0, "3b": 0, "3c": 0, "3d": 0}
    for code in range(4 ** 4):
        table = {}
        for k, i in enumerate(inputs):
            out = (code // 4 ** (3 - k)) % 4
            table[i] = (out // 2, out % 2)
        a_to_b = any(table[(0, ib)][1] != table[(1, ib)][1] for ib in (0, 1))
        b_to_a = any(table[(ia, 0)][0] != table[(ia, 1)][0] for ia in (0, 1))
        counts[{(False, False): "3a", (True, False): "3b",
                (False, True): "3c", (True, True): "3d"}[(a_to_b, b_to_a)]] += 1
    return counts


# --- local polytope membership -------------------------------------------------

def correlator(b, x, y):
    return sum((-1) ** (ja + jb) * b.prob((x, y), (ja, jb)) for ja in (0, 1) for jb in (0, 1))


def chsh_local(b):
    """Exact local-polytope test on two binary settings and outcomes.

    A no-signalling behavior of this size is local iff all eight CHSH
    inequalities hold; signalling behaviors are never local.
    """
    for x in (0, 1):
        ma = [sum(b.prob((x, y), (0, jb)) for jb in (0, 1)) for y in (0, 1)]
        mb = [sum(b.prob((y, x), (ja, 0)) for ja in (0, 1)) for y in (0, 1)]
        if ma[0] != ma[1] or mb[0] != mb[1]:
            return False
    e = {(x, y): correlator(b, x, y) for x in (0, 1) for y in (0, 1)}
    for odd in itertools.product((0, 1), repeat=2):
        s = sum(e[(x, y)] * (-1 if (x, y) == odd else 1) for x in (0, 1) for y in (0, 1))
        if abs(s) > 2:
            return False
    return True


def _solve_exact(cols, rhs):
    """Basic solution of ``sum_c x_c cols[c] = rhs`` by Gauss-Jordan, or None."""
    m, n = len(rhs), len(cols)
    aug = [[Fraction(cols[c][r]) for c in range(n)] + [Fraction(rhs[r])] for r in range(m)]
    pivots = []
    row = 0
    for c in range(n):
        piv = next((r for r in range(row, m) if aug[r][c] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        lead = aug[row][c]
        aug[row] = [v / lead for v in aug[row]]
        for r in range(m):
            if r != row and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * p for a, p in zip(aug[r], aug[row])]
        pivots.append(c)
        row += 1
        if row == m:
            break
    if any(all(v == 0 for v in aug[r][:n]) and aug[r][n] != 0 for r in range(m)):
        return None
    x = [Fraction(0)] * n
    for r, c in enumerate(pivots):
        x[c] = aug[r][n]
    return x


def _rank(cols):
    rows = [list(map(Fraction, r)) for r in zip(*cols)]
    rank = 0
    for c in range(len(cols)):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * p for a, p in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def caratheodory_member(b, atoms):
    """Brute force over column bases: is ``b`` a convex mix of the atoms?

    A feasible point has a basic feasible solution supported on linearly
    independent columns, which extends to a basis of the column space.
    """
    shape = b.shape
    target = [p for row in b.table for p in row] + [1]

    def column(f):
        return [1 if f.table[ki] == j else 0
                for ki in range(shape.n_inputs) for j in shape.joint_outputs] + [1]

    cols = [column(f) for f in atoms]
    for subset in itertools.combinations(range(len(atoms)), _rank(cols)):
        x = _solve_exact([cols[c] for c in subset], target)
        if x is not None and all(v >= 0 for v in x):
            return True
    return False


def chsh_value(b):
    return correlator(b, 0, 0) + correlator(b, 0, 1) + correlator(b, 1, 0) - correlator(b, 1, 1)


def float_local_visibility(quantum_table, noise_table, atoms, shape):
    """Largest ``t`` with ``t q + (1-t) u`` local, by floating-point LP."""
    from scipy.optimize import linprog

    rows = shape.n_inputs * shape.n_outputs
    a_atoms = np.zeros((rows + 1, len(atoms)))
    for c, f in enumerate(atoms):
        for ki, j in enumerate(f.table):
            a_atoms[ki * shape.n_outputs + shape.output_index(j), c] = 1
        a_atoms[rows, c] = 1
    q = np.array([float(p) for row in quantum_table for p in row] + [1.0])
    u = np.array([float(p) for row in noise_table for p in row] + [1.0])
    # variables: atom weights, then t; a w - t (q - u) = u
    a_eq = np.hstack([a_atoms, -(q - u)[:, None]])
    cost = np.zeros(len(atoms) + 1)
    cost[-1] = -1
    res = linprog(cost, A_eq=a_eq, b_eq=u, bounds=[(0, None)] * len(atoms) + [(0, 1)],
                  method="highs")
    assert res.success
    return res.x[-1]


# --- singlet statistics from spin operators ------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def spin_eigenprojectors(theta):
    """``(P+, P-)`` of ``cos(theta) Z + sin(theta) X`` by diagonalisation."""
    op = math.cos(theta) * PAULI_Z + math.sin(theta) * PAULI_X
    vals, vecs = np.linalg.eigh(op)
    plus = vecs[:, [int(np.argmax(vals))]]
    minus = vecs[:, [int(np.argmin(vals))]]
    return plus @ plus.conj().T, minus @ minus.conj().T


def singlet_table(theta_a, theta_b):
    """``Pr(ja, jb)`` with B's angle measured from the opposite zero."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    pa = spin_eigenprojectors(theta_a)
    pb = spin_eigenprojectors(theta_b + math.pi)
    return np.array([[np.real(psi.conj() @ np.kron(pa[ja], pb[jb]) @ psi) for jb in (0, 1)]
                     for ja in (0, 1)])


# --- hypothesis strategies ------------------------------------------------------

SMALL_SHAPES = ["1x2", "2x2", "1x2:1x2", "2x2:1x2", "1x2:2x2", "2x2:2x2", "1x3:2x2",
                "2x1:2x2", "3x2:1x2", "1x1:1x1", "2x2:1x1:1x2"]


@st.composite
def shapes(draw, choices=SMALL_SHAPES):
    return ExperimentShape.parse(draw(st.sampled_from(choices)))


@st.composite
def transfer_functions(draw, shape):
    outs = shape.joint_outputs
    return TransferFunction(shape, tuple(draw(st.sampled_from(outs)) for _ in range(shape.n_inputs)))


@st.composite
def distributions(draw, shape, atoms=None, max_atoms=5):
    """Random exact distribution over ``atoms`` (or arbitrary functions)."""
    if atoms is None:
        fs = draw(st.lists(transfer_functions(shape), min_size=1, max_size=max_atoms))
    else:
        fs = draw(st.lists(st.sampled_from(atoms), min_size=1, max_size=max_atoms))
    ws = draw(st.lists(st.integers(1, 20), min_size=len(fs), max_size=len(fs)))
    total = sum(ws)
    return TFDistribution(shape, [(f, Fraction(w, total)) for f, w in zip(fs, ws)])


rationals01 = st.fractions(min_value=0, max_value=1, max_denominator=30)


# --- joint distributions with prescribed signalling marginals -------------------

def sample_joint(rng, m, p, signalling_atoms, null_atoms, max_atoms=4):
    """Random joint over ``m`` experiments whose atoms signal with probability ``p`` each.

    A random law over signalling subsets is averaged over cyclic shifts (so
    every experiment has the same marginal ``q``), then mixed with the empty
    or the full subset to bring ``q`` to exactly ``p``.  Each experiment
    draws its atoms from its own support of at most ``max_atoms`` functions.
    """
    from transferfn.scenario import JointTFDistribution

    subsets = [s for s in itertools.product((0, 1), repeat=m) if any(s)]
    chosen = rng.sample(subsets, rng.randint(1, min(4, len(subsets))))
    law = {}
    for s in chosen:
        w = Fraction(rng.randint(1, 5))
        for shift in range(m):
            key = s[shift:] + s[:shift]
            law[key] = law.get(key, Fraction(0)) + w
    total = sum(law.values())
    law = {s: w / total for s, w in law.items()}
    q = sum(w * sum(s) for s, w in law.items()) / m
    if q >= p:
        lam, filler = p / q, (0,) * m
    else:
        lam, filler = (1 - p) / (1 - q), (1,) * m
    law = {s: w * lam for s, w in law.items()}
    law[filler] = law.get(filler, Fraction(0)) + 1 - lam

    supports = []
    for _ in range(m):
        n_sig = rng.randint(1, max_atoms - 1)
        supports.append((rng.sample(signalling_atoms, n_sig),
                         rng.sample(null_atoms, rng.randint(1, max_atoms - n_sig))))
    weights = []
    for s, w in law.items():
        if w == 0:
            continue
        # split each cell in two to vary atoms inside a signalling pattern
        for part in (Fraction(1, 3), Fraction(2, 3)):
            atoms = tuple(rng.choice(supports[e][0] if s[e] else supports[e][1]) for e in range(m))
            weights.append((atoms, w * part))
    shape = signalling_atoms[0].shape
    return JointTFDistribution([shape] * m, weights)
