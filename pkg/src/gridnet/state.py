"""GHZ-diagonal state algebra.

A GHZ-diagonal state on ``n`` qubits is stored as a probability vector of
length ``2**n`` over basis labels ``Z_0^j X_1^{x_1} ... X_{n-1}^{x_{n-1}}|GHZ_n>``.
The label is packed into an integer: bit 0 holds ``j``, bit ``q`` holds
``x_q``.  Qubit 0 is the reference qubit and carries no X bit; an X on qubit
0 is equivalent to X on every other qubit.

All maps used by the protocol (GHZ projections, X measurements, Pauli
corrections) are linear over GF(2) on these labels, which is what keeps the
family closed and lets outcomes be canonicalized.
"""
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import kernels

NEG_TOL = 1e-12
SUM_TOL = 1e-9


class StateError(ValueError):
    """Domain error in the state algebra."""


class ProtocolViolation(RuntimeError):
    """A swap was requested that the protocol rules should have prevented."""


@dataclass(frozen=True)
class WernerParams:
    fidelity: float
    weight: float

    def __post_init__(self):
        if not 0.25 - 1e-15 <= self.fidelity <= 1 + 1e-15:
            raise StateError(f"fidelity {self.fidelity} outside [1/4, 1]")
        if abs(self.weight - (4 * self.fidelity - 1) / 3) > 1e-12:
            raise StateError("weight and fidelity are inconsistent")


def werner_from_fidelity(fidelity):
    """Werner parameters for overlap ``fidelity`` with |Phi+>."""
    fidelity = float(fidelity)
    if not 0.25 <= fidelity <= 1.0:
        raise StateError(f"fidelity {fidelity} outside [1/4, 1]")
    return WernerParams(fidelity, (4 * fidelity - 1) / 3)


def werner_from_weight(weight):
    weight = float(weight)
    if not 0.0 <= weight <= 1.0:
        raise StateError(f"weight {weight} outside [0, 1]")
    return WernerParams((3 * weight + 1) / 4, weight)


def _clean(coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.min(initial=0.0) < -NEG_TOL:
        raise StateError(f"negative coefficient {coeffs.min()}")
    coeffs = np.clip(coeffs, 0.0, None)
    total = coeffs.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise StateError(f"coefficients sum to {total}, expected 1")
    return coeffs / total


@dataclass(frozen=True, eq=False)
class GHZDiagonalState:
    """Immutable GHZ-diagonal state on the memories ``qubits``.

    ``frame`` is the packed label of the Pauli correction that maps the
    stored (canonical, all-zeros outcome) state to the physical state of the
    branch that actually occurred.
    """

    qubits: tuple
    coeffs: np.ndarray
    frame: int = 0
    _checked: bool = field(default=False, repr=False)

    def __post_init__(self):
        qubits = tuple(self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(set(qubits)) != len(qubits):
            raise StateError("duplicate qubit ids")
        coeffs = self.coeffs if self._checked else _clean(self.coeffs)
        if coeffs.shape != (1 << len(qubits),):
            raise StateError(
                f"{len(qubits)} qubits need {1 << len(qubits)} coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def num_qubits(self):
        return len(self.qubits)

    @property
    def pauli_frame(self):
        """Per-qubit corrections as ``(qubit, 'X' | 'Z')`` pairs."""
        ops = []
        if self.frame & 1:
            ops.append((self.qubits[0], "Z"))
        for q in range(1, self.num_qubits):
            if (self.frame >> q) & 1:
                ops.append((self.qubits[q], "X"))
        return tuple(ops)

    def position(self, qubit):
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise StateError(f"qubit {qubit!r} not in state") from None

    def physical(self):
        """Coefficients of the uncorrected post-measurement branch."""
        idx = np.arange(self.coeffs.size) ^ self.frame
        return self.coeffs[idx]

    def resolved(self):
        """The state after the consumers apply the recorded corrections."""
        return GHZDiagonalState(self.qubits, self.coeffs, 0, _checked=True)

    def with_qubits(self, qubits):
        return GHZDiagonalState(tuple(qubits), self.coeffs, self.frame, _checked=True)

    def apply_pauli(self, qubit, pauli):
        """Conjugate by a single-qubit Pauli; returns a new state."""
        shift = pauli_label(self.num_qubits, self.position(qubit), pauli)
        idx = np.arange(self.coeffs.size) ^ shift
        return GHZDiagonalState(self.qubits, self.coeffs[idx], self.frame, _checked=True)

    def __repr__(self):
        return f"GHZDiagonalState(qubits={self.qubits}, coeffs={np.round(self.coeffs, 6)})"


def pauli_label(n, position, pauli):
    """Packed label shift produced by a Pauli on qubit ``position``."""
    pauli = pauli.upper()
    shift = 0
    if pauli in ("Z", "Y"):
        shift ^= 1
    if pauli in ("X", "Y"):
        shift ^= ((1 << n) - 2) if position == 0 else (1 << position)
    return shift


def _state(qubits, coeffs, frame=0):
    return GHZDiagonalState(tuple(qubits), coeffs, frame)


def bell_diagonal(weight, qubits=(0, 1)):
    """Werner state with mixing ``weight`` as a Bell-diagonal state.

    Label order: Phi+, Phi-, Psi+, Psi-.
    """
    w = werner_from_weight(weight).weight
    c = np.full(4, (1 - w) / 4)
    c[0] += w
    return _state(qubits, c)


# -- single-label maps (used for Pauli frames) ---------------------------------

def _bit(label, q):
    return (label >> q) & 1 if q else 0


def drop_label(label, n, s):
    """Image of one label under the X measurement of qubit ``s``."""
    ref = 1 if s == 0 else 0
    ref_bit = _bit(label, ref)
    out = label & 1
    t = 0
    for q in range(n):
        if q == s:
            continue
        if t:
            out |= (_bit(label, q) ^ ref_bit) << t
        t += 1
    return out


def fuse_label(labels, ns, positions):
    """Image of a tuple of input labels under a canonical GHZ projection."""
    phase = 0
    y = 0
    offset = 0
    for label, n, s in zip(labels, ns, positions):
        phase ^= label & 1
        node_bit = _bit(label, s)
        for q in range(n):
            if q == s:
                continue
            y |= (_bit(label, q) ^ node_bit) << offset
            offset += 1
    if offset and y & 1:
        y ^= (1 << offset) - 1
    return phase | (y & ~1)


# -- operations ----------------------------------------------------------------

def _class_size(n, k, m):
    """Number of ``m``-subsets of ``n`` qubits covering a weight-``k`` pattern or its complement."""
    if m == n:
        return 1

    def c(a, b):
        return comb(a, b) if 0 <= b <= a else 0

    return c(n - k, m - k) + c(k, m - (n - k))


def _equal_class_coefficient(n, k, j, w):
    total = w**n if (k == 0 and j == 0) else 0.0
    for m in range(1, n + 1):
        total += w ** (n - m) * (1 - w) ** m * _class_size(n, k, m) / 2 ** min(m + 1, n)
    return total


def ghz_swap_equal(n, w, qubits=None):
    """GHZ(n) projection of one half of ``n`` Werner pairs of equal weight ``w``.

    Each label's coefficient depends only on its X-weight class
    ``k = min(#X, n - #X)`` and, for ``k = 0``, on the phase bit.  The class
    coefficient sums, over the number ``m`` of inputs that contributed their
    maximally mixed part, the fraction of those ``m``-subsets whose support
    covers the label's X pattern.
    """
    if n < 2:
        raise StateError("a GHZ swap needs at least two pairs")
    w = werner_from_weight(w).weight
    table = {}
    coeffs = np.empty(1 << n)
    for idx in range(1 << n):
        xs = bin(idx >> 1).count("1")
        k = min(xs, n - xs)
        j = idx & 1 if k == 0 else 0
        if (k, j) not in table:
            table[k, j] = _equal_class_coefficient(n, k, j, w)
        coeffs[idx] = table[k, j]
    return _state(range(n) if qubits is None else qubits, coeffs)


def ghz_swap_mixed(weights, qubits=None):
    """GHZ projection of Werner pairs with individual weights.

    Sums over the subset ``M`` of pairs that contributed their maximally
    mixed part.  For nonempty ``M`` the output is uniform over the labels
    whose X pattern (or its complement) is supported on ``M``.
    """
    weights = [werner_from_weight(w).weight for w in weights]
    n = len(weights)
    if n < 2:
        raise StateError("a GHZ swap needs at least two pairs")
    full = (1 << n) - 1
    idx = np.arange(1 << n)
    pattern = idx & ~1
    coeffs = np.zeros(1 << n)
    for subset in range(1 << n):
        prob = 1.0
        for i, w in enumerate(weights):
            prob *= (1 - w) if (subset >> i) & 1 else w
        if prob == 0.0:
            continue
        if subset == 0:
            coeffs[0] += prob
            continue
        outside = full & ~subset
        covered = ((pattern & outside) == 0) | ((~pattern & full & outside) == 0)
        m = bin(subset).count("1")
        coeffs[covered] += prob / 2 ** min(m + 1, n)
    return _state(range(n) if qubits is None else qubits, coeffs)


def measure_x(state, qubit, outcome=0):
    """X-basis measurement of ``qubit``, any size down to a single qubit.

    Outcome 1 (|->) is returned in canonical form with a Z recorded in the
    frame.  Measuring the last qubit returns ``None``.
    """
    s = state.position(qubit)
    n = state.num_qubits
    if n == 1:
        return None
    coeffs = kernels.measure_x(np.ascontiguousarray(state.coeffs), n, s)
    frame = drop_label(state.frame ^ (outcome & 1), n, s)
    qubits = state.qubits[:s] + state.qubits[s + 1 :]
    return GHZDiagonalState(qubits, _renorm(coeffs), frame, _checked=True)


def x_measure(state, position, outcome=0):
    """Measure the qubit at ``position`` (0-based) in the X basis.

    Valid for states of three or more qubits; the result has one fewer qubit.
    """
    if state.num_qubits < 3:
        raise StateError("x_measure needs at least three qubits")
    if not 0 <= position < state.num_qubits:
        raise StateError(f"position {position} out of range")
    if outcome not in (0, 1):
        raise StateError("outcome must be 0 or 1")
    return measure_x(state, state.qubits[position], outcome)


def fuse(states, node_qubits, outcome=0):
    """Project one qubit from each state onto the GHZ(m) basis.

    ``node_qubits[k]`` is the qubit of ``states[k]`` that is measured.  The
    GHZ(m) outcome is a packed label over the measured qubits in the given
    order; every outcome occurs with probability ``2**-m`` and the result is
    stored canonically with the correction folded into the frame.  Returns
    ``None`` when no unmeasured qubit remains.
    """
    if len(states) != len(node_qubits):
        raise StateError("one node qubit per state is required")
    m = len(states)
    if m < 2:
        raise StateError("a GHZ swap needs at least two memories")
    ns, positions, frames, qubits = [], [], [], []
    for k, (st, q) in enumerate(zip(states, node_qubits)):
        n = st.num_qubits
        s = st.position(q)
        shift = st.frame
        if k == 0 and outcome & 1:
            shift ^= 1
        elif k and (outcome >> k) & 1:
            shift ^= pauli_label(n, s, "X")
        ns.append(n)
        positions.append(s)
        frames.append(shift)
        qubits.extend(st.qubits[:s] + st.qubits[s + 1 :])
    if len(set(qubits)) != len(qubits):
        raise ProtocolViolation("fused states share an unmeasured qubit")
    if not qubits:
        return None
    coeffs = kernels.fuse(
        [np.ascontiguousarray(st.coeffs) for st in states], ns, positions
    )
    frame = fuse_label(frames, ns, positions)
    return GHZDiagonalState(tuple(qubits), _renorm(coeffs), frame, _checked=True)


def merge_swap(main, incident, node_memories, outcome=0):
    """GHZ swap of the main state with the Bell pairs incident on one node.

    ``node_memories`` are the memory ids held by the swapping node.  The
    output lists the surviving main-state qubits first, then the far end of
    each incident pair.
    """
    node_memories = set(node_memories)
    in_main = [q for q in main.qubits if q in node_memories]
    if len(in_main) != 1:
        raise ProtocolViolation(
            f"main state holds {len(in_main)} memories of the swapping node; expected 1"
        )
    nodes = [in_main[0]]
    for st in incident:
        if st.num_qubits != 2:
            raise StateError("incident states must be two-qubit")
        at_node = [q for q in st.qubits if q in node_memories]
        if len(at_node) != 1:
            raise StateError("each incident pair needs exactly one memory at the node")
        nodes.append(at_node[0])
    if not 2 <= len(nodes) <= 4:
        raise StateError(f"swap arity {len(nodes)} outside [2, 4]")
    return fuse([main, *incident], nodes, outcome)


def _renorm(coeffs):
    coeffs = np.clip(coeffs, 0.0, None)
    return coeffs / coeffs.sum()


def shannon_entropy(probs):
    """Entropy in bits with 0 log 0 = 0."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def coherent_information(state):
    """``1 - H(coeffs)`` for a Bell-diagonal state; may be negative."""
    if state.num_qubits != 2:
        raise StateError("coherent information is defined here for two-qubit states")
    return 1.0 - shannon_entropy(state.coeffs)
