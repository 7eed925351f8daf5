"""Brute-force density-matrix oracle.

Independent of the label algebra: states are explicit complex matrices and
measurements are explicit projector contractions.  Qubit 0 of a matrix is
the most significant tensor factor.
"""
from functools import reduce

import numpy as np

MAX_QUBITS = 12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
Y = 1j * X @ Z
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)


class OracleError(ValueError):
    pass


def kron(*ops):
    return reduce(np.kron, ops, np.ones((1, 1), dtype=complex))


def op_on(n, position, op):
    return kron(*[op if q == position else I2 for q in range(n)])


def ghz_vector(n):
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def ghz_basis_vector(n, label):
    """``Z_0^j prod X_q^{x_q} |GHZ_n>`` for a packed label."""
    v = ghz_vector(n)
    if label & 1:
        v = op_on(n, 0, Z) @ v
    for q in range(1, n):
        if (label >> q) & 1:
            v = op_on(n, q, X) @ v
    return v


def ghz_basis(n):
    return np.array([ghz_basis_vector(n, L) for L in range(1 << n)])


def werner_matrix(fidelity):
    phi = ghz_vector(2)
    proj = np.outer(phi, phi.conj())
    return fidelity * proj + (1 - fidelity) / 3 * (np.eye(4) - proj)


def werner_weight_matrix(weight):
    phi = ghz_vector(2)
    return weight * np.outer(phi, phi.conj()) + (1 - weight) * np.eye(4) / 4


def dense_from_labels(coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    n = coeffs.size.bit_length() - 1
    basis = ghz_basis(n)
    return (basis.T * coeffs) @ basis.conj()


def labels_from_dense(rho):
    """GHZ-basis diagonal of ``rho`` and the largest off-diagonal magnitude."""
    n = rho.shape[0].bit_length() - 1
    basis = ghz_basis(n)
    m = basis.conj() @ rho @ basis.T
    diag = np.real(np.diag(m)).copy()
    off = np.abs(m - np.diag(np.diag(m))).max(initial=0.0)
    return diag, off


def check_density(rho, herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-9):
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise OracleError("not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise OracleError(f"trace {np.trace(rho)}")
    if np.linalg.eigvalsh(rho).min() < -psd_tol:
        raise OracleError("not positive semidefinite")


def apply_pauli(rho, position, pauli):
    n = rho.shape[0].bit_length() - 1
    P = op_on(n, position, PAULI[pauli])
    return P @ rho @ P.conj().T


def _restrict(rho, n, fixed):
    """Matrix element block ``<s| rho |t>`` on the fixed qubits.

    ``fixed`` maps qubit position to ``(bra_bit, ket_bit)``; the result acts
    on the remaining qubits in order.
    """
    t = rho.reshape([2] * (2 * n))
    index = []
    for q in range(n):
        index.append(fixed[q][0] if q in fixed else slice(None))
    for q in range(n):
        index.append(fixed[q][1] if q in fixed else slice(None))
    block = t[tuple(index)]
    r = n - len(fixed)
    return block.reshape(1 << r, 1 << r)


def oracle_project(states, measured, projector):
    """Project ``measured`` qubits of a product state onto ``projector``.

    Parameters
    ----------
    states : list of (rho, qubit_ids)
        Independent factors of the joint state.
    measured : sequence
        Qubit ids, in the tensor order of ``projector``.
    projector : array
        Normalized state vector on the measured qubits.

    Returns
    -------
    rho_out, probability, qubits_out
        Normalized post-measurement state on the unmeasured qubits (factor
        order preserved), the outcome probability, and the qubit ids.
    """
    measured = list(measured)
    projector = np.asarray(projector, dtype=complex)
    m = len(measured)
    if projector.shape != (1 << m,):
        raise OracleError("projector dimension does not match measured qubits")
    out_qubits = [q for _, qs in states for q in qs if q not in measured]
    if len(out_qubits) > MAX_QUBITS:
        raise OracleError(f"{len(out_qubits)} output qubits exceeds oracle limit")
    for rho, qs in states:
        if len(qs) > MAX_QUBITS:
            raise OracleError("input factor too large")
    where = {}
    for f, (_, qs) in enumerate(states):
        for pos, q in enumerate(qs):
            where[q] = (f, pos)
    support = np.flatnonzero(np.abs(projector) > 1e-15)
    dim = 1 << len(out_qubits)
    out = np.zeros((dim, dim), dtype=complex)
    for s in support:
        for t in support:
            amp = np.conj(projector[s]) * projector[t]
            fixed = [dict() for _ in states]
            for i, q in enumerate(measured):
                f, pos = where[q]
                shift = m - 1 - i
                fixed[f][pos] = ((s >> shift) & 1, (t >> shift) & 1)
            blocks = [
                _restrict(rho, len(qs), fixed[f]) for f, (rho, qs) in enumerate(states)
            ]
            out += amp * kron(*blocks)
    prob = float(np.real(np.trace(out)))
    if prob <= 0:
        return None, 0.0, out_qubits
    return out / prob, prob, out_qubits


def _cnot(n, control, target):
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return kron(*[p0 if q == control else I2 for q in range(n)]) + kron(
        *[p1 if q == control else X if q == target else I2 for q in range(n)]
    )


def bbpssw_dense(fidelity):
    """Bilateral CNOT on two Werner pairs, Z on both targets, keep equal outcomes.

    Qubit order is ``A1 B1 A2 B2``.  Returns ``(fidelity_out, p_success)``
    with the output fidelity taken against Phi+.
    """
    rho = np.kron(werner_matrix(fidelity), werner_matrix(fidelity))
    U = _cnot(4, 0, 2) @ _cnot(4, 1, 3)
    rho = U @ rho @ U.conj().T
    phi = ghz_vector(2)
    kept = np.zeros((4, 4), dtype=complex)
    for bit in (0, 1):
        block = _restrict(rho, 4, {2: (bit, bit), 3: (bit, bit)})
        kept += block
    p_succ = float(np.real(np.trace(kept)))
    return float(np.real(phi.conj() @ kept @ phi)) / p_succ, p_succ


def ghz_swap_dense(weights):
    """Project the B halves of Werner pairs onto GHZ(n); returns (rho_A, prob)."""
    n = len(weights)
    states = [(werner_weight_matrix(w), (("A", i), ("B", i))) for i, w in enumerate(weights)]
    rho, prob, qubits = oracle_project(states, [("B", i) for i in range(n)], ghz_vector(n))
    return rho, prob


class DenseEngine:
    """Fragment backend for the protocol engine using explicit matrices.

    Mirrors the label backend interface so the same schedule can be replayed
    with brute-force linear algebra.
    """

    def __init__(self):
        self.max_qubits = 0

    def link(self, weight, qa, qb):
        return (werner_weight_matrix(weight), (qa, qb))

    def qubits(self, frag):
        return frag[1]

    def fuse(self, frags, node_qubits):
        m = len(frags)
        rho, prob, qubits = oracle_project(list(frags), node_qubits, ghz_vector(m))
        if not qubits:
            return None
        self.max_qubits = max(self.max_qubits, len(qubits))
        return (rho, tuple(qubits))

    def measure_x(self, frag, qubit):
        rho, prob, qubits = oracle_project([frag], [qubit], PLUS)
        if not qubits:
            return None
        return (rho, tuple(qubits))

    def to_state(self, frag):
        from .state import GHZDiagonalState

        diag, off = labels_from_dense(frag[0])
        if off > 1e-9:
            raise OracleError(f"final state not GHZ-diagonal (off-diagonal {off:.2e})")
        return GHZDiagonalState(frag[1], diag)
