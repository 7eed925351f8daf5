"""NumPy implementations of the label-space kernels.

Label packing used throughout: bit 0 is the phase (Z) bit, bit ``q`` for
``q >= 1`` is the X bit of qubit ``q`` relative to qubit 0.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def drop_map(n, s):
    """Index map for removing qubit ``s`` (X measurement, "+" outcome)."""
    idx = np.arange(1 << n, dtype=np.int64)
    phase = idx & 1
    ref = 1 if s == 0 else 0
    ref_bit = (idx >> ref) & 1 if ref else np.zeros_like(idx)
    out = phase.copy()
    t = 0
    for q in range(n):
        if q == s:
            continue
        if t > 0:
            bit = ((idx >> q) & 1) if q else np.zeros_like(idx)
            out |= (bit ^ ref_bit) << t
        t += 1
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def relative_map(n, s):
    """Map a label to ``phase * 2**(n-1) + pattern`` relative to qubit ``s``.

    The pattern enumerates the remaining qubits in order, bit ``t`` for the
    ``t``-th remaining qubit.
    """
    idx = np.arange(1 << n, dtype=np.int64)
    node_bit = (idx >> s) & 1 if s else np.zeros_like(idx)
    rel = np.zeros_like(idx)
    t = 0
    for q in range(n):
        if q == s:
            continue
        bit = ((idx >> q) & 1) if q else np.zeros_like(idx)
        rel |= (bit ^ node_bit) << t
        t += 1
    out = (idx & 1) * (1 << (n - 1)) + rel
    out.setflags(write=False)
    return out


def measure_x(coeffs, n, s):
    return np.bincount(drop_map(n, s), weights=coeffs, minlength=1 << (n - 1))


def fuse(coeff_list, ns, positions):
    total = sum(ns) - len(ns)
    if total == 0:
        return np.ones(1)
    t_s = np.ones(1)
    t_d = np.ones(1)
    for coeffs, n, s in zip(coeff_list, ns, positions):
        half = 1 << (n - 1)
        p = np.bincount(relative_map(n, s), weights=coeffs, minlength=2 * half)
        # earlier fragments occupy the low bits of the joint pattern
        t_s = np.kron(p[:half] + p[half:], t_s)
        t_d = np.kron(p[:half] - p[half:], t_d)
    v0 = 0.5 * (t_s + t_d)
    v1 = 0.5 * (t_s - t_d)
    mask = (1 << total) - 1
    even = np.arange(0, 1 << total, 2)
    out = np.empty(1 << total)
    out[0::2] = v0[even] + v0[even ^ mask]
    out[1::2] = v1[even] + v1[even ^ mask]
    return out


# -- error-image propagation (one packed label per tracked Pauli error) --------

def _compress(labels, s):
    """Remove bit ``s`` from each label, shifting the higher bits down."""
    low = labels & ((1 << s) - 1)
    return low | ((labels >> (s + 1)) << s)


def fuse_images(labels, n, s, offset, total):
    """Images of one fragment's labels under a canonical GHZ projection.

    The fragment has ``n`` qubits, ``s`` is its measured position and its
    remaining qubits occupy bits ``offset .. offset + n - 2`` of the joint
    pattern of width ``total``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    phase = labels & 1
    xbits = labels & ~1
    node = (xbits >> s) & 1
    rel = _compress(xbits ^ (node * ((1 << n) - 1)), s)
    y = rel << offset
    if total:
        y = y ^ ((y & 1) * ((1 << total) - 1))
    return phase | (y & ~1)


def drop_images(labels, n, s):
    """Images of labels under the X measurement of qubit ``s``."""
    labels = np.asarray(labels, dtype=np.int64)
    phase = labels & 1
    comp = _compress(labels & ~1, s)
    ref = (comp & 1) if s == 0 else np.zeros_like(comp)
    comp = comp ^ (ref * ((1 << (n - 1)) - 1))
    return phase | (comp & ~1)


def bell_from_images(weights, img1, img2):
    """Bell-diagonal coefficients from independent Werner errors.

    Link ``i`` applies label 1 or 2 (and their sum) each with probability
    ``(1 - w_i) / 4``; ``img1``/``img2`` are their two-bit final images.
    """
    weights = np.asarray(weights, dtype=float)
    img1 = np.asarray(img1, dtype=np.int64)
    img2 = np.asarray(img2, dtype=np.int64)
    img3 = img1 ^ img2
    spectrum = np.ones(4)
    for u in range(1, 4):
        chi = 0.0
        for img in (img1, img2, img3):
            chi = chi + (1 - 2 * (_parity(img & u)))
        spectrum[u] = np.prod(weights + (1 - weights) / 4 * (chi + 1))
    # inverse Walsh-Hadamard transform on two bits
    h = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float)
    return h @ spectrum / 4


def _parity(x):
    return (x ^ (x >> 1)) & 1


MAX_FRAGMENT = 62


def _fuse_one(lab, n, s, offset, total):
    x = lab & ~1
    node = (x >> s) & 1
    if node:
        x ^= (1 << n) - 1
    y = ((x & ((1 << s) - 1)) | ((x >> (s + 1)) << s)) << offset
    if total and y & 1:
        y ^= (1 << total) - 1
    return (lab & 1) | (y & ~1)


def _drop_one(lab, n, s):
    x = lab & ~1
    comp = (x & ((1 << s) - 1)) | ((x >> (s + 1)) << s)
    if s == 0 and comp & 1:
        comp ^= (1 << (n - 1)) - 1
    return (lab & 1) | (comp & ~1)


def swap_round(src, dst, weights, measured, schedule, num_nodes, a_node, b_node):
    """Run a full swap sequence on Pauli error images.

    Parameters
    ----------
    src, dst : sequence of int
        Memory ids of each heralded link.
    weights : sequence of float
        Werner weight of each link.
    measured : sequence of int
        Memories X-measured before swapping.
    schedule : sequence of int
        Helper node ids in visiting order.
    num_nodes : int
        Number of grid nodes; memory ``4*v + d`` belongs to node ``v``.
    a_node, b_node : int
        Consumer node ids.

    Returns
    -------
    status : int
        0 on success, 1 if a node holds two memories of one fragment, 2 if
        the consumers share no fragment, 3 if the final fragment is not a
        pair, 4 if a fragment outgrows the packed labels.
    coeffs : ndarray or None
        Bell-diagonal coefficients of the consumer pair.
    swaps, largest : int
        GHZ swaps performed and the largest intermediate fragment.
    ends : tuple or None
        The consumer memories holding the final pair.
    """
    src = [int(x) for x in src]
    dst = [int(x) for x in dst]
    L = len(src)
    link_frag = list(range(L))
    img1 = [1] * L
    img2 = [2] * L
    frag_of = {}
    qubits = {}
    for l in range(L):
        qubits[l] = [src[l], dst[l]]
        frag_of[src[l]] = frag_of[dst[l]] = l
    largest = 2 if L else 0
    swaps = 0
    new_id = L

    def measure(mem):
        f = frag_of.pop(mem)
        qs = qubits[f]
        n = len(qs)
        if n == 1:
            del qubits[f]
            for l in range(L):
                if link_frag[l] == f:
                    link_frag[l] = -1
            return 0
        s = qs.index(mem)
        for l in range(L):
            if link_frag[l] == f:
                img1[l] = _drop_one(img1[l], n, s)
                img2[l] = _drop_one(img2[l], n, s)
        del qs[s]
        return n - 1

    for mem in measured:
        measure(int(mem))
    for node in schedule:
        mems = [4 * int(node) + d for d in range(4) if 4 * int(node) + d in frag_of]
        frs = [frag_of[m] for m in mems]
        if len(set(frs)) != len(frs):
            return 1, None, swaps, largest, None
        out = 0
        if len(mems) >= 2:
            pos, offs, total = [], [], 0
            for m, f in zip(mems, frs):
                pos.append(qubits[f].index(m))
                offs.append(total)
                total += len(qubits[f]) - 1
            if total > MAX_FRAGMENT:
                return 4, None, swaps, largest, None
            where = {f: k for k, f in enumerate(frs)}
            for l in range(L):
                k = where.get(link_frag[l])
                if k is None:
                    continue
                if total == 0:
                    link_frag[l] = -1
                    continue
                n = len(qubits[frs[k]])
                img1[l] = _fuse_one(img1[l], n, pos[k], offs[k], total)
                img2[l] = _fuse_one(img2[l], n, pos[k], offs[k], total)
                link_frag[l] = new_id
            merged = []
            for m, f, s in zip(mems, frs, pos):
                del frag_of[m]
                qs = qubits.pop(f)
                merged.extend(qs[:s] + qs[s + 1 :])
            if merged:
                qubits[new_id] = merged
                for q in merged:
                    frag_of[q] = new_id
            new_id += 1
            swaps += 1
            out = total
        elif len(mems) == 1:
            out = measure(mems[0])
        largest = max(largest, out)

    ma = mb = None
    for d in range(4):
        m = 4 * a_node + d
        if m not in frag_of:
            continue
        hits = [q for q in qubits[frag_of[m]] if q // 4 == b_node]
        if hits:
            ma, mb = m, min(hits)
            break
    if ma is None:
        return 2, None, swaps, largest, None
    f = frag_of[ma]
    for q in list(qubits[f]):
        if q not in (ma, mb) and q // 4 in (a_node, b_node):
            measure(q)
    if len(qubits[f]) != 2:
        return 3, None, swaps, largest, None
    sel = [l for l in range(L) if link_frag[l] == f]
    coeffs = bell_from_images(
        np.asarray(weights, dtype=float)[sel],
        np.array([img1[l] for l in sel], dtype=np.int64),
        np.array([img2[l] for l in sel], dtype=np.int64),
    )
    return 0, coeffs, swaps, largest, (ma, mb)
