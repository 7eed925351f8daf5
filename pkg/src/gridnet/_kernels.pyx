# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled label-space kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline long _drop_index(long idx, int n, int s) noexcept nogil:
    # remove bit s; with s == 0 qubit 1 becomes the reference qubit
    cdef long x
    if s:
        return (idx & ((1 << s) - 1)) | ((idx >> (s + 1)) << s)
    x = idx >> 1
    if x & 1:
        x ^= (1 << (n - 1)) - 1
    return (x & ~1) | (idx & 1)


def measure_x(const double[::1] coeffs, int n, int s):
    cdef long size = 1 << n
    out_arr = np.zeros(1 << (n - 1))
    cdef double[::1] out = out_arr
    cdef long i
    with nogil:
        for i in range(size):
            out[_drop_index(i, n, s)] += coeffs[i]
    return out_arr


cdef void _relative(const double[::1] coeffs, int n, int s,
                    double[::1] sum_out, double[::1] diff_out) noexcept nogil:
    cdef long half = 1 << (n - 1)
    cdef long i, rel, bit, node_bit
    cdef int q, t
    for i in range(half):
        sum_out[i] = 0.0
        diff_out[i] = 0.0
    for i in range(1 << n):
        node_bit = (i >> s) & 1 if s else 0
        rel = 0
        t = 0
        for q in range(n):
            if q == s:
                continue
            bit = (i >> q) & 1 if q else 0
            rel |= (bit ^ node_bit) << t
            t += 1
        sum_out[rel] += coeffs[i]
        if i & 1:
            diff_out[rel] -= coeffs[i]
        else:
            diff_out[rel] += coeffs[i]


def fuse(coeff_list, ns, positions):
    cdef int m = len(coeff_list)
    cdef int total = 0
    cdef int k
    for k in range(m):
        total += ns[k] - 1
    if total == 0:
        return np.ones(1)

    sums = []
    diffs = []
    widths = np.zeros(m, dtype=np.intc)
    offsets = np.zeros(m, dtype=np.intc)
    cdef int off = 0
    for k in range(m):
        n = ns[k]
        s_arr = np.empty(1 << (n - 1))
        d_arr = np.empty(1 << (n - 1))
        _relative(np.ascontiguousarray(coeff_list[k], dtype=np.float64),
                  n, positions[k], s_arr, d_arr)
        sums.append(s_arr)
        diffs.append(d_arr)
        widths[k] = n - 1
        offsets[k] = off
        off += n - 1

    # flatten factor tables so the hot loop can stay in C
    flat_s = np.concatenate(sums)
    flat_d = np.concatenate(diffs)
    starts = np.zeros(m, dtype=np.int64)
    cdef long acc = 0
    for k in range(m):
        starts[k] = acc
        acc += 1 << widths[k]

    cdef double[::1] fs = flat_s
    cdef double[::1] fd = flat_d
    cdef long[::1] st = starts.astype(np.int64)
    cdef int[::1] wd = widths
    cdef int[::1] of = offsets
    cdef long size = 1 << total
    cdef long mask = size - 1
    out_arr = np.empty(size)
    cdef double[::1] out = out_arr
    cdef long y, yy, part, j
    cdef double ps, pd, qs, qd, v0, v1
    with nogil:
        for y in range(0, size, 2):
            ps = 1.0
            pd = 1.0
            qs = 1.0
            qd = 1.0
            yy = y ^ mask
            for k in range(m):
                j = st[k] + ((y >> of[k]) & ((1 << wd[k]) - 1))
                ps = ps * fs[j]
                pd = pd * fd[j]
                j = st[k] + ((yy >> of[k]) & ((1 << wd[k]) - 1))
                qs = qs * fs[j]
                qd = qd * fd[j]
            v0 = 0.5 * (ps + pd) + 0.5 * (qs + qd)
            v1 = 0.5 * (ps - pd) + 0.5 * (qs - qd)
            out[y] = v0
            out[y + 1] = v1
    return out_arr


cdef inline cnp.int64_t _compress(cnp.int64_t x, int s) noexcept nogil:
    return (x & ((<cnp.int64_t>1 << s) - 1)) | ((x >> (s + 1)) << s)


def fuse_images(labels, int n, int s, int offset, int total):
    cdef const cnp.int64_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t size = lab.shape[0]
    out_arr = np.empty(size, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.int64_t full = (<cnp.int64_t>1 << n) - 1
    cdef cnp.int64_t mask = (<cnp.int64_t>1 << total) - 1
    cdef cnp.int64_t x, y, node
    cdef Py_ssize_t i
    with nogil:
        for i in range(size):
            x = lab[i] & ~(<cnp.int64_t>1)
            node = (x >> s) & 1
            y = _compress(x ^ (node * full), s) << offset
            if total and (y & 1):
                y = y ^ mask
            out[i] = (lab[i] & 1) | (y & ~(<cnp.int64_t>1))
    return out_arr


def drop_images(labels, int n, int s):
    cdef const cnp.int64_t[::1] lab = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t size = lab.shape[0]
    out_arr = np.empty(size, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef cnp.int64_t full = (<cnp.int64_t>1 << (n - 1)) - 1
    cdef cnp.int64_t comp
    cdef Py_ssize_t i
    with nogil:
        for i in range(size):
            comp = _compress(lab[i] & ~(<cnp.int64_t>1), s)
            if s == 0 and (comp & 1):
                comp = comp ^ full
            out[i] = (lab[i] & 1) | (comp & ~(<cnp.int64_t>1))
    return out_arr


cdef inline int _sign(cnp.int64_t x, int u) noexcept nogil:
    x = x & u
    return 1 - 2 * ((x ^ (x >> 1)) & 1)


def bell_from_images(weights, img1, img2):
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const cnp.int64_t[::1] a = np.ascontiguousarray(img1, dtype=np.int64)
    cdef const cnp.int64_t[::1] b = np.ascontiguousarray(img2, dtype=np.int64)
    cdef double spec[4]
    cdef int u
    cdef Py_ssize_t i
    cdef double chi
    spec[0] = 1.0
    with nogil:
        for u in range(1, 4):
            spec[u] = 1.0
            for i in range(w.shape[0]):
                chi = _sign(a[i], u) + _sign(b[i], u) + _sign(a[i] ^ b[i], u)
                spec[u] *= w[i] + (1.0 - w[i]) / 4.0 * (chi + 1.0)
    return np.array([
        (spec[0] + spec[1] + spec[2] + spec[3]) / 4.0,
        (spec[0] - spec[1] + spec[2] - spec[3]) / 4.0,
        (spec[0] + spec[1] - spec[2] - spec[3]) / 4.0,
        (spec[0] - spec[1] - spec[2] + spec[3]) / 4.0,
    ])


cdef inline cnp.int64_t _fuse_one(cnp.int64_t lab, int n, int s, int offset, int total) noexcept nogil:
    cdef cnp.int64_t x = lab & ~(<cnp.int64_t>1)
    cdef cnp.int64_t node = (x >> s) & 1
    cdef cnp.int64_t y = _compress(x ^ (node * ((<cnp.int64_t>1 << n) - 1)), s) << offset
    if total and (y & 1):
        y = y ^ ((<cnp.int64_t>1 << total) - 1)
    return (lab & 1) | (y & ~(<cnp.int64_t>1))


cdef inline cnp.int64_t _drop_one(cnp.int64_t lab, int n, int s) noexcept nogil:
    cdef cnp.int64_t comp = _compress(lab & ~(<cnp.int64_t>1), s)
    if s == 0 and (comp & 1):
        comp = comp ^ ((<cnp.int64_t>1 << (n - 1)) - 1)
    return (lab & 1) | (comp & ~(<cnp.int64_t>1))


cdef enum:
    MAXQ = 62

cdef struct Round:
    int L
    int* link_frag
    cnp.int64_t* img1
    cnp.int64_t* img2
    int* frag_of_mem
    int* size
    int* qubits      # MAXQ slots per fragment


cdef int _measure(Round* r, int mem) noexcept nogil:
    """X-measure ``mem``; returns the new fragment size."""
    cdef int f = r.frag_of_mem[mem]
    cdef int n = r.size[f]
    cdef int s = 0
    cdef int l, q
    r.frag_of_mem[mem] = -1
    if n == 1:
        r.size[f] = 0
        for l in range(r.L):
            if r.link_frag[l] == f:
                r.link_frag[l] = -1
        return 0
    while r.qubits[f * MAXQ + s] != mem:
        s += 1
    for l in range(r.L):
        if r.link_frag[l] == f:
            r.img1[l] = _drop_one(r.img1[l], n, s)
            r.img2[l] = _drop_one(r.img2[l], n, s)
    for q in range(s, n - 1):
        r.qubits[f * MAXQ + q] = r.qubits[f * MAXQ + q + 1]
    r.size[f] = n - 1
    return n - 1


def swap_round(src, dst, weights, measured, schedule, int num_nodes, int a_node, int b_node):
    """Compiled version of the Pauli-image swap sequence; see ``_pykernels``."""
    cdef const cnp.int64_t[::1] s_arr = np.ascontiguousarray(src, dtype=np.int64)
    cdef const cnp.int64_t[::1] d_arr = np.ascontiguousarray(dst, dtype=np.int64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const cnp.int64_t[::1] meas = np.ascontiguousarray(measured, dtype=np.int64)
    cdef const cnp.int64_t[::1] sched = np.ascontiguousarray(schedule, dtype=np.int64)
    cdef int L = s_arr.shape[0]
    cdef int nfrag = L + sched.shape[0] + 1
    link_frag_a = np.empty(L, dtype=np.intc)
    img1_a = np.ones(L, dtype=np.int64)
    img2_a = np.full(L, 2, dtype=np.int64)
    fom_a = np.full(4 * num_nodes, -1, dtype=np.intc)
    size_a = np.zeros(nfrag, dtype=np.intc)
    qub_a = np.zeros(nfrag * MAXQ, dtype=np.intc)
    cdef int[::1] link_frag = link_frag_a
    cdef cnp.int64_t[::1] img1 = img1_a
    cdef cnp.int64_t[::1] img2 = img2_a
    cdef int[::1] fom = fom_a
    cdef int[::1] size = size_a
    cdef int[::1] qub = qub_a
    cdef Round r
    r.L = L
    r.link_frag = &link_frag[0] if L else NULL
    r.img1 = &img1[0] if L else NULL
    r.img2 = &img2[0] if L else NULL
    r.frag_of_mem = &fom[0]
    r.size = &size[0]
    r.qubits = &qub[0]

    cdef int l, i, k, d, m, f, n, s, q, total, off, c, new_id, largest, swaps, out
    cdef int mems[4]
    cdef int frs[4]
    cdef int pos[4]
    cdef int offs[4]
    cdef int status = 0
    cdef int ma = -1, mb = -1
    cdef double spec[4]
    cdef double chi
    cdef cnp.int64_t x
    with nogil:
        for l in range(L):
            link_frag[l] = l
            size[l] = 2
            qub[l * MAXQ] = <int>s_arr[l]
            qub[l * MAXQ + 1] = <int>d_arr[l]
            fom[s_arr[l]] = l
            fom[d_arr[l]] = l
        largest = 2 if L else 0
        swaps = 0
        new_id = L
        for i in range(meas.shape[0]):
            _measure(&r, <int>meas[i])
        for i in range(sched.shape[0]):
            c = 0
            for d in range(4):
                m = 4 * <int>sched[i] + d
                if fom[m] >= 0:
                    mems[c] = m
                    frs[c] = fom[m]
                    c += 1
            for k in range(c):
                for d in range(k):
                    if frs[k] == frs[d]:
                        status = 1
            if status:
                break
            out = 0
            if c >= 2:
                total = 0
                for k in range(c):
                    f = frs[k]
                    s = 0
                    while qub[f * MAXQ + s] != mems[k]:
                        s += 1
                    pos[k] = s
                    offs[k] = total
                    total += size[f] - 1
                if total > MAXQ:
                    status = 4
                    break
                for l in range(L):
                    for k in range(c):
                        if link_frag[l] == frs[k]:
                            if total == 0:
                                link_frag[l] = -1
                            else:
                                n = size[frs[k]]
                                img1[l] = _fuse_one(img1[l], n, pos[k], offs[k], total)
                                img2[l] = _fuse_one(img2[l], n, pos[k], offs[k], total)
                                link_frag[l] = new_id
                            break
                q = 0
                for k in range(c):
                    f = frs[k]
                    fom[mems[k]] = -1
                    for s in range(size[f]):
                        if s != pos[k]:
                            qub[new_id * MAXQ + q] = qub[f * MAXQ + s]
                            fom[qub[f * MAXQ + s]] = new_id
                            q += 1
                    size[f] = 0
                size[new_id] = total
                new_id += 1
                swaps += 1
                out = total
            elif c == 1:
                out = _measure(&r, mems[0])
            if out > largest:
                largest = out

        if status == 0:
            for d in range(4):
                m = 4 * a_node + d
                if fom[m] < 0:
                    continue
                f = fom[m]
                for k in range(4):
                    q = 4 * b_node + k
                    if fom[q] == f:
                        ma = m
                        mb = q
                        break
                if ma >= 0:
                    break
            if ma < 0:
                status = 2
        if status == 0:
            f = fom[ma]
            s = 0
            while s < size[f]:
                q = qub[f * MAXQ + s]
                if q != ma and q != mb and (q // 4 == a_node or q // 4 == b_node):
                    _measure(&r, q)
                else:
                    s += 1
            if size[f] != 2:
                status = 3
        if status == 0:
            for d in range(4):
                spec[d] = 1.0
            for k in range(1, 4):
                for l in range(L):
                    if link_frag[l] != f:
                        continue
                    chi = _sign(img1[l], k) + _sign(img2[l], k) + _sign(img1[l] ^ img2[l], k)
                    spec[k] *= w[l] + (1.0 - w[l]) / 4.0 * (chi + 1.0)
    if status:
        return status, None, swaps, largest, None
    coeffs = np.array([
        (spec[0] + spec[1] + spec[2] + spec[3]) / 4.0,
        (spec[0] - spec[1] + spec[2] - spec[3]) / 4.0,
        (spec[0] + spec[1] - spec[2] - spec[3]) / 4.0,
        (spec[0] - spec[1] - spec[2] + spec[3]) / 4.0,
    ])
    return 0, coeffs, swaps, largest, (ma, mb)
