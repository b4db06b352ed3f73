# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels, a drop-in replacement for ``dlchar._kernels_py``.

Structures with at most 64 elements use one machine word per set; anything
larger is delegated to the pure-Python implementation.
"""

from itertools import permutations

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset
from cpython.bytes cimport PyBytes_FromStringAndSize

from dlchar import _kernels_py as _py

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

cdef enum:
    OP_TOP = 0
    OP_BOT = 1
    OP_NAME = 2
    OP_NOT = 3
    OP_AND = 4
    OP_OR = 5
    OP_EXISTS = 6
    OP_FORALL = 7
    OP_ATLEAST = 8

cdef struct Prog:
    int size
    int *op
    int *a
    int *b
    int *c


cdef int load_prog(Prog *p, ops, xs, ys, zs) except -1:
    cdef int m = len(ops), i
    p.size = m
    p.op = <int *> malloc(4 * sizeof(int) * (m + 1))
    if p.op == NULL:
        raise MemoryError()
    p.a = p.op + (m + 1)
    p.b = p.a + (m + 1)
    p.c = p.b + (m + 1)
    for i in range(m):
        p.op[i] = ops[i]
        p.a[i] = xs[i]
        p.b[i] = ys[i]
        p.c[i] = zs[i]
    return 0


cdef inline uint64_t full_mask(int n) nogil:
    return (<uint64_t> 0xFFFFFFFFFFFFFFFF) if n == 64 else (((<uint64_t> 1) << n) - 1)


cdef void run(Prog *p, int n, const uint64_t *labels, const uint64_t *succ,
              uint64_t *out) noexcept nogil:
    cdef uint64_t full = full_mask(n), v, s, row
    cdef int i, op, a, x, k
    cdef const uint64_t *rows
    for i in range(p.size):
        op = p.op[i]
        a = p.a[i]
        if op == OP_TOP:
            v = full
        elif op == OP_BOT:
            v = 0
        elif op == OP_NAME:
            v = labels[a] if a >= 0 else 0
        elif op == OP_NOT:
            v = full & ~out[a]
        elif op == OP_AND:
            v = out[a] & out[p.b[i]]
        elif op == OP_OR:
            v = out[a] | out[p.b[i]]
        else:
            s = out[p.b[i]]
            rows = succ + a * n
            v = 0
            if op == OP_EXISTS:
                for x in range(n):
                    if rows[x] & s:
                        v |= (<uint64_t> 1) << x
            elif op == OP_FORALL:
                for x in range(n):
                    if not (rows[x] & ~s):
                        v |= (<uint64_t> 1) << x
            else:
                k = p.c[i]
                for x in range(n):
                    if __builtin_popcountll(rows[x] & s) >= k:
                        v |= (<uint64_t> 1) << x
        out[i] = v


def eval_program(ops, xs, ys, zs, int n, labels, succ):
    if n > 64:
        return _py.eval_program(ops, xs, ys, zs, n, labels, succ)
    cdef Prog p
    cdef int n_slots = len(succ), nl = len(labels), i, x
    cdef uint64_t *lab = <uint64_t *> malloc(sizeof(uint64_t) * (nl + 1))
    cdef uint64_t *sc = <uint64_t *> malloc(sizeof(uint64_t) * (n_slots * n + 1))
    cdef uint64_t *out = <uint64_t *> malloc(sizeof(uint64_t) * (len(ops) + 1))
    load_prog(&p, ops, xs, ys, zs)
    try:
        for i in range(nl):
            lab[i] = labels[i]
        for i in range(n_slots):
            rows = succ[i]
            for x in range(n):
                sc[i * n + x] = rows[x]
        run(&p, n, lab, sc, out)
        return [out[i] for i in range(p.size)]
    finally:
        free(p.op)
        free(lab)
        free(sc)
        free(out)


cdef inline uint64_t permute(uint64_t code, const int *table) noexcept nogil:
    cdef uint64_t r = 0
    while code:
        r |= (<uint64_t> 1) << table[__builtin_ctzll(code)]
        code &= code - 1
    return r


def sweep(ops, xs, ys, zs, roots, constraints, int n, int n_labels, int n_roles,
          bint forward_only, pos=None, neg=None, long limit=-1):
    cdef int nn = n * n
    cdef int ebits = n_roles * nn, lbits = n_labels * n
    if n > 8 or ebits + lbits > 62:
        return _py.sweep(ops, xs, ys, zs, roots, constraints, n, n_labels, n_roles,
                         forward_only, pos, neg, limit)
    perms = [(0,) + q for q in permutations(range(1, n))][1:]
    cdef int P = len(perms), j, r, x, y, l, t, na, i
    cdef int nroots = len(roots), ncons = len(constraints)
    cdef bint types_mode = pos is None and neg is None
    pos = list(pos or ())
    neg = list(neg or ())
    cdef int npos = len(pos), nneg = len(neg)
    cdef Prog p
    cdef int *emap = <int *> malloc(sizeof(int) * (P * ebits + 1))
    cdef int *lmap = <int *> malloc(sizeof(int) * (P * lbits + 1))
    cdef int *autos = <int *> malloc(sizeof(int) * (P + 1))
    cdef int *iroots = <int *> malloc(sizeof(int) * (nroots + 1))
    cdef int *icons = <int *> malloc(sizeof(int) * (ncons + 1))
    cdef int *ipos = <int *> malloc(sizeof(int) * (npos + 1))
    cdef int *ineg = <int *> malloc(sizeof(int) * (nneg + 1))
    cdef uint64_t *succ = <uint64_t *> malloc(sizeof(uint64_t) * (2 * n_roles * n + 1))
    cdef uint64_t *labels = <uint64_t *> malloc(sizeof(uint64_t) * (n_labels + 1))
    cdef uint64_t *out = <uint64_t *> malloc(sizeof(uint64_t) * (len(ops) + 1))
    cdef int keylen = (nroots + 7) // 8
    cdef char *key = <char *> malloc(keylen + 1)
    cdef uint64_t full = full_mask(n), ecode, lcode, pc, seen, front, nxt, row, code
    cdef uint64_t eend = (<uint64_t> 1) << ebits, lend = (<uint64_t> 1) << lbits
    cdef bint ok
    types = {}
    hits = []
    load_prog(&p, ops, xs, ys, zs)
    try:
        for j in range(P):
            q = perms[j]
            for r in range(n_roles):
                for x in range(n):
                    for y in range(n):
                        emap[j * ebits + r * nn + x * n + y] = r * nn + q[x] * n + q[y]
            for l in range(n_labels):
                for x in range(n):
                    lmap[j * lbits + l * n + x] = l * n + q[x]
        for j in range(nroots):
            iroots[j] = roots[j]
        for j in range(ncons):
            icons[j] = constraints[j]
        for j in range(npos):
            ipos[j] = pos[j]
        for j in range(nneg):
            ineg[j] = neg[j]
        ecode = 0
        while ecode < eend:
            na = 0
            ok = True
            for j in range(P):
                pc = permute(ecode, emap + j * ebits)
                if pc < ecode:
                    ok = False
                    break
                if pc == ecode:
                    autos[na] = j
                    na += 1
            if not ok:
                ecode += 1
                continue
            for r in range(n_roles):
                for x in range(n):
                    succ[(2 * r) * n + x] = (ecode >> (r * nn + x * n)) & full
                    succ[(2 * r + 1) * n + x] = 0
                for x in range(n):
                    row = succ[(2 * r) * n + x]
                    while row:
                        y = __builtin_ctzll(row)
                        succ[(2 * r + 1) * n + y] |= (<uint64_t> 1) << x
                        row &= row - 1
            if forward_only:
                seen = 1
                front = 1
                while front:
                    nxt = 0
                    row = front
                    while row:
                        x = __builtin_ctzll(row)
                        for r in range(n_roles):
                            nxt |= succ[(2 * r) * n + x]
                        row &= row - 1
                    front = nxt & ~seen
                    seen |= nxt
                if seen != full:
                    ecode += 1
                    continue
            lcode = 0
            while lcode < lend:
                ok = True
                for j in range(na):
                    if permute(lcode, lmap + autos[j] * lbits) < lcode:
                        ok = False
                        break
                if ok:
                    for l in range(n_labels):
                        labels[l] = (lcode >> (l * n)) & full
                    run(&p, n, labels, succ, out)
                    for j in range(ncons):
                        if out[icons[j]] != full:
                            ok = False
                            break
                if ok:
                    code = (ecode << lbits) | lcode
                    if types_mode:
                        memset(key, 0, keylen)
                        for j in range(nroots):
                            if out[iroots[j]] & 1:
                                key[j >> 3] |= <char> (1 << (j & 7))
                        kb = PyBytes_FromStringAndSize(key, keylen)
                        if kb not in types:
                            types[kb] = code
                    else:
                        for j in range(npos):
                            if not (out[ipos[j]] & 1):
                                ok = False
                                break
                        if ok:
                            for j in range(nneg):
                                if out[ineg[j]] & 1:
                                    ok = False
                                    break
                        if ok:
                            hits.append(code)
                            if 0 <= limit <= len(hits):
                                return hits
                lcode += 1
            ecode += 1
    finally:
        free(p.op)
        free(emap)
        free(lmap)
        free(autos)
        free(iroots)
        free(icons)
        free(ipos)
        free(ineg)
        free(succ)
        free(labels)
        free(out)
        free(key)
    if types_mode:
        return {int.from_bytes(kb, "little"): c for kb, c in types.items()}
    return hits


def greatest_simulation(int n1, lab1, succ1, int n2, lab2, succ2):
    if n1 > 64 or n2 > 64:
        return _py.greatest_simulation(n1, lab1, succ1, n2, lab2, succ2)
    cdef int nr = len(succ1), r, x, y, x2
    cdef uint64_t *s1 = <uint64_t *> malloc(sizeof(uint64_t) * (nr * n1 + 1))
    cdef uint64_t *p2 = <uint64_t *> malloc(sizeof(uint64_t) * (nr * n2 + 1))
    cdef uint64_t *z = <uint64_t *> malloc(sizeof(uint64_t) * (n1 + 1))
    cdef uint64_t zx, rows, pre, s, m
    cdef bint changed = True
    try:
        for x in range(n1):
            m = 0
            for y in range(n2):
                if not (lab1[x] & ~lab2[y]):
                    m |= (<uint64_t> 1) << y
            z[x] = m
        for r in range(nr):
            for x in range(n1):
                s1[r * n1 + x] = succ1[r][x]
            for y in range(n2):
                p2[r * n2 + y] = 0
            for y in range(n2):
                rows = succ2[r][y]
                while rows:
                    x2 = __builtin_ctzll(rows)
                    p2[r * n2 + x2] |= (<uint64_t> 1) << y
                    rows &= rows - 1
        while changed:
            changed = False
            for r in range(nr):
                for x in range(n1):
                    zx = z[x]
                    if not zx:
                        continue
                    rows = s1[r * n1 + x]
                    while rows and zx:
                        x2 = __builtin_ctzll(rows)
                        rows &= rows - 1
                        pre = 0
                        s = z[x2]
                        while s:
                            pre |= p2[r * n2 + __builtin_ctzll(s)]
                            s &= s - 1
                        zx &= pre
                    if zx != z[x]:
                        z[x] = zx
                        changed = True
        return [z[x] for x in range(n1)]
    finally:
        free(s1)
        free(p2)
        free(z)
