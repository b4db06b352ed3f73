"""Pure-Python kernels.

Sets of elements are Python ints used as bitsets.  A compiled concept program
is four parallel int sequences ``(ops, xs, ys, zs)``; instruction ``i`` reads
operands from earlier instructions only.  Role slots are ``2*r`` for role
``r`` and ``2*r + 1`` for its inverse.

``dlchar._kernels`` (Cython) implements the same functions with identical
results; :mod:`dlchar.kernels` picks one at import time.
"""

from itertools import permutations

TOP, BOT, NAME, NOT, AND, OR, EXISTS, FORALL, ATLEAST = range(9)


def eval_program(ops, xs, ys, zs, n, labels, succ):
    """Evaluate every instruction; returns one bitmask per instruction.

    ``labels[l]`` is the extension of label ``l`` (label ``-1`` is empty) and
    ``succ[s][x]`` the successor set of element ``x`` along role slot ``s``.
    """
    full = (1 << n) - 1
    out = [0] * len(ops)
    for i in range(len(ops)):
        op = ops[i]
        a = xs[i]
        if op == TOP:
            v = full
        elif op == BOT:
            v = 0
        elif op == NAME:
            v = labels[a] if a >= 0 else 0
        elif op == NOT:
            v = full & ~out[a]
        elif op == AND:
            v = out[a] & out[ys[i]]
        elif op == OR:
            v = out[a] | out[ys[i]]
        else:
            s = out[ys[i]]
            rows = succ[a]
            v = 0
            if op == EXISTS:
                for x in range(n):
                    if rows[x] & s:
                        v |= 1 << x
            elif op == FORALL:
                ns = ~s
                for x in range(n):
                    if not rows[x] & ns:
                        v |= 1 << x
            else:
                k = zs[i]
                for x in range(n):
                    if (rows[x] & s).bit_count() >= k:
                        v |= 1 << x
        out[i] = v
    return out


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _permute(code, table):
    out = 0
    for t in _bits(code):
        out |= 1 << table[t]
    return out


def _inverse_rows(rows, n):
    inv = [0] * n
    for x in range(n):
        for y in _bits(rows[x]):
            inv[y] |= 1 << x
    return inv


def _structures(n, n_labels, n_roles, forward_only):
    """Yield ``(code, labels, succ)`` for pointed structures of size ``n`` with point 0.

    One structure per isomorphism class (the one with the smallest code among
    relabelings fixing 0).  With ``forward_only`` every element must be
    reachable from 0, since unreachable parts cannot matter for forward logics.
    """
    nn = n * n
    ebits = n_roles * nn
    lbits = n_labels * n
    full = (1 << n) - 1
    perms = [(0,) + p for p in permutations(range(1, n))][1:]
    emaps = [[r * nn + p[x] * n + p[y] for r in range(n_roles) for x in range(n) for y in range(n)]
             for p in perms]
    lmaps = [[l * n + p[x] for l in range(n_labels) for x in range(n)] for p in perms]
    for ecode in range(1 << ebits):
        autos = []
        canonical = True
        for j, em in enumerate(emaps):
            pc = _permute(ecode, em)
            if pc < ecode:
                canonical = False
                break
            if pc == ecode:
                autos.append(j)
        if not canonical:
            continue
        succ = []
        for r in range(n_roles):
            rows = [(ecode >> (r * nn + x * n)) & full for x in range(n)]
            succ.append(rows)
            succ.append(_inverse_rows(rows, n))
        if forward_only:
            seen, frontier = 1, 1
            while frontier:
                nxt = 0
                for x in _bits(frontier):
                    for r in range(n_roles):
                        nxt |= succ[2 * r][x]
                frontier = nxt & ~seen
                seen |= nxt
            if seen != full:
                continue
        for lcode in range(1 << lbits):
            if any(_permute(lcode, lmaps[j]) < lcode for j in autos):
                continue
            labels = [(lcode >> (l * n)) & full for l in range(n_labels)]
            yield (ecode << lbits) | lcode, labels, succ


def sweep(ops, xs, ys, zs, roots, constraints, n, n_labels, n_roles, forward_only,
          pos=None, neg=None, limit=-1):
    """Exhaustive pass over all pointed structures of size ``n``.

    Structures where some instruction in ``constraints`` is not the full set
    are skipped.  Without ``pos``/``neg`` the result maps each realised type
    (bit ``j`` set iff ``roots[j]`` holds at the point) to the first structure
    code realising it.  With ``pos``/``neg`` it lists codes of structures whose
    point satisfies every ``pos`` instruction and no ``neg`` instruction, stopping
    after ``limit`` hits when ``limit`` is non-negative.
    """
    full = (1 << n) - 1
    types = {}
    hits = []
    for code, labels, succ in _structures(n, n_labels, n_roles, forward_only):
        out = eval_program(ops, xs, ys, zs, n, labels, succ)
        if any(out[c] != full for c in constraints):
            continue
        if pos is None and neg is None:
            key = 0
            for j, r in enumerate(roots):
                if out[r] & 1:
                    key |= 1 << j
            if key not in types:
                types[key] = code
        else:
            if all(out[p] & 1 for p in pos or ()) and not any(out[q] & 1 for q in neg or ()):
                hits.append(code)
                if 0 <= limit <= len(hits):
                    break
    return hits if (pos is not None or neg is not None) else types


def greatest_simulation(n1, lab1, succ1, n2, lab2, succ2):
    """Largest simulation from structure 1 into structure 2.

    ``lab1[x]``/``lab2[y]`` are label-set bitmasks; ``succ1[r]``/``succ2[r]``
    successor rows for each shared role.  Returns, per element of structure 1,
    the bitmask of elements of structure 2 that simulate it.
    """
    z = []
    for x in range(n1):
        m = 0
        for y in range(n2):
            if not lab1[x] & ~lab2[y]:
                m |= 1 << y
        z.append(m)
    preds = [_inverse_rows(rows, n2) for rows in succ2]
    changed = True
    while changed:
        changed = False
        for r in range(len(succ1)):
            rows1 = succ1[r]
            pred2 = preds[r]
            for x in range(n1):
                zx = z[x]
                if not zx:
                    continue
                for x2 in _bits(rows1[x]):
                    pre = 0
                    for y2 in _bits(z[x2]):
                        pre |= pred2[y2]
                    zx &= pre
                    if not zx:
                        break
                if zx != z[x]:
                    z[x] = zx
                    changed = True
    return z
