# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CART growth kernel; mirrors ``_cart_py.grow_tree`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, realloc

cnp.import_array()

ctypedef long long i64


cdef struct Frame:
    i64 node
    i64 start
    i64 end
    i64 depth


cdef inline bint share_less(i64 a, i64 b, i64* c1, i64* ct) noexcept nogil:
    # c1[a]/ct[a] < c1[b]/ct[b], ties by level index
    cdef i64 lhs = c1[a] * ct[b]
    cdef i64 rhs = c1[b] * ct[a]
    if lhs != rhs:
        return lhs < rhs
    return a < b


def grow_tree(codes_in, nlev_in, ordered_in, y_in, i64 min_split, i64 min_leaf,
              i64 max_depth, double complexity):
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] codes_arr = np.ascontiguousarray(codes_in, dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] y_arr = np.ascontiguousarray(y_in, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] nlev_arr = np.ascontiguousarray(nlev_in, dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] ord_arr = np.ascontiguousarray(ordered_in, dtype=np.uint8)
    cdef int[:, ::1] codes = codes_arr
    cdef unsigned char[::1] y = y_arr
    cdef int[::1] nlev = nlev_arr
    cdef unsigned char[::1] ordered = ord_arr
    cdef i64 N = codes.shape[0]
    cdef i64 F = codes.shape[1]
    cdef i64 maxlev = 1
    cdef i64 f, i, j, l, P, r
    for f in range(F):
        if nlev[f] > maxlev:
            maxlev = nlev[f]

    cdef cnp.ndarray[cnp.int32_t, ndim=1] leaf_arr = np.zeros(N, dtype=np.int32)
    cdef int[::1] leaf = leaf_arr

    cdef i64* idx = <i64*> malloc(max(N, 1) * sizeof(i64))
    cdef i64* tmp = <i64*> malloc(max(N, 1) * sizeof(i64))
    cdef i64* ct = <i64*> malloc(maxlev * sizeof(i64))
    cdef i64* c1 = <i64*> malloc(maxlev * sizeof(i64))
    cdef i64* order = <i64*> malloc(maxlev * sizeof(i64))
    cdef i64* best_order = <i64*> malloc(maxlev * sizeof(i64))
    cdef unsigned char* mask = <unsigned char*> malloc(maxlev)
    cdef i64 cap = 64
    cdef i64* nodes = <i64*> malloc(cap * 7 * sizeof(i64))
    cdef unsigned char* masks = <unsigned char*> malloc(cap * maxlev)
    cdef i64 scap = 64
    cdef Frame* stack = <Frame*> malloc(scap * sizeof(Frame))
    if (idx == NULL or tmp == NULL or ct == NULL or c1 == NULL or order == NULL
            or best_order == NULL or mask == NULL or nodes == NULL or masks == NULL or stack == NULL):
        free(idx); free(tmp); free(ct); free(c1); free(order); free(best_order)
        free(mask); free(nodes); free(masks); free(stack)
        raise MemoryError()

    cdef i64 n_nodes = 1
    cdef i64 sp = 0
    cdef i64 a0 = 0, a, n, node, start, end, depth, key, nl, nr
    cdef i64 best_f, best_q, best_P, lid, rid, mid, la
    cdef double root_imp, floor_, eps, node_imp, best, imp, dec
    cdef double dnL, daL, dnR, dbL, daR, dbR
    cdef i64 cnL, caL
    cdef Frame fr
    cdef i64* grown
    cdef unsigned char* grown_m
    cdef Frame* grown_s
    cdef bint oom = False

    with nogil:
        for i in range(N):
            idx[i] = i
            a0 += y[i]
        root_imp = 2.0 * a0 * (N - a0) / N if N > 0 else 0.0
        floor_ = complexity * root_imp
        eps = 1e-12 * root_imp
        for j in range(7):
            nodes[j] = -1
        nodes[5] = N
        nodes[6] = a0
        for l in range(maxlev):
            masks[l] = 0
        stack[0].node = 0
        stack[0].start = 0
        stack[0].end = N
        stack[0].depth = 0
        sp = 1
        while sp > 0:
            sp -= 1
            fr = stack[sp]
            node = fr.node
            start = fr.start
            end = fr.end
            depth = fr.depth
            n = end - start
            a = 0
            for i in range(start, end):
                a += y[idx[i]]
            best_f = -1
            best_q = -1
            best_P = 0
            if n >= min_split and depth < max_depth and a > 0 and a < n:
                node_imp = 2.0 * a * (n - a) / n
                best = node_imp
                for f in range(F):
                    for l in range(nlev[f]):
                        ct[l] = 0
                        c1[l] = 0
                    for i in range(start, end):
                        r = idx[i]
                        l = codes[r, f]
                        ct[l] += 1
                        c1[l] += y[r]
                    P = 0
                    for l in range(nlev[f]):
                        if ct[l] > 0:
                            order[P] = l
                            P += 1
                    if P < 2:
                        continue
                    if not ordered[f]:
                        # insertion sort on (share, level)
                        for i in range(1, P):
                            key = order[i]
                            j = i - 1
                            while j >= 0 and share_less(key, order[j], c1, ct):
                                order[j + 1] = order[j]
                                j -= 1
                            order[j + 1] = key
                    cnL = 0
                    caL = 0
                    for i in range(P - 1):
                        cnL += ct[order[i]]
                        caL += c1[order[i]]
                        dnL = <double> cnL
                        daL = <double> caL
                        dnR = n - dnL
                        dbL = dnL - daL
                        daR = a - daL
                        dbR = dnR - daR
                        if dnL < min_leaf or dnR < min_leaf:
                            continue
                        imp = 2.0 * daL * dbL / dnL + 2.0 * daR * dbR / dnR
                        if imp < best:
                            best = imp
                            best_f = f
                            best_q = i
                            best_P = P
                            for j in range(P):
                                best_order[j] = order[j]
                if best_f >= 0:
                    dec = node_imp - best
                    if not (dec > eps and dec >= floor_):
                        best_f = -1
            if best_f < 0:
                for i in range(start, end):
                    leaf[idx[i]] = <int> node
                continue

            for l in range(maxlev):
                mask[l] = 0
            for j in range(best_q + 1):
                mask[best_order[j]] = 1
            nl = 0
            la = 0
            for i in range(start, end):
                r = idx[i]
                if mask[codes[r, best_f]]:
                    tmp[nl] = r
                    nl += 1
                    la += y[r]
            nr = nl
            for i in range(start, end):
                r = idx[i]
                if not mask[codes[r, best_f]]:
                    tmp[nr] = r
                    nr += 1
            for i in range(n):
                idx[start + i] = tmp[i]

            if n_nodes + 2 > cap:
                cap *= 2
                grown = <i64*> realloc(nodes, cap * 7 * sizeof(i64))
                if grown == NULL:
                    oom = True
                    break
                nodes = grown
                grown_m = <unsigned char*> realloc(masks, cap * maxlev)
                if grown_m == NULL:
                    oom = True
                    break
                masks = grown_m
            lid = n_nodes
            rid = n_nodes + 1
            n_nodes += 2
            nodes[node * 7 + 0] = best_f
            if ordered[best_f]:
                nodes[node * 7 + 1] = best_order[best_q]
                nodes[node * 7 + 2] = best_order[best_q + 1]
                for l in range(maxlev):
                    masks[node * maxlev + l] = 0
            else:
                nodes[node * 7 + 1] = -1
                nodes[node * 7 + 2] = -1
                for l in range(maxlev):
                    masks[node * maxlev + l] = mask[l]
            nodes[node * 7 + 3] = lid
            nodes[node * 7 + 4] = rid
            for j in range(5):
                nodes[lid * 7 + j] = -1
                nodes[rid * 7 + j] = -1
            nodes[lid * 7 + 5] = nl
            nodes[lid * 7 + 6] = la
            nodes[rid * 7 + 5] = n - nl
            nodes[rid * 7 + 6] = a - la
            for l in range(maxlev):
                masks[lid * maxlev + l] = 0
                masks[rid * maxlev + l] = 0
            if sp + 2 > scap:
                scap *= 2
                grown_s = <Frame*> realloc(stack, scap * sizeof(Frame))
                if grown_s == NULL:
                    oom = True
                    break
                stack = grown_s
            mid = start + nl
            stack[sp].node = rid
            stack[sp].start = mid
            stack[sp].end = end
            stack[sp].depth = depth + 1
            stack[sp + 1].node = lid
            stack[sp + 1].start = start
            stack[sp + 1].end = mid
            stack[sp + 1].depth = depth + 1
            sp += 2

    free(idx); free(tmp); free(ct); free(c1); free(order); free(best_order); free(mask)
    if oom:
        free(nodes); free(masks); free(stack)
        raise MemoryError()
    nodes_out = np.empty((n_nodes, 7), dtype=np.int64)
    masks_out = np.empty((n_nodes, maxlev), dtype=np.uint8)
    cdef i64[:, ::1] nv = nodes_out
    cdef unsigned char[:, ::1] mv = masks_out
    for i in range(n_nodes):
        for j in range(7):
            nv[i, j] = nodes[i * 7 + j]
        for l in range(maxlev):
            mv[i, l] = masks[i * maxlev + l]
    free(nodes); free(masks); free(stack)
    return leaf_arr, nodes_out, masks_out
