"""Pure-Python CART growth kernel (reference implementation and fallback).

Must stay operation-for-operation identical to ``_cart_ext.pyx`` so both
backends grow the same tree: the same node order, the same strict-improvement
tie rule and the same floating-point expression for child impurity.
"""
import numpy as np


def grow_tree(codes, nlev, ordered, y, min_split, min_leaf, max_depth, complexity):
    """Grow a Gini classification tree on integer-coded features.

    Parameters
    ----------
    codes : int32 array (N, F)
        Feature codes in ``[0, nlev[f])``.  Ordered features split as
        ``code <= cut``; unordered ones by prefixes of levels sorted on their
        within-node share of ``y == 1``.
    nlev, ordered : int32 / uint8 arrays (F,)
    y : uint8 array (N,)

    Returns
    -------
    leaf : int32 (N,)  node id of each record's leaf
    nodes : int64 (n_nodes, 7) columns feature, cut, cut_next, left, right, n, n_pos
    left_levels : uint8 (n_nodes, max_levels)  left level set of unordered splits
    """
    codes = np.ascontiguousarray(codes, dtype=np.int32)
    y = np.ascontiguousarray(y, dtype=np.uint8)
    N, F = codes.shape
    nlev = [int(v) for v in nlev]
    ordered = [bool(v) for v in ordered]
    maxlev = max(nlev) if F else 1

    idx = np.arange(N, dtype=np.int64)
    leaf = np.zeros(N, dtype=np.int32)
    nodes = []
    masks = []
    a0 = int(y.sum())
    root_imp = 2.0 * a0 * (N - a0) / N if N > 0 else 0.0
    floor = complexity * root_imp
    eps = 1e-12 * root_imp

    nodes.append([-1, -1, -1, -1, -1, N, a0])
    masks.append(np.zeros(maxlev, dtype=np.uint8))
    stack = [(0, 0, N, 0)]
    while stack:
        node, start, end, depth = stack.pop()
        seg = idx[start:end]
        n = end - start
        a = int(y[seg].sum())
        best_f, best_q, best_order = -1, -1, None
        if n >= min_split and depth < max_depth and 0 < a < n:
            node_imp = 2.0 * a * (n - a) / n
            best = node_imp
            ys = y[seg].astype(np.int64)
            for f in range(F):
                col = codes[seg, f]
                ct = np.bincount(col, minlength=nlev[f])
                c1 = np.bincount(col, weights=ys, minlength=nlev[f]).astype(np.int64)
                present = np.flatnonzero(ct)
                if present.size < 2:
                    continue
                if not ordered[f]:
                    share = c1[present] / ct[present]
                    present = present[np.lexsort((present, share))]
                nL = np.cumsum(ct[present])[:-1].astype(np.float64)
                aL = np.cumsum(c1[present])[:-1].astype(np.float64)
                nR = n - nL
                bL = nL - aL
                aR = a - aL
                bR = nR - aR
                valid = (nL >= min_leaf) & (nR >= min_leaf)
                if not valid.any():
                    continue
                with np.errstate(divide="ignore", invalid="ignore"):
                    imp = 2.0 * aL * bL / nL + 2.0 * aR * bR / nR
                imp[~valid] = np.inf
                q = int(np.argmin(imp))
                if imp[q] < best:
                    best, best_f, best_q, best_order = float(imp[q]), f, q, present
            if best_f >= 0:
                dec = node_imp - best
                if not (dec > eps and dec >= floor):
                    best_f = -1
        if best_f < 0:
            leaf[seg] = node
            continue
        left_set = best_order[: best_q + 1]
        mask = np.zeros(maxlev, dtype=np.uint8)
        mask[left_set] = 1
        go_left = mask[codes[seg, best_f]].astype(bool)
        lseg, rseg = seg[go_left], seg[~go_left]
        idx[start:end] = np.concatenate([lseg, rseg])
        lid, rid = len(nodes), len(nodes) + 1
        cut = int(best_order[best_q]) if ordered[best_f] else -1
        cut_next = int(best_order[best_q + 1]) if ordered[best_f] else -1
        ya = y[lseg]
        nodes[node][:5] = [best_f, cut, cut_next, lid, rid]
        masks[node] = mask if not ordered[best_f] else np.zeros(maxlev, dtype=np.uint8)
        nodes.append([-1, -1, -1, -1, -1, lseg.size, int(ya.sum())])
        nodes.append([-1, -1, -1, -1, -1, rseg.size, a - int(ya.sum())])
        masks.append(np.zeros(maxlev, dtype=np.uint8))
        masks.append(np.zeros(maxlev, dtype=np.uint8))
        mid = start + lseg.size
        stack.append((rid, mid, end, depth + 1))
        stack.append((lid, start, mid, depth + 1))
    return leaf, np.asarray(nodes, dtype=np.int64), np.vstack(masks)
