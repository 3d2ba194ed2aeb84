"""Pure Python / numpy implementations of the hot loops.

These mirror ``_kernels.pyx`` exactly and are used when the compiled module
is unavailable (or when ONESIDED_PURE_PYTHON=1 is set).
"""
import numpy as np

FREE = -1


def matching_cover(eu, ev, n):
    """Greedy maximal matching over the edges in the given order.

    Returns a boolean mask of the matched vertices (the 2-approximate
    vertex cover of the edge list).
    """
    covered = [False] * int(n)
    for u, v in zip(np.asarray(eu).tolist(), np.asarray(ev).tolist()):
        if not covered[u] and not covered[v]:
            covered[u] = True
            covered[v] = True
    return np.array(covered, dtype=bool)


def assign_combos(dist, combos):
    """For each row of ``combos`` (k center ids), label every point by its
    nearest center; ties go to the lowest position in the combo."""
    dist = np.asarray(dist, dtype=np.float64)
    combos = np.asarray(combos, dtype=np.int64)
    n = dist.shape[0]
    out = np.empty((combos.shape[0], n), dtype=np.int32)
    chunk = max(1, 2_000_000 // max(1, n * combos.shape[1]))
    for start in range(0, combos.shape[0], chunk):
        block = combos[start:start + chunk]
        d = dist[:, block]  # n x g x k
        out[start:start + len(block)] = np.argmin(d, axis=2).T
    return out


def _color_counts(indptr, indices, colors, k):
    n = len(colors)
    counts = [[0] * k for _ in range(n)]
    for x in range(n):
        row = counts[x]
        for y in indices[indptr[x]:indptr[x + 1]]:
            c = colors[y]
            if c >= 0:
                row[c] += 1
    return counts


def uncolor_fixpoint(indptr, indices, colors, k, threshold):
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    colors = np.asarray(colors, dtype=np.int64).tolist()
    n = len(colors)
    counts = _color_counts(indptr, indices, colors, k)
    passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        for x in range(n):
            c = colors[x]
            if c < 0:
                continue
            row = counts[x]
            for c2 in range(k):
                if c2 != c and row[c2] < threshold:
                    colors[x] = FREE
                    for y in indices[indptr[x]:indptr[x + 1]]:
                        counts[y][c] -= 1
                    changed = True
                    break
    return np.array(colors, dtype=np.int64), passes


def safe_recolor_fixpoint(indptr, indices, colors, k):
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    colors = np.asarray(colors, dtype=np.int64).tolist()
    n = len(colors)
    counts = _color_counts(indptr, indices, colors, k)
    passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        for x in range(n):
            if colors[x] >= 0:
                continue
            row = counts[x]
            missing = -1
            used = 0
            for c in range(k):
                if row[c] > 0:
                    used += 1
                else:
                    missing = c
            if used == k - 1:
                colors[x] = missing
                for y in indices[indptr[x]:indptr[x + 1]]:
                    counts[y][missing] += 1
                changed = True
    return np.array(colors, dtype=np.int64), passes
