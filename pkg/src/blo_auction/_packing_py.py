"""Pure-Python weighted set packing kernel (fallback for ``_packing``).

Items are given in tie-break order: among optimal packings the one whose
sorted index list is lexicographically smallest is returned. Weights are
positive integers; masks are arbitrary-width int bitsets.
"""
from math import lcm


def _suffix_bounds(order, masks, scaled, nbits):
    # bound[k][g]: best scaled density on good g among items order[k:]
    bound = [[0] * nbits for _ in range(len(order) + 1)]
    for k in range(len(order) - 1, -1, -1):
        row = bound[k + 1][:]
        i = order[k]
        m, d = masks[i], scaled[i]
        g = 0
        while m:
            if m & 1 and d > row[g]:
                row[g] = d
            m >>= 1
            g += 1
        bound[k] = row
    return bound


def _free_sum(row, used, nbits):
    s = 0
    for g in range(nbits):
        if not (used >> g) & 1:
            s += row[g]
    return s


def pack(masks, weights):
    """Return ``(best_weight, chosen)`` with ``chosen`` a sorted index list."""
    n = len(masks)
    if n == 0:
        return 0, []
    nbits = max(m.bit_length() for m in masks)
    scale = lcm(*(bin(m).count("1") for m in masks))
    scaled = [w * scale // bin(m).count("1") for m, w in zip(masks, weights)]

    # phase 1: density-ordered search for the optimum value
    order = sorted(range(n), key=lambda i: (-scaled[i], i))
    bound = _suffix_bounds(order, masks, scaled, nbits)
    best = [0]

    def search(k, used, cur):
        if cur > best[0]:
            best[0] = cur
        if k == n:
            return
        if cur * scale + _free_sum(bound[k], used, nbits) <= best[0] * scale:
            return
        i = order[k]
        if not masks[i] & used:
            search(k + 1, used | masks[i], cur + weights[i])
        search(k + 1, used, cur)

    search(0, 0, 0)
    target = best[0]

    # phase 2: index-ordered, include-first search for the first packing hitting
    # the optimum; DFS order equals lexicographic order of sorted index lists
    ident = list(range(n))
    bound2 = _suffix_bounds(ident, masks, scaled, nbits)
    chosen: list[int] = []

    def find(k, used, cur):
        if cur == target:
            return True
        if k == n:
            return False
        if cur * scale + _free_sum(bound2[k], used, nbits) < target * scale:
            return False
        if not masks[k] & used:
            chosen.append(k)
            if find(k + 1, used | masks[k], cur + weights[k]):
                return True
            chosen.pop()
        return find(k + 1, used, cur)

    found = find(0, 0, 0)
    assert found, "phase 2 failed to reach the phase 1 optimum"
    return target, chosen
