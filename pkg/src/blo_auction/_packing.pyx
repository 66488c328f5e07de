# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled weighted set packing kernel; same contract as ``_packing_py.pack``.

Works on int64 weights and multi-word uint64 masks. The caller must make sure
that ``sum(weights) * lcm(bundle sizes)`` fits in a signed 62-bit integer;
``pack`` raises OverflowError otherwise so the dispatcher can fall back.
"""
from math import lcm

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef int64_t LIMIT = (<int64_t>1) << 62


cdef class _Search:
    cdef uint64_t[:, ::1] masks
    cdef int64_t[::1] weights
    cdef int64_t[:, ::1] bound
    cdef int64_t[::1] order
    cdef uint64_t[:, ::1] used
    cdef int64_t[::1] chosen
    cdef int n, nwords, nbits, nchosen
    cdef int64_t scale, best, target

    cdef int64_t free_sum(self, int k, int depth) nogil:
        cdef int64_t s = 0
        cdef int g
        for g in range(self.nbits):
            if not (self.used[depth, g >> 6] >> (g & 63)) & 1:
                s += self.bound[k, g]
        return s

    cdef bint fits(self, int i, int depth) nogil:
        cdef int w
        for w in range(self.nwords):
            if self.masks[i, w] & self.used[depth, w]:
                return False
        return True

    cdef void push(self, int i, int depth) nogil:
        cdef int w
        for w in range(self.nwords):
            self.used[depth + 1, w] = self.used[depth, w] | self.masks[i, w]

    cdef void copy_down(self, int depth) nogil:
        cdef int w
        for w in range(self.nwords):
            self.used[depth + 1, w] = self.used[depth, w]

    cdef void optimum(self, int k, int64_t cur) nogil:
        if cur > self.best:
            self.best = cur
        if k == self.n:
            return
        if cur * self.scale + self.free_sum(k, k) <= self.best * self.scale:
            return
        cdef int i = <int>self.order[k]
        if self.fits(i, k):
            self.push(i, k)
            self.optimum(k + 1, cur + self.weights[i])
        self.copy_down(k)
        self.optimum(k + 1, cur)

    cdef bint first_hit(self, int k, int64_t cur) nogil:
        if cur == self.target:
            return True
        if k == self.n:
            return False
        if cur * self.scale + self.free_sum(k, k) < self.target * self.scale:
            return False
        if self.fits(k, k):
            self.push(k, k)
            self.chosen[self.nchosen] = k
            self.nchosen += 1
            if self.first_hit(k + 1, cur + self.weights[k]):
                return True
            self.nchosen -= 1
        self.copy_down(k)
        return self.first_hit(k + 1, cur)


def _suffix(order, masks, scaled, nbits):
    n = len(order)
    bound = np.zeros((n + 1, max(nbits, 1)), dtype=np.int64)
    for k in range(n - 1, -1, -1):
        bound[k] = bound[k + 1]
        i = order[k]
        m, d = masks[i], scaled[i]
        g = 0
        while m:
            if m & 1 and d > bound[k, g]:
                bound[k, g] = d
            m >>= 1
            g += 1
    return bound


def pack(masks, weights):
    cdef _Search s
    cdef bint found
    n = len(masks)
    if n == 0:
        return 0, []
    nbits = max(m.bit_length() for m in masks)
    nwords = (nbits + 63) // 64
    scale = lcm(*(bin(m).count("1") for m in masks))
    if sum(weights) * scale >= LIMIT or max(weights) >= LIMIT:
        raise OverflowError("weights too large for the compiled kernel")
    scaled = [w * scale // bin(m).count("1") for m, w in zip(masks, weights)]

    words = np.zeros((n, nwords), dtype=np.uint64)
    for i, m in enumerate(masks):
        for w in range(nwords):
            words[i, w] = (m >> (64 * w)) & 0xFFFFFFFFFFFFFFFF

    s = _Search()
    s.n, s.nwords, s.nbits, s.scale = n, nwords, nbits, scale
    s.masks = words
    s.weights = np.asarray(weights, dtype=np.int64)
    s.used = np.zeros((n + 1, nwords), dtype=np.uint64)
    s.chosen = np.zeros(n, dtype=np.int64)

    order = sorted(range(n), key=lambda i: (-scaled[i], i))
    s.order = np.asarray(order, dtype=np.int64)
    s.bound = _suffix(order, masks, scaled, nbits)
    s.best = 0
    with nogil:
        s.optimum(0, 0)

    s.target = s.best
    s.bound = _suffix(list(range(n)), masks, scaled, nbits)
    s.nchosen = 0
    s.used[0, :] = 0
    with nogil:
        found = s.first_hit(0, 0)
    assert found, "phase 2 failed to reach the phase 1 optimum"
    return int(s.best), [int(s.chosen[j]) for j in range(s.nchosen)]
