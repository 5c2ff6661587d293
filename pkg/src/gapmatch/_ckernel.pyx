# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled choice kernels; a line-for-line port of ``_pykernel``."""

from libc.stdlib cimport malloc, free
from libc.string cimport memset

KIND_2018 = 0
KIND_PREFER_MORE = 1
KIND_PREFER_MORE_STAGED = 2
KIND_2019 = 3

PASS_ZERO = 0
PASS_MIN = 1
PASS_GENDER = 2
PASS_REGULAR = 3

BACKEND = "cython"

cdef enum:
    ANY = 0
    NON_GENDER = 1
    GENDER = 2


cdef class CompiledReport:
    cdef int *pop_min_
    cdef int *pop_quota_
    cdef char *pop_gender_
    cdef int *ptr
    cdef int *idx
    cdef char *zero_
    cdef readonly int n_candidates
    cdef readonly int n_populations
    cdef readonly int n_min_target

    def __cinit__(self, pop_min, pop_quota, pop_gender, cand_pops, zero):
        cdef int i, j, total = 0
        self.n_populations = len(pop_min)
        self.n_candidates = len(cand_pops)
        for ps in cand_pops:
            total += len(ps)
        self.pop_min_ = <int *>malloc(max(self.n_populations, 1) * sizeof(int))
        self.pop_quota_ = <int *>malloc(max(self.n_populations, 1) * sizeof(int))
        self.pop_gender_ = <char *>malloc(max(self.n_populations, 1) * sizeof(char))
        self.ptr = <int *>malloc((self.n_candidates + 1) * sizeof(int))
        self.idx = <int *>malloc(max(total, 1) * sizeof(int))
        self.zero_ = <char *>malloc(max(self.n_candidates, 1) * sizeof(char))
        if (not self.pop_min_ or not self.pop_quota_ or not self.pop_gender_
                or not self.ptr or not self.idx or not self.zero_):
            raise MemoryError()
        self.n_min_target = 0
        for i in range(self.n_populations):
            self.pop_min_[i] = pop_min[i]
            self.pop_quota_[i] = pop_quota[i]
            self.pop_gender_[i] = 1 if pop_gender[i] else 0
            if self.pop_min_[i] > 0:
                self.n_min_target += 1
        j = 0
        for i in range(self.n_candidates):
            self.ptr[i] = j
            self.zero_[i] = 1 if zero[i] else 0
            for p in cand_pops[i]:
                self.idx[j] = p
                j += 1
        self.ptr[self.n_candidates] = j

    def __dealloc__(self):
        free(self.pop_min_)
        free(self.pop_quota_)
        free(self.pop_gender_)
        free(self.ptr)
        free(self.idx)
        free(self.zero_)

    cdef inline int violated(self, int c, int *counts) nogil:
        cdef int k, p, q
        for k in range(self.ptr[c], self.ptr[c + 1]):
            p = self.idx[k]
            q = self.pop_quota_[p]
            if q >= 0 and counts[p] + 1 > q:
                return p
        return -1

    cdef inline bint helps(self, int c, int *counts, int mode) nogil:
        cdef int k, p, m
        for k in range(self.ptr[c], self.ptr[c + 1]):
            p = self.idx[k]
            m = self.pop_min_[p]
            if m > 0 and counts[p] < m:
                if mode == ANY or (mode == GENDER) == (self.pop_gender_[p] != 0):
                    return True
        return False

    cdef inline int unmet(self, int c, int *counts) nogil:
        cdef int k, p, m, n = 0
        for k in range(self.ptr[c], self.ptr[c + 1]):
            p = self.idx[k]
            m = self.pop_min_[p]
            if m > 0 and counts[p] < m:
                n += 1
        return n

    cdef inline void accept(self, int c, int *counts) nogil:
        cdef int k
        for k in range(self.ptr[c], self.ptr[c + 1]):
            counts[self.idx[k]] += 1

    def choose(self, int kind, applicants, committed=()):
        cdef int n = len(applicants)
        cdef int npop = self.n_populations
        cdef int i, j, c, p, level, best, best_n, m, remaining
        cdef int *apps = <int *>malloc(max(n, 1) * sizeof(int))
        cdef int *status = <int *>malloc(max(n, 1) * sizeof(int))
        cdef int *order = <int *>malloc(max(n, 1) * sizeof(int))
        cdef char *taken = <char *>malloc(max(n, 1) * sizeof(char))
        cdef char *decided = <char *>malloc(max(n, 1) * sizeof(char))
        cdef int *counts = <int *>malloc(max(npop, 1) * sizeof(int))
        cdef int n_chosen = 0
        if not apps or not status or not order or not taken or not decided or not counts:
            free(apps); free(status); free(order); free(taken); free(decided); free(counts)
            raise MemoryError()
        try:
            memset(counts, 0, max(npop, 1) * sizeof(int))
            memset(taken, 0, max(n, 1) * sizeof(char))
            memset(decided, 0, max(n, 1) * sizeof(char))
            for i in range(n):
                apps[i] = applicants[i]
                status[i] = -1
                if apps[i] < 0 or apps[i] >= self.n_candidates:
                    raise IndexError("applicant out of range")
                if i > 0 and apps[i - 1] >= apps[i]:
                    raise ValueError("applicants must be strictly ascending")
            for c in committed:
                if c < 0 or c >= self.n_candidates:
                    raise IndexError("committed candidate out of range")
                self.accept(c, counts)

            if kind == KIND_2018:
                for j in range(n):
                    c = apps[j]
                    if self.helps(c, counts, ANY):
                        p = self.violated(c, counts)
                        if p < 0:
                            self.accept(c, counts); taken[j] = 1; status[j] = PASS_MIN
                            order[n_chosen] = c; n_chosen += 1
                        else:
                            status[j] = -(p + 1)
                for j in range(n):
                    if not taken[j]:
                        c = apps[j]
                        p = self.violated(c, counts)
                        if p < 0:
                            self.accept(c, counts); taken[j] = 1; status[j] = PASS_REGULAR
                            order[n_chosen] = c; n_chosen += 1
                        else:
                            status[j] = -(p + 1)

            elif kind == KIND_PREFER_MORE:
                remaining = n
                while remaining > 0:
                    best = -1
                    best_n = -1
                    for j in range(n):
                        if not decided[j]:
                            m = self.unmet(apps[j], counts)
                            if m > best_n:
                                best = j
                                best_n = m
                    c = apps[best]
                    p = self.violated(c, counts)
                    if p < 0:
                        self.accept(c, counts); taken[best] = 1
                        status[best] = PASS_MIN if best_n > 0 else PASS_REGULAR
                        order[n_chosen] = c; n_chosen += 1
                    else:
                        status[best] = -(p + 1)
                    decided[best] = 1
                    remaining -= 1

            elif kind == KIND_PREFER_MORE_STAGED:
                level = self.n_min_target
                while level >= 0:
                    for j in range(n):
                        c = apps[j]
                        if not taken[j] and self.unmet(c, counts) == level:
                            p = self.violated(c, counts)
                            if p < 0:
                                self.accept(c, counts); taken[j] = 1
                                status[j] = PASS_MIN if level > 0 else PASS_REGULAR
                                order[n_chosen] = c; n_chosen += 1
                            else:
                                status[j] = -(p + 1)
                    level -= 1

            elif kind == KIND_2019:
                for j in range(n):
                    c = apps[j]
                    if self.zero_[c]:
                        self.accept(c, counts); taken[j] = 1; status[j] = PASS_ZERO
                        order[n_chosen] = c; n_chosen += 1
                for i in range(3):
                    for j in range(n):
                        if taken[j]:
                            continue
                        c = apps[j]
                        if i == 0 and not self.helps(c, counts, NON_GENDER):
                            continue
                        if i == 1 and not self.helps(c, counts, GENDER):
                            continue
                        p = self.violated(c, counts)
                        if p < 0:
                            self.accept(c, counts); taken[j] = 1
                            status[j] = (PASS_MIN, PASS_GENDER, PASS_REGULAR)[i]
                            order[n_chosen] = c; n_chosen += 1
                        else:
                            status[j] = -(p + 1)
            else:
                raise ValueError(f"unknown choice kind code {kind}")

            return [order[i] for i in range(n_chosen)], [status[i] for i in range(n)]
        finally:
            free(apps); free(status); free(order); free(taken); free(decided); free(counts)
