"""Pure-Python choice kernels.

Same interface as the compiled ``_ckernel`` extension.  A report is compiled
to integer arrays: local candidate ``i`` is the PMA's ``i``-th best candidate
in strict order, and ``cand_pops[i]`` lists the populations containing it in
ascending index order (the capacity population is the last index).

``choose`` returns ``(chosen, status)``: ``chosen`` in acceptance order, and
``status[j]`` for the ``j``-th applicant (applicants sorted ascending), which
is the accepting pass code when accepted and ``-(p + 1)`` when rejected by
the maximum quota of population ``p``.
"""

KIND_2018 = 0
KIND_PREFER_MORE = 1
KIND_PREFER_MORE_STAGED = 2
KIND_2019 = 3

PASS_ZERO = 0
PASS_MIN = 1
PASS_GENDER = 2
PASS_REGULAR = 3

_ANY, _NON_GENDER, _GENDER = 0, 1, 2

BACKEND = "python"


class CompiledReport:
    def __init__(self, pop_min, pop_quota, pop_gender, cand_pops, zero):
        self.pop_min = list(pop_min)
        self.pop_quota = list(pop_quota)  # -1 = unbounded
        self.pop_gender = [bool(g) for g in pop_gender]
        self.cand_pops = [tuple(ps) for ps in cand_pops]
        self.zero = [bool(z) for z in zero]
        self.n_candidates = len(self.cand_pops)
        self.n_populations = len(self.pop_min)
        self.n_min_target = sum(1 for m in self.pop_min if m > 0)

    def choose(self, kind, applicants, committed=()):
        apps = list(applicants)
        if any(apps[j] >= apps[j + 1] for j in range(len(apps) - 1)):
            raise ValueError("applicants must be strictly ascending")
        counts = [0] * self.n_populations
        for c in committed:
            for p in self.cand_pops[c]:
                counts[p] += 1
        run = _Run(self, counts, apps)
        if kind == KIND_2018:
            run.y2018()
        elif kind == KIND_PREFER_MORE:
            run.prefer_more()
        elif kind == KIND_PREFER_MORE_STAGED:
            run.staged()
        elif kind == KIND_2019:
            run.y2019()
        else:
            raise ValueError(f"unknown choice kind code {kind}")
        return run.chosen, run.status


class _Run:
    def __init__(self, rep, counts, apps):
        self.rep = rep
        self.counts = counts
        self.apps = apps
        self.taken = [False] * len(apps)
        self.status = [-1] * len(apps)
        self.chosen = []

    def violated(self, c):
        quota, counts = self.rep.pop_quota, self.counts
        for p in self.rep.cand_pops[c]:
            q = quota[p]
            if q >= 0 and counts[p] + 1 > q:
                return p
        return -1

    def helps(self, c, mode):
        rep, counts = self.rep, self.counts
        for p in rep.cand_pops[c]:
            m = rep.pop_min[p]
            if m > 0 and counts[p] < m:
                if mode == _ANY or (mode == _GENDER) == rep.pop_gender[p]:
                    return True
        return False

    def unmet(self, c):
        rep, counts = self.rep, self.counts
        n = 0
        for p in rep.cand_pops[c]:
            m = rep.pop_min[p]
            if m > 0 and counts[p] < m:
                n += 1
        return n

    def accept(self, j, code):
        c = self.apps[j]
        for p in self.rep.cand_pops[c]:
            self.counts[p] += 1
        self.taken[j] = True
        self.status[j] = code
        self.chosen.append(c)

    def try_accept(self, j, code):
        p = self.violated(self.apps[j])
        if p < 0:
            self.accept(j, code)
        else:
            self.status[j] = -(p + 1)

    def y2018(self):
        for j, c in enumerate(self.apps):
            if self.helps(c, _ANY):
                self.try_accept(j, PASS_MIN)
        for j in range(len(self.apps)):
            if not self.taken[j]:
                self.try_accept(j, PASS_REGULAR)

    def prefer_more(self):
        undecided = list(range(len(self.apps)))
        while undecided:
            best, best_n = -1, -1
            for j in undecided:
                n = self.unmet(self.apps[j])
                if n > best_n:
                    best, best_n = j, n
            self.try_accept(best, PASS_MIN if best_n > 0 else PASS_REGULAR)
            undecided.remove(best)

    def staged(self):
        for level in range(self.rep.n_min_target, -1, -1):
            for j, c in enumerate(self.apps):
                if not self.taken[j] and self.unmet(c) == level:
                    self.try_accept(j, PASS_MIN if level > 0 else PASS_REGULAR)

    def y2019(self):
        for j, c in enumerate(self.apps):
            if self.rep.zero[c]:
                self.accept(j, PASS_ZERO)
        for j, c in enumerate(self.apps):
            if not self.taken[j] and self.helps(c, _NON_GENDER):
                self.try_accept(j, PASS_MIN)
        for j, c in enumerate(self.apps):
            if not self.taken[j] and self.helps(c, _GENDER):
                self.try_accept(j, PASS_GENDER)
        for j in range(len(self.apps)):
            if not self.taken[j]:
                self.try_accept(j, PASS_REGULAR)
