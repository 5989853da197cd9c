"""CNF construction and a self-contained CDCL SAT solver.

Literals are signed integers in the DIMACS convention: variable v > 0,
literal +v or -v.  The solver is complete (two-watched-literal propagation,
first-UIP learning, Luby restarts) and deterministic: decisions break
activity ties by smallest variable, and no randomness is used anywhere.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Optional, Sequence

from .errors import ArityMismatch


@dataclass
class SolveBudget:
    max_conflicts: int = 1_000_000
    max_seconds: Optional[float] = 10.0


@dataclass
class SatVerdict:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[dict[int, bool]] = None
    reason: Optional[str] = None


class CnfFormula:
    """A growing clause database with a variable allocator."""

    def __init__(self):
        self.num_vars = 0
        self.clauses: list[list[int]] = []

    def fresh_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_clause(self, lits: Sequence[int]) -> None:
        for l in lits:
            if l == 0 or abs(l) > self.num_vars:
                raise ValueError(f"literal {l} outside allocated variables")
        self.clauses.append(list(lits))

    def add_and2(self, a: int, b: int) -> int:
        """Tseitin AND gate: returns f with f <-> (a & b)."""
        f = self.fresh_var()
        self.add_clause([-f, a])
        self.add_clause([-f, b])
        self.add_clause([f, -a, -b])
        return f

    def add_xor(self, a: int, b: int) -> int:
        """Tseitin XOR gate: returns f with f <-> (a ^ b)."""
        f = self.fresh_var()
        self.add_clause([-f, a, b])
        self.add_clause([-f, -a, -b])
        self.add_clause([f, -a, b])
        self.add_clause([f, a, -b])
        return f

    def add_or(self, lits: Sequence[int]) -> int:
        """Tseitin OR over arbitrarily many literals; returns the output."""
        f = self.fresh_var()
        for l in lits:
            self.add_clause([f, -l])
        self.add_clause([-f] + list(lits))
        return f

    def add_tt_constraint(self, tt, input_lits: Sequence[int]) -> int:
        """Constrain a fresh output f to equal tt(inputs).

        The table may be an int (bit p = output under pattern p), a string of
        '0'/'1' characters, or a sequence of bools; the character at position
        p is the output under pattern p, and bit i of p is the value of
        input_lits[i].  Clauses come from prime-implicant covers of the
        on-set and off-set.
        """
        n = len(input_lits)
        bits = _tt_to_int(tt, n)
        f = self.fresh_var()
        size = 1 << n
        onset = [p for p in range(size) if (bits >> p) & 1]
        offset = [p for p in range(size) if not (bits >> p) & 1]
        for cube_mask, cube_val in _isop(onset, n):
            clause = [f]
            for i in range(n):
                if (cube_mask >> i) & 1:
                    lit = input_lits[i]
                    clause.append(-lit if (cube_val >> i) & 1 else lit)
            self.add_clause(clause)
        for cube_mask, cube_val in _isop(offset, n):
            clause = [-f]
            for i in range(n):
                if (cube_mask >> i) & 1:
                    lit = input_lits[i]
                    clause.append(-lit if (cube_val >> i) & 1 else lit)
            self.add_clause(clause)
        return f


def _tt_to_int(tt, n: int) -> int:
    size = 1 << n
    if isinstance(tt, int):
        if tt < 0 or tt >> size:
            raise ArityMismatch(f"truth table does not fit {n} inputs")
        return tt
    if isinstance(tt, str):
        tt = tt.replace(",", "").replace(" ", "")
        if len(tt) != size or set(tt) - {"0", "1"}:
            raise ArityMismatch(f"expected {size} table bits, got {tt!r}")
        return sum(1 << p for p, ch in enumerate(tt) if ch == "1")
    vals = list(tt)
    if len(vals) != size:
        raise ArityMismatch(f"expected {size} table bits, got {len(vals)}")
    return sum(1 << p for p, v in enumerate(vals) if v)


def _isop(minterms: list[int], n: int) -> list[tuple[int, int]]:
    """Greedy prime-implicant cover of the given minterms.

    Cubes are (mask, value) pairs: inputs in `mask` are fixed to the bits of
    `value`, the rest are free.  Covering all of {0..2^n-1} yields the single
    empty cube (0, 0).
    """
    if not minterms:
        return []
    full = (1 << n) - 1
    current = {(full, m) for m in minterms}
    primes: set[tuple[int, int]] = set()
    while current:
        merged: set[tuple[int, int]] = set()
        nxt: set[tuple[int, int]] = set()
        for mask, val in current:
            for i in range(n):
                bit = 1 << i
                if not mask & bit:
                    continue
                partner = (mask, val ^ bit)
                if partner in current:
                    nxt.add((mask & ~bit, val & ~bit))
                    merged.add((mask, val))
                    merged.add(partner)
        primes |= current - merged
        current = nxt
    # greedy cover, deterministic order: widest cubes first
    cover: list[tuple[int, int]] = []
    uncovered = set(minterms)
    candidates = sorted(primes, key=lambda c: (bin(c[0]).count("1"), c[0], c[1]))
    while uncovered:
        best = None
        best_gain = -1
        for mask, val in candidates:
            gain = sum(1 for m in uncovered if m & mask == val)
            if gain > best_gain:
                best, best_gain = (mask, val), gain
        assert best is not None and best_gain > 0
        cover.append(best)
        mask, val = best
        uncovered = {m for m in uncovered if m & mask != val}
    return cover


_UNDEF, _TRUE, _FALSE = 0, 1, 2


class _Solver:
    """CDCL with two-watched literals, first-UIP learning, Luby restarts."""

    def __init__(self, num_vars: int, clauses: list[list[int]]):
        n = num_vars
        self.n = n
        self.clauses: list[list[int]] = []
        self.lit_val = bytearray(2 * n + 2)  # indexed by _lidx
        self.level = [0] * (n + 1)
        self.reason: list[Optional[int]] = [None] * (n + 1)
        self.trail: list[int] = []
        self.lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.heap: list[tuple[float, int]] = []
        self.phase = bytearray(n + 1)  # saved phase, 1 = true
        self.ok = True
        for c in clauses:
            if not self._add_clause(c):
                self.ok = False
                break
        for v in range(1, n + 1):
            heappush(self.heap, (0.0, v))

    @staticmethod
    def _lidx(l: int) -> int:
        return (l << 1) if l > 0 else ((-l) << 1) | 1

    def _value(self, l: int) -> int:
        return self.lit_val[self._lidx(l)]

    def _add_clause(self, lits: list[int]) -> bool:
        seen = set()
        c = []
        for l in lits:
            if -l in seen:
                return True  # tautology
            if l not in seen:
                seen.add(l)
                c.append(l)
        if not c:
            return False
        if len(c) == 1:
            return self._enqueue(c[0], None)
        ci = len(self.clauses)
        self.clauses.append(c)
        self.watches[self._lidx(c[0])].append(ci)
        self.watches[self._lidx(c[1])].append(ci)
        return True

    def _enqueue(self, l: int, reason: Optional[int]) -> bool:
        val = self.lit_val[self._lidx(l)]
        if val == _TRUE:
            return True
        if val == _FALSE:
            return False
        v = abs(l)
        self.lit_val[self._lidx(l)] = _TRUE
        self.lit_val[self._lidx(-l)] = _FALSE
        self.level[v] = len(self.lim)
        self.reason[v] = reason
        self.phase[v] = 1 if l > 0 else 0
        self.trail.append(l)
        return True

    def _propagate(self) -> Optional[int]:
        """Returns the index of a conflicting clause, or None."""
        watches = self.watches
        lit_val = self.lit_val
        clauses = self.clauses
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            neg_idx = self._lidx(-p)
            wl = watches[neg_idx]
            if not wl:
                continue
            keep = []
            j = 0
            n_wl = len(wl)
            while j < n_wl:
                ci = wl[j]
                j += 1
                c = clauses[ci]
                if c[0] == -p:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fidx = (first << 1) if first > 0 else ((-first) << 1) | 1
                if lit_val[fidx] == _TRUE:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(c)):
                    lk = c[k]
                    kidx = (lk << 1) if lk > 0 else ((-lk) << 1) | 1
                    if lit_val[kidx] != _FALSE:
                        c[1], c[k] = lk, c[1]
                        watches[kidx].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if lit_val[fidx] == _FALSE:
                    keep.extend(wl[j:])
                    watches[neg_idx] = keep
                    return ci
                self._enqueue(first, ci)
            watches[neg_idx] = keep
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.n + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = bytearray(self.n + 1)
        learnt: list[int] = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        cur_level = len(self.lim)
        c = self.clauses[confl]
        while True:
            for q in c:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self.level[v] == cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = abs(p)
            seen[v] = 0
            counter -= 1
            if counter == 0:
                learnt[0] = -p
                break
            c = self.clauses[self.reason[v]]
        if len(learnt) == 1:
            return learnt, 0
        bt = max(self.level[abs(q)] for q in learnt[1:])
        # watch the asserting literal and one literal at the backtrack level
        for i in range(1, len(learnt)):
            if self.level[abs(learnt[i])] == bt:
                learnt[1], learnt[i] = learnt[i], learnt[1]
                break
        return learnt, bt

    def _backtrack(self, target: int) -> None:
        until = self.lim[target]
        for l in reversed(self.trail[until:]):
            v = abs(l)
            self.lit_val[self._lidx(l)] = _UNDEF
            self.lit_val[self._lidx(-l)] = _UNDEF
            self.reason[v] = None
            heappush(self.heap, (-self.activity[v], v))
        del self.trail[until:]
        del self.lim[target:]
        self.qhead = len(self.trail)

    def _decide(self) -> Optional[int]:
        while self.heap:
            act, v = heappop(self.heap)
            if self.lit_val[self._lidx(v)] != _UNDEF:
                continue
            if -act != self.activity[v]:
                continue  # stale entry
            return v if self.phase[v] else -v
        for v in range(1, self.n + 1):
            if self.lit_val[self._lidx(v)] == _UNDEF:
                return v if self.phase[v] else -v
        return None

    def solve(self, budget: SolveBudget) -> SatVerdict:
        if not self.ok or self._propagate() is not None:
            return SatVerdict("unsat")
        n_conflicts = 0
        restart_idx = 0
        limit = 64 * _luby(restart_idx)
        deadline = (
            time.monotonic() + budget.max_seconds if budget.max_seconds else None
        )
        while True:
            confl = self._propagate()
            if confl is not None:
                n_conflicts += 1
                if not self.lim:
                    return SatVerdict("unsat")
                if n_conflicts >= budget.max_conflicts:
                    return SatVerdict("unknown", reason="conflict budget exhausted")
                if deadline is not None and n_conflicts % 256 == 0:
                    if time.monotonic() > deadline:
                        return SatVerdict("unknown", reason="time budget exhausted")
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                self.var_inc /= 0.95
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[self._lidx(learnt[0])].append(ci)
                    self.watches[self._lidx(learnt[1])].append(ci)
                    self._enqueue(learnt[0], ci)
                if n_conflicts >= limit:
                    restart_idx += 1
                    limit = n_conflicts + 64 * _luby(restart_idx)
                    if self.lim:
                        self._backtrack(0)
                continue
            lit = self._decide()
            if lit is None:
                return SatVerdict("sat", model=self._model())
            self.lim.append(len(self.trail))
            self._enqueue(lit, None)

    def _model(self) -> dict[int, bool]:
        return {
            v: self.lit_val[self._lidx(v)] == _TRUE for v in range(1, self.n + 1)
        }


def _luby(x: int) -> int:
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) // 2
        seq -= 1
        x %= size
    return 1 << seq


def check_model(clauses: Sequence[Sequence[int]], model: dict[int, bool]) -> bool:
    for c in clauses:
        if not any(model.get(abs(l), False) == (l > 0) for l in c):
            return False
    return True


def solve(cnf: CnfFormula, budget: Optional[SolveBudget] = None) -> SatVerdict:
    """Complete SAT decision over the formula; SAT models are re-verified."""
    budget = budget or SolveBudget()
    solver = _Solver(cnf.num_vars, cnf.clauses)
    verdict = solver.solve(budget)
    if verdict.status == "sat":
        if not check_model(cnf.clauses, verdict.model):
            raise AssertionError("solver produced a model violating a clause")
    return verdict
