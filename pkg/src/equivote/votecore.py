"""Odd, monotone voting rules: representation, evaluation and exact analysis.

Voter sets and voting profiles are bitmasks: bit ``i`` of a profile is set
when voter ``i`` votes +1.  Exhaustive computations enumerate all ``2**n``
subsets with numpy, indexed by the subset bitmask itself.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from ._config import DEFAULT_AUT_GUARD_N, GuardExceeded, check_guard, enumeration_guard
from .groups import AutGroup, Permutation, automorphism_group

MAX_TABLE_N = 22


class InvalidRuleError(ValueError):
    pass


def ceil_sqrt(n: int) -> int:
    return 0 if n <= 0 else math.isqrt(n - 1) + 1


def mask_of(voters: Sequence[int]) -> int:
    m = 0
    for v in voters:
        m |= 1 << v
    return m


def voters_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# -- coalitions ---------------------------------------------------------------


@dataclass(frozen=True)
class Coalition:
    members: int
    n: int

    def __post_init__(self):
        if self.members < 0 or self.members >> self.n:
            raise ValueError(f"coalition {self.members:#x} not within {self.n} voters")

    @classmethod
    def of(cls, voters: Sequence[int], n: int) -> "Coalition":
        return cls(mask_of(voters), n)

    def voters(self) -> list[int]:
        return voters_of(self.members)

    def __len__(self) -> int:
        return self.members.bit_count()

    def __contains__(self, i: int) -> bool:
        return bool(self.members >> i & 1)

    def complement(self) -> "Coalition":
        return Coalition(((1 << self.n) - 1) ^ self.members, self.n)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None
    pair: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CoalitionFamily:
    """A family of voter sets, kept as a tuple of bitmasks."""

    n: int
    sets: tuple[int, ...]

    @classmethod
    def from_lists(cls, n: int, lists: Sequence[Sequence[int]]) -> "CoalitionFamily":
        return cls(n, tuple(mask_of(s) for s in lists))

    def as_lists(self) -> list[list[int]]:
        return [voters_of(s) for s in self.sets]

    def coalitions(self) -> list[Coalition]:
        return [Coalition(s, self.n) for s in self.sets]

    def __len__(self) -> int:
        return len(self.sets)


def validate_family(family: CoalitionFamily) -> ValidationResult:
    """Check that ``family`` is a nonempty-set, intersecting antichain on odd n."""
    n = family.n
    if n < 1 or n % 2 == 0:
        return ValidationResult(False, f"voter count n={n} must be odd and positive")
    full = (1 << n) - 1
    for a, s in enumerate(family.sets):
        if s == 0:
            return ValidationResult(False, f"set {a} is empty", (a, a))
        if s & ~full:
            return ValidationResult(False, f"set {a} has voters outside 0..{n - 1}", (a, a))
    sets = family.sets
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            s, t = sets[a], sets[b]
            if s & t == 0:
                return ValidationResult(False, f"sets {a} and {b} are disjoint", (a, b))
            if s == t:
                return ValidationResult(False, f"sets {a} and {b} are equal", (a, b))
            if s & t == s:
                return ValidationResult(False, f"set {a} is contained in set {b}", (a, b))
            if s & t == t:
                return ValidationResult(False, f"set {b} is contained in set {a}", (b, a))
    return ValidationResult(True)


def antichain_reduce(sets: Sequence[int]) -> tuple[int, ...]:
    """Drop duplicates and every set that strictly contains another."""
    uniq = sorted(set(sets), key=lambda s: (s.bit_count(), s))
    kept: list[int] = []
    for s in uniq:
        if not any(t & s == t for t in kept):
            kept.append(s)
    return tuple(kept)


# -- rules --------------------------------------------------------------------


@dataclass(frozen=True)
class MajorityRule:
    n: int

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise InvalidRuleError(f"majority needs odd n, got {self.n}")


@dataclass(frozen=True)
class FamilyRule:
    """Outcome y when some set of the family votes unanimously y, else majority."""

    family: CoalitionFamily
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        res = validate_family(self.family)
        if not res.ok:
            raise InvalidRuleError(res.reason)

    @property
    def n(self) -> int:
        return self.family.n

    @classmethod
    def of(cls, n: int, lists: Sequence[Sequence[int]], label: str | None = None) -> "FamilyRule":
        return cls(CoalitionFamily.from_lists(n, lists), label)


@dataclass(frozen=True)
class ComposedRule:
    """``outer`` applied to the outcomes of ``inner`` on consecutive voter blocks.

    Voter ``i`` of block ``j`` has flat index ``j * inner.n + i``.
    """

    inner: "VotingRule"
    outer: "VotingRule"

    @property
    def n(self) -> int:
        return self.inner.n * self.outer.n

    def flat_index(self, i: int, j: int) -> int:
        return j * self.inner.n + i

    def split_index(self, v: int) -> tuple[int, int]:
        j, i = divmod(v, self.inner.n)
        return i, j


@dataclass(frozen=True)
class TruthTableRule:
    """Explicit outcomes: bit ``x`` of ``bits`` is 1 when profile ``x`` yields +1."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 1 or self.n % 2 == 0:
            raise InvalidRuleError(f"truth-table rules need odd n, got {self.n}")
        if self.n > MAX_TABLE_N:
            raise InvalidRuleError(f"truth-table rules are limited to n <= {MAX_TABLE_N}")
        if self.bits < 0 or self.bits >> (1 << self.n):
            raise InvalidRuleError("table has bits beyond 2^n profiles")
        tt = _unpack(self.bits, self.n)
        idx = _index(self.n)
        full = (1 << self.n) - 1
        if np.any(tt == tt[full ^ idx]):
            raise InvalidRuleError("table is not odd")
        for i in range(self.n):
            lo = idx[(idx >> i & 1) == 0]
            if np.any(tt[lo] & ~tt[lo | (1 << i)]):
                raise InvalidRuleError(f"table is not monotone in voter {i}")

    @classmethod
    def from_array(cls, table) -> "TruthTableRule":
        tt = np.asarray(table, dtype=bool)
        n = int(tt.size).bit_length() - 1
        if tt.size != 1 << n:
            raise InvalidRuleError("table length must be a power of two")
        packed = np.packbits(tt, bitorder="little").tobytes()
        return cls(n, int.from_bytes(packed, "little"))


VotingRule = Union[MajorityRule, FamilyRule, ComposedRule, TruthTableRule]


def dictator(n: int, voter: int = 0) -> FamilyRule:
    return FamilyRule.of(n, [[voter]], label=f"dictator{n}")


def compose(inner: VotingRule, outer: VotingRule) -> ComposedRule:
    return ComposedRule(inner, outer)


def to_truth_table_rule(rule: VotingRule, guard_n: int | None = None) -> TruthTableRule:
    return TruthTableRule.from_array(truth_table(rule, guard_n))


# -- profiles -----------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    n: int
    votes: int

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> "Profile":
        if any(s not in (-1, 1) for s in signs):
            raise ValueError("votes must be +1 or -1")
        return cls(len(signs), mask_of([i for i, s in enumerate(signs) if s == 1]))

    def signs(self) -> list[int]:
        return [1 if self.votes >> i & 1 else -1 for i in range(self.n)]

    def flip(self, i: int) -> "Profile":
        return Profile(self.n, self.votes ^ (1 << i))

    def __neg__(self) -> "Profile":
        return Profile(self.n, self.votes ^ ((1 << self.n) - 1))


def _votes(rule: VotingRule, x) -> int:
    if isinstance(x, Profile):
        if x.n != rule.n:
            raise ValueError(f"profile has {x.n} voters, rule has {rule.n}")
        return x.votes
    if isinstance(x, (int, np.integer)):
        return int(x)
    p = Profile.from_signs(list(x))
    if p.n != rule.n:
        raise ValueError(f"profile has {p.n} voters, rule has {rule.n}")
    return p.votes


def evaluate(rule: VotingRule, x) -> int:
    """Outcome (+1 or -1) of ``rule`` on a profile (Profile, bitmask or sign list)."""
    votes = _votes(rule, x)
    if isinstance(rule, MajorityRule):
        return 1 if 2 * votes.bit_count() > rule.n else -1
    if isinstance(rule, FamilyRule):
        for s in rule.family.sets:
            hit = votes & s
            if hit == s:
                return 1
            if hit == 0:
                return -1
        return 1 if 2 * votes.bit_count() > rule.n else -1
    if isinstance(rule, ComposedRule):
        n1 = rule.inner.n
        block = (1 << n1) - 1
        outer_votes = 0
        for j in range(rule.outer.n):
            if evaluate(rule.inner, votes >> (j * n1) & block) == 1:
                outer_votes |= 1 << j
        return evaluate(rule.outer, outer_votes)
    if isinstance(rule, TruthTableRule):
        return 1 if rule.bits >> votes & 1 else -1
    raise TypeError(f"unknown rule type {type(rule).__name__}")


# -- exhaustive tables -------------------------------------------------------


@lru_cache(maxsize=8)
def _index(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=8)
def _popcounts(n: int) -> np.ndarray:
    pc = np.bitwise_count(_index(n)).astype(np.int64)
    pc.setflags(write=False)
    return pc


def _unpack(bits: int, n: int) -> np.ndarray:
    nbytes = max(1, (1 << n) // 8)
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: 1 << n].astype(bool)


def truth_table(rule: VotingRule, guard_n: int | None = None) -> np.ndarray:
    """Boolean array over all 2^n profiles, True where the outcome is +1."""
    check_guard(rule.n, enumeration_guard(guard_n), "truth table")
    n = rule.n
    if isinstance(rule, MajorityRule):
        return _popcounts(n) > n // 2
    if isinstance(rule, FamilyRule):
        idx = _index(n)
        plus = np.zeros(1 << n, dtype=bool)
        minus = np.zeros(1 << n, dtype=bool)
        for s in rule.family.sets:
            hit = idx & s
            plus |= hit == s
            minus |= hit == 0
        return plus | (~minus & (_popcounts(n) > n // 2))
    if isinstance(rule, ComposedRule):
        n1 = rule.inner.n
        inner = truth_table(rule.inner, guard_n)
        outer = truth_table(rule.outer, guard_n)
        idx = _index(n)
        block = (1 << n1) - 1
        outer_idx = np.zeros(1 << n, dtype=np.int64)
        for j in range(rule.outer.n):
            outer_idx |= inner[(idx >> (j * n1)) & block].astype(np.int64) << j
        return outer[outer_idx]
    if isinstance(rule, TruthTableRule):
        return _unpack(rule.bits, n)
    raise TypeError(f"unknown rule type {type(rule).__name__}")


def winning_table(rule: VotingRule, guard_n: int | None = None) -> np.ndarray:
    """Boolean array over all 2^n voter sets, True where the set is winning.

    Uses the winning criterion of each representation rather than evaluation.
    """
    check_guard(rule.n, enumeration_guard(guard_n), "winning table")
    n = rule.n
    idx = _index(n)
    pc = _popcounts(n)
    if isinstance(rule, MajorityRule):
        return pc >= (n + 1) // 2
    if isinstance(rule, FamilyRule):
        contains = np.zeros(1 << n, dtype=bool)
        complement_contains = np.zeros(1 << n, dtype=bool)
        for s in rule.family.sets:
            hit = idx & s
            contains |= hit == s
            complement_contains |= hit == 0
        return contains | ((pc >= (n + 1) // 2) & ~complement_contains)
    if isinstance(rule, ComposedRule):
        n1 = rule.inner.n
        inner = winning_table(rule.inner, guard_n)
        outer = winning_table(rule.outer, guard_n)
        block = (1 << n1) - 1
        cols = np.zeros(1 << n, dtype=np.int64)
        for j in range(rule.outer.n):
            cols |= inner[(idx >> (j * n1)) & block].astype(np.int64) << j
        return outer[cols]
    if isinstance(rule, TruthTableRule):
        tt = _unpack(rule.bits, n)
        # forced to +1 by its worst completion and to -1 by the opposite one
        return tt & ~tt[((1 << n) - 1) ^ idx]
    raise TypeError(f"unknown rule type {type(rule).__name__}")


def winning_by_completion(rule: VotingRule, coalition: int, guard_n: int | None = None) -> bool:
    """Decide winning-ness by checking every completion of the other voters."""
    n = rule.n
    check_guard(n, enumeration_guard(guard_n), "completion enumeration")
    tt = truth_table(rule, guard_n)
    free = voters_of(((1 << n) - 1) ^ coalition)
    fill = np.zeros(1 << len(free), dtype=np.int64)
    k = np.arange(1 << len(free), dtype=np.int64)
    for b, pos in enumerate(free):
        fill |= ((k >> b) & 1) << pos
    return bool(np.all(tt[fill | coalition]) and not np.any(tt[fill]))


def is_winning(rule: VotingRule, coalition, guard_n: int | None = None) -> bool:
    """True when unanimity of ``coalition`` forces the outcome for every completion."""
    T = coalition.members if isinstance(coalition, Coalition) else int(coalition)
    n = rule.n
    if T >> n:
        raise ValueError(f"coalition {T:#x} has voters outside 0..{n - 1}")
    if isinstance(rule, MajorityRule):
        return 2 * T.bit_count() > n
    if isinstance(rule, FamilyRule):
        sets = rule.family.sets
        if any(T & s == s for s in sets):
            return True
        return 2 * T.bit_count() > n and not any(T & s == 0 for s in sets)
    if isinstance(rule, ComposedRule):
        n1 = rule.inner.n
        block = (1 << n1) - 1
        cols = 0
        for j in range(rule.outer.n):
            if is_winning(rule.inner, T >> (j * n1) & block, guard_n):
                cols |= 1 << j
        return is_winning(rule.outer, cols, guard_n)
    if isinstance(rule, TruthTableRule):
        return winning_by_completion(rule, T, guard_n)
    raise TypeError(f"unknown rule type {type(rule).__name__}")


def minimal_winning_coalitions(rule: VotingRule, guard_n: int | None = None) -> list[int]:
    W = winning_table(rule, guard_n)
    idx = _index(rule.n)
    minimal = W.copy()
    for i in range(rule.n):
        bit = 1 << i
        minimal &= ~((idx & bit != 0) & W[idx ^ bit])
    return [int(t) for t in np.flatnonzero(minimal)]


def min_coalition_size(rule: VotingRule, guard_n: int | None = None) -> int:
    """Size of a smallest winning coalition."""
    if isinstance(rule, MajorityRule):
        return (rule.n + 1) // 2
    if isinstance(rule, FamilyRule):
        return min(min(s.bit_count() for s in rule.family.sets), (rule.n + 1) // 2)
    if isinstance(rule, ComposedRule):
        return min_coalition_size(rule.inner, guard_n) * min_coalition_size(rule.outer, guard_n)
    W = winning_table(rule, guard_n)
    return int(_popcounts(rule.n)[W].min())


def smallest_winning_coalition(rule: VotingRule, guard_n: int | None = None) -> int:
    """One winning coalition of minimum size, built recursively for compositions."""
    if isinstance(rule, MajorityRule):
        return (1 << (rule.n + 1) // 2) - 1
    if isinstance(rule, FamilyRule):
        best = min(rule.family.sets, key=lambda s: (s.bit_count(), s))
        h = (rule.n + 1) // 2
        if best.bit_count() <= h:
            return best
        # every majority-sized set wins when all family sets exceed it
        return (1 << h) - 1
    if isinstance(rule, ComposedRule):
        inner = smallest_winning_coalition(rule.inner, guard_n)
        outer = smallest_winning_coalition(rule.outer, guard_n)
        return sum(inner << (j * rule.inner.n) for j in voters_of(outer))
    W = winning_table(rule, guard_n)
    pc = _popcounts(rule.n)
    cand = np.flatnonzero(W)
    return int(cand[np.argmin(pc[cand])])


# -- pivots and influence ----------------------------------------------------


@dataclass(frozen=True)
class PivotTable:
    """``rows[i][j]``: winning sets of size j containing i that lose without i."""

    n: int
    rows: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def row(self, i: int) -> tuple[int, ...]:
        return self.rows[i]

    def rows_equal(self) -> bool:
        return all(r == self.rows[0] for r in self.rows)


def pivot_table(rule: VotingRule, guard_n: int | None = None) -> PivotTable:
    n = rule.n
    W = winning_table(rule, guard_n)
    idx = _index(n)
    pc = _popcounts(n)
    rows = []
    for i in range(n):
        bit = 1 << i
        sel = W & ~W[idx ^ bit] & (idx & bit != 0)
        rows.append(tuple(int(c) for c in np.bincount(pc[sel], minlength=n + 1)))
    return PivotTable(n, tuple(rows))


def _weighted_sum(counts: Sequence[int], n: int, p, exact: bool):
    if exact:
        p = Fraction(p)
        return sum((c * p**k * (1 - p) ** (n - k) for k, c in enumerate(counts) if c), Fraction(0))
    p = float(p)
    return math.fsum(c * p**k * (1 - p) ** (n - k) for k, c in enumerate(counts) if c)


def pivotal_profile_counts(rule: VotingRule, i: int, guard_n: int | None = None) -> list[int]:
    """Number of profiles with k plus-votes at which voter i is pivotal, per k."""
    n = rule.n
    tt = truth_table(rule, guard_n)
    idx = _index(n)
    flips = tt != tt[idx ^ (1 << i)]
    return [int(c) for c in np.bincount(_popcounts(n)[flips], minlength=n + 1)]


def influence_enum(rule: VotingRule, i: int, p, exact: bool = False, guard_n: int | None = None):
    """Probability that voter i is pivotal when votes are i.i.d. +1 with probability p."""
    _check_p(p)
    return _weighted_sum(pivotal_profile_counts(rule, i, guard_n), rule.n, p, exact)


def pivot_coefficient(j: int, n: int, p):
    q = 1 - p
    return (
        p ** (j - 1) * q ** (n - j + 1)
        + p ** (n - j + 1) * q ** (j - 1)
        + p**j * q ** (n - j)
        + p ** (n - j) * q**j
    )


def influence_from_pivots(table: PivotTable, i: int, p, exact: bool = False):
    """Influence recovered from pivot counts.

    Each pivotal profile pair is reached from two pivot-table entries (a set
    and the complement of the set minus i), hence the halving.
    """
    _check_p(p)
    n = table.n
    row = table.rows[i]
    if exact:
        p = Fraction(p)
        return Fraction(1, 2) * sum(
            (row[j] * pivot_coefficient(j, n, p) for j in range(1, n + 1) if row[j]), Fraction(0)
        )
    p = float(p)
    return 0.5 * math.fsum(row[j] * pivot_coefficient(j, n, p) for j in range(1, n + 1) if row[j])


def probability_plus(rule: VotingRule, p, exact: bool = False, guard_n: int | None = None):
    """P[outcome = +1] under i.i.d. votes with P[+1] = p."""
    _check_p(p)
    if isinstance(rule, ComposedRule):
        return probability_plus(rule.outer, probability_plus(rule.inner, p, exact, guard_n), exact, guard_n)
    tt = truth_table(rule, guard_n)
    counts = np.bincount(_popcounts(rule.n)[tt], minlength=rule.n + 1)
    return _weighted_sum([int(c) for c in counts], rule.n, p, exact)


def influence(rule: VotingRule, i: int, p, exact: bool = False, guard_n: int | None = None):
    """Influence, using the product decomposition for compositions."""
    if isinstance(rule, ComposedRule):
        from .constructions import influence_composed

        return influence_composed(rule, i, p, exact=exact, guard_n=guard_n)
    return influence_enum(rule, i, p, exact=exact, guard_n=guard_n)


def _check_p(p):
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class UnbiasedResult:
    unbiased: bool
    witness: tuple[int, int, int] | None = None
    method: str = "pivot-table"

    def __bool__(self) -> bool:
        return self.unbiased

    def to_dict(self) -> dict:
        d = {"unbiased": self.unbiased, "method": self.method}
        if self.witness is not None:
            i, k, j = self.witness
            d["witness"] = {"voters": [i, k], "size": j}
        return d


def is_unbiased(rule: VotingRule, guard_n: int | None = None) -> UnbiasedResult:
    """Decide unbiasedness by exact pivot-row equality.

    Compositions of two unbiased rules are accepted without enumeration.
    """
    if isinstance(rule, ComposedRule):
        try:
            if is_unbiased(rule.inner, guard_n) and is_unbiased(rule.outer, guard_n):
                return UnbiasedResult(True, method="composition")
        except GuardExceeded:
            pass
        if rule.n > enumeration_guard(guard_n):
            raise GuardExceeded(
                f"n={rule.n} exceeds the guard and no compositional certificate applies"
            )
    table = pivot_table(rule, guard_n)
    first = table.rows[0]
    for k, row in enumerate(table.rows):
        if row != first:
            j = next(j for j in range(table.n + 1) if row[j] != first[j])
            return UnbiasedResult(False, (0, k, j))
    return UnbiasedResult(True)


def sqrt_bound_check(rule: VotingRule, guard_n: int | None = None) -> bool:
    """Unbiased rules must have smallest winning coalitions of size >= ceil(sqrt(n))."""
    if not is_unbiased(rule, guard_n):
        return True
    return min_coalition_size(rule, guard_n) >= ceil_sqrt(rule.n)


# -- rule automorphisms --------------------------------------------------------


def permute_table(tt: np.ndarray, n: int, sigma: Permutation) -> np.ndarray:
    """Table of the rule x -> tt[sigma(x)], where sigma moves voter i to sigma(i)."""
    idx = _index(n)
    moved = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        moved |= ((idx >> i) & 1) << sigma(i)
    return tt[moved]


def is_rule_automorphism(rule: VotingRule, sigma: Permutation, guard_n: int | None = None) -> bool:
    tt = truth_table(rule, guard_n)
    return bool(np.array_equal(permute_table(tt, rule.n, sigma), tt))


def rule_automorphisms(
    rule: VotingRule, guard_n: int = DEFAULT_AUT_GUARD_N, timeout: float | None = None
) -> AutGroup:
    """Exact automorphism group of a rule with at most ``guard_n`` voters.

    A permutation preserves the rule exactly when it permutes the minimal
    winning coalitions, so the search runs on the voter/coalition incidence
    graph with voters pre-colored by their pivot-table rows.  Every generator
    is confirmed against the full truth table.
    """
    n = rule.n
    check_guard(n, guard_n, "rule automorphism search")
    mins = minimal_winning_coalitions(rule)
    rows = pivot_table(rule).rows
    row_rank = {r: k for k, r in enumerate(sorted(set(rows)))}
    colors = [row_rank[r] for r in rows]
    colors += [len(row_rank) + c.bit_count() for c in mins]
    N = n + len(mins)
    adj = np.zeros((N, N), dtype=bool)
    for a, c in enumerate(mins):
        for v in voters_of(c):
            adj[v, n + a] = adj[n + a, v] = True
    tt = truth_table(rule)
    return automorphism_group(
        adj,
        colors,
        domain=n,
        timeout=timeout,
        verify=lambda s: bool(np.array_equal(permute_table(tt, n, s), tt)),
    )


# -- serialization --------------------------------------------------------------


def rule_to_dict(rule: VotingRule) -> dict:
    if isinstance(rule, MajorityRule):
        return {"n": rule.n, "kind": "majority"}
    if isinstance(rule, FamilyRule):
        return {"n": rule.n, "kind": "family", "coalitions": rule.family.as_lists()}
    if isinstance(rule, ComposedRule):
        return {
            "n": rule.n,
            "kind": "composed",
            "inner": rule_to_dict(rule.inner),
            "outer": rule_to_dict(rule.outer),
        }
    if isinstance(rule, TruthTableRule):
        digits = max(1, (1 << rule.n) // 4)
        return {"n": rule.n, "kind": "truthtable", "table": format(rule.bits, f"0{digits}x")}
    raise TypeError(f"unknown rule type {type(rule).__name__}")


def rule_from_dict(d: dict) -> VotingRule:
    kind = d.get("kind")
    n = d.get("n")
    if kind == "majority":
        rule = MajorityRule(int(n))
    elif kind == "family":
        rule = FamilyRule.of(int(n), d["coalitions"])
    elif kind == "composed":
        rule = ComposedRule(rule_from_dict(d["inner"]), rule_from_dict(d["outer"]))
    elif kind == "truthtable":
        rule = TruthTableRule(int(n), int(d["table"], 16))
    else:
        raise InvalidRuleError(f"unknown rule kind {kind!r}")
    if n is not None and rule.n != int(n):
        raise InvalidRuleError(f"declared n={n} but rule has {rule.n} voters")
    return rule


def rule_to_json(rule: VotingRule) -> str:
    return json.dumps(rule_to_dict(rule), sort_keys=True)


def rule_from_json(text: str) -> VotingRule:
    return rule_from_dict(json.loads(text))


def load_rule(path) -> VotingRule:
    with open(path) as fh:
        return rule_from_dict(json.load(fh))


def save_rule(rule: VotingRule, path) -> None:
    with open(path, "w") as fh:
        json.dump(rule_to_dict(rule), fh, sort_keys=True)
        fh.write("\n")
