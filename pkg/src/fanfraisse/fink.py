"""Finitely supported vectors with bounded values, tetris operations, block
sequences, and the partial subsemigroups they generate.

Vectors are dense integer tuples over coordinates 1..n.  Addition is
partial: defined only for disjoint supports.  The tetris operation with
threshold i keeps values below i and decrements values at or above it;
threshold 0 is the identity.  Level bookkeeping (which bounded-value family
a vector inhabits) is computed on demand rather than enforced structurally,
since composite tetris words are applied to raw vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product


class FinVecError(ValueError):
    """Ill-formed vector data or a partiality violation."""


@dataclass(frozen=True)
class FinVec:
    """A function {1..n} -> {0,1,2,...} with explicit ambient n."""

    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if any(v < 0 for v in self.values):
            raise FinVecError("negative values")

    @property
    def n(self) -> int:
        return len(self.values)

    def __getitem__(self, coord: int) -> int:
        """1-based coordinate access."""
        return self.values[coord - 1]

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i + 1 for i, v in enumerate(self.values) if v)

    def support_at(self, j: int) -> frozenset[int]:
        """Coordinates carrying the value j."""
        return frozenset(i + 1 for i, v in enumerate(self.values) if v == j)

    @property
    def max_value(self) -> int:
        return max(self.values, default=0)

    def in_fink(self, k: int, n: int | None = None) -> bool:
        """Membership: support inside 1..n, maximum value exactly k."""
        if n is not None and (self.n > n and any(self.values[n:])):
            return False
        return self.max_value == k and bool(self.support) if k > 0 else self.max_value == 0

    def is_zero(self) -> bool:
        return not any(self.values)

    def __add__(self, other: "FinVec") -> "FinVec":
        if self.n != other.n:
            raise FinVecError("ambient dimension mismatch")
        if self.support & other.support:
            raise FinVecError("sum undefined: overlapping supports")
        return FinVec(tuple(a + b for a, b in zip(self.values, other.values)))

    def to_json(self) -> dict:
        return {"n": self.n, "values": list(self.values)}

    @staticmethod
    def from_json(obj: dict) -> "FinVec":
        vec = FinVec(tuple(obj["values"]))
        if vec.n != obj["n"]:
            raise FinVecError("length disagrees with declared n")
        return vec

    def __repr__(self):
        return f"FinVec{self.values}"


def indicator(coords, n: int, value: int = 1) -> FinVec:
    vals = [0] * n
    for c in coords:
        vals[c - 1] = value
    return FinVec(tuple(vals))


def finvec_primitives(p: FinVec, q: FinVec | None = None):
    """Support, value-level supports, and (when q given) the partial sum."""
    out = {"supp": p.support,
           "supp_j": {j: p.support_at(j) for j in range(1, p.max_value + 1)}}
    if q is not None:
        out["sum"] = p + q
    return out


def tetris(p: FinVec, i: int) -> FinVec:
    """Threshold tetris: values below i kept, values at or above i
    decremented; i = 0 is the identity, i = 1 the plain tetris."""
    if i < 0:
        raise FinVecError("negative tetris threshold")
    if i == 0:
        return p
    return FinVec(tuple(v if v < i else v - 1 for v in p.values))


@dataclass(frozen=True)
class TetrisIndex:
    """A composite tetris word, applied rightmost entry first.

    kind "low" is the family indexed over levels 1..k with entries in
    {0..j}; kind "high" over levels k+1..l with entries in {1..j} (empty
    when l = k).
    """

    entries: tuple[int, ...]
    kind: str  # "low" | "high"
    start_level: int  # level of the first entry

    def apply(self, p: FinVec) -> FinVec:
        for e in reversed(self.entries):
            p = tetris(p, e)
        return p


def low_indices(k: int) -> list[TetrisIndex]:
    """All words over levels 1..k with entries 0..j at level j."""
    ranges = [range(0, j + 1) for j in range(1, k + 1)]
    return [TetrisIndex(tuple(e), "low", 1) for e in product(*ranges)]


def high_indices(k: int, l: int) -> list[TetrisIndex]:
    """All words over levels k+1..l with entries 1..j; only the empty word
    when l = k."""
    if l < k:
        raise FinVecError("need l >= k")
    if l == k:
        return [TetrisIndex((), "high", k + 1)]
    ranges = [range(1, j + 1) for j in range(k + 1, l + 1)]
    return [TetrisIndex(tuple(e), "high", k + 1) for e in product(*ranges)]


def tetris_apply(word, p: FinVec) -> FinVec:
    """Apply a single threshold, an entry tuple, or a TetrisIndex."""
    if isinstance(word, TetrisIndex):
        return word.apply(p)
    if isinstance(word, int):
        return tetris(p, word)
    for e in reversed(tuple(word)):
        p = tetris(p, e)
    return p


@dataclass(frozen=True)
class BlockSeq:
    """A d-tuple of vectors with declared level k and ambient n."""

    entries: tuple[FinVec, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise FinVecError("block sequence needs at least one entry")
        if len({e.n for e in self.entries}) != 1:
            raise FinVecError("entries live in different ambient dimensions")

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return self.entries[0].n

    def vectors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(e.values for e in self.entries)

    def to_json(self) -> dict:
        return {"k": self.k, "d": self.d,
                "entries": [list(e.values) for e in self.entries]}

    @staticmethod
    def from_json(obj: dict) -> "BlockSeq":
        return BlockSeq(tuple(FinVec(tuple(v)) for v in obj["entries"]), obj["k"])

    def __repr__(self):
        return f"BlockSeq(k={self.k}, {[list(e.values) for e in self.entries]})"


def is_block(seq: BlockSeq) -> bool:
    """The plain d-tuple condition: every entry in the level-k family,
    pairwise disjoint supports, strictly increasing support minima."""
    entries = seq.entries
    if any(not e.in_fink(seq.k, seq.n) for e in entries):
        return False
    mins = []
    union = set()
    for e in entries:
        s = e.support
        if union & s:
            return False
        union |= s
        mins.append(min(s))
    return all(a < b for a, b in zip(mins, mins[1:]))


def is_block_star(seq: BlockSeq) -> bool:
    """The starred condition: additionally the top-value support of each
    entry starts before the next entry's support."""
    if not is_block(seq):
        return False
    for a, b in zip(seq.entries, seq.entries[1:]):
        if min(a.support_at(seq.k)) >= min(b.support):
            return False
    return True


def generated_vectors(base: BlockSeq, k: int, cap: int = 2_000_000) -> list[FinVec]:
    """The level-k partial subsemigroup generated by tetris images of the
    base sequence: all sums over s of T_low o T_high applied to entry s,
    with at least one summand taking the identity low word.  Fully
    annihilated summands act as the additive identity.
    """
    l = base.k
    if k > l:
        raise FinVecError("target level exceeds the base level")
    highs = high_indices(k, l)
    lows = low_indices(k)
    zero_low = lows[0]
    assert all(e == 0 for e in zero_low.entries)

    per_entry: list[tuple[list[FinVec], list[FinVec]]] = []
    for b in base.entries:
        kept = {}     # image under some word with the all-zero low part
        reduced = {}  # image under any other word
        for hi in highs:
            mid = hi.apply(b)
            kept[mid.values] = mid
            for lo in lows[1:]:
                img = lo.apply(mid)
                reduced[img.values] = img
        per_entry.append((sorted(kept.values(), key=lambda v: v.values),
                          sorted(reduced.values(), key=lambda v: v.values)))

    m = len(per_entry)
    combos = 1
    for kept, reduced in per_entry:
        combos *= len(kept) + len(reduced)
    if combos > cap:
        raise FinVecError(f"enumeration of {combos} combinations exceeds cap {cap}")

    seen = {}
    pools = [kept + reduced for kept, reduced in per_entry]
    kept_sizes = [len(kept) for kept, _ in per_entry]
    for choice in product(*(range(len(p)) for p in pools)):
        if not any(c < kept_sizes[s] for s, c in enumerate(choice)):
            continue  # no summand kept its identity low word
        total = pools[0][choice[0]]
        ok = True
        for s in range(1, m):
            vec = pools[s][choice[s]]
            try:
                total = total + vec
            except FinVecError:
                ok = False
                break
        if ok:
            seen[total.values] = total
    return sorted(seen.values(), key=lambda v: v.values)


def generated_semigroup(base: BlockSeq, k: int, d: int,
                        cap: int = 2_000_000) -> list[BlockSeq]:
    """All starred d-tuples with entries in the generated level-k
    subsemigroup, deduplicated, in deterministic order."""
    vectors = generated_vectors(base, k, cap=cap)
    if len(vectors) ** d > cap:
        raise FinVecError("tuple enumeration exceeds cap")
    out = []
    for combo in product(vectors, repeat=d):
        seq = BlockSeq(combo, k)
        if is_block_star(seq):
            out.append(seq)
    return out
