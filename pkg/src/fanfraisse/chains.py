"""Downward-closed maximal chains on fans.

On a finite fan, a downward-closed maximal chain of vertex sets grows by one
vertex per link, from {root} to the whole fan, so it is exactly a linear
extension of the tree order.  Chains are therefore stored as a single
permutation of the vertices beginning with the root; the chain of sets is
the family of its initial segments.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from .fans import DEFAULT_MODE, Fan, FanEpi, FanError, fan_build, is_epimorphism


class ChainError(ValueError):
    """Invalid chain data."""


class NoWitnessError(RuntimeError):
    """A constrained chain search exhausted without a witness."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate or {}


@dataclass(frozen=True)
class ChainedFan:
    """A fan together with a downward-closed maximal chain (as a linear
    extension of the tree order)."""

    fan: Fan
    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        n = self.fan.vertex_count
        if sorted(self.order) != list(range(n)):
            raise ChainError("order must be a permutation of the vertices")
        if self.order[0] != 0:
            raise ChainError("chain must begin with the root")
        pos = self.position
        for v in range(1, n):
            if pos[self.fan.parent[v]] > pos[v]:
                raise ChainError("order is not a linear extension of the tree order")

    @property
    def position(self) -> tuple[int, ...]:
        if "_pos" not in self.__dict__:
            pos = [0] * len(self.order)
            for i, v in enumerate(self.order):
                pos[v] = i
            object.__setattr__(self, "_pos", tuple(pos))
        return self.__dict__["_pos"]

    def before(self, x: int, y: int) -> bool:
        """The induced linear order: x comes no later than y."""
        return self.position[x] <= self.position[y]

    def sets(self) -> list[frozenset[int]]:
        """The chain of links, smallest first."""
        out, cur = [], set()
        for v in self.order:
            cur.add(v)
            out.append(frozenset(cur))
        return out

    def mask_sets(self) -> list[int]:
        """Links as bitmasks over vertex ids."""
        out, cur = [], 0
        for v in self.order:
            cur |= 1 << v
            out.append(cur)
        return out

    def to_json(self) -> dict:
        return {"fan": self.fan.to_json(), "order": list(self.order)}

    @staticmethod
    def from_json(obj: dict) -> "ChainedFan":
        return ChainedFan(Fan.from_json(obj["fan"]), tuple(obj["order"]))

    def __repr__(self):
        return f"ChainedFan({self.fan!r}, {list(self.order)})"


def canonical_chain(fan: Fan, branch_order=None) -> ChainedFan:
    """The chain that exhausts branches one at a time, in the given order."""
    if branch_order is None:
        branch_order = range(fan.width)
    order = [0]
    for bi in branch_order:
        order.extend(fan.branches[bi])
    return ChainedFan(fan, tuple(order))


def chain_count(fan: Fan) -> int:
    """Number of downward-closed maximal chains: the multinomial over
    branch lengths."""
    total = fan.vertex_count - 1
    count = factorial(total)
    for length in fan.branch_lengths:
        count //= factorial(length)
    return count


def all_maximal_chains(fan: Fan) -> list[ChainedFan]:
    """All downward-closed maximal chains, in deterministic order.

    Enumerates linear extensions by repeatedly taking the next unused vertex
    of some branch, trying branches in index order; the result is sorted by
    the order word.
    """
    taken = [0] * fan.width
    order = [0]
    out = []
    total = fan.vertex_count

    def rec():
        if len(order) == total:
            out.append(ChainedFan(fan, tuple(order)))
            return
        for bi in range(fan.width):
            if taken[bi] < len(fan.branches[bi]):
                order.append(fan.branches[bi][taken[bi]])
                taken[bi] += 1
                rec()
                taken[bi] -= 1
                order.pop()

    rec()
    out.sort(key=lambda c: c.order)
    return out


@dataclass(frozen=True)
class ChainImage:
    """Image of a chain of sets under a vertex map, duplicates removed."""

    sets: tuple[frozenset[int], ...]
    valid: bool  # downward-closed maximal chain on the target
    chained: ChainedFan | None

    def __iter__(self):
        return iter(self.sets)


def chain_image(f: FanEpi, source_chain: ChainedFan) -> ChainImage:
    """The image chain {f(C) : C in the source chain}.

    For a valid epimorphism the image is again a downward-closed maximal
    chain (images of downward-closed sets under epimorphisms are downward
    closed, and links can grow by at most one vertex); for raw maps the
    sets are returned with ``valid`` reporting whether they happen to form
    one.
    """
    if source_chain.fan != f.source:
        raise ChainError("chain lives on a different fan than the map's source")
    seen = set()
    image_order = []
    for v in source_chain.order:
        w = f(v)
        if w not in seen:
            seen.add(w)
            image_order.append(w)
    sets, cur = [], set()
    for w in image_order:
        cur.add(w)
        sets.append(frozenset(cur))
    target = f.target
    posmap = {w: i for i, w in enumerate(image_order)}
    valid = (
        image_order[0] == 0
        and len(image_order) == target.vertex_count
        and all(
            posmap[target.parent[v]] < posmap[v]
            for v in range(1, target.vertex_count)
        )
    )
    chained = ChainedFan(target, tuple(image_order)) if valid else None
    return ChainImage(tuple(sets), valid, chained)


def is_chain_epimorphism(f: FanEpi, source_chain: ChainedFan,
                         target_chain: ChainedFan) -> bool:
    """f is an epimorphism and maps the source chain onto the target chain."""
    if source_chain.fan != f.source or target_chain.fan != f.target:
        raise ChainError("endpoint mismatch")
    img = chain_image(f, source_chain)
    return img.valid and img.chained.order == target_chain.order


def preserves_chain_order(mapping, source_chain: ChainedFan,
                          target_chain: ChainedFan) -> bool:
    """Whether the map is monotone for the induced linear orders.

    This is the (strictly stronger) reading of chained fans as linearly
    ordered structures; chain-preserving maps may fail it.
    """
    order = source_chain.order
    tpos = target_chain.position
    images = [tpos[mapping[v]] for v in order]
    return all(a <= b for a, b in zip(images, images[1:]))


@dataclass(frozen=True)
class CanonicalReport:
    is_canonical: bool
    branch_order: tuple[int, ...] | None
    equal_heights: bool

    @property
    def in_cc(self) -> bool:
        """Member of the canonical equal-height family."""
        return self.is_canonical and self.equal_heights


def canonical_structure(chained: ChainedFan) -> CanonicalReport:
    """Detect canonicity: the chain exhausts branches one at a time.

    Within a branch the order is forced, so canonicity holds iff the branch
    labels along the order form contiguous blocks; the witnessing branch
    order is the order of first appearance.
    """
    fan = chained.fan
    branch_order = []
    active = None
    counts = [0] * fan.width
    for v in chained.order[1:]:
        bi = fan.branch_of[v]
        if bi != active:
            if counts[bi]:
                return CanonicalReport(False, None, _equal_heights(fan))
            branch_order.append(bi)
            active = bi
        counts[bi] += 1
    return CanonicalReport(True, tuple(branch_order), _equal_heights(fan))


def _equal_heights(fan: Fan) -> bool:
    return len(set(fan.branch_lengths)) <= 1


def extend_to_maximal(fan: Fan, partial) -> ChainedFan:
    """Deterministic maximal chain whose links include every input set.

    ``partial`` is a chain of downward-closed vertex sets.  Completion is
    greedy: at each step add the least admissible vertex id.  Empty sets
    are vacuous and ignored.
    """
    sets = sorted({frozenset(s) for s in partial if s}, key=len)
    for s in sets:
        if not s <= set(range(fan.vertex_count)):
            raise ChainError("set contains unknown vertices")
        if not fan.is_downward_closed(s):
            raise ChainError(f"set {sorted(s)} is not downward closed")
    for small, big in zip(sets, sets[1:]):
        if not small <= big:
            raise ChainError("input sets do not form a chain")

    order = [0]
    placed = {0}

    def grow_to(target_set):
        pending = set(target_set) - placed
        while pending:
            ready = sorted(v for v in pending if fan.parent[v] in placed)
            v = ready[0]
            order.append(v)
            placed.add(v)
            pending.discard(v)

    for s in sets:
        grow_to(s)
    grow_to(range(fan.vertex_count))
    return ChainedFan(fan, tuple(order))


def preimage_chain(f: FanEpi, target_chain: ChainedFan,
                   node_budget: int = 1_000_000) -> ChainedFan:
    """A source chain whose image under f is exactly the target chain.

    Fast path: when all link preimages are downward closed, any maximal
    extension of the preimage chain works.  Otherwise a constrained search
    over linear extensions of the source runs, pruned by the requirement
    that every prefix image is a link of the target chain.  Exhaustion
    raises NoWitnessError with a certificate of the search.
    """
    if target_chain.fan != f.target:
        raise ChainError("chain lives on a different fan than the map's target")
    source = f.source
    preimages = []
    all_down = True
    for link in target_chain.sets():
        pre = {v for v in range(source.vertex_count) if f(v) in link}
        preimages.append(pre)
        if not source.is_downward_closed(pre):
            all_down = False
    if all_down:
        result = extend_to_maximal(source, preimages)
        img = chain_image(f, result)
        if img.valid and img.chained.order == target_chain.order:
            return result
        # fall through to the search; not expected for valid epimorphisms

    tpos = target_chain.position
    n = source.vertex_count
    order = [0]
    placed = [False] * n
    placed[0] = True
    reached = 1  # prefix of the target chain already swept
    nodes = 0

    def rec(reached):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise NoWitnessError(
                "preimage search budget exhausted",
                {"kind": "preimage-exhaustion", "nodes": nodes, "complete": False},
            )
        if len(order) == n:
            return reached == target_chain.fan.vertex_count
        for v in range(1, n):
            if placed[v] or not placed[source.parent[v]]:
                continue
            w = f(v)
            p = tpos[w]
            if p < reached:
                new_reached = reached
            elif p == reached:
                new_reached = reached + 1
            else:
                continue
            order.append(v)
            placed[v] = True
            if rec(new_reached):
                return True
            placed[v] = False
            order.pop()
        return False

    if rec(1):
        return ChainedFan(source, tuple(order))
    raise NoWitnessError(
        "no source chain maps onto the target chain",
        {"kind": "preimage-exhaustion", "nodes": nodes, "complete": True,
         "map": list(f.mapping), "target_order": list(target_chain.order)},
    )


@dataclass(frozen=True)
class ChainEpi:
    """A fan epimorphism carrying its source and target chains, validated
    to map one onto the other."""

    epi: FanEpi
    source_chain: ChainedFan
    target_chain: ChainedFan

    def __post_init__(self):
        if not is_chain_epimorphism(self.epi, self.source_chain, self.target_chain):
            raise ChainError(
                f"{self.epi!r} does not carry {self.source_chain!r} onto "
                f"{self.target_chain!r}"
            )

    @property
    def mapping(self) -> tuple[int, ...]:
        return self.epi.mapping

    @property
    def source(self) -> Fan:
        return self.epi.source

    @property
    def target(self) -> Fan:
        return self.epi.target

    def __call__(self, v: int) -> int:
        return self.epi.mapping[v]

    def compose(self, inner: "ChainEpi") -> "ChainEpi":
        """self o inner."""
        if inner.target_chain != self.source_chain:
            raise ChainError("composition chain mismatch")
        return ChainEpi(self.epi.compose(inner.epi), inner.source_chain,
                        self.target_chain)

    def to_json(self) -> dict:
        return {"map": list(self.mapping), "mode": self.epi.mode,
                "source": self.source_chain.to_json(),
                "target": self.target_chain.to_json()}


def constant_chain_epi(source_chain: ChainedFan, mode: str = DEFAULT_MODE) -> ChainEpi:
    """The unique chain-epimorphism onto the one-point fan."""
    point = fan_build([])
    point_chain = ChainedFan(point, (0,))
    epi = FanEpi(source_chain.fan, point,
                 (0,) * source_chain.fan.vertex_count, mode)
    return ChainEpi(epi, source_chain, point_chain)


def identity_chain_epi(chained: ChainedFan, mode: str = DEFAULT_MODE) -> ChainEpi:
    epi = FanEpi(chained.fan, chained.fan,
                 tuple(range(chained.fan.vertex_count)), mode)
    return ChainEpi(epi, chained, chained)


def enumerate_chain_epimorphisms(source_chain: ChainedFan,
                                 target_chain: ChainedFan,
                                 mode: str = DEFAULT_MODE) -> list[FanEpi]:
    """All chain-epimorphisms between two chained fans, lexicographic.

    Backtracks along the source chain order (so parents are always assigned
    first), pruning by edge consistency and by the prefix-image rule: each
    new image vertex must be the next vertex of the target chain.
    """
    source, target = source_chain.fan, target_chain.fan
    rel = target.r if mode == "directed" else target.r_sym
    n = source.vertex_count
    mapping = [0] * n
    out = []
    torder = target_chain.order

    def rec(i, reached):
        if i == n:
            if reached == target.vertex_count:
                out.append(FanEpi(source, target, tuple(mapping), mode))
            return
        v = source_chain.order[i]
        pv = mapping[source.parent[v]]
        candidates = list(torder[:reached])
        if reached < target.vertex_count:
            candidates.append(torder[reached])
        for w in candidates:
            if not rel(pv, w):
                continue
            advanced = reached < target.vertex_count and w == torder[reached]
            mapping[v] = w
            rec(i + 1, reached + 1 if advanced else reached)

    rec(1, 1)
    out.sort(key=lambda e: e.mapping)
    return out
