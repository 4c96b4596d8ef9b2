"""Partition Ramsey machinery: ordered set partitions and coarsenings, the
block-sequence encoding of partitions, exhaustive threshold searches for
the partition and block-sequence pigeonhole numbers, and size-determined
colorings of set tuples.

All searches are complete: a threshold is reported exactly only when every
smaller ground size ships an explicit counterexample coloring and the
reported size was exhausted, via depth-first search over colorings with
monochromatic-witness pruning (a pruned prefix already contains a witness,
so every completion is good).  Budget overruns degrade to brackets, never
to unverified claims.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .fink import BlockSeq, FinVec, generated_semigroup, is_block_star

DEFAULT_NODE_BUDGET = 20_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class OrderedPartition:
    """A partition of {1..n} into nonempty blocks, enumerated by minimum."""

    n: int
    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        blocks = tuple(frozenset(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        union = set()
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            if union & b:
                raise ValueError("blocks overlap")
            union |= b
        if union != set(range(1, self.n + 1)):
            raise ValueError("blocks must cover the ground set")
        mins = [min(b) for b in blocks]
        if mins != sorted(mins):
            raise ValueError("blocks must be listed by minimum")

    @property
    def size(self) -> int:
        return len(self.blocks)

    def key(self) -> tuple:
        return tuple(tuple(sorted(b)) for b in self.blocks)

    def to_json(self) -> dict:
        return {"n": self.n, "blocks": [sorted(b) for b in self.blocks]}


def partitions(n: int, d: int) -> list[OrderedPartition]:
    """All partitions of {1..n} into exactly d blocks, in restricted-growth
    order."""
    if not 1 <= d <= n:
        return []
    out = []
    assignment = [0] * (n + 1)

    def rec(i, used):
        if n - i + 1 + used < d or used > d:
            return
        if i > n:
            if used == d:
                blocks = [set() for _ in range(d)]
                for x in range(1, n + 1):
                    blocks[assignment[x]].add(x)
                out.append(OrderedPartition(n, tuple(frozenset(b) for b in blocks)))
            return
        for b in range(used):
            assignment[i] = b
            rec(i + 1, used)
        assignment[i] = used
        rec(i + 1, used + 1)
        assignment[i] = 0

    rec(1, 0)
    return out


def is_coarsening(coarse: OrderedPartition, fine: OrderedPartition) -> bool:
    """Every block of the fine partition sits inside a coarse block."""
    if coarse.n != fine.n:
        raise ValueError("ground sets differ")
    locate = {}
    for i, b in enumerate(coarse.blocks):
        for x in b:
            locate[x] = i
    return all(len({locate[x] for x in b}) == 1 for b in fine.blocks)


def coarsenings_of_size(fine: OrderedPartition, k: int) -> list[OrderedPartition]:
    """All coarsenings of the partition into exactly k blocks."""
    out = []
    for grouping in partitions(fine.size, k):
        merged = []
        for g in grouping.blocks:
            u = frozenset().union(*(fine.blocks[i - 1] for i in g))
            merged.append(u)
        merged.sort(key=min)
        out.append(OrderedPartition(fine.n, tuple(merged)))
    out.sort(key=OrderedPartition.key)
    return out


def phi_encode(part: OrderedPartition, d: int, k: int) -> BlockSeq:
    """Encode a canonically enumerated partition with d*k+1 blocks as a
    block sequence: entry j carries value s on the block at index
    (j-1)*k+s; block 0 is dropped."""
    if part.size != d * k + 1:
        raise ValueError(f"need exactly {d * k + 1} blocks, got {part.size}")
    entries = []
    for j in range(1, d + 1):
        vals = [0] * part.n
        for s in range(1, k + 1):
            for x in part.blocks[(j - 1) * k + s]:
                vals[x - 1] = s
        entries.append(FinVec(tuple(vals)))
    seq = BlockSeq(tuple(entries), k)
    if not is_block_star(seq):
        raise AssertionError("partition encoding left the starred family")
    return seq


@dataclass(frozen=True)
class Coloring:
    """A total coloring of an explicitly indexed finite domain."""

    domain: tuple
    colors: tuple[int, ...]
    r: int

    def __post_init__(self):
        if len(self.domain) != len(self.colors):
            raise ValueError("coloring is not total on the domain")
        if any(not 1 <= c <= self.r for c in self.colors):
            raise ValueError("colors must lie in 1..r")
        object.__setattr__(
            self, "_index", {key: i for i, key in enumerate(self.domain)}
        )

    def __call__(self, item) -> int:
        return self.colors[self.__dict__["_index"][item]]

    def __len__(self):
        return len(self.domain)


# ---------------------------------------------------------------------------
# complete DFS over colorings


def exists_bad_coloring(num_points: int, witness_groups, r: int,
                        node_budget: int = DEFAULT_NODE_BUDGET):
    """Search for an r-coloring of an indexed domain in which no witness
    group is monochromatic.

    Complete backtracking: assignments are pruned as soon as some fully
    colored group is monochromatic (every completion of such a prefix
    admits that witness).  Returns a color list or None; None is a proof
    that every coloring admits a monochromatic group.
    """
    groups = [tuple(g) for g in witness_groups]
    if any(not g for g in groups):
        raise ValueError("empty witness group")
    by_last = [[] for _ in range(num_points)]
    for g in groups:
        by_last[max(g)].append(g)
    color = [0] * num_points
    nodes = 0

    def consistent(v):
        for g in by_last[v]:
            first = color[g[0]]
            if all(color[i] == first for i in g[1:]):
                return False
        return True

    def dfs(v):
        nonlocal nodes
        if v == num_points:
            return True
        first_vertex_cap = 1 if v == 0 else r
        for c in range(1, first_vertex_cap + 1):
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded(f"coloring search passed {node_budget} nodes")
            color[v] = c
            if consistent(v) and dfs(v + 1):
                return True
        color[v] = 0
        return False

    if num_points == 0:
        return None, 0
    if not groups:
        return [1] * num_points, 0
    if dfs(0):
        return list(color), nodes
    return None, nodes


# ---------------------------------------------------------------------------
# partition pigeonhole search


def _gr_witness_groups(n: int, k: int, l: int):
    """Index groups: for each l-partition, the indices of its k-coarsenings
    in the canonical enumeration of k-partitions."""
    fine_k = partitions(n, k)
    index = {p.key(): i for i, p in enumerate(fine_k)}
    groups = []
    for p in partitions(n, l):
        groups.append(tuple(index[c.key()] for c in coarsenings_of_size(p, k)))
    return fine_k, groups


@dataclass(frozen=True)
class SearchOutcome:
    """Exact threshold or verified bracket for a pigeonhole search."""

    kind: str                   # "gr" | "lelek"
    params: dict
    exact: int | None
    lower_bound: int
    searched_to: int
    counterexamples: dict       # n -> coloring (list of colors)
    budget_note: str | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "exact": self.exact,
            "lower_bound": self.lower_bound,
            "searched_to": self.searched_to,
            "counterexamples": {str(n): c for n, c in self.counterexamples.items()},
            "budget_note": self.budget_note,
        }


def gr_decide(n: int, k: int, l: int, r: int,
              node_budget: int = DEFAULT_NODE_BUDGET):
    """Does every r-coloring of the k-partitions of {1..n} admit an
    l-partition with all k-coarsenings monochromatic?  Returns
    (verdict, counterexample-or-None)."""
    if k >= l:
        raise ValueError("need k < l")
    fine_k, groups = _gr_witness_groups(n, k, l)
    if not groups:
        if not fine_k:
            return False, []
        return False, [1] * len(fine_k)
    bad, _ = exists_bad_coloring(len(fine_k), groups, r, node_budget)
    return (bad is None), bad


def gr_search(k: int, l: int, r: int, n_max: int,
              node_budget: int = DEFAULT_NODE_BUDGET) -> SearchOutcome:
    """Exhaustive threshold search for the partition pigeonhole number.

    Returns the exact least n at which every coloring admits a witness, if
    it occurs within range; otherwise a bracket with a stored
    counterexample coloring at the deepest n fully searched.
    """
    params = {"k": k, "l": l, "r": r, "n_max": n_max}
    counterexamples = {}
    note = None
    for n in range(1, n_max + 1):
        try:
            good, bad = gr_decide(n, k, l, r, node_budget)
        except BudgetExceeded as exc:
            note = str(exc)
            return SearchOutcome("gr", params, None, n, n - 1,
                                 counterexamples, note)
        if good:
            return SearchOutcome("gr", params, n, n, n, counterexamples)
        counterexamples[n] = bad
    return SearchOutcome("gr", params, None, n_max + 1, n_max, counterexamples)


# ---------------------------------------------------------------------------
# block-sequence pigeonhole (the tetris semigroup form)


def enumerate_fink_star(k: int, d: int, n: int) -> list[BlockSeq]:
    """The full starred family of d-tuples at level k over {1..n}."""
    singles = []
    for vals in product(range(k + 1), repeat=n):
        vec = FinVec(vals)
        if vec.in_fink(k, n):
            singles.append(vec)
    out = []
    for combo in product(singles, repeat=d):
        seq = BlockSeq(combo, k)
        if is_block_star(seq):
            out.append(seq)
    return out


def lelek_witness_groups(d: int, m: int, k: int, l: int, n: int,
                         domain: list[BlockSeq] | None = None):
    """For every candidate base sequence, the domain indices of its
    generated starred semigroup."""
    if domain is None:
        domain = enumerate_fink_star(k, d, n)
    index = {seq.vectors(): i for i, seq in enumerate(domain)}
    bases = enumerate_fink_star(l, m, n)
    groups = []
    for base in bases:
        members = generated_semigroup(base, k, d)
        groups.append((base, tuple(sorted(index[s.vectors()] for s in members))))
    return domain, bases, groups


def lelek_decide(d: int, m: int, k: int, l: int, r: int, n: int,
                 node_budget: int = DEFAULT_NODE_BUDGET):
    """Does every r-coloring of the starred level-k d-tuples over {1..n}
    admit a base whose generated semigroup is monochromatic?"""
    domain, bases, groups = lelek_witness_groups(d, m, k, l, n)
    idx_groups = [g for _, g in groups if g]
    if not idx_groups:
        return False, ([1] * len(domain) if domain else []), domain
    bad, _ = exists_bad_coloring(len(domain), idx_groups, r, node_budget)
    return (bad is None), bad, domain


def lelek_number_search(d: int, m: int, k: int, l: int, r: int, n_max: int,
                        node_budget: int = DEFAULT_NODE_BUDGET) -> SearchOutcome:
    """Exhaustive threshold search for the least ground size at which
    every coloring admits a monochromatic generated semigroup."""
    if m < d or l < k or r < 2:
        raise ValueError("need m >= d, l >= k, r >= 2")
    params = {"d": d, "m": m, "k": k, "l": l, "r": r, "n_max": n_max}
    counterexamples = {}
    for n in range(1, n_max + 1):
        try:
            good, bad, _ = lelek_decide(d, m, k, l, r, n, node_budget)
        except BudgetExceeded as exc:
            return SearchOutcome("lelek", params, None, n, n - 1,
                                 counterexamples, str(exc))
        if good:
            return SearchOutcome("lelek", params, n, n, n, counterexamples)
        counterexamples[n] = bad
    return SearchOutcome("lelek", params, None, n_max + 1, n_max, counterexamples)


@dataclass(frozen=True)
class LelekWitness:
    base: BlockSeq
    color: int
    semigroup_size: int
    route: str          # "partition" | "direct"
    partition: OrderedPartition | None

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "color": self.color,
                "semigroup_size": self.semigroup_size, "route": self.route,
                "partition": self.partition.to_json() if self.partition else None}


def lelek_witness(coloring: Coloring, d: int, m: int, k: int, l: int,
                  n: int) -> LelekWitness | None:
    """Find a base sequence whose generated semigroup the coloring cannot
    split.

    First runs the partition route: search the partitions of {1..n} into
    m*l+1 blocks whose (d*k+1)-coarsenings get one color through the
    encoding, and read the base off the winning partition.  When no such
    partition exists (the partition route needs more room than the direct
    statement), falls back to direct enumeration of all base sequences.
    Either way the monochromaticity of the generated semigroup is verified
    literally before returning; the coloring is never trusted through the
    pipeline.
    """
    def verified(base, route, part):
        members = generated_semigroup(base, k, d)
        cols = {coloring(seq.vectors()) for seq in members}
        if len(cols) != 1:
            return None
        return LelekWitness(base, cols.pop(), len(members), route, part)

    for part in partitions(n, m * l + 1):
        cols = set()
        for co in coarsenings_of_size(part, d * k + 1):
            cols.add(coloring(phi_encode(co, d, k).vectors()))
            if len(cols) > 1:
                break
        if len(cols) != 1:
            continue
        base = phi_encode_block(part, m, l)
        out = verified(base, "partition", part)
        if out is not None:
            return out

    for base in enumerate_fink_star(l, m, n):
        out = verified(base, "direct", None)
        if out is not None:
            return out
    return None


def phi_encode_block(part: OrderedPartition, m: int, l: int) -> BlockSeq:
    """The base sequence read off a partition with m*l+1 blocks."""
    return phi_encode(part, m, l)


# ---------------------------------------------------------------------------
# size-determined colorings of set tuples


def set_tuples(n_ground: int, size_caps) -> list[tuple[frozenset[int], ...]]:
    """All tuples assigning to coordinate i a subset of {1..ground} of size
    at most its cap (empty allowed)."""
    pools = []
    for cap in size_caps:
        pool = [frozenset()]
        for s in range(1, cap + 1):
            pool.extend(frozenset(c)
                        for c in combinations(range(1, n_ground + 1), s))
        pools.append(pool)
    return [tuple(t) for t in product(*pools)]


def star_tuples(n_ground: int, size_caps, d: int):
    """Sequences of d set tuples with consecutive supports disjoint; the
    support of a tuple is the set of coordinates with nonempty entries."""
    base = set_tuples(n_ground, size_caps)
    supports = [frozenset(i for i, e in enumerate(t) if e) for t in base]
    out = []

    def rec(prefix, prev_support):
        if len(prefix) == d:
            out.append(tuple(prefix))
            return
        for t, s in zip(base, supports):
            if prev_support is not None and prev_support & s:
                continue
            prefix.append(t)
            rec(prefix, s)
            prefix.pop()

    rec([], None)
    return out


def tuple_shape(star_tuple) -> tuple:
    """Per-coordinate supports and entry sizes: the data a size-determined
    coloring may depend on."""
    return tuple(
        tuple((i, len(e)) for i, e in enumerate(t) if e) for t in star_tuple
    )


def is_size_determined(coloring: Coloring, base_sets,
                       star: bool = True) -> tuple[bool, tuple | None]:
    """Whether the coloring depends only on shapes inside the base sets.

    Returns the verdict and, on failure, a conflicting pair of domain
    elements with equal shape and different colors.
    """
    base_sets = [frozenset(b) for b in base_sets]
    by_shape: dict[tuple, tuple] = {}
    for item in coloring.domain:
        tuples = item if star else (item,)
        if not all(e <= base_sets[i]
                   for t in tuples for i, e in enumerate(t)):
            continue
        shape = tuple_shape(tuples)
        c = coloring(item)
        if shape in by_shape:
            prev_item, prev_c = by_shape[shape]
            if prev_c != c:
                return False, (prev_item, item)
        else:
            by_shape[shape] = (item, c)
    return True, None


@dataclass(frozen=True)
class SizeDeterminedResult:
    base_sets: tuple[frozenset[int], ...] | None
    tried: int
    conflict: tuple | None

    @property
    def found(self) -> bool:
        return self.base_sets is not None

    def to_json(self) -> dict:
        return {
            "base_sets": [sorted(b) for b in self.base_sets] if self.base_sets else None,
            "tried": self.tried,
        }


def size_determined_find(coloring: Coloring, n_ground: int, target_sizes,
                         star: bool = True) -> SizeDeterminedResult:
    """Exhaustive search for base sets of the target sizes on which the
    coloring is size-determined."""
    tried = 0
    last_conflict = None
    pools = [list(combinations(range(1, n_ground + 1), size))
             for size in target_sizes]
    for combo in product(*pools):
        tried += 1
        ok, conflict = is_size_determined(coloring,
                                          [frozenset(b) for b in combo], star)
        if ok:
            return SizeDeterminedResult(tuple(frozenset(b) for b in combo),
                                        tried, None)
        last_conflict = conflict
    return SizeDeterminedResult(None, tried, last_conflict)


def surjections(m: int, d: int) -> list[tuple[int, ...]]:
    """All surjections {1..m} -> {1..d}, as m-tuples of block indices."""
    out = []
    for t in product(range(1, d + 1), repeat=m):
        if len(set(t)) == d:
            out.append(t)
    return out


def gamma_lift(coloring: Coloring, n_ground: int, size_caps, d: int,
               r: int) -> Coloring:
    """Lift a starred coloring to a product coloring whose colors are the
    per-surjection color vectors.

    Each surjection gamma of the coordinate index set onto {1..d} turns a
    plain tuple into a starred one (entry kept where gamma assigns block s,
    emptied elsewhere); the lifted color of the plain tuple lists the
    starred colors over all gamma.
    """
    m = len(size_caps)
    gammas = surjections(m, d)
    plain = set_tuples(n_ground, size_caps)
    colors = []
    for t in plain:
        index = 0
        for gamma in gammas:
            starred = tuple(
                tuple(t[i] if gamma[i] == s else frozenset() for i in range(m))
                for s in range(1, d + 1)
            )
            index = index * r + (coloring(starred) - 1)
        colors.append(index + 1)
    return Coloring(tuple(plain), tuple(colors), r ** len(gammas))
