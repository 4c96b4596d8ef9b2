"""Finite rooted fans and their epimorphism calculus.

A fan is a rooted tree in which every non-root vertex has degree at most 2,
i.e. a root with disjoint branches attached.  The immediate-successor
relation R is stored directed (loops implicit: R(s,s) always holds); the
symmetrization R_S is derived.  Vertex ids are assigned deterministically:
root 0, then branch by branch in order, bottom to top.

Epimorphism checking is mode-parameterized.  In ``directed`` mode every
directed edge of the source must map to a directed edge or loop of the
target; in ``symmetrized`` mode it may also map to a reversed edge.  The
default everywhere is ``symmetrized``: chain-preserving maps of fans may
legitimately descend, and the directed reading rejects some of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

MODE_DIRECTED = "directed"
MODE_SYMMETRIZED = "symmetrized"
MODES = (MODE_DIRECTED, MODE_SYMMETRIZED)

DEFAULT_MODE = MODE_SYMMETRIZED

#: vertex-count guard for powerset-based operations downstream
MAX_FAN_VERTICES = 24


class FanError(ValueError):
    """Invalid fan construction or ill-typed map data."""


@dataclass(frozen=True)
class Fan:
    """A finite rooted fan.

    ``branches`` lists, per branch, the non-root vertex ids in tree order.
    The root is vertex 0 and never appears in a branch tuple.
    """

    branches: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = {0}
        for branch in self.branches:
            if not branch:
                raise FanError("empty branch (omit absent branches instead)")
            for v in branch:
                if v in seen:
                    raise FanError(f"vertex {v} appears twice")
                seen.add(v)
        if seen != set(range(len(seen))):
            raise FanError("vertex ids must be consecutive from 0")

    @property
    def vertex_count(self) -> int:
        return 1 + sum(len(b) for b in self.branches)

    @property
    def root(self) -> int:
        return 0

    @property
    def width(self) -> int:
        return len(self.branches)

    @property
    def height(self) -> int:
        return max((len(b) for b in self.branches), default=0)

    @property
    def branch_lengths(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.branches)

    # -- derived structure, computed once ---------------------------------

    @property
    def parent(self) -> tuple[int, ...]:
        return self._tables()[0]

    @property
    def depth(self) -> tuple[int, ...]:
        return self._tables()[1]

    @property
    def branch_of(self) -> tuple[int, ...]:
        """Branch index per vertex; -1 for the root."""
        return self._tables()[2]

    def _tables(self):
        if "_cache" not in self.__dict__:
            n = self.vertex_count
            parent = [0] * n
            depth = [0] * n
            branch_of = [-1] * n
            for bi, branch in enumerate(self.branches):
                prev = 0
                for d, v in enumerate(branch, start=1):
                    parent[v] = prev
                    depth[v] = d
                    branch_of[v] = bi
                    prev = v
            object.__setattr__(
                self, "_cache", (tuple(parent), tuple(depth), tuple(branch_of))
            )
        return self.__dict__["_cache"]

    # -- relations ---------------------------------------------------------

    def r(self, s: int, t: int) -> bool:
        """Directed immediate-successor relation, loops included."""
        return s == t or (t != 0 and self.parent[t] == s)

    def r_sym(self, s: int, t: int) -> bool:
        return self.r(s, t) or self.r(t, s)

    def edges(self) -> list[tuple[int, int]]:
        """Directed non-loop edges (parent, child)."""
        return [(self.parent[v], v) for v in range(1, self.vertex_count)]

    def below(self, x: int, y: int) -> bool:
        """Tree order: x is below-or-equal y."""
        if x == 0:
            return True
        return self.branch_of[x] == self.branch_of[y] and self.depth[x] <= self.depth[y]

    def segment(self, y: int) -> tuple[int, ...]:
        """The interval from the root up to y along y's branch."""
        if y == 0:
            return (0,)
        branch = self.branches[self.branch_of[y]]
        return (0,) + branch[: self.depth[y]]

    def branch_tip(self, bi: int) -> int:
        return self.branches[bi][-1]

    def is_downward_closed(self, vertices) -> bool:
        vs = set(vertices)
        return all(v == 0 or self.parent[v] in vs for v in vs)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"branches": list(self.branch_lengths)}

    @staticmethod
    def from_json(obj: dict) -> "Fan":
        return fan_build(obj["branches"])

    def __repr__(self):
        return f"Fan{list(self.branch_lengths)}"


def fan_build(branch_lengths) -> Fan:
    """Canonical fan with the given branch lengths.

    The empty list yields the one-point fan.  Zero lengths are rejected:
    absent branches are encoded by omission.
    """
    for length in branch_lengths:
        if length <= 0:
            raise FanError("branch lengths must be positive")
    branches = []
    nxt = 1
    for length in branch_lengths:
        branches.append(tuple(range(nxt, nxt + length)))
        nxt += length
    return Fan(tuple(branches))


@lru_cache(maxsize=None)
def _all_fan_shapes(max_vertices: int) -> tuple[tuple[int, ...], ...]:
    """All branch-length profiles (sorted descending) with <= max_vertices."""
    shapes = [()]

    def rec(prefix, remaining, cap):
        for length in range(min(remaining, cap), 0, -1):
            shape = prefix + (length,)
            shapes.append(shape)
            rec(shape, remaining - length, length)

    rec((), max_vertices - 1, max_vertices - 1)
    shapes.sort(key=lambda s: (1 + sum(s), s))
    return tuple(shapes)


def all_fans(max_vertices: int) -> list[Fan]:
    """Deterministic catalog of all fans with at most max_vertices vertices."""
    return [fan_build(list(s)) for s in _all_fan_shapes(max_vertices)]


def _check_map(mapping, source: Fan, target: Fan):
    if len(mapping) != source.vertex_count:
        raise FanError("map must be total on the source vertices")
    for v in mapping:
        if not 0 <= v < target.vertex_count:
            raise FanError(f"map value {v} outside the target fan")


def is_epimorphism(mapping, source: Fan, target: Fan, mode: str = DEFAULT_MODE) -> bool:
    """Whether the vertex map is a fan epimorphism under the given mode.

    Root preservation and surjectivity are required in both modes; edge
    preservation is directed or symmetrized according to ``mode``.  Values
    outside the target raise rather than return False.
    """
    report = epimorphism_report(mapping, source, target, mode)
    return report.valid


@dataclass(frozen=True)
class EpiReport:
    valid: bool
    root_preserved: bool
    surjective: bool
    edges_preserved: bool
    lifting_ok: bool | None  # every target edge has an edge preimage


def epimorphism_report(mapping, source: Fan, target: Fan,
                       mode: str = DEFAULT_MODE) -> EpiReport:
    """Full diagnostic for the epimorphism predicate.

    On fans, surjectivity plus forward edge preservation force the lifting
    condition (every target edge has an edge preimage): removing a target
    edge splits the target tree in two, the source is connected, and any
    source edge crossing the preimages of the two sides must map onto the
    removed edge.  ``lifting_ok`` reports it anyway as a diagnostic.
    """
    if mode not in MODES:
        raise FanError(f"unknown mode {mode!r}")
    _check_map(mapping, source, target)
    root_ok = mapping[0] == 0
    surjective = set(mapping) == set(range(target.vertex_count))
    rel = target.r if mode == MODE_DIRECTED else target.r_sym
    edges_ok = all(rel(mapping[s], mapping[t]) for s, t in source.edges())
    lifting = None
    if mode == MODE_SYMMETRIZED or edges_ok:
        hit = set()
        for s, t in source.edges():
            a, b = mapping[s], mapping[t]
            if a != b:
                hit.add((a, b) if target.r(a, b) else (b, a))
        lifting = all(e in hit for e in target.edges())
    valid = root_ok and surjective and edges_ok
    return EpiReport(valid, root_ok, surjective, edges_ok, lifting)


@dataclass(frozen=True)
class FanEpi:
    """A validated fan epimorphism."""

    source: Fan
    target: Fan
    mapping: tuple[int, ...]
    mode: str = DEFAULT_MODE

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(self.mapping))
        if not is_epimorphism(self.mapping, self.source, self.target, self.mode):
            raise FanError(
                f"map {self.mapping} is not a {self.mode} epimorphism "
                f"{self.source!r} -> {self.target!r}"
            )

    def __call__(self, v: int) -> int:
        return self.mapping[v]

    def image(self, vertices) -> frozenset[int]:
        return frozenset(self.mapping[v] for v in vertices)

    def compose(self, inner: "FanEpi") -> "FanEpi":
        """self o inner; inner feeds into self."""
        if inner.target is not self.source and inner.target != self.source:
            raise FanError("composition endpoint mismatch")
        return FanEpi(inner.source, self.target,
                      tuple(self.mapping[v] for v in inner.mapping), self.mode)

    def to_json(self) -> dict:
        return {"map": list(self.mapping), "mode": self.mode}

    def __repr__(self):
        return f"FanEpi({list(self.mapping)}, {self.mode})"


def identity_epi(fan: Fan, mode: str = DEFAULT_MODE) -> FanEpi:
    return FanEpi(fan, fan, tuple(range(fan.vertex_count)), mode)


def enumerate_epimorphisms(source: Fan, target: Fan,
                           mode: str = DEFAULT_MODE) -> list[FanEpi]:
    """All epimorphisms source -> target, lexicographic in the map word.

    Backtracking over vertex ids; since every vertex's parent has a smaller
    id, partial edge-consistency prunes each assignment, and a counting
    bound prunes hopeless surjectivity.
    """
    ns, nt = source.vertex_count, target.vertex_count
    if nt > ns:
        return []
    rel = target.r if mode == MODE_DIRECTED else target.r_sym
    parent = source.parent
    out: list[FanEpi] = []
    mapping = [0] * ns
    hit_count = [0] * nt

    def rec(v: int, missing: int):
        if v == ns:
            if missing == 0:
                out.append(FanEpi(source, target, tuple(mapping), mode))
            return
        if missing > ns - v:
            return
        for w in range(nt):
            if not rel(mapping[parent[v]], w):
                continue
            mapping[v] = w
            hit_count[w] += 1
            rec(v + 1, missing - (hit_count[w] == 1))
            hit_count[w] -= 1
        mapping[v] = 0

    hit_count[0] = 1
    rec(1, nt - 1)
    return out


def enumerate_root_surjections(source: Fan, target: Fan) -> list[tuple[int, ...]]:
    """All root-preserving surjective vertex maps (no edge condition)."""
    ns, nt = source.vertex_count, target.vertex_count
    out = []
    for tail in product(range(nt), repeat=ns - 1):
        mapping = (0,) + tail
        if len(set(mapping)) == nt:
            out.append(mapping)
    return out
