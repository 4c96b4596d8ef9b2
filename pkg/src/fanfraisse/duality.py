"""Finite Stone duality for fans: powerset algebras with the relation S
and, for chained fans, the antilexicographic order.

Elements of the dual algebra are bitmasks over the vertex set.  S(X, Y)
holds iff some a in X and b in Y are related by the directed
immediate-successor relation (loops included, so overlapping sets are
always S-related).  For a chained fan, the dual also carries a total order:
X < Y iff the earliest chain-position vertex of the symmetric difference
lies in Y.  Dual maps go contravariantly by preimage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fans import Fan, FanEpi, FanError, MODE_DIRECTED, epimorphism_report
from .chains import ChainedFan

#: hard powerset guard; operations are quadratic in 2**n
POWERSET_CAP = 16


class CapExceeded(ValueError):
    """Fan too large for powerset-based duality operations."""


@dataclass(frozen=True)
class DualAlgebra:
    """Powerset Boolean algebra of a fan, with S and (optionally) the
    chain-induced total order."""

    fan: Fan
    chain: ChainedFan | None = None

    def __post_init__(self):
        if self.fan.vertex_count > POWERSET_CAP:
            raise CapExceeded(
                f"{self.fan.vertex_count} vertices exceeds the powerset cap "
                f"{POWERSET_CAP}"
            )
        if self.chain is not None and self.chain.fan != self.fan:
            raise FanError("chain belongs to a different fan")
        n = self.fan.vertex_count
        # children_mask[v] = bitmask of immediate successors of v
        children = [0] * n
        for p, c in self.fan.edges():
            children[p] |= 1 << c
        object.__setattr__(self, "_children", tuple(children))

    @property
    def size(self) -> int:
        return 1 << self.fan.vertex_count

    def elements(self):
        return range(self.size)

    # Boolean structure on bitmasks: union |, intersection &, complement ^ one

    @property
    def one(self) -> int:
        return self.size - 1

    def complement(self, x: int) -> int:
        return self.one ^ x

    def s(self, x: int, y: int) -> bool:
        """S(X, Y): some a in X, b in Y with R(a, b)."""
        if x & y:
            return True
        succ = 0
        rest = x
        children = self.__dict__["_children"]
        while rest:
            v = (rest & -rest).bit_length() - 1
            succ |= children[v]
            rest &= rest - 1
        return bool(succ & y)

    def lt_ba(self, x: int, y: int) -> bool:
        """Antilexicographic order from the chain: compare at the earliest
        chain position where the sets differ."""
        if self.chain is None:
            raise FanError("order undefined: the ground fan is not chained")
        if x == y:
            return False
        diff = x ^ y
        for v in self.chain.order:
            if diff >> v & 1:
                return bool(y >> v & 1)
        raise AssertionError("unreachable")

    def le_ba(self, x: int, y: int) -> bool:
        return x == y or self.lt_ba(x, y)


def dualize(ground: Fan | ChainedFan) -> DualAlgebra:
    """The dual algebra of a fan or chained fan."""
    if isinstance(ground, ChainedFan):
        return DualAlgebra(ground.fan, ground)
    return DualAlgebra(ground, None)


def preimage_mask(mapping, source_n: int, x: int) -> int:
    """Bitmask preimage of the element-mask x under the vertex map."""
    out = 0
    for v in range(source_n):
        if x >> mapping[v] & 1:
            out |= 1 << v
    return out


@dataclass(frozen=True)
class DualMap:
    """The contravariant embedding X -> f^{-1}(X) between dual algebras."""

    dual_target: DualAlgebra   # algebra of the map's target (domain here)
    dual_source: DualAlgebra   # algebra of the map's source (codomain here)
    mapping: tuple[int, ...]
    s_preserving: bool
    ba_preserving: bool | None

    def __call__(self, x: int) -> int:
        return preimage_mask(self.mapping, self.dual_source.fan.vertex_count, x)


def dualize_map(f: FanEpi, source_chain: ChainedFan | None = None,
                target_chain: ChainedFan | None = None) -> DualMap:
    """Dualize a fan epimorphism to a Boolean-algebra embedding with
    preservation flags for S and, when both sides are chained, the order."""
    da = dualize(target_chain if target_chain is not None else f.target)
    db = dualize(source_chain if source_chain is not None else f.source)
    return _dual_map(f.mapping, db, da)


def _dual_map(mapping, dual_source: DualAlgebra, dual_target: DualAlgebra) -> DualMap:
    ns = dual_source.fan.vertex_count
    pre = [preimage_mask(mapping, ns, x) for x in dual_target.elements()]
    s_ok = all(
        dual_target.s(x, y) == dual_source.s(pre[x], pre[y])
        for x in dual_target.elements()
        for y in dual_target.elements()
    )
    ba_ok = None
    if dual_target.chain is not None and dual_source.chain is not None:
        ba_ok = all(
            dual_target.lt_ba(x, y) == dual_source.lt_ba(pre[x], pre[y])
            for x in dual_target.elements()
            for y in dual_target.elements()
            if x != y
        )
    return DualMap(dual_target, dual_source, tuple(mapping), s_ok, ba_ok)


@dataclass(frozen=True)
class DualityReport:
    """Outcome of checking the duality equivalences on one map."""

    applicable: bool           # root-preserving surjection
    s_equiv: bool | None       # directed epi-condition <=> dual S-preserving
    ba_equiv: bool | None      # chain-preserving <=> dual order-preserving
    passed: bool

    def to_json(self) -> dict:
        return {"s_equiv": self.s_equiv, "ba_equiv": self.ba_equiv,
                "pass": self.passed}


def verify_duality(mapping, source: Fan, target: Fan,
                   source_chain: ChainedFan | None = None,
                   target_chain: ChainedFan | None = None) -> DualityReport:
    """Check both duality equivalences for one root-preserving surjection.

    The S side: the map satisfies the directed epimorphism conditions
    (forward edge preservation plus edge lifting) iff its dual preserves S.
    The order side (only when both chains are given): the map carries the
    source chain onto the target chain iff its dual preserves the
    antilexicographic order.  Non-surjective or root-moving maps are
    reported as inapplicable.
    """
    mapping = tuple(mapping)
    report = epimorphism_report(mapping, source, target, MODE_DIRECTED)
    if not (report.root_preserved and report.surjective):
        return DualityReport(False, None, None, True)

    da = dualize(target_chain if target_chain is not None else target)
    db = dualize(source_chain if source_chain is not None else source)
    dm = _dual_map(mapping, db, da)

    directed_epi = report.edges_preserved and bool(report.lifting_ok)
    s_equiv = directed_epi == dm.s_preserving

    ba_equiv = None
    if source_chain is not None and target_chain is not None:
        try:
            epi_like = _image_chain_matches(mapping, source, target,
                                            source_chain, target_chain)
        except FanError:
            epi_like = False
        ba_equiv = epi_like == dm.ba_preserving

    passed = s_equiv and ba_equiv is not False
    return DualityReport(True, s_equiv, ba_equiv, passed)


def _image_chain_matches(mapping, source, target, source_chain, target_chain) -> bool:
    """Chain preservation for a raw surjection: prefix images sweep exactly
    the target chain (no epimorphism hypothesis)."""
    seen = set()
    image_order = []
    for v in source_chain.order:
        w = mapping[v]
        if w not in seen:
            seen.add(w)
            image_order.append(w)
    return tuple(image_order) == target_chain.order
