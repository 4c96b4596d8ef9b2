"""Amalgamation of chained fans, coinitial covers, expansion property
witnesses, and finitary generic inverse sequences.

The amalgam of two chain-epimorphisms with a common target is built
branch by branch: each branch of the amalgam realizes a walk in the fiber
product {(x, y) : f(x) = g(y)} of the two maps, scheduled so that the two
projections sweep the source chains in order.  Walks are found by
breadth-first search rather than by the counting argument that proves they
exist; the search failing would falsify that argument and raises loudly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chains import (
    ChainedFan,
    ChainEpi,
    ChainError,
    all_maximal_chains,
    canonical_chain,
    canonical_structure,
    chain_image,
    constant_chain_epi,
    enumerate_chain_epimorphisms,
    preimage_chain,
)
from .fans import DEFAULT_MODE, Fan, FanEpi, FanError, fan_build


class AmalgamError(RuntimeError):
    """A fiber-product walk was not found within its height budget."""


@dataclass(frozen=True)
class Amalgam:
    """A commuting square: k and l out of the amalgam, with f o k = g o l."""

    amalgam: ChainedFan
    left: ChainEpi    # onto the first source
    right: ChainEpi   # onto the second source

    def verify_square(self, f: ChainEpi, g: ChainEpi) -> bool:
        n = self.amalgam.fan.vertex_count
        return all(f(self.left(v)) == g(self.right(v)) for v in range(n))


def _neighbors(fan: Fan):
    nbr = [[v] for v in range(fan.vertex_count)]
    for p, c in fan.edges():
        nbr[p].append(c)
        nbr[c].append(p)
    return [tuple(sorted(x)) for x in nbr]


def _walk_search(fan_b, fan_d, fmap, gmap, allowed_b, allowed_d,
                 target_b, target_d, budget):
    """Shortest walk from the root pair through the fiber product hitting
    the required targets inside the allowed regions.

    Returns the list of pairs after the root pair (possibly empty).  The
    targets may be None (nothing new on that side).
    """
    nbr_b = _neighbors(fan_b)
    nbr_d = _neighbors(fan_d)
    start = (0, 0, target_b is None, target_d is None)
    if start[2] and start[3]:
        return []
    frontier = [start]
    parents = {start: None}
    for _ in range(budget):
        nxt = []
        for state in frontier:
            x, y, got_b, got_d = state
            for x2 in nbr_b[x]:
                if x2 not in allowed_b:
                    continue
                for y2 in nbr_d[y]:
                    if y2 not in allowed_d:
                        continue
                    if fmap[x2] != gmap[y2]:
                        continue
                    s2 = (x2, y2, got_b or x2 == target_b, got_d or y2 == target_d)
                    if s2 in parents:
                        continue
                    parents[s2] = state
                    if s2[2] and s2[3]:
                        path = [(x2, y2)]
                        cur = state
                        while parents[cur] is not None:
                            path.append((cur[0], cur[1]))
                            cur = parents[cur]
                        path.reverse()
                        return path
                    nxt.append(s2)
        frontier = nxt
        if not frontier:
            break
    raise AmalgamError(
        f"no fiber walk reaches ({target_b}, {target_d}) within budget {budget}"
    )


def amalgamate_chained(f: ChainEpi, g: ChainEpi) -> Amalgam:
    """Amalgamate two chain-epimorphisms over their common target.

    The amalgam has one branch per element of either source outside the
    target's copies, width |B| + |D| - |A|, all branches of equal height,
    and the canonical chain; both legs are chain-epimorphisms and the
    square commutes vertex by vertex.
    """
    if f.target_chain != g.target_chain:
        raise ChainError("amalgamation needs a common chained target")
    fan_b, fan_d = f.source, g.source
    beta = f.source_chain.order
    delta = g.source_chain.order
    alpha = f.target_chain.order
    fmap, gmap = f.mapping, g.mapping

    # first-reach vertices per target vertex, in chain order
    first_b = {}
    for v in beta:
        first_b.setdefault(fmap[v], v)
    first_d = {}
    for v in delta:
        first_d.setdefault(gmap[v], v)

    pos_b = {v: i for i, v in enumerate(beta)}
    pos_d = {v: i for i, v in enumerate(delta)}

    # schedule: per amalgam branch, the new vertex required on each side
    specs: list[tuple[int | None, int | None]] = []
    for i, a in enumerate(alpha):
        bi, di = first_b[a], first_d[a]
        specs.append((None if bi == 0 else bi, None if di == 0 else di))
        end_b = pos_b[first_b[alpha[i + 1]]] if i + 1 < len(alpha) else len(beta)
        end_d = pos_d[first_d[alpha[i + 1]]] if i + 1 < len(alpha) else len(delta)
        for j in range(pos_b[bi] + 1, end_b):
            specs.append((beta[j], None))
        for j in range(pos_d[di] + 1, end_d):
            specs.append((None, delta[j]))

    width = fan_b.vertex_count + fan_d.vertex_count - len(alpha)
    assert len(specs) == width, (len(specs), width)

    budget = fan_b.height + fan_d.height + 2
    covered_b = {0}
    covered_d = {0}
    walks = []
    for target_b, target_d in specs:
        allowed_b = set(covered_b)
        if target_b is not None:
            allowed_b = set(fan_b.segment(target_b))
        allowed_d = set(covered_d)
        if target_d is not None:
            allowed_d = set(fan_d.segment(target_d))
        walk = _walk_search(fan_b, fan_d, fmap, gmap, allowed_b, allowed_d,
                            target_b, target_d, budget)
        walks.append(walk)
        if target_b is not None:
            covered_b.add(target_b)
        if target_d is not None:
            covered_d.add(target_d)

    height = max((len(w) for w in walks), default=0)
    if width == 0 or height == 0:
        # both sources already coincide with the target's shape: one point
        # amalgam only happens when B = D = A = point
        fan_e = fan_build([height] * width if height else [])
        if fan_e.vertex_count == 1:
            e_chain = ChainedFan(fan_e, (0,))
            k = ChainEpi(FanEpi(fan_e, fan_b, (0,), f.epi.mode),
                         e_chain, f.source_chain)
            l = ChainEpi(FanEpi(fan_e, fan_d, (0,), g.epi.mode),
                         e_chain, g.source_chain)
            return Amalgam(e_chain, k, l)
        height = 1  # pad degenerate walks on a nontrivial amalgam

    fan_e = fan_build([height] * width)
    kmap = [0] * fan_e.vertex_count
    lmap = [0] * fan_e.vertex_count
    for bi, walk in enumerate(walks):
        padded = walk + [walk[-1] if walk else (0, 0)] * (height - len(walk))
        for t, (x, y) in enumerate(padded):
            v = fan_e.branches[bi][t]
            kmap[v] = x
            lmap[v] = y

    e_chain = canonical_chain(fan_e)
    k = ChainEpi(FanEpi(fan_e, fan_b, tuple(kmap), f.epi.mode),
                 e_chain, f.source_chain)
    l = ChainEpi(FanEpi(fan_e, fan_d, tuple(lmap), g.epi.mode),
                 e_chain, g.source_chain)
    out = Amalgam(e_chain, k, l)
    if not out.verify_square(f, g):
        raise AmalgamError("amalgam square does not commute")  # unreachable
    return out


def amalgamate_one_branch(f: ChainEpi, g: ChainEpi) -> Amalgam:
    """Minimal-height single-branch amalgam of one-branch inputs.

    Found by shortest-walk search in the fiber product covering the tops of
    both sources; a walk of length at most height(B) + height(D) exists.
    """
    if f.target_chain != g.target_chain:
        raise ChainError("amalgamation needs a common chained target")
    fan_b, fan_d = f.source, g.source
    if fan_b.width > 1 or fan_d.width > 1 or f.target.width > 1:
        raise ChainError("one-branch amalgamation needs single-branch fans")
    if fan_b.vertex_count == 1 and fan_d.vertex_count == 1:
        point_chain = f.source_chain
        k = ChainEpi(FanEpi(fan_b, fan_b, (0,), f.epi.mode),
                     point_chain, f.source_chain)
        return Amalgam(point_chain, k, k)

    top_b = fan_b.branch_tip(0) if fan_b.width else None
    top_d = fan_d.branch_tip(0) if fan_d.width else None
    all_b = set(range(fan_b.vertex_count))
    all_d = set(range(fan_d.vertex_count))
    walk = _walk_search(fan_b, fan_d, f.mapping, g.mapping, all_b, all_d,
                        top_b, top_d, fan_b.height + fan_d.height)
    fan_e = fan_build([len(walk)])
    kmap = [0] + [x for x, _ in walk]
    lmap = [0] + [y for _, y in walk]
    e_chain = canonical_chain(fan_e)
    k = ChainEpi(FanEpi(fan_e, fan_b, tuple(kmap), f.epi.mode),
                 e_chain, f.source_chain)
    l = ChainEpi(FanEpi(fan_e, fan_d, tuple(lmap), g.epi.mode),
                 e_chain, g.source_chain)
    out = Amalgam(e_chain, k, l)
    if not out.verify_square(f, g):
        raise AmalgamError("one-branch amalgam square does not commute")
    return out


def amalgamate_fans(f: FanEpi, g: FanEpi) -> tuple[Fan, FanEpi, FanEpi]:
    """Amalgamation of plain fan epimorphisms, by reduction to chains.

    Equips the first source with its first maximal chain, pushes it through
    f, pulls it back through g, amalgamates, and forgets the chains.
    """
    if f.target != g.target:
        raise FanError("amalgamation needs a common target")
    chain_b = ChainedFan(f.source, tuple(range(f.source.vertex_count)))
    chain_a = chain_image(f, chain_b).chained
    chain_d = preimage_chain(g, chain_a)
    fc = ChainEpi(f, chain_b, chain_a)
    gc = ChainEpi(g, chain_d, chain_a)
    out = amalgamate_chained(fc, gc)
    return out.amalgam.fan, out.left.epi, out.right.epi


def coinitial_cover(target: ChainedFan,
                    mode: str = DEFAULT_MODE) -> tuple[ChainedFan, ChainEpi]:
    """A canonical equal-height chained fan covering the target.

    The cover has one branch per target vertex, all of the target's height;
    branch i climbs the segment below the i-th vertex of the target chain
    and parks any surplus on that vertex.
    """
    n = target.fan.vertex_count
    k = target.fan.height
    if n == 1:
        return target, ChainEpi(FanEpi(target.fan, target.fan, (0,), mode),
                                target, target)
    cover = fan_build([k] * n)
    mapping = [0] * cover.vertex_count
    for i, a in enumerate(target.order):
        segment = target.fan.segment(a)  # root .. a
        for t, v in enumerate(cover.branches[i], start=1):
            mapping[v] = segment[min(t, len(segment) - 1)]
    cover_chain = canonical_chain(cover)
    epi = ChainEpi(FanEpi(cover, target.fan, tuple(mapping), mode),
                   cover_chain, target)
    return cover_chain, epi


def expansion_witness(target: ChainedFan) -> Fan:
    """The plain fan every chain expansion of which covers the canonical
    cover of the target: same width, branches stretched by that width."""
    cover_chain, _ = coinitial_cover(target)
    k = cover_chain.fan.height
    width = cover_chain.fan.width
    if width == 0 or k == 0:
        return fan_build([])
    return fan_build([k * width] * width)


def expansion_epi(expanded: ChainedFan, cover: ChainedFan,
                  mode: str = DEFAULT_MODE) -> ChainEpi:
    """The window map from any chain expansion of the witness fan onto the
    canonical cover.

    Walks the checkpoint grid: the i-th branch chosen is the one whose
    depth-(i*k) vertex comes earliest in the expansion's chain among unused
    branches; its i-th window of k vertices maps onto cover branch i, the
    stretch below to the root and the stretch above to the branch top.
    """
    rep = canonical_structure(cover)
    if not rep.in_cc:
        raise ChainError("cover must be canonical with equal branch heights")
    k = cover.fan.height
    width = cover.fan.width
    dfan = expanded.fan
    if width == 0 or k == 0:
        if dfan.vertex_count != 1:
            raise ChainError("one-point cover expects a one-point expansion")
        return ChainEpi(FanEpi(dfan, cover.fan, (0,), mode), expanded, cover)
    if dfan.width != width or set(dfan.branch_lengths) != {k * width}:
        raise ChainError(
            f"expansion fan must have {width} branches of height {k * width}"
        )

    cover_branches = [cover.fan.branches[bi] for bi in rep.branch_order]
    pos = expanded.position
    used: set[int] = set()
    assigned: list[int] = []
    for i in range(1, width + 1):
        checkpoints = [
            (pos[dfan.branches[bj][i * k - 1]], bj)
            for bj in range(width)
            if bj not in used
        ]
        _, chosen = min(checkpoints)
        used.add(chosen)
        assigned.append(chosen)

    mapping = [0] * dfan.vertex_count
    for i, bj in enumerate(assigned, start=1):
        branch = dfan.branches[bj]
        cbranch = cover_branches[i - 1]
        for t, v in enumerate(branch, start=1):
            if t <= (i - 1) * k:
                mapping[v] = 0
            elif t <= i * k:
                mapping[v] = cbranch[t - (i - 1) * k - 1]
            else:
                mapping[v] = cbranch[-1]
    return ChainEpi(FanEpi(dfan, cover.fan, tuple(mapping), mode),
                    expanded, cover)


# ---------------------------------------------------------------------------
# finitary generic sequences


@dataclass(frozen=True)
class InverseSequence:
    """Finite initial stretch of an inverse sequence of chained fans."""

    levels: tuple[ChainedFan, ...] = ()
    bondings: tuple[ChainEpi, ...] = ()
    task_log: tuple[dict, ...] = ()

    def __post_init__(self):
        for i, bond in enumerate(self.bondings):
            if bond.source_chain != self.levels[i + 1] or \
                    bond.target_chain != self.levels[i]:
                raise ChainError(f"bonding {i} does not match its levels")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def bottom(self) -> ChainedFan:
        return self.levels[-1]

    def project(self, deep: int, shallow: int) -> ChainEpi:
        """The composed bonding from level ``deep`` down to ``shallow``."""
        if not 0 <= shallow <= deep < self.depth:
            raise ChainError("level indices out of range")
        out = None
        for i in range(shallow, deep):
            out = self.bondings[i] if out is None else out.compose(self.bondings[i])
        if out is None:
            from .chains import identity_chain_epi

            return identity_chain_epi(self.levels[shallow])
        return out

    def to_json(self) -> dict:
        return {
            "levels": [c.to_json() for c in self.levels],
            "bondings": [b.to_json() for b in self.bondings],
            "tasks": list(self.task_log),
        }


def chained_catalog(max_vertices: int) -> list[ChainedFan]:
    """Deterministic catalog of all chained fans up to a vertex bound."""
    from .fans import all_fans

    out = []
    for fan in all_fans(max_vertices):
        out.extend(all_maximal_chains(fan))
    return out


@dataclass(frozen=True)
class GenericStep:
    sequence: InverseSequence
    discharged: dict | None
    pending: dict | None


def _catalog_key(chained: ChainedFan) -> list:
    return [list(chained.fan.branch_lengths), list(chained.order)]


def _enumerate_tasks(seq: InverseSequence, catalog):
    for ci, member in enumerate(catalog):
        yield {"kind": "cover", "catalog": ci, "member": _catalog_key(member)}
    for level in range(seq.depth):
        for ci, member in enumerate(catalog):
            epis = enumerate_chain_epimorphisms(member, seq.levels[level])
            for ei, epi in enumerate(epis):
                yield {
                    "kind": "factor",
                    "level": level,
                    "catalog": ci,
                    "epi_index": ei,
                    "epi_map": list(epi.mapping),
                }


def _task_id(task: dict) -> tuple:
    if task["kind"] == "cover":
        return ("cover", task["catalog"])
    return ("factor", task["level"], task["catalog"], task["epi_index"])


def _cover_satisfied(seq: InverseSequence, member: ChainedFan) -> bool:
    return any(
        enumerate_chain_epimorphisms(seq.levels[p], member)
        for p in range(seq.depth)
    )


def _factor_satisfied(seq: InverseSequence, member: ChainedFan,
                      level: int, epi: ChainEpi) -> bool:
    for p in range(level + 1, seq.depth):
        bond = seq.project(p, level)
        for gamma in enumerate_chain_epimorphisms(seq.levels[p], member):
            if epi.compose(gamma).mapping == bond.mapping:
                return True
    return False


def generic_extend(seq: InverseSequence, catalog,
                   budget: int = 4000) -> GenericStep:
    """Append one level by discharging the first pending genericity task.

    Tasks are dovetailed first-in-first-out: joint covering of each catalog
    member, then bonding-factorization for every epimorphism from a catalog
    member out of each level.  The budget caps the vertex count of the new
    level; an over-budget task leaves the sequence unchanged and reports it.
    """
    catalog = list(catalog)
    if not catalog:
        return GenericStep(seq, None, None)
    if seq.depth == 0:
        level0 = catalog[0]
        new = InverseSequence(
            (level0,), (),
            ({"kind": "seed", "member": _catalog_key(level0)},),
        )
        return GenericStep(new, new.task_log[-1], None)

    done = {_task_id(t) for t in seq.task_log if "catalog" in t}
    for task in _enumerate_tasks(seq, catalog):
        if _task_id(task) in done:
            continue
        member = catalog[task["catalog"]]
        if task["kind"] == "cover":
            if _cover_satisfied(seq, member):
                continue
            f = constant_chain_epi(seq.bottom())
            g = constant_chain_epi(member)
            out = amalgamate_chained(f, g)
        else:
            epis = enumerate_chain_epimorphisms(member, seq.levels[task["level"]])
            epi = epis[task["epi_index"]]
            if _factor_satisfied(seq, member, task["level"], epi):
                continue
            bond = seq.project(seq.depth - 1, task["level"])
            out = amalgamate_chained(epi, bond)
        new_level = out.amalgam
        if new_level.fan.vertex_count > budget:
            return GenericStep(seq, None, {"task": task,
                                           "needed": new_level.fan.vertex_count,
                                           "budget": budget})
        if task["kind"] == "cover":
            bonding, witness = out.left, out.right
        else:
            bonding, witness = out.right, out.left
        entry = dict(task)
        entry["witness_map"] = list(witness.mapping)
        entry["new_level"] = _catalog_key(new_level)
        new_seq = InverseSequence(
            seq.levels + (new_level,),
            seq.bondings + (bonding,),
            seq.task_log + (entry,),
        )
        return GenericStep(new_seq, entry, None)
    return GenericStep(seq, None, None)


@dataclass(frozen=True)
class DominationReport:
    checked: int
    satisfied: int
    unsatisfied: tuple[dict, ...]

    @property
    def all_satisfied(self) -> bool:
        return not self.unsatisfied

    def to_json(self) -> dict:
        return {"checked": self.checked, "satisfied": self.satisfied,
                "unsatisfied": list(self.unsatisfied)}


def check_dominating(seq: InverseSequence, catalog,
                     up_to_level: int | None = None) -> DominationReport:
    """Verify the finitary domination condition against a catalog.

    For each level m up to the bound and every chain-epimorphism from a
    catalog member onto that level, search the deeper levels for a factor
    gamma with epi o gamma equal to the composed bonding.
    """
    if up_to_level is None:
        up_to_level = seq.depth - 1
    if up_to_level >= seq.depth:
        raise ChainError("level bound exceeds the sequence depth")
    checked = satisfied = 0
    unsat = []
    for m in range(up_to_level + 1):
        for ci, member in enumerate(catalog):
            for ei, epi in enumerate(
                enumerate_chain_epimorphisms(member, seq.levels[m])
            ):
                checked += 1
                if _factor_satisfied(seq, member, m, epi):
                    satisfied += 1
                else:
                    unsat.append({"kind": "factor", "level": m, "catalog": ci,
                                  "epi_index": ei, "epi_map": list(epi.mapping)})
    return DominationReport(checked, satisfied, tuple(unsat))
