"""End-to-end partition pipeline for coloring epimorphism sets between
canonical equal-height chained fans.

Hom-sets here are directed-mode chain-epimorphisms: the encodings below
read each branch of the big fan as a monotone climb through the small one,
which a descending map would break.  An epimorphism is encoded two ways:
as a block sequence recording, per branch, how high the branch endpoint
lands (the coarse encoding, a surjection onto the starred family), and as
a tuple of first-visit depth sets (the fine encoding, injective).  The
pipeline colors the fine encodings, stabilizes them to a size-determined
family, pushes the induced coloring to the coarse side, finds a
monochromatic generated semigroup there, and lifts its base back to a
composition witness; the final monochromaticity is always re-verified
against the original coloring by brute force.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .chains import ChainedFan, ChainEpi, ChainError, canonical_chain, \
    canonical_structure, enumerate_chain_epimorphisms
from .fans import MODE_DIRECTED, Fan, fan_build
from .fink import BlockSeq, FinVec, generated_semigroup, is_block_star
from .ramsey import (
    BudgetExceeded,
    Coloring,
    SizeDeterminedResult,
    enumerate_fink_star,
    exists_bad_coloring,
    lelek_number_search,
    lelek_witness,
    size_determined_find,
    star_tuples,
)


class InstanceError(ValueError):
    pass


def cc_fan(width: int, height: int) -> ChainedFan:
    """The canonical equal-height chained fan of the given dimensions."""
    if width == 0 or height == 0:
        return ChainedFan(fan_build([]), (0,))
    return canonical_chain(fan_build([height] * width))


def _require_cc(chained: ChainedFan, name: str) -> None:
    rep = canonical_structure(chained)
    if not rep.in_cc:
        raise InstanceError(f"{name} must be canonical with equal branch heights")


@dataclass(frozen=True)
class RamseyInstance:
    """Small/medium/large chained fans and a color count."""

    small: ChainedFan    # height k, width d
    medium: ChainedFan   # height l >= k, width m >= d
    large: ChainedFan    # width n, height N
    r: int

    def __post_init__(self):
        for c, name in ((self.small, "small"), (self.medium, "medium"),
                        (self.large, "large")):
            _require_cc(c, name)
        k, d = self.small.fan.height, self.small.fan.width
        l, m = self.medium.fan.height, self.medium.fan.width
        if l < k or m < d:
            raise InstanceError("medium must dominate small in height and width")
        if self.r < 2:
            raise InstanceError("need at least two colors")

    @property
    def dims(self) -> dict:
        return {
            "k": self.small.fan.height, "d": self.small.fan.width,
            "l": self.medium.fan.height, "m": self.medium.fan.width,
            "n": self.large.fan.width, "N": self.large.fan.height,
            "r": self.r,
        }


def hom_set(source: ChainedFan, target: ChainedFan) -> list[ChainEpi]:
    """Directed-mode chain-epimorphisms, enumerated deterministically."""
    epis = enumerate_chain_epimorphisms(source, target, MODE_DIRECTED)
    return [ChainEpi(e, source, target) for e in epis]


@dataclass(frozen=True)
class EpiEncoding:
    coarse: BlockSeq                                   # endpoint heights
    fine: tuple[tuple[frozenset[int], ...], ...]       # first-visit depths

    def fine_key(self):
        return tuple(tuple(frozenset(e) for e in t) for t in self.fine)


def encode_epi(f: ChainEpi) -> EpiEncoding:
    """Both encodings of a directed chain-epimorphism between canonical
    equal-height chained fans."""
    big, small = f.source_chain, f.target_chain
    _require_cc(big, "source")
    _require_cc(small, "target")
    if f.epi.mode != MODE_DIRECTED:
        raise InstanceError("encodings are defined for directed-mode maps")
    n = big.fan.width
    cap_n = big.fan.height
    d = small.fan.width
    k = small.fan.height
    small_branches = [small.fan.branches[bi]
                      for bi in canonical_structure(small).branch_order]
    big_branches = [big.fan.branches[bi]
                    for bi in canonical_structure(big).branch_order]
    height_of = {}
    branch_of = {}
    for i, sb in enumerate(small_branches):
        for z, v in enumerate(sb, start=1):
            height_of[v] = z
            branch_of[v] = i

    values = [[0] * n for _ in range(d)]
    visits: list[list[frozenset[int]]] = [
        [frozenset() for _ in range(n)] for _ in range(d)
    ]
    for j, branch in enumerate(big_branches):
        climb = [f(v) for v in branch]
        endpoint = climb[-1]
        if endpoint == 0:
            continue
        i = branch_of[endpoint]
        z = height_of[endpoint]
        if small_branches[i][0] not in climb:
            raise AssertionError("monotone climb skipped the branch base")
        values[i][j] = z
        first = {}
        for depth, w in enumerate(climb, start=1):
            if w != 0 and w not in first:
                first[w] = depth
        visits[i][j] = frozenset(
            first[small_branches[i][x - 1]] for x in range(1, z + 1)
        )

    coarse = BlockSeq(tuple(FinVec(tuple(v)) for v in values), k)
    if not is_block_star(coarse):
        raise AssertionError("encoding left the starred family")
    fine = tuple(tuple(visits[i][j] for j in range(n)) for i in range(d))
    return EpiEncoding(coarse, fine)


@dataclass(frozen=True)
class BuildRecord:
    chained: ChainedFan
    n_source: str  # "override" | "paper-exact"
    n_value: int
    height_source: str
    height_value: int

    def to_json(self) -> dict:
        return {"width": self.n_value, "width_source": self.n_source,
                "height": self.height_value, "height_source": self.height_source}


def sized_number_search(d: int, n_coords: int, k: int, l: int, r: int,
                        n_max: int, node_budget: int = 200_000) -> int | None:
    """Least ground size at which every r-coloring of the starred tuples
    admits base sets of size l per coordinate, by complete search for a
    coloring with no size-determined base tuple."""
    for ground in range(max(l, 1), n_max + 1):
        domain = star_tuples(ground, [k] * n_coords, d)
        if _exists_unsized_coloring(domain, ground, [l] * n_coords, r,
                                    node_budget) is None:
            return ground
    return None


def _exists_unsized_coloring(domain, ground, target_sizes, r, node_budget):
    """Complete DFS for a coloring that is size-determined on no base-set
    tuple; None proves every coloring admits one."""
    base_tuples = list(product(*[
        [frozenset(c) for c in combinations(range(1, ground + 1), size)]
        for size in target_sizes
    ]))
    from .ramsey import tuple_shape

    shape_groups = []
    for bases in base_tuples:
        groups: dict[tuple, list[int]] = {}
        for idx, item in enumerate(domain):
            if all(e <= bases[i] for t in item for i, e in enumerate(t)):
                groups.setdefault(tuple_shape(item), []).append(idx)
        shape_groups.append([g for g in groups.values() if len(g) > 1])

    colors = [0] * len(domain)
    nodes = 0

    def violated(b):
        for group in shape_groups[b]:
            seen = {colors[i] for i in group if colors[i]}
            if len(seen) > 1:
                return True
        return False

    def all_violated():
        return all(violated(b) for b in range(len(base_tuples)))

    def dfs(v):
        nonlocal nodes
        if v == len(domain):
            return all_violated()
        for c in range(1, (1 if v == 0 else r) + 1):
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded("size-determined search out of budget")
            colors[v] = c
            if dfs(v + 1):
                return True
        colors[v] = 0
        return False

    if not base_tuples:
        return [1] * len(domain)
    if dfs(0):
        return list(colors)
    return None


def build_large(small: ChainedFan, medium: ChainedFan, r: int,
                n_override: int | None = None, big_n_override: int | None = None,
                paper_exact: bool = False, n_max: int = 6,
                node_budget: int = 2_000_000) -> BuildRecord:
    """Construct the large chained fan for an instance.

    By default the dimensions come from overrides; in paper-exact mode the
    width is the block-sequence pigeonhole number and the height the
    size-determined number, both computed by exhaustive search (feasible
    only at tiny parameters).  The record names the source of each number.
    """
    _require_cc(small, "small")
    _require_cc(medium, "medium")
    k, d = small.fan.height, small.fan.width
    l, m = medium.fan.height, medium.fan.width
    if paper_exact:
        out = lelek_number_search(d, m, k, l, r, n_max, node_budget)
        if out.exact is None:
            raise BudgetExceeded(f"width search unresolved within {n_max}")
        n = out.exact
        big_n = sized_number_search(d, n, k, l, r, n_max)
        if big_n is None:
            raise BudgetExceeded(f"height search unresolved within {n_max}")
        return BuildRecord(cc_fan(n, big_n), "paper-exact", n,
                           "paper-exact", big_n)
    if n_override is None or big_n_override is None:
        raise InstanceError("overrides required outside paper-exact mode")
    return BuildRecord(cc_fan(n_override, big_n_override), "override",
                       n_override, "override", big_n_override)


@dataclass(frozen=True)
class InducedColorings:
    fine: Coloring                  # on star tuples of depth sets
    coarse: Coloring | None         # on the starred block-sequence family
    base_sets: tuple[frozenset[int], ...] | None
    conflict: tuple | None          # ill-definedness witness, if any
    unrepresented: int              # coarse points with no representative


def induced_colorings(instance: RamseyInstance, coloring: Coloring,
                      homs: list[ChainEpi] | None = None,
                      base_sets=None) -> InducedColorings:
    """The two colorings induced by a coloring of the small hom-set.

    The fine coloring extends through the injective encoding, constant 1
    off its image.  The coarse coloring needs base sets on which the fine
    coloring is size-determined; without them it may be ill-defined, in
    which case the conflicting pair is reported instead.
    """
    dims = instance.dims
    homs = hom_set(instance.large, instance.small) if homs is None else homs
    encodings = [encode_epi(f) for f in homs]
    fine_domain = tuple(star_tuples(dims["N"], [dims["k"]] * dims["n"],
                                    dims["d"]))
    fine_index = {t: i for i, t in enumerate(fine_domain)}
    fine_colors = [1] * len(fine_domain)
    for f, enc in zip(homs, encodings):
        fine_colors[fine_index[enc.fine_key()]] = coloring(f.mapping)
    fine = Coloring(fine_domain, tuple(fine_colors), instance.r)

    if base_sets is None:
        return InducedColorings(fine, None, None, None, 0)

    base_sets = tuple(frozenset(b) for b in base_sets)
    coarse_domain = tuple(s.vectors()
                          for s in enumerate_fink_star(dims["k"], dims["d"],
                                                       dims["n"]))
    coarse_colors = [1] * len(coarse_domain)
    unrepresented = 0
    conflict = None
    for idx, key in enumerate(coarse_domain):
        reps = [
            coloring(f.mapping)
            for f, enc in zip(homs, encodings)
            if enc.coarse.vectors() == key
            and all(e <= base_sets[j]
                    for t in enc.fine for j, e in enumerate(t))
        ]
        if not reps:
            unrepresented += 1
        elif len(set(reps)) > 1:
            pair = [f for f, enc in zip(homs, encodings)
                    if enc.coarse.vectors() == key][:2]
            conflict = (key, tuple(p.mapping for p in pair))
        else:
            coarse_colors[idx] = reps[0]
    coarse = Coloring(coarse_domain, tuple(coarse_colors), instance.r)
    return InducedColorings(fine, coarse, base_sets, conflict, unrepresented)


@dataclass(frozen=True)
class WitnessResult:
    ok: bool
    stage: str
    epi: ChainEpi | None
    color: int | None
    detail: dict

    def to_json(self) -> dict:
        return {"ok": self.ok, "stage": self.stage,
                "g": list(self.epi.mapping) if self.epi else None,
                "color": self.color, "detail": self.detail}


def ramsey_witness(instance: RamseyInstance, coloring: Coloring,
                   homs: list[ChainEpi] | None = None) -> WitnessResult:
    """Run the full pipeline on one coloring of the small hom-set.

    Stages: stabilize the fine coloring to a size-determined base tuple,
    induce the coarse coloring, find a monochromatic generated semigroup,
    lift its base to a medium-hom witness with encodings inside the base
    sets, and re-verify monochromaticity of all compositions literally.
    """
    dims = instance.dims
    homs = hom_set(instance.large, instance.small) if homs is None else homs
    if not homs:
        return WitnessResult(False, "hom-empty", None, None, dims)

    induced = induced_colorings(instance, coloring, homs)
    sized: SizeDeterminedResult = size_determined_find(
        induced.fine, dims["N"], [dims["l"]] * dims["n"])
    if not sized.found:
        return WitnessResult(False, "size-determined", None, None,
                             {"tried": sized.tried})
    induced = induced_colorings(instance, coloring, homs, sized.base_sets)
    if induced.conflict is not None:
        return WitnessResult(False, "coarse-ill-defined", None, None,
                             {"conflict": [list(m) for m in
                                           induced.conflict[1]]})

    wit = lelek_witness(induced.coarse, dims["d"], dims["m"], dims["k"],
                        dims["l"], dims["n"])
    if wit is None:
        return WitnessResult(False, "semigroup", None, None,
                             {"note": "no monochromatic generated semigroup"})

    medium_homs = hom_set(instance.large, instance.medium)
    candidate = None
    for g in medium_homs:
        enc = encode_epi(g)
        if enc.coarse.vectors() != wit.base.vectors():
            continue
        if not all(e <= induced.base_sets[j]
                   for t in enc.fine for j, e in enumerate(t)):
            continue
        candidate = g
        break
    if candidate is None:
        return WitnessResult(False, "lift-empty", None, None,
                             {"base": wit.base.to_json(),
                              "medium_homs": len(medium_homs)})

    small_homs = hom_set(instance.medium, instance.small)
    colors = {coloring(h.compose(candidate).mapping) for h in small_homs}
    if len(colors) != 1:
        return WitnessResult(False, "verify", candidate, None,
                             {"colors": sorted(colors)})
    return WitnessResult(True, "done", candidate, colors.pop(),
                         {"route": wit.route,
                          "compositions": len(small_homs)})


@dataclass(frozen=True)
class InstanceVerdict:
    verdict: str           # "proven" | "refuted" | "sampled-ok" | "sampled-refuted"
    colorings_checked: int
    refutation: tuple[int, ...] | None
    seed: int | None

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "checked": self.colorings_checked,
                "refutation": list(self.refutation) if self.refutation else None,
                "seed": self.seed}


def verify_ramsey_instance(instance: RamseyInstance,
                           budget: int = 1 << 20,
                           sample: int = 10_000,
                           seed: int = 0) -> InstanceVerdict:
    """Ground-truth check of the coloring statement for one instance.

    Independent of the pipeline: for each coloring of the small hom-set,
    search all medium homs for one whose composition set is monochromatic.
    Exhausts the coloring space when it fits the budget, else runs a seeded
    uniform sample, and says which it did.
    """
    import random

    homs = hom_set(instance.large, instance.small)
    medium_homs = hom_set(instance.large, instance.medium)
    small_homs = hom_set(instance.medium, instance.small)
    index = {f.mapping: i for i, f in enumerate(homs)}
    comp_sets = []
    for g in medium_homs:
        comp_sets.append(
            frozenset(index[h.compose(g).mapping] for h in small_homs)
        )

    def is_good(colors):
        return any(
            len({colors[i] for i in cs}) == 1 for cs in comp_sets if cs
        )

    total = instance.r ** len(homs)
    if total <= budget:
        for colors in product(range(1, instance.r + 1), repeat=len(homs)):
            if not is_good(colors):
                return InstanceVerdict("refuted", total, colors, None)
        return InstanceVerdict("proven", total, None, None)

    rng = random.Random(seed)
    for _ in range(sample):
        colors = tuple(rng.randint(1, instance.r) for _ in homs)
        if not is_good(colors):
            return InstanceVerdict("sampled-refuted", sample, colors, seed)
    return InstanceVerdict("sampled-ok", sample, None, seed)
