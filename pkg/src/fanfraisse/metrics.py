"""Path and Hausdorff metrics on finite fans, and the chain-merging
epimorphism construction.

The path metric is taken in the symmetrized graph of the fan: two vertices
on one branch are separated by their depth difference, otherwise the path
runs through the root.  Hausdorff lifts to vertex sets and to families of
vertex sets are evaluated on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chains import ChainedFan, ChainError
from .fans import Fan, FanEpi, FanError, is_epimorphism


class MetricError(ValueError):
    pass


class NakrPreconditionError(ValueError):
    """The chain-merging hypotheses fail for the given instance."""


@dataclass(frozen=True)
class FanMetric:
    fan: Fan

    def mu0(self, x: int, y: int) -> int:
        """Graph distance in the symmetrized fan."""
        fan = self.fan
        if x == y:
            return 0
        bx, by = fan.branch_of[x], fan.branch_of[y]
        dx, dy = fan.depth[x], fan.depth[y]
        if bx == by or x == 0 or y == 0:
            return abs(dx - dy)
        return dx + dy

    def matrix(self) -> list[list[int]]:
        n = self.fan.vertex_count
        return [[self.mu0(x, y) for y in range(n)] for x in range(n)]

    def mu1(self, xs, ys) -> int:
        """Hausdorff distance between nonempty vertex sets."""
        xs, ys = list(xs), list(ys)
        if not xs or not ys:
            raise MetricError("Hausdorff distance needs nonempty sets")
        d = self.mu0
        a = max(min(d(x, y) for y in ys) for x in xs)
        b = max(min(d(x, y) for x in xs) for y in ys)
        return max(a, b)

    def mu2(self, family1, family2) -> int:
        """Hausdorff distance between nonempty families of vertex sets."""
        f1, f2 = list(family1), list(family2)
        if not f1 or not f2:
            raise MetricError("Hausdorff distance needs nonempty families")
        d = self.mu1
        a = max(min(d(x, y) for y in f2) for x in f1)
        b = max(min(d(x, y) for x in f1) for y in f2)
        return max(a, b)

    # -- fast distance <= 1 tests on bitmask-encoded sets -------------------

    def neighborhood_masks(self) -> tuple[int, ...]:
        """Closed-neighborhood bitmask per vertex."""
        if "_nbs" not in self.__dict__:
            fan = self.fan
            nbs = [1 << v for v in range(fan.vertex_count)]
            for p, c in fan.edges():
                nbs[p] |= 1 << c
                nbs[c] |= 1 << p
            object.__setattr__(self, "_nbs", tuple(nbs))
        return self.__dict__["_nbs"]

    def _fatten(self, mask: int) -> int:
        nbs = self.neighborhood_masks()
        out = 0
        while mask:
            v = (mask & -mask).bit_length() - 1
            out |= nbs[v]
            mask &= mask - 1
        return out

    def mu1_within_one(self, xmask: int, ymask: int) -> bool:
        """mu1(X, Y) <= 1 as a neighborhood inclusion test."""
        if not xmask or not ymask:
            raise MetricError("Hausdorff distance needs nonempty sets")
        return (xmask | ymask) & ~(self._fatten(xmask) & self._fatten(ymask)) == 0

    def mu2_within_one(self, masks1, masks2) -> bool:
        """mu2 <= 1 for two families of bitmask-encoded sets."""
        m1, m2 = list(masks1), list(masks2)
        if not m1 or not m2:
            raise MetricError("Hausdorff distance needs nonempty families")
        fat1 = [self._fatten(m) for m in m1]
        fat2 = [self._fatten(m) for m in m2]
        for x, fx in zip(m1, fat1):
            if not any(x & ~fy == 0 and y & ~fx == 0 for y, fy in zip(m2, fat2)):
                return False
        for y, fy in zip(m2, fat2):
            if not any(y & ~fx == 0 and x & ~fy == 0 for x, fx in zip(m1, fat1)):
                return False
        return True


def fan_metrics(fan: Fan) -> FanMetric:
    return FanMetric(fan)


def _check_nakr_preconditions(phi: FanEpi, chain_c: ChainedFan,
                              chain_d: ChainedFan) -> None:
    fan_b, fan_a = phi.source, phi.target
    if chain_c.fan != fan_b or chain_d.fan != fan_b:
        raise ChainError("both chains must live on the map's source")
    big_k = fan_a.vertex_count
    for bi, branch in enumerate(fan_b.branches):
        tip = branch[-1]
        fibers = {a: 0 for a in range(big_k)}
        for v in (0,) + branch:  # a branch is a maximal tree chain: root included
            fibers[phi(v)] += 1
        for a, size in fibers.items():
            if phi(tip) == a:
                continue
            if size < 2 * big_k + 1:
                raise NakrPreconditionError(
                    f"fiber of {a} on branch {bi} has {size} < "
                    f"{2 * big_k + 1} elements"
                )
    metric = FanMetric(fan_b)
    if not metric.mu2_within_one(chain_c.mask_sets(), chain_d.mask_sets()):
        raise NakrPreconditionError("chain distance exceeds 1")


@dataclass(frozen=True)
class NakrResult:
    psi: FanEpi
    merged_chain_order: tuple[int, ...]   # image chain on the target, as link growth
    merged_sets: tuple[frozenset[int], ...]

    def to_json(self) -> dict:
        return {"psi": list(self.psi.mapping),
                "merged_order": list(self.merged_chain_order)}


def nakr_merge(phi: FanEpi, chain_c: ChainedFan, chain_d: ChainedFan,
               debug_invariants: bool = False) -> NakrResult:
    """Merge two nearby chains through a fiber-rich epimorphism.

    Produces an epimorphism psi agreeing with phi outside small
    redirections such that both chains have the same image chain, and every
    psi-fiber is contained in the phi-fiber together with the fibers of the
    immediate successors.  Both conclusions are re-verified before
    returning.

    The construction is a link-by-link induction: maintain a downward
    closed target prefix already equalized, locate the least source link
    sticking out of its preimage by a full edge, pair it with a link of the
    other chain at Hausdorff distance at most 1, and redirect the few
    protruding vertices to their deepest already-settled image on their own
    branch.
    """
    _check_nakr_preconditions(phi, chain_c, chain_d)
    fan_b, fan_a = phi.source, phi.target
    big_k = fan_a.vertex_count
    metric = FanMetric(fan_b)

    c_links = chain_c.sets()
    d_links = chain_d.sets()
    c_masks = chain_c.mask_sets()
    d_masks = chain_d.mask_sets()

    psi = list(phi.mapping)
    d_order = [0]        # growth order of the merged target chain
    d_set = {0}

    step = 1
    while len(d_set) < big_k:
        step += 1
        if step > big_k + 1:
            raise NakrPreconditionError("merge did not terminate")  # unreachable
        e_set = {v for v in range(fan_b.vertex_count) if psi[v] in d_set}

        ci = next((i for i, link in enumerate(c_links) if not link <= e_set), None)
        if ci is None:
            raise NakrPreconditionError("no link leaves the settled preimage")
        link_c = c_links[ci]
        # pick the branch where the link protrudes, preferring one protruding
        # by a full edge (the protrusion along a branch is a consecutive
        # segment, so two protruding vertices contain an edge pair)
        protruding = sorted(link_c - e_set)
        by_branch: dict[int, list[int]] = {}
        for v in protruding:
            by_branch.setdefault(fan_b.branch_of[v], []).append(v)
        edge_branches = [bi for bi, vs in sorted(by_branch.items()) if len(vs) >= 2]
        bi = edge_branches[0] if edge_branches else fan_b.branch_of[protruding[0]]
        branch_b = fan_b.branches[bi]
        p = min(by_branch[bi], key=fan_b.depth.__getitem__)

        link_d = None
        for cand, cand_mask in zip(d_links, d_masks):
            if metric.mu1_within_one(c_masks[ci], cand_mask):
                link_d = cand
                break
        if link_d is None:
            raise NakrPreconditionError("no paired link within distance 1")

        if debug_invariants:
            _assert_fiber_slack(fan_b, psi, big_k, step - 1)

        frozen = e_set | set(branch_b) | {0}
        new_psi = list(psi)
        for x in link_c | link_d:
            if x in frozen:
                continue
            branch = fan_b.branches[fan_b.branch_of[x]]
            settled = [v for v in branch if v in e_set]
            z = settled[-1] if settled else 0
            new_psi[x] = psi[z]
        new_value = psi[p]
        psi = new_psi
        if new_value in d_set:
            raise NakrPreconditionError("redirection revisited a settled value")
        d_order.append(new_value)
        d_set.add(new_value)

    result_psi = FanEpi(fan_b, fan_a, tuple(psi), phi.mode)
    merged_sets = []
    cur: set[int] = set()
    for a in d_order:
        cur.add(a)
        merged_sets.append(frozenset(cur))

    _verify_nakr(phi, result_psi, chain_c, chain_d, merged_sets)
    return NakrResult(result_psi, tuple(d_order), tuple(merged_sets))


def _assert_fiber_slack(fan_b: Fan, psi, big_k: int, n: int) -> None:
    """Induction invariant: surviving fibers keep at least 2(K-n+1)+1
    elements on branches where they miss the endpoint."""
    need = 2 * (big_k - n + 1) + 1
    for branch in fan_b.branches:
        tip = branch[-1]
        fibers: dict[int, int] = {}
        for v in (0,) + branch:
            fibers[psi[v]] = fibers.get(psi[v], 0) + 1
        for a, size in fibers.items():
            if psi[tip] != a and size < need:
                raise AssertionError(
                    f"fiber slack violated at step {n}: {size} < {need}"
                )


def image_sets(mapping, links) -> list[frozenset[int]]:
    out = []
    seen = set()
    for link in links:
        img = frozenset(mapping[v] for v in link)
        if img not in seen:
            seen.add(img)
            out.append(img)
    return out


def _verify_nakr(phi: FanEpi, psi: FanEpi, chain_c: ChainedFan,
                 chain_d: ChainedFan, merged_sets) -> None:
    img_c = image_sets(psi.mapping, chain_c.sets())
    img_d = image_sets(psi.mapping, chain_d.sets())
    if img_c != list(merged_sets) or img_d != list(merged_sets):
        raise NakrPreconditionError("merged images disagree with the record")
    fan_a = phi.target
    # the merged image chain must itself be a downward-closed maximal chain
    ChainedFan(fan_a, tuple(next(iter(s - p)) for p, s in
                            zip([frozenset()] + list(merged_sets), merged_sets)))
    succ = {a: set() for a in range(fan_a.vertex_count)}
    for parent, child in fan_a.edges():
        succ[parent].add(child)
    for v in range(phi.source.vertex_count):
        a = psi(v)
        if phi(v) != a and phi(v) not in succ[a]:
            raise NakrPreconditionError(
                f"fiber containment fails at vertex {v}: psi={a}, phi={phi(v)}"
            )
