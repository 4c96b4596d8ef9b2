"""Serializable search certificates and their cheap re-verification.

A certificate records what was searched, what was found, and under which
budget.  ``verify`` re-checks the stored witness with the inexpensive
predicates only: it never repeats a search, so a positive verdict is
re-checkable long after the search budget is gone.  Exact-threshold
certificates carry the counterexample colorings for the ground sizes below
the threshold; those are what get re-verified (the exhaustive half is
attested by the recorded budget, not re-run).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__
from .chains import ChainedFan, ChainEpi, is_chain_epimorphism
from .fans import Fan, FanEpi
from .fink import BlockSeq, FinVec, generated_semigroup
from .metrics import image_sets
from .ramsey import (
    Coloring,
    OrderedPartition,
    coarsenings_of_size,
    is_size_determined,
    partitions,
    phi_encode,
    star_tuples,
)


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class Certificate:
    kind: str
    params: dict
    witness: dict
    verified: bool
    budget: dict = field(default_factory=dict)
    seed: int | None = None
    tool_version: str = __version__

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "witness": self.witness,
            "verified": self.verified,
            "budget": self.budget,
            "seed": self.seed,
            "tool_version": self.tool_version,
        }

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path) -> "Certificate":
        with open(path) as fh:
            obj = json.load(fh)
        return Certificate(
            kind=obj["kind"],
            params=obj["params"],
            witness=obj["witness"],
            verified=obj["verified"],
            budget=obj.get("budget", {}),
            seed=obj.get("seed"),
            tool_version=obj.get("tool_version", "unknown"),
        )


def _chained(obj) -> ChainedFan:
    return ChainedFan.from_json(obj)


def _partition_bad_for_gr(n, k, l, colors) -> bool:
    """The stored coloring admits no fine partition with monochromatic
    coarsenings: the defining predicate, checked directly."""
    fine = partitions(n, k)
    if len(colors) != len(fine):
        raise CertificateError("coloring length disagrees with the domain")
    index = {p.key(): i for i, p in enumerate(fine)}
    for p in partitions(n, l):
        cols = {colors[index[c.key()]] for c in coarsenings_of_size(p, k)}
        if len(cols) == 1:
            return False
    return True


def _verify_gr(cert: Certificate) -> bool:
    p = cert.params
    for n_str, colors in cert.witness.get("counterexamples", {}).items():
        if not _partition_bad_for_gr(int(n_str), p["k"], p["l"], colors):
            return False
    return True


def _verify_lelek_search(cert: Certificate) -> bool:
    from .ramsey import enumerate_fink_star

    p = cert.params
    for n_str, colors in cert.witness.get("counterexamples", {}).items():
        n = int(n_str)
        domain = enumerate_fink_star(p["k"], p["d"], n)
        if len(colors) != len(domain):
            return False
        coloring = Coloring(tuple(s.vectors() for s in domain),
                            tuple(colors), p["r"])
        for base in enumerate_fink_star(p["l"], p["m"], n):
            members = generated_semigroup(base, p["k"], p["d"])
            if len({coloring(s.vectors()) for s in members}) == 1:
                return False
    return True


def _verify_lelek_witness(cert: Certificate) -> bool:
    p = cert.params
    base = BlockSeq.from_json(cert.witness["base"])
    colors = cert.witness["coloring"]
    from .ramsey import enumerate_fink_star

    domain = enumerate_fink_star(p["k"], p["d"], p["n"])
    coloring = Coloring(tuple(s.vectors() for s in domain),
                        tuple(colors), p["r"])
    members = generated_semigroup(base, p["k"], p["d"])
    got = {coloring(s.vectors()) for s in members}
    return got == {cert.witness["color"]}


def _verify_amalgam(cert: Certificate) -> bool:
    w = cert.witness
    f_src = _chained(w["f_source"])
    g_src = _chained(w["g_source"])
    target = _chained(w["target"])
    amalgam = _chained(w["amalgam"])
    mode = w.get("mode", "symmetrized")
    f = FanEpi(f_src.fan, target.fan, tuple(w["f_map"]), mode)
    g = FanEpi(g_src.fan, target.fan, tuple(w["g_map"]), mode)
    k = FanEpi(amalgam.fan, f_src.fan, tuple(w["k_map"]), mode)
    l = FanEpi(amalgam.fan, g_src.fan, tuple(w["l_map"]), mode)
    if not is_chain_epimorphism(f, f_src, target):
        return False
    if not is_chain_epimorphism(g, g_src, target):
        return False
    if not is_chain_epimorphism(k, amalgam, f_src):
        return False
    if not is_chain_epimorphism(l, amalgam, g_src):
        return False
    return all(f(k(v)) == g(l(v)) for v in range(amalgam.fan.vertex_count))


def _verify_nakr(cert: Certificate) -> bool:
    w = cert.witness
    chain_c = _chained(w["chain_c"])
    chain_d = _chained(w["chain_d"])
    fan_b = chain_c.fan
    fan_a = Fan.from_json(w["target"])
    mode = w.get("mode", "symmetrized")
    phi = FanEpi(fan_b, fan_a, tuple(w["phi"]), mode)
    psi = FanEpi(fan_b, fan_a, tuple(w["psi"]), mode)
    img_c = image_sets(psi.mapping, chain_c.sets())
    img_d = image_sets(psi.mapping, chain_d.sets())
    if img_c != img_d:
        return False
    succ = {a: set() for a in range(fan_a.vertex_count)}
    for parent, child in fan_a.edges():
        succ[parent].add(child)
    return all(
        phi(v) == psi(v) or phi(v) in succ[psi(v)]
        for v in range(fan_b.vertex_count)
    )


def _verify_fan_ramsey(cert: Certificate) -> bool:
    from .fanramsey import RamseyInstance, cc_fan, hom_set

    p = cert.params
    inst = RamseyInstance(cc_fan(p["d"], p["k"]), cc_fan(p["m"], p["l"]),
                          cc_fan(p["n"], p["N"]), p["r"])
    homs = hom_set(inst.large, inst.small)
    coloring = dict(zip((tuple(m) for m in cert.witness["hom_maps"]),
                        cert.witness["coloring"]))
    if cert.witness.get("g") is None:
        # refutation certificate: no medium hom is monochromatic
        for g in hom_set(inst.large, inst.medium):
            cols = {coloring[h.compose(g).mapping]
                    for h in hom_set(inst.medium, inst.small)}
            if len(cols) == 1:
                return False
        return True
    g = ChainEpi(FanEpi(inst.large.fan, inst.medium.fan,
                        tuple(cert.witness["g"]), "directed"),
                 inst.large, inst.medium)
    cols = {coloring[h.compose(g).mapping]
            for h in hom_set(inst.medium, inst.small)}
    return len(cols) == 1


def _verify_sized(cert: Certificate) -> bool:
    p = cert.params
    domain = tuple(star_tuples(p["ground"], p["size_caps"], p["d"]))
    coloring = Coloring(domain, tuple(cert.witness["coloring"]), p["r"])
    bases = [frozenset(b) for b in cert.witness["base_sets"]]
    ok, _ = is_size_determined(coloring, bases)
    return ok


def _verify_chain_count(cert: Certificate) -> bool:
    from math import factorial

    lengths = cert.params["branches"]
    count = factorial(sum(lengths))
    for length in lengths:
        count //= factorial(length)
    return count == cert.witness["count"]


_VERIFIERS = {
    "gr": _verify_gr,
    "lelek-search": _verify_lelek_search,
    "lelek-witness": _verify_lelek_witness,
    "amalgam": _verify_amalgam,
    "nakr": _verify_nakr,
    "fan-ramsey": _verify_fan_ramsey,
    "sized": _verify_sized,
    "chain-count": _verify_chain_count,
}


def verify_certificate(cert: Certificate) -> bool:
    """Re-check a certificate's stored witness with cheap predicates."""
    try:
        checker = _VERIFIERS[cert.kind]
    except KeyError:
        raise CertificateError(f"unknown certificate kind {cert.kind!r}")
    return checker(cert)
