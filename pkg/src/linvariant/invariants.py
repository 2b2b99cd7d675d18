"""Dimension identities of C_cris / C_st and round-trip checks on random inputs."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .filtered_phin import FilteredPhiNModule, twisted_dual
from .padic_linalg import kernel
from .random_modules import random_module, random_ses, random_stclass
from .st_cohomology import extension_class_st, extension_from_class, h_cris, h_st, les_st


def cohomology_identities(M: FilteredPhiNModule) -> dict[str, tuple[bool, str]]:
    """The three dimension identities linking C_cris, C_st and the tangent space."""
    t = M.t_dim
    hc = h_cris(M).dims
    hs = h_st(M).dims
    Md = twisted_dual(M)
    inv = Md.eigenspace(1).intersect(kernel(Md.N)).dim
    return {
        "h1_cris": (hc[1] - hc[0] == t, f"h1_cris - h0 = {hc[1] - hc[0]}, dim t = {t}"),
        "h1_st": (hs[1] - hc[1] == inv, f"h1_st - h1_cris = {hs[1] - hc[1]}, dim dual^(phi=1,N=0) = {inv}"),
        "euler_st": (hs[0] - hs[1] + hs[2] == -t, f"chi(C_st) = {hs[0] - hs[1] + hs[2]}, -dim t = {-t}"),
    }


@dataclass
class SuiteReport:
    p: int
    seed: int
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self):
        return {"p": self.p, "seed": self.seed, "ok": self.ok, "counts": dict(self.counts),
                "failures": list(self.failures)}


def cohomology_suite(p: int = 3, n_modules: int = 30, n_classes: int = 20, n_sequences: int = 10,
                     seed: int = 0) -> SuiteReport:
    """Deterministic for fixed arguments."""
    rng = random.Random(seed)
    rep = SuiteReport(p, seed)
    for i in range(n_modules):
        M = random_module(rng, p)
        for name, (ok, detail) in cohomology_identities(M).items():
            rep.counts[name] = rep.counts.get(name, 0) + 1
            if not ok:
                rep.failures.append({"check": name, "sample": i, "detail": detail})
    for i in range(n_classes):
        A = random_module(rng, p, max_dim=3)
        c = random_stclass(rng, A)
        back = extension_class_st(extension_from_class(A, c))
        rep.counts["extension_round_trip"] = rep.counts.get("extension_round_trip", 0) + 1
        if back != c:
            rep.failures.append({"check": "extension_round_trip", "sample": i, "detail": repr(c)})
    for i in range(n_sequences):
        les = les_st(random_ses(rng, p, max_dim=3))
        rep.counts["long_exact_sequence"] = rep.counts.get("long_exact_sequence", 0) + 1
        if not les.exact or les.alternating_sum != 0:
            rep.failures.append({"check": "long_exact_sequence", "sample": i,
                                 "detail": f"dims {les.spaces}"})
    return rep
