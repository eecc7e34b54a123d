"""Suite registry and the manifest of check anchors.

Suites run in the fixed order of ``SUITES``; every anchor a suite can emit
is listed in ``ANCHORS`` and owned by exactly one suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .. import catalog
from . import conformal, factorization, pointwise, props, surjectivity
from .records import SuiteResult

DEFAULT_POINTS = 5


@dataclass(frozen=True)
class SuiteSpec:
    name: str
    description: str
    anchors: tuple
    runner: Callable  # runner(entry, points, seed, tol_abs=, tol_rel=) -> SuiteResult

    def run(self, entry, points, seed: int = 0, tol_abs=None, tol_rel=None) -> SuiteResult:
        return self.runner(entry, points, seed, tol_abs=tol_abs, tol_rel=tol_rel)


def _prop_runner(name):
    def run(entry, points, seed, tol_abs=None, tol_rel=None):
        return props.run_proposition(name, entry, points, seed, tol_abs=tol_abs, tol_rel=tol_rel)
    return run


def _anchors(prefix):
    return tuple(a for a in ANCHORS if a.startswith(prefix))


ANCHORS = {
    # factorization of directional derivatives through ∇k
    "factorization/S": "X(∇S)Q = π(∇_X k)·⟨S|k|Q⟩ and ∇_X S_α = 0 above bw s+1",
    "factorization/Rm": "the same factorization for the Riemann tensor",
    "factorization/∇Rm": "the same factorization for ∇Rm",
    "factorization/closed-form-vs-definition": "frame expansion of ⟨T|k|Q⟩ against the φ definition",
    # bracket properties
    "bracket/zero-property": "⟨T|k|Q⟩ = 0 when bo(Q) < -bo(T) - 1",
    "bracket/l-independence": "⟨T|k|Q⟩ does not depend on the choice of l",
    # congruence
    "congruence/kundt-tensor": "k_[a∇_b]k_[c k_d] = 0 exactly when κ = ρ = 0",
    # K_N and the generic type II route
    "k-subspace/kundt-on-K": "(∇_X k)·z = 0 for X in c⊥ and z in K_N",
    "k-subspace/top-dimension": "d_N = n - 2 forces κ = ρ = 0",
    "k-subspace/map-S": "⟨S|k|k m_i⟩_j = λδ_ij - S_ij",
    "k-subspace/ricci-generic-d1": "dim E_λ = 2 and bo(∇S) <= 0 give d_1 = n - 2",
    "k-subspace/ricci-generic-kundt": "dim E_λ = 2 and bo(∇S) <= 0 give κ = ρ = 0",
    "k-subspace/semicontinuity": "d_N at a point is at most d_N at sampled nearby points",
    # propositions on k, S and C
    **{a: "displayed relation of the proposition" for a in props.relation_anchors()},
    # Weyl tensor: surjectivity of the bracket
    "surjectivity/weyl-like": "boost truncations of the Weyl tensor keep the Weyl symmetries",
    "surjectivity/trace-free-frame": "frame expansion of the trace-free property",
    "surjectivity/image-s-2": "⟨W|k|Q_-2⟩ = Ψ_4 π(m)",
    "surjectivity/image-s-1": "⟨W|k|Q_-1⟩ = 2Ψ_3 π(m)",
    "surjectivity/image-s+0": "⟨W|k|Q_0⟩ = 3Ψ_2 π(m)",
    "surjectivity/image-s+1": "⟨W|k|Q_1⟩ = 4Ψ_1 π(m)",
    "surjectivity/closed-form-vs-definition": "complex brackets from the frame expansion against φ",
    "surjectivity/spans-screen": "images and conjugates span c⊥/c",
    # Kundt / Robinson–Trautman criterion for a non-zero Weyl tensor
    "weyl-kundt-char/kundt": "X(∇C)Q = 0 on a Kundt congruence",
    "weyl-kundt-char/robinson-trautman": "X(∇C)Q = α π(X)·⟨C|k|Q⟩ on a Robinson–Trautman congruence",
    "weyl-kundt-char/iff": "X(∇C)Q vanishes exactly when k is Kundt",
    # conformally flat metrics with bo(S) = 0
    "cf/bianchi": "∇_[a S_b]c + (1/12)∇_[a R g_b]c = 0",
    "cf/gauge": "null rotation z = S_12/(S_01 - S_22) sets S_12 = 0",
    "cf/d3": "d_3 = 1",
    **{i.anchor: "bracket identity for ∇S" for i in conformal.DS_IDENTITIES},
    **{i.anchor: "bracket identity for ∇∇S and its product form" for i in conformal.DDS_IDENTITIES},
    "cf/dS-combined": "∇_3S_33 = ∇_1S_03 = ∇_0S_13 = ∇_3S_01 = 0",
    "cf/S13-relation": "∇_X S_33 - ∇_X S_01 = 3 S_13 (∇_X k)_3",
    "cf/S11-relation": "∇_X S_13 = S_11 (∇_X k)_3",
    "cf/uniform-type-d": "{S, ∇S} special along k and a second null line",
    "cf/kundt-conclusion": "not uniformly of type D forces κ = ρ = 0",
    "cf/m2-components": "∇S components in terms of ∇m_2",
    "cf/m2-relations": "∇_2(m_2)_3 = 0, ∇_1(m_2)_0 = ∇_0(m_2)_1 = ∇_3(m_2)_3",
    "cf/m2-type-d-components": "remaining ∇S components on the type D branch",
    "cf/m2-theta-h": "∇m_2 = θh",
    "cf/theta-gradient": "∇θ ∝ m_2",
    "cf/ricci-identity-m2": "Ric(m_2, ·) = h∇θ - 3θ²m_2 - 3∇θ",
    "cf/einstein-bracket": "⟨Rm|k|k l k m_3⟩_3 = 0",
    "cf/einstein-endpoint": "R̂_01 = R̂_33 on the integral surfaces",
    # the unit field of a tachyonic S
    "td/u-form": "S = λ(uu - h/3) with u unit spacelike",
    "td/u-structure": "∇_b u_a = u̇_a u_b + θh_ab",
    "td/lambda-gradient": "h∇λ = λu̇ = h∇R/4",
    "td/case": "u̇ spacelike, null or zero, with the matching d_N",
}


SUITES = (
    SuiteSpec("factorization", "factorization of ∇T through ∇k for S, Rm and ∇Rm",
              _anchors("factorization/"), factorization.suite_factorization),
    SuiteSpec("brackets", "zero property and l-independence of the bracket on curvature tensors",
              _anchors("bracket/"), pointwise.suite_brackets),
    SuiteSpec("congruence", "Kundt tensor against the optical matrices",
              _anchors("congruence/"), pointwise.suite_congruence),
    SuiteSpec("k_subspace", "K_N, its top dimension and the generic type II route",
              _anchors("k-subspace/"), pointwise.suite_k_subspace),
    *(SuiteSpec(f"prop:{name}", prop.description, _anchors(f"{name}/"), _prop_runner(name))
      for name, prop in props.PROPOSITIONS.items()),
    SuiteSpec("surjectivity", "⟨W|k|Q_s⟩ = (s+3)Ψ_{2-s}π(m) in dimension 4",
              _anchors("surjectivity/"), surjectivity.suite_surjectivity),
    SuiteSpec("weyl_kundt_char", "Kundt and Robinson–Trautman criterion through X(∇C)Q",
              _anchors("weyl-kundt-char/"), pointwise.suite_weyl_kundt_char),
    SuiteSpec("conformally_flat", "identity chain for conformally flat metrics with bo(S) = 0",
              _anchors("cf/"), conformal.suite_conformally_flat),
    SuiteSpec("type_d_structure", "unit field of S = λ(uu - h/3) and the structure of ∇u",
              _anchors("td/"), conformal.suite_type_d_structure),
)

_BY_NAME = {s.name: s for s in SUITES}


class UnknownSuite(KeyError):
    pass


def suite_names() -> list:
    return [s.name for s in SUITES]


def get_suite(name: str) -> SuiteSpec:
    if name in _BY_NAME:
        return _BY_NAME[name]
    if f"prop:{name}" in _BY_NAME:
        return _BY_NAME[f"prop:{name}"]
    raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(suite_names())}")


def run_suite(name: str, entry, points=None, seed: int = 0, count: int = DEFAULT_POINTS,
              tol_abs=None, tol_rel=None) -> SuiteResult:
    spec = get_suite(name)
    if points is None:
        points = entry.sample_points(count, seed)
    try:
        return spec.run(entry, points, seed, tol_abs=tol_abs, tol_rel=tol_rel)
    except Exception as exc:  # a suite that crashes is reported, not raised
        res = SuiteResult(spec.name, entry.name, seed, [list(map(float, p)) for p in points])
        res.error = f"{type(exc).__name__}: {exc}"
        return res


def run_all(entries=None, suites=None, points=None, seed: int = 0, count: int = DEFAULT_POINTS,
            tol_abs=None, tol_rel=None) -> list:
    """Every requested suite on every entry, in fixed (suite, entry name) order."""
    if entries is None:
        entries = [catalog.get(n) for n in catalog.names()]
    names = suite_names() if suites is None else [get_suite(s).name for s in suites]
    out = []
    for name in names:
        for entry in sorted(entries, key=lambda e: e.name):
            out.append(run_suite(name, entry, points, seed, count, tol_abs, tol_rel))
    return out
