"""Registry of statement labels cited by verification records.

Every record names the certified statement it checks; the registry maps
each label to the subsystem that implements it, so reports stay
traceable without free-form strings.
"""

from __future__ import annotations

from idfi.errors import ValidationError

# label -> implementing subsystem
ANCHORS: dict[str, str] = {
    # Euclidean entropy and Fisher-matrix inequalities
    "eq:lsi-gross": "euclidean_improvers",
    "eq:lsi": "euclidean_improvers",
    "eq:lsi-diag": "euclidean_improvers",
    "eq:lsi_dim": "euclidean_improvers",
    "eq:lsi**": "euclidean_improvers",
    "thm:homogeneous": "euclidean_improvers",
    "thm:cramer-rao": "euclidean_improvers",
    "eq:efroi": "euclidean_improvers",
    "thm:gns": "euclidean_improvers",
    "eq:gns*": "euclidean_improvers",
    "thm:beckner_sec": "euclidean_improvers",
    "lem:beckner": "euclidean_improvers",
    "eq:dt": "euclidean_improvers",
    "eq:dt*": "euclidean_improvers",
    "eq:qlsi''": "euclidean_improvers",
    "eq:qlsi'''": "euclidean_improvers",
    "thm:mT": "euclidean_improvers",
    "eq:mT-diag": "euclidean_improvers",
    "lem:mT": "euclidean_improvers",
    # product-space tensorization
    "thm:tensor": "tensorization",
    "thm:tensor-intro": "tensorization",
    "eq:into_PS": "tensorization",
    # stochastic machinery on constant-curvature spaces
    "eq:def-follmer": "space_forms",
    "thm:Lehec": "space_forms",
    "eq:lehec-formula": "space_forms",
    "thm:wang": "space_forms",
    "eq:wang": "space_forms",
    # matrix comparison principles
    "eq:Qdef": "riccati",
    "lem:v(t)ODE": "riccati",
    "eq:from-v-to-m": "riccati",
    "eq:J_T": "riccati",
    "prop:matrix-ineq": "riccati",
    "thm:manifolds_opt": "riccati",
    "lem:bernoulli": "riccati",
    "thm:manifolds_sec": "riccati",
    "eq:trace_term": "riccati",
    "lem:m(t)ODI": "riccati",
    "lem:W(t)": "riccati",
    "eq:xi": "riccati",
    "eq:c": "riccati",
    "thm:Hamilton": "riccati",
    "lem:mteqivvt": "riccati",
    "thm:nge_curved": "riccati",
    # local entropy bounds assembled by the verifier
    "thm:flat": "verifier",
    "eq:local_lsi_dim": "verifier",
    "eq:local_lsi_dim_reverse": "verifier",
    "eq:intrinisc_lsi_dim": "verifier",
    "eq:intrinisc_lsi_dim_reverse": "verifier",
    "eq:Li-Yau": "verifier",
    "eq:Hamilton": "verifier",
}


def check_anchor(label: str) -> str:
    """Return the label if registered, raise otherwise."""
    if label not in ANCHORS:
        raise ValidationError(f"unregistered statement label {label!r}")
    return label
