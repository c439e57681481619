"""Config-driven verification suites over the certification modules.

Each suite bundles related inequality checks into one machine-readable
report; the service and CLI layers expose them unchanged.
"""

from idfi.verifier.anchors import ANCHORS, check_anchor
from idfi.verifier.config import (
    FlatCaseSpec,
    RadialCaseSpec,
    SpaceSpec,
    SuiteConfig,
    default_config,
    load_config,
    schema_dict,
)
from idfi.verifier.report import (
    CheckRecord,
    VerificationReport,
    canonical_bytes,
    eq_record,
    le_record,
)
from idfi.verifier.runner import SUITE_NAMES, run_all, run_suite, write_outputs

__all__ = [
    "ANCHORS",
    "CheckRecord",
    "FlatCaseSpec",
    "RadialCaseSpec",
    "SpaceSpec",
    "SuiteConfig",
    "SUITE_NAMES",
    "VerificationReport",
    "canonical_bytes",
    "check_anchor",
    "default_config",
    "eq_record",
    "le_record",
    "load_config",
    "run_all",
    "run_suite",
    "schema_dict",
    "write_outputs",
]
