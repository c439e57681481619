"""Suite dispatch and report output."""

from __future__ import annotations

from pathlib import Path

from idfi.errors import ValidationError
from idfi.verifier.config import SuiteConfig
from idfi.verifier.report import VerificationReport
from idfi.verifier.suites import SUITES

# Declared execution order; reports always assemble in this order.
SUITE_NAMES = (
    "part1",
    "tensorization",
    "riccati_core",
    "flat_local_lsi",
    "spaceform_lsi",
    "hamilton",
    "nge_curved",
    "stochastic_validation",
)


def run_suite(name: str, config: SuiteConfig | None = None) -> VerificationReport:
    if name not in SUITES:
        raise ValidationError(
            f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    cfg = config if config is not None else SuiteConfig()
    return SUITES[name](cfg)


def run_all(config: SuiteConfig | None = None) -> list[VerificationReport]:
    cfg = config if config is not None else SuiteConfig()
    if cfg.suite != "all":
        return [run_suite(cfg.suite, cfg)]
    return [run_suite(name, cfg) for name in SUITE_NAMES]


def write_outputs(report: VerificationReport, out_dir: str | Path) -> list[Path]:
    """Write the JSON report, the per-case CSV, and any artifacts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = out / f"{report.suite}.json"
    json_path.write_text(report.to_json())
    written.append(json_path)
    csv_path = out / f"{report.suite}_records.csv"
    csv_path.write_text(report.records_csv())
    written.append(csv_path)
    for name, text in sorted(report.artifacts.items()):
        path = out / name
        path.write_text(text)
        written.append(path)
    return written
