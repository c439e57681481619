"""HTTP service exposing the verification suites.

The CLI drives this app in-process; it can also be served standalone
(e.g. ``uvicorn idfi.service:app``).  Configs are validated strictly:
unknown keys are rejected at the boundary.
"""

from __future__ import annotations

from fastapi import FastAPI
from pydantic import BaseModel

import idfi
from idfi.verifier import (
    SUITE_NAMES,
    SuiteConfig,
    default_config,
    run_all,
    schema_dict,
    write_outputs,
)

app = FastAPI(title="idfi verification service", version=idfi.__version__)


class SuiteListing(BaseModel):
    suites: list[str]


class VerifyResponse(BaseModel):
    exit_code: int
    reports: list[dict]
    written: list[str]


@app.get("/suites", response_model=SuiteListing)
def list_suites() -> SuiteListing:
    return SuiteListing(suites=list(SUITE_NAMES))


@app.get("/defaults")
def defaults() -> dict:
    return default_config().model_dump(mode="json")


@app.get("/schema")
def config_schema() -> dict:
    return schema_dict()


@app.post("/verify", response_model=VerifyResponse)
def verify(config: SuiteConfig) -> VerifyResponse:
    reports = run_all(config)
    written = []
    if config.out_dir is not None:
        for report in reports:
            written.extend(str(p) for p in write_outputs(report, config.out_dir))
    exit_code = max((r.exit_code for r in reports), default=0)
    return VerifyResponse(exit_code=exit_code,
                          reports=[r.to_dict() for r in reports],
                          written=written)
