"""Command line front end; a thin client over the in-process service."""

from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx
from click.core import ParameterSource

from idfi.errors import ValidationError
from idfi.service import app
from idfi.verifier import SUITE_NAMES, VerificationReport, load_config


def _call(method: str, path: str, payload: dict | None = None) -> httpx.Response:
    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://idfi",
                                     timeout=None) as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


@click.group()
def main():
    """Certify intrinsic-dimensional functional inequalities."""


@main.command("list-suites")
def list_suites():
    """Print the available suite names in execution order."""
    resp = _call("GET", "/suites")
    for name in resp.json()["suites"]:
        click.echo(name)


@main.command("dump-defaults")
def dump_defaults():
    """Print the default configuration as JSON."""
    resp = _call("GET", "/defaults")
    click.echo(json.dumps(resp.json(), indent=2))


@main.command("verify")
@click.argument("suite", type=click.Choice(SUITE_NAMES + ("all",)), default="all")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file; flags below override it.")
@click.option("--seed", type=int, default=None, help="Base RNG seed.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Write JSON reports, record CSVs and artifacts here.")
@click.option("--jobs", type=int, default=None,
              help="Worker threads per suite; results do not depend on it.")
@click.option("--tolerance-scale", type=float, default=None,
              help="Multiplier on every deterministic check tolerance.")
@click.pass_context
def verify(ctx, suite, config_path, seed, out_dir, jobs, tolerance_scale):
    """Run SUITE (or all suites) and report pass/fail per check."""
    try:
        cfg = load_config(config_path) if config_path else None
    except ValidationError as exc:
        raise click.ClickException(str(exc))
    overrides = {"suite": suite}
    if cfg is not None and ctx.get_parameter_source("suite") is ParameterSource.DEFAULT:
        del overrides["suite"]
    if seed is not None:
        overrides["seed"] = seed
    if out_dir is not None:
        overrides["out_dir"] = out_dir
    if jobs is not None:
        overrides["jobs"] = jobs
    if tolerance_scale is not None:
        overrides["tolerance_scale"] = tolerance_scale
    payload = (cfg.model_dump(mode="json") if cfg else {}) | overrides
    resp = _call("POST", "/verify", payload)
    if resp.status_code != 200:
        raise click.ClickException(f"config rejected: {resp.text}")
    body = resp.json()
    reports = [VerificationReport.from_dict(d) for d in body["reports"]]
    for report in reports:
        click.echo(report.table())
        click.echo()
    if body["written"]:
        click.echo(f"wrote {len(body['written'])} files")
        for path in body["written"]:
            click.echo(f"  {path}")
    sys.exit(body["exit_code"])


if __name__ == "__main__":
    main()
