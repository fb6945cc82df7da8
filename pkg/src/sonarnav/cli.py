"""Command-line client for the simulator service layer.

Subcommands call the same handlers the HTTP routes use; pass --server to
send the request to a running service instead and write the returned
artifacts locally. Exit codes are a stable contract: 0 success, 1 usage or
validation error, 2 navigation failure (artifacts still written).
"""

from __future__ import annotations

import base64
import sys
from pathlib import Path

import click
import requests

from .motion_filter import parse_echo_stream
from .service import handlers
from .service.schemas import (FilterRequest, MapConvertRequest,
                              SimulateRequest, SimulateResponse,
                              ValidateRequest)

OUTPUT_DIR_ENV = "SONARNAV_OUTPUT_DIR"

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NAV_FAILURE = 2


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INPUT_ERROR)


def _post(server: str, route: str, payload: dict) -> dict:
    resp = requests.post(server.rstrip("/") + route, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        _fail(f"server returned {resp.status_code}: {detail}")
    return resp.json()


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        _fail(str(e))


@click.group()
def main():
    """Ultrasonic-ranging navigation simulator."""


@main.command("run")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=False), help="Scenario TOML file.")
@click.option("--out", "output_dir", envvar=OUTPUT_DIR_ENV, default="out",
              show_default=True, help=f"Output directory (${OUTPUT_DIR_ENV}).")
@click.option("--seed", type=int, default=None,
              help="Override the scenario's sim.seed.")
@click.option("--map-format", type=click.Choice(["csv", "pgm", "both"]),
              default="both", show_default=True)
@click.option("--server", default=None, help="Run on a remote service URL.")
def run_cmd(scenario_path, output_dir, seed, map_format, server):
    """Simulate a scenario and write maps and the trajectory."""
    req = SimulateRequest(scenario=_read_text(scenario_path), seed=seed,
                          map_format=map_format, include_artifacts=True)
    if server:
        resp = SimulateResponse(**_post(server, "/simulate",
                                        req.model_dump()))
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for art in resp.artifacts:
            if art.data is None:
                continue
            if art.encoding == "base64":
                (out / art.name).write_bytes(base64.b64decode(art.data))
            else:
                (out / art.name).write_text(art.data, encoding="ascii")
    else:
        try:
            resp = handlers.simulate(req, output_dir=output_dir)
        except ValueError as e:
            _fail(str(e))
    if resp.reached_goal:
        click.echo(f"reached goal in {resp.steps} steps")
        sys.exit(EXIT_OK)
    click.echo(f"navigation failed after {resp.steps} steps: "
               f"{resp.failure_reason}", err=True)
    sys.exit(EXIT_NAV_FAILURE)


@main.command("filter")
@click.option("--in", "in_path", required=True, help="Echo stream file.")
@click.option("--out", "out_path", required=True, help="Classification file.")
@click.option("--g", type=float, default=0.9, show_default=True,
              help="Low-pass filter coefficient.")
@click.option("--dt-hysteresis", type=float, default=0.01, show_default=True)
@click.option("--max-time", type=float, default=0.05, show_default=True)
@click.option("--miss-reset-count", type=int, default=10, show_default=True)
@click.option("--server", default=None)
def filter_cmd(in_path, out_path, g, dt_hysteresis, max_time,
               miss_reset_count, server):
    """Classify an echo-delay stream (one line per ping, seconds or '-')."""
    try:
        echoes = parse_echo_stream(_read_text(in_path))
    except ValueError as e:
        _fail(str(e))
    req = FilterRequest(echoes=echoes, g=g, dt_hysteresis=dt_hysteresis,
                        max_time=max_time, miss_reset_count=miss_reset_count)
    if server:
        classifications = _post(server, "/filter",
                                req.model_dump())["classifications"]
    else:
        try:
            classifications = handlers.run_filter(req).classifications
        except ValueError as e:
            _fail(str(e))
    Path(out_path).write_text("\n".join(classifications) + "\n",
                              encoding="ascii")
    sys.exit(EXIT_OK)


@main.command("mapconv")
@click.argument("src")
@click.argument("dst")
@click.option("--server", default=None)
def mapconv_cmd(src, dst, server):
    """Convert a map file between .csv and .pgm (formats from extensions)."""
    fmts = {}
    for name, p in (("input", src), ("output", dst)):
        suffix = Path(p).suffix
        if suffix not in (".csv", ".pgm"):
            _fail(f"{name} path must end in .csv or .pgm, got {p!r}")
        fmts[name] = suffix[1:]
    try:
        raw = Path(src).read_bytes()
    except OSError as e:
        _fail(str(e))
    if fmts["input"] == "pgm":
        req = MapConvertRequest(data=base64.b64encode(raw).decode("ascii"),
                                encoding="base64", from_format="pgm",
                                to_format=fmts["output"])
    else:
        req = MapConvertRequest(data=raw.decode("ascii"), encoding="text",
                                from_format="csv", to_format=fmts["output"])
    if server:
        out = _post(server, "/mapconv", req.model_dump())
    else:
        try:
            out = handlers.convert_map(req).model_dump()
        except ValueError as e:
            _fail(str(e))
    if out["encoding"] == "base64":
        Path(dst).write_bytes(base64.b64decode(out["data"]))
    else:
        Path(dst).write_text(out["data"], encoding="ascii")
    sys.exit(EXIT_OK)


@main.command("validate")
@click.option("--scenario", "scenario_path", required=True,
              help="Scenario TOML file.")
@click.option("--server", default=None)
def validate_cmd(scenario_path, server):
    """Check a scenario file and print its normalized form."""
    req = ValidateRequest(scenario=_read_text(scenario_path))
    if server:
        out = _post(server, "/validate", req.model_dump())
    else:
        out = handlers.validate_scenario(req).model_dump()
    if not out["valid"]:
        _fail(out["error"])
    click.echo(out["normalized"], nl=False)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
