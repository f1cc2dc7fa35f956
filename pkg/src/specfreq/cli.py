"""Command-line front end; a thin client of the HTTP service.

By default commands run against an in-process instance of the service, so
no server needs to be running; ``--server URL`` points them at a remote
deployment instead.  Frequencies on the command line are decimal multiples
of pi ("0.5pi" or plain "0.5" both mean pi/2); the client converts them to
radians before calling the service.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
Numeric cells in CSV output and numbers in JSON reports are written with
17 significant digits, so re-parsing reproduces the binary values exactly.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import httpx

DEFAULT_BASE_URL = "http://specfreq.internal"


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # no server given: drive an in-process instance of the service through
    # its ASGI interface (synchronous portal courtesy of starlette)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app

    return TestClient(app, base_url=DEFAULT_BASE_URL)


def call(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach service: {exc}", err=True)
        sys.exit(1)
    if response.status_code in (400, 422):
        detail = response.json().get("detail", response.text)
        click.echo(f"error: {detail}", err=True)
        sys.exit(2)
    if response.status_code != 200:
        click.echo(f"error: service returned {response.status_code}: {response.text}", err=True)
        sys.exit(1)
    return response.json()


def fmt(x) -> str:
    """17-significant-digit cell formatting; non-floats pass through."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def to_json(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(f"{inner}{json.dumps(k)}: {to_json(v, indent + 1)}" for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = ",\n".join(f"{inner}{to_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else json.dumps(obj)
    return json.dumps(obj)


def write_csv(path: str | None, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def write_text(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        click.echo(text)


def parse_freq_token(token: str) -> float:
    token = token.strip().lower()
    body = token[:-2] if token.endswith("pi") else token
    try:
        multiple = float(body) if body not in ("", "+", "-") else float(body + "1")
    except ValueError:
        raise click.UsageError(f"bad frequency token {token!r}; use multiples of pi like '0.5pi'")
    return multiple * math.pi


def parse_freqs(spec: str) -> dict:
    spec = spec.strip()
    if spec in ("quarterly", "monthly"):
        return {"preset": spec}
    if ".." in spec:
        body, _, grid = spec.partition("@")
        lo_tok, sep, hi_tok = body.partition("..")
        if not sep:
            raise click.UsageError(f"bad interval spec {spec!r}; use 'lo..hi[@points]'")
        out: dict = {"interval": (parse_freq_token(lo_tok), parse_freq_token(hi_tok))}
        if grid:
            try:
                out["grid_points"] = int(grid)
            except ValueError:
                raise click.UsageError(f"bad grid size {grid!r}")
        return out
    return {"values": [parse_freq_token(tok) for tok in spec.split(",") if tok.strip()]}


def parse_pairs(spec: str) -> dict:
    spec = spec.strip()
    if spec == "all":
        return {"mode": "all"}
    if spec == "diagonal":
        return {"mode": "diagonal"}
    if spec == "blocks" or spec.startswith("blocks:"):
        out: dict = {"mode": "blocks"}
        if ":" in spec:
            out["separator"] = spec.split(":", 1)[1]
        return out
    pairs = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        i, sep, j = token.partition(":")
        if not sep:
            raise click.UsageError(f"bad pair token {token!r}; use 'i:j'")
        try:
            pairs.append((int(i), int(j)))
        except ValueError:
            raise click.UsageError(f"bad pair token {token!r}; indices must be integers")
    if not pairs:
        raise click.UsageError(f"empty pair specification {spec!r}")
    return {"mode": "explicit", "pairs": pairs}


def panel_payload(input_path: str, header: bool | None) -> dict:
    payload: dict = {"csv": Path(input_path).read_text(encoding="utf-8")}
    if header is not None:
        payload["has_header"] = header
    return payload


def difference_payload(kind: str | None, period: int) -> dict | None:
    if kind is None:
        return None
    return {"kind": kind, "period": period}


input_option = click.option(
    "--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False),
    help="CSV file: one column per series, rows in time order.",
)
header_option = click.option(
    "--header/--no-header", "header", default=None,
    help="Whether the first CSV row holds labels (default: sniff).",
)
difference_options = [
    click.option("--difference", "diff_kind", type=click.Choice(["regular", "seasonal"]), default=None,
                 help="Difference the panel before analysis."),
    click.option("--period", default=4, show_default=True, help="Seasonal differencing lag."),
]
freq_option = click.option(
    "--freqs", default="quarterly", show_default=True,
    help="Frequencies as multiples of pi ('0,0.5pi'), an interval 'lo..hi[@points]', or a preset (quarterly, monthly).",
)
pairs_option = click.option(
    "--pairs", default="all", show_default=True,
    help="Pair selection: all, diagonal, explicit 'i:j,k:l', or 'blocks[:separator]' to group by label prefix.",
)


def add_options(options):
    def wrap(f):
        for option in reversed(options):
            f = option(f)
        return f

    return wrap


tuning_options = [
    click.option("--alpha", default=0.05, show_default=True, help="Nominal level."),
    click.option("--B", "draws", default=1000, show_default=True, help="Bootstrap replicates."),
    click.option("--seed", default=0, show_default=True, help="Root RNG seed."),
    click.option("--l-n", "l_n", default=None, type=int, help="Lag-window bandwidth override."),
    click.option("--c", default=0.5, show_default=True, help="Flat-top plateau parameter."),
    click.option("--b-n", "b_n", default=None, type=float, help="Long-run covariance bandwidth override."),
]


@click.group()
@click.option("--server", default=None, help="Service URL; default runs the service in-process.")
@click.pass_context
def main(ctx, server):
    """Frequency-domain inference for high-dimensional time series panels."""
    ctx.obj = server


@main.command()
@input_option
@header_option
@add_options(difference_options)
@freq_option
@click.option("--l-n", "l_n", default=None, type=int, help="Lag-window bandwidth override.")
@click.option("--c", default=0.5, show_default=True, help="Flat-top plateau parameter.")
@click.option("--output", default=None, type=click.Path(dir_okay=False), help="Output CSV (default stdout).")
@click.pass_obj
def estimate(server, input_path, header, diff_kind, period, freqs, l_n, c, output):
    """Estimate the cross-spectral density and emit (omega, i, j, re, im) rows."""
    payload = {
        "panel": panel_payload(input_path, header),
        "difference": difference_payload(diff_kind, period),
        "freqs": parse_freqs(freqs),
        "l_n": l_n,
        "c": c,
    }
    with make_client(server) as client:
        body = call(client, "/v1/estimate", payload)
    write_csv(
        output,
        ["omega", "i", "j", "re", "im"],
        ([row["omega"], row["i"], row["j"], row["re"], row["im"]] for row in body["rows"]),
    )


@main.command()
@input_option
@header_option
@add_options(difference_options)
@pairs_option
@freq_option
@add_options(tuning_options)
@click.option("--output", default=None, type=click.Path(dir_okay=False), help="Output JSON (default stdout).")
@click.pass_obj
def test(server, input_path, header, diff_kind, period, pairs, freqs, alpha, draws, seed, l_n, c, b_n, output):
    """Global test of a zero cross-spectrum over the chosen pairs and frequencies."""
    payload = {
        "panel": panel_payload(input_path, header),
        "difference": difference_payload(diff_kind, period),
        "pairs": parse_pairs(pairs),
        "freqs": parse_freqs(freqs),
        "alpha": alpha,
        "B": draws,
        "seed": seed,
        "l_n": l_n,
        "c": c,
        "b_n": b_n,
    }
    with make_client(server) as client:
        body = call(client, "/v1/test", payload)
    write_text(output, to_json(body))


@main.command()
@input_option
@header_option
@add_options(difference_options)
@pairs_option
@freq_option
@add_options(tuning_options)
@click.option("--output", default=None, type=click.Path(dir_okay=False), help="Per-hypothesis CSV (default stdout).")
@click.option("--matrix-output", default=None, type=click.Path(dir_okay=False),
              help="Square p-value matrix CSV (blocks mode only).")
@click.pass_obj
def fdr(server, input_path, header, diff_kind, period, pairs, freqs, alpha, draws, seed, l_n, c, b_n,
        output, matrix_output):
    """Multiple testing with FDR control; one hypothesis per pair or block pair."""
    payload = {
        "panel": panel_payload(input_path, header),
        "difference": difference_payload(diff_kind, period),
        "pairs": parse_pairs(pairs),
        "freqs": parse_freqs(freqs),
        "alpha": alpha,
        "B": draws,
        "seed": seed,
        "l_n": l_n,
        "c": c,
        "b_n": b_n,
    }
    with make_client(server) as client:
        body = call(client, "/v1/fdr", payload)
    write_csv(
        output,
        ["q", "label_i", "label_j", "statistic", "p_value", "v", "rejected", "star"],
        (
            [row["q"], row["label_i"], row["label_j"], row["statistic"], row["p_value"],
             row["v"], row["rejected"], row["star"]]
            for row in body["rows"]
        ),
    )
    if matrix_output:
        matrix = body.get("matrix")
        if matrix is None:
            raise click.UsageError("--matrix-output needs --pairs blocks")
        labels = matrix["labels"]
        rows = ([label] + list(pv_row) for label, pv_row in zip(labels, matrix["p_values"]))
        write_csv(matrix_output, [""] + labels, rows)


@main.command()
@click.option("--model", required=True, type=click.Choice(["m1", "m2", "m3", "m4", "m5", "m6"]),
              help="Data-generating process.")
@click.option("--n", "n_obs", required=True, type=int, help="Sample size.")
@click.option("--p", "dim", required=True, type=int, help="Panel dimension.")
@click.option("--param", required=True, type=float, help="Model parameter.")
@click.option("--reps", required=True, type=int, help="Monte-Carlo replications.")
@click.option("--experiment", default="size", show_default=True,
              type=click.Choice(["size", "power", "fdr"]))
@freq_option
@add_options(tuning_options)
@click.option("--burn-in", default=200, show_default=True, help="Start-up steps for recursive models.")
@click.option("--blocks", default=10, show_default=True, help="Block count for the fdr experiment.")
@click.option("--threads", default=1, show_default=True, help="Worker processes for replications.")
@click.option("--output", default=None, type=click.Path(dir_okay=False), help="Output CSV (default stdout).")
@click.pass_obj
def simulate(server, model, n_obs, dim, param, reps, experiment, freqs, alpha, draws, seed, l_n, c, b_n,
             burn_in, blocks, threads, output):
    """Monte-Carlo size, power, or FDR experiment on a benchmark process."""
    payload = {
        "model": model,
        "n": n_obs,
        "p": dim,
        "param": param,
        "reps": reps,
        "experiment": experiment,
        "freqs": parse_freqs(freqs),
        "alpha": alpha,
        "B": draws,
        "seed": seed,
        "l_n": l_n,
        "c": c,
        "b_n": b_n,
        "burn_in": burn_in,
        "blocks": blocks,
        "workers": threads,
    }
    with make_client(server) as client:
        body = call(client, "/v1/simulate", payload)
    config = body["config"]
    header = ["experiment", "model", "n", "p", "param", "K", "c", "alpha", "B", "replications"]
    row = [body["experiment"], config["model"], config["n"], config["p"], config["param"],
           config["K"], config["c"], config["alpha"], config["B"], body["replications"]]
    if experiment == "fdr":
        header += ["Q", "Q0", "fdr", "power"]
        row += [config["Q"], config["Q0"], body["fdr"], body["power"]]
    else:
        header += ["rejection_rate"]
        row += [body["rejection_rate"]]
    write_csv(output, header, [row])


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
