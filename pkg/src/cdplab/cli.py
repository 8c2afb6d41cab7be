"""Command-line front end: ``cdplab {osd,diamond,cdp,tomography,verify-suite}``.

Exit codes: 0 success, 2 validation error, 3 solver failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CdpLabError,
    InvalidInput,
    NotTomographicallyComplete,
    ParseError,
    ReconstructionFailed,
    SolverFailed,
    ValidationError,
)

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("osd", "diamond", "cdp", "tomography", "verify-suite")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None
    input_b: str | None
    output: str | None
    threshold: float | None
    restarts: int
    seed: int
    format: str
    budget: int
    noise_level: float
    trials: int


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdplab", description="Channel discrimination power toolkit.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", help="state file (or channel file for diamond); shipped fixture names also work")
    parser.add_argument("--input-b", help="second channel file (diamond) or channel for tomography")
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--restarts", type=int, default=32, help="ascent restarts / basis-search budget")
    parser.add_argument("--osr-threshold", "--threshold", dest="threshold", type=float, default=None,
                        help="relative OSR cutoff (default 1e-10)")
    parser.add_argument("--budget", type=int, default=16, help="random channel pairs in the estimator")
    parser.add_argument("--noise-level", type=float, default=1e-6, help="tomography noise 2-norm")
    parser.add_argument("--trials", type=int, default=20, help="tomography noise trials")
    return parser


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(ns.command, ns.input, ns.input_b, ns.output, ns.threshold, ns.restarts, ns.seed,
                     ns.format, ns.budget, ns.noise_level, ns.trials)


# --- formatting ---------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render(report: dict, fmt: str, text_keys=None) -> str:
    """JSON keeps full precision; text rounds to 6 significant digits; csv is key,value."""
    from .io import dumps

    if fmt == "json":
        return dumps(report)
    if fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, repr(v) if isinstance(v, float) else v])
        return buf.getvalue()
    items = report if text_keys is None else {k: report[k] for k in text_keys if k in report}
    lines = []
    for k, v in items.items():
        if isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v):
            lines.append(f"{k}: [{', '.join(_fmt(x) for x in v)}]")
        elif isinstance(v, list):
            lines.append(f"{k}:")
            for x in v:
                if isinstance(x, dict) and set(x) == {"tag", "value"}:
                    lines.append(f"  {x['tag']}: {_fmt(x['value'])}")
                else:
                    lines.append(f"  {x}")
        else:
            lines.append(f"{k}: {_fmt(v)}")
    return "\n".join(lines) + "\n"


# --- commands ---------------------------------------------------------------


def _need(value, flag):
    if not value:
        raise ValidationError(f"{flag} is required for this command")
    return value


def cmd_osd(cfg: RunConfig) -> tuple[dict, list | None]:
    from .io import read_state
    from .osd import DEFAULT_THRESHOLD, osd_report

    state = read_state(_need(cfg.input, "--input"))
    return osd_report(state, DEFAULT_THRESHOLD if cfg.threshold is None else cfg.threshold), None


def cmd_diamond(cfg: RunConfig) -> tuple[dict, list | None]:
    from .diamond import diamond_norm
    from .io import read_channel
    from .objects import channel_difference

    a = read_channel(_need(cfg.input, "--input"))
    b = read_channel(_need(cfg.input_b, "--input-b"))
    if (a.d_in, a.d_out) != (b.d_in, b.d_out):
        raise ValidationError(f"dimension mismatch: ({a.d_in}->{a.d_out}) vs ({b.d_in}->{b.d_out})")
    res = diamond_norm(channel_difference(a, b), "both", restarts=cfg.restarts, seed=cfg.seed)
    keys = ["value", "sdp_value", "ascent_value", "sdp_gap", "iterations"]
    return res.to_dict(), keys


def cmd_cdp(cfg: RunConfig) -> tuple[dict, list | None]:
    from .cdp import DEFAULT_BASIS_BUDGET, cdp_report
    from .io import read_state
    from .osd import DEFAULT_THRESHOLD

    path = _need(cfg.input, "--input")
    state = read_state(path)
    report = cdp_report(
        state,
        state_id=Path(path).stem,
        budget=cfg.budget,
        seed=cfg.seed,
        threshold=DEFAULT_THRESHOLD if cfg.threshold is None else cfg.threshold,
        basis_search_budget=max(cfg.restarts, DEFAULT_BASIS_BUDGET),
    )
    keys = ["state_id", "lower_bound", "adversarial_estimate", "upper_bound", "exact", "bound_provenance"]
    return report.to_dict(), keys


def cmd_tomography(cfg: RunConfig):
    from .io import read_channel, read_state
    from .tomography import noise_sensitivity, reconstruct_from_state, sensitivity_sweep, sweep_csv

    channel = read_channel(cfg.input_b or "random_unitary_d2")
    if cfg.format == "csv":
        if cfg.input:
            from .cdp import isotropic_weight

            state = read_state(cfg.input)
            st = noise_sensitivity(state, channel, cfg.noise_level, cfg.trials, cfg.seed)
            p = isotropic_weight(state)
            rows = [{"p": "" if p is None else p, "r_min": st.r_min, "noise_level": st.noise_level,
                     "mean_residual": st.mean_residual, "max_residual": st.max_residual, "trials": st.trials}]
        else:
            rows = sensitivity_sweep(channel.d_in, (1.0, 0.5, 0.1), channel, cfg.noise_level, cfg.trials, cfg.seed)
        return sweep_csv(rows)
    state = read_state(_need(cfg.input, "--input"))
    res = reconstruct_from_state(state, channel, 1e-10 if cfg.threshold is None else cfg.threshold)
    st = noise_sensitivity(state, channel, cfg.noise_level, cfg.trials, cfg.seed)
    choi = res.reconstructed_choi
    report = {
        "residual_to_truth": res.residual_to_truth,
        "conditioning": res.conditioning,
        "noise_level": st.noise_level,
        "mean_residual": st.mean_residual,
        "max_residual": st.max_residual,
        "trials": st.trials,
        "reconstructed_choi": {"real": choi.real.tolist(), "imag": choi.imag.tolist()},
    }
    return report, ["residual_to_truth", "conditioning", "noise_level", "mean_residual", "max_residual", "trials"]


def cmd_verify_suite(cfg: RunConfig):
    from .io import FIXTURE_DIR
    from .verify import run_suite, scoreboard

    results = run_suite(cfg.input or FIXTURE_DIR, seed=cfg.seed, budget=min(cfg.budget, 8), threshold=cfg.threshold)
    if cfg.format == "text":
        body = scoreboard(results) + "\n"
    else:
        body = {"checks": [{"tag": r.tag, "name": r.name, "status": r.status, "detail": r.detail} for r in results]}
    return body, any(r.failed for r in results)


def _emit(text: str, cfg: RunConfig):
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        if cfg.command == "verify-suite":
            body, failed = cmd_verify_suite(cfg)
            _emit(body if isinstance(body, str) else render(body, cfg.format), cfg)
            return EXIT_VERIFY if failed else EXIT_OK
        handler = {"osd": cmd_osd, "diamond": cmd_diamond, "cdp": cmd_cdp, "tomography": cmd_tomography}[cfg.command]
        out = handler(cfg)
        if isinstance(out, str):
            _emit(out, cfg)
        else:
            report, keys = out
            _emit(render(report, cfg.format, keys), cfg)
        return EXIT_OK
    except (ParseError, ValidationError, InvalidInput, NotTomographicallyComplete) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverFailed, ReconstructionFailed) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CdpLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
