"""Command-line front end: scenarios, meter densities, samples and superoscillation tables."""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import qcore as q
from . import scenarios
from .errors import TwoStateError, ZeroModulus
from .meter import (
    MeterConfig,
    ReadoutDensity,
    collective_density,
    no_signaling_check,
    postselected_meter_distribution,
    preonly_density,
    sample_run,
)
from .qcore import Observable, StateVector
from .superosc import (
    AffineShift,
    build_superoscillation,
    evaluate,
    gaussian,
    local_frequency,
    shift_demo_spec,
    shift_superposition_values,
    SuperoscSpec,
)
from .tsv import PrePostEnsemble

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    """Bad or inconsistent command-line parameters."""


# --- named inputs -----------------------------------------------------------


def _named_states() -> dict[str, StateVector]:
    tb_pre, tb_post = scenarios.three_box_states()
    h_pre, h_post = scenarios.hardy_states()
    c_pre, c_post = scenarios.cheshire_states()
    return {
        "up_x": q.UP_X, "down_x": q.DOWN_X,
        "up_y": q.UP_Y, "down_y": q.DOWN_Y,
        "up_z": q.UP_Z, "down_z": q.DOWN_Z,
        "three_box_pre": tb_pre, "three_box_post": tb_post,
        "hardy_pre": h_pre, "hardy_post": h_post,
        "cheshire_pre": c_pre, "cheshire_post": c_post,
    }


def _named_observables() -> dict[str, Observable]:
    obs = {
        "sigma_x": q.SIGMA_X, "sigma_y": q.SIGMA_Y, "sigma_z": q.SIGMA_Z,
        "sigma_xi": q.sigma_xi(np.pi / 4),
    }
    for box in scenarios.BOXES:
        obs[f"P_{box}"] = scenarios.box_projector(box)
    return obs


_QUBIT_BASES = {
    "z": ("up_z", "down_z"),
    "x": ("up_x", "down_x"),
    "y": ("up_y", "down_y"),
}


def parse_state(text: str) -> StateVector:
    """A built-in name or comma-separated complex amplitudes such as ``1,1j``."""
    named = _named_states()
    if text in named:
        return named[text]
    try:
        amps = [complex(tok.strip().replace(" ", "")) for tok in text.split(",")]
    except ValueError:
        raise ConfigError(f"unknown state {text!r}; names: {', '.join(sorted(named))}") from None
    return StateVector(np.array(amps))


def parse_observable(text: str) -> Observable:
    """A built-in name, ``sigma:nx,ny,nz`` or ``diag:a,b,...``."""
    named = _named_observables()
    if text in named:
        return named[text]
    kind, _, rest = text.partition(":")
    try:
        values = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        values = []
    if kind == "sigma" and len(values) == 3:
        return q.sigma(values)
    if kind == "diag" and values:
        return Observable(np.diag(values))
    raise ConfigError(f"unknown observable {text!r}; names: {', '.join(sorted(named))}, sigma:nx,ny,nz, diag:a,b,...")


def parse_window(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--window expects LO,HI, got {text!r}") from None
    if not lo < hi:
        raise ConfigError("--window needs LO < HI")
    return lo, hi


def _retarget(state: StateVector, obs: Observable) -> StateVector:
    # inline literals carry default labels; adopt the observable's basis when sizes match
    if state.basis != obs.basis and state.dimension == obs.dimension:
        return StateVector(state.amplitudes, obs.basis)
    return state


# --- output ------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if math.isfinite(x) else None


def write_table(out, fmt: str, columns: Sequence[str], rows: Sequence[Sequence], meta: dict | None = None):
    if fmt == "csv":
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(_num(v) for v in row) + "\n")
    else:
        doc = dict(meta or {})
        for j, name in enumerate(columns):
            doc[name] = [_json_num(row[j]) for row in rows]
        out.write(json.dumps(doc, indent=2) + "\n")


def _density_rows(d: ReadoutDensity, window) -> list[tuple[float, float]]:
    rows = zip(d.grid, d.density)
    if window is not None:
        rows = ((p, v) for p, v in rows if window[0] <= p <= window[1])
    return list(rows)


def _meter(args) -> MeterConfig:
    return MeterConfig(delta=args.delta, lam=args.lam)


# --- commands -------------------------------------------------------------------


def cmd_scenario(args, out) -> int:
    if args.all == (args.name is not None):
        raise ConfigError("give exactly one of --name or --all")
    if args.all:
        reports = scenarios.run_all()
    else:
        if args.name not in scenarios.SCENARIOS:
            raise ConfigError(f"unknown scenario {args.name!r}; choose from {', '.join(scenarios.SCENARIOS)}")
        reports = [scenarios.SCENARIOS[args.name]()]
    if args.format == "json":
        doc = [r.to_dict() for r in reports]
        out.write(json.dumps(doc if args.all else doc[0], indent=2) + "\n")
    else:
        out.write("scenario,label,computed_re,computed_im,expected_re,expected_im,provenance,tolerance,pass\n")
        for r in reports:
            for e in r.entries:
                c, x = complex(e.computed), complex(e.expected)
                fields = [_num(c.real), _num(c.imag), _num(x.real), _num(x.imag)]
                out.write(f"{r.name},\"{e.label}\",{','.join(fields)},{e.provenance},{_num(e.tolerance)},{int(e.passed)}\n")
    failed = [f"{r.name}: {e.label}" for r in reports for e in r.failures()]
    for f in failed:
        print(f"FAILED {f}", file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_density(args, out) -> int:
    obs = parse_observable(args.obs)
    pre = _retarget(parse_state(args.pre), obs)
    cfg = _meter(args)
    if args.post == "none":
        d = preonly_density(pre, obs, cfg)
    else:
        post = _retarget(parse_state(args.post), obs)
        d = postselected_meter_distribution(PrePostEnsemble(pre, post), obs, cfg)
    write_table(out, args.format, ["P", "density"], _density_rows(d, parse_window(args.window)))
    return EXIT_OK


def cmd_sample(args, out) -> int:
    obs = parse_observable(args.obs)
    ens = PrePostEnsemble(_retarget(parse_state(args.pre), obs), _retarget(parse_state(args.post), obs))
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    run = sample_run(ens, obs, _meter(args), args.trials, seed=args.seed, workers=args.workers)
    rows, total, count = [], 0.0, 0
    for rec in run:
        if rec.postselected:
            count += 1
            total += rec.readout
        rows.append((rec.trial_index, rec.readout, rec.postselected, total / count if count else float("nan")))
    meta = {"seed": args.seed, "trials": args.trials, "accepted": run.n_accepted}
    write_table(out, args.format, ["trial_index", "readout", "postselected", "accepted_mean"], rows, meta)
    return EXIT_OK


def cmd_collective(args, out) -> int:
    obs = parse_observable(args.obs)
    pre, post = _retarget(parse_state(args.pre), obs), _retarget(parse_state(args.post), obs)
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    d = collective_density(args.n, pre, post, obs, _meter(args))
    write_table(out, args.format, ["P", "density"], _density_rows(d, parse_window(args.window)))
    return EXIT_OK


def cmd_superosc(args, out) -> int:
    spec = SuperoscSpec(alpha=args.alpha, n_terms=args.terms, scale=args.lam)
    f = build_superoscillation(spec)
    lo, hi = parse_window(args.window) or (-1.0, 1.0)
    xs = np.linspace(lo, hi, args.points)
    values = evaluate(f, xs)
    rows = []
    for x, v in zip(xs, values):
        try:
            freq = local_frequency(f, float(x))
        except ZeroModulus:
            freq = float("nan")
        rows.append((x, v.real, v.imag, abs(v), freq))
    meta = {"alpha": args.alpha, "terms": args.terms, "scale": args.lam}
    write_table(out, args.format, ["x", "re", "im", "abs", "local_frequency"], rows, meta)
    return EXIT_OK


def cmd_shift_demo(args, out) -> int:
    target = args.alpha
    shift_map = AffineShift()
    if args.terms < 2:
        raise ConfigError("--terms (coefficient count) must be >= 2")
    spec = shift_demo_spec(target, args.terms, shift_map)
    lo, hi = parse_window(args.window) or (target - 4 * args.width, target + 4 * args.width)
    ts = np.linspace(lo, hi, args.points)
    f = gaussian(args.width)
    approx = shift_superposition_values(f, spec, ts, shift_map)
    exact = np.array([float(f(t - target)) for t in ts])
    rows = [(t, a, e, abs(a - e)) for t, a, e in zip(ts, approx, exact)]
    meta = {"target_shift": target, "coefficients": args.terms, "width": args.width,
            "max_error": float(np.max(np.abs(approx - exact)))}
    write_table(out, args.format, ["t", "superposition", "shifted", "abs_error"], rows, meta)
    return EXIT_OK


def _parse_bases(text: str, dim: int) -> list[list[StateVector]]:
    named = _named_states()
    bases = []
    for item in text.split(";"):
        item = item.strip()
        if item in _QUBIT_BASES:
            bases.append([named[n] for n in _QUBIT_BASES[item]])
        elif item.startswith("random"):
            seed = int(item[6:] or 0)
            m = np.random.default_rng(seed).normal(size=(dim, dim, 2))
            u, _ = np.linalg.qr(m[..., 0] + 1j * m[..., 1])
            bases.append([StateVector(u[:, j]) for j in range(dim)])
        else:
            raise ConfigError(f"unknown basis {item!r}; use x, y, z or randomSEED")
    return bases


def cmd_nosignal(args, out) -> int:
    obs = parse_observable(args.obs)
    pre = _retarget(parse_state(args.pre), obs)
    bases = [[_retarget(s, obs) for s in b] for b in _parse_bases(args.bases, pre.dimension)]
    cfg = _meter(args)
    rows = [(j, no_signaling_check(pre, obs, cfg, [bases[0], b])) for j, b in enumerate(bases)]
    write_table(out, args.format, ["basis_index", "max_deviation"], rows, {"bases": args.bases})
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twostate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, fmt_default: str = "csv") -> None:
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)

    def ensemble(p: argparse.ArgumentParser, post: bool = True) -> None:
        p.add_argument("--pre", default="up_x")
        if post:
            p.add_argument("--post", default="up_y")
        p.add_argument("--obs", default="sigma_xi")
        p.add_argument("--delta", type=float, default=10.0)
        p.add_argument("--lambda", dest="lam", type=float, default=1.0)

    p = sub.add_parser("scenario", help="run worked paradoxes and report checks")
    p.add_argument("--name")
    p.add_argument("--all", action="store_true")
    common(p, "json")
    p.set_defaults(handler=cmd_scenario)

    p = sub.add_parser("density", help="post-selected meter readout density ('--post none' for pre-only)")
    ensemble(p)
    p.add_argument("--window")
    common(p)
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("sample", help="Monte Carlo meter trials with post-selection")
    ensemble(p)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("collective", help="readout density of the N-particle average")
    ensemble(p)
    p.set_defaults(delta=0.25)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--window")
    common(p)
    p.set_defaults(handler=cmd_collective)

    p = sub.add_parser("superosc", help="tabulate a binomial superoscillation")
    p.add_argument("--alpha", type=float, default=math.sqrt(2))
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--window")
    p.add_argument("--points", type=int, default=201)
    common(p)
    p.set_defaults(handler=cmd_superosc)

    p = sub.add_parser("shift-demo", help="shift superposition of a Gaussian beyond the shift range")
    p.add_argument("--alpha", type=float, default=10.0, help="target shift")
    p.add_argument("--terms", type=int, default=14, help="number of coefficients")
    p.add_argument("--width", type=float, default=8.0, help="Gaussian width")
    p.add_argument("--window")
    p.add_argument("--points", type=int, default=201)
    common(p)
    p.set_defaults(handler=cmd_shift_demo)

    p = sub.add_parser("nosignal", help="pre-only meter marginal across post-selection bases")
    ensemble(p, post=False)
    p.add_argument("--bases", default="z;x;y", help="';'-separated: x, y, z or randomSEED")
    common(p)
    p.set_defaults(handler=cmd_nosignal)
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--window -1,1" as two options; glue such values to their flag
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--window":
            nxt = next(it, None)
            if nxt is not None and (nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == ".")):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    buf = io.StringIO()
    try:
        code = args.handler(args, buf)
    except (ConfigError, TwoStateError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"twostate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = buf.getvalue()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"twostate: error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code
