"""Command line harness: ``purestates <subcommand> [--config FILE] ...``.

Exit codes: 0 success, 1 selftest failure, 2 invalid input, 3 numerical
health failure. Data goes to files (``--output-dir``) or standard output;
diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pydantic

from purestates import __version__
from purestates.algebra_gns import (
    close_algebra,
    commutant_dimension,
    cyclic_rank,
    diagonal_algebra,
    full_matrix_algebra,
    gns,
    gns_identity_residual,
    homomorphism_residual,
    state_from_density,
    state_from_vector,
)
from purestates.config import (
    MODELS,
    BumpEnvelopeSpec,
    GNSConfig,
    HusimiSpec,
    PurifyConfig,
    SemiclassicalConfig,
    StatesConfig,
    Tolerances,
    WeylConfig,
    config_hash,
    paper_defaults,
)
from purestates.dynamics import (
    ConicalExperimentSpec,
    PropagationConfig,
    conical_potential,
    default_dt,
    run_conical_experiment,
)
from purestates.errors import NumericalHealthError, PureStatesError, ValidationError
from purestates.purification import purity_escalation_check
from purestates.selftest import format_table, run_selftest
from purestates.states import (
    DensityMatrix,
    bloch_from_density,
    density_from_bloch,
    extremal_decomposition,
    hs_norm,
    is_pure,
    vector_state_gap,
)
from purestates.weyl import (
    Bump1D,
    Grid1D,
    affine_symbol,
    bump_symbol,
    gaussian_envelope,
    husimi,
    plateau_symbol,
    semiclassical_limit_table,
    wave_packet,
)

log = logging.getLogger("purestates")

THREADS_ENV = "PURESTATES_THREADS"

UNITS = {
    "hbar": "action",
    "t": "time",
    "x": "length",
    "expectation": "symbol",
    "target": "symbol",
    "error": "symbol",
    "mass1": "probability",
    "mass2": "probability",
    "mass_pre": "probability",
    "norm_drift": "dimensionless",
    "energy_drift": "energy",
    "weight": "probability",
    "gap": "observable",
    "rep_dim": "count",
    "commutant_dim": "count",
    "cyclic_rank": "count",
    "n_targets": "count",
    "dim": "count",
    "pure": "boolean",
    "passed": "boolean",
    "name": "label",
    "check": "label",
    "verdict": "text",
    "detail": "text",
}


@dataclass
class Output:
    rows: list[dict]
    matrices: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=dict)


# ---------------------------------------------------------------- runners


def _density(spec) -> DensityMatrix:
    return DensityMatrix(spec.array())


def run_states(cfg: StatesConfig, tol: Tolerances) -> Output:
    if cfg.task == "gap":
        targets = [(t.observable.array(), t.value) for t in cfg.targets]
        return Output([{"gap": vector_state_gap(targets, cfg.resolution), "n_targets": len(targets)}])
    rho = _density(cfg.rho) if cfg.rho is not None else density_from_bloch(cfg.bloch)
    if cfg.task == "purity":
        return Output([{"dim": rho.dim, "hs_norm": hs_norm(rho), "pure": is_pure(rho, tol.purity)}])
    if cfg.task == "bloch":
        if cfg.rho is not None:
            a = bloch_from_density(rho).a
            return Output([{"a1": a[0], "a2": a[1], "a3": a[2], "norm": float(np.linalg.norm(a))}])
        return Output(
            [{"row": i, "col": j, "re": rho.entries[i, j].real, "im": rho.entries[i, j].imag}
             for i in range(2) for j in range(2)]
        )
    rows = []
    for k, (w, v) in enumerate(extremal_decomposition(rho)):
        for j, c in enumerate(v):
            rows.append({"term": k, "weight": w, "component": j, "re": c.real, "im": c.imag})
    return Output(rows)


def run_gns(cfg: GNSConfig, tol: Tolerances) -> Output:
    rows = []
    for case in cfg.cases:
        if case.algebra == "full":
            alg = full_matrix_algebra(case.n)
        elif case.algebra == "diagonal":
            alg = diagonal_algebra(case.n)
        else:
            alg = close_algebra([g.array() for g in case.generators])
        if case.vector is not None:
            w = state_from_vector(alg, case.vector.array())
        else:
            w = state_from_density(alg, case.density.array())
        rep = gns(alg, w, tol.gns_null)
        cdim = commutant_dimension(rep, tol.commutant)
        rows.append({
            "name": case.name,
            "rep_dim": rep.rep_dim,
            "commutant_dim": cdim,
            "pure": cdim == 1,
            "cyclic_rank": cyclic_rank(rep),
            "identity_residual": gns_identity_residual(rep, w),
            "homomorphism_residual": homomorphism_residual(rep),
        })
    return Output(rows)


def run_purify(cfg: PurifyConfig, tol: Tolerances) -> Output:
    rep = purity_escalation_check(_density(cfg.rho), cfg.dim_II)
    return Output([rep.as_dict()])


def _envelope(spec):
    if spec.kind == "gaussian":
        return gaussian_envelope
    return Bump1D(spec.center, spec.width)


def _symbol(spec):
    if spec.kind == "bump":
        return bump_symbol(spec.center, spec.radii, spec.amplitude)
    if spec.kind == "plateau":
        return plateau_symbol(spec.center, spec.inner, spec.outer, spec.value)
    return affine_symbol(spec.coefficients, spec.center, spec.inner, spec.outer)


def _nodes(lo: float, hi: float, hbar: float, per_width: int) -> np.ndarray:
    step = math.sqrt(hbar) / per_width
    return lo + step * np.arange(int(math.floor((hi - lo) / step)) + 1)


def _husimi_field(psi, spec: HusimiSpec):
    xs = _nodes(*spec.x_range, psi.hbar, spec.cells_per_width)
    ps = _nodes(*spec.xi_range, psi.hbar, spec.cells_per_width)
    return xs, ps, husimi(psi, xs, ps)


def _tag(v: float) -> str:
    return repr(float(v))


def run_weyl(cfg: WeylConfig, tol: Tolerances) -> Output:
    grid = Grid1D(cfg.grid.n_points, cfg.grid.half_length)
    env = _envelope(cfg.envelope)
    table = semiclassical_limit_table(env, cfg.x0, cfg.xi0, _symbol(cfg.symbol), cfg.hbar_list, grid)
    out = Output([{"hbar": r.hbar, "expectation": r.expectation, "target": r.target, "error": r.error} for r in table])
    if cfg.husimi is not None:
        for h in cfg.hbar_list:
            psi = wave_packet(env, cfg.x0, cfg.xi0, h, grid)
            out.matrices[f"husimi_hbar={_tag(h)}.dat"] = _husimi_field(psi, cfg.husimi)
    return out


def _bump(spec: BumpEnvelopeSpec) -> Bump1D:
    return Bump1D(spec.center, spec.width)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def run_semiclassical(cfg: SemiclassicalConfig, tol: Tolerances) -> Output:
    grid = Grid1D(cfg.grid.n_points, cfg.grid.half_length)
    pot = conical_potential(cfg.smoothing)
    specs = [
        ConicalExperimentSpec(cfg.beta, cfg.p1, cfg.p2, _bump(cfg.envelope1), _bump(cfg.envelope2), h, tuple(cfg.times))
        for h in cfg.hbar_list
    ]
    # validate every run before spending time on any of them
    pcfgs = [PropagationConfig(grid, s.hbar, cfg.dt or default_dt(grid, s.hbar, pot), 0, pot) for s in specs]

    def one(args):
        spec, pcfg = args
        fields = {}

        def snap(t, psi):
            if cfg.snapshots is not None:
                fields[f"husimi_hbar={_tag(spec.hbar)}_t={_tag(t)}.dat"] = _husimi_field(psi, cfg.snapshots)

        log.info("conical run hbar=%g", spec.hbar)
        return run_conical_experiment(spec, pcfg, cfg.radius, snap), fields

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, zip(specs, pcfgs)))
    out = Output([])
    for recs, fields in results:
        for r in recs:
            out.rows.append({
                "hbar": r.hbar, "t": r.t, "mass1": r.mass1, "mass2": r.mass2, "mass_pre": r.mass_pre,
                "norm_drift": r.norm_drift, "energy_drift": r.energy_drift,
            })
        out.matrices.update(fields)
    return out


RUNNERS = {
    "states": run_states,
    "gns": run_gns,
    "purify": run_purify,
    "weyl": run_weyl,
    "semiclassical": run_semiclassical,
}


# ---------------------------------------------------------------- emitters


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def render_csv(rows: list[dict], subcommand: str, digest: str) -> str:
    cols = list(rows[0]) if rows else []
    buf = io.StringIO()
    buf.write(f"# purestates {subcommand} config_sha256={digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{c} [{UNITS.get(c, 'dimensionless')}]" for c in cols])
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def render_json(rows: list[dict], subcommand: str, digest: str) -> str:
    doc = {
        "subcommand": subcommand,
        "config_sha256": digest,
        "results": [{k: _plain(v) for k, v in r.items()} for r in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def render_matrix(xs: np.ndarray, ps: np.ndarray, H: np.ndarray, digest: str) -> str:
    """gnuplot ``nonuniform matrix`` text: first row x nodes, then one row per xi node."""
    lines = [
        f"# purestates husimi field config_sha256={digest}",
        "# plot with: plot 'file' nonuniform matrix with image (x columns, xi rows)",
        " ".join([str(len(xs))] + [repr(float(x)) for x in xs]),
    ]
    for j, p in enumerate(ps):
        lines.append(" ".join([repr(float(p))] + [repr(float(v)) for v in H[:, j]]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="purestates", description="Pure and mixed state experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--paper-defaults", action="store_true", help="start from the built-in reference config")
    common.add_argument("--output-dir", type=Path, help="write data files here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                        help="tolerance override (purity, gns_null, commutant)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in (*RUNNERS, "selftest"):
        sub.add_parser(name, parents=[common])
    return parser


def _tolerances(items: list[str]) -> Tolerances:
    vals = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"--tol expects KEY=VALUE, got {item!r}")
        try:
            vals[key.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"--tol value for {key!r} is not a number") from None
    return Tolerances(**vals)


def _load_config(args) -> pydantic.BaseModel:
    if args.config is None and not args.paper_defaults:
        raise ValidationError("no config given: pass --config FILE or --paper-defaults")
    doc = dict(paper_defaults(args.subcommand)) if args.paper_defaults else {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ValidationError("config must be a JSON object")
        doc.update(user)
    return MODELS[args.subcommand].model_validate(doc)


def _write(args, name: str, text: str) -> None:
    if args.output_dir is None:
        sys.stdout.write(text)
        return
    args.output_dir.mkdir(parents=True, exist_ok=True)
    path = args.output_dir / name
    path.write_text(text)
    log.info("wrote %s", path)


def _run(args) -> int:
    tol = _tolerances(args.tol)
    if args.subcommand == "selftest":
        results = run_selftest(args.seed)
        print(format_table(results))
        if args.output_dir is not None:
            rows = [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results]
            digest = config_hash("selftest", tol, {"seed": args.seed})
            render = render_csv if args.format == "csv" else render_json
            _write(args, f"selftest.{args.format}", render(rows, "selftest", digest))
        return 0 if all(r.passed for r in results) else 1

    cfg = _load_config(args)
    out = RUNNERS[args.subcommand](cfg, tol)
    digest = config_hash(args.subcommand, cfg, {"tolerances": tol.model_dump(), "seed": args.seed})
    render = render_csv if args.format == "csv" else render_json
    _write(args, f"{args.subcommand}.{args.format}", render(out.rows, args.subcommand, digest))
    if out.matrices:
        if args.output_dir is None:
            raise ValidationError("Husimi fields need --output-dir")
        for name in sorted(out.matrices):
            _write(args, name, render_matrix(*out.matrices[name], digest))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    np.random.seed(args.seed)
    try:
        return _run(args)
    except pydantic.ValidationError as exc:
        log.error("invalid config: %s", exc)
        return 2
    except NumericalHealthError as exc:
        log.error("numerical health failure (%s): %s", type(exc).__name__, exc)
        return 3
    except PureStatesError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
