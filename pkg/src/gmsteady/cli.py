"""``gm`` command-line front end.

Every command resolves a :class:`RunConfig` (flags over ``--config`` JSON over
defaults), writes a JSON report embedding that config plus CSV fields into the
output directory, and prints a one-line summary.

Exit codes: 0 success, 1 configuration or certificate error, 2 partial
success (two solutions), 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .barriers import ExponentConfig, build_barriers, make_boxes, verify_subsuper
from .errors import CalibrationError, ConfigurationError, DomainError, GMError, SolverError
from .io import write_field_csv, write_json
from .mesh import build_grid, neumann_operator
from .multiroot import EXIT_CONFIG, EXIT_SOLVER, Budgets, classify_boundary, find_three_solutions
from .solver import HomotopyConfig, check_l9_nonexistence, homotopy_solve, picard_solve_in_box
from .sparse_solve import smallest_eigenpair
from .study import convergence_study

COMMANDS = ("eig", "barriers", "certify", "solve-interior", "solve-boundary", "solve-all",
            "l9-probe", "homotopy", "convergence-study")


@dataclass
class RunConfig:
    dimension: int = 1
    extents: list = dataclasses.field(default_factory=lambda: [[0.0, 1.0]])
    n: int = 129
    alpha1: float = 0.4
    beta1: float = 0.2
    alpha2: float = 0.4
    beta2: float = 0.2
    tol: float = 1e-10
    accept_tol: float = 1e-8
    eig_tol: float = 1e-10
    max_iter: int = 500
    n_starts: int = 200
    t_steps: int = 21
    lam: float = 0.5
    seed: int = 7
    out: str = "gm_out"
    family: str = "plus_family"
    bc: str = "neumann"
    n_list: list = dataclasses.field(default_factory=lambda: [33, 65, 129, 257])

    def validate(self):
        for name in ("tol", "accept_tol", "eig_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.dimension not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.dimension}")
        return self

    def exponents(self) -> ExponentConfig:
        return ExponentConfig(self.alpha1, self.beta1, self.alpha2, self.beta2)

    def grid(self):
        return build_grid(self.dimension, self.extents, self.n)

    def budgets(self) -> Budgets:
        return Budgets(n_starts=self.n_starts, picard_max_iter=self.max_iter, t_steps=self.t_steps,
                       lam=self.lam, tol=self.tol, accept_tol=self.accept_tol, eig_tol=self.eig_tol)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# flag dest -> RunConfig field
FLAG_FIELDS = {
    "dim": "dimension", "extent": "extents", "n": "n", "a1": "alpha1", "b1": "beta1",
    "a2": "alpha2", "b2": "beta2", "tol": "tol", "accept_tol": "accept_tol", "eig_tol": "eig_tol",
    "max_iter": "max_iter", "n_starts": "n_starts", "t_steps": "t_steps", "lam": "lam",
    "seed": "seed", "out": "out", "family": "family", "bc": "bc", "n_list": "n_list",
}


def _parse_extent(text):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad extent {text!r}; expected low,high[,low,high]") from None
    if len(vals) not in (2, 4):
        raise argparse.ArgumentTypeError(f"bad extent {text!r}; expected low,high[,low,high]")
    return [vals[i:i + 2] for i in range(0, len(vals), 2)]


def _parse_int_list(text):
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors (exit 1); exit 2 means partial success
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--dim", type=int, default=S)
    common.add_argument("--extent", type=_parse_extent, default=S, help="low,high (or low,high,low,high in 2D)")
    common.add_argument("--n", type=int, default=S, help="nodes per axis")
    common.add_argument("--a1", type=float, default=S)
    common.add_argument("--b1", type=float, default=S)
    common.add_argument("--a2", type=float, default=S)
    common.add_argument("--b2", type=float, default=S)
    common.add_argument("--tol", type=float, default=S)
    common.add_argument("--accept-tol", dest="accept_tol", type=float, default=S)
    common.add_argument("--eig-tol", dest="eig_tol", type=float, default=S)
    common.add_argument("--max-iter", dest="max_iter", type=int, default=S)
    common.add_argument("--n-starts", dest="n_starts", type=int, default=S)
    common.add_argument("--t-steps", dest="t_steps", type=int, default=S)
    common.add_argument("--lambda", dest="lam", type=float, default=S)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--out", default=S, help="output directory")

    parser = _Parser(prog="gm", description="Steady states of the Gierer-Meinhardt system.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "homotopy":
            p.add_argument("--family", choices=("plus_family", "abs_family"), default=S)
        if name == "solve-boundary":
            p.add_argument("--bc", choices=("neumann", "dirichlet"), default=S,
                           help="operator for the box solve (dirichlet is a diagnostic variant)")
        if name == "convergence-study":
            p.add_argument("--n-list", dest="n_list", type=_parse_int_list, default=S)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = RunConfig().to_dict()
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(data) - set(values)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for flag, name in FLAG_FIELDS.items():
        if hasattr(args, flag):
            values[name] = getattr(args, flag)
    return RunConfig(**values).validate()


def _report(cfg: RunConfig, command: str, body: dict) -> dict:
    return {"command": command, "config": cfg.to_dict(), **body}


def _out_dir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_eig(cfg):
    g = cfg.grid()
    eig = smallest_eigenpair(neumann_operator(g), eig_tol=cfg.eig_tol)
    out = _out_dir(cfg)
    csv_path = write_field_csv(out / "phi1.csv", g, eig.phi1)
    write_json(out / "eig.json", _report(cfg, "eig", eig.to_dict(str(csv_path))))
    print(f"lambda1={eig.lambda1:.6f}")
    return 0


def _write_barriers(cfg, b, out):
    paths = {}
    for name in ("phi1", "z", "y", "y_delta"):
        vals = getattr(b, name) if name != "phi1" else b.phi1
        paths[name] = str(write_field_csv(out / f"{name}.csv", b.grid, vals))
    return paths


def cmd_barriers(cfg):
    g = cfg.grid()
    b = build_barriers(g, cfg.exponents(), tol=cfg.tol, eig_tol=cfg.eig_tol)
    out = _out_dir(cfg)
    body = {"constants": b.constants(), "fields": _write_barriers(cfg, b, out)}
    write_json(out / "barriers.json", _report(cfg, "barriers", body))
    print(f"delta={b.delta:.6g} c={b.c:.6g} C_interior={b.C_interior:g} C_boundary={b.C_boundary:g}")
    return 0


def cmd_certify(cfg):
    g = cfg.grid()
    exps = cfg.exponents()
    b = build_barriers(g, exps, tol=cfg.tol, eig_tol=cfg.eig_tol)
    reports = [verify_subsuper(box, exps) for box in make_boxes(b)]
    out = _out_dir(cfg)
    body = {"constants": b.constants(), "certificates": {r.label: r.to_dict() for r in reports}}
    write_json(out / "certify.json", _report(cfg, "certify", body))
    ok = all(r.passed for r in reports)
    worst = min(c.worst_slack for r in reports for c in r.checks)
    print(f"certificates={'pass' if ok else 'fail'} worst_slack={worst:.3e}")
    if not ok:
        for r in reports:
            for c in r.failing():
                print(f"{r.label} box: {c.inequality_id} fails (slack {c.worst_slack:.3e} at node {c.worst_node})",
                      file=sys.stderr)
    return 0 if ok else EXIT_CONFIG


def _solve_box(cfg, which):
    g = cfg.grid()
    exps = cfg.exponents()
    b = build_barriers(g, exps, tol=cfg.tol, eig_tol=cfg.eig_tol)
    box = make_boxes(b)[0 if which == "interior" else 1]
    bc = cfg.bc if which == "boundary" else "neumann"
    rep = picard_solve_in_box(box, exps, max_iter=cfg.max_iter, bc=bc,
                              newton_tol=cfg.tol, accept_tol=cfg.accept_tol)
    rep.boundary_class = classify_boundary(rep.to_pair(), b, cfg.accept_tol)
    out = _out_dir(cfg)
    write_field_csv(out / f"{which}_u.csv", g, rep.u)
    write_field_csv(out / f"{which}_v.csv", g, rep.v)
    write_json(out / f"solve_{which}.json", _report(cfg, f"solve-{which}", {"report": rep.to_dict(), "bc": bc}))
    ok = rep.converged and rep.in_box
    print(f"box={which} converged={rep.converged} in_box={rep.in_box} residual={rep.residual:.3e} "
          f"boundary_class={rep.boundary_class}")
    return 0 if ok else EXIT_SOLVER


def cmd_solve_all(cfg):
    g = cfg.grid()
    res = find_three_solutions(g, cfg.exponents(), cfg.budgets(), seed=cfg.seed)
    out = _out_dir(cfg)
    body = res.to_dict()
    files = []
    for k, s in enumerate(res.solutions, start=1):
        files.append({"u": str(write_field_csv(out / f"solution{k}_u.csv", g, s.u)),
                      "v": str(write_field_csv(out / f"solution{k}_v.csv", g, s.v))})
    body["solution_files"] = files
    write_json(out / "solve_all.json", _report(cfg, "solve-all", body))
    print(f"status={res.status} solutions={len(res.solutions)} exit={res.exit_code}: {res.message}")
    return res.exit_code


def cmd_l9(cfg):
    g = cfg.grid()
    rep = check_l9_nonexistence(cfg.lam, cfg.n_starts, tol=cfg.tol, grid=g, seed=cfg.seed)
    out = _out_dir(cfg)
    for k, r in enumerate(rep.roots, start=1):
        write_field_csv(out / f"l9_root{k}.csv", g, r)
    write_json(out / "l9_probe.json", _report(cfg, "l9-probe", rep.to_dict()))
    print(f"converged_roots={rep.n_converged} distinct={len(rep.roots)} "
          f"residual_zero={rep.residual_zero:.6g} residual_phi1={rep.residual_phi1:.6g}")
    return 0


def cmd_homotopy(cfg):
    g = cfg.grid()
    A = neumann_operator(g)
    eig = smallest_eigenpair(A, eig_tol=cfg.eig_tol)
    hc = HomotopyConfig(cfg.family, lam=cfg.lam, t_schedule=tuple(np.linspace(0.0, 1.0, cfg.t_steps)),
                        tol=cfg.tol, lambda1=eig.lambda1 + 1e-12)
    hr = homotopy_solve(hc, cfg.exponents(), A=A, phi1=eig.phi1)
    out = _out_dir(cfg)
    end = hr.endpoint
    if end is not None:
        write_field_csv(out / "homotopy_u.csv", g, end.u)
        write_field_csv(out / "homotopy_v.csv", g, end.v)
    body = {"family": cfg.family, "t_values": hr.t_values, "failed_at": hr.failed_at, "messages": hr.messages,
            "residuals": [p.residual for p in hr.branch]}
    write_json(out / "homotopy.json", _report(cfg, "homotopy", body))
    last = hr.t_values[-1] if hr.t_values else None
    print(f"family={cfg.family} complete={hr.complete} last_t={last} "
          f"endpoint_residual={end.residual if end else float('nan'):.3e}")
    return 0 if hr.complete else EXIT_SOLVER


def cmd_study(cfg):
    ext = cfg.extents[0] if cfg.extents and isinstance(cfg.extents[0], (list, tuple)) else cfg.extents
    rep = convergence_study(cfg.n_list, ext, cfg.dimension)
    out = _out_dir(cfg)
    write_json(out / "convergence_study.json", _report(cfg, "convergence-study", rep.to_dict()))
    print(f"slope={rep.slope:.4f} errors={' '.join(f'{e:.3e}' for e in rep.errors)}")
    return 0


HANDLERS = {
    "eig": cmd_eig, "barriers": cmd_barriers, "certify": cmd_certify,
    "solve-interior": lambda c: _solve_box(c, "interior"),
    "solve-boundary": lambda c: _solve_box(c, "boundary"),
    "solve-all": cmd_solve_all, "l9-probe": cmd_l9, "homotopy": cmd_homotopy,
    "convergence-study": cmd_study,
}


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command != "convergence-study":
            cfg.exponents()
        return HANDLERS[args.command](cfg)
    except (ConfigurationError, CalibrationError, DomainError) as exc:
        print(f"gm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, GMError) as exc:
        print(f"gm {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
