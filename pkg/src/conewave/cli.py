"""Command-line entry point ``conewave``.

Commands: ``check-factorization``, ``kernels``, ``solve`` and ``verify``.
Every command takes a JSON configuration (``--config``; optional for
``verify``) and writes its artifacts plus ``manifest.json`` to the output
directory.  Exit codes: 0 pass, 1 numerical-criterion failure, 2
configuration error, 3 resource or divergence error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import jsonschema
import numpy as np
import scipy

from . import __version__
from .acceptance import run_suite
from .cone_ops import (BoundaryDensity, ConeParams, DirichletData, e_kernel,
                       layer_mass_fraction, t_transform)
from .errors import ConewaveError, ConfigError, DivergenceError, ResourceError
from .serialization import write_array, write_csv, write_field
from .solver import (general_solution, interior_residual, k_kernel, oblique_variant, poisson_constant,
                     poisson_convolution, reconstruct_potential, solve_dirichlet_cone,
                     solve_dirichlet_halfspace)
from .spectral_core import (CONVENTION, FREQUENCY, SPACE, Grid, SampledField,
                            dft_forward, dft_inverse, relative_l2)
from .symbol_lab import (CATALOG, DEFAULT_MASK_RADIUS, ProblemOrder, ellipticity_check,
                         factorization_residual, q_weight, tube_analyticity_probe)

logger = logging.getLogger("conewave")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

TOLERANCES = {
    "factorization_residual": 1e-12,
    "cr_residual": 1e-4,
    "poisson_rel_l2": 1e-3,
    "leakage": 1e-6,
    "trace_defect": 1e-3,
    "oblique_solve_residual": 1e-10,
    "support_fraction": 0.999,
}

_NUM = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "required": ["symbol", "cone", "grid"],
    "additionalProperties": False,
    "properties": {
        "symbol": {
            "oneOf": [
                {"type": "string"},
                {"type": "object", "required": ["name"],
                 "properties": {"name": {"type": "string"}, "theta": {"type": "number", "exclusiveMinimum": 0}},
                 "additionalProperties": False},
            ]
        },
        "cone": {"type": "object", "required": ["a", "m"], "additionalProperties": False,
                 "properties": {"a": {"type": "number", "minimum": 0}, "m": {"enum": [2, 3]}}},
        "grid": {"type": "object", "required": ["L", "N"], "additionalProperties": False,
                 "properties": {"L": {"type": "number", "exclusiveMinimum": 0},
                                "N": {"type": "integer", "minimum": 8, "multipleOf": 2}}},
        "problem": {"type": "object", "required": ["kind"], "additionalProperties": False,
                    "properties": {"kind": {"enum": ["halfspace-dirichlet", "cone-dirichlet",
                                                     "cone-oblique", "general-solution"]},
                                   "k": {"type": "integer", "minimum": 1},
                                   "n": {"type": "integer", "minimum": 1}}},
        "data": {"type": "object", "additionalProperties": False,
                 "properties": {"profile": {"enum": ["gaussian", "point", "zero"]},
                                "table": {"type": "string"},
                                "width": {"type": "number", "exclusiveMinimum": 0},
                                "shift": _NUM, "amplitude": _NUM}},
        "rhs": {"type": "object", "additionalProperties": False,
                "properties": {"profile": {"enum": ["gaussian", "zero"]},
                               "center": {"type": "array", "items": _NUM},
                               "width": {"type": "number", "exclusiveMinimum": 0},
                               "amplitude": _NUM}},
        "numerics": {"type": "object", "additionalProperties": False,
                     "properties": {"epsilon": {"type": "number", "exclusiveMinimum": 0},
                                    "tau": {"type": "number", "exclusiveMinimum": 0},
                                    "gamma": {"type": "number"},
                                    "projector": {"enum": ["indicator", "gm-quadrature"]},
                                    "mask_radius": {"type": "number", "minimum": 0},
                                    "method": {"enum": ["auto", "spectral", "collocation"]},
                                    "trace": {"enum": ["grid", "continuum"]}}},
        "output_dir": {"type": "string"},
        "mutations": {"type": "object", "properties": {"c_m_scale": _NUM}},
    },
}


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

def _path_text(path) -> str:
    parts = [str(p) for p in path]
    return ".".join(parts) if parts else "<root>"


def load_config(path: Optional[str], overrides: Optional[Dict] = None) -> Dict:
    """Parse and validate a JSON configuration, raising :class:`ConfigError`.

    Syntax errors report line and column; schema violations name the field.
    """
    if path is None:
        cfg: Dict = {}
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path} does not exist")
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if overrides:
        num = cfg.setdefault("numerics", {})
        num.update({k: v for k, v in overrides.items() if v is not None})
    if path is None:
        return cfg
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        msgs = [f"field {_path_text(e.path)}: {e.message}" for e in errors]
        raise ConfigError("invalid configuration: " + "; ".join(msgs))
    _semantic_checks(cfg, Path(path).parent)
    return cfg


def _symbol_name(cfg) -> Tuple[str, Dict]:
    sym = cfg["symbol"]
    if isinstance(sym, str):
        return sym, {}
    return sym["name"], {k: v for k, v in sym.items() if k != "name"}


def _semantic_checks(cfg: Dict, base: Path) -> None:
    name, _ = _symbol_name(cfg)
    if name not in CATALOG:
        if Path(name).suffix or (base / name).exists():
            raise ConfigError(f"field symbol: tabulated symbols are not supported ({name!r}); "
                              f"use one of {sorted(CATALOG)}")
        raise ConfigError(f"field symbol: unknown catalog entry {name!r}; use one of {sorted(CATALOG)}")
    a = cfg["cone"]["a"]
    if name == "halfspace_laplacian" and a != 0:
        raise ConfigError("field cone.a: the half-space factorisation needs a = 0")
    if name == "synthetic_lorentz" and not a > 0:
        raise ConfigError("field cone.a: the Lorentz pair needs a > 0")
    table = cfg.get("data", {}).get("table")
    if table is not None:
        tp = (base / table) if not Path(table).is_absolute() else Path(table)
        if not tp.is_file():
            raise ConfigError(f"field data.table: file {table} does not exist")
        cfg["data"]["table"] = str(tp)
    problem = cfg.get("problem", {})
    if problem.get("kind") == "cone-oblique" and "k" not in problem:
        raise ConfigError("field problem.k: required for cone-oblique")
    if problem.get("k") is not None and problem["k"] > cfg["cone"]["m"]:
        raise ConfigError(f"field problem.k: axis {problem['k']} exceeds m={cfg['cone']['m']}")


def build_problem(cfg: Dict):
    name, params = _symbol_name(cfg)
    cone = ConeParams(float(cfg["cone"]["a"]), int(cfg["cone"]["m"]))
    grid = Grid(cone.m, float(cfg["grid"]["L"]), int(cfg["grid"]["N"]))
    if name == "halfspace_laplacian":
        sym, pair = CATALOG[name](cone.m)
    else:
        sym, pair = CATALOG[name](cone.a, float(params.get("theta", 1.0)), cone.m)
    return sym, pair, cone, grid


def boundary_data(cfg: Dict, grid: Grid) -> DirichletData:
    spec = cfg.get("data", {"profile": "gaussian"})
    b = grid.boundary()
    coords = b.nodes(SPACE)
    r2 = sum(c ** 2 for c in coords)
    amp = float(spec.get("amplitude", 1.0))
    if "table" in spec:
        if b.m != 1:
            raise ConfigError("field data.table: tables are supported for m = 2 only")
        tab = np.loadtxt(spec["table"], delimiter=",", comments="#", ndmin=2)
        vals = np.interp(b.x, tab[:, 0], tab[:, 1], left=0.0, right=0.0)
        if tab.shape[1] > 2:
            vals = vals + 1j * np.interp(b.x, tab[:, 0], tab[:, 2], left=0.0, right=0.0)
        return DirichletData(b, amp * vals)
    profile = spec.get("profile", "gaussian")
    if profile == "zero":
        return DirichletData(b, np.zeros(b.shape))
    if profile == "point":
        vals = np.zeros(b.shape)
        vals[(b.origin,) * b.m] = 1.0 / b.h ** b.m
        return DirichletData(b, amp * vals)
    width = float(spec.get("width", 1.0))
    shift = float(spec.get("shift", 0.0))
    x0 = coords[0] - shift
    r2 = x0 ** 2 + sum(c ** 2 for c in coords[1:])
    return DirichletData(b, amp * np.exp(-r2 / width ** 2))


def rhs_field(cfg: Dict, grid: Grid) -> SampledField:
    spec = cfg.get("rhs", {"profile": "gaussian"})
    coords = grid.nodes(SPACE)
    if spec.get("profile", "gaussian") == "zero":
        return SampledField(grid, np.zeros(grid.shape), SPACE)
    center = list(spec.get("center", [0.0] * (grid.m - 1) + [2.0]))
    if len(center) != grid.m:
        raise ConfigError(f"field rhs.center: needs {grid.m} entries")
    width = float(spec.get("width", 1.0))
    r2 = sum((c - x0) ** 2 for c, x0 in zip(coords, center))
    return SampledField(grid, float(spec.get("amplitude", 1.0)) * np.exp(-r2 / width ** 2), SPACE)


# --------------------------------------------------------------------------
# manifest
# --------------------------------------------------------------------------

class Manifest:
    """Accumulates checks and writes ``manifest.json``."""

    def __init__(self, command: str, cfg: Dict):
        self.t0 = time.perf_counter()
        self.data = {"command": command, "config": cfg, "checks": [],
                     "convention": dict(CONVENTION),
                     "versions": {"conewave": __version__, "python": platform.python_version(),
                                  "numpy": np.__version__, "scipy": scipy.__version__}}

    def convention(self, **kw):
        self.data["convention"].update(kw)

    def check(self, name: str, value, tolerance, passed: bool, **extra):
        entry = {"name": name, "value": _jsonable(value), "tolerance": tolerance, "passed": bool(passed)}
        entry.update({k: _jsonable(v) for k, v in extra.items()})
        self.data["checks"].append(entry)
        logger.info("%s: %s (tolerance %s) %s", name, value, tolerance, "pass" if passed else "FAIL")

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.data["checks"])

    def write(self, out: Optional[Path]) -> Optional[Path]:
        self.data["wall_clock_seconds"] = time.perf_counter() - self.t0
        self.data["passed"] = self.passed
        if out is None:
            return None
        out.mkdir(parents=True, exist_ok=True)
        path = out / "manifest.json"
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True, default=_jsonable) + "\n")
        return path


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(np.real(v)), float(np.imag(v))]
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (dict, list, str, int, bool)) or v is None:
        return v
    return str(v)


def _numerics(cfg: Dict, grid: Grid) -> Dict:
    num = dict(cfg.get("numerics", {}))
    num.setdefault("epsilon", grid.dxi / 10.0)
    num.setdefault("mask_radius", DEFAULT_MASK_RADIUS)
    num.setdefault("projector", "indicator")
    num.setdefault("method", "auto")
    num.setdefault("trace", "grid")
    return num


def _out_dir(args, cfg) -> Optional[Path]:
    out = args.out or cfg.get("output_dir")
    return Path(out) if out else None


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_check_factorization(cfg: Dict, out: Optional[Path]) -> int:
    sym, pair, cone, grid = build_problem(cfg)
    num = _numerics(cfg, grid)
    man = Manifest("check-factorization", cfg)
    man.convention(mask_radius_dxi=num["mask_radius"])
    ell = ellipticity_check(sym, grid, num["mask_radius"])
    resid, worst = factorization_residual(pair, sym, grid, mask_radius=num["mask_radius"])
    rng = np.random.default_rng(0)
    samples = []
    for _ in range(16):
        xi = rng.uniform(-3, 3, cone.m)
        if cone.a > 0:
            lat = rng.uniform(-0.5, 0.5, cone.m - 1) * cone.a
            tau = np.concatenate([lat, [1.0]])
        else:
            tau = np.concatenate([np.zeros(cone.m - 1), [rng.uniform(0.2, 1.0)]])
        samples.append((xi, tau))
    axes = None if cone.a > 0 else [cone.m - 1]
    cr, growth = tube_analyticity_probe(pair.plus, cone, samples, 1e-3, "plus", axes)
    report = {"c1": ell.c1, "c2": ell.c2, "masked_fraction": ell.masked_fraction,
              "residual": resid, "worst_node": list(worst), "cr_residual": cr,
              "growth_exponent": growth, "kappa": pair.kappa}
    man.data["report"] = report
    man.check("factorization_residual", resid, TOLERANCES["factorization_residual"],
              resid <= TOLERANCES["factorization_residual"])
    man.check("cr_residual", cr, TOLERANCES["cr_residual"], cr <= TOLERANCES["cr_residual"])
    man.check("ellipticity_c1_positive", ell.c1, 0.0, ell.c1 > 0)
    print(json.dumps(_jsonable(report), sort_keys=True))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "factorization_report.json").write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    man.write(out)
    return EXIT_PASS if man.passed else EXIT_FAIL


def cmd_kernels(cfg: Dict, out: Optional[Path]) -> int:
    sym, pair, cone, grid = build_problem(cfg)
    num = dict(cfg.get("numerics", {}))
    eps = float(num.get("epsilon", 1e-6))
    man = Manifest("kernels", cfg)
    man.convention(epsilon=eps)
    out = out or Path("conewave_kernels")
    a = cone.a if cone.a > 0 else 1.0
    # E_a on boundary frequencies times a few xi_m values
    xi = grid.xi
    rows = []
    for xm in (-2.0, -1.0, 0.0, 1.0, 2.0):
        vals = e_kernel(xi, xm, a, eps)
        rows.extend((x, xm, v.real, v.imag) for x, v in zip(xi, vals))
    write_csv(out / "e_kernel.csv", ["xi_p", "xi_m", "re", "im"], rows, {"a": a, "epsilon": eps})
    if grid.m == 2:
        rows = []
        etas = [-1.0, 0.0, 1.0] if pair.kappa > 0 else []
        for eta in etas:
            for x in np.linspace(-3.0, 3.0, 13):
                if eta == 0.0 and pair.name == "halfspace_laplacian":
                    continue   # zero of the half-space factor at the origin
                v = k_kernel(eta, float(x), pair, a, eps)
                rows.append((eta, float(x), v.real, v.imag))
        write_csv(out / "k_kernel.csv", ["eta_p", "xi_p", "re", "im"], rows,
                  {"a": a, "epsilon": eps, "pair": pair.name})
    else:
        logger.info("K kernel table skipped: closed-form kernel route needs m = 2")
    if pair.partial_kernel is not None:
        b = grid.boundary()
        xm = 1.0
        w = np.broadcast_to(pair.partial_kernel(b.nodes(FREQUENCY), xm), b.shape)
        if b.m == 1:
            rows = [(x, v.real, v.imag) for x, v in zip(b.xi, w)]
            write_csv(out / "w_slice.csv", ["xi_p", "re", "im"], rows, {"x_m": xm, "pair": pair.name})
        d = DirichletData(b, np.zeros(b.shape))
        d.values[(b.origin,) * b.m] = 1.0 / b.h ** b.m
        pot = reconstruct_potential(pair, d, grid, route="slice")
        k = int(np.argmin(np.abs(grid.x - xm)))
        if b.m == 1:
            vals = pot.values[:, k]
            write_csv(out / "w_space_slice.csv", ["x_p", "re", "im"],
                      [(x, v.real, v.imag) for x, v in zip(grid.x, vals)],
                      {"x_m": float(grid.x[k]), "pair": pair.name})
    man.check("tables_written", True, True, True)
    man.write(out)
    print(f"kernel tables written to {out}")
    return EXIT_PASS


def _write_solution(out: Path, u: SampledField, slices=(0.5, 1.0, 2.0)) -> None:
    write_field(out / "u_plus", u)
    g = u.grid
    if g.m != 2:
        return
    for xm in slices:
        k = int(np.argmin(np.abs(g.x - xm)))
        write_csv(out / f"u_plus_xm_{xm:g}.csv", ["x_p", "re", "im"],
                  [(x, v.real, v.imag) for x, v in zip(g.x, u.values[:, k])], {"x_m": float(g.x[k])})


def cmd_solve(cfg: Dict, out: Optional[Path]) -> int:
    sym, pair, cone, grid = build_problem(cfg)
    num = _numerics(cfg, grid)
    problem = cfg.get("problem", {"kind": "cone-dirichlet"})
    kind = problem["kind"]
    man = Manifest("solve", cfg)
    man.convention(mask_radius_dxi=num["mask_radius"], epsilon=num["epsilon"],
                   tau=num.get("tau"), c_m=poisson_constant(grid.m),
                   trace_rule="mean of one-sided limits")
    if kind == "halfspace-dirichlet":
        if cone.a != 0:
            raise ConfigError("field cone.a: halfspace-dirichlet needs a = 0")
        g = boundary_data(cfg, grid)
        u = solve_dirichlet_halfspace(g, grid)
        if out is not None:
            _write_solution(out, u)
        if grid.m == 2:
            scale = float(cfg.get("mutations", {}).get("c_m_scale", 1.0))
            direct = poisson_convolution(g, grid, c2=poisson_constant(2) * scale)
            sl = (slice(None), slice(grid.origin + 1, None))
            err = relative_l2(u.values[sl], direct.values[sl])
            man.check("poisson_rel_l2", err, TOLERANCES["poisson_rel_l2"], err <= TOLERANCES["poisson_rel_l2"])
    elif kind == "cone-dirichlet":
        g = boundary_data(cfg, grid)
        sol = solve_dirichlet_cone(pair, cone, g, grid, method=num["method"], trace=num["trace"])
        man.data["solution"] = {k: v for k, v in sol.to_dict().items() if k != "potential"}
        if sol.general is not None and sol.general.fill is not None:
            man.data["fill"] = sol.general.fill.to_dict()
        if out is not None:
            _write_solution(out, sol.u_plus)
            write_array(out / "density", sol.density.values,
                        {"m": grid.m - 1, "L": grid.L, "N": grid.N, "rep": [sol.density.rep] * (grid.m - 1)})
            if sol.system is not None:
                write_array(out / "dirichlet_system", sol.system.matrix,
                            {"kind": "dirichlet_system", "m": grid.m, "L": grid.L, "N": grid.N,
                             "rep": ["frequency"] * (grid.m - 1), "unknown": sol.system.unknown,
                             "trace": sol.system.trace,
                             "condition_estimate": sol.system.condition_estimate})
        man.check("leakage", sol.leakage, TOLERANCES["leakage"], sol.leakage <= TOLERANCES["leakage"])
        man.check("trace_defect", sol.trace_defect, TOLERANCES["trace_defect"],
                  sol.trace_defect <= TOLERANCES["trace_defect"])
        try:
            res = interior_residual(pair, sol.u_plus, cone)
            man.data["interior_residual"] = res
        except ConewaveError:
            pass
    elif kind == "cone-oblique":
        g = boundary_data(cfg, grid)
        sol = oblique_variant(pair, cone, int(problem["k"]), g, grid, trace=num["trace"])
        man.data["solution"] = {k: v for k, v in sol.to_dict().items() if k != "derivative_spectrum"}
        if out is not None:
            _write_solution(out, sol.u_plus)
            write_array(out / "dirichlet_system", sol.system.matrix,
                        {"kind": "oblique_system", "m": grid.m, "L": grid.L, "N": grid.N,
                         "rep": ["frequency"] * (grid.m - 1), "axis": int(problem["k"]),
                         "condition_estimate": sol.system.condition_estimate})
        man.check("solve_residual", sol.trace_defect, TOLERANCES["oblique_solve_residual"],
                  sol.trace_defect <= TOLERANCES["oblique_solve_residual"])
    elif kind == "general-solution":
        n = int(problem.get("n", 1))
        order = ProblemOrder.from_s_kappa(pair.kappa - n, pair.kappa)
        lf = dft_forward(rhs_field(cfg, grid))
        dens = [BoundaryDensity(k, boundary_data(cfg, grid)) for k in range(1, n + 1)]
        gamma = num.get("gamma")
        sol = general_solution(pair, cone, order, lf, dens, projector=num["projector"],
                               tau=num.get("tau"), gamma=gamma)
        man.convention(projector=num["projector"], gamma=gamma)
        u = sol.space()
        if out is not None:
            _write_solution(out, u)
        diff = pair.plus(*grid.nodes(FREQUENCY)) * sol.spectrum.values \
            - q_weight(order.n).on_grid(grid) * sol.f_plus.values
        flat = t_transform(dft_inverse(SampledField(grid, diff, FREQUENCY)), cone, 1)
        frac = layer_mass_fraction(flat, 1)
        man.check("support_fraction", frac, TOLERANCES["support_fraction"],
                  frac >= TOLERANCES["support_fraction"])
        if sol.fill is not None:
            man.data["fill"] = sol.fill.to_dict()
    else:
        raise ConfigError(f"field problem.kind: unknown kind {kind!r}")
    path = man.write(out)
    print(json.dumps({"passed": man.passed, "checks": man.data["checks"], "manifest": str(path) if path else None},
                     default=_jsonable, sort_keys=True))
    return EXIT_PASS if man.passed else EXIT_FAIL


def cmd_verify(cfg: Dict, out: Optional[Path], only: Optional[List[int]] = None) -> int:
    man = Manifest("verify", cfg)
    man.convention(c_m=poisson_constant(2), mask_radius_dxi=DEFAULT_MASK_RADIUS)
    results = run_suite(only, mutations=cfg.get("mutations"), echo=print)
    for r in results:
        man.check(f"criterion_{r.number}_{r.name.replace(' ', '_')}", r.measured, r.tolerance, r.passed,
                  runtime=r.runtime)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    man.write(out)
    return EXIT_PASS if man.passed else EXIT_FAIL


COMMANDS = {
    "check-factorization": cmd_check_factorization,
    "kernels": cmd_kernels,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conewave", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration (optional for verify)")
    p.add_argument("--projector", choices=["indicator", "gm-quadrature"])
    p.add_argument("--tau", type=float, help="damping of the kernel-sum projector")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--only", type=int, nargs="+", help="verify: run only these criteria")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _limit_threads() -> None:
    n = os.environ.get("CONEWAVE_THREADS")
    if not n:
        return
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(int(n))
    except ImportError:
        logger.warning("CONEWAVE_THREADS set but threadpoolctl is not installed")


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _limit_threads()
    try:
        if args.command != "verify" and args.config is None:
            raise ConfigError("--config is required for this command")
        cfg = load_config(args.config, {"projector": args.projector, "tau": args.tau})
        out = _out_dir(args, cfg)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.only)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, ResourceError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConewaveError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
