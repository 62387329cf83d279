"""Batch front-end: JSON-configured verification, spectrum, and solver runs.

Usage:
    belavin run CONFIG.json [--seed K] [--out PATH] [--jobs J] [--csv PATH]

The config is a JSON tree; complex numbers are two-element [re, im] arrays
(bare numbers are accepted as reals).  Exit status: 0 when every recorded
check passes, 1 when some numeric check fails, 2 for config errors.  Reports
are UTF-8 JSON with deterministic field order and timings kept in their own
section, so identical config + seed reproduce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys as _sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np

from . import __version__
from . import bae
from .elliptic import ModularData
from .report import Report, jsonable
from .rmatrix import (
    RMatrixHandle,
    check_crossing,
    check_fusion,
    check_qybe,
    check_r_quasiperiod,
    check_unitarity,
    check_zn_symmetry,
)
from .spectrum import diagonalize_family, energies, hamiltonian
from .tables import BENCHMARK_PARAMS, TABLE1_ROWS, TABLE2_ROWS
from .tq import (
    Z3_PERIODIC,
    Z3_REDUCED,
    Z3_TWISTED,
    BetheConfiguration,
    default_root_counts,
)
from .transfer import (
    ChainSpec,
    check_fusion_identities,
    check_product_identity,
    check_transfer_quasiperiod,
    fused_transfer,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "run", "reproduce_table", "main"]

DEFAULT_SEED = 20240901
_OUT_DIR_VAR = "BELAVIN_OUT_DIR"


class ConfigError(ValueError):
    pass


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


class RunConfig:
    """Validated run configuration (model, task, solver, sectors, output)."""

    def __init__(self, tree: dict):
        if not isinstance(tree, dict):
            raise ConfigError("config root must be an object")
        model = tree.get("model")
        if not isinstance(model, dict):
            raise ConfigError("missing 'model' block")
        for key in ("n", "w", "tau"):
            if key not in model:
                raise ConfigError(f"model block lacks '{key}'")
        self.n = int(model["n"])
        self.w = _as_complex(model["w"], "model.w")
        self.tau = _as_complex(model["tau"], "model.tau")
        thetas = model.get("thetas")
        if thetas is None:
            nsites = int(model.get("N", 1))
            thetas = [0.0] * nsites
        self.thetas = tuple(_as_complex(t, "model.thetas") for t in thetas)
        if "N" in model and int(model["N"]) != len(self.thetas):
            raise ConfigError("model.N disagrees with len(model.thetas)")
        boundary = model.get("boundary", {"type": "periodic"})
        btype = boundary.get("type", "periodic")
        if btype == "periodic":
            self.twist = None
        elif btype == "twisted":
            alpha = boundary.get("alpha")
            if not isinstance(alpha, (list, tuple)) or len(alpha) != 2:
                raise ConfigError("twisted boundary needs alpha: [a1, a2]")
            self.twist = (int(alpha[0]) % self.n, int(alpha[1]) % self.n)
        else:
            raise ConfigError(f"unknown boundary type {btype!r}")

        task = tree.get("task")
        if isinstance(task, str):
            task = {"name": task}
        if not isinstance(task, dict) or "name" not in task:
            raise ConfigError("missing 'task' block with a 'name'")
        self.task = dict(task)
        known = {"verify-rmatrix", "verify-operators", "spectrum", "solve-bae", "check-tq", "reproduce"}
        if self.task["name"] not in known:
            raise ConfigError(f"unknown task {self.task['name']!r} (known: {sorted(known)})")

        solver = tree.get("solver", {})
        self.starts = int(solver.get("starts", 200))
        self.tolerance = float(solver.get("tolerance", 1e-10))
        if self.tolerance <= 0:
            raise ConfigError("solver.tolerance must be positive")
        self.max_nfev = int(solver.get("max_nfev", 900))
        self.seed = int(solver.get("seed", DEFAULT_SEED))
        self.explicit_seeds = solver.get("seeds", [])

        sectors = tree.get("sectors", {})
        self.ls = tuple(int(v) for v in sectors.get("ls", ())) or None
        self.ms = tuple(int(v) for v in sectors.get("ms", ())) or None
        self.sweep = sectors.get("sweep", [])

        self.output = tree.get("output")
        self.echo = tree

    def model_data(self) -> ModularData:
        return ModularData(self.tau, self.n, self.w)

    def chain(self) -> ChainSpec:
        return ChainSpec(self.model_data(), self.thetas, twist=self.twist)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            tree = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig(tree)


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


def _task_verify_rmatrix(cfg: RunConfig, report: Report, rng) -> None:
    handle = RMatrixHandle(cfg.model_data())
    npts = int(cfg.task.get("points", 20))
    tol = float(cfg.task.get("tolerance", 1e-10))
    pts = [complex(rng.uniform(-0.45, 0.45), rng.uniform(-0.35, 0.35)) for _ in range(npts)]
    rm, rp = check_fusion(handle)
    report.add("fusion-annihilation-minus", rm, tol)
    report.add("fusion-annihilation-plus", rp, tol)
    p0 = np.abs(
        handle.r(0.0).mat
        - np.eye(cfg.n * cfg.n).reshape(cfg.n, cfg.n, cfg.n, cfg.n).swapaxes(0, 1).reshape(cfg.n**2, cfg.n**2)
    ).max()
    report.add("initial-condition", float(p0), tol)
    for i, u in enumerate(pts):
        u2, u3 = pts[(i + 1) % npts], pts[(i + 2) % npts]
        report.add(f"qybe u={i}", check_qybe(handle, u, u2, u3), tol)
        resid, _ = check_unitarity(handle, u)
        report.add(f"unitarity u={i}", resid, tol)
        report.add(f"crossing u={i}", check_crossing(handle, u), tol)
        report.add(f"zn-symmetry u={i}", check_zn_symmetry(handle, u), tol)
        report.add(f"quasi-period u={i}", check_r_quasiperiod(handle, u), tol)


def _task_verify_operators(cfg: RunConfig, report: Report, rng) -> None:
    spec = cfg.chain()
    tol = float(cfg.task.get("tolerance", 1e-9))
    report.extend(check_fusion_identities(spec, tol, tol))
    u, v = (complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.3, 0.3)) for _ in range(2))
    for m in range(1, spec.md.n + 1):
        report.add(f"quasi-period m={m}", check_transfer_quasiperiod(spec, m, u), tol)
    lhs, rhs = check_product_identity(spec)
    report.add("product-identity", abs(lhs - rhs) / max(abs(rhs), 1e-12), tol)
    mats = {(m): fused_transfer(spec, m, u).mat for m in range(1, spec.md.n + 1)}
    mats_v = {(m): fused_transfer(spec, m, v).mat for m in range(1, spec.md.n + 1)}
    for i in range(1, spec.md.n + 1):
        for j in range(1, spec.md.n + 1):
            a, b = mats[i], mats_v[j]
            denom = max(np.linalg.norm(a) * np.linalg.norm(b), 1e-12)
            report.add(
                f"commutativity [{i},{j}]",
                float(np.linalg.norm(a @ b - b @ a) / denom),
                1e-10,
            )


def _spectrum_payload(spec: ChainSpec, fam, en) -> list[dict]:
    out = []
    for rec in en.records:
        out.append(
            {
                "state": rec.state,
                "E": rec.energy,
                "log-derivative-proxy": rec.proxy,
                "residual": rec.residual,
            }
        )
    return out


def _task_spectrum(cfg: RunConfig, report: Report, rng) -> None:
    spec = cfg.chain()
    if any(abs(t) > 1e-14 for t in cfg.thetas):
        raise ConfigError("spectrum task requires the homogeneous chain (all thetas zero)")
    fam = diagonalize_family(spec)
    ham = hamiltonian(spec)
    en = energies(fam, ham)
    report.add("hamiltonian-consistency", ham.consistency, 1e-8)
    for m in range(1, spec.md.n + 1):
        report.add(f"joint-eigenbasis m={m}", float(fam.lambda_residuals(m, fam.probe_points[0]).max()), 1e-8)
    report.spectra = _spectrum_payload(spec, fam, en)
    report.extras["fitted_constant"] = en.fitted_constant
    report.extras["levels"] = en.levels()


def _config_payload(cfg_obj: BetheConfiguration, extra: dict | None = None) -> dict:
    out = {
        "kind": cfg_obj.kind,
        "roots": [list(fam) for fam in cfg_obj.roots],
        "phis": list(cfg_obj.phis),
        "cs": list(cfg_obj.cs),
        "ls": list(cfg_obj.ls),
        "ms": list(cfg_obj.ms),
        "n1": cfg_obj.n1,
        "selection_branch": cfg_obj.selection_branch,
    }
    if extra:
        out.update(extra)
    return out


def _parse_configuration(cfg: RunConfig, tree: dict) -> BetheConfiguration:
    if not isinstance(tree, dict):
        raise ConfigError("task.configuration must be an object")
    try:
        roots = tuple(
            tuple(_as_complex(z, "configuration.roots") for z in fam) for fam in tree["roots"]
        )
        phis = tuple(_as_complex(z, "configuration.phis") for z in tree["phis"])
        cs = tuple(_as_complex(z, "configuration.cs") for z in tree.get("cs", ()))
        return BetheConfiguration(
            tree.get("kind", Z3_PERIODIC),
            cfg.model_data(),
            roots,
            phis,
            cs,
            ls=tuple(int(v) for v in tree["ls"]),
            ms=tuple(int(v) for v in tree["ms"]),
            n1=int(tree.get("n1", 0)),
            selection_branch=tree.get("selection_branch"),
        )
    except KeyError as exc:
        raise ConfigError(f"task.configuration lacks {exc}") from exc


def _task_check_tq(cfg: RunConfig, report: Report, rng) -> None:
    spec = cfg.chain()
    cfg_obj = _parse_configuration(cfg, cfg.task.get("configuration"))
    fam = diagonalize_family(spec) if cfg.task.get("against_spectrum", True) else None
    sub = bae.verify_solution(
        cfg_obj,
        spec,
        fam,
        residual_tol=float(cfg.task.get("residual_tol", 1e-10)),
        functional_tol=float(cfg.task.get("functional_tol", 1e-8)),
        match_tol=float(cfg.task.get("match_tol", 1e-8)),
    )
    report.extend(sub)
    report.extras.update(sub.extras)


def _default_sectors(cfg: RunConfig, kind: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    nsec = 2 if kind in (Z3_REDUCED, "z3-degenerate-w") else 2 * cfg.n - 2
    ls = cfg.ls if cfg.ls is not None else (0,) * nsec
    ms = cfg.ms if cfg.ms is not None else (0,) * nsec
    if len(ls) != nsec or len(ms) != nsec:
        raise ConfigError(f"sectors for kind {kind} need {nsec} integers")
    return ls, ms


def _solve_system(sys_obj, seeds, options, jobs: int):
    if jobs <= 1:
        return bae.solve_detailed(sys_obj, seeds, options)
    outcome = bae.SolveOutcome()
    raw = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(bae._solve_one, sys_obj, np.asarray(x0), options) for x0 in seeds]
        for idx, fut in enumerate(futures):
            outcome.n_started += 1
            x, rinf, _ = fut.result()
            if x is None or rinf > options.tol:
                outcome.failures.append(f"seed {idx}: residual {rinf:.2e}")
                continue
            outcome.n_converged += 1
            _, k = bae.relation_values(sys_obj, x)
            raw.append((rinf, bae.vector_to_config(sys_obj, x, selection_branch=k)))
    raw.sort(key=lambda pair: pair[0])
    outcome.configurations = bae._dedupe(sys_obj, [c for _, c in raw])
    return outcome


def _warm_seeds(fam, sys_obj, rng, states=None, fit_nfev: int = 700, restarts: int = 4):
    seeds = []
    for state in states if states is not None else range(fam.size):
        try:
            seeds.append(
                bae.seed_from_spectrum(fam, state, sys_obj, rng, fit_nfev=fit_nfev, restarts=restarts)
            )
        except bae.FitDiverged:
            continue
    return seeds


def _task_solve_bae(cfg: RunConfig, report: Report, rng, jobs: int = 1) -> None:
    spec = cfg.chain()
    kind = cfg.task.get("kind", Z3_TWISTED if cfg.twist else Z3_PERIODIC)
    counts = cfg.task.get("counts")
    if counts is None:
        if kind == Z3_REDUCED:
            ell = spec.N // 3
            counts = (2 * ell, ell)
        else:
            counts = default_root_counts(cfg.n, spec.N)
    sweep = cfg.sweep or [None]
    options = bae.SolveOptions(tol=cfg.tolerance, max_nfev=cfg.max_nfev)
    fam = diagonalize_family(spec)
    for si, sector in enumerate(sweep):
        if sector is None:
            ls, ms = _default_sectors(cfg, kind)
        else:
            ls = tuple(int(v) for v in sector["ls"])
            ms = tuple(int(v) for v in sector["ms"])
        sys_obj = bae.BAESystem(kind=kind, spec=spec, ls=ls, ms=ms, counts=tuple(counts))
        seeds = [np.asarray(s, dtype=float) for s in cfg.explicit_seeds]
        seeds.extend(_warm_seeds(fam, sys_obj, rng))
        while len(seeds) < cfg.starts:
            seeds.append(bae.random_start(sys_obj, rng))
        outcome = _solve_system(sys_obj, seeds[: cfg.starts], options, jobs)
        prefix = f"sector{si} " if len(sweep) > 1 else ""
        report.add(f"{prefix}solver-converged", 0.0 if outcome.configurations else 1.0, 0.5)
        report.extras[f"{prefix}n_started"] = outcome.n_started
        report.extras[f"{prefix}n_converged"] = outcome.n_converged
        for cfg_found in outcome.configurations:
            ver = bae.verify_solution(cfg_found, spec, fam, residual_tol=cfg.tolerance)
            payload = _config_payload(
                cfg_found,
                {
                    "sector_index": si,
                    "matched_state": ver.extras.get("matched_state"),
                    "ed_deviation": ver.extras.get("ed_deviation"),
                    "residual": max(r.residual for r in ver.checks if r.name == "bae-residual-max"),
                },
            )
            report.solutions.append(payload)


def reproduce_table(
    which: int,
    seed: int = DEFAULT_SEED,
    starts: int = 200,
    jobs: int = 1,
    report: Report | None = None,
) -> Report:
    """Full pipeline on the bundled n=3, N=2 benchmark: diagonalize, check the
    energy table, feed every reference row through the residual system, refine
    it, match it to its spectral branch, and run the multi-start solver to
    measure level coverage."""
    if which not in (1, 2):
        raise ConfigError("reproduce task needs table 1 or 2")
    rows = TABLE1_ROWS if which == 1 else TABLE2_ROWS
    kind = Z3_PERIODIC if which == 1 else Z3_TWISTED
    twist = None if which == 1 else (1, 0)
    energy_tol = 1e-4 if which == 1 else 1e-3
    md = ModularData(BENCHMARK_PARAMS["tau"], BENCHMARK_PARAMS["n"], BENCHMARK_PARAMS["w"])
    spec = ChainSpec(md, BENCHMARK_PARAMS["thetas"], twist=twist)
    rng = np.random.default_rng(seed)
    rep = report if report is not None else Report(tool_version=__version__)
    rep.config.setdefault("task", {"name": "reproduce", "table": which})

    t0 = time.perf_counter()
    fam = diagonalize_family(spec)
    ham = hamiltonian(spec)
    en = energies(fam, ham)
    rep.timings["diagonalize"] = time.perf_counter() - t0

    levels = en.levels(tol=1e-5)
    ref_levels = sorted({row.energy for row in rows}, key=lambda z: (z.real, z.imag))
    rep.extras["levels"] = levels
    rep.extras["reference_levels"] = ref_levels
    rep.add("level-count", abs(len(levels) - len(ref_levels)), 0.5)
    for i in range(1, len(ref_levels)):
        diff = levels[i] - levels[0]
        ref = ref_levels[i] - ref_levels[0]
        rep.add(f"energy-difference {i+1}-1", abs(diff - ref), energy_tol)

    t0 = time.perf_counter()
    options = bae.SolveOptions()
    sector = dict(ms=BENCHMARK_PARAMS["ms"], ls=BENCHMARK_PARAMS["ls"])
    sys_obj = bae.BAESystem(
        kind=kind, spec=spec, ls=sector["ls"], ms=sector["ms"], counts=(2, 2, 2, 2)
    )
    refined_rows = []
    for i, row in enumerate(rows, start=1):
        cfg_row = BetheConfiguration(
            kind, md, row.roots, (row.phi1, row.phi2), (row.c1, row.c2),
            ls=sector["ls"], ms=sector["ms"],
        )
        x0 = bae.config_to_vector(sys_obj, cfg_row)
        try:
            raw = bae.residual_inf(sys_obj, x0)
        except (bae.PoleInResidual,):
            raw = np.inf
        rep.add(f"row {i} printed residual", raw, 5e-3)
        x, rinf, _ = bae._solve_one(sys_obj, x0, options)
        rep.add(f"row {i} refined residual", rinf if x is not None else np.inf, 1e-10)
        if x is None:
            continue
        _, k = bae.relation_values(sys_obj, x)
        cfg_ref = bae.vector_to_config(sys_obj, x, selection_branch=k)
        refined_rows.append(cfg_ref)
        ver = bae.verify_solution(cfg_ref, spec, fam)
        dev = ver.extras.get("ed_deviation", np.inf)
        rep.add(f"row {i} spectral match", dev, 1e-8)
        rep.solutions.append(
            _config_payload(
                cfg_ref,
                {
                    "source": f"reference-row-{i}",
                    "matched_state": ver.extras.get("matched_state"),
                    "ed_deviation": dev,
                    "level": row.level,
                },
            )
        )
    rep.timings["refine_rows"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    state_level = {
        rec.state: int(np.argmin([abs(rec.energy - l) for l in levels])) + 1
        for rec in en.records
    }
    n_spent = 0
    found: list[BetheConfiguration] = []
    covered: set[int] = set()
    solution_meta: list[dict] = []
    n_converged = 0

    def absorb(outcome):
        nonlocal n_converged
        n_converged += outcome.n_converged
        for cfg_found in outcome.configurations:
            if any(bae.same_configuration(cfg_found, c) for c in found):
                continue
            ver = bae.verify_solution(cfg_found, spec, fam)
            state = ver.extras.get("matched_state")
            dev = ver.extras.get("ed_deviation", np.inf)
            lev = state_level.get(state)
            if dev <= 1e-8 and lev is not None:
                covered.add(lev)
            found.append(cfg_found)
            solution_meta.append(
                _config_payload(
                    cfg_found,
                    {"source": "solver", "matched_state": state, "ed_deviation": dev, "level": lev},
                )
            )

    # first pass: one warm seed per state
    warm = _warm_seeds(fam, sys_obj, rng)
    n_spent += len(warm)
    absorb(_solve_system(sys_obj, warm, options, jobs))

    # coverage loop: retry the states of any level the solver has not hit yet
    for _ in range(4):
        missing = [l for l in range(1, len(levels) + 1) if l not in covered]
        if not missing or n_spent >= starts:
            break
        retry_states = [s for s, l in state_level.items() if l in missing]
        warm = _warm_seeds(fam, sys_obj, rng, states=retry_states, restarts=5)
        if not warm:
            continue
        n_spent += len(warm)
        absorb(_solve_system(sys_obj, warm, options, jobs))

    # burn the remaining budget on random starts (the cold-start success rate
    # is part of what the run measures)
    n_random = max(0, starts - n_spent)
    cold_opts = bae.SolveOptions(tol=options.tol, max_nfev=400, polish_nfev=200)
    if n_random:
        cold = [bae.random_start(sys_obj, rng) for _ in range(n_random)]
        absorb(_solve_system(sys_obj, cold, cold_opts, jobs))
        n_spent += n_random
    rep.timings["solve"] = time.perf_counter() - t0
    rep.extras["n_started"] = n_spent
    rep.extras["n_converged"] = n_converged
    rep.add("solver distinct configurations", float(3 - min(3, len(found))), 0.5)
    rep.solutions.extend(solution_meta)
    rep.add("solver level coverage", float(len(levels) - len(covered)), 0.5)
    rep.extras["levels_covered"] = sorted(covered)

    # distance from each reference row to the nearest solver-found orbit
    for i, cfg_row in enumerate(refined_rows, start=1):
        dists = [_orbit_distance(cfg_row, cfg_found) for cfg_found in found]
        rep.extras[f"row {i} nearest solver distance"] = min(dists) if dists else None
    return rep


def _orbit_distance(a: BetheConfiguration, b: BetheConfiguration) -> float:
    """Max distance between canonical root multisets (gauge-reduced)."""
    worst = 0.0
    for fa, fb in zip(bae.canonical_roots(a), bae.canonical_roots(b)):
        if len(fa) != len(fb):
            return np.inf
        used = [False] * len(fb)
        for za in fa:
            best, best_idx = np.inf, None
            for idx, zb in enumerate(fb):
                if used[idx]:
                    continue
                d = za - zb
                d = complex(d.real - round(d.real), d.imag)
                d = d - round(d.imag / a.md.tau.imag) * a.md.tau
                d = complex(d.real - round(d.real), d.imag)
                if abs(d) < best:
                    best, best_idx = abs(d), idx
            if best_idx is None:
                return np.inf
            used[best_idx] = True
            worst = max(worst, best)
    return worst


def run(cfg: RunConfig, jobs: int = 1, seed: int | None = None) -> tuple[Report, int]:
    """Dispatch a parsed config; returns (report, exit status)."""
    report = Report(config=jsonable(cfg.echo), tool_version=__version__)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    name = cfg.task["name"]
    t0 = time.perf_counter()
    if name == "verify-rmatrix":
        _task_verify_rmatrix(cfg, report, rng)
    elif name == "verify-operators":
        _task_verify_operators(cfg, report, rng)
    elif name == "spectrum":
        _task_spectrum(cfg, report, rng)
    elif name == "check-tq":
        _task_check_tq(cfg, report, rng)
    elif name == "solve-bae":
        _task_solve_bae(cfg, report, rng, jobs)
    elif name == "reproduce":
        reproduce_table(
            int(cfg.task.get("table", 1)),
            seed=cfg.seed if seed is None else seed,
            starts=cfg.starts,
            jobs=jobs,
            report=report,
        )
    report.timings["total"] = time.perf_counter() - t0
    return report, (0 if report.passed else 1)


def _write_report(report: Report, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=1)
        fh.write("\n")


def _write_csv(report: Report, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "E_re", "E_im", "proxy_re", "proxy_im", "residual"])
        for rec in report.spectra:
            e = rec.get("E", 0j)
            p = rec.get("log-derivative-proxy", 0j)
            writer.writerow(
                [rec.get("state"), e.real, e.imag, p.real, p.imag, rec.get("residual")]
            )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="belavin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a JSON-configured run")
    runp.add_argument("config", help="path to the JSON run configuration")
    runp.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    runp.add_argument("--out", default=None, help="report output path")
    runp.add_argument("--jobs", type=int, default=1, help="parallel solver workers")
    runp.add_argument("--csv", default=None, help="also emit the spectra table as CSV")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2

    try:
        report, status = run(cfg, jobs=args.jobs, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2

    out_path = args.out or cfg.output
    if out_path is None:
        out_dir = os.environ.get(_OUT_DIR_VAR, ".")
        out_path = os.path.join(out_dir, "report.json")
    _write_report(report, out_path)
    if args.csv:
        _write_csv(report, args.csv)

    n_pass = sum(1 for c in report.checks if c.passed)
    print(f"{len(report.checks)} checks, {n_pass} passed, report -> {out_path}")
    for rec in report.failures:
        print(f"FAIL {rec.name}: residual {rec.residual:.3e} > {rec.tolerance:.1e}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
