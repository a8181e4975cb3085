"""Experiment runner and command-line interface.

Experiment spec files are INI files read with :mod:`configparser`::

    [experiment]
    name = table1
    kind = optimize            # or: baseline
    n_t = 5
    c_bits = 2
    b_max = 4
    mu = 0.1
    alpha = 0.01
    sigma2 = 1
    i_aic_db = -10             # base I_AIC, dB
    rho = 1
    sweep = i_aic              # one of i_aic, alpha, c_bits, mu, rho
    values = -20, -15, -10, -5, 0
    series = alpha             # optional outer axis, same choices
    series_values = 0.01, 0.1
    engine = closed            # closed, mc or both
    trials = 20000
    seed = 2014

    # optional expected (M, B) per sweep point, one line per series value
    [golden]
    series_0 = 4/0, 2/4, 2/1, 2/0, 2/0
    series_1 = 4/0, 4/0, 4/0, 2/4, 2/1

I_AIC values (base, sweep or series) are in dB; every other number is
linear. The operating point always comes from the analytical optimizers,
so ``mc`` and ``both`` are the same: both add simulated rates at the
chosen (M, B).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from . import closed_form as cf
from . import montecarlo as mc
from .errors import CogMisoError, SpecValidationError
from .optimizer import optimize_exhaustive, optimize_relaxed

SWEEP_PARAMS = ("i_aic", "alpha", "c_bits", "mu", "rho")
ENGINES = ("closed", "mc", "both")
KINDS = ("optimize", "baseline")

OPTIMIZE_COLUMNS = ["series_value", "sweep_value", "M_opt_exh", "B_opt_exh", "fuf_exh",
                    "M_opt_rel", "B_opt_rel", "fuf_rel", "fuf_dB",
                    "sim_rate_mean", "sim_rate_stderr"]
BASELINE_COLUMNS = ["series_value", "sweep_value", "M_opt", "B_opt", "fuf_proposed",
                    "fuf_fixed", "fuf_proposed_dB", "fuf_fixed_dB", "gain_dB",
                    "sim_rate_proposed", "sim_rate_fixed"]


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else float("nan")


@dataclass
class ExperimentSpec:
    name: str
    base: cf.SystemConfig
    sweep_param: str
    sweep_values: list
    series_param: Optional[str] = None
    series_values: list = field(default_factory=lambda: [None])
    engine: str = "closed"
    trials: int = 20_000
    seed: int = 0
    output: Optional[Path] = None
    kind: str = "optimize"
    delayed: bool = False
    golden: dict = field(default_factory=dict)  # series index -> [(M, B), ...]
    workers: int = 1

    def validate(self):
        problems = []
        if self.sweep_param not in SWEEP_PARAMS:
            problems.append(f"sweep: {self.sweep_param!r} not in {SWEEP_PARAMS}")
        if not self.sweep_values:
            problems.append("values: sweep list is empty")
        if self.series_param is not None:
            if self.series_param not in SWEEP_PARAMS:
                problems.append(f"series: {self.series_param!r} not in {SWEEP_PARAMS}")
            if self.series_param == self.sweep_param:
                problems.append("series: must differ from sweep")
            if not self.series_values or None in self.series_values:
                problems.append("series_values: list is empty")
        if self.engine not in ENGINES:
            problems.append(f"engine: {self.engine!r} not in {ENGINES}")
        if self.kind not in KINDS:
            problems.append(f"kind: {self.kind!r} not in {KINDS}")
        if self.trials < 1:
            problems.append(f"trials: must be >= 1, got {self.trials}")
        for idx, expected in self.golden.items():
            if idx >= len(self.series_values):
                problems.append(f"golden: series_{idx} has no matching series value")
            elif len(expected) != len(self.sweep_values):
                problems.append(f"golden: series_{idx} has {len(expected)} entries, "
                                f"expected {len(self.sweep_values)}")
        if problems:
            raise SpecValidationError(problems)
        # every sweep point must itself be a valid configuration
        bad = []
        for s in self.series_values:
            for v in self.sweep_values:
                try:
                    self.config_at(s, v)
                except CogMisoError as exc:
                    bad.append(f"{self.sweep_param}={v}: {exc}")
        if bad:
            raise SpecValidationError(bad)
        return self

    def config_at(self, series_value, sweep_value) -> cf.SystemConfig:
        changes = {}
        if self.series_param is not None:
            changes.update(_param_change(self.series_param, series_value))
        changes.update(_param_change(self.sweep_param, sweep_value))
        return self.base.replace(**changes)


def _param_change(param, value):
    if param == "i_aic":
        return {"i_aic": db_to_linear(value)}
    if param == "c_bits":
        return {"c_bits": int(value)}
    return {param: float(value)}


def _floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _boolean(text):
    value = configparser.ConfigParser.BOOLEAN_STATES.get(text.strip().lower())
    if value is None:
        raise ValueError(f"not a boolean: {text!r}")
    return value


def _pairs(text):
    out = []
    for tok in text.replace(",", " ").split():
        m, b = tok.split("/")
        out.append((int(m), int(b)))
    return out


def parse_spec(text: str, source: str = "<string>") -> ExperimentSpec:
    """Parse an INI experiment spec; raises SpecValidationError listing problems."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise SpecValidationError([f"{source}: {exc}"]) from exc
    if not parser.has_section("experiment"):
        raise SpecValidationError([f"{source}: missing [experiment] section"])
    sec = parser["experiment"]
    problems = []

    def get(key, conv, default=None):
        if key not in sec:
            return default
        try:
            return conv(sec[key])
        except (TypeError, ValueError) as exc:
            problems.append(f"{key}: {exc}")
            return default

    base_kwargs = {
        "n_t": get("n_t", int, 5),
        "c_bits": get("c_bits", int, 2),
        "b_max": get("b_max", int, 4),
        "mu": get("mu", float, 0.1),
        "alpha": get("alpha", float, 0.01),
        "sigma2": get("sigma2", float, 1.0),
        "i_aic": db_to_linear(get("i_aic_db", float, -10.0)),
        "rho": get("rho", float, 1.0),
    }
    try:
        base = cf.SystemConfig(**base_kwargs)
    except CogMisoError as exc:
        problems.append(f"base config: {exc}")
        base = None
    sweep_param = get("sweep", str.strip, "")
    sweep_values = get("values", _floats, [])
    series_param = get("series", str.strip, None) or None
    series_values = get("series_values", _floats, []) if series_param else [None]
    golden = {}
    if parser.has_section("golden"):
        for key, val in parser["golden"].items():
            idx = 0 if key == "golden" else None
            if key.startswith("series_"):
                try:
                    idx = int(key.split("_", 1)[1])
                except ValueError:
                    idx = None
            if idx is None:
                problems.append(f"golden: unexpected key {key!r}")
                continue
            try:
                golden[idx] = _pairs(val)
            except ValueError:
                problems.append(f"golden: cannot parse {key} = {val!r}")
    uses_rho = (sweep_param == "rho" or series_param == "rho" or base_kwargs["rho"] != 1.0)
    output = get("output", str.strip, None)
    spec = ExperimentSpec(
        name=get("name", str.strip, Path(source).stem),
        base=base,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        series_param=series_param,
        series_values=series_values,
        engine=get("engine", str.strip, "closed"),
        trials=get("trials", int, 20_000),
        seed=get("seed", int, 0),
        output=Path(output) if output else None,
        kind=get("kind", str.strip, "optimize"),
        delayed=get("delayed", _boolean, uses_rho),
        golden=golden,
    )
    if problems:
        raise SpecValidationError(problems)
    return spec.validate()


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecValidationError([f"{path}: {exc}"]) from exc
    return parse_spec(text, source=str(path))


def shipped_specs() -> list:
    """Paths of the reference-table specs bundled with the package."""
    folder = resources.files("cogmiso") / "experiments"
    return sorted(Path(str(p)) for p in folder.iterdir() if p.name.endswith(".ini"))


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def _points(spec):
    return [(s, v) for s in spec.series_values for v in spec.sweep_values]


def _map_points(fn, spec):
    points = _points(spec)
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def _blank(x):
    return "" if x is None else x


def run_experiment(spec: ExperimentSpec) -> list:
    """Optimize (M, B) at every sweep point; returns one dict per row.

    Rows come back in (series, sweep) order. Exhaustive and relaxed
    optimizer outputs are both recorded; with a Monte Carlo engine the
    simulated mean sum rate at the exhaustive optimum is added.
    """
    spec.validate()
    if spec.kind == "baseline":
        return compare_fixed_baseline(spec)

    def point(p):
        s, v = p
        cfg = spec.config_at(s, v)
        exh = optimize_exhaustive(cfg, spec.delayed)
        rel = optimize_relaxed(cfg, spec.delayed)
        row = {
            "series_value": _blank(s), "sweep_value": v,
            "M_opt_exh": exh.mode, "B_opt_exh": exh.b_bits, "fuf_exh": exh.utility,
            "M_opt_rel": rel.mode, "B_opt_rel": rel.b_bits, "fuf_rel": rel.utility,
            "fuf_dB": linear_to_db(exh.utility),
            "sim_rate_mean": "", "sim_rate_stderr": "",
            "_grid": exh.grid,
        }
        if spec.engine != "closed":
            sim = mc.simulate_sum_rate(cfg, exh.mode, exh.b_bits, spec.trials, spec.seed,
                                       delayed=spec.delayed)
            row["sim_rate_mean"], row["sim_rate_stderr"] = sim.mean, sim.std_error
        return row

    return _map_points(point, spec)


def fixed_scheme_utility(cfg: cf.SystemConfig) -> float:
    """Closed-form FUF of the no-cooperation scheme: n_t users, B = 0."""
    return cf.ergodic_rate(cfg.n_t, cfg.sigma2 * cfg.n_t / cf.power_cap(0, cfg), cfg)


def compare_fixed_baseline(spec: ExperimentSpec) -> list:
    """Proposed optimizer against the fixed M = n_t, B = 0 scheme at each point."""
    spec.validate()

    def point(p):
        s, v = p
        cfg = spec.config_at(s, v)
        exh = optimize_exhaustive(cfg, spec.delayed)
        fixed = fixed_scheme_utility(cfg)
        row = {
            "series_value": _blank(s), "sweep_value": v,
            "M_opt": exh.mode, "B_opt": exh.b_bits,
            "fuf_proposed": exh.utility, "fuf_fixed": fixed,
            "fuf_proposed_dB": linear_to_db(exh.utility),
            "fuf_fixed_dB": linear_to_db(fixed),
            "gain_dB": linear_to_db(exh.utility) - linear_to_db(fixed),
            "sim_rate_proposed": "", "sim_rate_fixed": "",
        }
        if spec.engine != "closed":
            row["sim_rate_proposed"] = mc.simulate_sum_rate(
                cfg, exh.mode, exh.b_bits, spec.trials, spec.seed, delayed=spec.delayed).mean
            row["sim_rate_fixed"] = mc.simulate_fixed_scheme(cfg, spec.trials, spec.seed).mean
        return row

    return _map_points(point, spec)


def write_csv(rows: list, path, columns=None) -> Path:
    path = Path(path)
    if columns is None:
        columns = BASELINE_COLUMNS if rows and "fuf_fixed" in rows[0] else OPTIMIZE_COLUMNS
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n",
                                extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return path


# ---------------------------------------------------------------------------
# Golden checks
# ---------------------------------------------------------------------------

@dataclass
class GoldenCheck:
    spec: str
    series_value: object
    sweep_value: float
    expected: tuple
    exhaustive: tuple
    relaxed: tuple
    grid: Optional[cf.UtilityGrid] = None

    @property
    def ok(self) -> bool:
        return self.expected == self.exhaustive == self.relaxed


def golden_checks(spec: ExperimentSpec, rows: Optional[list] = None) -> list:
    if spec.kind != "optimize" or not spec.golden:
        return []
    if rows is None:
        rows = run_experiment(replace(spec, engine="closed"))
    n = len(spec.sweep_values)
    checks = []
    for idx, expected in sorted(spec.golden.items()):
        for k, want in enumerate(expected):
            row = rows[idx * n + k]
            checks.append(GoldenCheck(
                spec=spec.name, series_value=spec.series_values[idx],
                sweep_value=spec.sweep_values[k], expected=want,
                exhaustive=(row["M_opt_exh"], row["B_opt_exh"]),
                relaxed=(row["M_opt_rel"], row["B_opt_rel"]),
                grid=row.get("_grid")))
    return checks


def format_grid(grid: cf.UtilityGrid) -> str:
    head = "      " + " ".join(f"B={b:<9d}" for b in grid.bits)
    lines = [head]
    for m, vals in zip(grid.modes, grid.values):
        lines.append(f"M={m:<3d} " + " ".join(f"{v:<11.6g}" for v in vals))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _apply_overrides(spec, args):
    changes = {}
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "engine", None) is not None:
        changes["engine"] = args.engine
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    return replace(spec, **changes).validate() if changes else spec


def _cmd_run(args) -> int:
    paths = args.spec or shipped_specs()
    out_dir = Path(args.out)
    for path in paths:
        spec = _apply_overrides(load_spec(path), args)
        rows = run_experiment(spec)
        target = out_dir / (spec.output.name if spec.output else f"{spec.name}.csv")
        write_csv(rows, target)
        print(f"{spec.name}: {len(rows)} rows -> {target}")
    return 0


def _cmd_verify(args) -> int:
    paths = args.spec or shipped_specs()
    failed = 0
    total = 0
    for path in paths:
        spec = _apply_overrides(load_spec(path), args)
        if spec.kind == "baseline":
            rows = compare_fixed_baseline(replace(spec, engine="closed"))
            gains = ", ".join(f"{r['sweep_value']:g}:{r['gain_dB']:+.3f}" for r in rows)
            print(f"[info] {spec.name}: proposed - fixed gain (dB) {gains}")
            continue
        for chk in golden_checks(spec):
            total += 1
            status = "PASS" if chk.ok else "FAIL"
            label = (f"{spec.series_param}={chk.series_value:g} "
                     if spec.series_param else "")
            print(f"[{status}] {spec.name} {label}{spec.sweep_param}={chk.sweep_value:g}: "
                  f"expected {chk.expected}, exhaustive {chk.exhaustive}, "
                  f"relaxed {chk.relaxed}")
            if not chk.ok:
                failed += 1
                print(format_grid(chk.grid))
    print(f"{total - failed}/{total} golden entries reproduced")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogmiso",
        description="Mode and feedback-bit selection for multiuser MISO cognitive networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run experiment specs and write CSV"),
                           ("verify", "check the bundled golden (M, B) tables")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--spec", action="append", type=Path,
                       help="spec file (repeatable); defaults to the bundled specs")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--engine", choices=ENGINES)
        p.add_argument("--workers", type=int)
    run = sub.choices["run"]
    run.add_argument("--out", default="results", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_verify(args)
    except SpecValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
