# cli.py
# коды выхода: 0 успех, 1 проверка не прошла, 2 ошибка аргументов или модели

import argparse
import asyncio
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, TextIO

import pandas as pd
from pydantic import BaseModel, ConfigDict

from catalog import export_catalog, golden_run, list_catalog, load_entry
from config import config, logger
from cones import dual_cone, format_cone, same_cone
from errors import ConePolarError, ContractViolation, ModelLoadError, PreconditionError, UsageError
from exactnum import RationalVector, format_rational, format_value, parse_rational, parse_vector
from geomodel import VarietyModel
from invariants import INVARIANTS, ROUTES, evaluate_routes, run_check_safely, suite_jobs
from logger import perf_logger, setup_logger
from models import CheckReport, CheckStatus, jsonable

DIVISOR_SIDE = {"s", "n"}
WITNESSES_SHOWN = 3


class CliConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    model: Optional[str] = None
    profile: Optional[str] = None
    class_vector: Optional[RationalVector] = None
    class_kind: Optional[str] = None
    invariant: Optional[str] = None
    route: str = "all"
    tol: Fraction = config.tol
    seed: int = config.SEED
    samples: int = config.SAMPLES
    format: str = "table"
    extended: bool = False
    dest: Optional[Path] = None


def build_parser() -> argparse.ArgumentParser:
    """Парсер аргументов командной строки"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "json"], default="table", help="Формат вывода")
    common.add_argument("--tol", default=None, help="Точность (рациональное число)")
    common.add_argument("--seed", type=int, default=None, help="Seed сэмплирования")
    common.add_argument("--samples", type=int, default=None, help="Число случайных точек")
    common.add_argument("--log-level", default=None, help="Уровень логирования")

    parser = argparse.ArgumentParser(
        prog="conepolar", description="Polar transforms of local positivity invariants"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="Значение инварианта")
    p.add_argument("--model", required=True, help="Id каталога или путь к JSON")
    p.add_argument("--profile", default="generic", help="Профиль точки")
    p.add_argument("--invariant", required=True, choices=list(INVARIANTS))
    p.add_argument("--class", dest="cls", required=True, help='Класс, например "1,-1"')
    p.add_argument("--kind", dest="class_kind", choices=["div", "curve"], default=None)
    p.add_argument("--route", default="all", choices=["exit", "polar", "divisors", "curves", "all"])

    p = sub.add_parser("suite", parents=[common], help="Проверки теорем")
    p.add_argument("--model", default=None, help="По умолчанию весь каталог")
    p.add_argument("--profile", default=None, help="Только этот профиль")
    p.add_argument("--extended", action="store_true", help="Расширенный набор проверок")

    p = sub.add_parser("golden", parents=[common], help="Эталонные значения каталога")
    p.add_argument("--model", default=None)

    p = sub.add_parser("dual", parents=[common], help="Конусы модели и их двойственность")
    p.add_argument("--model", required=True)

    sub.add_parser("list", parents=[common], help="Список моделей каталога")

    p = sub.add_parser("export-catalog", parents=[common], help="Выгрузить JSON каталога")
    p.add_argument("--dest", required=True, type=Path)

    return parser


def create_config(args: argparse.Namespace) -> CliConfig:
    """Конфиг запуска с учетом аргументов CLI"""
    if args.log_level:
        setup_logger(args.log_level.upper(), config.LOG_DIR)

    values = {"command": args.command, "format": args.format}
    if args.tol is not None:
        try:
            values["tol"] = parse_rational(args.tol)
        except ConePolarError as e:
            raise UsageError(str(e), "--tol") from e
        if values["tol"] <= 0:
            raise UsageError("tolerance must be positive", "--tol")
    if args.seed is not None:
        values["seed"] = args.seed
    if args.samples is not None:
        if args.samples < 1:
            raise UsageError("need at least one sample", "--samples")
        values["samples"] = args.samples
    for name in ("model", "profile", "invariant", "route", "class_kind", "extended", "dest"):
        if getattr(args, name, None) is not None:
            values[name] = getattr(args, name)

    if getattr(args, "cls", None) is not None:
        try:
            values["class_vector"] = parse_vector(args.cls)
        except ConePolarError as e:
            raise UsageError(str(e), "--class") from e

    cfg = CliConfig(**values)
    if cfg.command == "eval":
        if cfg.route != "all" and cfg.route not in ROUTES[cfg.invariant]:
            raise UsageError(
                f"route {cfg.route} is not available for {cfg.invariant} (choose from {', '.join(ROUTES[cfg.invariant])})",
                "--route",
            )
        side = "div" if cfg.invariant in DIVISOR_SIDE else "curve"
        if cfg.class_kind is not None and cfg.class_kind != side:
            raise UsageError(f"invariant {cfg.invariant} takes a {side} class", "--kind")
    return cfg


def _load(ref: str) -> VarietyModel:
    try:
        return load_entry(ref)
    except ModelLoadError as e:
        raise UsageError(str(e), "--model") from e


def _models(ref: Optional[str]) -> List[VarietyModel]:
    if ref:
        return [_load(ref)]
    return [_load(str(entry.json_path)) for entry in list_catalog()]


def _emit(out: TextIO, cfg: CliConfig, payload, table: pd.DataFrame, title: str = ""):
    if cfg.format == "json":
        out.write(json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n")
        return
    if title:
        out.write(title + "\n")
    out.write((table.to_string(index=False) if not table.empty else "(empty)") + "\n")


def _report_table(reports: List[CheckReport]) -> pd.DataFrame:
    rows = [
        {
            "model": r.model,
            "profile": r.profile or "-",
            "check": r.check,
            "status": r.status.value,
            "samples": r.samples,
            "witnesses": len(r.witnesses),
            "message": r.message,
        }
        for r in reports
    ]
    return pd.DataFrame(rows, columns=["model", "profile", "check", "status", "samples", "witnesses", "message"])


def _print_reports(out: TextIO, cfg: CliConfig, reports: List[CheckReport]) -> int:
    failed = [r for r in reports if r.status is CheckStatus.FAIL]
    _emit(out, cfg, [r.to_json() for r in reports], _report_table(reports))
    if cfg.format == "table":
        for r in failed:
            out.write(f"\n{r.model}/{r.profile or '-'} {r.check}: {len(r.witnesses)} witnesses\n")
            for w in r.witnesses[:WITNESSES_SHOWN]:
                out.write("  " + json.dumps(jsonable(w), sort_keys=True) + "\n")
    return 1 if failed else 0


def cmd_eval(cfg: CliConfig, out: TextIO) -> int:
    model = _load(cfg.model)
    try:
        profile = model.profile(cfg.profile)
    except PreconditionError as e:
        raise UsageError(str(e), "--profile") from e
    try:
        report = evaluate_routes(model, profile, cfg.invariant, cfg.class_vector, cfg.route, cfg.tol)
    except (ContractViolation, PreconditionError) as e:
        raise UsageError(str(e), "--class") from e

    table = pd.DataFrame(
        [
            {
                "route": r.route,
                "value": format_value(r.value) if r.value is not None else "-",
                "exact": r.exact,
                "error": r.error,
            }
            for r in report.routes
        ],
        columns=["route", "value", "exact", "error"],
    )
    title = f"{cfg.invariant}({', '.join(format_rational(c) for c in cfg.class_vector)}) on {model.name}/{profile.name}"
    _emit(out, cfg, report.to_json(), table, title)
    if not report.agree:
        logger.warning(f"Routes disagree for {title}")
        return 1
    return 0


async def _run_jobs(models: List[VarietyModel], cfg: CliConfig) -> List[CheckReport]:
    semaphore = asyncio.Semaphore(config.MAX_WORKERS)

    async def run_one(model: VarietyModel, name: str, profile: str, job) -> CheckReport:
        async with semaphore:
            started = time.perf_counter()
            report = await asyncio.to_thread(run_check_safely, name, model, profile, job)
            perf_logger.info(
                f"{model.name}/{profile or '-'} {name}: {time.perf_counter() - started:.3f}s"
            )
            return report

    tasks = []
    for model in models:
        try:
            jobs = suite_jobs(model, cfg.extended, cfg.profile, cfg.samples, cfg.seed, cfg.tol)
        except PreconditionError as e:
            raise UsageError(str(e), "--profile") from e
        tasks += [run_one(model, name, profile, job) for name, profile, job in jobs]
    reports = await asyncio.gather(*tasks)
    # порядок вывода не зависит от порядка завершения
    return sorted(reports, key=lambda r: r.sort_key())


def cmd_suite(cfg: CliConfig, out: TextIO) -> int:
    models = _models(cfg.model)
    logger.info(f"Running {'extended ' if cfg.extended else ''}suite on {[m.name for m in models]}")
    reports = asyncio.run(_run_jobs(models, cfg))
    return _print_reports(out, cfg, reports)


def cmd_golden(cfg: CliConfig, out: TextIO) -> int:
    entries = list_catalog()
    if cfg.model:
        model = _load(cfg.model)
        entries = [e for e in entries if e.id == model.name]
        if not entries:
            raise UsageError(f"{cfg.model} is not a catalog model", "--model")
    return _print_reports(out, cfg, [golden_run(e) for e in entries])


def cmd_dual(cfg: CliConfig, out: TextIO) -> int:
    model = _load(cfg.model)
    spaces = [("X", model.nef, model.eff_div, model.eff_curves, model.mov_curves)]
    for p in model.profiles:
        B = p.blowup
        spaces.append((f"Y[{p.name}]", B.nef_Y, B.eff_div_Y, B.eff_curves_Y, B.mov_curves_Y))

    rows, payload = [], []
    for space, nef, eff_div, eff_curves, mov_curves in spaces:
        checks = {
            "Nef* = Eff_1": same_cone(dual_cone(nef), eff_curves),
            "Eff^1* = Mov_1": same_cone(dual_cone(eff_div), mov_curves),
        }
        cones = {"nef": nef, "eff_div": eff_div, "eff_curves": eff_curves, "mov_curves": mov_curves}
        for name, cone in cones.items():
            rows.append({"space": space, "item": name, "value": format_cone(cone)})
        for name, ok in checks.items():
            rows.append({"space": space, "item": name, "value": "PASS" if ok else "FAIL"})
        payload.append(
            {
                "space": space,
                "cones": {name: cone.to_json() for name, cone in cones.items()},
                "dualities": {name: ok for name, ok in checks.items()},
            }
        )
    _emit(out, cfg, payload, pd.DataFrame(rows, columns=["space", "item", "value"]), f"Cones of {model.name}")
    return 0 if all(all(p["dualities"].values()) for p in payload) else 1


def cmd_list(cfg: CliConfig, out: TextIO) -> int:
    entries = list_catalog()
    table = pd.DataFrame(
        [{"id": e.id, "file": e.json_path.name, "expected": len(e.expected_values)} for e in entries],
        columns=["id", "file", "expected"],
    )
    _emit(out, cfg, [e.to_json() for e in entries], table)
    return 0


def cmd_export(cfg: CliConfig, out: TextIO) -> int:
    for path in export_catalog(cfg.dest):
        out.write(f"{path}\n")
    return 0


HANDLERS = {
    "eval": cmd_eval,
    "suite": cmd_suite,
    "golden": cmd_golden,
    "dual": cmd_dual,
    "list": cmd_list,
    "export-catalog": cmd_export,
}


def run(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse: 0 для --help, 2 для ошибок
        return int(e.code or 0)

    try:
        cfg = create_config(args)
        return HANDLERS[cfg.command](cfg, out)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        sys.stderr.write(f"conepolar: error: {e}\n")
        return 2
    except ConePolarError as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"conepolar: {type(e).__name__}: {e}\n")
        return 2
