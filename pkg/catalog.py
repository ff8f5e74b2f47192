# catalog.py

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

from pydantic import ValidationError

from config import config
from errors import ConePolarError, ModelLoadError
from exactnum import Interval, RationalVector, format_value, parse_rational, parse_vector
from geomodel import ExpectedSpec, ModelSpec, VarietyModel, load_model, top_intersection, volume, zariski_decompose
from invariants import (
    M_func,
    nakayama_N,
    nakayama_n,
    seshadri_S,
    seshadri_s,
    seshadri_s_via_curves,
    vol_hat,
)
from logger import app_logger
from models import CheckReport


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    json_path: Path
    provenance_note: str
    expected_values: tuple

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "json_path": str(self.json_path),
            "provenance": self.provenance_note,
            "expected_values": len(self.expected_values),
        }


def catalog_dir(directory: Optional[Union[str, Path]] = None) -> Path:
    return Path(directory) if directory is not None else Path(config.CATALOG_DIR)


def _entry(path: Path) -> CatalogEntry:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        spec = ModelSpec.model_validate(raw)
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise ModelLoadError(f"unreadable catalog file: {e}", str(path)) from e
    for i, exp in enumerate(spec.expected):
        if not (exp.oracle.startswith("[DERIVED]") or exp.oracle.startswith("[TRIVIAL]")):
            raise ModelLoadError("oracle must be tagged [DERIVED] or [TRIVIAL]", f"expected[{i}].oracle")
    return CatalogEntry(
        id=spec.name,
        json_path=path,
        provenance_note=spec.provenance,
        expected_values=tuple(spec.expected),
    )


def list_catalog(directory: Optional[Union[str, Path]] = None) -> List[CatalogEntry]:
    root = catalog_dir(directory)
    if not root.is_dir():
        raise ModelLoadError("catalog directory does not exist", str(root))
    return [_entry(p) for p in sorted(root.glob("*.json"))]


@lru_cache(maxsize=None)
def _load_cached(path: str) -> VarietyModel:
    return load_model(path)


def load_entry(ref: Union[str, Path], directory: Optional[Union[str, Path]] = None) -> VarietyModel:
    """Модель по id каталога или по пути к JSON-файлу."""
    path = Path(ref)
    if path.suffix == ".json" and path.is_file():
        return _load_cached(str(path.resolve()))
    for entry in list_catalog(directory):
        if entry.id == str(ref):
            return _load_cached(str(entry.json_path.resolve()))
    raise ModelLoadError(f"unknown model {ref!r}; use a catalog id or a path to a JSON file")


def _compare(expected: str, got) -> bool:
    if isinstance(got, RationalVector):
        return got == parse_vector(expected)
    if isinstance(got, Interval):
        # интервал совпадает только если он вырожден
        return got.is_exact and got.lo == parse_rational(expected)
    return Fraction(got) == parse_rational(expected)


def _route(exp: ExpectedSpec, default: str) -> str:
    return exp.route or default


GOLDEN_OPS: Dict[str, Callable[[VarietyModel, ExpectedSpec], object]] = {
    "seshadri_s": lambda M, e: seshadri_s(M.profile(e.profile), parse_vector(e.input)),
    "seshadri_s_via_curves": lambda M, e: seshadri_s_via_curves(M.profile(e.profile), parse_vector(e.input)),
    "nakayama_n": lambda M, e: nakayama_n(M.profile(e.profile), parse_vector(e.input)),
    "nakayama_N": lambda M, e: nakayama_N(M.profile(e.profile), parse_vector(e.input), _route(e, "exit")),
    "seshadri_S": lambda M, e: seshadri_S(M.profile(e.profile), parse_vector(e.input), _route(e, "exit")),
    "vol_hat": lambda M, e: vol_hat(M, parse_vector(e.input)),
    "M_func": lambda M, e: M_func(M, parse_vector(e.input)),
    "volume": lambda M, e: volume(M, parse_vector(e.input)),
    "top_intersection": lambda M, e: top_intersection(M, parse_vector(e.input)),
    "zariski_positive": lambda M, e: zariski_decompose(M, parse_vector(e.input)).positive,
}


def golden_run(entry: CatalogEntry) -> CheckReport:
    """Прогон всех ожидаемых значений записи; при расхождении FAIL с обоими значениями."""
    model = load_entry(entry.json_path)
    report = CheckReport(check="golden", model=entry.id, samples=len(entry.expected_values))
    for exp in entry.expected_values:
        op = GOLDEN_OPS.get(exp.op)
        case = {"op": exp.op, "profile": exp.profile, "input": exp.input, "route": exp.route}
        if op is None:
            report.fail(**case, expected=exp.expected, error="unknown operation")
            continue
        try:
            got = op(model, exp)
        except ConePolarError as e:
            report.fail(**case, expected=exp.expected, error=f"{type(e).__name__}: {e}")
            continue
        if not _compare(exp.expected, got):
            shown = got.to_json() if isinstance(got, RationalVector) else format_value(got)
            report.fail(**case, expected=exp.expected, got=shown)

    if report.passed:
        app_logger.info(f"Golden values of {entry.id}: {report.samples} matched")
    else:
        app_logger.warning(f"Golden values of {entry.id}: {len(report.witnesses)} mismatches")
    return report


def export_catalog(dest: Union[str, Path], directory: Optional[Union[str, Path]] = None) -> List[Path]:
    """Копирует JSON-файлы каталога в dest (байт в байт)."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in list_catalog(directory):
        target = dest / entry.json_path.name
        target.write_bytes(entry.json_path.read_bytes())
        written.append(target)
    app_logger.info(f"Exported {len(written)} catalog models to {dest}")
    return written
