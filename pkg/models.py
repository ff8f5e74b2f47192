# models.py
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from exactnum import Interval, RationalVector, Value, format_value


class CheckStatus(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"
    # ни одного нарушения, но часть сравнений не решена точно
    UNDECIDED = "UNDECIDED"


_RANK = {CheckStatus.SKIP: 0, CheckStatus.PASS: 1, CheckStatus.UNDECIDED: 2, CheckStatus.FAIL: 3}


def jsonable(x: Any) -> Any:
    """Рациональные числа, интервалы и векторы -> строки/списки для JSON"""
    if isinstance(x, RationalVector):
        return x.to_json()
    if isinstance(x, Interval):
        return x.to_json() if not x.is_exact else format_value(x)
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if isinstance(x, float):
        return repr(x)
    try:
        return format_value(x)
    except Exception:
        return str(x)


@dataclass
class CheckReport:
    check: str
    status: CheckStatus = CheckStatus.PASS
    model: str = ""
    profile: str = ""
    samples: int = 0
    witnesses: List[Dict[str, Any]] = field(default_factory=list)
    values: Dict[str, Any] = field(default_factory=dict)
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAIL

    def fail(self, **witness):
        self.status = CheckStatus.FAIL
        self.witnesses.append(witness)

    def skip(self, message: str):
        self.status = CheckStatus.SKIP
        self.message = message

    def undecided(self, count: int):
        self.values["undecided"] = count
        self.message = f"{count} comparisons undecided after refinement"
        if self.status is CheckStatus.PASS:
            self.status = CheckStatus.UNDECIDED

    def merge(self, other: "CheckReport"):
        """Сводит отчёт по другому профилю в этот: FAIL > UNDECIDED > PASS > SKIP"""
        self.samples += other.samples
        self.witnesses.extend(other.witnesses)
        for key, value in other.values.items():
            self.values[f"{other.profile}.{key}" if other.profile else key] = value
        if _RANK[other.status] > _RANK[self.status]:
            if self.status is CheckStatus.SKIP:
                self.message = ""
            self.status = other.status
        if other.message and not self.message:
            self.message = other.message

    def sort_key(self) -> tuple:
        return (self.model, self.profile, self.check)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "profile": self.profile,
            "check": self.check,
            "status": self.status.value,
            "samples": self.samples,
            "witnesses": jsonable(self.witnesses),
            "values": jsonable(self.values),
            "message": self.message,
        }


@dataclass
class RouteValue:
    route: str
    value: Optional[Value] = None
    exact: bool = True
    error: str = ""


@dataclass
class InvariantReport:
    model: str
    profile: str
    invariant: str
    cls: RationalVector
    routes: List[RouteValue] = field(default_factory=list)
    agree: bool = True

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "profile": self.profile,
            "invariant": self.invariant,
            "class": self.cls.to_json(),
            "routes": [
                {
                    "route": r.route,
                    "value": jsonable(r.value) if r.value is not None else None,
                    "exact": r.exact,
                    "error": r.error,
                }
                for r in self.routes
            ],
            "agree": self.agree,
        }


@dataclass
class VanishingLocusResult:
    alpha: RationalVector
    is_boundary_mov: bool
    M_positive: bool
    zero_profiles: List[str] = field(default_factory=list)
    divisorial_Enk: List[str] = field(default_factory=list)
    expected_profiles: List[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        if not (self.is_boundary_mov and self.M_positive):
            return True
        return sorted(self.zero_profiles) == sorted(self.expected_profiles)

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha.to_json(),
            "is_boundary_mov": self.is_boundary_mov,
            "M_positive": self.M_positive,
            "zero_profiles": sorted(self.zero_profiles),
            "divisorial_Enk": list(self.divisorial_Enk),
            "expected_profiles": sorted(self.expected_profiles),
            "consistent": self.consistent,
        }
