from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    clause: str
    cell: object
    detail: str = ""

    def to_json(self):
        return {"clause": self.clause, "cell": _jsonable(self.cell), "detail": self.detail}


@dataclass
class Report:
    """Window-scoped verdict.

    ``violations`` are hard failures.  ``unconfirmed`` lists claims that could
    not be confirmed inside the window; they do not make the report fail.
    """

    violations: list = field(default_factory=list)
    unconfirmed: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    @property
    def first(self):
        return self.violations[0] if self.violations else None

    def add(self, clause, cell, detail=""):
        self.violations.append(Violation(clause, cell, detail))

    def soft(self, clause, cell, detail=""):
        self.unconfirmed.append(Violation(clause, cell, detail))

    def merge(self, other, prefix=""):
        for v in other.violations:
            self.violations.append(Violation(prefix + v.clause, v.cell, v.detail))
        for v in other.unconfirmed:
            self.unconfirmed.append(Violation(prefix + v.clause, v.cell, v.detail))
        for k, v in other.info.items():
            self.info[prefix + k] = v
        return self

    def to_json(self):
        return {
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
            "unconfirmed": [v.to_json() for v in self.unconfirmed],
            "info": {k: _jsonable(v) for k, v in sorted(self.info.items())},
        }


def _jsonable(obj):
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return str(obj)
