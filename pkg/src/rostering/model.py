"""Rostering instances, schedules and the line-oriented instance file format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

MINUTES_PER_DAY = 1440

SOFT_IDS = tuple(f"SC{i}" for i in range(1, 22))

DEFAULT_WEIGHTS = {
    "SC1": 0, "SC2": 1, "SC3": 40, "SC4": 5, "SC5": 0, "SC6": 5, "SC7": 0,
    "SC8": 5, "SC9": 1, "SC10": 0, "SC11": 10, "SC12": 1, "SC13": 10000,
    "SC14": 1, "SC15": 20, "SC16": 0, "SC17": 10, "SC18": 5, "SC19": 1,
    "SC20": 7, "SC21": 1,
}

# Order matters: it is the column order of the compiled limit vector.
DEFAULT_LIMITS = {
    "max_consecutive_free_days": 3,
    "max_shift_types": 3,
    "max_consecutive_same_shift": 4,
    "max_consecutive_working_days": 6,
    "max_shift_types_per_week": 2,
    "max_shifts_per_weekday": 4,
    "min_rest_minutes": 660,
    "max_working_bank_holidays": 1,
    "max_shifts_total": 20,
    "min_consecutive_free_days": 2,
    "max_working_weekends_in_4_weeks": 3,
    "min_consecutive_working_days": 2,
    "max_blank_per_day": 5,
}

DEFAULT_SUCCESSIONS = frozenset({("N", "V"), ("N", "D"), ("N", "DH"), ("L", "V")})
DEFAULT_WEEKEND = frozenset({5, 6})

_TOKEN = re.compile(r"^[A-Za-z0-9_.][A-Za-z0-9_.\-]*$")


class InstanceError(ValueError):
    """Semantic problem with an instance (or its file)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InstanceSyntaxError(InstanceError):
    pass


@dataclass(frozen=True)
class ShiftType:
    id: str
    start: int
    end: int
    required_skill: str | None = None
    is_night: bool = False

    def __post_init__(self):
        if not _TOKEN.match(self.id):
            raise InstanceError(f"invalid shift id {self.id!r}")
        for t in (self.start, self.end):
            if not 0 <= t < MINUTES_PER_DAY:
                raise InstanceError(f"shift {self.id}: time {t} outside [0, 1440)")
        if self.start == self.end:
            raise InstanceError(f"shift {self.id}: start equals end")

    @property
    def duration(self) -> int:
        return (self.end - self.start) % MINUTES_PER_DAY


@dataclass(frozen=True)
class Nurse:
    id: int
    name: str
    skills: frozenset = frozenset({"nurse"})
    max_minutes: int = 9600
    requested_days_off: frozenset = frozenset()
    requested_shifts_on: frozenset = frozenset()
    requested_shifts_off: frozenset = frozenset()
    alt_skills: frozenset = frozenset()

    def __post_init__(self):
        for name in ("skills", "requested_days_off", "requested_shifts_on",
                     "requested_shifts_off", "alt_skills"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if not _TOKEN.match(self.name):
            raise InstanceError(f"nurse {self.id}: invalid name {self.name!r}")
        if self.max_minutes <= 0:
            raise InstanceError(f"nurse {self.id}: max_minutes must be positive")
        clash = self.requested_shifts_on & self.requested_shifts_off
        if clash:
            raise InstanceError(
                f"nurse {self.id}: shift requested both on and off: {sorted(clash)}")

    def covers(self, skill: str | None) -> bool:
        return skill is None or skill in self.skills or skill in self.alt_skills


@dataclass(frozen=True)
class ConstraintConfig:
    weights: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    limits: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_LIMITS))
    bank_holidays: frozenset = frozenset()
    # pairs naming shifts absent from the instance are ignored
    forbidden_successions: frozenset = DEFAULT_SUCCESSIONS

    def __post_init__(self):
        weights = dict(DEFAULT_WEIGHTS)
        for k, v in dict(self.weights).items():
            if k not in DEFAULT_WEIGHTS:
                raise InstanceError(f"unknown constraint key {k!r}")
            if int(v) != v or v < 0:
                raise InstanceError(f"weight {k} must be a non-negative integer")
            weights[k] = int(v)
        limits = dict(DEFAULT_LIMITS)
        for k, v in dict(self.limits).items():
            if k not in DEFAULT_LIMITS:
                raise InstanceError(f"unknown constraint key {k!r}")
            if int(v) != v or v <= 0:
                raise InstanceError(f"limit {k} must be a positive integer")
            limits[k] = int(v)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "limits", limits)
        object.__setattr__(self, "bank_holidays", frozenset(self.bank_holidays))
        object.__setattr__(self, "forbidden_successions",
                           frozenset(tuple(p) for p in self.forbidden_successions))

    def with_weights(self, **weights) -> "ConstraintConfig":
        return ConstraintConfig({**self.weights, **weights}, self.limits,
                                self.bank_holidays, self.forbidden_successions)

    def with_limits(self, **limits) -> "ConstraintConfig":
        return ConstraintConfig(self.weights, {**self.limits, **limits},
                                self.bank_holidays, self.forbidden_successions)


@dataclass(frozen=True)
class RosterInstance:
    horizon_days: int
    nurses: tuple
    shifts: tuple
    constraints: ConstraintConfig = field(default_factory=ConstraintConfig)
    weekend_weekdays: frozenset = DEFAULT_WEEKEND
    name: str = "roster"

    def __post_init__(self):
        object.__setattr__(self, "nurses", tuple(self.nurses))
        object.__setattr__(self, "shifts", tuple(self.shifts))
        object.__setattr__(self, "weekend_weekdays", frozenset(self.weekend_weekdays))
        if self.horizon_days < 1:
            raise InstanceError("horizon_days must be at least 1")
        if not self.nurses:
            raise InstanceError("at least one nurse is required")
        if not self.shifts:
            raise InstanceError("at least one shift is required")
        if not _TOKEN.match(self.name):
            raise InstanceError(f"invalid instance name {self.name!r}")
        if [n.id for n in self.nurses] != list(range(len(self.nurses))):
            raise InstanceError("nurse ids must be 0..n-1 in order")
        ids = [s.id for s in self.shifts]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate shift id")
        known = set(ids)
        if not self.weekend_weekdays <= set(range(7)):
            raise InstanceError("weekend weekdays must lie in 0..6")
        for nurse in self.nurses:
            for day in nurse.requested_days_off:
                self._check_day(day, f"nurse {nurse.id} day-off request")
            for day, sid in nurse.requested_shifts_on | nurse.requested_shifts_off:
                self._check_day(day, f"nurse {nurse.id} shift request")
                if sid not in known:
                    raise InstanceError(f"nurse {nurse.id}: unknown shift {sid!r} in request")
        for day in self.constraints.bank_holidays:
            self._check_day(day, "bank holiday")
        available = set()
        for nurse in self.nurses:
            available |= nurse.skills | nurse.alt_skills
        for s in self.shifts:
            if s.required_skill is not None and s.required_skill not in available:
                raise InstanceError(f"no nurse has skill {s.required_skill!r} for shift {s.id}")

    def _check_day(self, day, what):
        if not 0 <= day < self.horizon_days:
            raise InstanceError(f"{what}: day {day} outside horizon")

    @property
    def n_nurses(self) -> int:
        return len(self.nurses)

    @property
    def n_options(self) -> int:
        """Shift count plus one for Off."""
        return len(self.shifts) + 1

    @property
    def shift_ids(self) -> tuple:
        return tuple(s.id for s in self.shifts)

    def shift_index(self, shift_id: str) -> int:
        try:
            return self.shift_ids.index(shift_id)
        except ValueError:
            raise KeyError(f"unknown shift id {shift_id!r}") from None

    def is_weekend(self, day: int) -> bool:
        return day % 7 in self.weekend_weekdays

    def weekend_blocks(self) -> list:
        """Maximal runs of consecutive weekend days, as lists of day indices."""
        blocks, current = [], []
        for d in range(self.horizon_days):
            if self.is_weekend(d):
                current.append(d)
            elif current:
                blocks.append(current)
                current = []
        if current:
            blocks.append(current)
        return blocks


class Schedule:
    """Nurse x day grid of option codes; code ``len(shift_ids)`` is Off.

    Each cell holds exactly one value, so two shifts on one day for one
    nurse cannot be represented.
    """

    __slots__ = ("grid", "shift_ids")

    def __init__(self, grid, shift_ids):
        grid = np.asarray(grid, dtype=np.int8)
        if grid.ndim != 2:
            raise ValueError("schedule grid must be 2-D")
        shift_ids = tuple(shift_ids)
        if grid.size and (grid.min() < 0 or grid.max() > len(shift_ids)):
            raise ValueError("grid holds codes outside the shift catalogue")
        self.grid = grid
        self.shift_ids = shift_ids

    @property
    def off_code(self) -> int:
        return len(self.shift_ids)

    @property
    def shape(self):
        return self.grid.shape

    def cell(self, nurse: int, day: int) -> str | None:
        code = int(self.grid[nurse, day])
        return None if code == self.off_code else self.shift_ids[code]

    def rows(self) -> list:
        return [[self.cell(n, d) for d in range(self.shape[1])] for n in range(self.shape[0])]

    def working_days(self, nurse: int) -> int:
        return int(np.count_nonzero(self.grid[nurse] != self.off_code))

    def copy(self) -> "Schedule":
        return Schedule(self.grid.copy(), self.shift_ids)

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return self.shift_ids == other.shift_ids and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash((self.shift_ids, self.grid.tobytes(), self.grid.shape))

    def __repr__(self):
        return f"Schedule({self.shape[0]}x{self.shape[1]}, {self.shift_ids})"


def empty_schedule(instance: RosterInstance) -> Schedule:
    grid = np.full((instance.n_nurses, instance.horizon_days), len(instance.shifts), np.int8)
    return Schedule(grid, instance.shift_ids)


def set_assignment(schedule: Schedule, nurse: int, day: int, value: str | None) -> Schedule:
    """Return a copy of ``schedule`` with one cell changed; ``None`` means Off."""
    n_nurses, n_days = schedule.shape
    if not 0 <= nurse < n_nurses:
        raise IndexError(f"nurse {nurse} out of range [0, {n_nurses})")
    if not 0 <= day < n_days:
        raise IndexError(f"day {day} out of range [0, {n_days})")
    if value is None:
        code = schedule.off_code
    elif value in schedule.shift_ids:
        code = schedule.shift_ids.index(value)
    else:
        raise KeyError(f"unknown shift id {value!r}")
    out = schedule.copy()
    out.grid[nurse, day] = code
    return out


def schedule_from_rows(rows: Iterable, instance: RosterInstance) -> Schedule:
    """Build a schedule from per-nurse lists of shift ids (``None``/``"-"`` = Off)."""
    out = empty_schedule(instance)
    rows = list(rows)
    if len(rows) != instance.n_nurses:
        raise ValueError(f"expected {instance.n_nurses} rows, got {len(rows)}")
    for n, row in enumerate(rows):
        row = list(row)
        if len(row) != instance.horizon_days:
            raise ValueError(f"row {n}: expected {instance.horizon_days} days, got {len(row)}")
        for d, value in enumerate(row):
            if value is None or value == "-":
                continue
            out.grid[n, d] = instance.shift_index(value)
    return out


# --------------------------------------------------------------------------
# instance file format

SECTIONS = ("META", "SHIFTS", "NURSES", "COVER", "CONSTRAINTS")
_REQUIRED = ("META", "SHIFTS", "NURSES")


def _fmt_time(minutes):
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def _parse_time(text, line):
    m = re.fullmatch(r"(\d{1,2}):(\d{2})", text)
    if not m:
        raise InstanceSyntaxError(f"bad time {text!r}, expected HH:MM", line)
    h, mi = int(m.group(1)), int(m.group(2))
    if h > 23 or mi > 59:
        raise InstanceSyntaxError(f"bad time {text!r}", line)
    return h * 60 + mi


def _parse_int(text, line, what="integer"):
    try:
        return int(text)
    except ValueError:
        raise InstanceSyntaxError(f"expected {what}, got {text!r}", line) from None


def _parse_bool(text, line):
    low = text.lower()
    if low in ("yes", "true", "1"):
        return True
    if low in ("no", "false", "0"):
        return False
    raise InstanceSyntaxError(f"expected yes/no, got {text!r}", line)


def _skill_set(text):
    return frozenset() if text == "-" else frozenset(text.split(","))


def _key_value(text, line):
    if "=" not in text:
        raise InstanceSyntaxError(f"expected 'key = value', got {text!r}", line)
    key, _, value = text.partition("=")
    return key.strip(), value.strip()


def default_max_minutes(horizon_days: int) -> int:
    """40 hours per week, pro rata over the horizon."""
    return 2400 * horizon_days // 7


def parse_instance(text: str) -> RosterInstance:
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            m = re.fullmatch(r"\[([A-Z]+)\]", body)
            if not m:
                raise InstanceSyntaxError(f"malformed section header {body!r}", lineno)
            current = m.group(1)
            if current not in SECTIONS:
                raise InstanceSyntaxError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise InstanceError(f"duplicate section [{current}]", lineno)
            sections[current] = []
            continue
        if current is None:
            raise InstanceSyntaxError("content before the first section header", lineno)
        sections[current].append((lineno, body))
    for name in _REQUIRED:
        if name not in sections:
            raise InstanceError(f"missing section [{name}]")

    meta = {"name": "roster", "horizon_days": None, "weekend": "5 6"}
    for lineno, body in sections["META"]:
        key, value = _key_value(body, lineno)
        if key not in meta:
            raise InstanceError(f"unknown META key {key!r}", lineno)
        meta[key] = value
    if meta["horizon_days"] is None:
        raise InstanceError("META must declare horizon_days")
    horizon = _parse_int(meta["horizon_days"], None, "horizon_days")
    weekend = frozenset(_parse_int(t, None) for t in meta["weekend"].split())

    shifts = []
    for lineno, body in sections["SHIFTS"]:
        parts = body.split()
        if len(parts) != 5:
            raise InstanceSyntaxError("shift record needs: id start end skill night", lineno)
        sid, start, end, skill, night = parts
        try:
            shifts.append(ShiftType(sid, _parse_time(start, lineno), _parse_time(end, lineno),
                                    None if skill == "-" else skill, _parse_bool(night, lineno)))
        except InstanceSyntaxError:
            raise
        except InstanceError as exc:
            raise InstanceError(str(exc), lineno) from None

    nurse_rows = {}
    requests = []
    for lineno, body in sections["NURSES"]:
        parts = body.split()
        kind = parts[0]
        if kind == "nurse":
            if len(parts) not in (5, 6):
                raise InstanceSyntaxError(
                    "nurse record needs: nurse id name max_minutes skills [alt=skills]", lineno)
            nid = _parse_int(parts[1], lineno, "nurse id")
            if nid in nurse_rows:
                raise InstanceError(f"duplicate nurse id {nid}", lineno)
            alt = frozenset()
            if len(parts) == 6:
                if not parts[5].startswith("alt="):
                    raise InstanceSyntaxError(f"expected alt=skills, got {parts[5]!r}", lineno)
                alt = _skill_set(parts[5][4:])
            nurse_rows[nid] = dict(id=nid, name=parts[2],
                                   max_minutes=_parse_int(parts[3], lineno, "max_minutes"),
                                   skills=_skill_set(parts[4]), alt_skills=alt,
                                   requested_days_off=set(), requested_shifts_on=set(),
                                   requested_shifts_off=set(), line=lineno)
        elif kind in ("day_off", "shift_on", "shift_off"):
            requests.append((lineno, parts))
        else:
            raise InstanceSyntaxError(f"unknown nurse record {kind!r}", lineno)
    if not nurse_rows:
        raise InstanceError("at least one nurse is required")
    shift_ids = {s.id for s in shifts}
    for lineno, parts in requests:
        kind = parts[0]
        want = 3 if kind == "day_off" else 4
        if len(parts) != want:
            raise InstanceSyntaxError(f"{kind} record needs {want - 1} fields", lineno)
        nid = _parse_int(parts[1], lineno, "nurse id")
        if nid not in nurse_rows:
            raise InstanceError(f"request for unknown nurse {nid}", lineno)
        day = _parse_int(parts[2], lineno, "day")
        if not 0 <= day < horizon:
            raise InstanceError(f"day {day} outside horizon", lineno)
        row = nurse_rows[nid]
        if kind == "day_off":
            row["requested_days_off"].add(day)
            continue
        if parts[3] not in shift_ids:
            raise InstanceError(f"unknown shift {parts[3]!r} in request", lineno)
        row["requested_" + ("shifts_on" if kind == "shift_on" else "shifts_off")].add((day, parts[3]))

    nurses = []
    for nid in sorted(nurse_rows):
        row = dict(nurse_rows[nid])
        lineno = row.pop("line")
        try:
            nurses.append(Nurse(**row))
        except InstanceError as exc:
            raise InstanceError(str(exc), lineno) from None

    limits, weights = {}, {}
    for lineno, body in sections.get("COVER", []):
        key, value = _key_value(body, lineno)
        if key != "max_blank_per_day":
            raise InstanceError(f"unknown COVER key {key!r}", lineno)
        limits[key] = _parse_int(value, lineno)
    bank, succ = frozenset(), DEFAULT_SUCCESSIONS
    for lineno, body in sections.get("CONSTRAINTS", []):
        key, value = _key_value(body, lineno)
        if key in DEFAULT_WEIGHTS:
            weights[key] = _parse_int(value, lineno, "weight")
        elif key in DEFAULT_LIMITS and key != "max_blank_per_day":
            limits[key] = _parse_int(value, lineno, "limit")
        elif key == "bank_holidays":
            bank = frozenset(_parse_int(t, lineno, "day") for t in value.split())
        elif key == "forbidden_successions":
            pairs = set()
            for tok in value.split():
                a, sep, b = tok.partition(">")
                if not sep or not a or not b:
                    raise InstanceSyntaxError(f"succession must look like A>B, got {tok!r}", lineno)
                if a not in shift_ids or b not in shift_ids:
                    raise InstanceError(f"unknown shift in succession {tok!r}", lineno)
                pairs.add((a, b))
            succ = frozenset(pairs)
        else:
            raise InstanceError(f"unknown constraint key {key!r}", lineno)
    try:
        config = ConstraintConfig(weights, limits, bank, succ)
    except InstanceError as exc:
        raise InstanceError(str(exc)) from None
    return RosterInstance(horizon, tuple(nurses), tuple(shifts), config, weekend, meta["name"])


def serialize_instance(instance: RosterInstance) -> str:
    """Canonical text form; constraint entries equal to the defaults are left out."""
    out = ["[META]",
           f"name = {instance.name}",
           f"horizon_days = {instance.horizon_days}",
           "weekend = " + " ".join(str(d) for d in sorted(instance.weekend_weekdays)),
           "",
           "[SHIFTS]"]
    for s in instance.shifts:
        out.append(f"{s.id} {_fmt_time(s.start)} {_fmt_time(s.end)} "
                   f"{s.required_skill or '-'} {'yes' if s.is_night else 'no'}")
    out += ["", "[NURSES]"]
    for n in instance.nurses:
        rec = (f"nurse {n.id} {n.name} {n.max_minutes} "
               f"{','.join(sorted(n.skills)) or '-'}")
        if n.alt_skills:
            rec += " alt=" + ",".join(sorted(n.alt_skills))
        out.append(rec)
    for n in instance.nurses:
        out += [f"day_off {n.id} {d}" for d in sorted(n.requested_days_off)]
        out += [f"shift_on {n.id} {d} {s}" for d, s in sorted(n.requested_shifts_on)]
        out += [f"shift_off {n.id} {d} {s}" for d, s in sorted(n.requested_shifts_off)]
    cfg = instance.constraints
    out += ["", "[COVER]", f"max_blank_per_day = {cfg.limits['max_blank_per_day']}"]
    extra = [f"{k} = {cfg.weights[k]}" for k in SOFT_IDS if cfg.weights[k] != DEFAULT_WEIGHTS[k]]
    extra += [f"{k} = {v}" for k, v in cfg.limits.items()
              if k != "max_blank_per_day" and v != DEFAULT_LIMITS[k]]
    if cfg.bank_holidays:
        extra.append("bank_holidays = " + " ".join(str(d) for d in sorted(cfg.bank_holidays)))
    if cfg.forbidden_successions != DEFAULT_SUCCESSIONS:
        extra.append("forbidden_successions = "
                     + " ".join(f"{a}>{b}" for a, b in sorted(cfg.forbidden_successions)))
    if extra:
        out += ["", "[CONSTRAINTS]"] + extra
    return "\n".join(out) + "\n"


def load_instance(path) -> RosterInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


# --------------------------------------------------------------------------
# stock instances

def standard_shifts() -> tuple:
    """The five BCV 8.13.1 shifts (V, D, DH, L, N)."""
    return (
        ShiftType("V", 6 * 60, 14 * 60, "nurse"),
        ShiftType("D", 8 * 60, 17 * 60, "nurse"),
        ShiftType("DH", 8 * 60, 17 * 60, "head_nurse"),
        ShiftType("L", 14 * 60, 22 * 60, "nurse"),
        ShiftType("N", 22 * 60, 6 * 60, "nurse", is_night=True),
    )


def build_instance(n_nurses: int, horizon_days: int = 28, n_head: int = 3,
                   name: str = "generated") -> RosterInstance:
    """Instance with the BCV 8.13.1 shift catalogue and default constraints.

    The first ``n_head`` nurses also hold the head_nurse skill.
    """
    n_head = max(1, min(n_head, n_nurses))
    nurses = tuple(
        Nurse(i, f"N{i:02d}",
              frozenset({"nurse", "head_nurse"}) if i < n_head else frozenset({"nurse"}),
              default_max_minutes(horizon_days))
        for i in range(n_nurses)
    )
    return RosterInstance(horizon_days, nurses, standard_shifts(), ConstraintConfig(), name=name)


def reference_instance() -> RosterInstance:
    """13 nurses, 28 days, 5 shifts, shipped as ``data/bcv_8_13_1.ros``."""
    text = resources.files("rostering.data").joinpath("bcv_8_13_1.ros").read_text("utf-8")
    return parse_instance(text)


def desk_instance() -> RosterInstance:
    """Small 8-nurse, 28-day instance used for quick runs."""
    return build_instance(8, 28, n_head=2, name="desk8")


# --------------------------------------------------------------------------
# roster files: one line per nurse, shift ids separated by whitespace, "-" = Off

def format_roster(schedule: Schedule) -> str:
    lines = [" ".join(v if v is not None else "-" for v in row) for row in schedule.rows()]
    return "\n".join(lines) + "\n"


def parse_roster(text: str, instance: RosterInstance) -> Schedule:
    rows = []
    for raw in text.splitlines():
        body = raw.split("#", 1)[0].strip()
        if body:
            rows.append(body.split())
    try:
        return schedule_from_rows(rows, instance)
    except KeyError as exc:
        raise ValueError(str(exc)) from None
