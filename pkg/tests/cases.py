"""Hand-built schedules that trip exactly one weighted soft constraint.

Weights are the defaults. Limits are loosened only where a second
constraint would otherwise fire on the same cells (SC11 and SC15 both look at
consecutive-day pairs).
"""
from rostering.model import (DEFAULT_SUCCESSIONS, ConstraintConfig, Nurse, RosterInstance,
                             schedule_from_rows, standard_shifts)


def _instance(days, **limits):
    successions = limits.pop("successions", DEFAULT_SUCCESSIONS)
    cfg = ConstraintConfig(limits=limits, forbidden_successions=successions)
    nurse = Nurse(0, "solo", {"nurse", "head_nurse"}, 9600)
    return RosterInstance(days, (nurse,), standard_shifts(), cfg)


def rest_violation():
    """Late then early: 8 hours of rest against an 11 hour minimum."""
    inst = _instance(2, successions=DEFAULT_SUCCESSIONS - {("L", "V")})
    return inst, schedule_from_rows([["L", "V"]], inst), "SC15"


def incomplete_weekend():
    """Friday and Saturday worked, Sunday off (day 0 is a Monday)."""
    inst = _instance(8)
    rows = [["-", "-", "-", "-", "D", "D", "-", "-"]]
    return inst, schedule_from_rows(rows, inst), "SC3"


def forbidden_succession():
    """Night followed by a day shift; rest rule relaxed so only SC11 fires."""
    inst = _instance(2, min_rest_minutes=60)
    return inst, schedule_from_rows([["N", "D"]], inst), "SC11"


SINGLE_VIOLATIONS = {
    "SC15": (rest_violation, 20),
    "SC3": (incomplete_weekend, 40),
    "SC11": (forbidden_succession, 10),
}


def permissive_instance(days=30):
    """One nurse, every limit loose, no successions or weekends: only SC15 can fire."""
    cfg = ConstraintConfig(limits={
        "max_consecutive_free_days": 1000, "max_shift_types": 10,
        "max_consecutive_same_shift": 1000, "max_consecutive_working_days": 1000,
        "max_shift_types_per_week": 10, "max_shifts_per_weekday": 1000,
        "max_shifts_total": 1000, "min_consecutive_free_days": 1,
        "min_consecutive_working_days": 1, "max_working_weekends_in_4_weeks": 1000,
        "max_blank_per_day": 1000,
    }, forbidden_successions=frozenset())
    nurse = Nurse(0, "solo", {"nurse", "head_nurse"}, 10**6)
    return RosterInstance(days, (nurse,), standard_shifts(), cfg, weekend_weekdays=frozenset())
