"""Tunable constants for the safety arena.

Everything that is a policy knob rather than a hard rule lives here, so the
server CLI can override individual values (``--constants key=val``) and the
simulator can pin them per scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Constants:
    # geometry
    arm_length_m: float = 0.75         # one arm-length in meters
    radius_min_al: float = 0.5         # bubble radius slider bounds, arm-lengths
    radius_max_al: float = 4.0
    default_radius_al: float = 1.0     # shortcut / default bubble size
    hysteresis_exit: float = 1.1       # soft-boundary unhide at 1.1 * radius

    # kinematics
    tick_hz: int = 20
    v_max_mps: float = 4.0             # speed cap on movement intents

    # effects
    flash_s: float = 3.0               # bubble flash duration on violation

    # suggestion rate limiting
    rate_limit_sends: int = 5          # > this many sends per window -> cooldown
    rate_window_s: float = 60.0
    cooldown_s: float = 120.0
    suggestion_expire_s: float = 30.0

    # room directory levels
    crowd_medium_frac: float = 1.0 / 3.0   # occupancy >= this -> Medium
    crowd_crowded_frac: float = 2.0 / 3.0  # occupancy >= this -> Crowded
    noise_quiet_max: int = 3               # unmuted players <= this -> Quiet
    noise_medium_max: int = 8              # <= this -> Medium, else Loud

    # simulator latency model (seconds, +/- jitter fraction)
    latency_menu_s: float = 2.5
    latency_hotkey_s: float = 0.4
    latency_suggestion_s: float = 0.8
    latency_jitter: float = 0.2
    touch_range_m: float = 0.4         # tag / contact distance

    # broad phase
    cell_size_m: float = 6.0           # 2 * max bubble radius in meters

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_hz

    def seconds_to_ticks(self, s: float) -> int:
        return int(round(s * self.tick_hz))

    def with_overrides(self, overrides: dict[str, float | int]) -> "Constants":
        return replace(self, **overrides)


DEFAULTS = Constants()

_FIELD_TYPES = {f.name: f.type for f in fields(Constants)}


def parse_overrides(pairs: list[str]) -> dict[str, float | int]:
    """Parse ``key=value`` strings into typed constant overrides."""
    out: dict[str, float | int] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"expected key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"unknown constant {key!r}")
        ftype = _FIELD_TYPES[key]
        out[key] = int(raw) if "int" in str(ftype) else float(raw)
    return out
