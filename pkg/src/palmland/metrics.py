"""Run-trace CSV format, tracking metrics, and the safety audit.

A run trace is one CSV row per control step: time, drone position, active
goal, headings, measured user keypoints, and the planner's discrete state.
The column set is a compatibility contract; tools downstream parse it by
name.

Metrics computed here: position-tracking RMSE, commanded-vs-achieved lag
via normalized cross-correlation, hold drift, overshoot after
approach-to-stay switches, approach smoothness, and a hard-safety audit
(chest disk and speed cap) whose violation count drives the CLI exit code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gesture import Gesture
from .planner import Domain, MissionPhase, PlannerConfig
from .scenario import TraceFormatError

RUN_TRACE_COLUMNS = (
    "t", "x", "y", "z", "tx", "ty", "tz", "yaw", "goal_yaw",
    "chest_x", "chest_y", "chest_z", "palm_x", "palm_y", "palm_z",
    "phase", "domain", "gesture", "cmd_speed",
)

# Figures measured on the physical system this simulator models, reported
# alongside simulated metrics for side-by-side comparison.
HARDWARE_REFERENCE = {
    "rmse_m": 0.1695,
    "delay_s": 1.0,
    "min_chest_drone_m": 0.693,
}

AIRBORNE_PHASES = frozenset((
    MissionPhase.TAKEOFF.value, MissionPhase.FLIGHT.value, MissionPhase.LANDING.value,
))

SAFETY_EPS = 1e-9
HOLD_SETTLE_S = 1.5  # ignore this much transient after a STAY switch
OVERSHOOT_WINDOW_S = 3.0


class MetricsError(ValueError):
    """A metric is undefined for the given data."""


@dataclass(frozen=True)
class RunTrace:
    t: np.ndarray  # (N,)
    pos: np.ndarray  # (N, 3) drone position
    goal: np.ndarray  # (N, 3) active setpoint
    yaw: np.ndarray  # (N,)
    goal_yaw: np.ndarray  # (N,)
    chest: np.ndarray  # (N, 3)
    palm: np.ndarray  # (N, 3)
    phase: np.ndarray  # (N,) str
    domain: np.ndarray  # (N,) str
    gesture: np.ndarray  # (N,) str
    cmd_speed: np.ndarray  # (N,)

    def __len__(self) -> int:
        return len(self.t)


def format_trace_row(t: float, pos, goal, yaw: float, goal_yaw: float,
                     chest, palm, phase: str, domain: str, gesture: str,
                     cmd_speed: float) -> str:
    """One CSV row. repr() keeps the shortest exact float form, so
    identical runs produce byte-identical files.
    """
    nums = [t, pos[0], pos[1], pos[2], goal[0], goal[1], goal[2], yaw, goal_yaw,
            chest[0], chest[1], chest[2], palm[0], palm[1], palm[2]]
    parts = [repr(float(v)) for v in nums]
    parts += [phase, domain, gesture, repr(float(cmd_speed))]
    return ",".join(parts)


def trace_header() -> str:
    return ",".join(RUN_TRACE_COLUMNS)


_PHASES = frozenset(p.value for p in MissionPhase)
_DOMAINS = frozenset(d.value for d in Domain)
_GESTURES = frozenset(g.value for g in Gesture)


def load_run_trace(path: str | Path) -> RunTrace:
    path = Path(path)
    return parse_run_trace(path.read_text().splitlines(), where=str(path))


def parse_run_trace(lines, where: str = "<memory>") -> RunTrace:
    """Parse run-trace CSV lines; error messages cite `where` and the line."""
    lines = list(lines)
    if not lines:
        raise TraceFormatError(f"{where}: empty file")
    path = where
    header = tuple(col.strip() for col in lines[0].split(","))
    if header != RUN_TRACE_COLUMNS:
        raise TraceFormatError(
            f"{path}:1: bad header; expected '{trace_header()}'"
        )
    numeric: list[list[float]] = []
    phases: list[str] = []
    domains: list[str] = []
    gestures: list[str] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(RUN_TRACE_COLUMNS):
            raise TraceFormatError(
                f"{path}:{lineno}: expected {len(RUN_TRACE_COLUMNS)} fields, "
                f"got {len(parts)}"
            )
        try:
            nums = [float(p) for p in parts[:15]]
            speed = float(parts[18])
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in nums + [speed]):
            raise TraceFormatError(f"{path}:{lineno}: non-finite value")
        phase, domain, gesture = parts[15], parts[16], parts[17]
        if phase not in _PHASES:
            raise TraceFormatError(f"{path}:{lineno}: unknown phase '{phase}'")
        if domain not in _DOMAINS:
            raise TraceFormatError(f"{path}:{lineno}: unknown domain '{domain}'")
        if gesture not in _GESTURES:
            raise TraceFormatError(f"{path}:{lineno}: unknown gesture '{gesture}'")
        numeric.append(nums + [speed])
        phases.append(phase)
        domains.append(domain)
        gestures.append(gesture)
    if not numeric:
        raise TraceFormatError(f"{path}: no data rows")
    arr = np.asarray(numeric, dtype=np.float64)
    return RunTrace(
        t=arr[:, 0],
        pos=arr[:, 1:4],
        goal=arr[:, 4:7],
        yaw=arr[:, 7],
        goal_yaw=arr[:, 8],
        chest=arr[:, 9:12],
        palm=arr[:, 12:15],
        phase=np.asarray(phases, dtype=object),
        domain=np.asarray(domains, dtype=object),
        gesture=np.asarray(gestures, dtype=object),
        cmd_speed=arr[:, 15],
    )


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def rmse(actual: np.ndarray, target: np.ndarray) -> float:
    """Root-mean-square of the per-sample Euclidean error."""
    actual = np.asarray(actual, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if actual.shape != target.shape:
        raise MetricsError("actual and target shapes differ")
    if actual.size == 0:
        raise MetricsError("rmse of an empty series")
    diff = actual - target
    if diff.ndim == 1:
        sq = diff * diff
    else:
        sq = np.sum(diff * diff, axis=1)
    return float(np.sqrt(np.mean(sq)))


def estimate_delay(commanded: np.ndarray, achieved: np.ndarray, dt: float,
                   max_lag: float = 3.0) -> float:
    """Lag (seconds) at which achieved best matches commanded.

    Normalized cross-correlation of the mean-removed series over non-negative
    integer lags up to max_lag; ties resolve to the smaller lag. Multi-column
    inputs are treated as one vector-valued signal. Raises MetricsError if
    either series has no variance (the lag would be meaningless).
    """
    if dt <= 0.0:
        raise MetricsError("dt must be > 0")
    a = np.asarray(commanded, dtype=np.float64)
    b = np.asarray(achieved, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape != b.shape:
        raise MetricsError("commanded and achieved shapes differ")
    n = a.shape[0]
    if n < 2:
        raise MetricsError("need at least 2 samples")
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    if not np.any(np.abs(a) > 0.0) or not np.any(np.abs(b) > 0.0):
        raise MetricsError("a series has zero variance; delay undefined")
    max_k = min(int(round(max_lag / dt)), n - 2)
    best_k = 0
    best_score = -math.inf
    for k in range(max_k + 1):
        bb = b[k:]
        aa = a[: n - k]
        num = float(np.sum(aa * bb))
        den = math.sqrt(float(np.sum(aa * aa)) * float(np.sum(bb * bb)))
        score = num / den if den > 0.0 else -math.inf
        if score > best_score:
            best_score = score
            best_k = k
    return best_k * dt


def _hdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a[:, :2] - b[:, :2]
    return np.sqrt(np.sum(d * d, axis=1))


@dataclass(frozen=True)
class SafetyAudit:
    disk_violations: int  # airborne setpoints inside the chest safety disk
    speed_violations: int  # commanded speeds above the cap
    min_chest_drone_m: float
    min_chest_setpoint_m: float

    @property
    def total_violations(self) -> int:
        return self.disk_violations + self.speed_violations


def safety_audit(trace: RunTrace, cfg: PlannerConfig | None = None) -> SafetyAudit:
    """Hard-safety checks over a trace. Zero violations is the pass bar."""
    cfg = cfg or PlannerConfig()
    airborne = np.asarray([p in AIRBORNE_PHASES for p in trace.phase], dtype=bool)
    if not np.any(airborne):
        return SafetyAudit(0, 0, math.inf, math.inf)
    goal_chest = _hdist(trace.goal[airborne], trace.chest[airborne])
    drone_chest = _hdist(trace.pos[airborne], trace.chest[airborne])
    disk = int(np.sum(goal_chest < cfg.safety_radius - SAFETY_EPS))
    speed = int(np.sum(trace.cmd_speed > cfg.max_speed + SAFETY_EPS))
    return SafetyAudit(
        disk_violations=disk,
        speed_violations=speed,
        min_chest_drone_m=float(np.min(drone_chest)),
        min_chest_setpoint_m=float(np.min(goal_chest)),
    )


def stay_hold_drift(trace: RunTrace) -> float | None:
    """Worst drift from the frozen goal while holding, after settling.

    For each maximal run of FLIGHT rows with gesture STAY, positions more
    than HOLD_SETTLE_S into the run are compared against the run's frozen
    goal. None when no hold lasts that long.
    """
    holding = np.asarray(
        [p == MissionPhase.FLIGHT.value and g == Gesture.STAY.value
         for p, g in zip(trace.phase, trace.gesture)], dtype=bool)
    worst: float | None = None
    i = 0
    n = len(trace)
    while i < n:
        if not holding[i]:
            i += 1
            continue
        j = i
        while j < n and holding[j]:
            j += 1
        t0 = trace.t[i]
        frozen = trace.goal[i]
        settled = np.arange(i, j)[trace.t[i:j] - t0 >= HOLD_SETTLE_S]
        if settled.size:
            err = trace.pos[settled] - frozen[None, :]
            d = float(np.max(np.sqrt(np.sum(err * err, axis=1))))
            worst = d if worst is None else max(worst, d)
        i = j
    return worst


def overshoot_after_switches(trace: RunTrace) -> float | None:
    """Worst travel past the frozen goal after an approach-to-stay switch.

    At each APPROACH -> STAY transition in flight, the drone's direction of
    travel is taken from the last displacement; the metric is the largest
    positive projection of (position - frozen goal) onto that direction over
    the following window. None when the trace has no such switch.
    """
    n = len(trace)
    worst: float | None = None
    for i in range(1, n):
        if not (trace.gesture[i] == Gesture.STAY.value
                and trace.gesture[i - 1] == Gesture.APPROACH.value
                and trace.phase[i] == MissionPhase.FLIGHT.value):
            continue
        step = trace.pos[i, :2] - trace.pos[i - 1, :2]
        norm = float(np.hypot(step[0], step[1]))
        if norm < 1e-9:
            over = 0.0
        else:
            u = step / norm
            frozen = trace.goal[i, :2]
            j = i
            t0 = trace.t[i]
            while (j < n and trace.t[j] - t0 <= OVERSHOOT_WINDOW_S
                   and trace.gesture[j] == Gesture.STAY.value):
                j += 1
            rel = trace.pos[i:j, :2] - frozen[None, :]
            over = max(0.0, float(np.max(rel @ u)))
        worst = over if worst is None else max(worst, over)
    return worst


def approach_smoothness(trace: RunTrace) -> float | None:
    """Largest increase in goal-to-palm distance between consecutive
    approach rows while the palm itself is still. A well-behaved approach
    never backs away from a stationary palm, so this should be ~0.
    """
    active = np.asarray(
        [p == MissionPhase.FLIGHT.value and g == Gesture.APPROACH.value
         for p, g in zip(trace.phase, trace.gesture)], dtype=bool)
    d_goal_palm = _hdist(trace.goal, trace.palm)
    worst: float | None = None
    for i in range(len(trace) - 1):
        if not (active[i] and active[i + 1]):
            continue
        palm_step = trace.palm[i + 1] - trace.palm[i]
        if float(np.max(np.abs(palm_step))) > 1e-9:
            continue
        inc = float(d_goal_palm[i + 1] - d_goal_palm[i])
        worst = inc if worst is None else max(worst, inc)
    return worst


SPEED_WINDOW_S = 0.1  # achieved speed is averaged over this window


def cruise_speed_std(trace: RunTrace) -> float | None:
    """Spread of the achieved speed during the far straight-line segment.

    Speeds are displacements over a SPEED_WINDOW_S stride, which smooths
    both the per-tick quantization of ideal tracking and wingbeat ripple.
    """
    mask = np.asarray(
        [p == MissionPhase.FLIGHT.value and g == Gesture.APPROACH.value
         and d == Domain.D1_FAR.value
         for p, g, d in zip(trace.phase, trace.gesture, trace.domain)],
        dtype=bool)
    n = len(trace)
    if n < 2:
        return None
    dt = float(np.median(np.diff(trace.t)))
    stride = max(1, int(round(SPEED_WINDOW_S / dt))) if dt > 0.0 else 1
    speeds = []
    for i in range(n - stride):
        if not (mask[i] and mask[i + stride]):
            continue
        span = trace.t[i + stride] - trace.t[i]
        if span <= 0.0:
            continue
        dp = trace.pos[i + stride, :2] - trace.pos[i, :2]
        speeds.append(float(np.hypot(dp[0], dp[1])) / span)
    if len(speeds) < 3:
        return None
    return float(np.std(np.asarray(speeds)))


@dataclass(frozen=True)
class MetricsReport:
    duration_s: float
    rows: int
    final_phase: str
    landed: bool
    rmse_m: float | None
    delay_s: float | None
    min_chest_drone_m: float
    min_chest_setpoint_m: float
    disk_violations: int
    speed_violations: int
    max_cmd_speed: float
    stay_hold_drift_m: float | None
    overshoot_m: float | None
    approach_smoothness_m: float | None
    cruise_speed_std: float | None

    def to_dict(self) -> dict:
        d = {
            "duration_s": self.duration_s,
            "rows": self.rows,
            "final_phase": self.final_phase,
            "landed": self.landed,
            "rmse_m": self.rmse_m,
            "delay_s": self.delay_s,
            "min_chest_drone_m": self.min_chest_drone_m,
            "min_chest_setpoint_m": self.min_chest_setpoint_m,
            "disk_violations": self.disk_violations,
            "speed_violations": self.speed_violations,
            "max_cmd_speed": self.max_cmd_speed,
            "stay_hold_drift_m": self.stay_hold_drift_m,
            "overshoot_m": self.overshoot_m,
            "approach_smoothness_m": self.approach_smoothness_m,
            "cruise_speed_std": self.cruise_speed_std,
            "hardware_reference": dict(HARDWARE_REFERENCE),
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compute_report(trace: RunTrace, cfg: PlannerConfig | None = None) -> MetricsReport:
    cfg = cfg or PlannerConfig()
    audit = safety_audit(trace, cfg)
    airborne = np.asarray([p in AIRBORNE_PHASES for p in trace.phase], dtype=bool)

    rmse_m: float | None = None
    if np.any(airborne):
        rmse_m = rmse(trace.pos[airborne], trace.goal[airborne])

    delay: float | None = None
    if len(trace) >= 3:
        dt = float(np.median(np.diff(trace.t)))
        try:
            delay = estimate_delay(trace.goal[:, :2], trace.pos[:, :2], dt)
        except MetricsError:
            delay = None

    return MetricsReport(
        duration_s=float(trace.t[-1] - trace.t[0]),
        rows=len(trace),
        final_phase=str(trace.phase[-1]),
        landed=trace.phase[-1] == MissionPhase.LANDED.value,
        rmse_m=rmse_m,
        delay_s=delay,
        min_chest_drone_m=audit.min_chest_drone_m,
        min_chest_setpoint_m=audit.min_chest_setpoint_m,
        disk_violations=audit.disk_violations,
        speed_violations=audit.speed_violations,
        max_cmd_speed=float(np.max(trace.cmd_speed)),
        stay_hold_drift_m=stay_hold_drift(trace),
        overshoot_m=overshoot_after_switches(trace),
        approach_smoothness_m=approach_smoothness(trace),
        cruise_speed_std=cruise_speed_std(trace),
    )
