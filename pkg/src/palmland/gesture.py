"""Arm-gesture classification: STAY vs APPROACH from chest-hand distance.

A stretched arm (hand far from the chest) asks the drone to approach, a bent
arm tells it to hold. The raw rule is a single distance threshold; a
hysteresis band plus a dwell time are layered on top so that tracking noise
near the threshold cannot chatter the state. Setting both to zero recovers
the bare threshold rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .geom import UserModel, horizontal_distance

# Tick times are multiples of the planner period, so dwell comparisons see
# float dust like 0.3 - 0.1 = 0.19999999999999998; absorb it.
_TIME_EPS = 1e-9


class Gesture(enum.Enum):
    STAY = "STAY"
    APPROACH = "APPROACH"


@dataclass(frozen=True)
class GestureConfig:
    threshold: float = 0.30  # chest-hand distance separating bent from stretched [m]
    hysteresis_band: float = 0.04  # full dead-band width centered on threshold [m]
    min_hold: float = 0.2  # opposite condition must persist this long [s]

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise ValueError("threshold must be > 0")
        if not (0.0 <= self.hysteresis_band < self.threshold):
            raise ValueError("hysteresis_band must be in [0, threshold)")
        if self.min_hold < 0.0:
            raise ValueError("min_hold must be >= 0")


@dataclass(frozen=True)
class GestureState:
    """Current classification plus the bookkeeping needed for debouncing.

    pending/pending_since track how long the opposite raw condition has been
    observed; a transition fires only once that exceeds min_hold.
    """

    current: Gesture = Gesture.STAY
    last_transition_t: float = 0.0
    pending: Gesture | None = None
    pending_since: float = 0.0


def chest_hand_distance(user: UserModel) -> float:
    """Horizontal distance between the user's palm and chest."""
    return horizontal_distance(user.palm.position, user.chest.position)


def classify(d: float, prev: GestureState, t: float, cfg: GestureConfig) -> GestureState:
    """Advance the gesture state machine by one observation.

    Args:
        d: chest-hand distance [m], >= 0.
        prev: state returned by the previous call.
        t: observation time [s], monotone non-decreasing.
        cfg: thresholds and debounce settings.

    Returns:
        The next GestureState. The classification switches to APPROACH only
        once d > threshold + band/2 has persisted for min_hold, and to STAY
        only once d < threshold - band/2 has persisted for min_hold; inside
        the dead band (or before the dwell elapses) the previous value is
        kept. A tie d == threshold with zero band classifies as STAY.
    """
    if d < 0.0:
        raise ValueError(f"distance must be >= 0, got {d}")

    half = 0.5 * cfg.hysteresis_band
    if d > cfg.threshold + half:
        raw = Gesture.APPROACH
    elif d < cfg.threshold - half or (cfg.hysteresis_band == 0.0 and d <= cfg.threshold):
        raw = Gesture.STAY
    else:
        raw = None  # dead band

    if raw is None or raw == prev.current:
        if prev.pending is not None:
            return replace(prev, pending=None, pending_since=0.0)
        return prev

    if prev.pending != raw:
        prev = replace(prev, pending=raw, pending_since=t)
    if t - prev.pending_since >= cfg.min_hold - _TIME_EPS:
        return GestureState(current=raw, last_transition_t=t, pending=None, pending_since=0.0)
    return prev
