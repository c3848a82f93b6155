"""Subject dissemination under plain or expertise filtering, and both utilities."""

from __future__ import annotations

from dataclasses import dataclass

from ._engine import GameCore, iter_bits
from .model import (
    MODE_EXPERTISE,
    MODE_PLAIN,
    UTILITY_NEAREST,
    UTILITY_WEIGHTED,
    Configuration,
    FlowGame,
    ValidationError,
)


@dataclass(frozen=True)
class Dissemination:
    """Per-user received subject sets computed from a configuration."""

    received: dict[int, frozenset[int]]

    def of(self, uid: int) -> frozenset[int]:
        try:
            return self.received[uid]
        except KeyError:
            raise ValidationError(f"unknown user {uid}") from None

    def to_json_obj(self) -> dict:
        return {str(uid): sorted(subjects) for uid, subjects in self.received.items()}


def _masks_to_dissemination(core: GameCore, masks: list[int]) -> Dissemination:
    received = {
        core.uid_of[u]: frozenset(core.sid_of[s] for s in iter_bits(masks[u]))
        for u in range(core.n)
    }
    return Dissemination(received)


def disseminate(game: FlowGame, config: Configuration) -> Dissemination:
    """Plain-mode dissemination: paths whose intermediate users are interested.

    The receiving endpoint need not be interested; interest gates only
    retransmission. Computed subject-by-subject via restricted reachability.
    """
    if game.mode != MODE_PLAIN:
        raise ValidationError("disseminate requires mode=plain")
    config.validate(game)
    core = GameCore(game)
    return _masks_to_dissemination(core, core.received_masks(core.to_dense(config)))


def disseminate_expertise(game: FlowGame, config: Configuration) -> Dissemination:
    """Expertise-filtered dissemination: every hop moves weakly closer to the subject.

    A path delivers s to u only if each intermediate v is interested in s and
    d(center_v, s) <= d(center_next, s). Users are processed per subject in
    non-decreasing distance order.
    """
    if game.mode != MODE_EXPERTISE:
        raise ValidationError("disseminate_expertise requires mode=expertise_filtered")
    config.validate(game)
    core = GameCore(game)
    return _masks_to_dissemination(core, core.received_masks(core.to_dense(config)))


def active_dissemination(game: FlowGame, config: Configuration) -> Dissemination:
    """Dispatch to the dissemination rule selected by the game's mode."""
    if game.mode == MODE_EXPERTISE:
        return disseminate_expertise(game, config)
    return disseminate(game, config)


def utility(game: FlowGame, dissemination: Dissemination, uid: int) -> int:
    """Weighted-sum utility in ticks: total value of received subjects."""
    if game.utility_mode != UTILITY_WEIGHTED:
        raise ValidationError("utility requires utility_mode=weighted_sum")
    user = game.user(uid)
    return sum(user.weights.get(s, 0) for s in dissemination.of(uid))


def utility_nearest(game: FlowGame, dissemination: Dissemination, uid: int) -> int:
    """Largest radius around the user's center whose subjects are all received.

    Scanning realized subject distances outward, the first gap caps the value;
    full coverage of the interest ball yields the interest radius itself.
    """
    if game.utility_mode != UTILITY_NEAREST:
        raise ValidationError("utility_nearest requires utility_mode=nearest_subject")
    if game.metric is None:
        raise ValidationError("utility_nearest requires a metric")
    user = game.user(uid)
    got = dissemination.of(uid)
    last = 0
    pending: dict[int, list[int]] = {}
    for s in game.producers:
        d = game.metric.distance(user.ball.center, s)
        if d <= user.ball.radius:
            pending.setdefault(d, []).append(s)
    for d in sorted(pending):
        if any(s not in got for s in pending[d]):
            return last
        last = d
    return user.ball.radius


def user_utility(game: FlowGame, dissemination: Dissemination, uid: int) -> int:
    """Utility under the game's active utility mode."""
    if game.utility_mode == UTILITY_NEAREST:
        return utility_nearest(game, dissemination, uid)
    return utility(game, dissemination, uid)
