"""Game instances, strategy configurations, validation, and the JSON document formats."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Optional

from .metric import (
    MetricError,
    MetricInterest,
    MetricSpace,
    check_metric,
    granularity_violation,
)

MODE_PLAIN = "plain"
MODE_EXPERTISE = "expertise_filtered"
MODES = (MODE_PLAIN, MODE_EXPERTISE)

UTILITY_WEIGHTED = "weighted_sum"
UTILITY_NEAREST = "nearest_subject"
UTILITY_MODES = (UTILITY_WEIGHTED, UTILITY_NEAREST)

DEFAULT_SCALE = 100
DEFAULT_PROFILE = ((0, 1),)


class ValidationError(ValueError):
    """An instance or configuration document violates a structural invariant."""


def _check_id(value: Any, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValidationError(f"{what} must be a non-negative integer, got {value!r}")
    return value


@dataclass(frozen=True)
class User:
    """One user: id, attention budget, positive-tick weights, optional interest ball."""

    id: int
    budget: int
    weights: dict[int, int]
    ball: Optional[MetricInterest] = None

    def __post_init__(self) -> None:
        _check_id(self.id, "user id")
        if not isinstance(self.budget, int) or isinstance(self.budget, bool) or self.budget < 1:
            raise ValidationError(f"user {self.id}: budget must be >= 1, got {self.budget!r}")
        clean: dict[int, int] = {}
        for sid, ticks in self.weights.items():
            _check_id(sid, f"user {self.id}: weight subject id")
            if not isinstance(ticks, int) or isinstance(ticks, bool) or ticks < 0:
                raise ValidationError(f"user {self.id}: weight for subject {sid} must be >= 0")
            if ticks > 0:
                clean[sid] = ticks
        object.__setattr__(self, "weights", clean)

    @property
    def interest_set(self) -> frozenset[int]:
        return frozenset(self.weights)


def ball_weights(space: MetricSpace, producers: Iterable[int], ball: MetricInterest) -> dict[int, int]:
    """Derive the weight map of a ball-specified user from its value profile."""
    out: dict[int, int] = {}
    for s in producers:
        d = space.distance(ball.center, s)
        if d <= ball.radius:
            out[s] = ball.value_at(d)
    return out


def ball_user(
    uid: int,
    budget: int,
    center: int,
    radius: int,
    space: MetricSpace,
    producers: Iterable[int],
    value_profile: tuple[tuple[int, int], ...] = DEFAULT_PROFILE,
) -> User:
    """Construct a ball-specified user with weights derived from the metric."""
    ball = MetricInterest(center=center, radius=radius, value_profile=value_profile)
    return User(id=uid, budget=budget, weights=ball_weights(space, producers, ball), ball=ball)


@dataclass(frozen=True)
class FlowGame:
    """A complete, validated game instance; immutable after construction."""

    producers: tuple[int, ...]
    users: tuple[User, ...]
    scale: int = DEFAULT_SCALE
    mode: str = MODE_PLAIN
    utility_mode: str = UTILITY_WEIGHTED
    metric: Optional[MetricSpace] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "producers", tuple(sorted(self.producers)))
        object.__setattr__(self, "users", tuple(sorted(self.users, key=lambda u: u.id)))
        self._validate()

    def _validate(self) -> None:
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.utility_mode not in UTILITY_MODES:
            raise ValidationError(f"unknown utility mode {self.utility_mode!r}")
        if not isinstance(self.scale, int) or self.scale < 1:
            raise ValidationError(f"scale must be a positive integer, got {self.scale!r}")
        producer_set = set()
        for s in self.producers:
            _check_id(s, "producer id")
            if s in producer_set:
                raise ValidationError(f"duplicate producer id {s}")
            producer_set.add(s)
        seen_users = set()
        for u in self.users:
            if u.id in seen_users:
                raise ValidationError(f"duplicate user id {u.id}")
            if u.id in producer_set:
                raise ValidationError(f"id {u.id} used by both a user and a producer")
            seen_users.add(u.id)
            for sid in u.weights:
                if sid not in producer_set:
                    raise ValidationError(f"user {u.id}: weight references unknown subject {sid}")
        if self.metric is not None:
            violation = check_metric(self.metric)
            if violation is None:
                violation = granularity_violation(self.metric)
            if violation is not None:
                raise ValidationError(f"metric rejected: {violation}")
            for s in self.producers:
                if not self.metric.has_point(s):
                    raise ValidationError(f"producer {s} missing from metric points")
        needs_metric = self.mode == MODE_EXPERTISE or self.utility_mode == UTILITY_NEAREST
        if needs_metric and self.metric is None:
            raise ValidationError(f"mode {self.mode}/{self.utility_mode} requires a metric")
        for u in self.users:
            if u.ball is not None:
                if self.metric is None:
                    raise ValidationError(f"user {u.id} has an interest ball but no metric is attached")
                if not self.metric.has_point(u.ball.center):
                    raise ValidationError(f"user {u.id}: center {u.ball.center} missing from metric points")
                derived = ball_weights(self.metric, self.producers, u.ball)
                if derived != u.weights:
                    raise ValidationError(f"user {u.id}: weights do not match the interest ball")
            elif needs_metric:
                raise ValidationError(
                    f"user {u.id} needs an interest ball under {self.mode}/{self.utility_mode}"
                )
        covered = set()
        for u in self.users:
            covered.update(u.weights)
        missing = producer_set - covered
        if missing:
            raise ValidationError(
                f"producers {sorted(missing)} are in no user's interest set"
            )

    @property
    def n(self) -> int:
        return len(self.users)

    @property
    def p(self) -> int:
        return len(self.producers)

    @property
    def producer_set(self) -> frozenset[int]:
        return frozenset(self.producers)

    @property
    def user_ids(self) -> tuple[int, ...]:
        return tuple(u.id for u in self.users)

    def user(self, uid: int) -> User:
        for u in self.users:
            if u.id == uid:
                return u
        raise ValidationError(f"unknown user {uid}")

    @property
    def is_homogeneous(self) -> bool:
        """All users value every subject at one common positive tick value."""
        if not self.users or not self.producers:
            return False
        ticks = {t for u in self.users for t in u.weights.values()}
        if len(ticks) != 1:
            return False
        full = self.producer_set
        return all(u.interest_set == full for u in self.users)

    @property
    def homogeneous_tick(self) -> int:
        if not self.is_homogeneous:
            raise ValidationError("game is not homogeneous")
        return next(iter(self.users[0].weights.values()))


def interest_set(game: FlowGame, uid: int) -> frozenset[int]:
    """Subjects the user values positively (the only ones it retransmits)."""
    return game.user(uid).interest_set


@dataclass
class Configuration:
    """Per-user follow sets; the mutable object of the dynamics."""

    follows: dict[int, frozenset[int]]

    def __post_init__(self) -> None:
        self.follows = {
            uid: frozenset(eps) for uid, eps in self.follows.items() if eps
        }

    def strategy(self, uid: int) -> frozenset[int]:
        return self.follows.get(uid, frozenset())

    def replaced(self, uid: int, strategy: Iterable[int]) -> "Configuration":
        new = dict(self.follows)
        new[uid] = frozenset(strategy)
        return Configuration(new)

    def validate(self, game: FlowGame) -> None:
        known = set(game.user_ids)
        endpoints = known | game.producer_set
        for uid, eps in self.follows.items():
            if uid not in known:
                raise ValidationError(f"configuration references unknown user {uid}")
            user = game.user(uid)
            if len(eps) > user.budget:
                raise ValidationError(
                    f"user {uid}: {len(eps)} follows exceed budget {user.budget}"
                )
            for e in eps:
                if e == uid:
                    raise ValidationError(f"user {uid}: self-follow")
                if e not in endpoints:
                    raise ValidationError(f"user {uid}: unknown endpoint {e}")

    def canonical_key(self, game: FlowGame) -> tuple:
        return tuple((uid, tuple(sorted(self.strategy(uid)))) for uid in game.user_ids)

    def to_json_obj(self, game: Optional[FlowGame] = None) -> dict:
        uids = game.user_ids if game is not None else sorted(self.follows)
        return {"follows": {str(uid): sorted(self.strategy(uid)) for uid in uids}}


def _require_keys(obj: Mapping[str, Any], required: set[str], optional: set[str], what: str) -> None:
    keys = set(obj)
    missing = required - keys
    if missing:
        raise ValidationError(f"{what}: missing keys {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ValidationError(f"{what}: unknown keys {sorted(unknown)}")


def _parse_user(obj: Any, metric: Optional[MetricSpace], producers: list[int]) -> User:
    if not isinstance(obj, dict):
        raise ValidationError(f"user entry must be an object, got {obj!r}")
    uid = obj.get("id")
    _check_id(uid, "user id")
    if "weights" in obj:
        _require_keys(obj, {"id", "budget", "weights"}, set(), f"user {uid}")
        if not isinstance(obj["weights"], dict):
            raise ValidationError(f"user {uid}: weights must be an object")
        weights = {}
        for key, ticks in obj["weights"].items():
            try:
                sid = int(key)
            except (TypeError, ValueError):
                raise ValidationError(f"user {uid}: bad subject key {key!r}") from None
            weights[sid] = ticks
        return User(id=uid, budget=obj["budget"], weights=weights)
    _require_keys(obj, {"id", "budget", "center", "radius"}, {"value_profile"}, f"user {uid}")
    if metric is None:
        raise ValidationError(f"user {uid}: ball interest requires a metric")
    profile = DEFAULT_PROFILE
    if "value_profile" in obj:
        raw = obj["value_profile"]
        if not isinstance(raw, list) or any(not isinstance(e, list) or len(e) != 2 for e in raw):
            raise ValidationError(f"user {uid}: value_profile must be a list of [distance, ticks]")
        profile = tuple((d, v) for d, v in raw)
    try:
        return ball_user(
            uid, obj["budget"], obj["center"], obj["radius"], metric, producers, profile
        )
    except MetricError as exc:
        raise ValidationError(f"user {uid}: {exc}") from None


def load_instance(text: str) -> FlowGame:
    """Parse and validate an instance document; diagnostics name the offending entity."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("instance document must be a JSON object")
    _require_keys(
        doc,
        {"producers", "users"},
        {"scale", "mode", "utility_mode", "metric"},
        "instance",
    )
    if not isinstance(doc["producers"], list) or not isinstance(doc["users"], list):
        raise ValidationError("producers and users must be arrays")
    metric = None
    if "metric" in doc and doc["metric"] is not None:
        mobj = doc["metric"]
        if not isinstance(mobj, dict):
            raise ValidationError("metric must be an object")
        _require_keys(mobj, {"points", "matrix"}, set(), "metric")
        try:
            metric = MetricSpace.normalized(mobj["points"], mobj["matrix"])
        except MetricError as exc:
            raise ValidationError(f"metric rejected: {exc}") from None
    producers = list(doc["producers"])
    users = tuple(_parse_user(u, metric, producers) for u in doc["users"])
    try:
        return FlowGame(
            producers=tuple(producers),
            users=users,
            scale=doc.get("scale", DEFAULT_SCALE),
            mode=doc.get("mode", MODE_PLAIN),
            utility_mode=doc.get("utility_mode", UTILITY_WEIGHTED),
            metric=metric,
        )
    except MetricError as exc:
        raise ValidationError(str(exc)) from None


def _instance_json_obj(game: FlowGame) -> dict:
    users = []
    for u in game.users:
        if u.ball is not None:
            entry: dict[str, Any] = {
                "id": u.id,
                "budget": u.budget,
                "center": u.ball.center,
                "radius": u.ball.radius,
            }
            if u.ball.value_profile != DEFAULT_PROFILE:
                entry["value_profile"] = [list(pair) for pair in u.ball.value_profile]
        else:
            entry = {
                "id": u.id,
                "budget": u.budget,
                "weights": {str(s): t for s, t in sorted(u.weights.items())},
            }
        users.append(entry)
    obj: dict[str, Any] = {
        "scale": game.scale,
        "mode": game.mode,
        "utility_mode": game.utility_mode,
        "producers": list(game.producers),
        "users": users,
    }
    if game.metric is not None:
        obj["metric"] = {
            "points": list(game.metric.points),
            "matrix": [list(row) for row in game.metric.matrix],
        }
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def serialize_instance(game: FlowGame) -> str:
    """Canonical byte-stable instance document (sorted keys, compact separators)."""
    return canonical_json(_instance_json_obj(game))


def instance_hash(game: FlowGame) -> str:
    return hashlib.sha256(serialize_instance(game).encode("utf-8")).hexdigest()


def serialize_configuration(config: Configuration, game: Optional[FlowGame] = None) -> str:
    return canonical_json(config.to_json_obj(game))


def load_configuration(text: str, game: Optional[FlowGame] = None) -> Configuration:
    """Parse a configuration document, validating against the game when given."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("configuration document must be a JSON object")
    _require_keys(doc, {"follows"}, {"manifest"}, "configuration")
    if not isinstance(doc["follows"], dict):
        raise ValidationError("follows must be an object")
    follows = {}
    for key, eps in doc["follows"].items():
        try:
            uid = int(key)
        except (TypeError, ValueError):
            raise ValidationError(f"bad user key {key!r}") from None
        if not isinstance(eps, list):
            raise ValidationError(f"user {uid}: follows must be an array")
        if len(set(eps)) != len(eps):
            raise ValidationError(f"user {uid}: duplicate endpoints")
        for e in eps:
            _check_id(e, f"user {uid}: endpoint")
        follows[uid] = frozenset(eps)
    config = Configuration(follows)
    if game is not None:
        config.validate(game)
    return config
