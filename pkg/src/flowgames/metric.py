"""Finite integer metrics, ball covers, and the budgeted contact-graph construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

if TYPE_CHECKING:
    from .model import Configuration, FlowGame


class MetricError(ValueError):
    """A distance matrix or geometry precondition was rejected."""


class ConstructionError(RuntimeError):
    """The contact-graph construction cannot honor its coverage or budget guarantees."""


@dataclass(frozen=True)
class MetricViolation:
    """First witness of a broken metric axiom: kind plus the offending points."""

    kind: str  # "self_distance" | "symmetry" | "triangle" | "zero_distance"
    points: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind} violated at points {self.points}"


@dataclass(frozen=True)
class MetricSpace:
    """Finite point set with a symmetric non-negative integer distance matrix.

    Distances are integer ticks; callers that need half radii compare doubled
    distances instead of dividing.
    """

    points: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        if len(set(pts)) != len(pts):
            raise MetricError("duplicate point ids")
        mat = tuple(tuple(row) for row in self.matrix)
        if len(mat) != len(pts) or any(len(row) != len(pts) for row in mat):
            raise MetricError("matrix shape does not match point count")
        for row in mat:
            for v in row:
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    raise MetricError(f"distances must be non-negative integers, got {v!r}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "_index", {pt: i for i, pt in enumerate(pts)})

    @classmethod
    def normalized(cls, points: Sequence[int], matrix: Sequence[Sequence[int]]) -> "MetricSpace":
        """Build a space with points sorted ascending and the matrix permuted to match."""
        order = sorted(range(len(points)), key=lambda i: points[i])
        pts = tuple(points[i] for i in order)
        mat = tuple(tuple(matrix[i][j] for j in order) for i in order)
        return cls(pts, mat)

    def has_point(self, point: int) -> bool:
        return point in self._index

    def index_of(self, point: int) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise MetricError(f"unknown point {point}") from None

    def distance(self, x: int, y: int) -> int:
        return self.matrix[self.index_of(x)][self.index_of(y)]

    def ball(self, center: int, radius: int) -> tuple[int, ...]:
        """All points within `radius` of `center`, in point order."""
        row = self.matrix[self.index_of(center)]
        return tuple(p for i, p in enumerate(self.points) if row[i] <= radius)

    def realized_distances(self) -> tuple[int, ...]:
        """Sorted distinct distances occurring in the matrix (0 included)."""
        return tuple(sorted({v for row in self.matrix for v in row}))


def check_metric(space: MetricSpace) -> Optional[MetricViolation]:
    """Verify the three metric axioms; return the first violating pair/triple, else None."""
    pts = space.points
    mat = space.matrix
    k = len(pts)
    for i in range(k):
        if mat[i][i] != 0:
            return MetricViolation("self_distance", (pts[i],))
    for i in range(k):
        for j in range(i + 1, k):
            if mat[i][j] != mat[j][i]:
                return MetricViolation("symmetry", (pts[i], pts[j]))
    for i in range(k):
        for j in range(k):
            dij = mat[i][j]
            row_j = mat[j]
            for h in range(k):
                if mat[i][h] > dij + row_j[h]:
                    return MetricViolation("triangle", (pts[i], pts[j], pts[h]))
    return None


def granularity_violation(space: MetricSpace) -> Optional[MetricViolation]:
    """Distinct points at distance 0 are indistinguishable and rejected at load time."""
    mat = space.matrix
    for i in range(len(space.points)):
        for j in range(i + 1, len(space.points)):
            if mat[i][j] == 0:
                return MetricViolation("zero_distance", (space.points[i], space.points[j]))
    return None


@dataclass(frozen=True)
class MetricInterest:
    """A user's interest ball: center point, integer radius, non-increasing value profile.

    The profile is a step function given as (distance, ticks) breakpoints starting
    at distance 0; the weight of a subject at distance d <= radius is the ticks of
    the largest breakpoint distance <= d. Subjects beyond the radius have weight 0.
    """

    center: int
    radius: int
    value_profile: tuple[tuple[int, int], ...] = ((0, 1),)

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise MetricError(f"radius must be >= 0, got {self.radius}")
        prof = tuple((int(d), int(v)) for d, v in self.value_profile)
        if not prof or prof[0][0] != 0:
            raise MetricError("value profile must start at distance 0")
        for (d0, v0), (d1, v1) in zip(prof, prof[1:]):
            if d1 <= d0:
                raise MetricError("value profile distances must be strictly increasing")
            if v1 > v0:
                raise MetricError("value profile must be non-increasing")
        if any(v <= 0 for _, v in prof):
            raise MetricError("value profile ticks must be positive")
        object.__setattr__(self, "value_profile", prof)

    def value_at(self, distance: int) -> int:
        """Weight ticks for a subject at `distance`; 0 outside the radius."""
        if distance > self.radius:
            return 0
        ticks = self.value_profile[0][1]
        for d, v in self.value_profile:
            if d > distance:
                break
            ticks = v
        return ticks


@dataclass(frozen=True)
class StructureReport:
    """Certified geometry parameters of a metric game instance."""

    gamma: int
    gamma_method: str  # "exact" | "greedy"
    covering_radius: int
    covering_ok: bool
    covering_witness: Optional[int]
    delta: int
    regularity_ok: bool
    regularity_witness: Optional[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return self.covering_ok and self.regularity_ok

    def to_json_obj(self) -> dict:
        return {
            "gamma": self.gamma,
            "gamma_method": self.gamma_method,
            "covering_radius": self.covering_radius,
            "covering_ok": self.covering_ok,
            "covering_witness": self.covering_witness,
            "delta": self.delta,
            "regularity_ok": self.regularity_ok,
            "regularity_witness": list(self.regularity_witness) if self.regularity_witness else None,
        }


def _popcount(x: int) -> int:
    return x.bit_count()


def _greedy_cover_indices(universe: int, cand_masks: Sequence[int]) -> Optional[list[int]]:
    """Greedy max-coverage over bitmasks; ties go to the lowest candidate index."""
    covered = 0
    chosen: list[int] = []
    while covered != universe:
        best_i = -1
        best_new = 0
        for i, m in enumerate(cand_masks):
            new = _popcount(m & universe & ~covered)
            if new > best_new:
                best_new = new
                best_i = i
        if best_i < 0:
            return None
        chosen.append(best_i)
        covered |= cand_masks[best_i]
    return chosen


def _exact_min_cover(universe: int, cand_masks: Sequence[int]) -> int:
    """Branch-and-bound minimum set cover size (small instances only)."""
    greedy = _greedy_cover_indices(universe, cand_masks)
    if greedy is None:
        raise MetricError("uncoverable ball in exact cover search")
    best = len(greedy)
    n_bits = universe.bit_length()
    coverers: list[list[int]] = [[] for _ in range(n_bits)]
    for ci, m in enumerate(cand_masks):
        mm = m & universe
        while mm:
            b = mm & -mm
            coverers[b.bit_length() - 1].append(ci)
            mm ^= b

    def dfs(covered: int, used: int) -> None:
        nonlocal best
        if used >= best:
            return
        rem = universe & ~covered
        if not rem:
            best = used
            return
        # branch on the uncovered point with the fewest covering candidates
        pick = -1
        pick_opts = None
        mm = rem
        while mm:
            b = mm & -mm
            idx = b.bit_length() - 1
            opts = coverers[idx]
            if pick_opts is None or len(opts) < len(pick_opts):
                pick, pick_opts = idx, opts
            mm ^= b
        if not pick_opts:
            return
        for ci in sorted(pick_opts, key=lambda c: -_popcount(cand_masks[c] & rem)):
            dfs(covered | cand_masks[ci], used + 1)

    dfs(0, 0)
    return best


def doubling_constant(space: MetricSpace, method: str = "greedy", exact_cap: int = 18) -> int:
    """Smallest (exact) or certified upper bound (greedy) on the ball-halving cover size.

    For every center s and realized radius R, B(s, R) must be covered by the
    returned number of balls of radius R/2 (compared as 2*d <= R). Exact search
    allows cover centers anywhere in the space; the greedy bound reuses the
    ball-restricted greedy of `greedy_cover`, so exact <= greedy always holds.
    """
    if method not in ("exact", "greedy"):
        raise MetricError(f"unknown doubling method {method!r}")
    k = len(space.points)
    if method == "exact" and k > exact_cap:
        raise MetricError(f"exact doubling search capped at {exact_cap} points, space has {k}")
    gamma = 1 if k else 0
    mat = space.matrix
    radii = [r for r in space.realized_distances() if r > 0]
    for si in range(k):
        row = mat[si]
        for radius in radii:
            ball = [i for i in range(k) if row[i] <= radius]
            bit_of = {i: b for b, i in enumerate(ball)}
            universe = (1 << len(ball)) - 1
            if method == "exact":
                cands = list(range(k))
            else:
                cands = ball
            masks = []
            for ci in cands:
                crow = mat[ci]
                m = 0
                for i in ball:
                    if 2 * crow[i] <= radius:
                        m |= 1 << bit_of[i]
                masks.append(m)
            if method == "exact":
                size = _exact_min_cover(universe, masks)
            else:
                chosen = _greedy_cover_indices(universe, masks)
                if chosen is None:
                    raise MetricError("greedy half-radius cover failed")  # pragma: no cover
                size = len(chosen)
            gamma = max(gamma, size)
    return gamma


def greedy_cover(space: MetricSpace, center: int, radius: int, target_radius: int) -> tuple[int, ...]:
    """Cover B(center, radius) with balls of radius `target_radius`; return their centers.

    Candidate centers are the points of the ball itself (every ball point covers
    itself, so a cover always exists). Greedy picks the candidate covering the
    most uncovered points, ties to the lowest point id. The returned cover is
    verified by membership before returning.
    """
    if target_radius < 0:
        raise MetricError("target radius must be >= 0")
    ball = space.ball(center, radius)
    if not ball:
        raise MetricError(f"center {center} not in space")  # ball always contains center
    bit_of = {p: b for b, p in enumerate(ball)}
    universe = (1 << len(ball)) - 1
    cands = sorted(ball)
    masks = []
    for c in cands:
        crow = space.matrix[space.index_of(c)]
        m = 0
        for p in ball:
            if crow[space.index_of(p)] <= target_radius:
                m |= 1 << bit_of[p]
        masks.append(m)
    chosen = _greedy_cover_indices(universe, masks)
    if chosen is None:
        raise MetricError("ball cover is infeasible")  # pragma: no cover
    centers = tuple(sorted(cands[i] for i in chosen))
    for p in ball:  # membership verification of the returned cover
        if all(space.distance(c, p) > target_radius for c in centers):
            raise MetricError(f"cover verification failed at point {p}")  # pragma: no cover
    return centers


def _ball_users(game: "FlowGame") -> list:
    users = [u for u in game.users if u.ball is not None]
    if len(users) != len(game.users):
        raise MetricError("operation requires an interest ball for every user")
    if game.metric is None:
        raise MetricError("operation requires a metric")
    return users


def covering_radius_check(game: "FlowGame", r: int) -> tuple[bool, Optional[int]]:
    """True iff every subject is within r of some user center with radius >= r."""
    users = _ball_users(game)
    space = game.metric
    centers = [(u.ball.center, u.ball.radius) for u in users]
    for s in game.producers:
        if not any(radius >= r and space.distance(s, c) <= r for c, radius in centers):
            return False, s
    return True, None


def sparsity(space: MetricSpace, subjects: Iterable[int], r: int) -> int:
    """Maximum number of subjects inside any radius-r ball of the space."""
    subj = [space.index_of(s) for s in subjects]
    best = 0
    for row in space.matrix:
        best = max(best, sum(1 for i in subj if row[i] <= r))
    return best


def regularity_check(game: "FlowGame", r: int) -> tuple[bool, Optional[tuple[int, int]]]:
    """Nearby interest centers must have comparably large radii.

    For distinct users u, v with 2*d(c_u, c_v) < 3*R_u + 2r the check requires
    2*R_v >= R_u + 2r (doubled comparisons keep the arithmetic integral).
    """
    users = _ball_users(game)
    space = game.metric
    for u in users:
        for v in users:
            if u.id == v.id:
                continue
            if 2 * space.distance(u.ball.center, v.ball.center) < 3 * u.ball.radius + 2 * r:
                if 2 * v.ball.radius < u.ball.radius + 2 * r:
                    return False, (u.id, v.id)
    return True, None


def structure_report(
    game: "FlowGame", r: int, gamma_method: str = "greedy", exact_cap: int = 18
) -> StructureReport:
    """Run all four geometry checks and certify gamma/delta for the given radius."""
    _ball_users(game)
    gamma = doubling_constant(game.metric, gamma_method, exact_cap=exact_cap)
    cov_ok, cov_witness = covering_radius_check(game, r)
    delta = sparsity(game.metric, game.producers, r)
    reg_ok, reg_witness = regularity_check(game, r)
    return StructureReport(
        gamma=gamma,
        gamma_method=gamma_method,
        covering_radius=r,
        covering_ok=cov_ok,
        covering_witness=cov_witness,
        delta=delta,
        regularity_ok=reg_ok,
        regularity_witness=reg_witness,
    )


def ceil_log2_ratio(numerator: int, denominator: int) -> int:
    """Smallest i >= 0 with denominator * 2**i >= numerator (integer ceil of log2)."""
    if numerator <= 0 or denominator <= 0:
        raise MetricError("ceil_log2_ratio needs positive integers")
    i = 0
    value = denominator
    while value < numerator:
        value *= 2
        i += 1
    return i


def contact_levels(radius: int, r: int) -> int:
    """Number of doubling levels a user of the given interest radius needs."""
    if radius <= 0:
        return 0
    return ceil_log2_ratio(radius, r)


def build_optimal_configuration(
    game: "FlowGame", r: int, gamma_method: str = "greedy", exact_cap: int = 18
) -> "Configuration":
    """Build a full-coverage configuration by layered ball covers.

    Level 1 links a user directly to the producers within min(R_u, 2r) of its
    center. Each higher level i covers the ball of radius min(R_u, 2**i * r)
    with greedy sub-balls of radius 2**(i-2) * r and snaps every cover center
    to the nearest user center with radius >= r (ties to the lowest user id).
    The nested-ball property (each level's subjects lie inside the union of the
    contacts' previous-level balls) is verified exhaustively; violations and
    budget overruns raise ConstructionError.
    """
    from .model import Configuration

    users = _ball_users(game)
    space = game.metric
    report = structure_report(game, r, gamma_method, exact_cap=exact_cap)
    if not report.covering_ok:
        raise ConstructionError(f"covering radius {r} fails at subject {report.covering_witness}")
    if not report.regularity_ok:
        raise ConstructionError(f"radius regularity fails at user pair {report.regularity_witness}")

    producer_set = set(game.producers)
    snap_pool = [u for u in users if u.ball.radius >= r]

    def snap(point: int):
        best = None
        best_key = None
        for v in snap_pool:
            key = (space.distance(point, v.ball.center), v.id)
            if best_key is None or key < best_key:
                best, best_key = v, key
        return best

    follows: dict[int, frozenset[int]] = {}
    for u in users:
        center, radius = u.ball.center, u.ball.radius
        links: set[int] = set()
        level1 = min(radius, 2 * r)
        links.update(s for s in space.ball(center, level1) if s in producer_set)
        level_contacts: dict[int, dict] = {}
        for i in range(2, contact_levels(radius, r) + 1):
            level_radius = min(radius, (1 << i) * r)
            target = (1 << (i - 2)) * r
            contacts: dict = {}
            for c in greedy_cover(space, center, level_radius, target):
                v = snap(c)
                if v is None:
                    raise ConstructionError(f"no user with radius >= {r} to host cover center {c}")
                contacts[v.id] = v
            level_contacts[i] = contacts
            for vid in contacts:
                if vid != u.id:
                    links.add(vid)
        for i, contacts in level_contacts.items():
            level_radius = min(radius, (1 << i) * r)
            prev = i - 1
            sources = list(contacts.values()) + [u]
            for s in space.ball(center, level_radius):
                if s not in producer_set:
                    continue
                inside = any(
                    space.distance(v.ball.center, s) <= min(v.ball.radius, (1 << prev) * r)
                    for v in sources
                )
                if not inside:
                    raise ConstructionError(
                        f"level {i} ball of user {u.id} is not nested: subject {s} uncovered"
                    )
        if len(links) > u.budget:
            raise ConstructionError(
                f"budget insufficient for user {u.id}: needs {len(links)}, has {u.budget}"
            )
        follows[u.id] = frozenset(links)
    return Configuration(follows)
