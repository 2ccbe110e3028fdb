"""Per-tick geometry: hard-boundary clamping, soft-boundary visibility with
hysteresis, and proximity alert episodes.

The tick path is hot (the fuzz suites run 1e5 ticks), so the broad phase is a
flat spatial hash rebuilt per tick and the narrow phase stays in plain float
arithmetic. A brute-force O(n^2) oracle for each phase lives in the test
suite, not here.
"""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

from .config import Constants, DEFAULTS
from .types import (
    ALERT_RAISED,
    BUBBLE_FLASH,
    Effect,
    HARD,
    PlayerId,
    Pose,
    SOFT,
    VISIBILITY_CHANGED,
    WorldState,
    wrap_angle,
)

_EPS = 1e-9


@dataclass
class MoveIntent:
    player: PlayerId
    target: Pose
    tick: int = 0


class SpatialHash:
    """Uniform-grid broad phase over player positions, rebuilt each tick."""

    def __init__(self, cell_size: float):
        self.cell = cell_size
        self.grid: dict[tuple[int, int], list[PlayerId]] = defaultdict(list)
        self.positions: dict[PlayerId, tuple[float, float]] = {}

    def insert(self, pid: PlayerId, x: float, y: float) -> None:
        self.grid[(int(x // self.cell), int(y // self.cell))].append(pid)
        self.positions[pid] = (x, y)

    def move(self, pid: PlayerId, x: float, y: float) -> None:
        ox, oy = self.positions[pid]
        old = (int(ox // self.cell), int(oy // self.cell))
        new = (int(x // self.cell), int(y // self.cell))
        if old != new:
            self.grid[old].remove(pid)
            self.grid[new].append(pid)
        self.positions[pid] = (x, y)

    def nearby(self, x: float, y: float) -> list[PlayerId]:
        """Ids in the 3x3 cell block around (x, y); superset of all players
        within one cell size. Bucket order is insertion order, which is
        deterministic for a given event sequence; callers that emit effects
        sort their matches."""
        cx, cy = int(x // self.cell), int(y // self.cell)
        grid = self.grid
        out: list[PlayerId] = []
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                bucket = grid.get((gx, gy))
                if bucket:
                    out.extend(bucket)
        return out


def build_hash(state: WorldState, consts: Constants) -> SpatialHash:
    index = SpatialHash(consts.cell_size_m)
    cell = index.cell
    grid = index.grid
    positions = index.positions
    for pid, player in state.players.items():
        pose = player.pose
        x, y = pose.x, pose.y
        grid[(int(x // cell), int(y // cell))].append(pid)
        positions[pid] = (x, y)
    return index


def _segment_entry(
    px: float, py: float, tx: float, ty: float,
    cx: float, cy: float, r: float,
) -> Optional[float]:
    """Parameter t in [0, 1] where the segment P->T first enters the circle,
    or None if it starts inside or never enters."""
    rpx, rpy = px - cx, py - cy
    c = rpx * rpx + rpy * rpy - r * r
    dx, dy = tx - px, ty - py
    a = dx * dx + dy * dy
    b = 2.0 * (rpx * dx + rpy * dy)
    if c <= 0.0:
        # on the surface (within float slop of a previous clamp): an inward
        # move stops dead instead of tunneling through; deeper starts are
        # the push-out path's job
        if -1e-6 < c and b < 0.0:
            return 0.0
        return None
    if a <= 0.0:
        return None
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return None
    t = (-b - math.sqrt(disc)) / (2.0 * a)
    if 0.0 <= t <= 1.0:
        return t
    return None


def _resolve_point(
    px: float, py: float, tx: float, ty: float,
    spheres: list[tuple[float, float, float]],
) -> tuple[float, float, bool]:
    """Clamp the move P->T against a set of circles: stop at the first
    boundary hit (no sliding), then push out of any circle still containing
    the point (covers movers that started inside a freshly grown bubble).
    Returns the resolved point and whether any push-out was applied."""
    x, y = tx, ty
    best = None
    for cx, cy, r in spheres:
        t = _segment_entry(px, py, tx, ty, cx, cy, r)
        if t is not None and (best is None or t < best):
            best = t
    if best is not None:
        x = px + (tx - px) * best
        y = py + (ty - py) * best
    pushed = False
    for _ in range(32):
        deepest = None
        second = None
        deepest_depth = _EPS
        second_depth = _EPS
        for cx, cy, r in spheres:
            dx, dy = x - cx, y - cy
            d2 = dx * dx + dy * dy
            if d2 < r * r:
                d = math.sqrt(d2)
                depth = r - d
                if depth > deepest_depth:
                    second, second_depth = deepest, deepest_depth
                    deepest, deepest_depth = (cx, cy, r, d), depth
                elif depth > second_depth:
                    second, second_depth = (cx, cy, r, d), depth
        if deepest is None:
            break
        pushed = True
        if second is not None:
            # trapped in the lens of two overlapping circles: alternating
            # radial projections converge too slowly, so jump straight to
            # the nearer circle-circle intersection point
            x1, y1, r1, _ = deepest
            x2, y2, r2, _ = second
            ccx, ccy = x2 - x1, y2 - y1
            dcc = math.hypot(ccx, ccy)
            a = (r1 * r1 - r2 * r2 + dcc * dcc) / (2.0 * dcc) if dcc > 1e-12 else 0.0
            h2 = r1 * r1 - a * a
            if dcc > 1e-12 and h2 > 0.0:
                h = math.sqrt(h2)
                ux, uy = ccx / dcc, ccy / dcc
                bx, by = x1 + a * ux, y1 + a * uy
                if (x - bx) * -uy + (y - by) * ux >= 0.0:
                    x, y = bx - h * uy, by + h * ux
                else:
                    x, y = bx + h * uy, by - h * ux
                continue
            # concentric or one circle inside the other: fall through and
            # project out of the deepest; the next pass re-checks the rest
        cx, cy, r, d = deepest
        if d < 1e-12:
            x, y = cx + r, cy  # degenerate: dead center, push along +x
        else:
            scale = r / d
            x = cx + (x - cx) * scale
            y = cy + (y - cy) * scale
    else:
        # the iterative escape cycled between three or more circles:
        # enumerate the feasible corner candidates exactly
        x, y = _exact_escape(x, y, spheres)
    return x, y, pushed


def _exact_escape(
    x: float, y: float, spheres: list[tuple[float, float, float]]
) -> tuple[float, float]:
    """Nearest point to (x, y) outside every circle, chosen from the exact
    candidate set: radial projections onto each circle and the pairwise
    circle intersection points. Only runs when iterative push-out cycles."""
    candidates: list[tuple[float, float]] = []
    for cx, cy, r in spheres:
        dx, dy = x - cx, y - cy
        d = math.hypot(dx, dy)
        if d < 1e-12:
            candidates.append((cx + r, cy))
        else:
            candidates.append((cx + dx * r / d, cy + dy * r / d))
    for i, (x1, y1, r1) in enumerate(spheres):
        for x2, y2, r2 in spheres[i + 1:]:
            ccx, ccy = x2 - x1, y2 - y1
            dcc = math.hypot(ccx, ccy)
            if dcc < 1e-12 or dcc >= r1 + r2 or dcc <= abs(r1 - r2):
                continue
            a = (r1 * r1 - r2 * r2 + dcc * dcc) / (2.0 * dcc)
            h2 = r1 * r1 - a * a
            if h2 <= 0.0:
                continue
            h = math.sqrt(h2)
            ux, uy = ccx / dcc, ccy / dcc
            bx, by = x1 + a * ux, y1 + a * uy
            candidates.append((bx - h * uy, by + h * ux))
            candidates.append((bx + h * uy, by - h * ux))

    best = None
    best_d2 = math.inf
    for px, py in candidates:
        feasible = True
        for cx, cy, r in spheres:
            dx, dy = px - cx, py - cy
            if dx * dx + dy * dy < (r - 1e-9) * (r - 1e-9):
                feasible = False
                break
        if feasible:
            dx, dy = px - x, py - y
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                best, best_d2 = (px, py), d2
    return best if best is not None else (x, y)


def _settle_pushout(
    pid: PlayerId,
    x: float, y: float,
    m_r: float, m_exempt,
    hard: dict,
    index: SpatialHash,
) -> tuple[float, float]:
    """After a push-out the point may have drifted into a circle outside the
    original broad-phase window, so settle it against every constraint. This
    path only runs when a bubble grew over a player, so it can afford a full
    scan over the hard-bubble owners."""
    positions = index.positions
    for _ in range(8):
        spheres: list[tuple[float, float, float]] = []
        for oid, (r, exempt) in hard.items():
            if oid == pid:
                continue
            if pid in exempt:
                r = 0.0
            if m_r > r and oid not in m_exempt:
                r = m_r
            if r <= 0.0:
                continue
            ox, oy = positions[oid]
            dx, dy = x - ox, y - oy
            if dx * dx + dy * dy < (r + 1.0) * (r + 1.0):
                spheres.append((ox, oy, r))
        if m_r > 0.0:
            for oid, (ox, oy) in positions.items():
                if oid == pid or oid in m_exempt or oid in hard:
                    continue
                dx, dy = x - ox, y - oy
                if dx * dx + dy * dy < (m_r + 1.0) * (m_r + 1.0):
                    spheres.append((ox, oy, m_r))
        x, y, pushed = _resolve_point(x, y, x, y, spheres)
        if not pushed:
            break
    return x, y


def resolve_hard(
    state: WorldState,
    targets: dict[PlayerId, Pose],
    consts: Constants = DEFAULTS,
    index: SpatialHash | None = None,
) -> list[Effect]:
    """Resolve every player's position for this tick against all enabled hard
    bubbles, updating poses in place.

    Players are processed in ascending id; each resolves against the other
    players' current (possibly already-resolved) positions. A pair where both
    sides own enabled hard bubbles separates at the larger radius. Attempted
    intrusions flash the violated bubble's owner.
    """
    al = consts.arm_length_m
    players = state.players
    if index is None:
        index = build_hash(state, consts)
    effects: list[Effect] = []
    flash_ticks = consts.seconds_to_ticks(consts.flash_s)
    positions = index.positions
    grid = index.grid
    grid_get = grid.get
    cell = index.cell
    # per-tick constraint table: pid -> (radius_m, exempt) for hard bubbles.
    # With few owners a flat list beats any broad phase; past that, a grid of
    # the owners keyed by their start-of-tick cells takes over. Owners can
    # drift at most one intent step during the tick, far less than the slack
    # between the 3x3 window (>= cell size) and the largest bubble radius, so
    # the start-of-tick cells stay a valid broad phase all tick.
    hard: dict[PlayerId, tuple[float, frozenset[PlayerId] | set[PlayerId]]] = {}
    owners_flat: list[tuple[PlayerId, float, frozenset[PlayerId] | set[PlayerId]]] = []
    max_r = 0.0
    for oid, other in players.items():
        bubble = other.bubble
        if bubble.enabled and bubble.boundary == HARD:
            entry = (bubble.radius_al * al, bubble.exempt)
            hard[oid] = entry
            owners_flat.append((oid, entry[0], entry[1]))
            if entry[0] > max_r:
                max_r = entry[0]
    use_flat = len(owners_flat) <= 32
    hgrid: dict[tuple[int, int], list] = {}
    owners_x: list[list] = []
    if use_flat:
        # owners sorted by live x, updated in place whenever an owner moves,
        # so movers without a bubble scan only the owners inside an exact
        # [tx - max_r - seg, tx + max_r + seg] window
        owners_x = sorted(
            [positions[oid][0], oid, r, exempt, positions[oid][1]]
            for oid, r, exempt in owners_flat
        )
    else:
        for oid, r, exempt in owners_flat:
            ox, oy = positions[oid]
            key = (int(ox // cell), int(oy // cell))
            row = hgrid.get(key)
            if row is None:
                hgrid[key] = [(oid, r, exempt)]
            else:
                row.append((oid, r, exempt))
    hard_get = hard.get
    hgrid_get = hgrid.get

    targets_get = targets.get
    # scratch lists reused across movers; nothing downstream retains them
    spheres: list[tuple[float, float, float]] = []
    intruded_owners: list[PlayerId] = []
    for pid in sorted(players):
        mover = players[pid]
        target = targets_get(pid)
        px, py = positions[pid]
        if target is not None:
            tx, ty = target.x, target.y
            facing = target.facing
            # skip the re-wrap only when it provably changes nothing
            if facing != mover.pose.facing or not 0.0 <= facing < 2.0 * math.pi:
                mover.pose.facing = wrap_angle(facing) % (2.0 * math.pi)
        else:
            tx, ty = px, py

        own = hard_get(pid)
        if own is not None:
            m_r, m_exempt = own
        else:
            m_r, m_exempt = 0.0, ()
        if not hard and m_r == 0.0:
            if tx != px or ty != py:
                mover.pose.x, mover.pose.y = tx, ty
                index.move(pid, tx, ty)
            continue

        seg = math.hypot(tx - px, ty - py)
        # a circle can affect the clamped move only if its center is within
        # radius + segment length of the target; farther circles can't touch
        # the segment and can't contain the clamped point
        spheres.clear()
        intruded_owners.clear()
        if m_r == 0.0 and use_flat:
            # mover owns no hard bubble: only bubble owners inside the exact
            # x window can constrain it
            window = max_r + seg
            idx = bisect.bisect_left(owners_x, [tx - window])
            hi = tx + window
            olen = len(owners_x)
            while idx < olen:
                entry = owners_x[idx]
                idx += 1
                ox = entry[0]
                if ox > hi:
                    break
                oid = entry[1]
                exempt = entry[3]
                if oid == pid or pid in exempt:
                    continue
                r = entry[2]
                lim = r + seg
                oy = entry[4]
                ddy = ty - oy
                if ddy > lim or ddy < -lim:
                    continue
                ddx = tx - ox
                d2 = ddx * ddx + ddy * ddy
                if d2 >= lim * lim:
                    continue
                spheres.append((ox, oy, r))
                if d2 < r * r - 1e-12:
                    intruded_owners.append(oid)
        elif m_r == 0.0:
            # many owners: grid broad phase over their start-of-tick cells
            cgx, cgy = int(tx // cell), int(ty // cell)
            for gx in (cgx - 1, cgx, cgx + 1):
                for gy in (cgy - 1, cgy, cgy + 1):
                    bucket = hgrid_get((gx, gy))
                    if not bucket:
                        continue
                    for oid, r, exempt in bucket:
                        if oid == pid or pid in exempt:
                            continue
                        ox, oy = positions[oid]
                        ddx, ddy = tx - ox, ty - oy
                        d2 = ddx * ddx + ddy * ddy
                        lim = r + seg
                        if d2 >= lim * lim:
                            continue
                        spheres.append((ox, oy, r))
                        if d2 < r * r - 1e-12:
                            intruded_owners.append(oid)
        else:
            # mover's own bubble separates it from everyone, so scan all
            cgx, cgy = int(tx // cell), int(ty // cell)
            for gx in (cgx - 1, cgx, cgx + 1):
                for gy in (cgy - 1, cgy, cgy + 1):
                    bucket = grid_get((gx, gy))
                    if not bucket:
                        continue
                    for oid in bucket:
                        if oid == pid:
                            continue
                        entry = hard_get(oid)
                        if entry is not None and pid not in entry[1]:
                            r = entry[0]
                            owner_r = r
                        else:
                            r = 0.0
                            owner_r = 0.0
                        if m_r > r and oid not in m_exempt:
                            r = m_r
                        if r <= 0.0:
                            continue
                        ox, oy = positions[oid]
                        ddx, ddy = tx - ox, ty - oy
                        d2 = ddx * ddx + ddy * ddy
                        lim = r + seg
                        if d2 >= lim * lim:
                            continue
                        spheres.append((ox, oy, r))
                        if owner_r > 0.0 and d2 < owner_r * owner_r - 1e-12:
                            intruded_owners.append(oid)

        if spheres:
            tx, ty, pushed = _resolve_point(px, py, tx, ty, spheres)
            if pushed:
                tx, ty = _settle_pushout(
                    pid, tx, ty, m_r, m_exempt, hard, index,
                )
        if tx != px or ty != py:
            mover.pose.x, mover.pose.y = tx, ty
            okx, oky = int(px // cell), int(py // cell)
            nkx, nky = int(tx // cell), int(ty // cell)
            if okx != nkx or oky != nky:
                grid[(okx, oky)].remove(pid)
                grid[(nkx, nky)].append(pid)
            positions[pid] = (tx, ty)
            if own is not None and use_flat:
                # keep the x-sorted owner list exact: only the owner's own
                # resolution ever moves it, and that is happening right here
                moved = owners_x.pop(bisect.bisect_left(owners_x, [px, pid]))
                moved[0] = tx
                moved[4] = ty
                bisect.insort(owners_x, moved)

        if not intruded_owners:
            continue
        for oid in sorted(intruded_owners):
            owner = players[oid]
            if state.tick > owner.flashing_until:
                effects.append(Effect(
                    BUBBLE_FLASH, state.tick,
                    {"duration_s": consts.flash_s, "owner": oid, "violator": pid},
                ))
            owner.flashing_until = state.tick + flash_ticks

    return effects


def _pair_soft_radius(state: WorldState, a: PlayerId, b: PlayerId, al: float) -> float:
    """Largest applicable soft-bubble radius (meters) between a and b,
    0.0 when no enabled, non-exempt soft bubble covers the pair."""
    best = 0.0
    pa, pb = state.players[a], state.players[b]
    ba, bb = pa.bubble, pb.bubble
    if ba.enabled and ba.boundary == SOFT and b not in ba.exempt:
        best = ba.radius_al * al
    if bb.enabled and bb.boundary == SOFT and a not in bb.exempt:
        r = bb.radius_al * al
        if r > best:
            best = r
    return best


def refresh_visibility(
    state: WorldState,
    consts: Constants = DEFAULTS,
    index: SpatialHash | None = None,
    movement: bool = False,
) -> list[Effect]:
    """Advance the soft-boundary visibility relation.

    A pair hides when its distance drops below the largest applicable soft
    radius and unhides only past ``hysteresis_exit`` times that radius, so a
    pair dithering on the boundary does not flicker. Movement-driven entries
    also flash the soft bubble's owner (config-driven refreshes do not: no
    one violated anything).
    """
    al = consts.arm_length_m
    players = state.players
    effects: list[Effect] = []
    transitions: list[tuple[tuple[PlayerId, PlayerId], bool]] = []
    flash_ticks = consts.seconds_to_ticks(consts.flash_s)
    flash_owners: list[tuple[PlayerId, PlayerId]] = []

    # exit scan over currently hidden pairs
    for pair in sorted(state.hidden_pairs):
        a, b = pair
        if a not in players or b not in players:
            state.hidden_pairs.discard(pair)
            continue
        r = _pair_soft_radius(state, a, b, al)
        if r <= 0.0:
            state.hidden_pairs.discard(pair)
            transitions.append((pair, True))
            continue
        if players[a].pose.distance_to(players[b].pose) > consts.hysteresis_exit * r:
            state.hidden_pairs.discard(pair)
            transitions.append((pair, True))

    # entry scan around each enabled soft bubble
    for pid in sorted(players):
        owner = players[pid]
        bubble = owner.bubble
        if not (bubble.enabled and bubble.boundary == SOFT):
            continue
        r = bubble.radius_al * al
        ox, oy = owner.pose.x, owner.pose.y
        others = index.nearby(ox, oy) if index is not None else sorted(players)
        for oid in others:
            if oid == pid or oid in bubble.exempt:
                continue
            pair = (pid, oid) if pid < oid else (oid, pid)
            if pair in state.hidden_pairs:
                continue
            other = players[oid]
            dx, dy = other.pose.x - ox, other.pose.y - oy
            if dx * dx + dy * dy < r * r:
                state.hidden_pairs.add(pair)
                transitions.append((pair, False))
                if movement:
                    flash_owners.append((pid, oid))

    for pair, visible in sorted(transitions):
        effects.append(Effect(
            VISIBILITY_CHANGED, state.tick,
            {"pair": list(pair), "visible": visible},
        ))
    for pid, violator in sorted(flash_owners):
        owner = players[pid]
        if state.tick > owner.flashing_until:
            effects.append(Effect(
                BUBBLE_FLASH, state.tick,
                {"duration_s": consts.flash_s, "owner": pid, "violator": violator},
            ))
        owner.flashing_until = state.tick + flash_ticks
    return effects


def update_alerts(
    state: WorldState,
    consts: Constants = DEFAULTS,
    index: SpatialHash | None = None,
) -> list[Effect]:
    """Fire proximity alerts: one per contiguous incursion of an approacher
    into an alert-eligible target's personal space.

    Targets are players whose bubble is off but who keep alerts on; the alert
    radius is their configured bubble radius. Friends and explicitly muted
    players never trigger.
    """
    al = consts.arm_length_m
    players = state.players
    social = state.social
    effects: list[Effect] = []
    now_inside: set[tuple[PlayerId, PlayerId]] = set()
    if index is None:
        positions = {p: (pl.pose.x, pl.pose.y) for p, pl in players.items()}
        grid_get = None
    else:
        positions = index.positions
        grid_get = index.grid.get
        cell = index.cell

    for tid in sorted(players):
        target = players[tid]
        bubble = target.bubble
        if bubble.enabled or not bubble.alerts_enabled:
            continue
        r = bubble.radius_al * al
        r2 = r * r
        tx, ty = positions[tid]
        matches: list[tuple[PlayerId, float, float]] = []
        if grid_get is None:
            cells = [list(players)]
        else:
            cgx, cgy = int(tx // cell), int(ty // cell)
            cells = []
            for gx in (cgx - 1, cgx, cgx + 1):
                for gy in (cgy - 1, cgy, cgy + 1):
                    bucket = grid_get((gx, gy))
                    if bucket:
                        cells.append(bucket)
        for bucket in cells:
            for aid in bucket:
                if aid == tid:
                    continue
                ax, ay = positions[aid]
                dx, dy = ax - tx, ay - ty
                if dx * dx + dy * dy >= r2:
                    continue
                if aid in bubble.alert_muted or social.are_friends(tid, aid):
                    continue
                matches.append((aid, dx, dy))
        matches.sort()
        for aid, dx, dy in matches:
            key = (tid, aid)
            now_inside.add(key)
            if key not in state.alert_inside:
                bearing = wrap_angle(math.atan2(dy, dx) - target.pose.facing)
                effects.append(Effect(
                    ALERT_RAISED, state.tick,
                    {"approacher": aid, "bearing_rad": bearing, "target": tid},
                ))

    state.alert_inside = now_inside
    return effects


def tick(
    state: WorldState,
    intents: list[MoveIntent],
    consts: Constants = DEFAULTS,
) -> list[Effect]:
    """Advance the room by one fixed step: validate intents, resolve hard
    boundaries, refresh visibility and alerts. Malformed or speed-capped
    intents are dropped and counted, never fatal."""
    state.tick += 1
    max_step = consts.v_max_mps * consts.dt + 1e-9

    targets: dict[PlayerId, Pose] = {}
    players_get = state.players.get
    for intent in intents:
        who = intent.player
        player = players_get(who)
        pose = intent.target
        if player is None or who in targets:
            state.dropped_intents += 1
            continue
        current = player.pose
        # a sum is finite iff every term is (inf - inf is nan)
        if (not math.isfinite(pose.x + pose.y + pose.facing)
                or math.hypot(pose.x - current.x, pose.y - current.y) > max_step):
            state.dropped_intents += 1
            continue
        targets[who] = pose

    index = build_hash(state, consts)
    effects = resolve_hard(state, targets, consts, index)
    effects.extend(refresh_visibility(state, consts, index, movement=True))
    effects.extend(update_alerts(state, consts, index))
    return effects
