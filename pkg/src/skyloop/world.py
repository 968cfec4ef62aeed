"""Flat-plane world model: positions, routes, sensor footprints, weather.

Coordinates live in two spaces. Scenario files and telemetry speak
latitude/longitude degrees; motion and geometry run in a local tangent
plane (meters) built from an equirectangular projection around the
mission origin. The projection is exact enough for search areas a few
kilometers across, which is the scale this simulation targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

M_PER_DEG_LAT = 111_320.0


class GeometryError(Exception):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def to_record(self) -> list:
        return [self.lat, self.lon]

    @classmethod
    def from_record(cls, record) -> "GeoPoint":
        return cls(float(record[0]), float(record[1]))


@dataclass(frozen=True)
class LocalFrame:
    """Equirectangular projection anchored at a mission origin."""

    origin: GeoPoint

    def to_xy(self, p: GeoPoint) -> tuple[float, float]:
        x = (p.lon - self.origin.lon) * M_PER_DEG_LAT * math.cos(
            math.radians(self.origin.lat)
        )
        y = (p.lat - self.origin.lat) * M_PER_DEG_LAT
        return (x, y)

    def to_geo(self, x: float, y: float) -> GeoPoint:
        lat = self.origin.lat + y / M_PER_DEG_LAT
        lon = self.origin.lon + x / (
            M_PER_DEG_LAT * math.cos(math.radians(self.origin.lat))
        )
        return GeoPoint(lat, lon)

    def distance_m(self, a: GeoPoint, b: GeoPoint) -> float:
        ax, ay = self.to_xy(a)
        bx, by = self.to_xy(b)
        return math.hypot(bx - ax, by - ay)


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p) -> bool:
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def segments_intersect(a, b, c, d) -> bool:
    """True when segment ab meets segment cd, touching included."""
    o1 = _sign(_orient(a, b, c))
    o2 = _sign(_orient(a, b, d))
    o3 = _sign(_orient(c, d, a))
    o4 = _sign(_orient(c, d, b))
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def polygon_is_simple(points: list[tuple[float, float]]) -> bool:
    """No two non-adjacent edges may intersect; adjacent edges only share
    their common vertex. Degenerate polygons (< 3 points) are not simple."""
    n = len(points)
    if n < 3:
        return False
    edges = [(points[i], points[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        a, b = edges[i]
        if a == b:
            return False
        for j in range(i + 1, n):
            c, d = edges[j]
            adjacent = j == (i + 1) % n or i == (j + 1) % n
            if adjacent:
                shared = b if j == (i + 1) % n else a
                # the shared vertex must be the only contact point: a
                # collinear fold-back puts both far endpoints on one side
                other_i = a if shared == b else b
                other_j = d if shared == c else c
                if _orient(shared, other_i, other_j) == 0:
                    dot = (other_i[0] - shared[0]) * (other_j[0] - shared[0]) + (
                        other_i[1] - shared[1]
                    ) * (other_j[1] - shared[1])
                    if dot > 0:
                        return False
                continue
            if segments_intersect(a, b, c, d):
                return False
    return True


def point_in_polygon(pt: tuple[float, float], poly: list[tuple[float, float]]) -> bool:
    """Ray-casting test; boundary points count as inside."""
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if _orient(a, b, pt) == 0 and _on_segment(a, b, pt):
            return True
        if (a[1] > pt[1]) != (b[1] > pt[1]):
            x_cross = a[0] + (pt[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if pt[0] < x_cross:
                inside = not inside
    return inside


@dataclass(frozen=True)
class MistRegion:
    """Circular patch of degraded visibility."""

    center: GeoPoint
    radius_m: float

    def covers(self, p: GeoPoint, frame: LocalFrame) -> bool:
        return frame.distance_m(self.center, p) <= self.radius_m

    def to_record(self) -> dict:
        return {"center": self.center.to_record(), "radius_m": self.radius_m}

    @classmethod
    def from_record(cls, record: dict) -> "MistRegion":
        return cls(GeoPoint.from_record(record["center"]), float(record["radius_m"]))


@dataclass(frozen=True)
class Target:
    """Ground-truth object placed by the scenario, invisible to agents
    except through their simulated sensor."""

    ident: str
    location: GeoPoint
    object_class: str = "person"

    def to_record(self) -> dict:
        return {
            "id": self.ident,
            "location": self.location.to_record(),
            "object_class": self.object_class,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Target":
        return cls(
            record["id"],
            GeoPoint.from_record(record["location"]),
            record.get("object_class", "person"),
        )


def footprint_radius_m(altitude_m: float, half_angle_deg: float) -> float:
    """Ground radius of a nadir-pointing camera cone."""
    return altitude_m * math.tan(math.radians(half_angle_deg))


def in_footprint(
    frame: LocalFrame,
    uav_pos: GeoPoint,
    altitude_m: float,
    target: GeoPoint,
    half_angle_deg: float,
) -> bool:
    return frame.distance_m(uav_pos, target) <= footprint_radius_m(
        altitude_m, half_angle_deg
    )


@dataclass
class MotionModel:
    """Constant-speed waypoint follower with a first-order altitude loop.

    Horizontal motion advances straight toward the head of the waypoint
    queue, consuming waypoints as they are reached within one step's
    travel. With ``loop`` set the route cycles; otherwise the vehicle
    holds position at the final waypoint. Altitude moves toward its
    setpoint at the climb rate.
    """

    frame: LocalFrame
    position: GeoPoint
    altitude_m: float = 0.0
    speed_mps: float = 8.0
    climb_mps: float = 2.0
    waypoints: list[GeoPoint] = field(default_factory=list)
    loop: bool = False
    altitude_setpoint_m: float = 0.0
    _cursor: int = 0

    def remaining_route(self) -> list[GeoPoint]:
        return self.waypoints[self._cursor:]

    def set_route(self, waypoints: list[GeoPoint], loop: bool = False) -> None:
        self.waypoints = list(waypoints)
        self.loop = loop
        self._cursor = 0

    def at_route_end(self) -> bool:
        return not self.loop and self._cursor >= len(self.waypoints)

    def step(self, dt_ms: int) -> None:
        dt = dt_ms / 1000.0
        # vertical axis first: independent of route progress
        dz = self.altitude_setpoint_m - self.altitude_m
        max_dz = self.climb_mps * dt
        if abs(dz) <= max_dz:
            self.altitude_m = self.altitude_setpoint_m
        else:
            self.altitude_m += math.copysign(max_dz, dz)
        budget = self.speed_mps * dt
        x, y = self.frame.to_xy(self.position)
        while budget > 1e-12 and self._cursor < len(self.waypoints):
            tx, ty = self.frame.to_xy(self.waypoints[self._cursor])
            dist = math.hypot(tx - x, ty - y)
            if dist <= budget:
                x, y = tx, ty
                budget -= dist
                self._cursor += 1
                if self.loop and self._cursor >= len(self.waypoints):
                    self._cursor = 0
            else:
                x += (tx - x) / dist * budget
                y += (ty - y) / dist * budget
                budget = 0.0
        self.position = self.frame.to_geo(x, y)
