"""Mission specification: loading, safety checks, and teaming traceability.

A mission file is the single configuration artifact for a run: the
fleet (one fragment per vehicle), the search area, ground truth for the
simulated world, alert routing rules, message service classes,
coordination parameters, and the data refresh plan. Validation is
collect-all rather than fail-fast so one pass over the file reports
every problem with its field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .agent import AgentConfig, ThresholdPolicy
from .statemachine import (
    MachineValidationError,
    TaskStateMachine,
    Transition,
    default_search_machine,
)
from .world import GeoPoint, LocalFrame, MistRegion, Target, polygon_is_simple

KNOWN_MODELS = ("fleet", "triage", "explanation", "coordination", "trust")

DEFAULT_SERVICE_CLASSES = {"critical": 50, "standard": 250}
DEFAULT_UI_REFRESH_MS = 200
DEFAULT_DURATION_MS = 240_000


class MissionValidationError(Exception):
    """Raised with the full list of issues found in a mission file."""

    def __init__(self, issues: list["ValidationIssue"]):
        self.issues = list(issues)
        lines = "; ".join(str(i) for i in self.issues)
        super().__init__(f"{len(self.issues)} mission problem(s): {lines}")


@dataclass(frozen=True)
class ValidationIssue:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


# ---- teaming factors ----

@dataclass(frozen=True)
class TeamingFactor:
    ident: str
    name: str
    definition: str


TEAMING_FACTORS = (
    TeamingFactor(
        "TF1", "Observability",
        "Both partners can see the task progress and actions of the other.",
    ),
    TeamingFactor(
        "TF2", "Predictability",
        "Future intentions, states, and activities are transparent "
        "before they happen.",
    ),
    TeamingFactor(
        "TF3", "Directing Attention",
        "Critical problems reach the human through warnings, "
        "recommendations, and indicators.",
    ),
    TeamingFactor(
        "TF4", "Solution Exploration",
        "Both partners can weigh multiple views, knowledge sources, and "
        "candidate solutions.",
    ),
    TeamingFactor(
        "TF5", "Adaptability",
        "Unexpected, evolving situations are met by adapting behavior "
        "at runtime.",
    ),
    TeamingFactor(
        "TF6", "Directability",
        "The human can direct and redirect the machine's resources, "
        "activities, and priorities.",
    ),
    TeamingFactor(
        "TF7", "Calibrated Trust",
        "Indicators track how able the machine is to decide correctly "
        "in the current context.",
    ),
    TeamingFactor(
        "TF8", "Common Ground",
        "Beliefs, assumptions, and intents stay shared across both "
        "partners.",
    ),
)

# Which factors each runtime-model service realizes. Every service must
# claim at least one factor and every factor must have a claimant.
SERVICE_FACTOR_CLAIMS = {
    "fleet": ("TF1", "TF2"),
    "triage": ("TF3", "TF5"),
    "explanation": ("TF2", "TF8"),
    "coordination": ("TF4", "TF6"),
    "trust": ("TF7",),
    "agent-adaptation": ("TF5", "TF8"),
}


def check_traceability() -> None:
    """Assert the claim table covers all eight factors, no orphans."""
    known = {tf.ident for tf in TEAMING_FACTORS}
    if len(TEAMING_FACTORS) != 8:
        raise ValueError("teaming factor table must hold exactly eight entries")
    claimed = set()
    for service, idents in SERVICE_FACTOR_CLAIMS.items():
        if not idents:
            raise ValueError(f"service {service!r} claims no teaming factor")
        unknown = sorted(set(idents) - known)
        if unknown:
            raise ValueError(f"service {service!r} claims unknown {unknown}")
        claimed.update(idents)
    missing = sorted(known - claimed)
    if missing:
        raise ValueError(f"no service claims {missing}")


def traceability_report() -> list[str]:
    """Human-readable factor table plus the per-service claims."""
    check_traceability()
    by_id = {tf.ident: tf for tf in TEAMING_FACTORS}
    lines = ["Teaming factors and the services that realize them:"]
    for tf in TEAMING_FACTORS:
        owners = sorted(
            s for s, ids in SERVICE_FACTOR_CLAIMS.items() if tf.ident in ids
        )
        lines.append(f"  {tf.ident} {tf.name}: {tf.definition}")
        lines.append(f"      realized by: {', '.join(owners)}")
    for service, idents in sorted(SERVICE_FACTOR_CLAIMS.items()):
        names = ", ".join(f"{i} ({by_id[i].name})" for i in idents)
        lines.append(f"  service {service}: {names}")
    return lines


# ---- refresh plan ----

@dataclass(frozen=True)
class RefreshConsumer:
    model: str
    required_interval_ms: int


@dataclass(frozen=True)
class RefreshAttribute:
    attribute: str
    probe: str
    interval_ms: int
    consumers: tuple[RefreshConsumer, ...] = ()


@dataclass(frozen=True)
class RefreshPlan:
    attributes: tuple[RefreshAttribute, ...] = ()

    def validate(self, path: str = "refresh_plan") -> list[ValidationIssue]:
        issues = []
        seen = set()
        for i, attr in enumerate(self.attributes):
            p = f"{path}[{i}]"
            if attr.attribute in seen:
                issues.append(ValidationIssue(p, f"duplicate attribute {attr.attribute!r}"))
            seen.add(attr.attribute)
            if attr.interval_ms <= 0:
                issues.append(ValidationIssue(f"{p}.interval_ms", "must be positive"))
            for j, c in enumerate(attr.consumers):
                cp = f"{p}.consumers[{j}]"
                if c.model not in KNOWN_MODELS:
                    issues.append(ValidationIssue(f"{cp}.model", f"unknown model {c.model!r}"))
                # A consumer that needs data more often than the probe
                # produces it can never be satisfied.
                if c.required_interval_ms < attr.interval_ms:
                    issues.append(ValidationIssue(
                        f"{cp}.required_interval_ms",
                        f"consumer needs {c.required_interval_ms} ms but probe "
                        f"refreshes every {attr.interval_ms} ms",
                    ))
        return issues


# ---- mission fragments ----

@dataclass(frozen=True)
class ViewSpec:
    name: str
    max_displayed: int


@dataclass(frozen=True)
class AlertRuleSpec:
    alert_type: str
    view: str
    essential: bool = False
    priority: int | None = 3  # None iff essential; the axes are exclusive


@dataclass(frozen=True)
class CoordinationParams:
    waiting_period_ms: int = 10_000
    alternation_threshold: int = 3
    window_ms: int = 30_000


@dataclass(frozen=True)
class VictimSpec:
    ident: str
    location: GeoPoint
    object_class: str = "person"

    def to_target(self) -> Target:
        return Target(self.ident, self.location, self.object_class)


@dataclass(frozen=True)
class GroundTruth:
    """World truth only the harness may see; agents sense it via sims."""

    victims: tuple[VictimSpec, ...] = ()
    mist_regions: tuple[MistRegion, ...] = ()


@dataclass(frozen=True)
class UavFragment:
    name: str
    color: str
    route: tuple[GeoPoint, ...]
    home: GeoPoint
    thresholds: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    machine: TaskStateMachine | None = None
    loop_route: bool = True
    cruise_altitude_m: float = 40.0
    auto_launch: bool = True
    delivery_capable: bool = False
    speed_mps: float = 8.0
    trust_initial: float = 0.5
    extras: tuple[tuple[str, object], ...] = ()

    def build_machine(self) -> TaskStateMachine:
        if self.machine is None:
            return default_search_machine()
        return TaskStateMachine.from_record(self.machine.to_record())

    def to_agent_config(self) -> AgentConfig:
        return AgentConfig(
            home=self.home,
            route=list(self.route),
            loop_route=self.loop_route,
            cruise_altitude_m=self.cruise_altitude_m,
            auto_launch=self.auto_launch,
            delivery_capable=self.delivery_capable,
            speed_mps=self.speed_mps,
            policy=self.thresholds,
            trust_initial=self.trust_initial,
            **dict(self.extras),
        )


_AGENT_EXTRA_KEYS = (
    "mist_ceiling_m", "mist_drop_m", "climb_mps", "camera_half_angle_deg",
    "battery_rate_pct_s", "battery_floor_pct", "delivery_radius_m",
    "delivery_duration_ms", "land_duration_ms", "target_cooldown_ms",
    "trust_alpha",
)


@dataclass(frozen=True)
class MissionSpec:
    name: str
    origin: GeoPoint
    search_area: tuple[GeoPoint, ...]
    uavs: tuple[UavFragment, ...]
    views: tuple[ViewSpec, ...]
    alert_rules: tuple[AlertRuleSpec, ...]
    ground_truth: GroundTruth = GroundTruth()
    coordination: CoordinationParams = CoordinationParams()
    service_classes: tuple[tuple[str, int], ...] = tuple(
        sorted(DEFAULT_SERVICE_CLASSES.items())
    )
    refresh_plan: RefreshPlan = RefreshPlan()
    delivery_uav: str | None = None
    seed: int | None = None
    duration_ms: int = DEFAULT_DURATION_MS
    ui_refresh_ms: int = DEFAULT_UI_REFRESH_MS

    def frame(self) -> LocalFrame:
        return LocalFrame(self.origin)

    def fragment(self, name: str) -> UavFragment:
        for f in self.uavs:
            if f.name == name:
                return f
        raise KeyError(name)


# ---- parsing helpers ----

def _want(data, key, kind, path, issues, default=None, required=False):
    """Fetch data[key], recording a typed issue instead of raising."""
    if key not in data:
        if required:
            issues.append(ValidationIssue(f"{path}.{key}", "missing required field"))
        return default
    value = data[key]
    numeric = kind in (int, float) or isinstance(kind, tuple)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    bad_bool = numeric and isinstance(value, bool)
    if bad_bool or not isinstance(value, kind):
        wanted = getattr(kind, "__name__", None) or "number"
        issues.append(ValidationIssue(
            f"{path}.{key}", f"expected {wanted}, got {type(value).__name__}"))
        return default
    return value


def _geo(raw, path, issues) -> GeoPoint | None:
    if (not isinstance(raw, (list, tuple)) or len(raw) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)):
        issues.append(ValidationIssue(path, "expected [lat, lon] pair"))
        return None
    return GeoPoint(float(raw[0]), float(raw[1]))


def _geo_list(raw, path, issues) -> list[GeoPoint]:
    if not isinstance(raw, list):
        issues.append(ValidationIssue(path, "expected a list of [lat, lon] pairs"))
        return []
    out = []
    for i, item in enumerate(raw):
        p = _geo(item, f"{path}[{i}]", issues)
        if p is not None:
            out.append(p)
    return out


def _parse_machine(raw, path, issues) -> TaskStateMachine | None:
    states = _want(raw, "states", list, path, issues, required=True) or []
    initial = _want(raw, "initial", str, path, issues, required=True)
    transitions = []
    for i, t in enumerate(_want(raw, "transitions", list, path, issues, required=True) or []):
        if not isinstance(t, list) or len(t) != 3:
            issues.append(ValidationIssue(
                f"{path}.transitions[{i}]", "expected [source, event, target]"))
            continue
        transitions.append(Transition(*t))
    if initial is None:
        return None
    try:
        return TaskStateMachine(tuple(states), tuple(transitions), initial)
    except MachineValidationError as e:
        for problem in e.problems:
            issues.append(ValidationIssue(path, problem))
        return None


def _parse_uav(raw, idx, origin, issues) -> UavFragment | None:
    path = f"uavs[{idx}]"
    name = _want(raw, "id", str, path, issues, required=True)
    color = _want(raw, "color", str, path, issues, required=True)
    route = _geo_list(raw.get("route", []), f"{path}.route", issues)
    home = raw.get("home")
    home_pt = _geo(home, f"{path}.home", issues) if home is not None else origin
    th_raw = raw.get("thresholds", {})
    if not isinstance(th_raw, dict):
        issues.append(ValidationIssue(f"{path}.thresholds", "expected an object"))
        th_raw = {}
    thresholds = ThresholdPolicy(
        confidence_act=_want(th_raw, "confidence", float, f"{path}.thresholds", issues, 0.8),
        reliability_act=_want(th_raw, "reliability", float, f"{path}.thresholds", issues, 0.8),
        trust_floor=_want(th_raw, "trust_floor", float, f"{path}.thresholds", issues, 0.5),
    )
    machine = None
    if "machine" in raw:
        if isinstance(raw["machine"], dict):
            machine = _parse_machine(raw["machine"], f"{path}.machine", issues)
        else:
            issues.append(ValidationIssue(f"{path}.machine", "expected an object"))
    extras = []
    for key in _AGENT_EXTRA_KEYS:
        if key in raw:
            value = _want(raw, key, (int, float), path, issues)
            if value is not None:
                extras.append((key, value))
    if name is None or color is None or home_pt is None:
        return None
    return UavFragment(
        name=name,
        color=color,
        route=tuple(route),
        home=home_pt,
        thresholds=thresholds,
        machine=machine,
        loop_route=bool(raw.get("loop_route", True)),
        cruise_altitude_m=_want(raw, "cruise_altitude_m", float, path, issues, 40.0),
        auto_launch=bool(raw.get("auto_launch", True)),
        delivery_capable=bool(raw.get("delivery_capable", False)),
        speed_mps=_want(raw, "speed_mps", float, path, issues, 8.0),
        trust_initial=_want(raw, "trust_initial", float, path, issues, 0.5),
        extras=tuple(extras),
    )


def _parse_refresh_plan(raw, issues) -> RefreshPlan:
    attrs = []
    for i, item in enumerate(raw):
        path = f"refresh_plan[{i}]"
        if not isinstance(item, dict):
            issues.append(ValidationIssue(path, "expected an object"))
            continue
        consumers = []
        for j, c in enumerate(item.get("consumers", [])):
            cp = f"{path}.consumers[{j}]"
            if not isinstance(c, dict):
                issues.append(ValidationIssue(cp, "expected an object"))
                continue
            consumers.append(RefreshConsumer(
                model=_want(c, "model", str, cp, issues, required=True) or "",
                required_interval_ms=_want(c, "required_interval_ms", int, cp, issues, 0, required=True) or 0,
            ))
        attrs.append(RefreshAttribute(
            attribute=_want(item, "attribute", str, path, issues, required=True) or "",
            probe=_want(item, "probe", str, path, issues, required=True) or "",
            interval_ms=_want(item, "interval_ms", int, path, issues, 0, required=True) or 0,
            consumers=tuple(consumers),
        ))
    return RefreshPlan(tuple(attrs))


def parse_mission(data: dict, clock: str = "lockstep") -> MissionSpec:
    """Validate a decoded mission document; collect every violation."""
    issues: list[ValidationIssue] = []
    if not isinstance(data, dict):
        raise MissionValidationError([ValidationIssue("$", "mission document must be an object")])

    name = _want(data, "name", str, "$", issues, "unnamed-mission")
    seed = _want(data, "seed", int, "$", issues)
    if clock == "lockstep" and seed is None:
        issues.append(ValidationIssue(
            "$.seed", "seed is required for deterministic lockstep runs"))
    duration_ms = _want(data, "duration_ms", int, "$", issues, DEFAULT_DURATION_MS)
    ui_refresh_ms = _want(data, "ui_refresh_ms", int, "$", issues, DEFAULT_UI_REFRESH_MS)
    if duration_ms is not None and duration_ms <= 0:
        issues.append(ValidationIssue("$.duration_ms", "must be positive"))
    if ui_refresh_ms is not None and ui_refresh_ms <= 0:
        issues.append(ValidationIssue("$.ui_refresh_ms", "must be positive"))

    origin = None
    if "origin" in data:
        origin = _geo(data["origin"], "$.origin", issues)
    else:
        issues.append(ValidationIssue("$.origin", "missing required field"))

    search_area = _geo_list(data.get("search_area", []), "$.search_area", issues)
    if origin is not None and search_area:
        frame = LocalFrame(origin)
        xy = [frame.to_xy(p) for p in search_area]
        if not polygon_is_simple(xy):
            issues.append(ValidationIssue(
                "$.search_area",
                "polygon must be simple (no self-intersection, >= 3 points)"))

    uavs: list[UavFragment] = []
    raw_uavs = _want(data, "uavs", list, "$", issues, [], required=True) or []
    for i, raw in enumerate(raw_uavs):
        if not isinstance(raw, dict):
            issues.append(ValidationIssue(f"uavs[{i}]", "expected an object"))
            continue
        frag = _parse_uav(raw, i, origin, issues)
        if frag is not None:
            uavs.append(frag)
    names = [f.name for f in uavs]
    colors = [f.color for f in uavs]
    for dup in sorted({n for n in names if names.count(n) > 1}):
        issues.append(ValidationIssue("$.uavs", f"duplicate uav id {dup!r}"))
    for dup in sorted({c for c in colors if colors.count(c) > 1}):
        issues.append(ValidationIssue("$.uavs", f"duplicate uav color {dup!r}"))

    views: list[ViewSpec] = []
    for i, raw in enumerate(_want(data, "views", list, "$", issues, [], required=True) or []):
        path = f"views[{i}]"
        if not isinstance(raw, dict):
            issues.append(ValidationIssue(path, "expected an object"))
            continue
        vname = _want(raw, "name", str, path, issues, required=True)
        cap = _want(raw, "max_displayed", int, path, issues, required=True)
        if vname is None or cap is None:
            continue
        if cap < 0:
            issues.append(ValidationIssue(f"{path}.max_displayed", "must be >= 0"))
        views.append(ViewSpec(vname, cap))
    vnames = [v.name for v in views]
    view_names = set(vnames)
    for dup in sorted({n for n in vnames if vnames.count(n) > 1}):
        issues.append(ValidationIssue("$.views", f"duplicate view {dup!r}"))

    rules: list[AlertRuleSpec] = []
    for i, raw in enumerate(data.get("alert_rules", [])):
        path = f"alert_rules[{i}]"
        if not isinstance(raw, dict):
            issues.append(ValidationIssue(path, "expected an object"))
            continue
        rtype = _want(raw, "alert_type", str, path, issues, required=True)
        rview = _want(raw, "view", str, path, issues, required=True)
        essential = bool(raw.get("essential", False))
        if essential:
            priority = None
            if "priority" in raw:
                issues.append(
                    ValidationIssue(
                        f"{path}.priority",
                        "essential rules are always shown and take no priority",
                    )
                )
        else:
            priority = _want(raw, "priority", int, path, issues, 3)
            if priority is not None and not 1 <= priority <= 5:
                issues.append(
                    ValidationIssue(f"{path}.priority", "must be within 1..5")
                )
        if rview is not None and rview not in view_names:
            issues.append(ValidationIssue(f"{path}.view", f"unknown view {rview!r}"))
        if rtype is None or rview is None:
            continue
        rules.append(AlertRuleSpec(rtype, rview, essential, priority))

    victims: list[VictimSpec] = []
    mists: list[MistRegion] = []
    gt = data.get("ground_truth", {})
    if not isinstance(gt, dict):
        issues.append(ValidationIssue("$.ground_truth", "expected an object"))
        gt = {}
    for i, raw in enumerate(gt.get("victims", [])):
        path = f"ground_truth.victims[{i}]"
        if not isinstance(raw, dict):
            issues.append(ValidationIssue(path, "expected an object"))
            continue
        ident = _want(raw, "id", str, path, issues, required=True)
        loc = _geo(raw.get("location"), f"{path}.location", issues)
        if ident is None or loc is None:
            continue
        victims.append(VictimSpec(ident, loc, raw.get("object_class", "person")))
    for i, raw in enumerate(gt.get("mist_regions", [])):
        path = f"ground_truth.mist_regions[{i}]"
        if not isinstance(raw, dict):
            issues.append(ValidationIssue(path, "expected an object"))
            continue
        center = _geo(raw.get("center"), f"{path}.center", issues)
        radius = _want(raw, "radius_m", float, path, issues, required=True)
        if center is None or radius is None:
            continue
        if radius <= 0:
            issues.append(ValidationIssue(f"{path}.radius_m", "must be positive"))
        mists.append(MistRegion(center, radius))

    coord_raw = data.get("coordination", {})
    if not isinstance(coord_raw, dict):
        issues.append(ValidationIssue("$.coordination", "expected an object"))
        coord_raw = {}
    coordination = CoordinationParams(
        waiting_period_ms=_want(coord_raw, "waiting_period_ms", int, "coordination", issues, 10_000),
        alternation_threshold=_want(coord_raw, "alternation_threshold", int, "coordination", issues, 3),
        window_ms=_want(coord_raw, "window_ms", int, "coordination", issues, 30_000),
    )
    if coordination.waiting_period_ms <= 0:
        issues.append(ValidationIssue("coordination.waiting_period_ms", "must be positive"))
    if coordination.alternation_threshold < 1:
        issues.append(ValidationIssue("coordination.alternation_threshold", "must be >= 1"))
    if coordination.window_ms <= 0:
        issues.append(ValidationIssue("coordination.window_ms", "must be positive"))

    classes_raw = data.get("service_classes", dict(DEFAULT_SERVICE_CLASSES))
    if not isinstance(classes_raw, dict):
        issues.append(ValidationIssue("$.service_classes", "expected an object"))
        classes_raw = dict(DEFAULT_SERVICE_CLASSES)
    classes = []
    for cname in sorted(classes_raw):
        bound = classes_raw[cname]
        if not isinstance(bound, int) or isinstance(bound, bool) or bound <= 0:
            issues.append(ValidationIssue(
                f"service_classes.{cname}", "latency bound must be a positive integer"))
            continue
        classes.append((cname, bound))

    plan = _parse_refresh_plan(data.get("refresh_plan", []), issues)
    issues.extend(plan.validate())

    delivery_uav = _want(data, "delivery_uav", str, "$", issues)
    known_names = {f.name for f in uavs}
    if delivery_uav is not None and delivery_uav not in known_names:
        issues.append(ValidationIssue(
            "$.delivery_uav", f"references unknown uav {delivery_uav!r}"))

    if issues:
        raise MissionValidationError(issues)
    return MissionSpec(
        name=name,
        origin=origin,
        search_area=tuple(search_area),
        uavs=tuple(uavs),
        views=tuple(views),
        alert_rules=tuple(rules),
        ground_truth=GroundTruth(tuple(victims), tuple(mists)),
        coordination=coordination,
        service_classes=tuple(classes),
        refresh_plan=plan,
        delivery_uav=delivery_uav,
        seed=seed,
        duration_ms=duration_ms,
        ui_refresh_ms=ui_refresh_ms,
    )


def load_mission(path: str, clock: str = "lockstep") -> MissionSpec:
    """Read and validate a mission file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise MissionValidationError(
                [ValidationIssue("$", f"not valid JSON: {e}")]) from e
    return parse_mission(data, clock=clock)
