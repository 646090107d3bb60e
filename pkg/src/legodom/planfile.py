"""Declarative gait plan files: flat key-value lines plus a waypoint list.

Example:

    mode = trot
    rate_hz = 250
    speed = 0.5
    body_height = 0.30
    waypoint = 0 0
    waypoint = 8 0
    terrain.x0 = 1.2
    terrain.x1 = 2.4
    terrain.height = 0.1
    degrade.encoder_quantum = 1e-3
"""

from .config import ConfigError
from .gait import GaitPlan, StepTerrain, preset_plan
from .geometry import default_leg_geometries

_FLOAT_KEYS = {
    "rate_hz": "rate_hz",
    "body_height": "body_height",
    "speed": "speed",
    "step_period": "step_period",
    "step_height": "step_height",
    "settle_time": "settle_time",
    "mass": "mass",
    "yaw_rate": "yaw_rate",
    "turn_angle": "turn_angle",
    "duration": "duration",
    "flight_speed": "flight_speed",
}

_DEGRADE_KEYS = ("encoder_quantum", "yaw_drift", "wheel_slip",
                 "touchdown_height_noise")


def parse_plan_text(text):
    kv = {}
    waypoints = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("plan line %d: expected 'key = value'" % lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key == "waypoint":
            parts = value.split()
            if len(parts) != 2:
                raise ConfigError("plan line %d: waypoint needs x y" % lineno)
            waypoints.append((float(parts[0]), float(parts[1])))
        else:
            kv[key] = value

    if "preset" in kv:
        plan = preset_plan(kv.pop("preset"))
    else:
        plan = GaitPlan(mode=kv.pop("mode", "trot"))
    if waypoints:
        plan.waypoints = waypoints

    for key, attr in _FLOAT_KEYS.items():
        if key in kv:
            setattr(plan, attr, float(kv.pop(key)))

    if "wheel_radius" in kv:
        plan.legs = default_leg_geometries(wheel_radius=float(kv.pop("wheel_radius")))

    terrain_kv = {}
    for k in list(kv):
        if k.startswith("terrain."):
            terrain_kv[k.split(".", 1)[1]] = float(kv.pop(k))
    if terrain_kv:
        plan.terrain = StepTerrain(
            terrain_kv.get("x0", 0.0), terrain_kv.get("x1", 0.0),
            terrain_kv.get("height", 0.0), terrain_kv.get("ramp", 0.6))

    spike_prob = kv.pop("degrade.rate_spike_prob", None)
    spike_gain = kv.pop("degrade.rate_spike_gain", "20")
    if spike_prob is not None:
        plan.imperfections["rate_spikes"] = (float(spike_prob), float(spike_gain))
    for k in list(kv):
        if k.startswith("degrade."):
            name = k.split(".", 1)[1]
            if name not in _DEGRADE_KEYS:
                raise ConfigError("unknown degrade key %r" % k)
            plan.imperfections[name] = float(kv.pop(k))

    if kv:
        raise ConfigError("unknown plan keys: %s" % ", ".join(sorted(kv)))
    return plan


def load_plan(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_plan_text(fh.read())


__all__ = ["parse_plan_text", "load_plan"]
