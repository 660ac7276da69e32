"""Instance file format (``format: "fleetcharge/1"``), JSON-compatible."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import InstanceError
from .model import Instance, StationSpec, Tariff, Timeline, TruckSpec, format_clock, parse_clock

FORMAT = "fleetcharge/1"

_TRUCK_FIELDS = ("id", "arrival", "initial_energy", "demand", "capacity", "deadline",
                 "power_cap", "waiting_rate", "tardiness_rate")
_TIME_FIELDS = ("arrival", "deadline")


def instance_to_dict(instance: Instance) -> dict:
    tariff = instance.tariff
    doc = {
        "format": FORMAT,
        "trucks": [{f: getattr(t, f) for f in _TRUCK_FIELDS} for t in instance.trucks],
        "station": {
            "port_powers_kw": list(instance.station.port_powers),
            "station_cap_kw": instance.station.station_cap,
        },
        "tariff": [{"start": format_clock(s) if tariff.period is not None else s,
                    "price_eur_per_kwh": p} for s, p in tariff.breakpoints],
        "timeline": {
            "origin": instance.timeline.origin,
            "slot_minutes": instance.timeline.slot_minutes,
            "num_slots": instance.timeline.num_slots,
        },
    }
    if tariff.period != 1440:
        doc["tariff_period_minutes"] = tariff.period
    return doc


def instance_from_dict(doc: dict) -> Instance:
    if doc.get("format") != FORMAT:
        raise InstanceError(f"unsupported instance format {doc.get('format')!r}; expected {FORMAT!r}")
    try:
        trucks = []
        for row in doc["trucks"]:
            kw = {f: row[f] for f in _TRUCK_FIELDS}
            for f in _TIME_FIELDS:
                kw[f] = parse_clock(kw[f])
            trucks.append(TruckSpec(**kw))
        st = doc["station"]
        station = StationSpec(tuple(st["port_powers_kw"]), st["station_cap_kw"])
        period = doc.get("tariff_period_minutes", 1440)
        tariff = Tariff(tuple((seg["start"], seg["price_eur_per_kwh"]) for seg in doc["tariff"]),
                        period=period)
        tl = doc["timeline"]
        timeline = Timeline(int(parse_clock(tl["origin"])), tl["slot_minutes"], tl["num_slots"])
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance document: {exc!r}") from exc
    return Instance(tuple(trucks), station, tariff, timeline)


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def write_instance(instance: Instance, path: str | Path) -> str:
    """Write the instance file and return the sha256 of its bytes."""
    text = dumps_instance(instance)
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def read_instance(path: str | Path) -> tuple[Instance, str]:
    """Return (instance, sha256 of the file bytes)."""
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(doc), hashlib.sha256(raw).hexdigest()
