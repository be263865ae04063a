"""JSON and CSV readers/writers for demonstrations, constraints and models."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .solver import SttcSet
from .temporal import Action, ActionObservation, Demonstration


class FormatError(ValueError):
    pass


def dumps(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _obs_to_dict(obs: ActionObservation) -> dict:
    return {"verb": obs.action.verb, "object": obs.action.object, "start": obs.start, "end": obs.end}


def _obs_from_dict(d: dict, where: str) -> ActionObservation:
    try:
        return ActionObservation(Action(str(d["verb"]), str(d["object"])), float(d["start"]), float(d["end"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{where}: bad observation {d!r} ({exc})") from None


def demos_to_dict(demos: Sequence[Demonstration], task: str = "task") -> dict:
    return {"task": task, "demonstrations": [
        {"id": d.id, "left": [_obs_to_dict(o) for o in d.left], "right": [_obs_to_dict(o) for o in d.right]}
        for d in demos
    ]}


def demos_from_dict(data: dict) -> tuple[str, list[Demonstration]]:
    if not isinstance(data, dict) or "demonstrations" not in data:
        raise FormatError("expected an object with a 'demonstrations' list")
    demos = []
    seen = set()
    for n, d in enumerate(data["demonstrations"]):
        demo_id = str(d.get("id", n))
        if demo_id in seen:
            raise FormatError(f"duplicate demonstration id {demo_id!r}")
        seen.add(demo_id)
        left = tuple(_obs_from_dict(o, f"{demo_id}.left[{i}]") for i, o in enumerate(d.get("left", [])))
        right = tuple(_obs_from_dict(o, f"{demo_id}.right[{i}]") for i, o in enumerate(d.get("right", [])))
        demos.append(Demonstration(demo_id, left, right))
    return str(data.get("task", "task")), demos


def save_demos(path, demos, task: str = "task") -> None:
    write_json(path, demos_to_dict(demos, task))


def load_demos(path) -> tuple[str, list[Demonstration]]:
    return demos_from_dict(read_json(path))


def save_sttcs(path, sttcs: SttcSet) -> None:
    write_json(path, sttcs.to_dict())


def load_sttcs(path) -> SttcSet:
    return SttcSet.from_dict(read_json(path))
