"""The interaction library: episodes plus vocabulary, persisted as
line-delimited JSON.

One header record carries the format version, the vocabulary descriptor,
the simulation config and provenance; every following line is one
episode with a CRC over its canonical JSON.  The format round-trips
bit-exactly: floats are serialized via repr and letters as sorted lists.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

from .abstraction import (
    Car,
    Episode,
    EpisodeStep,
    PredicateDef,
    RawState,
    SimConfig,
    default_vocab,
)

FORMAT_VERSION = 1
VOCAB_BUILDERS = {"highway": default_vocab}


class StoreError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class VersionMismatchError(StoreError):
    pass


@dataclass
class TraceLibrary:
    episodes: dict[str, Episode]
    vocab: list[PredicateDef]
    provenance: dict = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TraceLibrary):
            return NotImplemented
        return (
            self.episodes == other.episodes
            and [p.name for p in self.vocab] == [p.name for p in other.vocab]
            and self.provenance == other.provenance
        )


def build_library(episodes: list[Episode], provenance: dict | None = None) -> TraceLibrary:
    if not episodes:
        raise ValueError("a library needs at least one episode")
    cfg = episodes[0].config
    for ep in episodes:
        if ep.config != cfg:
            raise ValueError("all episodes must share one simulation config")
    vocab = default_vocab(cfg.lanes, cfg.proximity, cfg.adjacent_margin)
    return TraceLibrary(
        episodes={ep.id: ep for ep in episodes},
        vocab=vocab,
        provenance=provenance or {},
    )


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _with_crc(record: dict) -> str:
    record = dict(record)
    record["crc"] = zlib.crc32(_dumps(record).encode())
    return _dumps(record)


def _car_payload(car: Car) -> dict:
    return {"id": car.id, "lane": car.lane, "x": car.x, "speed": car.speed}


def _step_payload(step: EpisodeStep) -> dict:
    return {
        "step": step.raw.step,
        "agent": _car_payload(step.raw.agent),
        "npcs": [_car_payload(n) for n in step.raw.npcs],
        "action": step.action,
        "letter": sorted(step.letter),
        "policy": step.active_policy,
    }


def _episode_record(ep: Episode) -> dict:
    return {
        "record": "episode",
        "id": ep.id,
        "seed": ep.seed,
        "agent_kind": ep.agent_kind,
        "steps": [_step_payload(s) for s in ep.steps],
    }


def save_library(lib: TraceLibrary, path: Union[str, Path]) -> None:
    cfg = next(iter(lib.episodes.values())).config
    header = {
        "record": "header",
        "version": FORMAT_VERSION,
        "vocab": {
            "builder": "highway",
            "lanes": cfg.lanes,
            "proximity": cfg.proximity,
            "adjacent_margin": cfg.adjacent_margin,
            "names": [p.name for p in lib.vocab],
        },
        "config": asdict(cfg),
        "provenance": lib.provenance,
    }
    lines = [_with_crc(header)]
    for ep_id in sorted(lib.episodes):
        lines.append(_with_crc(_episode_record(lib.episodes[ep_id])))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_car(payload: dict) -> Car:
    return Car(
        id=payload["id"],
        lane=payload["lane"],
        x=payload["x"],
        speed=payload["speed"],
    )


def _parse_episode(record: dict, cfg: SimConfig, names: set[str], line: int) -> Episode:
    steps = []
    for raw_step in record["steps"]:
        letter = frozenset(raw_step["letter"])
        if not letter <= names:
            alien = sorted(letter - names)
            raise StoreError(
                f"letter mentions predicates outside the header vocabulary: {alien}",
                line,
            )
        steps.append(
            EpisodeStep(
                raw=RawState(
                    agent=_parse_car(raw_step["agent"]),
                    npcs=tuple(_parse_car(n) for n in raw_step["npcs"]),
                    step=raw_step["step"],
                ),
                action=raw_step["action"],
                letter=letter,
                active_policy=raw_step["policy"],
            )
        )
    return Episode(
        id=record["id"],
        steps=tuple(steps),
        seed=record["seed"],
        agent_kind=record["agent_kind"],
        config=cfg,
    )


def load_library(path: Union[str, Path]) -> TraceLibrary:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StoreError("empty library file")

    records = []
    for lineno, line in enumerate(lines, start=1):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StoreError(f"invalid JSON: {exc.msg}", lineno) from exc
        if not isinstance(record, dict) or "crc" not in record:
            raise StoreError("record is missing its checksum", lineno)
        crc = record.pop("crc")
        if zlib.crc32(_dumps(record).encode()) != crc:
            raise StoreError("checksum mismatch", lineno)
        records.append(record)

    header = records[0]
    if header.get("record") != "header":
        raise StoreError("first record must be the header", 1)
    if header.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"unsupported format version {header.get('version')!r} "
            f"(expected {FORMAT_VERSION})",
            1,
        )
    vocab_info = header["vocab"]
    builder = VOCAB_BUILDERS.get(vocab_info.get("builder"))
    if builder is None:
        raise StoreError(f"unknown vocabulary builder {vocab_info.get('builder')!r}", 1)
    vocab = builder(
        vocab_info["lanes"],
        vocab_info["proximity"],
        vocab_info["adjacent_margin"],
    )
    if [p.name for p in vocab] != vocab_info["names"]:
        raise StoreError("vocabulary names disagree with the builder", 1)
    config_data = dict(header["config"])
    config_data["trigger"] = tuple(config_data.get("trigger", ()))
    try:
        cfg = SimConfig(**config_data)
    except TypeError as exc:
        raise StoreError(f"bad config: {exc}", 1) from exc

    names = {p.name for p in vocab}
    episodes: dict[str, Episode] = {}
    for lineno, record in enumerate(records[1:], start=2):
        if record.get("record") != "episode":
            raise StoreError(f"unexpected record kind {record.get('record')!r}", lineno)
        try:
            episode = _parse_episode(record, cfg, names, lineno)
        except (KeyError, TypeError) as exc:
            raise StoreError(f"malformed episode record: {exc}", lineno) from exc
        if episode.id in episodes:
            raise StoreError(f"duplicate episode id {episode.id!r}", lineno)
        episodes[episode.id] = episode

    if not episodes:
        raise StoreError("library contains no episodes")
    return TraceLibrary(
        episodes=episodes, vocab=vocab, provenance=header.get("provenance", {})
    )
