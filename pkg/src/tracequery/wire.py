"""JSON payload shapes shared by the HTTP API and the CLI's structured
output, so both shells emit identical results for identical queries."""

from __future__ import annotations

from .abstraction import Car, EpisodeStep, PredicateDef
from .engine import Clip, QueryResult
from .store import TraceLibrary


def car_payload(car: Car) -> dict:
    return {"id": car.id, "lane": car.lane, "x": car.x, "speed": car.speed}


def frame_payload(step: EpisodeStep) -> dict:
    return {
        "step": step.raw.step,
        "agent": car_payload(step.raw.agent),
        "npcs": [car_payload(n) for n in step.raw.npcs],
        "action": step.action,
        "letter": sorted(step.letter),
        "active_policy": step.active_policy,
    }


def clip_payload(clip: Clip) -> dict:
    return {
        "clip_id": clip.clip_id,
        "trace_id": clip.trace_id,
        "k": clip.k,
        "ell": clip.ell,
        "frames": [frame_payload(f) for f in clip.frames],
    }


def query_result_payload(result: QueryResult) -> dict:
    return {
        "clips": [clip_payload(c) for c in result.clips],
        "warnings": result.warnings,
        "continuation": result.continuation,
        "sample_seed": result.sample_seed,
        "total_matches": result.total_matches,
        "formula": result.formula,
        "timing": result.timing,
    }


def predicate_groups(vocab: list[PredicateDef]) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for p in vocab:
        groups.setdefault(p.group, []).append(p.name)
    return groups


def library_summary(library: TraceLibrary) -> dict:
    episodes = [
        {
            "id": ep.id,
            "steps": len(ep.steps),
            "agent_kind": ep.agent_kind,
            "seed": ep.seed,
        }
        for ep in (library.episodes[i] for i in sorted(library.episodes))
    ]
    return {
        "episodes": episodes,
        "letters": sum(e["steps"] for e in episodes),
        "vocabulary": [p.name for p in library.vocab],
        "provenance": library.provenance,
    }
