"""Serialized, replayable records of engine runs.

A certificate stores f0, the engine configuration and, per stage, the
chosen points, the marked cells, the constrained part of phi, the
verification outcome and a sha256 digest of that stage record.  Every
rational is written as ``"p/q"`` and keys are sorted, so equal runs give
byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .covers import Report
from .engine import (Chosen, Engine, EngineConfig, EngineError, Stage, VerificationError,
                     extend, choose, init, verify_init, verify_stage)
from .exact import fmt_rational
from .topology import Point

SCHEMA = "bingspace-certificate/1"


class CertificateError(ValueError):
    """The file is not a well-formed certificate (schema or syntax)."""


def parse_pairs(data: Any) -> list[tuple[Point, Point]]:
    """Decode a pairs file: a list of {"from": Point, "to": Point}."""
    if not isinstance(data, list):
        raise ValueError("pairs must be a JSON list")
    pairs = []
    for item in data:
        if not isinstance(item, dict) or set(item) != {"from", "to"}:
            raise ValueError(f"bad pair entry {item!r}")
        pairs.append((Point.from_json(item["from"]), Point.from_json(item["to"])))
    sources = [a for a, _ in pairs]
    targets = [b for _, b in pairs]
    if len(set(sources)) != len(sources):
        raise ValueError("pairs repeat a source point")
    if len(set(targets)) != len(targets):
        raise ValueError("pairs repeat a target point")
    return pairs


def pairs_json(pairs: list[tuple[Point, Point]]) -> list[dict]:
    return [{"from": a.to_json(), "to": b.to_json()} for a, b in pairs]


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def stage_record(stage: Stage) -> dict:
    rec = {
        "n": stage.n,
        "eps": fmt_rational(stage.eps),
        "chosen": None if stage.chosen is None else stage.chosen.to_json(),
        "f": [{"from": a.to_json(), "to": stage.f[a].to_json()} for a in stage.A],
        "merged": [z.to_json() for z in sorted(stage.merged, key=Point.key)],
        "cells": [c.to_json() for c in stage.partition.marked_cells()],
        "phi_overrides": stage.phi.overrides_json(),
        "verification": None if stage.report is None else stage.report.to_json(),
    }
    rec["digest"] = hashlib.sha256(_canonical(rec).encode()).hexdigest()
    return rec


def certificate(stages: list[Stage], config: EngineConfig) -> dict:
    ctx = stages[0].context
    return {
        "schema": SCHEMA,
        "config": {**config.to_json(), "stages": stages[-1].n},
        "f0": pairs_json(list(ctx.f0)),
        "stages": [stage_record(s) for s in stages],
    }


def dumps(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=1) + "\n"


def run(pairs: list[tuple[Point, Point]], stages: int,
        config: EngineConfig = EngineConfig()) -> tuple[Engine, str]:
    """Run the engine for ``stages`` verified steps; return it and the certificate text."""
    engine = Engine(pairs, config)
    engine.run(stages)
    return engine, dumps(certificate(engine.stages, config))


# --- reading ------------------------------------------------------------------

@dataclass
class LoadedCertificate:
    pairs: list[tuple[Point, Point]]
    config: EngineConfig
    stages: int
    chosen: list[Optional[Chosen]]
    raw: dict
    text: str


def loads(text: str) -> LoadedCertificate:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("schema") != SCHEMA:
        raise CertificateError(f"unknown schema (expected {SCHEMA})")
    for key in ("config", "f0", "stages"):
        if key not in data:
            raise CertificateError(f"missing field {key!r}")
    try:
        pairs = parse_pairs(data["f0"])
        cfg = data["config"]
        if cfg.get("mesh") != "2^-n":
            raise CertificateError("unsupported mesh schedule")
        config = EngineConfig(search_cap=int(cfg["search_cap"]))
        n = int(cfg["stages"])
        records = data["stages"]
        if not isinstance(records, list) or len(records) != n + 1:
            raise CertificateError("stage list does not match the configured stage count")
        chosen = [None if r.get("chosen") is None else Chosen.from_json(r["chosen"])
                  for r in records]
    except CertificateError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CertificateError(f"malformed certificate: {exc}") from exc
    if chosen[0] is not None or any(c is None for c in chosen[1:]):
        raise CertificateError("only stages after the first carry chosen points")
    return LoadedCertificate(pairs, config, n, chosen, data, text)


@dataclass
class VerifyOutcome:
    ok: bool
    stage: Optional[int] = None
    failures: dict[str, str] = field(default_factory=dict)

    def describe(self) -> str:
        if self.ok:
            return "certificate verified"
        lines = [f"stage {self.stage}: condition {k} failed: {v}" for k, v in self.failures.items()]
        return "\n".join(lines)


def _first_difference(a: Any, b: Any, path: str = "") -> str:
    if type(a) is not type(b):
        return path or "/"
    if isinstance(a, dict):
        for k in sorted(set(a) | set(b)):
            if k not in a or k not in b:
                return f"{path}/{k}"
            if a[k] != b[k]:
                return _first_difference(a[k], b[k], f"{path}/{k}")
    if isinstance(a, list):
        if len(a) != len(b):
            return f"{path} (length)"
        for i, (x, y) in enumerate(zip(a, b)):
            if x != y:
                return _first_difference(x, y, f"{path}/{i}")
    return path or "/"


def verify(cert: LoadedCertificate) -> VerifyOutcome:
    """Rebuild each stage from the recorded choices, check it, then replay."""
    config = EngineConfig(search_cap=cert.config.search_cap, verify=False)
    try:
        stage = init(cert.pairs, config)
    except (EngineError, ValueError) as exc:
        return VerifyOutcome(False, 0, {"init": str(exc)})
    report = verify_init(stage)
    if not report.ok:
        return VerifyOutcome(False, 0, report.failures())
    stage.report = report
    stages = [stage]
    for n in range(1, cert.stages + 1):
        recorded = cert.chosen[n]
        assert recorded is not None
        try:
            nxt = extend(stage, recorded)
            report = verify_stage(stage, nxt)
        except (EngineError, AssertionError, ValueError, KeyError) as exc:
            return VerifyOutcome(False, n, {"construction": str(exc)})
        if not report.ok:
            return VerifyOutcome(False, n, report.failures())
        replayed = choose(stage)
        if replayed != recorded:
            return VerifyOutcome(False, n, {"replay": f"engine chooses {replayed}, file records {recorded}"})
        nxt.report = report
        stages.append(nxt)
        stage = nxt
    expected = dumps(certificate(stages, cert.config))
    if expected != cert.text:
        where = _first_difference(json.loads(expected), cert.raw)
        n = None
        parts = where.split("/")
        if len(parts) > 2 and parts[1] == "stages" and parts[2].isdigit():
            n = int(parts[2])
        return VerifyOutcome(False, n, {"replay": f"recorded data differs from replay at {where}"})
    return VerifyOutcome(True)


def resume(cert: LoadedCertificate) -> Engine:
    """An engine positioned at the certificate's last stage (checked while rebuilt)."""
    engine = Engine(cert.pairs, cert.config)
    for n in range(1, cert.stages + 1):
        engine.step()
        if engine.current.chosen != cert.chosen[n]:
            raise VerificationError(n, _mismatch_report(engine.current.chosen, cert.chosen[n]))
    return engine


def _mismatch_report(got: Optional[Chosen], recorded: Optional[Chosen]) -> Report:
    rep = Report()
    rep["replay"].fail(f"engine chooses {got}, file records {recorded}")
    return rep
