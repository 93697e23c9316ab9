"""Append-only JSONL run journal.

Journal files are diagnostics: they carry timestamps and are never part of the
byte-identical report outputs. Every entry is stamped with the run's frame,
master seed and worker count once those are known.
"""

from __future__ import annotations

import contextvars
import json
import logging
import threading
import uuid
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

RUNS_DIR = Path("runs")

EVENTS = ("command_started", "command_finished", "check_failed", "cell_finished")


@dataclass(frozen=True)
class RunContext:
    """Experiment coordinates shared by every event of one run."""

    m: int | None = None
    r: int | None = None
    master_seed: int | None = None
    threads: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {key: value for key, value in asdict(self).items() if value is not None}


@dataclass
class _JournalEntry:
    ts: str
    run_id: str
    event: str
    context: RunContext
    fields: dict[str, Any]

    def to_json_line(self) -> str:
        body = {"ts": self.ts, "run_id": self.run_id, "event": self.event}
        body.update(self.context.to_dict())
        body.update(self.fields)
        return json.dumps(body, default=str) + "\n"


class RunJournal:
    """Write and read JSONL journals grouped by run ID."""

    _run_id = contextvars.ContextVar("journal_run_id", default=None)
    _context = contextvars.ContextVar("journal_run_context", default=RunContext())
    _lock = threading.Lock()

    @classmethod
    def set_run(cls, run_id: str | None, context: RunContext | None = None) -> None:
        cls._run_id.set(run_id)
        cls._context.set(context or RunContext())

    @classmethod
    def start_run(cls, run_id: str | None = None, **context: Any) -> str:
        """Begin a run; ``context`` takes ``m``, ``r``, ``master_seed`` and ``threads``."""
        run_id = run_id or uuid.uuid4().hex[:12]
        cls.set_run(run_id, RunContext(**context))
        return run_id

    @classmethod
    def annotate(cls, **context: Any) -> None:
        """Fill in run coordinates learned after the run started (e.g. from a config file)."""
        cls._context.set(replace(cls._context.get(), **context))

    @classmethod
    def current_run(cls) -> str | None:
        return cls._run_id.get()

    @classmethod
    def current_context(cls) -> RunContext:
        return cls._context.get()

    @classmethod
    def _file_path(cls, run_id: str) -> Path:
        return RUNS_DIR / f"{run_id}.jsonl"

    @classmethod
    def log_event(cls, event: str, run_id: str | None = None, **kwargs: Any) -> None:
        rid = run_id or cls.current_run()
        if rid is None:
            return
        if event not in EVENTS:
            raise ValueError(f"Unknown journal event '{event}'. Available: {', '.join(EVENTS)}")

        entry = _JournalEntry(
            ts=datetime.now(timezone.utc).isoformat(),
            run_id=rid,
            event=event,
            context=cls.current_context(),
            fields=kwargs,
        )
        try:
            with cls._lock:
                RUNS_DIR.mkdir(parents=True, exist_ok=True)
                with open(cls._file_path(rid), "a", encoding="utf-8") as handle:
                    handle.write(entry.to_json_line())
        except Exception as exc:
            logger.error("Journal write error: %s", exc)

    @classmethod
    def read_events(cls, run_id: str | None = None) -> list[dict[str, Any]]:
        rid = run_id or cls.current_run()
        if rid is None:
            return []
        path = cls._file_path(rid)
        if not path.exists():
            return []
        events = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                parsed = _decode_line(line)
                if parsed is not None:
                    events.append(parsed)
        return events

    @classmethod
    def list_runs(cls) -> list[str]:
        return sorted(path.stem for path in RUNS_DIR.glob("*.jsonl"))


def _decode_line(line: str) -> dict[str, Any] | None:
    raw = line.strip()
    if not raw:
        return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return None
