"""Run report: ordered key-value entries, timings kept separable.

Entries append in execution order and write as one kvdoc; reruns with the
same config produce identical reports except for ``timing.`` keys, which
the comparison helper strips.
"""

from __future__ import annotations

import time
from pathlib import Path

from . import kvdoc

TIMING_PREFIX = "timing."


class RunReport:
    def __init__(self):
        self.entries: dict[str, object] = {}

    def add(self, key: str, value: object) -> None:
        self.entries[key] = value

    def extend(self, entries: dict[str, object]) -> None:
        for key, value in entries.items():
            self.entries[key] = value

    def timing(self, stage: str, seconds: float) -> None:
        self.entries[f"{TIMING_PREFIX}{stage}"] = round(seconds, 3)

    def write(self, path) -> None:
        kvdoc.dump(self.entries, path)


class StageTimer:
    def __init__(self, report: RunReport, stage: str):
        self.report = report
        self.stage = stage

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.report.timing(self.stage, time.perf_counter() - self.start)
        return False


def strip_timings(entries: dict[str, str]) -> dict[str, str]:
    return {k: v for k, v in entries.items() if not k.startswith(TIMING_PREFIX)}


def reports_equal_modulo_timings(path_a, path_b) -> bool:
    a = strip_timings(kvdoc.load(Path(path_a)))
    b = strip_timings(kvdoc.load(Path(path_b)))
    return a == b
