"""Run records and their JSON / CSV forms."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class RunRecord:
    model: str
    instance: str
    n: int
    seed: Optional[int]
    config: dict
    trace: list = field(default_factory=list)  # (t, sliced average, best so far)
    best_cycle: tuple = ()
    best_distance: float = float("inf")
    best_bits: str = ""
    hits: int = 0
    misses: int = 0
    coverage: float = 0.0
    evaluations: int = 0
    seconds: Optional[float] = None
    quality: Optional[float] = None
    reference: Optional[float] = None

    @property
    def bitstrings(self) -> int:
        """Bit strings evaluated over the run (cache hits plus misses)."""
        return self.hits + self.misses

    def to_dict(self, timing: bool = True) -> dict:
        return {
            "model": self.model,
            "instance": self.instance,
            "n": self.n,
            "seed": self.seed,
            "config": self.config,
            "best_cycle": list(self.best_cycle),
            "best_distance": self.best_distance,
            "best_bits": self.best_bits,
            "quality": self.quality,
            "reference": self.reference,
            "bitstrings": self.bitstrings,
            "cache": {"hits": self.hits, "misses": self.misses, "coverage": self.coverage},
            "evaluations": self.evaluations,
            "seconds": self.seconds if timing else None,
            "trace": [[t, avg, best] for t, avg, best in self.trace],
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "sliced_avg", "best"])
        for t, avg, best in self.trace:
            w.writerow([t, repr(float(avg)), repr(float(best))])
        return buf.getvalue()
