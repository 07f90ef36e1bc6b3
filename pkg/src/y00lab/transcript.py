"""Per-symbol records and the JSON Lines transcript format.

One JSON object per line, keys in this order::

    i        symbol index, starting at 0
    k        base drawn from the shared PRNG
    r        Alice's physically random data bit
    j_sent   state index Alice transmitted, state_index(k, r)
    bob_bit  bit Bob demodulated in base k
    eve      null for an honest run, otherwise an object with
             theta_meas  Eve's measured polar angle in [0, 2pi), radians
             k_eve       the C_plus base she read in
             l           the bit she read
             j_resent    state index she forwarded to Bob

Floats are written with ``repr`` precision so a transcript reads back
bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional


@dataclass(frozen=True)
class EveRecord:
    theta_meas: float
    k_eve: int
    l: int
    j_resent: int

    def to_dict(self) -> dict:
        return {"theta_meas": self.theta_meas, "k_eve": self.k_eve, "l": self.l, "j_resent": self.j_resent}

    @classmethod
    def from_dict(cls, d: dict) -> "EveRecord":
        return cls(float(d["theta_meas"]), int(d["k_eve"]), int(d["l"]), int(d["j_resent"]))


@dataclass(frozen=True)
class SymbolRecord:
    i: int
    k: int
    r: int
    j_sent: int
    bob_bit: int
    eve: Optional[EveRecord] = None

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "k": self.k,
            "r": self.r,
            "j_sent": self.j_sent,
            "bob_bit": self.bob_bit,
            "eve": None if self.eve is None else self.eve.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SymbolRecord":
        eve = None if d.get("eve") is None else EveRecord.from_dict(d["eve"])
        return cls(int(d["i"]), int(d["k"]), int(d["r"]), int(d["j_sent"]), int(d["bob_bit"]), eve)


def dumps_record(rec: SymbolRecord) -> str:
    return json.dumps(rec.to_dict(), separators=(",", ":"))


def write_transcript(path: str | Path, records: Iterable[SymbolRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec))
            fh.write("\n")


def read_transcript(path: str | Path) -> list[SymbolRecord]:
    with open(path, encoding="utf-8") as fh:
        return [SymbolRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
