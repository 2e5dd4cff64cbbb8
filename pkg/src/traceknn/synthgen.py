"""Seeded synthetic event logs with injected anomalous cases."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .log_ingest import EventRecord, RawCase

MUTATIONS = ("shuffle", "rare-insert", "truncate", "alien-symbols")
EPOCH = datetime(2020, 1, 1)


@dataclass(frozen=True)
class SynthSpec:
    normal_variants: tuple[tuple[tuple[int, ...], float], ...]
    anomaly_injections: tuple[tuple[str, int], ...]
    alphabet_size: int
    seed: int = 0
    noise: float = 0.05  # probability that a normal case gets one adjacent swap

    def validate(self) -> None:
        if not self.normal_variants:
            raise ValueError("synth spec needs at least one normal variant")
        for tpl, w in self.normal_variants:
            if not w > 0:
                raise ValueError(f"variant weight must be positive, got {w}")
            if not tpl or min(tpl) < 0 or max(tpl) >= self.alphabet_size:
                raise ValueError(f"variant {tpl} not within alphabet of size {self.alphabet_size}")
        for kind, count in self.anomaly_injections:
            if kind not in MUTATIONS:
                raise ValueError(f"unknown mutation {kind!r}; expected one of {MUTATIONS}")
            if count < 1:
                raise ValueError("injected count must be >= 1")
        if not 0 <= self.noise <= 1:
            raise ValueError("noise must be a probability")

    @property
    def injected(self) -> int:
        return sum(c for _, c in self.anomaly_injections)

    @classmethod
    def from_dict(cls, d: dict) -> SynthSpec:
        try:
            return cls._from_dict(d)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed synth spec: {exc!r}") from None

    @classmethod
    def _from_dict(cls, d: dict) -> SynthSpec:
        return cls(
            normal_variants=tuple((tuple(v["symbols"]), float(v["weight"]))
                                  for v in d["normal_variants"]),
            anomaly_injections=tuple((a["kind"], int(a["count"])) for a in d.get("anomaly_injections", [])),
            alphabet_size=int(d["alphabet_size"]),
            seed=int(d.get("seed", 0)),
            noise=float(d.get("noise", 0.05)),
        )

    @classmethod
    def load(cls, path: str) -> SynthSpec:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def activity_label(symbol: int) -> str:
    return f"act_{symbol:02d}"


def _mutate(kind, base, rng, spec, used):
    if kind == "shuffle":
        out = list(base)
        rng.shuffle(out)
        return out
    if kind == "rare-insert":
        rare = [s for s in range(spec.alphabet_size) if s not in used] or list(range(spec.alphabet_size))
        out = list(base)
        for _ in range(rng.randint(1, 3)):
            out.insert(rng.randint(0, len(out)), rng.choice(rare))
        return out
    if kind == "truncate":
        if len(base) < 2:
            return list(base) + list(base)
        return list(base[:rng.randint(1, len(base) - 1)])
    # alien-symbols: ids outside the normal alphabet
    return [spec.alphabet_size + rng.randrange(spec.alphabet_size) for _ in range(len(base))]


def generate(spec: SynthSpec, n: int) -> tuple[list[RawCase], set[str]]:
    """Generate n cases; returns them with the ids of the injected anomalies.

    Injected cases are placed at random positions and never equal any normal
    case's sequence.
    """
    spec.validate()
    if n <= spec.injected:
        raise ValueError(f"n={n} must exceed the {spec.injected} injected cases")
    rng = random.Random(spec.seed)
    templates = [list(t) for t, _ in spec.normal_variants]
    weights = [w for _, w in spec.normal_variants]
    used = {s for t in templates for s in t}

    normals = []
    for _ in range(n - spec.injected):
        seq = list(rng.choices(templates, weights)[0])
        if len(seq) > 1 and rng.random() < spec.noise:
            i = rng.randrange(len(seq) - 1)
            seq[i], seq[i + 1] = seq[i + 1], seq[i]
        normals.append(seq)
    normal_set = {tuple(s) for s in normals} | {tuple(t) for t in templates}

    injected = []
    for kind, count in spec.anomaly_injections:
        for _ in range(count):
            for _attempt in range(1000):
                seq = _mutate(kind, rng.choices(templates, weights)[0], rng, spec, used)
                if tuple(seq) not in normal_set:
                    break
            else:
                raise ValueError(f"could not produce a {kind} anomaly distinct from normal cases")
            injected.append(seq)

    slots = sorted(rng.sample(range(n), len(injected)))
    seqs: list[list[int]] = []
    truth: set[str] = set()
    it_norm, it_inj = iter(normals), iter(injected)
    slot_set = set(slots)
    width = len(str(n - 1))
    for i in range(n):
        if i in slot_set:
            seqs.append(next(it_inj))
            truth.add(f"case_{i:0{width}d}")
        else:
            seqs.append(next(it_norm))

    cases = []
    for i, seq in enumerate(seqs):
        cid = f"case_{i:0{width}d}"
        events = tuple(EventRecord(cid, activity_label(s), EPOCH + timedelta(minutes=j))
                       for j, s in enumerate(seq))
        cases.append(RawCase(cid, events))
    return cases, truth


def default_spec(seed: int = 7) -> SynthSpec:
    """Five normal variants over 12 activities with ten shuffled anomalies."""
    return SynthSpec(
        normal_variants=(
            ((0, 1, 2, 3, 4, 5, 6, 7), 5.0),
            ((0, 1, 2, 4, 3, 5, 6, 7), 3.0),
            ((0, 1, 8, 2, 3, 4, 5, 6, 7), 2.0),
            ((0, 9, 1, 2, 3, 4, 10, 5, 6, 7), 1.0),
            ((0, 1, 2, 3, 11, 5, 6, 7), 1.0),
        ),
        anomaly_injections=(("shuffle", 10),),
        alphabet_size=12,
        seed=seed,
    )
