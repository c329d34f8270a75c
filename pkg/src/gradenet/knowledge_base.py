"""Append-only store of the best route found per (topology, source, dest).

One entry per line::

    kb <fingerprint-hex> <source> <dest> <bandwidth> <mean_grade> <run_counter> <path>

where ``path`` is dash-separated node ids. Reading compacts the log so that
only the widest entry per key survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


class KnowledgeBaseError(RuntimeError):
    pass


@dataclass(frozen=True)
class KnowledgeEntry:
    topology_fingerprint: str
    source: int
    dest: int
    best_path: tuple[int, ...]
    raw_bandwidth: float
    mean_grade: float
    recorded_at: int

    def __post_init__(self):
        if len(self.best_path) < 2:
            raise ValueError("a stored path needs at least two nodes")
        if self.best_path[0] != self.source or self.best_path[-1] != self.dest:
            raise ValueError("path endpoints do not match source/dest")
        if not self.raw_bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        int(self.topology_fingerprint, 16)

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.topology_fingerprint, self.source, self.dest)

    def to_line(self) -> str:
        path = "-".join(str(n) for n in self.best_path)
        return (
            f"kb {self.topology_fingerprint} {self.source} {self.dest} "
            f"{self.raw_bandwidth!r} {self.mean_grade!r} {self.recorded_at} {path}"
        )

    @classmethod
    def from_line(cls, line: str) -> "KnowledgeEntry":
        fields = line.split()
        if len(fields) != 8 or fields[0] != "kb":
            raise ValueError(f"expected 8 fields starting with 'kb', got {len(fields)}")
        return cls(
            topology_fingerprint=fields[1],
            source=int(fields[2]),
            dest=int(fields[3]),
            raw_bandwidth=float(fields[4]),
            mean_grade=float(fields[5]),
            recorded_at=int(fields[6]),
            best_path=tuple(int(n) for n in fields[7].split("-")),
        )


def load_entries(store: str | Path) -> dict[tuple[str, int, int], KnowledgeEntry]:
    """Compacted view of the store; a missing file is an empty store."""
    path = Path(store)
    entries: dict[tuple[str, int, int], KnowledgeEntry] = {}
    if not path.exists():
        return entries
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise KnowledgeBaseError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = KnowledgeEntry.from_line(line)
        except ValueError as exc:
            raise KnowledgeBaseError(f"{path}:{lineno}: corrupt entry ({exc})") from exc
        old = entries.get(entry.key)
        if old is None or entry.raw_bandwidth > old.raw_bandwidth:
            entries[entry.key] = entry
    return entries


def record(entry: KnowledgeEntry, store: str | Path) -> bool:
    """Store ``entry`` unless an equal or wider route is already known.

    Returns True when the store changed.
    """
    path = Path(store)
    entries = load_entries(path)
    old = entries.get(entry.key)
    try:
        if old is None:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(entry.to_line() + "\n")
            return True
        if entry.raw_bandwidth > old.raw_bandwidth:
            entries[entry.key] = entry
            path.write_text("".join(e.to_line() + "\n" for e in entries.values()), encoding="utf-8")
            return True
    except OSError as exc:
        raise KnowledgeBaseError(f"{path}: {exc}") from exc
    return False


def lookup(fingerprint: str, source: int, dest: int, store: str | Path) -> KnowledgeEntry | None:
    return load_entries(store).get((fingerprint, source, dest))


def next_run_counter(store: str | Path) -> int:
    entries = load_entries(store)
    return 1 + max((e.recorded_at for e in entries.values()), default=0)

