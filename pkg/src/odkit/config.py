"""``key=value`` configuration for search budgets and size caps."""

from __future__ import annotations

from pathlib import Path

DEFAULTS = {
    "search.gs.max_q": 31,
    "search.williamson.max_n": 15,
    "search.od.node_budget": 100_000,
    "search.ring.budget": 2000,
    "search.msls.budget": 10_000,
    "search.butson.max_q": 16,
}


def parse_config(text: str) -> dict[str, int]:
    cfg = dict(DEFAULTS)
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or key not in DEFAULTS:
            raise ValueError(f"config line {no}: unknown or malformed entry {raw.strip()!r}")
        try:
            cfg[key] = int(val)
        except ValueError:
            raise ValueError(f"config line {no}: {key} needs an integer") from None
        if cfg[key] <= 0:
            raise ValueError(f"config line {no}: {key} must be positive")
    return cfg


def load_config(path: str | Path | None) -> dict[str, int]:
    return dict(DEFAULTS) if path is None else parse_config(Path(path).read_text())
