"""Text formats: panel CSV, family files, stats and curve CSV, key-value reports.

Floats are written with 17 significant digits so every format round-trips
exactly.
"""

import csv
import math

import numpy as np

from .errors import FormatError, ParameterError
from .estimation import PanelSeries
from .families import FirstOrderFamily

__all__ = [
    "FAMILY_HEADER",
    "PANEL_HEADER",
    "format_value",
    "load_family",
    "load_panel_csv",
    "read_report",
    "save_curve_csv",
    "save_family",
    "save_panel_csv",
    "save_stats_csv",
    "write_report",
]

PANEL_HEADER = ("entity", "time", "value")
FAMILY_HEADER = "#first-order-family"
STATS_HEADER = ("k", "lambda_hat", "sigma2_hat", "mean_gap")
CURVE_HEADER = ("log_rank", "mean_log_value")


def _f(x):
    return format(float(x), ".17g")


def _entity_order(keys):
    # integers sort numerically when every key is one, otherwise as text
    try:
        return sorted(keys, key=int) if all(str(int(k)) == k for k in keys) else sorted(keys)
    except ValueError:
        return sorted(keys)


def load_panel_csv(path, interval=1.0):
    """Read a long-format ``entity,time,value`` file into a :class:`PanelSeries`.

    Rows of the panel are the distinct times in increasing order; columns
    are entities in sorted order (numeric when all keys are integers).
    Missing ``(entity, time)`` pairs become absent cells.
    """
    cells = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != PANEL_HEADER:
            raise FormatError("header must be 'entity,time,value'", f"{path}, line 1")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise FormatError(f"expected 3 fields, got {len(row)}", f"line {line}")
            ent, t, v = (c.strip() for c in row)
            try:
                t = int(t)
            except ValueError:
                raise FormatError(f"time {t!r} is not an integer", f"line {line}") from None
            try:
                v = float(v)
            except ValueError:
                raise FormatError(f"value {v!r} is not a number", f"line {line}") from None
            if not math.isfinite(v):
                raise FormatError("non-finite value", f"line {line}")
            if v <= 0:
                raise FormatError("non-positive value", f"line {line}")
            if (ent, t) in cells:
                raise FormatError(f"duplicate row for entity {ent!r} at time {t}", f"line {line}")
            cells[(ent, t)] = v
    if not cells:
        raise FormatError("no data rows", str(path))
    ents = _entity_order({e for e, _ in cells})
    times = sorted({t for _, t in cells})
    col = {e: j for j, e in enumerate(ents)}
    row_of = {t: i for i, t in enumerate(times)}
    values = np.full((len(times), len(ents)), np.nan)
    for (e, t), v in cells.items():
        values[row_of[t], col[e]] = v
    return PanelSeries(values, tuple(ents), np.array(times), interval)


def save_panel_csv(panel, path):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(PANEL_HEADER) + "\n")
        ents = [str(e) for e in panel.entities]
        for t, row in zip(panel.times, panel.values):
            t = int(t)
            fh.writelines(f"{e},{t},{_f(v)}\n" for e, v in zip(ents, row) if not np.isnan(v))


def save_family(family, path):
    """Write ``#first-order-family K=<K>`` then one ``k g_k sigma2_k`` line per explicit rank."""
    with open(path, "w") as fh:
        fh.write(f"{FAMILY_HEADER} K={family.K_explicit}\n")
        for k, (g, s2) in enumerate(zip(family.g, family.sigma2), start=1):
            fh.write(f"{k} {_f(g)} {_f(s2)}\n")


def load_family(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty family file", f"{path}, line 1")
    head = lines[0].split()
    if len(head) != 2 or head[0] != FAMILY_HEADER or not head[1].startswith("K="):
        raise FormatError(f"header must be '{FAMILY_HEADER} K=<int>'", f"{path}, line 1")
    try:
        K = int(head[1][2:])
    except ValueError:
        raise FormatError("K is not an integer", f"{path}, line 1") from None
    if K < 1:
        raise FormatError("K must be positive", f"{path}, line 1")
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) < K:
        raise FormatError(f"expected {K} rank lines, found {len(body)} (truncated file)",
                          f"{path}, line {len(body) + 2}")
    if len(body) > K:
        raise FormatError(f"extra content after {K} rank lines", f"{path}, line {K + 2}")
    g = np.empty(K)
    s2 = np.empty(K)
    for i, text in enumerate(body):
        loc = f"{path}, line {i + 2}"
        parts = text.split()
        if len(parts) != 3:
            raise FormatError("expected 'k g_k sigma2_k'", loc)
        try:
            k, g[i], s2[i] = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise FormatError("unparseable number", loc) from None
        if k != i + 1:
            raise FormatError(f"expected rank {i + 1}, got {k}", loc)
    try:
        return FirstOrderFamily(g, s2)
    except ParameterError as exc:
        raise FormatError(str(exc), str(path)) from None


def save_stats_csv(stats, path, columns=None):
    """Write ``k,lambda_hat,sigma2_hat,mean_gap`` rows (``columns`` overrides the three series)."""
    lam, s2, mg = columns if columns is not None else (stats.lambda_hat, stats.sigma2_hat, stats.mean_gap)
    with open(path, "w") as fh:
        fh.write(",".join(STATS_HEADER) + "\n")
        for k, row in enumerate(zip(lam, s2, mg), start=1):
            fh.write(f"{k}," + ",".join(_f(x) for x in row) + "\n")


def save_curve_csv(curve, path):
    with open(path, "w") as fh:
        fh.write(",".join(CURVE_HEADER) + "\n")
        for x, y in zip(curve.log_rank, curve.mean_log_value):
            fh.write(f"{_f(x)},{_f(y)}\n")


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _f(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(format_value(x) for x in v)
    return str(v).replace("\n", " ")


def write_report(path, items):
    """Write ``key = value`` lines from a mapping or a sequence of pairs, in order."""
    pairs = items.items() if hasattr(items, "items") else items
    with open(path, "w") as fh:
        for key, value in pairs:
            if "=" in key or "\n" in key:
                raise ParameterError(f"invalid report key {key!r}")
            fh.write(f"{key} = {format_value(value)}\n")


def read_report(path):
    """Parse a report back into a dict of strings."""
    out = {}
    with open(path) as fh:
        for line, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            key, sep, value = text.rstrip("\n").partition(" = ")
            if not sep:
                raise FormatError("expected 'key = value'", f"{path}, line {line}")
            out[key] = value
    return out
