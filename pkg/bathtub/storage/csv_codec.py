"""
CSV ingestion of observations and emission of estimates and reports.

Input files need a header row. Lines starting with '#' and blank lines are
skipped, so emitted estimates (which open with a '# mode=...' sidecar line)
can be read back. Floats are written with repr and read back exactly.
"""

import csv
import io
import logging
import math
from collections.abc import Callable, Iterator

import numpy as np
from pydantic import ValidationError

from bathtub.core.exceptions import ParseError, UsageError
from bathtub.models.shape import ModelKind
from bathtub.models.stepfn import Function, Interval, PiecewiseAffine, StepFunction
from bathtub.schemas.data import CensoredSample, EventLog, ObservedData, RegressionData, Sample
from bathtub.schemas.estimate import ShapeEstimate
from bathtub.schemas.risk import RiskReport
from bathtub.storage.base import StorageBackend
from bathtub.storage.factory import get_storage

logger = logging.getLogger(__name__)

COLUMNS: dict[ModelKind, tuple[str, ...]] = {
    ModelKind.DENSITY: ("x",),
    ModelKind.REGRESSION: ("x", "y"),
    ModelKind.HAZARD: ("time", "delta"),
    ModelKind.NHPP: ("time",),
}
FUNCTION_COLUMNS = ("t", "value")


# ===================
# Reading
# ===================

def _rows(text: str) -> Iterator[tuple[int, list[str]]]:
    """(line number, cells) of every non-comment, non-blank line."""
    reader = csv.reader(io.StringIO(text))
    for cells in reader:
        if not cells or not any(c.strip() for c in cells):
            continue
        if cells[0].lstrip().startswith("#"):
            continue
        yield reader.line_num, [c.strip() for c in cells]


def _read_table(text: str, columns: tuple[str, ...]) -> tuple[list[int], np.ndarray]:
    """Line numbers and a float matrix of the requested columns."""
    rows = _rows(text)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise ParseError("missing header row", line=1) from None
    names = [h.lower() for h in header]
    missing = [c for c in columns if c not in names]
    if missing:
        raise ParseError(
            f"missing column '{missing[0]}' (expected {','.join(columns)})",
            line=header_line,
            column=missing[0],
        )
    index = [names.index(c) for c in columns]

    lines: list[int] = []
    table: list[list[float]] = []
    for line, cells in rows:
        record: list[float] = []
        for name, i in zip(columns, index):
            if i >= len(cells) or cells[i] == "":
                raise ParseError(f"missing value for '{name}'", line=line, column=name)
            try:
                value = float(cells[i])
            except ValueError:
                raise ParseError(
                    f"non-numeric value '{cells[i]}' for '{name}'", line=line, column=name
                ) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite value for '{name}'", line=line, column=name)
            record.append(value)
        lines.append(line)
        table.append(record)
    return lines, np.array(table, dtype=float).reshape(len(table), len(columns))


def _reject(lines: list[int], bad: np.ndarray, message: str, column: str) -> None:
    if np.any(bad):
        raise ParseError(message, line=lines[int(np.argmax(bad))], column=column)


def _domain_of(values: np.ndarray, interval: Interval | None) -> Interval:
    if interval is not None:
        return interval
    if values.size < 2 or values.min() == values.max():
        raise UsageError("Cannot infer an interval from the data; pass --interval a,b")
    return Interval(float(values.min()), float(values.max()))


def _first_failing_line(
    lines: list[int], table: np.ndarray, build: Callable[[np.ndarray], ObservedData]
) -> int:
    """Line of the first row that fails validation on its own (else the first data row)."""
    for line, row in zip(lines, table):
        try:
            build(row[np.newaxis, :])
        except (ValidationError, ValueError):
            return line
    return lines[0] if lines else 1


def parse_data(
    text: str, model: ModelKind | str, interval: Interval | None = None
) -> ObservedData:
    """
    Parse observations of the given model from CSV text.

    Args:
        text: CSV content with a header row
        model: density (`x`), regression (`x,y`), hazard (`time,delta`) or nhpp (`time`)
        interval: Estimation interval; required for nhpp (its end is the horizon T).
            Densities default to [min, max] of the sample and hazards to [0, max time].

    Returns:
        The matching observation container

    Raises:
        ParseError: On a missing column, a non-numeric cell, a bad indicator or a
            value outside the interval; the offending line is named
        UsageError: If no interval is given where one is needed
    """
    model = ModelKind(model)
    lines, table = _read_table(text, COLUMNS[model])
    build: Callable[[np.ndarray], ObservedData]
    if model is ModelKind.DENSITY:
        x = table[:, 0]
        domain = _domain_of(x, interval)
        _reject(lines, (x < domain.a) | (x > domain.b), f"value outside {domain}", "x")

        def build(rows: np.ndarray) -> ObservedData:
            return Sample(values=rows[:, 0], domain=domain)

    elif model is ModelKind.REGRESSION:
        _reject(lines, (table[:, 0] < 0) | (table[:, 0] > 1), "design point outside [0, 1]", "x")

        def build(rows: np.ndarray) -> ObservedData:
            return RegressionData(x=rows[:, 0], y=rows[:, 1])

    elif model is ModelKind.HAZARD:
        times, delta = table[:, 0], table[:, 1]
        _reject(lines, (delta != 0) & (delta != 1), "delta must be 0 or 1", "delta")
        _reject(lines, times < 0, "negative time", "time")
        # records beyond c stay: they are at risk over the whole interval
        horizon = interval.b if interval is not None else float(times.max(initial=0.0))
        if horizon <= 0:
            raise UsageError("Cannot infer the horizon c from the data; pass --interval 0,c")

        def build(rows: np.ndarray) -> ObservedData:
            return CensoredSample(
                times=rows[:, 0], delta=rows[:, 1].astype(np.int64), horizon=horizon
            )

    else:
        if interval is None:
            raise UsageError("An nhpp event log needs --interval 0,T for its horizon")
        times = table[:, 0]
        T = interval.b
        _reject(lines, (times <= 0) | (times > T), f"time outside (0, {T}]", "time")
        order = np.argsort(times, kind="stable")
        repeated = np.zeros(times.size, dtype=bool)
        repeated[order[1:]] = np.diff(times[order]) == 0
        _reject(lines, repeated, "duplicate event time", "time")
        lines = [lines[i] for i in order]
        table = table[order]

        def build(rows: np.ndarray) -> ObservedData:
            return EventLog(times=rows[:, 0], horizon=T)

    try:
        return build(table)
    except ValidationError as e:
        line = _first_failing_line(lines, table, build)
        raise ParseError(str(e.errors()[0]["msg"]), line=line) from e


def ingest(
    path: str,
    model: ModelKind | str,
    interval: Interval | None = None,
    storage: StorageBackend | None = None,
) -> ObservedData:
    """Read and parse an observation file (or stdin for "-")."""
    storage = storage or get_storage()
    data = parse_data(storage.read_text(path), model, interval)
    logger.info(f"Ingested {type(data).__name__} from {path}")
    return data


def parse_function(text: str) -> StepFunction:
    """
    Parse the `t,value` step-function format written by `emit_estimate`.

    Raises:
        ParseError: On malformed rows or fewer than two rows
    """
    lines, table = _read_table(text, FUNCTION_COLUMNS)
    if table.shape[0] < 2:
        raise ParseError("a function needs at least two rows", line=lines[-1] if lines else 1)
    t, v = table[:, 0], table[:, 1]
    _reject(lines[1:], np.diff(t) <= 0, "t must be strictly increasing", "t")
    domain = Interval(float(t[0]), float(t[-1]))
    breakpoints, values = t[1:-1], v[:-1]
    if v[-1] != v[-2]:
        breakpoints = np.append(breakpoints, t[-1])
        values = np.append(values, v[-1])
    return StepFunction(domain, breakpoints, values)


def read_function(path: str, storage: StorageBackend | None = None) -> StepFunction:
    storage = storage or get_storage()
    return parse_function(storage.read_text(path))


# ===================
# Writing
# ===================

def _render(rows: list[tuple], header: tuple[str, ...], preamble: str = "") -> str:
    buffer = io.StringIO()
    buffer.write(preamble)
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _number(value: float) -> str:
    return repr(float(value))


def dump_function(f: Function) -> str:
    """`t,value` rows: (a, first value), one row per breakpoint inside (a, b), then (b, f(b))."""
    domain = f.domain
    if isinstance(f, PiecewiseAffine):
        inner = f.knots[1:-1]
        values = f.values[:-1]
    else:
        inner = f.breakpoints[f.breakpoints < domain.b]
        values = f.values[: inner.size + 1]
    t = np.concatenate(([domain.a], inner, [domain.b]))
    v = np.concatenate((values, [f.eval(domain.b)]))
    return _render([(_number(a), _number(b)) for a, b in zip(t, v)], FUNCTION_COLUMNS)


def emit_estimate(estimate: ShapeEstimate) -> str:
    """Estimate CSV with the `# mode=<m> shape=<kind> d=<min_value>` sidecar line first."""
    sidecar = (
        f"# mode={_number(estimate.mode)} shape={estimate.shape.value} "
        f"d={_number(estimate.min_value)}\n"
    )
    return sidecar + dump_function(estimate.f)


def emit_report(report: RiskReport) -> str:
    """RiskReport as `metric,value` rows."""
    rows = [
        (name, _number(value) if isinstance(value, float) else value)
        for name, value in report.rows()
    ]
    return _render(rows, ("metric", "value"))


def dump_data(data: ObservedData) -> str:
    """Observations in the ingestion format of their model."""
    if isinstance(data, Sample):
        return _render([(_number(x),) for x in data.values], COLUMNS[ModelKind.DENSITY])
    if isinstance(data, RegressionData):
        rows = [(_number(x), _number(y)) for x, y in zip(data.x, data.y)]
        return _render(rows, COLUMNS[ModelKind.REGRESSION])
    if isinstance(data, CensoredSample):
        rows = [(_number(t), int(d)) for t, d in data.records]
        return _render(rows, COLUMNS[ModelKind.HAZARD])
    return _render([(_number(t),) for t in data.times], COLUMNS[ModelKind.NHPP])


def emit(
    result: ShapeEstimate | RiskReport | ObservedData,
    path: str,
    storage: StorageBackend | None = None,
) -> str:
    """
    Write an estimate, a report or a data set to a path ("-" for stdout).

    Raises:
        StorageException: If the path cannot be written
    """
    storage = storage or get_storage()
    if isinstance(result, ShapeEstimate):
        text = emit_estimate(result)
    elif isinstance(result, RiskReport):
        text = emit_report(result)
    else:
        text = dump_data(result)
    storage.write_text(path, text)
    logger.debug(f"Wrote {type(result).__name__} to {path}")
    return path
