"""Text formats for stored tensor series and run configuration files.

The series container is deliberately plain text so fixtures stay diffable
and any tool can write one: a magic line, a header line with the shape, and
the numbers.  Values are printed with 17 significant digits, which is enough
for a float64 round trip to be exact.

Configs are flat ``key=value`` lines with a declared schema.  Unknown keys
are rejected rather than ignored: a silently dropped Monte Carlo knob is a
reproducibility hazard, a crash is not.
"""

from __future__ import annotations

import numpy as np

MAGIC = "tsrs 1"


class FormatError(ValueError):
    """A stored tensor series file violates the format contract."""


class ConfigError(ValueError):
    """A configuration file violates its schema."""


def write_tensor_series(x, path):
    """Write a series of tensors ``(T, d_1, ..., d_K)`` as text.

    One line per time step, each tensor flattened with the first index
    fastest (the same fibre ordering the unfolding operators use).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2:
        raise ValueError("expected a series of tensors, shape (T, d_1, ..., d_K)")
    dims = x.shape[1:]
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write(MAGIC + "\n")
        handle.write(" ".join(str(n) for n in (x.ndim - 1, x.shape[0]) + dims) + "\n")
        for snapshot in x:
            row = snapshot.ravel(order="F")
            handle.write(" ".join(format(v, ".17g") for v in row) + "\n")


def read_tensor_series(path):
    """Read a series written by :func:`write_tensor_series`.

    The token count must match the header exactly; a short or padded body is
    an error, not a truncation.
    """
    with open(path, "r", encoding="ascii") as handle:
        text = handle.read()
    first, _, rest = text.partition("\n")
    if first.strip() != MAGIC:
        raise FormatError(f"bad magic line: expected {MAGIC!r}")
    header, _, body = rest.partition("\n")
    fields = header.split()
    if len(fields) < 3:
        raise FormatError("header must read: n_modes t_steps d_1 ... d_K")
    try:
        numbers = [int(f) for f in fields]
    except ValueError:
        raise FormatError(f"non-integer header field in {header!r}")
    n_modes, t_steps, dims = numbers[0], numbers[1], tuple(numbers[2:])
    if n_modes < 1 or t_steps < 1 or any(d < 1 for d in dims):
        raise FormatError(f"non-positive sizes in header {header!r}")
    if len(dims) != n_modes:
        raise FormatError(f"header announces {n_modes} modes but lists {len(dims)} sizes")
    tokens = body.split()
    expected = t_steps * int(np.prod(dims))
    if len(tokens) != expected:
        raise FormatError(f"expected {expected} values, found {len(tokens)}")
    try:
        flat = np.array([float(t) for t in tokens])
    except ValueError:
        raise FormatError("non-numeric value in body")
    return fold_rows(flat.reshape(t_steps, -1), dims)


def fold_rows(rows, dims):
    """Reshape flat rows ``(T, prod(dims))`` into tensors ``(T, *dims)``.

    Each row is read with the first index fastest, matching the on-disk
    layout and the fibre ordering the unfolding operators use.
    """
    rows = np.asarray(rows, dtype=float)
    dims = tuple(int(d) for d in dims)
    if rows.ndim != 2 or rows.shape[1] != int(np.prod(dims)):
        raise ValueError(f"expected rows of length {int(np.prod(dims))}")
    # Row-major over reversed axes, then reversing them, is the in-memory
    # equivalent of a first-index-fastest read.
    blocks = rows.reshape((rows.shape[0],) + dims[::-1])
    axes = (0,) + tuple(range(len(dims), 0, -1))
    return np.ascontiguousarray(blocks.transpose(axes))


def write_labeled_matrices(path, items):
    """Write ``(label, matrix)`` pairs as labeled text blocks.

    Each block is a header line ``label: R x C`` followed by R rows of C
    values at full precision.
    """
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        for label, matrix in items:
            matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
            handle.write(f"{label}: {matrix.shape[0]} x {matrix.shape[1]}\n")
            for row in matrix:
                handle.write(" ".join(format(v, ".17g") for v in row) + "\n")


def read_labeled_matrices(path):
    """Read blocks written by :func:`write_labeled_matrices`."""
    with open(path, "r", encoding="ascii") as handle:
        lines = handle.read().splitlines()
    items = []
    pos = 0
    while pos < len(lines):
        if not lines[pos].strip():
            pos += 1
            continue
        label, sep, shape = lines[pos].rpartition(":")
        fields = shape.split()
        if not sep or len(fields) != 3 or fields[1] != "x":
            raise FormatError(f"bad block header {lines[pos]!r}")
        try:
            n_rows, n_cols = int(fields[0]), int(fields[2])
        except ValueError:
            raise FormatError(f"bad block header {lines[pos]!r}")
        block = lines[pos + 1 : pos + 1 + n_rows]
        if len(block) != n_rows:
            raise FormatError(f"block {label!r} is truncated")
        try:
            matrix = np.array([[float(v) for v in line.split()] for line in block])
        except ValueError:
            raise FormatError(f"non-numeric value in block {label!r}")
        if matrix.shape != (n_rows, n_cols):
            raise FormatError(f"block {label!r} does not match its header")
        items.append((label, matrix))
        pos += 1 + n_rows
    return items


def parse_ints(text):
    """Parse a comma-separated integer tuple, e.g. ``40,40``."""
    return tuple(int(part.strip()) for part in text.split(","))


def parse_floats(text):
    """Parse a comma-separated float tuple, e.g. ``0.7,0.3,-0.4``."""
    return tuple(float(part.strip()) for part in text.split(","))


def parse_float_rows(text):
    """Parse semicolon-separated float tuples, e.g. ``0,0.5;0,0.5``."""
    return tuple(parse_floats(row) for row in text.split(";"))


def parse_names(text):
    """Parse a comma-separated tuple of lowercase identifiers."""
    names = tuple(part.strip() for part in text.split(","))
    if any(not name for name in names):
        raise ValueError("empty name in list")
    return names


def parse_bool(text):
    """Parse ``true``/``false`` (case-insensitive)."""
    lowered = text.strip().lower()
    if lowered not in ("true", "false"):
        raise ValueError(f"expected true or false, got {text!r}")
    return lowered == "true"


def parse_config(text, schema):
    """Parse flat ``key=value`` text against ``schema`` (key -> converter).

    Blank lines and ``#`` comment lines are skipped.  Unknown keys,
    duplicate keys, and converter failures all raise :class:`ConfigError`
    with the offending line number.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = schema[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}")
    return values


def read_config(path, schema):
    """Read and parse a config file; see :func:`parse_config`."""
    with open(path, "r", encoding="ascii") as handle:
        return parse_config(handle.read(), schema)
