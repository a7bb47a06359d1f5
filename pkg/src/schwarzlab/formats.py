"""File formats: measure and domain descriptions in, CSV and JSON out.

Measure file
------------
Sections in square brackets; ``#`` starts a comment; blank lines are ignored::

    [density]
    1 + 0.5*cos(theta)**2 - sin(2*theta)

    [atoms]
    # angle  mass   (angles in radians, expressions allowed)
    0        1.0
    pi/2     0.5

    [cantor]
    depth = 8
    mass = 1.0
    arc = 0, 2*pi/3

The density is one expression in ``theta`` built from numbers, ``pi``, ``+ - * /``,
``**`` and ``cos``/``sin``.  Lines of a section may be split across several
lines only in ``[density]``, where they are joined with spaces.

Domain file
-----------
One slit per line, heights on the positive imaginary axis::

    slit 1 2
    slit 100 200
    halfline 1e6
"""
from __future__ import annotations

import ast
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .measure import CantorPart, CircleMeasure
from .potential import SlitDomain


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = f"{path or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


_FUNCS = {"cos": np.cos, "sin": np.sin}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide,
           ast.Pow: np.power}


def _check_expr(node, allow_theta: bool, line: int):
    """Reject anything outside the whitelist before evaluation."""
    if isinstance(node, ast.Expression):
        return _check_expr(node.body, allow_theta, line)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return
    if isinstance(node, ast.Name):
        if node.id == "pi" or (allow_theta and node.id == "theta"):
            return
        raise ParseError(f"unknown name {node.id!r}", line)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        return _check_expr(node.operand, allow_theta, line)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check_expr(node.left, allow_theta, line)
        return _check_expr(node.right, allow_theta, line)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ParseError(f"{node.func.id} takes exactly one argument", line)
        return _check_expr(node.args[0], allow_theta, line)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        raise ParseError(f"unsupported function {node.func.id!r} (allowed: cos, sin)", line)
    raise ParseError(f"unsupported syntax {type(node).__name__}", line)


def _eval(node, theta):
    if isinstance(node, ast.Expression):
        return _eval(node.body, theta)
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return math.pi if node.id == "pi" else theta
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, theta)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, theta), _eval(node.right, theta))
    return _FUNCS[node.func.id](_eval(node.args[0], theta))


def parse_expression(text: str, allow_theta: bool = True, line: int | None = None):
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad expression {text.strip()!r}: {exc.msg}", line) from None
    _check_expr(tree, allow_theta, line)
    return tree


def density_function(text: str, line: int | None = None):
    tree = parse_expression(text, True, line)

    def rho(theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(_eval(tree, theta), dtype=float) * np.ones_like(theta)
    return rho


def number(text: str, line: int | None = None) -> float:
    tree = parse_expression(text, False, line)
    return float(_eval(tree, None))


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_measure(text: str, path: str | None = None) -> CircleMeasure:
    section = None
    seen = set()
    density_lines: list[tuple[int, str]] = []
    atoms = []
    cantor: dict[str, tuple[int, str]] = {}
    try:
        for no, raw in enumerate(text.splitlines(), start=1):
            s = _strip(raw)
            if not s:
                continue
            if s.startswith("["):
                if not s.endswith("]"):
                    raise ParseError(f"unterminated section header {s!r}", no)
                section = s[1:-1].strip().lower()
                if section not in ("density", "atoms", "cantor"):
                    raise ParseError(f"unknown section [{section}]", no)
                if section in seen:
                    raise ParseError(f"section [{section}] appears twice", no)
                seen.add(section)
                continue
            if section is None:
                raise ParseError("content before the first section header", no)
            if section == "density":
                density_lines.append((no, s))
            elif section == "atoms":
                parts = s.replace(",", " ").split()
                if len(parts) != 2:
                    raise ParseError("atom lines are 'angle mass'", no)
                atoms.append((number(parts[0], no), number(parts[1], no), no))
            else:
                if "=" not in s:
                    raise ParseError("cantor lines are 'key = value'", no)
                key, val = (x.strip().lower() for x in s.split("=", 1))
                if key not in ("depth", "mass", "arc"):
                    raise ParseError(f"unknown cantor key {key!r}", no)
                cantor[key] = (no, val)
        density = None
        if density_lines:
            first = density_lines[0][0]
            density = density_function(" ".join(x for _, x in density_lines), first)
            probe = density(np.linspace(-math.pi, math.pi, 64))
            if not np.all(np.isfinite(probe)):
                raise ParseError("density is not finite on the circle", first)
        singular = None
        if cantor:
            for key in ("depth", "mass"):
                if key not in cantor:
                    raise ParseError(f"[cantor] needs '{key}'", max(n for n, _ in cantor.values()))
            no, dv = cantor["depth"]
            depth = number(dv, no)
            if depth != int(depth):
                raise ParseError("cantor depth must be an integer", no)
            mass = number(cantor["mass"][1], cantor["mass"][0])
            arc = (0.0, 2.0 * math.pi / 3.0)
            if "arc" in cantor:
                no, av = cantor["arc"]
                bits = av.split(",")
                if len(bits) != 2:
                    raise ParseError("arc is 'start, end'", no)
                arc = (number(bits[0], no), number(bits[1], no))
            try:
                singular = CantorPart(int(depth), mass, arc)
            except ValueError as exc:
                raise ParseError(str(exc), cantor["depth"][0]) from None
        try:
            mu = CircleMeasure(density, tuple((a, m) for a, m, _ in atoms), singular,
                               label=Path(path).stem if path else "measure")
        except ValueError as exc:
            raise ParseError(str(exc), atoms[-1][2] if atoms else None) from None
    except ParseError as exc:
        if path and exc.line is not None and not str(exc).startswith(path):
            raise ParseError(str(exc).split(": ", 1)[-1], exc.line, path) from None
        raise
    if density is None and not atoms and singular is None:
        raise ParseError("empty measure: give at least one section", None, path)
    return mu


def read_measure(path) -> CircleMeasure:
    p = Path(path)
    return parse_measure(p.read_text(encoding="utf-8"), str(p))


def parse_domain(text: str, path: str | None = None) -> SlitDomain:
    slits = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = _strip(raw)
        if not s:
            continue
        parts = s.split()
        kind = parts[0].lower()
        if kind == "slit" and len(parts) == 3:
            slits.append((number(parts[1], no), number(parts[2], no), no))
        elif kind == "halfline" and len(parts) == 2:
            slits.append((number(parts[1], no), math.inf, no))
        else:
            raise ParseError("expected 'slit a b' or 'halfline a'", no, path)
    if not slits:
        raise ParseError("no slits given", None, path)
    slits.sort(key=lambda x: x[0])
    try:
        return SlitDomain(tuple((a, b) for a, b, _ in slits))
    except ValueError as exc:
        raise ParseError(str(exc), None, path) from None


def read_domain(path) -> SlitDomain:
    p = Path(path)
    return parse_domain(p.read_text(encoding="utf-8"), str(p))


# ------------------------------------------------------------------ output

def fmt(x) -> str:
    """Numbers with 17 significant digits; strings pass through, None is empty."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write(path, data: str | bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    atomic_write(path, csv_text(header, rows))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    atomic_write(path, json_text(obj))
