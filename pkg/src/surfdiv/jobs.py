"""Line-oriented job files.

    [surface]
    builder = hirzebruch(2)        # plane(), hirzebruch(n), del_pezzo(r), abelian()
    point = f0,s                   # torus-fixed point on a builder base, repeatable
    rank = 2                       # or an explicit lattice:
    gram = -2,1; 1,0
    K = -2,-4
    curve = 1,0;0                  # class;genus[;name], repeatable
    exceptional = s                # contracted curves, for resolve/antik

    [classes]
    L = 6,-2                       # coordinates, written p/q
    D = 2*H - E1                   # or a combination of K, basis labels, curves, classes

    [job]
    command = nonvanish
    class = L
    bound = 1000

Errors carry the 1-based line and column of the offending text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PreconditionError, SignatureError
from .lattice import DivisorClass, SurfaceLattice, check_signature
from .models import BlowupChain, Point, abelian_product, blow_up, del_pezzo, hirzebruch, projective_plane
from .scalars import QuadScalar

COMMANDS = ("pseff", "nef", "zariski", "rays", "nonvanish", "resolve", "antik", "remark", "suite")
SECTIONS = ("surface", "classes", "job")


class JobError(PreconditionError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column
        self.detail = message


@dataclass
class JobSpec:
    lattice: SurfaceLattice
    classes: dict = field(default_factory=dict)
    command: str = ""
    target: str | None = None
    options: dict = field(default_factory=dict)
    exceptional: tuple = ()
    builder: str = "custom"

    def target_class(self) -> DivisorClass:
        if self.target is None:
            if len(self.classes) == 1:
                return next(iter(self.classes.values()))
            raise PreconditionError("job names no class (set class = NAME under [job])")
        return self.classes[self.target]


_RAT = re.compile(r"^[+-]?\d+(/\d+)?$")
_QUAD = re.compile(r"^([+-]?\d+(?:/\d+)?(?=[+-]))?([+-]?)(\d+(?:/\d+)?)?\*?sqrt\((\d+)\)$")
_BUILDER = re.compile(r"^(plane|hirzebruch|del_pezzo|abelian)\(\s*(\d*)\s*\)$")
_TERM = re.compile(r"\s*([+-]?)\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?([A-Za-z_]\w*)?\s*")


def _rational(text: str, line: int, col: int, quadratic: bool = False):
    t = text.strip()
    if _RAT.match(t):
        return Fraction(t)
    if quadratic:
        m = _QUAD.match(t.replace(" ", ""))
        if m:
            a = Fraction(m.group(1) or 0)
            b = Fraction(m.group(3) or 1) * (-1 if m.group(2) == "-" else 1)
            return QuadScalar(a, b, int(m.group(4)))
    raise JobError(f"non-rational coefficient {t!r} (write integers or p/q)", line, col)


def _vector(text: str, line: int, col: int, quadratic: bool = False) -> list:
    out = []
    offset = 0
    for part in text.split(","):
        lead = len(part) - len(part.lstrip())
        out.append(_rational(part, line, col + offset + lead, quadratic))
        offset += len(part) + 1
    return out


def _split_lines(text: str):
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise JobError("unterminated section header", no, indent + 1)
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                raise JobError(f"unknown section [{name}]", no, indent + 1)
            section = name
            continue
        if "=" not in line:
            raise JobError("expected key = value", no, indent + 1)
        if section is None:
            raise JobError("entry before any section header", no, indent + 1)
        key, value = line.split("=", 1)
        vcol = len(key) + 2 + (len(value) - len(value.lstrip()))
        yield section, key.strip(), value.strip(), no, indent + 1, vcol


def _build_surface(entries) -> tuple[SurfaceLattice, str, list]:
    keys = {}
    points, curves, exceptional = [], [], []
    for key, value, no, kcol, vcol in entries:
        if key == "point":
            points.append((value, no, vcol))
        elif key == "curve":
            curves.append((value, no, vcol))
        elif key == "exceptional":
            exceptional.extend((name.strip(), no, vcol) for name in value.split(",") if name.strip())
        elif key in ("builder", "rank", "gram", "K"):
            if key in keys:
                raise JobError(f"duplicate key {key!r}", no, kcol)
            keys[key] = (value, no, vcol)
        else:
            raise JobError(f"unknown surface key {key!r}", no, kcol)
    if "builder" in keys:
        value, no, vcol = keys["builder"]
        m = _BUILDER.match(value.replace(" ", ""))
        if not m:
            raise JobError(f"unknown builder {value!r}", no, vcol)
        name, arg = m.group(1), m.group(2)
        if name in ("hirzebruch", "del_pezzo") and not arg:
            raise JobError(f"builder {name} needs an integer argument", no, vcol)
        try:
            if points:
                if name not in ("plane", "hirzebruch"):
                    raise JobError("points can only be added to plane() or hirzebruch(n)", points[0][1], points[0][2])
                pts = []
                for text, pno, pcol in points:
                    names = [t.strip() for t in text.split(",")]
                    if len(names) != 2:
                        raise JobError("point needs two curve names", pno, pcol)
                    pts.append(Point.at(*names))
                lat = blow_up(BlowupChain(name, int(arg or 0), pts))
            elif name == "plane":
                lat = projective_plane()
            elif name == "hirzebruch":
                lat = hirzebruch(int(arg))
            elif name == "del_pezzo":
                lat = del_pezzo(int(arg))
            else:
                lat = abelian_product().lattice
        except JobError:
            raise
        except PreconditionError as exc:
            raise JobError(str(exc), no, vcol) from None
        if curves or any(k in keys for k in ("rank", "gram", "K")):
            raise JobError("builder surfaces take no explicit rank/gram/K/curve entries", no, vcol)
        return lat, value, exceptional
    for k in ("rank", "gram", "K"):
        if k not in keys:
            raise JobError(f"explicit surface needs {k} = ...")
    rvalue, rno, rcol = keys["rank"]
    if not re.fullmatch(r"\d+", rvalue):
        raise JobError("rank must be a positive integer", rno, rcol)
    rank = int(rvalue)
    gvalue, gno, gcol = keys["gram"]
    rows = []
    off = 0
    for part in gvalue.split(";"):
        rows.append(_vector(part, gno, gcol + off))
        off += len(part) + 1
    if len(rows) != rank or any(len(r) != rank for r in rows):
        raise JobError(f"rank mismatch: gram must be {rank} x {rank}", gno, gcol)
    try:
        check_signature(rows)
    except SignatureError as exc:
        raise JobError(str(exc), gno, gcol) from None
    kvalue, kno, kcol = keys["K"]
    K = _vector(kvalue, kno, kcol)
    if len(K) != rank:
        raise JobError(f"rank mismatch: K has length {len(K)}, rank is {rank}", kno, kcol)
    parsed = []
    for text, cno, ccol in curves:
        parts = text.split(";")
        if len(parts) not in (2, 3):
            raise JobError("curve is written class;genus[;name]", cno, ccol)
        v = _vector(parts[0], cno, ccol)
        if len(v) != rank:
            raise JobError(f"rank mismatch: curve class has length {len(v)}, rank is {rank}", cno, ccol)
        if not re.fullmatch(r"\s*\d+\s*", parts[1]):
            raise JobError("curve genus must be a nonnegative integer", cno, ccol + len(parts[0]) + 1)
        name = parts[2].strip() if len(parts) == 3 else f"C{len(parsed)}"
        parsed.append((v, int(parts[1]), name))
    try:
        lat = SurfaceLattice(rows, K, parsed)
    except PreconditionError as exc:
        raise JobError(str(exc), curves[0][1] if curves else kno, 1) from None
    return lat, "custom", exceptional


def _combination(text: str, names: dict, lattice: SurfaceLattice, line: int, col: int) -> DivisorClass:
    pos = 0
    total = lattice.zero()
    s = text
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise JobError(f"cannot parse class expression near {s[pos:]!r}", line, col + pos)
        sign, coef, name = m.groups()
        if not first and not sign:
            raise JobError("expected + or - between terms", line, col + pos)
        if name is None:
            raise JobError("term without a class name", line, col + pos)
        if name not in names:
            raise JobError(f"unknown name {name!r}", line, col + m.start(3))
        c = Fraction(coef) if coef else Fraction(1)
        if sign == "-":
            c = -c
        total = total + c * names[name]
        pos = m.end()
        first = False
    return total


def parse_job(text: str) -> JobSpec:
    """Parse a job file into a fully resolved :class:`JobSpec`."""
    grouped: dict[str, list] = {k: [] for k in SECTIONS}
    for section, key, value, no, kcol, vcol in _split_lines(text):
        grouped[section].append((key, value, no, kcol, vcol))
    if not grouped["surface"]:
        raise JobError("missing [surface] section")
    lattice, builder, exc = _build_surface(grouped["surface"])
    quadratic = lattice.model_tag == "abelian-product"
    names: dict[str, DivisorClass] = {"K": lattice.canonical}
    for i, label in enumerate(lattice.basis_labels):
        names.setdefault(label, lattice.unit(i))
    for c in lattice.curves:
        names.setdefault(c.name, c.cls)
    classes: dict[str, DivisorClass] = {}
    for key, value, no, kcol, vcol in grouped["classes"]:
        if not re.fullmatch(r"[A-Za-z_]\w*", key):
            raise JobError(f"bad class name {key!r}", no, kcol)
        if key in classes:
            raise JobError(f"class {key!r} declared twice", no, kcol)
        looks_numeric = (
            "," in value
            or re.fullmatch(r"[\d/+\-.\s]+", value) is not None
            or (quadratic and "sqrt" in value)
        )
        if looks_numeric:
            v = _vector(value, no, vcol, quadratic)
            if len(v) != lattice.rank:
                raise JobError(
                    f"rank mismatch: class {key} has length {len(v)}, lattice rank is {lattice.rank}", no, vcol
                )
            cls = lattice.cls(v)
        else:
            cls = _combination(value, {**names, **classes}, lattice, no, vcol)
        classes[key] = cls
    command, target, options = "", None, {}
    for key, value, no, kcol, vcol in grouped["job"]:
        if key == "command":
            if value not in COMMANDS:
                raise JobError(f"unknown command {value!r}", no, vcol)
            command = value
        elif key == "class":
            if value not in classes:
                raise JobError(f"unknown class {value!r}", no, vcol)
            target = value
        elif key in ("bound", "instances", "seed"):
            if not re.fullmatch(r"\d+", value):
                raise JobError(f"{key} must be a nonnegative integer", no, vcol)
            options[key] = int(value)
        else:
            raise JobError(f"unknown job key {key!r}", no, kcol)
    exceptional = []
    for name, no, col in exc:
        if not any(c.name == name for c in lattice.curves):
            raise JobError(f"unknown exceptional curve {name!r}", no, col)
        exceptional.append(name)
    return JobSpec(lattice, classes, command, target, options, tuple(exceptional), builder)
