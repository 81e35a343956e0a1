"""JSON system files (schema ``mcs-v1``) and reports (schema ``report-v1``).

A system file is either *explicit*::

    {"schema": "mcs-v1", "kind": "explicit", "alphabet": "ab", "n": 2,
     "kernels": {"a": [["1/2", "1/2"], [0, 1]], "b": ...},
     "initial": ["1", "0"],
     "recognizer": {"accepting": [1], "cut": "1/2", "isolation": "1/10"}}

or *continuous*, describing a :class:`~markovcs.discretize.KernelSpec`::

    {"schema": "mcs-v1", "kind": "continuous", "domain": [0, 1],
     "maps": {"a": {"xs": [0, 1], "ys": [0, 0.25]}}, "sigma": 0.3,
     "boundary": "reflect", "grid_n": 64, "initial": {"point": 0.5},
     "recognizer": {"region": [0.5, 1.0], "cut": 0.5, "isolation": 0.1}}

Numbers may be JSON numbers or strings such as ``"3/7"`` or ``"0.25"``. An
explicit system whose entries all parse to rationals with rows summing to
exactly one also carries exact kernels for the rational oracle. Optional keys:
``name``, ``description``, ``tolerances`` (``stochastic``, ``max_defect``)
and ``seeds`` (``default``).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .discretize import MAX_DEFECT, KernelSpec, RegionRecognizer, build_system, initial_measure
from .errors import MCSError
from .measures import STOCHASTIC_TOL, MarkovOperator, MarkovSystem, SignedMeasure, StateSpace
from .recognition import MCS, Recognizer

SYSTEM_SCHEMA = "mcs-v1"
REPORT_SCHEMA = "report-v1"


class SystemFileError(MCSError, ValueError):
    """A system file is malformed or describes an invalid system."""


def parse_number(value) -> Fraction | float:
    """``"p/q"``, decimal strings and integers become fractions; JSON floats too.

    Floats are read through their shortest decimal form, so ``0.1`` is ``1/10``.
    """
    if isinstance(value, bool):
        raise SystemFileError(f"expected a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise SystemFileError(f"non-finite number {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SystemFileError(f"cannot parse number {value!r}") from exc
    raise SystemFileError(f"expected a number, got {type(value).__name__}")


def format_number(x) -> str | float:
    """Fractions become ``"p/q"`` (or ``"p"``); floats stay JSON numbers."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def _rational_matrix(rows, n: int, what: str) -> list:
    if not isinstance(rows, list) or len(rows) != n:
        raise SystemFileError(f"{what}: expected {n} rows")
    out = []
    for row in rows:
        if not isinstance(row, list) or len(row) != n:
            raise SystemFileError(f"{what}: every row needs {n} entries")
        out.append([parse_number(v) for v in row])
    return out


def _operator(space: StateSpace, rows: list, tol: float) -> MarkovOperator:
    # keep the exact entries only when they define a stochastic kernel exactly
    exact_ok = all(v >= 0 for row in rows for v in row) and all(sum(row) == 1 for row in rows)
    arr = np.array([[float(v) for v in row] for row in rows])
    if exact_ok:
        return MarkovOperator(space, arr, np.array(rows, dtype=object), tol=tol)
    return MarkovOperator(space, arr, tol=tol)


def _initial_explicit(space: StateSpace, raw) -> SignedMeasure:
    if raw is None or raw == "uniform":
        return SignedMeasure.uniform(space)
    if isinstance(raw, dict) and "cell" in raw:
        return SignedMeasure.point_mass(space, int(raw["cell"]))
    if not isinstance(raw, list) or len(raw) != space.n:
        raise SystemFileError(f"initial: expected {space.n} entries")
    vals = [parse_number(v) for v in raw]
    if sum(vals) == 1 and all(v >= 0 for v in vals):
        return SignedMeasure.from_rational(space, vals)
    return SignedMeasure(space, np.array([float(v) for v in vals]))


def _initial_continuous(space: StateSpace, raw) -> SignedMeasure:
    if raw is None or raw == "uniform":
        return initial_measure(space, None)
    if isinstance(raw, dict) and "point" in raw:
        return initial_measure(space, float(parse_number(raw["point"])))
    return _initial_explicit(space, raw)


@dataclass(eq=False)
class SystemFile:
    """A parsed system file: the recognizer system plus the settings that made it."""

    mcs: MCS
    kind: str
    name: str = ""
    description: str = ""
    spec: KernelSpec | None = None
    region: RegionRecognizer | None = None
    initial_raw: object = None
    tolerances: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)

    @property
    def system(self) -> MarkovSystem:
        return self.mcs.system

    @property
    def recognizer(self) -> Recognizer:
        return self.mcs.recognizer

    @property
    def default_seed(self) -> int:
        return int(self.seeds.get("default", 0))


def _recognizer(raw, space: StateSpace, kind: str):
    if not isinstance(raw, dict):
        raise SystemFileError("recognizer: expected an object")
    try:
        cut, iso = parse_number(raw["cut"]), parse_number(raw["isolation"])
    except KeyError as exc:
        raise SystemFileError(f"recognizer: missing key {exc}") from exc
    try:
        if "region" in raw:
            if kind != "continuous":
                raise SystemFileError("recognizer: 'region' needs a continuous system")
            lo, hi = (float(parse_number(v)) for v in raw["region"])
            region = RegionRecognizer((lo, hi), float(cut), float(iso))
            return region, Recognizer(region.on(space).accepting, cut, iso)
        return None, Recognizer(raw["accepting"], cut, iso)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SystemFileError):
            raise
        raise SystemFileError(f"recognizer: {exc}") from exc


def system_from_dict(data: dict) -> SystemFile:
    """Build a :class:`SystemFile` from decoded JSON, validating everything.

    Raises
    ------
    SystemFileError
        On any schema or validation problem; the message names the field.
    """
    if not isinstance(data, dict):
        raise SystemFileError("system file must hold a JSON object")
    if data.get("schema") != SYSTEM_SCHEMA:
        raise SystemFileError(f"schema must be {SYSTEM_SCHEMA!r}, got {data.get('schema')!r}")
    kind = data.get("kind", "explicit")
    tolerances = dict(data.get("tolerances", {}))
    seeds = dict(data.get("seeds", {}))
    tol = float(tolerances.get("stochastic", STOCHASTIC_TOL))
    spec = None
    try:
        if kind == "explicit":
            alphabet = str(data["alphabet"])
            n = int(data["n"])
            if n < 1:
                raise SystemFileError("n must be positive")
            space = StateSpace.of_size(n)
            kernels = data["kernels"]
            if not isinstance(kernels, dict) or set(kernels) != set(alphabet):
                raise SystemFileError("kernels: need exactly one matrix per alphabet symbol")
            ops = {
                a: _operator(space, _rational_matrix(kernels[a], n, f"kernels[{a!r}]"), tol)
                for a in alphabet
            }
            system = MarkovSystem(alphabet, ops, _initial_explicit(space, data.get("initial")))
        elif kind == "continuous":
            maps = {
                str(u): (
                    [float(parse_number(x)) for x in m["xs"]],
                    [float(parse_number(y)) for y in m["ys"]],
                )
                for u, m in data["maps"].items()
            }
            spec = KernelSpec(
                tuple(float(parse_number(v)) for v in data["domain"]),
                maps,
                float(parse_number(data["sigma"])),
                data.get("boundary", "reflect"),
                int(data.get("grid_n", 64)),
                data.get("noise", "gaussian"),
            )
            max_defect = float(tolerances.get("max_defect", MAX_DEFECT))
            system = build_system(spec, max_defect=max_defect)
            space = system.space
            system = MarkovSystem(
                system.alphabet,
                system.operators,
                _initial_continuous(space, data.get("initial")),
                system.metadata,
            )
        else:
            raise SystemFileError(f"kind must be 'explicit' or 'continuous', got {kind!r}")
    except KeyError as exc:
        raise SystemFileError(f"missing key {exc}") from exc
    except SystemFileError:
        raise
    except (ValueError, TypeError) as exc:
        raise SystemFileError(str(exc)) from exc
    region, rec = _recognizer(data.get("recognizer"), system.space, kind)
    try:
        mcs = MCS(system, rec)
    except ValueError as exc:
        raise SystemFileError(str(exc)) from exc
    return SystemFile(
        mcs=mcs,
        kind=kind,
        name=str(data.get("name", "")),
        description=str(data.get("description", "")),
        spec=spec,
        region=region,
        initial_raw=data.get("initial"),
        tolerances=tolerances,
        seeds=seeds,
    )


def _matrix_out(op: MarkovOperator) -> list:
    if op.exact is not None:
        return [[format_number(v) for v in row] for row in op.exact]
    return [[float(v) for v in row] for row in op.kernel]


def system_to_dict(sf: SystemFile) -> dict:
    """Inverse of :func:`system_from_dict`."""
    out: dict = {"schema": SYSTEM_SCHEMA, "kind": sf.kind}
    if sf.name:
        out["name"] = sf.name
    if sf.description:
        out["description"] = sf.description
    T, rec = sf.system, sf.recognizer
    if sf.kind == "explicit":
        out["alphabet"] = T.alphabet
        out["n"] = T.n
        out["kernels"] = {a: _matrix_out(T.operators[a]) for a in T.alphabet}
        init = T.initial
        out["initial"] = (
            [format_number(v) for v in init.exact]
            if init.exact is not None
            else [float(v) for v in init.mass]
        )
    else:
        spec = sf.spec
        out["domain"] = list(spec.domain)
        out["maps"] = {u: {"xs": list(xs), "ys": list(ys)} for u, (xs, ys) in spec.maps.items()}
        out["sigma"] = spec.sigma
        out["boundary"] = spec.boundary
        out["grid_n"] = spec.grid_n
        out["noise"] = spec.noise
        out["initial"] = sf.initial_raw
    r: dict = {"cut": format_number(rec.cut), "isolation": format_number(rec.isolation)}
    if sf.region is not None:
        r["region"] = list(sf.region.region)
    else:
        r["accepting"] = list(rec.accepting)
    out["recognizer"] = r
    if sf.tolerances:
        out["tolerances"] = sf.tolerances
    if sf.seeds:
        out["seeds"] = sf.seeds
    return out


_FLAT_LIST = re.compile(r"\[[^\[\]{}]*\]")


def _flatten_inner_lists(text: str) -> str:
    # one matrix row per line keeps kernels readable
    return _FLAT_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(0)[1:-1].split(",")) + "]"
                          if m.group(0)[1:-1].strip() else "[]", text)


def dumps_system(sf: SystemFile) -> str:
    return _flatten_inner_lists(json.dumps(system_to_dict(sf), indent=2, ensure_ascii=False)) + "\n"


def loads_system(text: str) -> SystemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"invalid JSON: {exc}") from exc
    return system_from_dict(data)


def load_system(path) -> SystemFile:
    """Read a system file; ``bundled:<name>`` loads one of the shipped examples."""
    path = str(path)
    if path.startswith("bundled:"):
        return loads_system(bundled_text(path[len("bundled:"):]))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemFileError(f"cannot read {path}: {exc}") from exc
    return loads_system(text)


def save_system(sf: SystemFile, path):
    Path(path).write_text(dumps_system(sf), encoding="utf-8")


def explicit_file(mcs: MCS, name: str = "", description: str = "", **kw) -> SystemFile:
    """Wrap an in-memory explicit system for serialization."""
    return SystemFile(mcs, "explicit", name, description, **kw)


def continuous_file(spec: KernelSpec, region: RegionRecognizer, initial=None,
                    name: str = "", description: str = "", **kw) -> SystemFile:
    """Build and wrap a discretized system; ``initial`` is ``None`` or ``{"point": x}``."""
    data = {
        "schema": SYSTEM_SCHEMA,
        "kind": "continuous",
        "name": name,
        "description": description,
        "domain": list(spec.domain),
        "maps": {u: {"xs": list(xs), "ys": list(ys)} for u, (xs, ys) in spec.maps.items()},
        "sigma": spec.sigma,
        "boundary": spec.boundary,
        "grid_n": spec.grid_n,
        "initial": initial,
        "recognizer": {"region": list(region.region), "cut": region.cut,
                       "isolation": region.isolation},
        **kw,
    }
    return system_from_dict(data)


def bundled_names() -> list[str]:
    files = resources.files("markovcs").joinpath("data")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def bundled_text(name: str) -> str:
    res = resources.files("markovcs").joinpath("data").joinpath(f"{name}.json")
    if not res.is_file():
        raise SystemFileError(f"no bundled system {name!r}; available: {bundled_names()}")
    return res.read_text(encoding="utf-8")


def load_bundled(name: str) -> SystemFile:
    return loads_system(bundled_text(name))


def systems_equal(a: SystemFile, b: SystemFile) -> bool:
    """Same alphabet, kernels (float and exact), initial distribution and recognizer."""
    Ta, Tb = a.system, b.system
    if Ta.alphabet != Tb.alphabet or Ta.n != Tb.n or a.recognizer != b.recognizer:
        return False
    if not np.array_equal(Ta.kernels, Tb.kernels):
        return False
    if not np.array_equal(Ta.initial.mass, Tb.initial.mass):
        return False
    for x, y in [(Ta.operators[s].exact, Tb.operators[s].exact) for s in Ta.alphabet] + [
        (Ta.initial.exact, Tb.initial.exact)
    ]:
        if (x is None) != (y is None) or (x is not None and not np.array_equal(x, y)):
            return False
    return True


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, Fraction):
        return format_number(x)
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def report_dict(command: str, payload: dict) -> dict:
    return {"schema": REPORT_SCHEMA, "command": command, **_jsonable(payload)}


def dumps_report(command: str, payload: dict) -> str:
    """Deterministic report text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report_dict(command, payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
