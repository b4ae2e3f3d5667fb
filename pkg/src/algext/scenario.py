"""Scenario files: a space, named elements and polynomials, and a task list.

Expressions are parsed with :mod:`ast` and evaluated over a whitelist:
numbers, ``+ - * / **``, unary minus, ``exp``, the constants ``pi``, ``e``
and ``i``, the coordinate symbols ``z`` (complex), ``x``/``t`` (real part),
``y`` (imaginary part) and ``theta`` (argument), and earlier element names.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import operator
import pathlib
from dataclasses import dataclass, field

import numpy as np

from . import averaging, cole, density, fibration, logext
from .arens_hoffman import AHElement, AHExtension, ah_invert, ah_mul, ah_norm
from .core import CharacterSpace, Element, spectrum
from .errors import AlgextError, ParseError, TaskFailure
from .poly import MonicPoly, resultant_array

SCHEMA_VERSION = "v1"
MAX_POINTS = 100_000

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"exp": np.exp}
_CONSTS = {"pi": np.pi, "e": np.e, "i": 1j}


def coordinate_symbols(space):
    if space.coords is None:
        return {}
    z = space.complex_coords()
    return {"z": z, "x": z.real, "t": z.real, "y": z.imag, "theta": np.angle(z)}


def evaluate_expression(text, space, names=None):
    """Evaluate an expression string to one complex value per point."""
    env = dict(_CONSTS)
    env.update(coordinate_symbols(space))
    for k, v in (names or {}).items():
        env[k] = v.values if isinstance(v, Element) else v
    if isinstance(text, (int, float)):
        return np.full(len(space), complex(text))
    if not isinstance(text, str):
        raise ParseError(f"expression must be a string, got {type(text).__name__}")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ParseError(f"unknown symbol {node.id!r} in {text!r}")
            return env[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ParseError(f"unsupported syntax in {text!r}")

    with np.errstate(all="raise"):
        try:
            val = ev(tree)
        except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
            raise ParseError(f"{text!r} does not evaluate to finite values") from exc
    out = np.broadcast_to(np.asarray(val, dtype=complex), (len(space),)).copy()
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{text!r} has non-finite values")
    return out


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where} must be an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ParseError(f"unknown keys in {where}: {sorted(extra)}")


def build_space(spec):
    _check_keys(spec, {"kind", "n", "lo", "hi", "radius", "nx", "ny", "xlim", "ylim",
                       "points", "coords", "coord_kind", "adjacency"}, "space")
    kind = spec.get("kind")
    try:
        if kind == "interval":
            space = CharacterSpace.interval(int(spec["n"]), spec.get("lo", 0.0), spec.get("hi", 1.0))
        elif kind == "circle":
            space = CharacterSpace.circle(int(spec["n"]), spec.get("radius", 1.0))
        elif kind == "plane-grid":
            space = CharacterSpace.plane_grid(
                int(spec["nx"]), int(spec["ny"]),
                tuple(spec.get("xlim", (-1, 1))), tuple(spec.get("ylim", (-1, 1))),
            )
        elif kind == "explicit":
            space = CharacterSpace.from_json(spec)
        else:
            raise ParseError(f"unknown space kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad space spec: {exc}") from exc
    if len(space) > MAX_POINTS:
        raise ParseError(f"space has more than {MAX_POINTS} points")
    return space


def parse_element(spec, space, names):
    if isinstance(spec, dict):
        _check_keys(spec, {"values"}, "element")
        vals = spec["values"]
        try:
            arr = np.array([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in vals])
        except (TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"bad value table: {exc}") from exc
        if len(arr) != len(space):
            raise ParseError("value table length does not match the space")
        return Element(space, arr)
    return Element(space, evaluate_expression(spec, space, names))


def parse_poly(spec, space, names):
    if isinstance(spec, list):
        spec = {"coeffs": spec}
    _check_keys(spec, {"coeffs", "roots"}, "polynomial")
    if ("coeffs" in spec) == ("roots" in spec):
        raise ParseError("a polynomial needs exactly one of 'coeffs' or 'roots'")
    try:
        if "roots" in spec:
            return MonicPoly.from_roots([parse_element(r, space, names) for r in spec["roots"]])
        return MonicPoly([parse_element(c, space, names) for c in spec["coeffs"]])
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


@dataclass
class Scenario:
    space: CharacterSpace
    elements: dict
    polys: dict
    tasks: list
    seed: int = 0
    raw: dict = field(default_factory=dict)


def parse_scenario(data):
    _check_keys(data, {"space", "elements", "polys", "tasks", "seed"}, "scenario")
    if "space" not in data:
        raise ParseError("scenario needs a 'space'")
    space = build_space(data["space"])
    elements = {}
    for name, spec in (data.get("elements") or {}).items():
        if not name.isidentifier():
            raise ParseError(f"bad element name {name!r}")
        elements[name] = parse_element(spec, space, elements)
    polys = {}
    for name, spec in (data.get("polys") or {}).items():
        polys[name] = parse_poly(spec, space, elements)
    tasks = data.get("tasks") or []
    if not isinstance(tasks, list):
        raise ParseError("'tasks' must be a list")
    for k, t in enumerate(tasks):
        if not isinstance(t, dict) or t.get("op") not in TASKS:
            raise ParseError(f"task {k} has an unknown op {t.get('op') if isinstance(t, dict) else t!r}")
        _check_keys(t, TASKS[t["op"]][1] | {"op", "expect"}, f"task {k}")
    return Scenario(space, elements, polys, tasks, int(data.get("seed", 0)), data)


def load_scenario(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(data)


# -- artifacts -------------------------------------------------------------------


def _num(x):
    x = float(x)
    if not np.isfinite(x):
        raise TaskFailure("non-finite number in output")
    return format(x, ".17g")


def csv_text(schema, header, rows):
    buf = io.StringIO()
    buf.write(f"# schema: {schema}/{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not np.isfinite(obj):
            raise TaskFailure("non-finite number in output")
        return float(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def json_text(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class TaskResult:
    kind: str  # "csv" or "json"
    text: str
    summary: dict


# -- tasks -------------------------------------------------------------------------


def _element(sc, ref):
    if isinstance(ref, str) and ref in sc.elements:
        return sc.elements[ref]
    return parse_element(ref, sc.space, sc.elements)


def _poly(sc, ref):
    if isinstance(ref, str):
        if ref not in sc.polys:
            raise ParseError(f"unknown polynomial {ref!r}")
        return sc.polys[ref]
    return parse_poly(ref, sc.space, sc.elements)


def _ext(sc, task):
    return AHExtension(_poly(sc, task["poly"]), task.get("t"))


def _ah_element(sc, ext, coeffs):
    coeffs = list(coeffs)
    if len(coeffs) > ext.degree:
        raise ParseError("too many coefficients for the extension degree")
    zero = Element.const(sc.space, 0)
    vals = [_element(sc, c) for c in coeffs] + [zero] * (ext.degree - len(coeffs))
    return AHElement(ext, vals)


def task_extend(sc, task):
    kind = task.get("kind")
    if kind == "ah":
        ext = _ext(sc, task)
        x = ext.xbar()
        summary = {"degree": ext.degree, "t": ext.t, "xbar_norm": ah_norm(x)}
        if ext.degree > 1 and min(abs(resultant_array(ext.alpha.array, x.array))) > 0:
            inv = ah_invert(x)
            summary["xbar_inverse_residual"] = ah_norm(ah_mul(x, inv) - 1)
        return TaskResult("json", json_text(summary), summary)
    if kind == "cole":
        polys = [_poly(sc, p) for p in task["polys"]]
        space = cole.build_cole(sc.space, polys)
        rows = []
        for cid, lam, mult in space.collapsed_rows():
            row = [cid]
            for v in lam:
                row += [float(v.real), float(v.imag)]
            rows.append(row + [mult])
        header = ["character"] + [f"{p}{j}" for j in range(len(polys)) for p in ("re", "im")]
        summary = {"points": len(space), "distinct": len(rows)}
        if "f" in task:
            # sup distance from f to the subalgebra spanned by the basis, before and after
            f = _element(sc, task["f"])
            basis = [_element(sc, b) for b in task.get("basis", ["1"])]
            summary["distance_before"] = cole.sup_distance(f, basis)
            summary["distance_after"] = cole.sup_distance(
                space.pullback_values(f), cole.subalgebra_basis(space, basis)
            )
        return TaskResult("csv", csv_text("cole", header + ["multiplicity"], rows), summary)
    if kind == "log":
        a = _element(sc, task["element"])
        fib = logext.build_log_fibration(a, task.get("t"))
        comps = fib.components()
        summary = {"t": fib.t, "points": len(fib), "components": len(comps),
                   "patches": len(fib.choice.patches)}
        header = ["character", "branch", "re", "im", "sheet", "component"]
        return TaskResult("csv", csv_text("log-fibration", header, fib.to_rows()), summary)
    raise ParseError(f"unknown extension kind {kind!r}")


def task_fibration(sc, task):
    fib = fibration.build_fibration(_poly(sc, task["poly"]))
    comps = fib.components()
    summary = {
        "components": len(comps),
        "cyclic": sum(c.cyclic for c in comps),
        "points": fib.point_count(),
        "min_separation": float(min(fibration.root_separation(fib).minimum, 1e300)),
    }
    cyc = [c for c in comps if c.cyclic]
    if cyc:
        summary["coordinate_windings"] = [
            logext.winding_number(fib.coordinate(), j) for j in range(len(fib.as_space().loops))
        ]
    header = ["character", "re", "im", "multiplicity", "sheet", "component"]
    return TaskResult("csv", csv_text("fibration", header, fib.to_rows()), summary)


def task_t_operator(sc, task):
    ext = _ext(sc, task)
    u = _ah_element(sc, ext, task["coeffs"])
    op = averaging.AveragingOperator(ext)
    tv = averaging.T_formula(op, u).values
    fv = averaging.T_fibre_avg(fibration.build_fibration(ext.alpha), u).values
    diff = np.abs(tv - fv)
    tol = task.get("tolerance", 1e-8)
    if np.max(diff) > tol:
        raise TaskFailure(f"t-operator: formula and fibre average differ by {np.max(diff):.3e}")
    rows = [
        [p, float(a.real), float(a.imag), float(b.real), float(b.imag), float(d)]
        for p, a, b, d in zip(sc.space.points, tv, fv, diff)
    ]
    header = ["character", "T_re", "T_im", "avg_re", "avg_im", "abs_diff"]
    summary = {"max_diff": float(np.max(diff)), "condition_ok": op.condition_ok}
    return TaskResult("csv", csv_text("t-operator", header, rows), summary)


def task_approx_invert(sc, task):
    ext = _ext(sc, task)
    u = _ah_element(sc, ext, task["coeffs"])
    eps = float(task.get("epsilon", 1e-3))
    strategy = task.get("strategy", "direct")
    if strategy == "direct":
        v, trace = density.approx_invertible_direct(u, eps), None
    elif strategy == "chain":
        v, trace = density.approx_invertible_chain(
            u, eps, int(task.get("retries", 32)), int(task.get("seed", sc.seed))
        )
    else:
        raise ParseError(f"unknown strategy {strategy!r}")
    res = resultant_array(ext.alpha.array, v.array)
    summary = {
        "strategy": strategy,
        "epsilon": eps,
        "distance": ah_norm(v - u),
        "min_resultant": float(np.min(np.abs(res))),
    }
    if summary["min_resultant"] <= density.resultant_margin(u):
        raise TaskFailure("approx-invert: resultant is not invertible")
    body = dict(summary)
    body["b0"] = v.coeffs[0].to_json()
    if trace is not None:
        body["trace"] = trace.to_json()
    return TaskResult("json", json_text(body), summary)


def task_log_descent(sc, task):
    ext = _ext(sc, task)
    f = _element(sc, task["f"])
    h = _ah_element(sc, ext, task["h"])
    out = logext.log_descent(f, h)
    rows = [
        [p, float(g.real), float(g.imag), int(c)]
        for p, g, c in zip(sc.space.points, out.log.values, out.classes)
    ]
    summary = {"residual": out.residual}
    header = ["character", "log_re", "log_im", "class"]
    return TaskResult("csv", csv_text("log-descent", header, rows), summary)


def task_winding(sc, task):
    e = _element(sc, task["element"])
    ws = logext.windings(e)
    rows = [[f"loop{j}", w] for j, w in enumerate(ws)]
    summary = {"windings": ws}
    return TaskResult("csv", csv_text("winding", ["loop", "winding"], rows), summary)


def task_tower(sc, task):
    tests = [_element(sc, e) for e in task["test"]] if "test" in task else None
    _, report = logext.log_tower(
        sc.space, int(task.get("rounds", 1)), int(task.get("samples", 8)), tests,
        int(task.get("seed", sc.seed)),
    )
    summary = {"coverage": [r["coverage"] for r in report]}
    return TaskResult("json", json_text({"rounds": report}), summary)


def task_region(sc, task):
    arcs = logext.example_5323_region(
        float(task.get("t", 2 * np.pi)),
        tuple(task.get("arc", (-np.pi / 2, np.pi / 2))),
        complex(*task.get("center", (0.0, 2 * np.pi))),
        float(task.get("radius", np.pi / 4)),
    )
    body = [{"lo": a.lo, "hi": a.hi, "lo_closed": a.lo_closed, "hi_closed": a.hi_closed} for a in arcs]
    summary = {"arcs": len(arcs)}
    return TaskResult("json", json_text({"arcs": body}), summary)


def task_report(sc, task):
    names = task.get("elements", sorted(sc.elements))
    body = {"space": {"points": len(sc.space), "edges": len(sc.space.edges), "loops": len(sc.space.loops)}}
    el = {}
    for name in names:
        e = _element(sc, name)
        el[name] = {"norm": e.norm(), "spectrum_size": len(spectrum(e)),
                    "min_modulus": float(np.min(np.abs(e.values)))}
    body["elements"] = el
    body["polys"] = {name: {"degree": p.degree, "norms": list(p.norms())} for name, p in sorted(sc.polys.items())}
    return TaskResult("json", json_text(body), {"elements": len(el)})


TASKS = {
    "extend": (task_extend, {"kind", "poly", "polys", "t", "element", "f", "basis"}),
    "fibration": (task_fibration, {"poly"}),
    "t-operator": (task_t_operator, {"poly", "t", "coeffs", "tolerance"}),
    "approx-invert": (task_approx_invert, {"poly", "t", "coeffs", "epsilon", "strategy", "retries", "seed"}),
    "log-descent": (task_log_descent, {"poly", "t", "f", "h"}),
    "winding": (task_winding, {"element"}),
    "tower": (task_tower, {"rounds", "samples", "test", "seed"}),
    "region-5323": (task_region, {"t", "arc", "center", "radius"}),
    "report": (task_report, {"elements"}),
}


def _check_expect(op, summary, expect):
    for key, want in (expect or {}).items():
        if key not in summary:
            raise TaskFailure(f"{op}: expected key {key!r} is not reported")
        got = _clean(summary[key])
        if isinstance(want, float) or isinstance(got, float):
            ok = abs(float(got) - float(want)) <= 1e-9 * max(1.0, abs(float(want)))
        else:
            ok = got == want
        if not ok:
            raise TaskFailure(f"{op}: expected {key} = {want!r}, got {got!r}")


def run_task(sc, task):
    fn, _ = TASKS[task["op"]]
    try:
        result = fn(sc, task)
    except (TaskFailure, ParseError):
        raise
    except (AlgextError, AssertionError, KeyError, ValueError) as exc:
        raise TaskFailure(f"{task['op']}: {type(exc).__name__}: {exc}") from exc
    _check_expect(task["op"], result.summary, task.get("expect"))
    return result


def run_scenario(sc, out_dir=None):
    """Run every task in order; return ``(manifest, {filename: text})``."""
    files = {}
    entries = []
    for k, task in enumerate(sc.tasks):
        result = run_task(sc, task)
        name = f"{k:02d}-{task['op']}.{result.kind}"
        files[name] = result.text
        entries.append({"index": k, "op": task["op"], "artifact": name, "summary": result.summary})
    manifest = {"seed": sc.seed, "points": len(sc.space), "tasks": entries}
    if out_dir is not None and sc.tasks:
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
        (out / "manifest.json").write_text(json_text(manifest))
    return manifest, files
