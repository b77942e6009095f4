"""Command-line front end.

Problem files are JSON documents ``{"schema_version": 1, "kind": ...,
"payload": {...}}``.  Rationals are written as integers or ``"p/q"`` strings;
floating-point literals are rejected.  Results are JSON with sorted keys, so
identical inputs give identical bytes.

Exit codes: 0 ok, 1 malformed input, 2 well-formed input outside the domain
of the operation.  Infeasible and impossible outcomes are ok results that
carry their certificates.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import tempfile
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

from . import fixtures
from . import numerics as nx
from .apps import Impossible, RightInverseProblem, min_inverse_constant, right_inverse, right_inverse_through
from .cone import Cone, riesz_interpolate
from .errors import BoundTooSmall, DomainError, InputError
from .polytope import Polytope, affine_dim, concave_envelope_eval, is_simplex
from .selection import (
    FunctionalSet,
    NestingBasis,
    TomoCoords,
    linear_selection_through,
    nesting_selection,
    selection_exists_through,
    tomo_coords,
    tomo_reconstruct,
    tomographic_selection,
)
from .svmap import (
    BasisLinear,
    BooleanRegion,
    PointwiseMap,
    SampledSuperlinear,
    check_superlinear,
    greatest_linear_submap,
    polytope_space,
)

SCHEMA_VERSION = 1
KINDS = ("tomo", "select", "submap", "riesz", "simplex", "envelope", "right-inverse", "nesting")


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


# --- parsing and formatting -----------------------------------------------------


def _reject_float(text):
    raise InputError(f"floating-point literal {text} is not allowed; write rationals as 'p/q'")


def _reject_constant(text):
    raise InputError(f"non-finite literal {text} is not allowed")


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text, parse_float=_reject_float, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError("a problem file must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("kind") not in KINDS:
        raise InputError(f"unknown kind {doc.get('kind')!r}")
    if not isinstance(doc.get("payload"), dict):
        raise InputError("payload must be an object")
    return doc


def load_problem(source: str) -> dict:
    if source.startswith("fixture:"):
        return fixtures.load(source[len("fixture:") :])
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from None
    return parse_document(text)


def fmt(obj):
    """Recursively turn rationals into strings and tuples into lists."""
    if isinstance(obj, Fraction):
        return nx.format_rational(obj)
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, Polytope):
        return fmt(obj.vertices)
    if isinstance(obj, dict):
        return {str(k): fmt(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        items = sorted(obj) if isinstance(obj, (frozenset, set)) else obj
        return [fmt(v) for v in items]
    return str(obj)


def _need(payload: dict, key: str):
    if key not in payload:
        raise InputError(f"payload is missing {key!r}")
    return payload[key]


def _cone(doc: dict) -> tuple[Cone, dict]:
    gens = _need(doc, "generators")
    regions = doc.get("regions")
    if regions is None:
        return Cone(tuple(gens)), {}
    faces = {n: tuple(int(i) for i in f) for n, f in regions.items()}
    return Cone(tuple(gens), faces=tuple(faces.values())), faces


def _basis_linear(doc: dict) -> BasisLinear:
    gens = _need(doc, "generators")
    values = _need(doc, "values")
    return BasisLinear.from_generators([(g, Polytope(v)) for g, v in zip(gens, values, strict=True)])


def _functionals(order, dim: int) -> FunctionalSet:
    return FunctionalSet.coordinates(dim, order)


# --- handlers -------------------------------------------------------------------


def do_tomo(payload: dict, opts) -> dict:
    K = Polytope(_need(payload, "polytope"))
    D = _functionals(opts.functional_order, K.dim)
    if "point" in payload:
        theta = tomo_coords(payload["point"], K, D)
        return {"thetas": theta.thetas, "reconstructed": tomo_reconstruct(K, theta, D)}
    theta = TomoCoords(tuple(_need(payload, "theta")))
    return {"thetas": theta.thetas, "point": tomo_reconstruct(K, theta, D)}


def do_select(payload: dict, opts) -> dict:
    x, y = nx.vector(_need(payload, "x")), nx.vector(_need(payload, "y"))
    probes = [nx.vector(p) for p in payload.get("probes", [])]
    D = _functionals(opts.functional_order, len(y))
    if "segment_map" in payload:
        seg = payload["segment_map"]
        start, direction, offset = (nx.vector(_need(seg, k)) for k in ("start", "direction", "offset"))
        A = PointwiseMap(
            Cone(((1,), (-1,))),
            lambda t: Polytope([start, nx.add(nx.scale(t[0], direction), offset)]),
            polytope_space(len(start)),
        )
        sel = tomographic_selection(A, x, y, D)
        return {"kind": sel.kind, "thetas": sel.thetas.thetas, "probes": [{"z": z, "a": sel(z)} for z in probes]}
    if "samples" in payload:
        T = SampledSuperlinear([(p, Polytope(v)) for p, v in payload["samples"]])
        res = selection_exists_through(T, x, y, depth=opts.depth, seed=opts.seed, D=D)
        out = {"answer": res.answer, "witness": res.witness, "depth": res.depth}
        if res.selection is not None:
            out["table"] = [{"generator": g, "value": v} for g, v in zip(res.selection.domain.generators, res.selection.table)]
        return out
    A = _basis_linear(_need(payload, "map"))
    sel = linear_selection_through(A, x, y, D)
    return {
        "kind": sel.kind,
        "route": sel.route,
        "thetas": sel.thetas.thetas,
        "table": [{"generator": g, "value": v} for g, v in zip(sel.domain.generators, sel.table)],
        "probes": [{"z": z, "a": sel(z)} for z in probes],
    }


def _census(C: Cone, names: dict, trials: int, seed: int) -> dict:
    survivors = []
    order = list(names)
    for bits in itertools.product((0, 1), repeat=len(order)):
        values = dict(zip(order, bits))
        T = BooleanRegion(C, {names[n]: v for n, v in values.items()}, {names[n]: n for n in order})
        if check_superlinear(T, trials, seed):
            survivors.append(values)
    return {"candidates": 2 ** len(order), "survivors": survivors, "count": len(survivors), "trials": trials}


def do_submap(payload: dict, opts) -> dict:
    trials = int(payload.get("trials", 0))
    if "samples" in payload:
        T = SampledSuperlinear([(p, Polytope(v)) for p, v in payload["samples"]])
    else:
        C, names = _cone(_need(payload, "cone"))
        if "census" in payload:
            return _census(C, names, int(payload["census"].get("trials", 10000)), opts.seed)
        values = _need(payload, "values")
        T = BooleanRegion(C, {names[n]: v for n, v in values.items()}, {f: n for n, f in names.items()})
    rep = greatest_linear_submap(T, depth=opts.depth, trials=trials, seed=opts.seed)
    rows = []
    for p in _need(payload, "points"):
        if rep.exact:
            rows.append({"x": nx.vector(p), "value": rep.map.evaluate(p)})
        else:
            value, parts = rep.map.evaluate_with_witness(p)
            rows.append({"x": nx.vector(p), "value": value, "witness": parts})
    return {"exactness": rep.exactness, "points": rows}


def do_riesz(payload: dict, opts) -> dict:
    C, names = _cone(_need(payload, "cone"))
    by_face = {frozenset(f): n for n, f in names.items()}
    res = riesz_interpolate(C, _need(payload, "xs"), _need(payload, "ys"))
    out = {"feasible": res.feasible, "method": res.method, "verified": res.verify()}
    if res.feasible:
        out["grid"] = res.grid
    else:
        out["certificates"] = [
            {
                "assignment": [by_face.get(f, sorted(f)) for f in b.assignment],
                "strict_rows": sorted(b.strict),
                "certificate": b.certificate.as_dict(),
            }
            for b in res.branches
        ]
    return out


def do_simplex(payload: dict, opts) -> dict:
    K = Polytope(_need(payload, "polytope"))
    return {"is_simplex": is_simplex(K), "affine_dim": affine_dim(K), "vertices": K.vertices}


def do_envelope(payload: dict, opts) -> dict:
    K = Polytope(_need(payload, "polytope"))
    given = {nx.vector(v): nx.to_rational(val) for v, val in _need(payload, "vertex_values")}
    if set(given) != set(K.vertices):
        raise InputError("vertex_values must list exactly the vertices of the polytope")
    values = [given[v] for v in K.vertices]

    def env(p):
        return concave_envelope_eval(K, values, p)

    points = [{"x": nx.vector(p), "value": env(p)} for p in payload.get("points", [])]
    checks = []
    for p, q in payload.get("midpoint_pairs", []):
        p, q = nx.vector(p), nx.vector(q)
        mid = nx.scale(Fraction(1, 2), nx.add(p, q))
        value, prediction = env(mid), (env(p) + env(q)) / 2
        checks.append({"p": p, "q": q, "envelope": value, "affine_prediction": prediction, "affine": value == prediction})
    return {"points": points, "midpoint_checks": checks}


def do_right_inverse(payload: dict, opts) -> dict:
    T = _need(payload, "T")
    theta = nx.to_rational(payload.get("theta", 0))
    p = RightInverseProblem(T, _need(payload, "C"), payload.get("z"))
    c_min = min_inverse_constant(p.T)
    res = right_inverse(p, theta) if p.preserve is None else right_inverse_through(p, theta)
    if isinstance(res, Impossible):
        cert = {"kind": res.kind, "z_norm": res.z_norm, "bound": res.bound, "verified": res.verify()}
        if res.certificate is not None:
            cert["certificate"] = res.certificate.as_dict()
        return {"possible": False, "c_min": c_min, "impossible": cert}
    return {"possible": True, "c_min": c_min, "M": res.M, "norm": res.norm}


def do_nesting(payload: dict, opts) -> dict:
    B = NestingBasis.from_leaves(_need(payload, "leaves"))
    T = _basis_linear(_need(payload, "map"))
    sel = nesting_selection(B, T, _need(payload, "y0"), payload.get("split_rule", "leftmost"))
    nodes = [{"node": [n, k], "vector": B.node(n, k), "value": sel.node_value(n, k)} for (n, k) in sorted(sel.values)]
    return {"split_rule": sel.split_rule, "nodes": nodes}


HANDLERS = {
    "tomo": do_tomo,
    "select": do_select,
    "submap": do_submap,
    "riesz": do_riesz,
    "simplex": do_simplex,
    "envelope": do_envelope,
    "right-inverse": do_right_inverse,
    "nesting": do_nesting,
}


# --- driver ---------------------------------------------------------------------


def write_atomic(path: str, text: str) -> None:
    if os.path.exists(path) and not os.path.isfile(path):
        # devices and pipes are written in place, never renamed over
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".linsel-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(doc: dict, output: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _parse_order(text: str | None):
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"--functional-order expects a comma-separated list of integers, got {text!r}") from None


def run(command: str, input_path: str, output_path: str | None = None, seed: int = 0, depth: int = 2, functional_order=None) -> int:
    """Run one problem and write the result document.  Returns the exit code."""
    opts = argparse.Namespace(seed=seed, depth=depth, functional_order=functional_order)
    provenance = {"seed": seed, "depth": depth, "tool_version": tool_version()}
    if functional_order is not None:
        provenance["functional_order"] = list(functional_order)
    try:
        doc = load_problem(input_path)
        kind = doc["kind"]
        if command != "run" and kind != command:
            raise InputError(f"problem kind {kind!r} does not match subcommand {command!r}")
        result = HANDLERS[kind](doc["payload"], opts)
        out, code = {"status": "ok", "kind": kind, "result": fmt(result)}, 0
    except DomainError as exc:
        err = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, BoundTooSmall):
            err["c_min"] = fmt(exc.c_min)
        out, code = {"status": "error", "error": err}, 2
    except (InputError, ValueError, TypeError, KeyError) as exc:
        out, code = {"status": "error", "error": {"type": type(exc).__name__, "message": str(exc)}}, 1
    out["provenance"] = provenance
    _emit(out, output_path)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linsel", description="Exact selections of set-valued maps on polyhedral cones.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + KINDS:
        p = sub.add_parser(name, help="run a problem file of any kind" if name == "run" else f"run a {name} problem")
        p.add_argument("--input", required=True, help="problem file, or fixture:NAME")
        p.add_argument("--output", help="result file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--depth", type=int, default=2)
        p.add_argument("--functional-order", help="comma-separated coordinate order, e.g. 1,0")
    sub.add_parser("fixtures", help="list the bundled fixtures")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "fixtures":
        for item in fixtures.manifest():
            sys.stdout.write(f"{item['name']}\t{item['kind']}\t{item['anchor']}\n")
        return 0
    if args.seed < 0 or args.seed >= 2**64 or args.depth < 0 or args.depth >= 2**32:
        sys.stderr.write("--seed must fit in u64 and --depth in u32\n")
        return 1
    try:
        order = _parse_order(args.functional_order)
    except InputError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    return run(args.command, args.input, args.output, args.seed, args.depth, order)


if __name__ == "__main__":
    sys.exit(main())
