"""Command-line entry point: `cpg <subcommand> ...`.

Exit codes: 0 on success, 2 on invalid input, 3 when a verification suite fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction

import numpy as np

from cpg import catalog, exact
from cpg.asymptotic import base_point, check_asymptotic_cone, flow, foliation_chart
from cpg.classification import classify, verify_witness
from cpg.domains import ConvexDomain, DomainError, domain_from_json
from cpg.hilbert import HilbertError, OrbitMetricQuery, hilbert_distance, orbit_distance
from cpg.limits import affine_kernel_check, analyze_limit, domain_sequence_limit
from cpg.projective import ProjectiveError
from cpg.suites import SUITES, run_suite

EXIT_OK, EXIT_INVALID, EXIT_SUITE = 0, 2, 3


class InputError(ValueError):
    pass


INPUT_ERRORS = (InputError, DomainError, HilbertError, ProjectiveError)


# ---------------------------------------------------------------------------
# input


def _load_json(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"malformed JSON in {path} at line {err.lineno}, column {err.colno}: {err.msg}") from None


def _domain_arg(spec) -> ConvexDomain:
    """A catalog name or an inline domain object."""
    if isinstance(spec, str):
        return catalog.get(spec).domain
    return domain_from_json(spec)


def _domain(args) -> tuple[str, ConvexDomain]:
    if args.catalog and args.domain:
        raise InputError("give either --catalog or a domain file, not both")
    if args.catalog:
        return args.catalog, catalog.get(args.catalog).domain
    if args.domain:
        return args.domain, domain_from_json(_load_json(args.domain))
    raise InputError("a domain is required: --catalog NAME or a domain JSON file")


def _vector(text: str, n: int, what: str) -> np.ndarray:
    try:
        v = np.array([float(Fraction(t.strip())) for t in text.split(",")])
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if v.size != n:
        raise InputError(f"{what}: expected {n} coordinates, got {v.size}")
    return v


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _numbers(values, what: str) -> np.ndarray:
    try:
        return np.array([float(exact.to_fraction(v)) for v in values], dtype=float)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InputError(f"{what}: expected a list of numbers") from None


def _matrix(rows, what: str) -> np.ndarray:
    try:
        M = np.array([[float(exact.to_fraction(v)) for v in r] for r in rows], dtype=float)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InputError(f"{what}: expected a matrix of numbers") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"{what}: expected a square matrix")
    return M


# ---------------------------------------------------------------------------
# output


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        rows = []
        for k in sorted(obj):
            rows += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return rows
    if isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        rows = []
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}[{i}]")
        return rows
    return [(prefix, json.dumps(obj) if isinstance(obj, (list, dict)) else str(obj))]


def emit(obj, fmt: str, out=None) -> None:
    out = out or sys.stdout
    obj = _plain(obj)
    if fmt == "json":
        out.write(json.dumps(obj, sort_keys=True) + "\n")
        return
    if isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        cols = sorted({k for v in obj for k in v})
        table = [cols] + [[str(v.get(c, "")) for c in cols] for v in obj]
    else:
        table = [list(r) for r in _flatten(obj)]
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))] if table else []
    for r in table:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _write_csv(path: str, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as err:
        raise InputError(f"cannot write {path}: {err.strerror}") from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> tuple[dict, int]:
    name, D = _domain(args)
    res = classify(D, witness=args.witness or args.verify)
    out = {"domain": name, **res.to_json(with_witness=args.witness)}
    if args.verify and res.witness is not None:
        out["witness_check"] = verify_witness(D, res, args.samples or 1000, args.seed).to_json()
    return out, EXIT_OK


def cmd_hilbert(args) -> tuple[dict, int]:
    name, D = _domain(args)
    p = _vector(args.p, D.n, "--p")
    q = _vector(args.q, D.n, "--q")
    if args.generators is None:
        return {"domain": name, "p": p, "q": q, "distance": hilbert_distance(D, p, q)}, EXIT_OK
    spec = _load_json(args.generators)
    if not isinstance(spec, dict) or "generators" not in spec:
        raise InputError("generator file must be an object with a 'generators' list")
    mats = [_matrix(M, f"generator {i + 1}") for i, M in enumerate(spec["generators"])]
    query = OrbitMetricQuery(mats, args.radius, p, q, spec.get("names"))
    res = orbit_distance(query, D, args.seed)
    return {"domain": name, "p": p, "q": q, "distance": hilbert_distance(D, p, q), "orbit": res.to_json(), "seed": args.seed}, EXIT_OK


def cmd_cone(args) -> tuple[dict, int]:
    name, D = _domain(args)
    cone = D.asymptotic_cone()
    L = D.lineality()
    out = {
        "domain": name,
        "cone": cone.to_json(),
        "dim": int(cone.span_basis().shape[0]),
        "lineality_dim": int(L.shape[0]),
        "lineality": L,
        "pointed": bool(cone.pointed),
    }
    if args.check:
        rep = check_asymptotic_cone(D, args.samples or 200, args.samples or 200, args.seed)
        out["check"] = rep.to_json()
        out["seed"] = args.seed
        return out, EXIT_OK if rep.passed else EXIT_SUITE
    return out, EXIT_OK


def cmd_flow(args) -> tuple[dict, int]:
    name, D = _domain(args)
    chart = foliation_chart(D)
    x = _vector(args.point, D.n, "--point")
    times = _floats(args.times, "--times")
    s = base_point(chart, x)
    points = [flow(chart, x, t) for t in times]
    if args.trace:
        _write_csv(args.trace, ["t"] + [f"x{i + 1}" for i in range(D.n)], [[t, *p] for t, p in zip(times, points)])
    return {
        "domain": name,
        "point": x,
        "base_point": s,
        "strategy": chart.apex_solver,
        "flow": [{"t": t, "point": p} for t, p in zip(times, points)],
    }, EXIT_OK


def _sequence(spec: dict, n: int):
    """(sequence, default step count) from a JSON sequence spec."""
    kind = spec.get("kind")
    if kind == "diag-powers":
        if "exponents" in spec:
            a = _numbers(spec["exponents"], "exponents")
            signs = np.ones_like(a)
        elif "base" in spec:
            b = _numbers(spec["base"], "base")
            if np.any(b == 0):
                raise InputError("diag-powers: base entries must be nonzero")
            a, signs = np.log(np.abs(b)), np.sign(b)
        else:
            raise InputError("diag-powers needs 'base' or 'exponents'")
        if a.size == n:
            a, signs = np.append(a, 0.0), np.append(signs, 1.0)
        if a.size != n + 1:
            raise InputError(f"diag-powers: expected {n} or {n + 1} entries, got {a.size}")
        # the overall scale e^{-k max a} does not change the projective map
        return (lambda k: np.diag(signs**k * np.exp(k * (a - a.max())))), 60
    if kind == "matrix-power":
        M = _matrix(spec.get("matrix", []), "matrix-power")
        if M.shape[0] != n + 1:
            raise InputError(f"matrix-power: expected a {n + 1}x{n + 1} matrix")
        scale = abs(np.linalg.det(M)) ** (1.0 / M.shape[0])
        if scale == 0:
            raise InputError("matrix-power: matrix is singular")

        def powers():
            P = np.eye(n + 1)
            while True:
                P = P @ (M / scale)
                yield P

        return powers(), 60
    if kind == "explicit-list":
        mats = [_matrix(m, f"matrices[{i}]") for i, m in enumerate(spec.get("matrices", []))]
        if not mats:
            raise InputError("explicit-list: 'matrices' must be a nonempty list")
        if any(m.shape[0] != n + 1 for m in mats):
            raise InputError(f"explicit-list: every matrix must be {n + 1}x{n + 1}")
        return mats, len(mats)
    raise InputError(f"unknown sequence kind {kind!r}; expected diag-powers, matrix-power or explicit-list")


def cmd_limit(args) -> tuple[dict, int]:
    spec = _load_json(args.spec)
    if not isinstance(spec, dict) or "domain" not in spec or "sequence" not in spec:
        raise InputError("experiment spec must be an object with 'domain' and 'sequence'")
    D = _domain_arg(spec["domain"])
    seq, default_steps = _sequence(spec["sequence"], D.n)
    steps = int(spec.get("steps", default_steps))
    probes = int(spec.get("probes", 1000))
    mats = [M for _, M in zip(range(steps), seq)] if not callable(seq) else [seq(k) for k in range(1, steps + 1)]
    rep = analyze_limit(D, mats, steps=steps, probes=probes, seed=args.seed)
    out = {"seed": args.seed, "probes": probes, "report": rep.to_json()}
    if all(np.all(M[-1, :-1] == 0) and M[-1, -1] != 0 for M in mats):
        out["kernel_check"] = affine_kernel_check(mats, steps).to_json()
    if args.domain_limit:
        lim = domain_sequence_limit(D, mats, steps=steps)
        out["domain_limit"] = lim.to_json()
    if args.trace:
        rows = []
        for i, t in enumerate(rep.orbit_trace):
            rows += [[i, k, *t.probe, d] for k, d in enumerate(t.distances, start=1)]
        _write_csv(args.trace, ["probe", "k"] + [f"x{j + 1}" for j in range(D.n)] + ["distance"], rows)
    return out, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    if args.catalog:
        catalog.get(args.catalog)
    res = run_suite(args.suite, seed=args.seed, samples=args.samples, only=args.catalog)
    print(res.line(), file=sys.stderr)
    return res.to_json(), EXIT_OK if res.passed else EXIT_SUITE


def cmd_catalog(args) -> tuple[object, int]:
    if args.name:
        e = catalog.get(args.name)
        return {
            "name": e.name,
            "dimension": e.domain.n,
            "expected_class": e.expected_class.value,
            "provenance": e.provenance,
            "quasi_homogeneous": e.quasi_homogeneous,
            "domain": e.domain.to_json(),
        }, EXIT_OK
    rows = []
    for nm in catalog.names():
        e = catalog.get(nm)
        rows.append({"name": nm, "dimension": e.domain.n, "expected_class": e.expected_class.value, "provenance": e.provenance})
    return rows, EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_domain(p: argparse.ArgumentParser) -> None:
    p.add_argument("domain", nargs="?", help="domain JSON file")
    p.add_argument("--catalog", metavar="NAME", help="use a named catalog domain")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "table"], default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for all sampling (default 0)")

    ap = argparse.ArgumentParser(prog="cpg", description="Convex projective geometry computations.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="canonical form of a domain of dimension 2-4")
    _add_domain(p)
    p.add_argument("--witness", action="store_true", help="emit the affine map to the canonical form")
    p.add_argument("--verify", action="store_true", help="check the witness by two-sided membership")
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("hilbert-dist", parents=[common], help="Hilbert distance, optionally minimized over an orbit")
    _add_domain(p)
    p.add_argument("--p", required=True, help="comma-separated point")
    p.add_argument("--q", required=True, help="comma-separated point")
    p.add_argument("--generators", metavar="FILE", help='JSON {"generators": [matrices], "names": [...]}')
    p.add_argument("--radius", type=int, default=2, help="word length bound for the orbit search")
    p.set_defaults(run=cmd_hilbert)

    p = sub.add_parser("asymptotic-cone", parents=[common], help="asymptotic cone and lineality space")
    _add_domain(p)
    p.add_argument("--check", action="store_true", help="run the definitional sampling check")
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(run=cmd_cone)

    p = sub.add_parser("flow", parents=[common], help="base point s(x) and the flow c_t(x)")
    _add_domain(p)
    p.add_argument("--point", required=True, help="comma-separated interior point")
    p.add_argument("--times", default="0,0.5,1,2", help="comma-separated flow times")
    p.add_argument("--trace", metavar="CSV", help="write the flowed points as CSV")
    p.set_defaults(run=cmd_flow)

    p = sub.add_parser("limit-analyze", parents=[common], help="singular limit of a sequence of automorphisms")
    p.add_argument("spec", help='JSON {"domain", "sequence": {"kind", ...}, "steps", "probes"}')
    p.add_argument("--domain-limit", action="store_true", help="also rasterize the images g_k(D)")
    p.add_argument("--trace", metavar="CSV", help="write probe orbit distances as CSV")
    p.set_defaults(run=cmd_limit)

    p = sub.add_parser("verify", parents=[common], help="run a seeded property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--catalog", metavar="NAME", help="restrict the suite to one catalog domain")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("catalog", parents=[common], help="list the named domains")
    p.add_argument("name", nargs="?")
    p.set_defaults(run=cmd_catalog)
    return ap


def run(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code == 0 else EXIT_INVALID
    try:
        result, code = args.run(args)
    except INPUT_ERRORS as err:
        print(json.dumps({"error": str(err)}, sort_keys=True), file=sys.stderr)
        return EXIT_INVALID
    emit(result, args.format, out)
    return code


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
