"""Batch front end: problem documents in, deterministic reports and CSV tables out."""

import argparse
import ast
import copy
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .angles import angle_report, radius_bounds
from .approx import ApproxMap, ApproxMethod
from .chebgeo import (EMPTY, PolytopeSet, build_Kw, chebyshev_center_radius, diameter,
                      restricted_radius)
from .errors import (NoAdmissibleError, PreconditionError, RecovError, SolverError,
                     StandingAssumptionError, StructuralError)
from .lift import LiftKind, dual_basis_lifting, make_lifting
from .measure import apply, design_net_measurements, make_measurements
from .moduli import diameter_sandwich_check, gamma_of_Kw
from .recover import RecoveryProblem, certify, default_pipeline, recover, recover_into_V
from .samplab import fourier_schedule, l1_totality_demo, nested_family, point_schedule, sweep
from .spaces import Space, Subspace, make_subspace_presets, parse_norm_kind

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3
SIG = 12


# ---------------------------------------------------------------- expressions

_FUNCS = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
          "sqrt": np.sqrt, "abs": np.abs, "sign": np.sign, "tanh": np.tanh,
          "arctan": np.arctan, "minimum": np.minimum, "maximum": np.maximum}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}
_UNOPS = {ast.USub: np.negative, ast.UAdd: np.positive}


def evaluate(expr, t):
    """Evaluate a whitelisted arithmetic expression in the variable t."""
    try:
        tree = ast.parse(str(expr), mode="eval")
    except SyntaxError as exc:
        raise StructuralError(f"cannot parse expression {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id == "t":
                return t
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise StructuralError(f"unknown name {node.id!r} in expression")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise StructuralError(f"expression element {type(node).__name__} is not allowed")

    with np.errstate(all="ignore"):
        val = ev(tree)
    val = np.broadcast_to(np.asarray(val, dtype=float), np.shape(t)).copy()
    if not np.all(np.isfinite(val)):
        raise StructuralError(f"expression {expr!r} is not finite on the grid")
    return val


def _number(x):
    if isinstance(x, str):
        return float(evaluate(x, np.zeros(1))[0])
    return float(x)


# ---------------------------------------------------------------- documents

def _schema():
    with resources.files("recov").joinpath("schema/problem.schema.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


_TASK_KEYS = {
    "RECOVER": {"w", "f", "into_V"},
    "MU": set(),
    "GEOMETRY": {"vertices", "norm", "w", "eps"},
    "SWEEP": {"family", "nmax", "preset", "C", "param", "schedule", "f"},
    "SANDWICH": {"ws", "random", "spread"},
    "DESIGN": {"delta", "max_size"},
    "TOTALITY": {"a", "m", "N_trunc", "literal"},
}


@dataclass
class ProblemDocument:
    space: dict
    tasks: list
    name: str = "problem"
    seed: int = 0
    eps: float = None
    subspace: dict = None
    measurement: dict = None
    algorithm: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        jsonschema.validate(d, _schema())
        for i, task in enumerate(d["tasks"]):
            extra = set(task) - {"type"} - _TASK_KEYS[task["type"]]
            if extra:
                raise StructuralError(f"task {i} ({task['type']}) has unknown keys {sorted(extra)}")
        d = copy.deepcopy(d)
        return cls(space=d["space"], tasks=d["tasks"], name=d.get("name", "problem"),
                   seed=int(d.get("seed", 0)), eps=d.get("eps"), subspace=d.get("subspace"),
                   measurement=d.get("measurement"), algorithm=d.get("algorithm", {}),
                   output=d.get("output", {}))

    def to_dict(self):
        out = {"name": self.name, "seed": self.seed, "space": copy.deepcopy(self.space),
               "tasks": copy.deepcopy(self.tasks), "algorithm": copy.deepcopy(self.algorithm),
               "output": copy.deepcopy(self.output)}
        for key in ("eps", "subspace", "measurement"):
            if getattr(self, key) is not None:
                out[key] = copy.deepcopy(getattr(self, key))
        return out


def load_document(path):
    with open(path, "r", encoding="utf-8") as fh:
        return ProblemDocument.from_dict(json.load(fh))


# ---------------------------------------------------------------- model building

@dataclass
class Model:
    doc: ProblemDocument
    space: Space
    V: Subspace = None
    M: object = None

    def problem(self, eps=None):
        if self.V is None or self.M is None:
            raise StructuralError("this task needs both a subspace and a measurement")
        e = self.doc.eps if eps is None else eps
        return RecoveryProblem(self.V, self.M, eps=e)

    def pipeline(self, P):
        alg = self.doc.algorithm or {}
        Lam, D = default_pipeline(P)
        if "approx" in alg:
            Lam = ApproxMap(P.M, P.V, ApproxMethod(alg["approx"]))
        if "lift" in alg or "lift_mode" in alg:
            kind = LiftKind(alg.get("lift", "DUAL_BASIS"))
            if kind is LiftKind.DUAL_BASIS:
                D = dual_basis_lifting(P.M, mode=alg.get("lift_mode", "auto"))
            else:
                D = make_lifting(P.M, kind)
        return Lam, D

    def function(self, expr):
        return evaluate(expr, self.space.nodes)


def build_model(doc):
    g = doc.space["grid"]
    norm = doc.space["norm"]
    if g["type"] == "sequence":
        space = Space.sequence(int(g["N"]), norm)
    else:
        space = Space.interval(_number(g["a"]), _number(g["b"]), int(g["N"]), norm, g.get("rule", "midpoint"))
    V = None
    if doc.subspace:
        s = doc.subspace
        if "preset" in s:
            V = make_subspace_presets(s["preset"], space)
        elif "basis" in s:
            B = np.asarray(s["basis"], dtype=float)
            if B.shape[0] != space.N and B.shape[1] == space.N:
                B = B.T
            V = Subspace(space, B, s.get("label", "basis"))
        elif "functions" in s:
            B = np.column_stack([evaluate(f, space.nodes) for f in s["functions"]])
            V = Subspace(space, B, s.get("label", "functions"))
        else:
            raise StructuralError("subspace needs a preset, a basis or functions")
    M = None
    if doc.measurement:
        M = make_measurements(doc.measurement["kind"], doc.measurement.get("params", {}), space)
    return Model(doc, space, V, M)


# ---------------------------------------------------------------- formatting

def fnum(x):
    """Float rounded to 12 significant digits, or a tag for non-finite values."""
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return "NAN"
    if math.isinf(x):
        return "INFINITE" if x > 0 else "-INFINITE"
    v = float(f"{x:.{SIG}g}")
    return 0.0 if v == 0.0 else v


def clean(obj):
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (float, int, np.floating, np.integer, np.bool_, bool)) or obj is None:
        return fnum(obj)
    return obj


def csv_text(header, rows):
    def cell(v):
        v = fnum(v)
        if isinstance(v, float):
            return f"{v:.{SIG}g}"
        return str(v)
    lines = [",".join(header)] + [",".join(cell(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def dumps(report):
    return json.dumps(clean(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- tasks

def task_recover(model, task, rng):
    P = model.problem()
    Lam, D = model.pipeline(P)
    f = None
    if "f" in task:
        f = model.function(task["f"])
        w = apply(P.M, f)
    elif "w" in task:
        w = np.asarray(task["w"], dtype=float)
    else:
        raise StructuralError("RECOVER needs 'w' or 'f'")
    rep = recover_into_V(P, w, Lam) if task.get("into_V") else recover(P, w, Lam, D)
    cert = certify(P, rep, f)
    out = rep.to_dict()
    out["certificate"] = [c.to_dict() for c in cert]
    out["coefficients_norm"] = float(np.max(np.abs(rep.v_component.values), initial=0.0))
    x = rep.reconstruction.values
    table = csv_text(["i", "node", "reconstruction", "v_component"],
                     [(i, model.space.nodes[i], x[i], rep.v_component.values[i]) for i in range(x.size)])
    return out, {"recover": table}


def task_mu(model, task, rng):
    P = model.problem()
    rep = angle_report(P.M, P.V)
    out = rep.to_dict()
    if P.eps is not None:
        out["radius_bounds"] = radius_bounds(P.M, P.V, P.eps, mu=rep.mu_N_V).to_dict()
    rows = [("mu_V_N", rep.mu_V_N.value, rep.mu_V_N.lower, rep.mu_V_N.upper),
            ("mu_N_V", rep.mu_N_V.value, rep.mu_N_V.lower, rep.mu_N_V.upper)]
    return out, {"mu": csv_text(["quantity", "value", "lower", "upper"], rows)}


def task_geometry(model, task, rng):
    if "vertices" in task:
        S = PolytopeSet.from_vertices(task["vertices"], task.get("norm", model.doc.space["norm"]))
    else:
        P = model.problem(task.get("eps"))
        S = build_Kw(P, np.asarray(task["w"], dtype=float), task.get("eps"))
    if getattr(S, "status", "OK") == EMPTY:
        return {"status": EMPTY}, {"geometry": csv_text(["diameter", "rad", "rad_C"], [])}
    d = diameter(S)
    b = chebyshev_center_radius(S)
    bc = restricted_radius(S)
    out = {"status": b.status, "diameter": d.value, "rad": b.radius, "rad_C": bc.radius,
           "center": b.center, "restricted_center": bc.center, "tag": d.tag}
    return out, {"geometry": csv_text(["diameter", "rad", "rad_C"], [(d.value, b.radius, bc.radius)])}


def task_sweep(model, task, rng):
    f = model.function(task["f"])
    fam = nested_family(model.space, task.get("family", "TRIG"), int(task["nmax"]),
                        task.get("preset", "PROBE"), float(task.get("C", 1.0)),
                        float(task.get("param", 1.0)), probe=f)
    sch = task.get("schedule", {"kind": "POINT", "ms": [8, 16, 32]})
    if sch["kind"] == "FOURIER":
        schedule = fourier_schedule(model.space, sch.get("Ks", (0, 1, 2, 4, 8, 16, 32)))
    else:
        schedule = point_schedule(model.space, sch["ms"])
    tab = sweep(fam, schedule, f)
    out = {"rows": [r.to_dict() for r in tab.rows], "constant": tab.constant, "converged": tab.converged}
    return out, {"sweep": tab.to_csv()}


def task_sandwich(model, task, rng):
    P = model.problem()
    ws = [np.asarray(w, dtype=float) for w in task.get("ws", [])]
    spread = float(task.get("spread", 0.5))
    for _ in range(int(task.get("random", 0))):
        v = P.V.basis @ rng.standard_normal(P.V.dim)
        g = rng.standard_normal(P.space.N)
        ws.append(apply(P.M, v + spread * P.eps * g / np.linalg.norm(g)))
    rows = []
    for w in ws:
        if gamma_of_Kw(P, w).status != "OK":
            continue
        rows.append(diameter_sandwich_check(P, w).to_dict())
    hdr = ["gamma", "mu", "lower", "oracle", "upper", "pass"]
    out = {"rows": rows, "all_pass": all(r["pass"] for r in rows)}
    return out, {"sandwich": csv_text(hdr, [[r[h] for h in hdr] for r in rows])}


def task_design(model, task, rng):
    if model.V is None:
        raise StructuralError("DESIGN needs a subspace")
    delta = float(task["delta"])
    des = design_net_measurements(model.V, delta, int(task.get("max_size", 4096)), return_design=True)
    rep = angle_report(des.operator, model.V)
    bound = 2.0 / (1.0 - delta)
    out = {"delta": delta, "achieved_delta": des.achieved_delta, "net_size": des.net_size,
           "m": des.operator.m, "indices": des.operator.params["indices"],
           "mu_V_N": rep.mu_V_N.value, "mu_N_V": rep.mu_N_V.value, "bound": bound,
           "within_bound": bool(rep.mu_N_V.value <= bound + 1e-6)}
    return out, {"design": csv_text(["delta", "achieved_delta", "m", "mu_V_N", "mu_N_V", "bound"],
                                    [(delta, des.achieved_delta, des.operator.m, rep.mu_V_N.value,
                                      rep.mu_N_V.value, bound)])}


def task_totality(model, task, rng):
    rows, warns = l1_totality_demo(float(task.get("a", 2.0)), int(task.get("m", 8)),
                                   int(task.get("N_trunc", 64)), bool(task.get("literal", False)))
    data = [(r.m, r.N_trunc, r.dist, r.mu, r.truncation_change) for r in rows]
    hdr = ["m", "N_trunc", "dist", "mu", "truncation_change"]
    out = {"rows": [dict(zip(hdr, d)) for d in data], "warnings": warns}
    return out, {"totality": csv_text(hdr, data)}


TASKS = {"RECOVER": task_recover, "MU": task_mu, "GEOMETRY": task_geometry, "SWEEP": task_sweep,
         "SANDWICH": task_sandwich, "DESIGN": task_design, "TOTALITY": task_totality}


# ---------------------------------------------------------------- run

@dataclass
class RunResult:
    code: int
    report: dict
    tables: dict


def execute(doc, seed=None):
    """Run every task of a document. Returns a RunResult; never raises package errors."""
    seed = doc.seed if seed is None else int(seed)
    report = {"name": doc.name, "seed": seed, "partial": False, "status": "OK", "tasks": []}
    tables = {}
    try:
        model = build_model(doc)
    except StandingAssumptionError as exc:
        return _fail(report, tables, EXIT_INVALID, exc)
    except (StructuralError, PreconditionError, ValueError, KeyError) as exc:
        return _fail(report, tables, EXIT_INVALID, exc)
    report["grid_resolution"] = model.space.resolution
    for i, task in enumerate(doc.tasks):
        rng = np.random.default_rng([seed, i])
        try:
            out, tabs = TASKS[task["type"]](model, task, rng)
        except StandingAssumptionError as exc:
            return _fail(report, tables, EXIT_INVALID, exc, partial=i > 0)
        except (StructuralError, PreconditionError, NoAdmissibleError, KeyError, ValueError) as exc:
            return _fail(report, tables, EXIT_INVALID, exc, partial=i > 0)
        except SolverError as exc:
            return _fail(report, tables, EXIT_SOLVER, exc, partial=True)
        out = dict(out)
        out["type"] = task["type"]
        report["tasks"].append(out)
        for k, v in tabs.items():
            name, j = f"{k}.csv", 2
            while name in tables:
                name, j = f"{k}_{j}.csv", j + 1
            tables[name] = v
    return RunResult(EXIT_OK, report, tables)


def _fail(report, tables, code, exc, partial=False):
    report["status"] = "FAILED"
    report["partial"] = bool(partial or report["tasks"])
    report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
    wit = getattr(exc, "witness", None)
    if wit is not None:
        report["error"]["witness"] = np.asarray(wit, dtype=float)
    return RunResult(code, report, tables)


def write_outputs(result, out_dir, report_name="report.json"):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, report_name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(result.report))
    for name, text in sorted(result.tables.items()):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------- fixtures

def fixture_names():
    d = resources.files("recov").joinpath("fixtures")
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".json"))


def load_fixture(name):
    if name not in fixture_names():
        raise StructuralError(f"unknown fixture {name!r}; available: {', '.join(fixture_names())}")
    with resources.files("recov").joinpath(f"fixtures/{name}.json").open("r", encoding="utf-8") as fh:
        return ProblemDocument.from_dict(json.load(fh))


# ---------------------------------------------------------------- entry point

def _report_failure(result):
    err = result.report.get("error")
    if not err:
        return
    print(f"error: {err['kind']}: {err['message']}", file=sys.stderr)
    if "witness" in err:
        wit = clean(err["witness"])
        print("witness: " + json.dumps(wit), file=sys.stderr)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="recov", description="Optimal recovery toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a problem document")
    p_run.add_argument("document")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None)
    p_fix = sub.add_parser("fixtures", help="built-in fixture library")
    fsub = p_fix.add_subparsers(dest="action", required=True)
    fsub.add_parser("list")
    p_frun = fsub.add_parser("run")
    p_frun.add_argument("name")
    p_frun.add_argument("--out", default=None)
    p_frun.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    if args.command == "fixtures" and args.action == "list":
        for name in fixture_names():
            print(name)
        return EXIT_OK
    try:
        if args.command == "run":
            doc = load_document(args.document)
        else:
            doc = load_fixture(args.name)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read document: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (jsonschema.ValidationError, RecovError, ValueError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"error: invalid document: {msg}", file=sys.stderr)
        return EXIT_INVALID
    result = execute(doc, args.seed)
    out_dir = args.out
    if out_dir is None and args.command == "run":
        out_dir = doc.output.get("dir")
    if out_dir:
        write_outputs(result, out_dir, doc.output.get("report", "report.json"))
    sys.stdout.write(dumps(result.report))
    _report_failure(result)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
