"""Fixture-driven command line front end.

    qtorus <command> [<sub>] --fixture F [--radius R] [--tol T] [--norm N]
                              [--seed S] [--output text|structured]

Flags take precedence over the corresponding fixture fields.  Exit status is
0 when every check passes, 1 when a check fails and 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .algebra import (
    ThetaMatrix,
    TorusElement,
    UnsupportedTheta,
    algebra_invariants,
    random_element,
    random_self_adjoint,
)
from .connection import (
    Derivation,
    InversionError,
    check_axioms,
    christoffel,
    default_axiom_samples,
    invert_metric,
    skew_part,
)
from .geometry import MetricError, ModuleVector, make_metric, random_module_vector
from .gns import GNSConfig, default_radii, norm_interval
from .norms import NormChoice
from .propinquity import (
    BundleContext,
    ModularBridge,
    State,
    bridge_quantities,
    isometry_check,
    normalize_witnesses,
    scaling_bridge,
)
from .seminorms import (
    check_G_inequality,
    check_H_inequality,
    check_leibniz_L,
    check_lemma45,
    d_norm,
    lipschitz_L,
)

COMMANDS = {
    "algebra": ("check",),
    "norm": (),
    "metric": ("validate",),
    "connection": ("compute", "check"),
    "seminorm": ("L", "D"),
    "inequality": ("G", "H", "leibniz", "lemma45"),
    "bridge": ("scaling", "report"),
    "isometry": ("check",),
}


class FixtureError(ValueError):
    """Malformed or inconsistent fixture."""


# -- fixture parsing -------------------------------------------------------------


def _field(d, key, where, kind=None):
    if key not in d:
        raise FixtureError(f"{where}: missing field {key!r}")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise FixtureError(f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    return v


def _parse_entries(entries):
    """Numbers, or ``{"re": .., "im": ..}`` records for complex entries."""
    def num(x):
        if isinstance(x, dict):
            return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
        if isinstance(x, (int, float)):
            return x
        raise ValueError(f"non-numeric entry {x!r}")
    if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
        raise ValueError("entries must be a list of rows")
    return np.array([[num(x) for x in row] for row in entries])


class Fixture:
    """Validated fixture contents plus flag overrides."""

    def __init__(self, raw, args):
        if not isinstance(raw, dict):
            raise FixtureError("fixture must be a JSON object")
        self.raw = raw
        th = _field(raw, "theta", "fixture", dict)
        n = int(_field(th, "n", "theta"))
        entries = th.get("entries", np.zeros((n, n)).tolist())
        try:
            self.theta = ThetaMatrix(_parse_entries(entries))
        except UnsupportedTheta:
            raise
        except ValueError as exc:
            raise FixtureError(f"theta.entries: {exc}") from exc
        if self.theta.n != n:
            raise FixtureError(f"theta.entries is {self.theta.n}x{self.theta.n}, but theta.n = {n}")
        self.norm = NormChoice.parse(args.norm or raw.get("norm", "l2"))
        gns = raw.get("gns", {})
        radii = tuple(gns.get("radii") or default_radii(n))
        if args.radius is not None:
            radii = tuple(r for r in radii if r < args.radius) + (args.radius,)
        seed = args.seed if args.seed is not None else int(gns.get("seed", 0))
        self.config = GNSConfig(radii=radii, tol=float(gns.get("tol", 1e-10)), seed=seed)
        self.config.for_dim(n)
        self.seed = seed
        self.task = raw.get("task", {})
        self.tol_flag = args.tol
        self.inverse = raw.get("inverse", {})
        self._metric = None

    def tol(self, default):
        if self.tol_flag is not None:
            return self.tol_flag
        return float(self.task.get("tol", default))

    def element(self, key, required=True):
        if key not in self.task:
            if required:
                raise FixtureError(f"task: missing element {key!r}")
            return None
        try:
            return TorusElement.from_records(self.theta, self.task[key])
        except ValueError as exc:
            raise FixtureError(f"task.{key}: {exc}") from exc

    def vector(self, key, required=True):
        if key not in self.task:
            if required:
                raise FixtureError(f"task: missing module vector {key!r}")
            return None
        comps = self.task[key]
        if not isinstance(comps, list) or len(comps) != self.theta.n:
            raise FixtureError(f"task.{key}: need {self.theta.n} component lists")
        try:
            return ModuleVector([TorusElement.from_records(self.theta, c) for c in comps])
        except ValueError as exc:
            raise FixtureError(f"task.{key}: {exc}") from exc

    def metric(self):
        if self._metric is None:
            spec = _field(self.raw, "metric", "fixture", dict)
            self._metric = make_metric(self.theta, spec)
        return self._metric

    def connection(self):
        g = self.metric()
        inv = invert_metric(g, self.inverse.get("support_radius"),
                            float(self.inverse.get("tol", 1e-8)))
        return g, inv, christoffel(g, inv)

    def echo(self):
        return {
            "theta": self.theta.to_list(),
            "norm": self.norm.value,
            "metric": self.raw.get("metric"),
            "task": self.task,
        }


# -- command handlers -------------------------------------------------------------


def _check(name, ok, tol=None, method=None, **extra):
    d = {"name": name, "pass": bool(ok)}
    if tol is not None:
        d["tol"] = tol
    if method is not None:
        d["method"] = method
    d.update(extra)
    return d


def cmd_algebra_check(fx):
    count = int(fx.task.get("instances", 100))
    tol = fx.tol(1e-12)
    defects = algebra_invariants(fx.theta, count, fx.seed)
    checks = [_check(k, v <= tol, tol, "exact", defect=v) for k, v in defects.items()]
    return {"instances": count, "defects": defects}, checks


def cmd_norm(fx):
    a = fx.element("element")
    iv = norm_interval(a, fx.config)
    res = {"interval": iv.to_dict(), "method": iv.method}
    checks = [_check("interval", iv.lower <= iv.upper, method=iv.method)]
    if "expect_norm" in fx.task:
        slack = fx.tol(1e-6)
        checks.append(_check("expected", iv.contains(float(fx.task["expect_norm"]), slack), slack, iv.method))
    return res, checks


def cmd_metric_validate(fx):
    try:
        g = fx.metric()
    except MetricError as exc:
        return {"error": str(exc)}, [_check("positivity", False, method="compression")]
    ev = g.evidence
    res = {"kind": g.kind, "evidence": ev.to_dict(), "floor": g.floor, "l1_bound": g.l1_bound()}
    return res, [_check("positivity", ev.plausible, ev.tol, "compression")]


def cmd_connection_compute(fx):
    tol = float(fx.inverse.get("tol", 1e-8))
    g, inv, gamma = fx.connection()
    res = {"inverse": inv.to_dict(), "christoffel": gamma.to_dict()}
    return res, [_check("inverse_residual", inv.eta <= tol, tol, "l1", eta=inv.eta)]


def _axiom_samples(fx, count):
    """Coordinate samples plus random normalised ``(delta, X, Y)``."""
    theta = fx.theta
    rng = np.random.default_rng(fx.seed)
    samples = default_axiom_samples(theta)
    for _ in range(count):
        r = rng.standard_normal(theta.n)
        r /= max(1.0, np.linalg.norm(r))
        b = skew_part(random_element(theta, rng, 1, 2))
        if b.l1() > 0:
            b = b.scale(1.0 / b.l1())
        x = random_module_vector(theta, rng, 1, 2)
        y = random_module_vector(theta, rng, 1, 2)
        nx = sum(c.l1() for c in x)
        ny = sum(c.l1() for c in y)
        samples.append((Derivation(r, b), x.scale(1.0 / nx), y.scale(1.0 / ny)))
    return samples


def cmd_connection_check(fx):
    g, inv, gamma = fx.connection()
    samples = _axiom_samples(fx, int(fx.task.get("samples", 8)))
    rep = check_axioms(g, gamma, samples, fx.config)
    bound = fx.tol(10.0) * inv.eta + 1e-12
    worst = max(c["residual_upper"] for c in rep["compatibility"])
    checks = [
        _check("torsion", rep["torsion_defect"] == 0.0, 0.0, "exact"),
        _check("self_adjoint", rep["self_adjoint_defect"] <= bound, bound, "l1"),
        _check("compatibility", worst <= bound, bound, "l1", worst=worst),
    ]
    return rep, checks


def cmd_seminorm_L(fx):
    a = fx.element("element")
    est = lipschitz_L(a, fx.norm, fx.config)
    checks = [_check("interval", est.lower <= est.upper, method=est.method)]
    if "expect_L" in fx.task:
        slack = fx.tol(1e-6)
        checks.append(_check("expected", est.interval.contains(float(fx.task["expect_L"]), slack),
                             slack, est.method))
    return {"estimate": est.to_dict()}, checks


def cmd_seminorm_D(fx):
    g, inv, gamma = fx.connection()
    x = fx.vector("X")
    est = d_norm(g, gamma, x, fx.norm, fx.config)
    res = {
        "estimate": est.to_dict(),
        "norm_g": est.parts["norm_g"].to_dict(),
        "S_partial": est.parts["S_partial"].to_dict(),
        "S_ad": est.parts["S_ad"].to_dict(),
        "Dp": est.dp.to_dict(),
        "eta": inv.eta,
    }
    return res, [_check("interval", est.lower <= est.upper, method=est.method)]


def _given(x, fallback):
    return fallback() if x is None else x


def _random_inputs(fx, kind):
    rng = np.random.default_rng(fx.seed)
    theta = fx.theta
    if kind == "element":
        return random_self_adjoint(theta, rng, 1, 3)
    return random_module_vector(theta, rng, 1, 2)


def cmd_inequality(fx, which):
    tol = fx.tol(1e-6)
    if which == "leibniz":
        a = _given(fx.element("a", False), lambda: _random_inputs(fx, "element"))
        b = _given(fx.element("b", False), lambda: random_self_adjoint(fx.theta, np.random.default_rng(fx.seed + 1), 1, 3))
        rep = check_leibniz_L(a, b, fx.norm, fx.config, tol)
        return rep, [_check("leibniz", rep["pass"], tol, "sound")]
    if which == "lemma45":
        a = _given(fx.element("a", False), lambda: _random_inputs(fx, "element"))
        spec = fx.task.get("delta", {"r": [1.0] + [0.0] * (fx.theta.n - 1)})
        b = TorusElement.from_records(fx.theta, spec.get("b", []))
        delta = Derivation(spec.get("r"), b)
        rep = check_lemma45(delta, a, fx.norm, fx.config, tol)
        return rep, [_check("lemma45", rep["pass"], tol, "sound")]
    g, inv, gamma = fx.connection()
    x = _given(fx.vector("X", False), lambda: _random_inputs(fx, "vector"))
    if which == "G":
        a = _given(fx.element("a", False), lambda: _random_inputs(fx, "element"))
        rep = check_G_inequality(g, gamma, a, x, fx.norm, fx.config, tol)
    else:
        y = _given(fx.vector("Y", False), lambda: random_module_vector(fx.theta, np.random.default_rng(fx.seed + 1), 1, 2))
        rep = check_H_inequality(g, gamma, x, y, fx.norm, fx.config, tol)
    rep["eta"] = inv.eta
    return rep, [_check(which, rep["pass"], tol, "sound")]


def _rs(fx, args):
    r = args.r if args.r is not None else float(fx.task.get("r", 2.0))
    s = args.s if args.s is not None else float(fx.task.get("s", 5.0))
    return r, s


def cmd_bridge_scaling(fx, args):
    r, s = _rs(fx, args)
    g = fx.metric()
    anchors = int(fx.task.get("anchors", 32))
    br = scaling_bridge(g, r, s, anchors, fx.seed, fx.norm, fx.config)
    q = bridge_quantities(br, config=fx.config)
    rep = q.to_dict()
    tol = fx.tol(1e-12)
    worst_deck = max((d["upper"] for d in rep["deck"]), default=0.0)
    res = {"r": r, "s": s, "anchors": anchors, "quantities": rep,
           "max_deck": worst_deck, "consistent": q.consistent()}
    checks = [
        _check("deck", worst_deck <= tol, tol, "l1"),
        _check("length", q.length["upper"] <= tol, tol, "assembled"),
        _check("consistency", q.consistent(), method="exact"),
    ]
    return res, checks


def cmd_bridge_report(fx, args):
    """Quantities of a bridge with a fixture-supplied pivot (sampled estimates)."""
    r, s = _rs(fx, args)
    g = fx.metric()
    pivot = fx.element("pivot", False)
    base = BundleContext(g, None, fx.norm, fx.config)
    dom, cod = base.scaled(r), base.scaled(s)
    template = scaling_bridge(g, r, s, int(fx.task.get("anchors", 4)), fx.seed, fx.norm, fx.config)
    if pivot is None:
        pivot = template.pivot
    bridge = ModularBridge(dom, cod, pivot, template.alpha, template.beta, template.evidence,
                           identity_anchor_range=pivot == template.pivot, params=template.params)
    rng = np.random.default_rng(fx.seed)
    count = int(fx.task.get("samples", 4))
    lips = normalize_witnesses([random_self_adjoint(fx.theta, rng, 1, 2) for _ in range(count)],
                               fx.norm, fx.config)
    states = [State.tau(fx.theta.n)] + [State.random(fx.theta.n, rng) for _ in range(count)]
    samples = {
        "elements": [(a, a) for a in lips],
        "lipschitz": (lips, lips),
        "states": states,
        "witnesses": lips,
        "module": (list(template.alpha), list(template.alpha)),
        "module_witnesses": (list(template.alpha), list(template.beta)),
    }
    q = bridge_quantities(bridge, samples, fx.config)
    res = {"r": r, "s": s, "unit_pivot": bridge.unit_pivot, "quantities": q.to_dict()}
    return res, [_check("consistency", q.consistent(), method="exact")]


def cmd_isometry_check(fx, args):
    r, s = _rs(fx, args)
    rep = isometry_check(fx.metric(), r, s, int(fx.task.get("samples", 4)), fx.seed,
                         fx.norm, fx.config)
    tol = fx.tol(1e-12)
    checks = [
        _check("lipschitz", rep["lipschitz_defect"] <= tol, tol, "exact"),
        _check("module_action", rep["action_defect"] <= tol, tol, "exact"),
        _check("inner_product", rep["inner_product_defect"] <= tol, tol, "l1"),
        _check("d_norm", all(d["overlap"] for d in rep["d_norm"]), method="interval-overlap"),
    ]
    return {"r": r, "s": s, **rep}, checks


def dispatch(fx, command, sub, args):
    if command == "algebra":
        return cmd_algebra_check(fx)
    if command == "norm":
        return cmd_norm(fx)
    if command == "metric":
        return cmd_metric_validate(fx)
    if command == "connection":
        return cmd_connection_compute(fx) if sub == "compute" else cmd_connection_check(fx)
    if command == "seminorm":
        return cmd_seminorm_L(fx) if sub == "L" else cmd_seminorm_D(fx)
    if command == "inequality":
        return cmd_inequality(fx, sub)
    if command == "bridge":
        return cmd_bridge_scaling(fx, args) if sub == "scaling" else cmd_bridge_report(fx, args)
    return cmd_isometry_check(fx, args)


# -- output ------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def render_text(report):
    lines = [f"qtorus {report['task']}: {'PASS' if report['pass'] else 'FAIL'}"]
    for c in report["checks"]:
        extra = {k: v for k, v in c.items() if k not in ("name", "pass")}
        tail = " ".join(f"{k}={v}" for k, v in extra.items())
        lines.append(f"  [{'ok' if c['pass'] else 'FAIL'}] {c['name']} {tail}".rstrip())
    for k, v in report["results"].items():
        if isinstance(v, dict) and "lower" in v and "upper" in v:
            lines.append(f"  {k}: [{v['lower']:.12g}, {v['upper']:.12g}]")
        elif isinstance(v, (int, float, str, bool)):
            lines.append(f"  {k}: {v}")
    return "\n".join(lines)


def build_parser():
    p = argparse.ArgumentParser(prog="qtorus", description="Quantum torus geometry checks")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("sub", nargs="?", default=None)
    p.add_argument("--fixture", required=True)
    p.add_argument("--radius", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--norm", choices=["l1", "l2", "linf"])
    p.add_argument("--seed", type=int)
    p.add_argument("--output", choices=["text", "structured"], default="text")
    p.add_argument("--r", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    return p


def run(argv=None):
    """Returns ``(exit_code, report_or_None, message)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    subs = COMMANDS[args.command]
    if subs and args.sub not in subs:
        return 2, None, f"{args.command}: expected one of {', '.join(subs)}"
    if not subs and args.sub is not None:
        return 2, None, f"{args.command} takes no subcommand"
    task = " ".join(x for x in (args.command, args.sub) if x)
    try:
        with open(args.fixture) as fh:
            raw = json.load(fh)
    except OSError as exc:
        return 2, None, f"cannot read fixture: {exc}"
    except json.JSONDecodeError as exc:
        return 2, None, f"fixture parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
    t0 = time.perf_counter()
    try:
        fx = Fixture(raw, args)
        results, checks = dispatch(fx, args.command, args.sub, args)
    except (FixtureError, UnsupportedTheta, MetricError, InversionError, ValueError) as exc:
        return 2, None, f"input error: {exc}"
    report = {
        "task": task,
        "pass": all(c["pass"] for c in checks),
        "checks": checks,
        "results": results,
        "inputs": fx.echo(),
        "provenance": {
            "version": __version__,
            "seed": fx.seed,
            "radii": list(fx.config.for_dim(fx.theta.n)),
            "gns_tol": fx.config.tol,
            "norm": fx.norm.value,
        },
    }
    if args.timing:
        report["wall_time"] = time.perf_counter() - t0
    report = _jsonable(report)
    return (0 if report["pass"] else 1), report, ""


def main(argv=None):
    args = build_parser().parse_args(argv)
    code, report, msg = run(argv)
    if report is None:
        print(f"qtorus: {msg}", file=sys.stderr)
        return code
    if args.output == "structured":
        print(json.dumps(report, indent=2))
    else:
        print(render_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
