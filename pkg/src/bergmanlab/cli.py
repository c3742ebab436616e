"""
Command-line experiment runner.

    bergmanlab moments --weight power:t=1 --x 0:50
    bergmanlab ratio --weight dostanic:A=0,B=1,alpha=1 --p 1.5 --m-max 256
    bergmanlab ap-sweep --weight zeta_pow:p0=5 --p 3 --grid-depth 6
    bergmanlab kernel-check --seed 7
    bergmanlab inflate-check --mu dostanic:A=0,B=1,alpha=1 --points 8
    bergmanlab report a.json b.json

Every subcommand also reads ``--config FILE`` (flat ``key = value`` lines,
``#`` comments); flags override the file. CSV output starts with
``# schema=1``; JSON uses sorted keys. Files are written atomically.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration or
input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, bekolle, inflation, kernels, moments, projector, weights
from .errors import BergmanLabError, IllConditioned, InvalidInput, NonConvergence
from .numerics import TruncationPolicy

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    cmp: str = "<="
    seconds: float = 0.0


@dataclass
class RunReport:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, fn: Callable[[], float], threshold: float,
              cmp: str = "<=") -> Check:
        """Time ``fn`` and record value against ``threshold``."""
        t0 = time.perf_counter()
        value = float(fn())
        ok = value <= threshold if cmp == "<=" else value >= threshold
        c = Check(name, value, threshold, bool(ok), cmp, round(time.perf_counter() - t0, 6))
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "version": self.version,
                "passed": self.passed, "checks": [asdict(c) for c in self.checks],
                **({"results": self.extra} if self.extra else {})}


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def atomic_write(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path: str | None):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else str(v)
    return v


def json_text(obj) -> str:
    return json.dumps(_json_safe(obj), sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

COMMON_KEYS = {"seed": int, "out": str, "report": str, "tol": float}
KEYS = {
    "moments": {"weight": str, "x": str},
    "ratio": {"weight": str, "p": float, "k": int, "m_max": int},
    "ap-sweep": {"weight": str, "p": float, "grid_depth": int},
    "kernel-check": {"pairs": int},
    "inflate-check": {"mu": str, "points": int, "max_terms": int, "tail_tol": float},
}
DEFAULTS = {
    "seed": 0, "tol": 1e-12,
    "x": "0:50", "p": 1.5, "m_max": 256, "grid_depth": 6,
    "pairs": 100, "mu": "dostanic:A=0,B=1,alpha=1", "points": 8,
    "max_terms": 2000, "tail_tol": 1e-16,
}


def read_config(path: str, command: str) -> dict:
    allowed = {**COMMON_KEYS, **KEYS[command]}
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed:
            raise ConfigError(f"{path}:{no}: unknown key '{key}' for {command}")
        try:
            out[key] = allowed[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{no}: bad value for '{key}': {value}") from exc
    return out


def resolve(args: argparse.Namespace, command: str) -> dict:
    allowed = {**COMMON_KEYS, **KEYS[command]}
    cfg = {k: v for k, v in DEFAULTS.items() if k in allowed}
    if getattr(args, "config", None):
        cfg.update(read_config(args.config, command))
    for key in allowed:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if cfg.get("tol", 1) <= 0 or cfg.get("tail_tol", 1) <= 0:
        raise ConfigError("tolerances must be positive")
    return cfg


def _kv(spec: str, body: str) -> dict:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise ConfigError(f"bad weight parameter '{part}' in '{spec}'")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise ConfigError(f"bad number '{v}' in '{spec}'") from exc
    return out


def _split(spec: str) -> tuple[str, dict]:
    family, _, body = spec.partition(":")
    return family.strip(), _kv(spec, body)


def _need(spec, params, *names):
    missing = [n for n in names if n not in params]
    extra = set(params) - set(names)
    if missing or extra:
        raise ConfigError(f"'{spec}' needs exactly the parameters {', '.join(names)}")
    return [params[n] for n in names]


def parse_radial(spec: str) -> weights.RadialWeight:
    family, params = _split(spec)
    if family == "power":
        return weights.make_power(*_need(spec, params, "t"))
    if family == "dostanic":
        return weights.make_dostanic(*_need(spec, params, "A", "B", "alpha"))
    if family == "one":
        return weights.make_power(0.0)
    raise ConfigError(f"'{spec}' is not a radial weight (power:t=.., dostanic:A=..,B=..,alpha=.. or one)")


def parse_halfplane(spec: str, p: float) -> weights.HalfPlaneWeight:
    family, params = _split(spec)
    if family == "zeta_pow":
        return weights.zeta_pow_weight(*_need(spec, params, "p0"), p)
    if family == "appendixA":
        return bekolle.appendix_a_weight(*_need(spec, params, "p0"), p)
    if family == "remark35":
        p0 = params.get("p0", 5.0)
        return weights.holomorphic_halfplane_weight(weights.remark_F(p0), p, name="remark35")
    if family == "one":
        return weights.power_form_weight(0.0, 0.0, name="one")
    raise ConfigError(f"'{spec}' is not a half-plane weight (zeta_pow, appendixA, remark35, one)")


def parse_grid(text: str) -> list[float]:
    """'a:b[:step]' (inclusive, step 1 by default) or a comma list."""
    try:
        if ":" in text:
            parts = [float(s) for s in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            a, b = parts[:2]
            step = parts[2] if len(parts) == 3 else 1.0
            if step <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9))
            grid = [a + i * step for i in range(n + 1)]
        else:
            grid = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid '{text}' (use a:b[:step] or a comma list)") from exc
    if not grid:
        raise ConfigError("grid is empty")
    return grid


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_moments(cfg: dict) -> RunReport:
    w = parse_radial(cfg["weight"])
    xs = parse_grid(cfg["x"])
    table = moments.moment_table(w, xs, rtol=max(cfg["tol"], 1e-13))
    rows = [[e.x, e.value, e.log_value, e.abs_error] for e in table.entries]
    _emit(csv_text(["x", "phi", "log_phi", "abs_err"], rows), cfg.get("out"))
    rep = RunReport("moments", cfg)
    lv = table.log_values
    rep.check("positive", lambda: float(np.sum(~np.isfinite(lv))), 0)
    rep.check("decreasing", lambda: float(np.max(np.diff(lv), initial=-math.inf)), 0.0)
    if w.family == "power":
        t = w.params["t"]
        rep.check("beta_oracle", lambda: max(
            abs(math.expm1(e.log_value - math.log(moments.phi_beta_oracle(t, e.x))))
            for e in table.entries), 1e-10)
    return rep


def cmd_ratio(cfg: dict) -> RunReport:
    w = parse_radial(cfg["weight"])
    p = cfg["p"]
    k = cfg.get("k")
    series = projector.ratio_sweep(w, p, k, projector.dyadic_grid(cfg["m_max"]))
    rows = [[pt.m, pt.R, pt.log_R] for pt in series.points]
    _emit(csv_text(["m", "R", "log_R"], rows), cfg.get("out"))
    rep = RunReport("ratio", {**cfg, "k": series.k})
    rep.check("failed_points", lambda: len(series.errors), 0)
    rep.check("positive", lambda: min((pt.R for pt in series.points), default=0.0), 0.0, ">=")
    if p == 2:
        rep.check("hoelder_bound", lambda: max(pt.R for pt in series.points), 1 + 1e-9)
    logs = series.log_values
    rep.extra = {"log_R_growth": logs[-1] - logs[0] if logs else math.nan,
                 "tail_increasing": bool(all(b > a for a, b in zip(logs, logs[1:])))}
    return rep


def cmd_ap_sweep(cfg: dict) -> RunReport:
    mu = parse_halfplane(cfg["weight"], cfg["p"])
    rep_ap = bekolle.ap_sweep(mu, cfg["p"], cfg["grid_depth"], tol=max(cfg["tol"], 1e-10))
    rows = [[r.disc.x0, r.disc.R, r.case.value, r.quantity, r.verdict] for r in rep_ap.per_disc]
    _emit(csv_text(["x0", "R", "case", "quantity", "verdict"], rows), cfg.get("out"))
    rep = RunReport("ap-sweep", cfg)
    finite = [r.quantity for r in rep_ap.per_disc if not r.divergent]
    rep.check("hoelder_lower_bound", lambda: min(finite, default=1.0), 1 - 1e-9, ">=")
    rep.extra = {"verdict": rep_ap.verdict, "supremum": rep_ap.supremum,
                 "argmax": None if rep_ap.argmax is None else [rep_ap.argmax.x0, rep_ap.argmax.R],
                 "divergent_discs": sum(r.divergent for r in rep_ap.per_disc)}
    return rep


def _random_disc_points(rng, n, rmax):
    r = rmax * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * math.pi * rng.uniform(0, 1, n))


def cmd_kernel_check(cfg: dict) -> RunReport:
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["pairs"]
    rep = RunReport("kernel-check", cfg)
    one = weights.make_power(0.0)
    dost = weights.make_dostanic(0, 1, 1)
    z8, w8 = _random_disc_points(rng, n, 0.8), _random_disc_points(rng, n, 0.8)
    z9, w9 = _random_disc_points(rng, n, 0.9), _random_disc_points(rng, n, 0.9)
    zh = rng.uniform(-3, 3, n) + 1j * rng.uniform(0.05, 3, n)
    nh = rng.uniform(-3, 3, n) + 1j * rng.uniform(0.05, 3, n)

    def rel(a, b):
        return abs(a - b) / abs(b)

    rep.check("series_vs_closed_form", lambda: max(
        abs(kernels.radial_kernel(one, a, b).value - kernels.disc_kernel(a, b))
        for a, b in zip(z8, w8)), 1e-10)
    rep.check("halfplane_formula", lambda: max(
        rel(kernels.halfplane_kernel(a, b), kernels.halfplane_kernel_closed(a, b))
        for a, b in zip(zh, nh)), 1e-10)
    rep.check("disc_roundtrip_formula", lambda: max(
        rel(kernels.disc_kernel_via_halfplane(a, b), kernels.disc_kernel(a, b))
        for a, b in zip(z9, w9)), 1e-10)
    rep.check("hermitian_symmetry", lambda: max(
        max(abs(kernels.radial_kernel(dost, a, b).value
                - kernels.radial_kernel(dost, b, a).value.conjugate()),
            abs(kernels.halfplane_kernel(c, d) - np.conj(kernels.halfplane_kernel(d, c))))
        for a, b, c, d in zip(z8[:20], w8[:20], zh[:20], nh[:20])), 1e-10)
    rep.check("diagonal_positivity", lambda: min(
        kernels.radial_kernel(dost, a, a).value.real for a in z9[:20]), 0.0, ">=")
    g = weights.polynomial_weight([-2, 1], "z-2")
    pts = _random_disc_points(rng, 12, 0.5)

    def fdefect(N):
        K = kernels.build_gram_kernel(g, N)
        return max(kernels.factorization_defect(g, K, a, b) for a in pts for b in pts)

    d12, d24 = fdefect(12), fdefect(24)
    rep.check("factorization_N24_abs", lambda: d24, 1e-3)
    rep.check("factorization_N24_over_N12", lambda: d24 / d12 if d12 > 0 else 0.0, 0.5)
    rep.check("reproducing_radial", lambda: max(
        abs(kernels.project_numeric(dost, lambda t, j=j: t**j, a) - a**j)
        for j in range(6) for a in pts[:3]), 1e-6)
    return rep


def cmd_inflate_check(cfg: dict) -> RunReport:
    rng = np.random.default_rng(cfg["seed"])
    policy = TruncationPolicy(max_terms=cfg["max_terms"], tail_tol=cfg["tail_tol"])
    mu = parse_radial(cfg["mu"])
    d = inflation.make_domain(mu)
    n = cfg["points"]
    rep = RunReport("inflate-check", cfg)
    zs, ts = _random_disc_points(rng, n, 0.5), _random_disc_points(rng, n, 0.5)
    fib = rng.uniform(0, 0.6, (2, n)) * np.exp(2j * math.pi * rng.uniform(0, 1, (2, n)))
    ws = fib[0] * np.sqrt(d.mu(zs))
    ss = fib[1] * np.sqrt(d.mu(ts))
    trivial = mu.family == "power" and mu.params["t"] == 0
    if trivial:
        rep.check("bidisc_product", lambda: max(
            abs(inflation.hartogs_kernel(d, (a, b), (c, e), policy).value
                - kernels.disc_kernel(a, c) * kernels.disc_kernel(b, e))
            for a, b, c, e in zip(zs, ws, ts, ss)), 1e-9)

    def slice_excess():
        worst = -math.inf
        for a, c in zip(zs, ts):
            worst = max(worst, inflation.slice_identity_defect(d, a, c, policy)
                        - inflation.slice_tail_bound(d, a, c, policy) - 1e-14)
        return worst

    rep.check("slice_identity_minus_tail_bound", slice_excess, 0.0)
    rep.check("lifted_projection", lambda: max(
        inflation.lifted_projection_defect(d, f, a, policy)
        for f in [(0, 0), (2, 1), (4, 2)] for a in zs[:2]), 1e-5)
    rep.check("degree_selection", lambda: max(
        inflation.degree_selection_defect(d, (1, 0), j, zs[0], policy=policy)
        for j in (0, 1, 2)), 1e-8)
    rep.check("hermitian_symmetry", lambda: max(
        abs(inflation.hartogs_kernel(d, (a, b), (c, e), policy).value
            - inflation.hartogs_kernel(d, (c, e), (a, b), policy).value.conjugate())
        for a, b, c, e in zip(zs, ws, ts, ss)), 1e-10)
    rep.check("diagonal_positivity", lambda: min(
        inflation.hartogs_kernel(d, (a, b), (a, b), policy).value.real
        for a, b in zip(zs, ws)), 0.0, ">=")
    return rep


def cmd_report(paths: list[str], out: str | None) -> int:
    summary = {"reports": [], "failed_checks": [], "passed": True}
    for path in paths:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            checks = data["checks"]
            name = data["command"]
            for c in checks:
                if not c["passed"]:
                    summary["failed_checks"].append({"report": path, "command": name,
                                                     "check": c["name"], "value": c["value"],
                                                     "threshold": c["threshold"]})
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"error: malformed report {path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        summary["reports"].append({"path": path, "command": name,
                                   "passed": all(c["passed"] for c in checks)})
    summary["passed"] = not summary["failed_checks"]
    _emit(json_text(summary), out)
    return EXIT_OK if summary["passed"] else EXIT_FAIL


COMMANDS = {
    "moments": cmd_moments,
    "ratio": cmd_ratio,
    "ap-sweep": cmd_ap_sweep,
    "kernel-check": cmd_kernel_check,
    "inflate-check": cmd_inflate_check,
}
JSON_COMMANDS = ("kernel-check", "inflate-check")


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bergmanlab", description=__doc__.split("\n\n")[0].strip())
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value file; flags override it")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--out", help="primary output (CSV or JSON); stdout if omitted")
        sp.add_argument("--report", help="write the JSON run report here")
        return sp

    sp = common(sub.add_parser("moments", help="moment table Φ(x)"))
    sp.add_argument("--weight")
    sp.add_argument("--x", help="grid a:b[:step] or comma list")

    sp = common(sub.add_parser("ratio", help="blow-up ratios R_k(m) on dyadic m"))
    sp.add_argument("--weight")
    sp.add_argument("--p", type=float)
    sp.add_argument("--k", type=int, help="default: smallest k > (2+p)/(2-p)")
    sp.add_argument("--m-max", dest="m_max", type=int)

    sp = common(sub.add_parser("ap-sweep", help="A_p^+ quantity over a disc family"))
    sp.add_argument("--weight")
    sp.add_argument("--p", type=float)
    sp.add_argument("--grid-depth", dest="grid_depth", type=int)

    sp = common(sub.add_parser("kernel-check", help="kernel identity suite (JSON)"))
    sp.add_argument("--pairs", type=int)

    sp = common(sub.add_parser("inflate-check", help="Hartogs kernel identity suite (JSON)"))
    sp.add_argument("--mu")
    sp.add_argument("--points", type=int)
    sp.add_argument("--max-terms", dest="max_terms", type=int)
    sp.add_argument("--tail-tol", dest="tail_tol", type=float)

    sp = sub.add_parser("report", help="merge JSON run reports")
    sp.add_argument("inputs", nargs="*")
    sp.add_argument("--out")
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.command == "report":
        return cmd_report(args.inputs, args.out)
    try:
        cfg = resolve(args, args.command)
        if "weight" in KEYS[args.command] and not cfg.get("weight"):
            raise ConfigError("--weight is required")
        rep = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergence, IllConditioned) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BergmanLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = json_text(rep.to_dict())
    if args.command in JSON_COMMANDS:
        _emit(text, cfg.get("out"))
    if cfg.get("report"):
        atomic_write(cfg["report"], text)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3g} (needs {c.cmp} {c.threshold:g})",
              file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
