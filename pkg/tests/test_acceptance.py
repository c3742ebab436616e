"""Acceptance criteria 1-12, one test each.

Every test prints a single ``[ACCEPT n] PASS|FAIL ...`` line (shown even when
pytest captures output) and then asserts the criterion at its stated
tolerance. Run with ``pytest tests/test_acceptance.py -v`` or as a script.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import special

from bergmanlab import bekolle, inflation, kernels, moments, projector, weights
from bergmanlab.numerics import Disc, integrate_half_disc_cutoff

# frozen from tests/oracles.py (composite Simpson in log form, 2e6 nodes)
ORACLE_LOG_R8 = {16: 0.29633516963762574, 256: 1.0861647575060687}

SEED = 20240601


def _report(capsys, n, passed, detail, t0):
    line = f"[ACCEPT {n:2d}] {'PASS' if passed else 'FAIL'} {detail} ({time.perf_counter() - t0:.1f} s)"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return passed


def _disc_points(rng, n, rmax):
    r = rmax * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(2j * math.pi * rng.uniform(0, 1, n))


def criterion_1(capsys=None):
    t0 = time.perf_counter()
    worst = 0.0
    for t in (0.0, 0.5, 1.0, 3.0):
        w = weights.make_power(t)
        for x in np.arange(0.0, 50.0 + 0.25, 0.5):
            ref = 0.5 * special.beta(x + 1, t + 1)
            worst = max(worst, abs(moments.phi(w, float(x)) - ref) / ref)
    return _report(capsys, 1, worst <= 1e-10, f"moment oracle max rel err {worst:.2e} <= 1e-10", t0)


def criterion_2(capsys=None):
    t0 = time.perf_counter()
    w = weights.make_dostanic(0, 1, 1)
    worst = 0.0
    for n in (1, 2, 3, 4):
        ladder = moments.build_ladder(w, n)
        for x in (5, 10, 20, 40):
            worst = max(worst, moments.ladder_identity_defect(ladder, x))
    return _report(capsys, 2, worst <= 1e-6, f"ladder identity max rel defect {worst:.2e} <= 1e-6", t0)


def criterion_3(capsys=None):
    t0 = time.perf_counter()
    ws = [weights.make_power(0), weights.make_power(1), weights.make_dostanic(0, 1, 1)]
    worst = -math.inf
    for w in ws:
        for k in (1, 2, 3, 4, 5):
            for m in (1, 2, 4, 8, 16, 32, 64, 128):
                worst = max(worst, projector.ratio(w, 2.0, k, m))
    return _report(capsys, 3, worst <= 1 + 1e-9, f"p=2 ratio max {worst:.12f} <= 1+1e-9", t0)


def criterion_4(capsys=None):
    t0 = time.perf_counter()
    s = projector.ratio_sweep(weights.make_dostanic(0, 1, 1), 1.5, 8, projector.dyadic_grid(256))
    pts = {pt.m: pt.log_R for pt in s.points}
    tail = [pts[m] for m in sorted(pts) if m >= 16]
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    growth = math.exp(pts[256] - pts[16])
    oracle = math.exp(ORACLE_LOG_R8[256] - ORACLE_LOG_R8[16])
    ok = increasing and growth >= 1e3 and not s.errors
    return _report(capsys, 4, ok,
                   f"R_8 increasing for m>=16: {increasing}; R_8(256)/R_8(16) = {growth:.4f} "
                   f"(Simpson oracle {oracle:.4f}) >= 1e3", t0)


def criterion_5(capsys=None):
    t0 = time.perf_counter()
    s = projector.ratio_sweep(weights.make_power(3), 1.5, 8, projector.dyadic_grid(256))
    vals = [pt.R for pt in s.points]
    spread = max(vals) / min(vals)
    return _report(capsys, 5, spread < 2 and not s.errors,
                   f"Power(3) R_8 max/min = {spread:.4f} < 2", t0)


def criterion_6(capsys=None):
    t0 = time.perf_counter()
    mu = weights.zeta_pow_weight(5.0, 3.0)
    s6 = bekolle.ap_sweep(mu, 3.0, depth=6)
    s8 = bekolle.ap_sweep(mu, 3.0, depth=8)
    change = abs(s8.supremum - s6.supremum) / s6.supremum
    q = bekolle.ap_quantity(mu, 3.0, Disc(0.0, 1.0))
    rel = abs(q - 216 / 196) / (216 / 196)
    ok = (not s6.divergent and not s8.divergent and math.isfinite(s6.supremum)
          and change < 0.10 and rel <= 1e-4)
    return _report(capsys, 6, ok,
                   f"sup depth6 {s6.supremum:.6f}, depth8 {s8.supremum:.6f} (change {change:.2%} < 10%); "
                   f"D(0,1) rel err {rel:.1e} <= 1e-4", t0)


def criterion_7(capsys=None):
    t0 = time.perf_counter()
    mu = weights.zeta_pow_weight(5.0, 5.0)
    res = bekolle.ap_detail(mu, 5.0, Disc(0.0, 1.0))
    inv_sq = weights.power_form_weight(-2.0)
    vals = [integrate_half_disc_cutoff(inv_sq, Disc(0.0, 1.0), 2.0**-j, rtol=1e-10).value
            for j in range(4, 11)]
    incs = np.diff(vals) / (math.pi * math.log(2))
    worst = float(np.max(np.abs(incs - 1)))
    ok = res.divergent and worst <= 0.05
    return _report(capsys, 7, ok,
                   f"origin disc verdict {res.verdict}; cutoff increments / (pi log 2) "
                   f"within {worst:.1e} of 1 (<= 5%)", t0)


def criterion_8(capsys=None):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    one = weights.make_power(0)
    z, w = _disc_points(rng, 100, 0.8), _disc_points(rng, 100, 0.8)
    series = max(abs(kernels.radial_kernel(one, a, b).value - kernels.disc_kernel(a, b))
                 for a, b in zip(z, w))
    zh = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.05, 3, 100)
    nh = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.05, 3, 100)
    # kernels are unbounded on both domains, so the formulas are compared relatively
    half = max(abs(kernels.halfplane_kernel(a, b) - kernels.halfplane_kernel_closed(a, b))
               / abs(kernels.halfplane_kernel_closed(a, b)) for a, b in zip(zh, nh))
    z9, w9 = _disc_points(rng, 100, 0.9), _disc_points(rng, 100, 0.9)
    disc = max(abs(kernels.disc_kernel_via_halfplane(a, b) - kernels.disc_kernel(a, b))
               / abs(kernels.disc_kernel(a, b)) for a, b in zip(z9, w9))
    ok = max(series, half, disc) <= 1e-10
    return _report(capsys, 8, ok,
                   f"series vs closed {series:.1e}, half-plane formula {half:.1e}, "
                   f"disc formula {disc:.1e} (all <= 1e-10)", t0)


def criterion_9(capsys=None):
    t0 = time.perf_counter()
    g = weights.polynomial_weight([-2, 1], "z-2")
    pts = [r * np.exp(1j * a) for r in (0.0, 0.25, 0.5)
           for a in np.linspace(0, 2 * math.pi, 8, endpoint=False)]

    def defect(N):
        K = kernels.build_gram_kernel(g, N)
        return max(kernels.factorization_defect(g, K, a, b) for a in pts for b in pts)

    d12, d24 = defect(12), defect(24)
    ok = d24 <= 0.5 * d12 and d24 <= 1e-3
    return _report(capsys, 9, ok, f"defect N=12 {d12:.2e}, N=24 {d24:.2e} (<= half and <= 1e-3)", t0)


def criterion_10(capsys=None):
    t0 = time.perf_counter()
    om = weights.transport_weight(weights.remark_F(5.0))
    r = np.linspace(0.0, 0.9, 20)
    th = np.linspace(0.0, 2 * math.pi, 20, endpoint=False)
    z = r[:, None] * np.exp(1j * th[None, :])
    ref = np.abs(z - 1) ** (4.0 / 3.0)
    worst = float(np.max(np.abs(om(z) - ref) / ref))
    return _report(capsys, 10, worst <= 1e-9, f"transport vs |z-1|^(4/3) max rel err {worst:.1e} <= 1e-9", t0)


def criterion_11(capsys=None):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    one = inflation.make_domain(weights.make_power(0))
    bidisc = 0.0
    for _ in range(50):
        z, w, t, s = _disc_points(rng, 4, 0.9)
        bidisc = max(bidisc, abs(inflation.hartogs_kernel(one, (z, w), (t, s)).value
                                 - kernels.disc_kernel(z, t) * kernels.disc_kernel(w, s)))
    domains = [one, inflation.make_domain(weights.make_power(1)),
               inflation.make_domain(weights.make_dostanic(0, 1, 1))]
    slice_ok = True
    slice_worst = 0.0
    for d in domains:
        for z, t in [(0.4, 0.2), (0.3, 0.1), (0.5j, -0.3 + 0.2j)]:
            defect = inflation.slice_identity_defect(d, z, t)
            bound = inflation.slice_tail_bound(d, z, t)
            # a few ulps of the kernel value for the final subtraction
            scale = abs(kernels.radial_kernel(d.base_weight, z, t).value)
            slice_ok &= defect <= bound + 8 * np.finfo(float).eps * scale
            slice_worst = max(slice_worst, defect)
    dost = domains[2]
    lifted = max(inflation.lifted_projection_defect(dost, (0, 0), 0.3),
                 inflation.lifted_projection_defect(one, (2, 1), 0.4),
                 inflation.lifted_projection_defect(dost, (4, 2), 0.3))
    ok = bidisc <= 1e-9 and slice_ok and lifted <= 1e-5
    return _report(capsys, 11, ok,
                   f"bidisc {bidisc:.1e} <= 1e-9; slice within tail bounds: {slice_ok} "
                   f"(max defect {slice_worst:.1e}); lifted projection {lifted:.1e} <= 1e-5", t0)


CSV_RUNS = [
    ["moments", "--weight", "dostanic:A=0,B=1,alpha=1", "--x", "0:50:5"],
    ["moments", "--weight", "power:t=3", "--x", "0:10"],
    ["ratio", "--weight", "dostanic:A=0,B=1,alpha=1", "--p", "1.5", "--k", "8", "--m-max", "64"],
    ["ap-sweep", "--weight", "zeta_pow:p0=5", "--p", "3", "--grid-depth", "3"],
]


def _csv_bodies(workdir: Path, tag: str) -> list[bytes]:
    out = []
    for i, args in enumerate(CSV_RUNS):
        path = workdir / f"{tag}_{i}.csv"
        subprocess.run([sys.executable, "-m", "bergmanlab.cli", *args, "--seed", str(SEED),
                        "--out", str(path)], check=False, capture_output=True)
        out.append(path.read_bytes() if path.exists() else b"")
    return out


def criterion_12(capsys=None, workdir: Path | None = None):
    import tempfile
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(workdir or tmp)
        first, second = _csv_bodies(base, "a"), _csv_bodies(base, "b")
    ok = all(first) and first == second
    return _report(capsys, 12, ok,
                   f"{len(CSV_RUNS)} CSV outputs byte-identical across two process runs: {first == second}", t0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 13)])
def test_acceptance(criterion, capsys):
    assert criterion(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
