"""Command-line front end.

Every command ends with a summary line ``VERDICT <name> <pass|fail> <worst>``
and exits with 0 (pass), 2 (verdict fail) or 1 (error).  CSV artifacts go
to ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import expr as _expr
from .causality import (
    BallKind,
    TimeSign,
    ball_boundary,
    ball_csv_header,
    causality2_evidence,
    chronological_set,
    punctured_mask,
)
from .config import RunConfig, build_metric, load_config, parse_config
from .errors import ConfigError, FinslerError, InconsistentClassification, NotDifferentiableAtK
from .fermat import (
    classify_causal,
    fermat_hypotheses,
    optical_metrics,
    optical_table,
    verify_finsler,
)
from .geodesics import (
    conserved_quantities,
    geodesic_bvp_shoot,
    lightlike_correspondence_check,
    spacetime_geodesic_ivp,
)
from .killing import (
    VectorField,
    coordinate_field,
    killing_residual,
    static_conditions_check,
    static_report_header,
    static_report_rows,
    time_dilation,
    time_translation,
)
from .parallel import default_threads, set_threads
from .tensor import (
    check_index1_region,
    fundamental_tensor,
    index_report_header,
    index_report_rows,
    signature_of,
)
from .zoo import ZOO, sample_base, sample_pairs

PASS, FAIL, ERROR = 0, 2, 1

# allowed keys of each command section
COMMAND_SECTIONS = {
    "eval": {"z", "w"},
    "tensor": {"z", "w"},
    "index-check": {"samples", "b_samples"},
    "killing-check": {"field", "components", "samples"},
    "static-check": {"field", "components", "samples", "w_per_point"},
    "fermat": {"x", "n_dirs", "samples"},
    "classify": {"samples", "z", "w"},
    "geodesic": {"z0", "w0", "s_span", "samples"},
    "lightlike-check": {"z0", "v0", "s_span", "past", "gap_tol", "samples"},
    "shoot": {"x0", "x1", "metric"},
    "balls": {"center", "radii", "kind", "n_dirs", "metric"},
    "chrono": {"p0", "radii", "sign", "n_dirs"},
    "evidence": {"box", "resolution", "pairs", "rays", "order", "mask_center", "mask_radius", "metric"},
}

# launch data used when a command section leaves it out
DEFAULT_LAUNCH = {
    "kerr_perturbation": ([0.0, 6.0, math.pi / 2, 0.0], [0.3, 0.0, 0.05]),
    "rutz": ([0.0, 6.0, math.pi / 2, 0.0], [0.3, 0.1, 0.05]),
}

SAMPLED = {"index-check", "killing-check", "static-check", "fermat", "classify", "evidence"}


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def _vec(v):
    return "(" + ", ".join(_fmt(float(c)) for c in v) + ")"


def write_csv(path, header, rows):
    """Write rows with round-trip float formatting (byte-stable for equal inputs)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


class Context:
    def __init__(self, args, cfg: RunConfig):
        self.args = args
        self.cfg = cfg
        self.out = args.out or cfg.get("run", "out") or "out"
        os.makedirs(self.out, exist_ok=True)
        seed = args.seed if args.seed is not None else cfg.number("run", "seed", kind=int)
        self.seed = seed
        self.tol = args.tol if args.tol is not None else cfg.number("run", "tol", 1e-10)
        self._metric = None

    @property
    def metric(self):
        if self._metric is None:
            if self.args.zoo:
                from .zoo import load_zoo
                self._metric = load_zoo(self.args.zoo, _param_pairs(self.args.param))
            else:
                self._metric = build_metric(self.cfg)
        return self._metric

    def rng(self):
        if self.seed is None:
            raise ConfigError("this command samples at random: give --seed or [run] seed", None, None)
        return np.random.default_rng(self.seed)

    def path(self, name):
        return os.path.join(self.out, name)


def _param_pairs(items):
    out = {}
    for it in items or []:
        if "=" not in it:
            raise ConfigError(f"--param expects key=value, got {it!r}", None, None)
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _vector_field(ctx, section):
    n = ctx.metric.n
    comps = ctx.cfg.get(section, "components")
    if comps is not None:
        texts = [c.strip() for c in comps.split(",")]
        if len(texts) != n + 1:
            raise ctx.cfg.error(section, "components", f"expected {n + 1} components")
        fns = [_expr.compile_spacetime(t, n) for t in texts]
        return VectorField(lambda z: [f(z) for f in fns], n, comps)
    name = (ctx.cfg.get(section, "field") or "t").strip()
    if name == "t":
        return time_translation(n)
    if name == "t_dilation":
        return time_dilation(n)
    if name.startswith("x") and name[1:].isdigit() and 1 <= int(name[1:]) <= n:
        return coordinate_field(n, int(name[1:]))
    raise ctx.cfg.error(section, "field", f"unknown field {name!r} (t, t_dilation, x1..x{n})")


def _verdict(name, ok, worst):
    print(f"VERDICT {name} {'pass' if ok else 'fail'} {float(worst):.6e}")
    return PASS if ok else FAIL


# commands ---------------------------------------------------------------------------------

def cmd_eval(ctx):
    L = ctx.metric
    zs = ctx.cfg.vectors("eval", "z", [[0.0] * (L.n + 1)])
    ws = ctx.cfg.vectors("eval", "w", [[1.0] + [0.0] * L.n])
    if len(zs) == 1:
        zs = zs * len(ws)
    rows, worst = [], 0.0
    for z, w in zip(zs, ws):
        val = L(z, w)
        lam2 = L(z, [2 * c for c in w])
        res = abs(lam2 - 4 * val) / (1 + abs(4 * val))
        worst = max(worst, res)
        rows.append([*z, *w, val, res])
        print(f"L({', '.join(_fmt(c) for c in z)}; {', '.join(_fmt(c) for c in w)}) = {val!r}")
    n = L.n
    write_csv(ctx.path("eval.csv"), ["t"] + [f"x{i}" for i in range(1, n + 1)] + ["tau"]
              + [f"v{i}" for i in range(1, n + 1)] + ["L", "homogeneity_residual"], rows)
    return _verdict("eval", worst <= 1e-9, worst)


def cmd_tensor(ctx):
    L = ctx.metric
    z = ctx.cfg.vector("tensor", "z", [0.0] * (L.n + 1))
    w = ctx.cfg.vector("tensor", "w", [1.0] + [0.5] + [0.0] * (L.n - 1))
    g = fundamental_tensor(L, z, w)
    sig = signature_of(g)
    eig = np.linalg.eigvalsh(g.entries)
    m = L.n + 1
    write_csv(ctx.path("tensor.csv"), ["i", "j", "g"],
              [[i, j, g.entries[i, j]] for i in range(m) for j in range(m)])
    print(f"signature (neg, zero, pos) = {sig.as_tuple()}, eigenvalues {eig.tolist()}")
    ok = sig.as_tuple() == (1, 0, L.n)
    return _verdict("tensor", ok, float(np.min(np.abs(eig))))


def cmd_index_check(ctx):
    L = ctx.metric
    samples = ctx.cfg.number("index-check", "samples", 1000, int)
    b_samples = ctx.cfg.number("index-check", "b_samples", 10000, int)
    rep = check_index1_region(L, ctx.rng(), samples, b_samples)
    write_csv(ctx.path("index_check.csv"), index_report_header(L.n), index_report_rows(rep))
    if rep.semidefinite is not None:
        print(f"fiber Hessian of B: {rep.semidefinite.verdict} over {rep.semidefinite.samples_checked} samples")
    print(f"index-1 fraction {rep.index1_fraction:.6f} over {rep.samples} samples")
    witness = rep.ladder_counterexample or rep.counterexample
    if rep.ladder:
        for tau, sig in rep.ladder:
            print(f"  tau={tau:g}: signature {sig.as_tuple()}")
    if witness is not None:
        z, w, sig = witness
        write_csv(ctx.path("index_witness.csv"),
                  ["t"] + [f"x{i}" for i in range(1, L.n + 1)] + ["tau"]
                  + [f"v{i}" for i in range(1, L.n + 1)] + ["n_neg", "n_zero", "n_pos"],
                  [[*z, *w, sig.n_neg, sig.n_zero, sig.n_pos]])
        print(f"witness z={_vec(z)} w={_vec(w)} signature {sig.as_tuple()}")
    ok = rep.passed and rep.ladder_counterexample is None
    return _verdict("index-check", ok, 1.0 - rep.index1_fraction if witness is None else 1.0)


def cmd_killing_check(ctx):
    L = ctx.metric
    K = _vector_field(ctx, "killing-check")
    samples = ctx.cfg.number("killing-check", "samples", 1000, int)
    Z, W = sample_pairs(L, ctx.rng(), samples)
    rep = killing_residual(K, L, Z, W, tol=ctx.tol)
    write_csv(ctx.path("killing_check.csv"),
              ["sample", "t"] + [f"x{i}" for i in range(1, L.n + 1)] + ["tau"]
              + [f"v{i}" for i in range(1, L.n + 1)] + ["lift_of_L"],
              [[i, *Z[i], *W[i], rep.values[i]] for i in range(samples)])
    print(f"field {K.name}: worst |K^c(L)| = {rep.worst:.3e} (relative {rep.worst_relative:.3e})")
    return _verdict("killing-check", rep.killing, rep.worst_relative)


def cmd_static_check(ctx):
    L = ctx.metric
    K = _vector_field(ctx, "static-check")
    samples = ctx.cfg.number("static-check", "samples", 50, int)
    wpp = ctx.cfg.number("static-check", "w_per_point", 4, int)
    try:
        rep = static_conditions_check(K, L, ctx.rng(), samples, wpp)
    except NotDifferentiableAtK as exc:
        print(f"not differentiable at K: {exc}")
        rep = getattr(exc, "report", None)
        if rep is not None:
            write_csv(ctx.path("static_check.csv"), static_report_header(L.n), static_report_rows(rep))
        return _verdict("static-check", False, getattr(rep, "cond_a_residual", math.inf))
    write_csv(ctx.path("static_check.csv"), static_report_header(L.n), static_report_rows(rep))
    verdict = rep.verdict()
    print(f"(a) {rep.cond_a:.3e}  (b) {rep.cond_b:.3e}  (c) {rep.cond_c:.3e}  "
          f"Frobenius {rep.frobenius:.3e}  -> {verdict}")
    worst = max(rep.cond_a, rep.cond_b, rep.cond_c, rep.frobenius)
    return _verdict("static-check", verdict == "static", worst)


def cmd_fermat(ctx):
    L = ctx.metric
    rng = ctx.rng()
    pair = optical_metrics(L)
    x = ctx.cfg.vector("fermat", "x", list(sample_base(L, np.random.default_rng(ctx.seed), 1)[0]))
    n_dirs = ctx.cfg.number("fermat", "n_dirs", 64, int)
    samples = ctx.cfg.number("fermat", "samples", 1000, int)
    rows = optical_table(pair, x, n_dirs)
    head = (["angle"] if L.n <= 2 else ["polar", "azimuth"]) + ["F_B", "F_B_minus", "G"]
    write_csv(ctx.path("fermat.csv"), head, rows)
    hyp = fermat_hypotheses(L, rng)
    reports = []
    for F1, which, flag in ((pair.f_b, "future", hyp.future), (pair.f_b_minus, "past", hyp.past)):
        if not flag:
            print(f"{F1.name}: hypotheses for {which} not met ({'; '.join(hyp.failed(which))})")
            continue
        rep = verify_finsler(F1, L, rng, samples, requires=which, hypotheses=hyp)
        reports.append(rep)
        print(f"{F1.name}: min value {rep.min_value:.3e}, min eigenvalue {rep.min_eig:.3e}, "
              f"homogeneity {rep.homogeneity_residual:.3e} -> {'Finsler' if rep.passed else 'not Finsler'}")
    ident = 0.0
    lam = L.lam_at(x)
    for r in rows:
        fb, g = r[-3], r[-1]
        # Lambda F_B - B = G on each sampled direction
        ang = r[:-3]
        if L.n == 1:
            v = np.array([math.cos(ang[0])])
        elif L.n == 2:
            v = np.array([math.cos(ang[0]), math.sin(ang[0])])
        else:
            pol, az = ang
            v = np.array([math.sin(pol) * math.cos(az), math.sin(pol) * math.sin(az), math.cos(pol)]
                         + [0.0] * (L.n - 3))
        ident = max(ident, abs(lam * fb - L.b_at(x, v) - g))
    print(f"identity |Lambda F_B - B - G| <= {ident:.3e}")
    ok = bool(reports) and all(r.passed for r in reports) and ident <= 1e-10
    return _verdict("fermat", ok, ident)


def cmd_classify(ctx):
    L = ctx.metric
    pair = optical_metrics(L)
    zs = ctx.cfg.vectors("classify", "z")
    ws = ctx.cfg.vectors("classify", "w")
    if ws is None:
        samples = ctx.cfg.number("classify", "samples", 10000, int)
        Z, W = sample_pairs(L, ctx.rng(), samples)
        # sample_pairs stays inside the cone; spread tau to hit every class
        W = W.copy()
        W[:, 0] = W[:, 0] * np.random.default_rng(ctx.seed + 1).uniform(-2, 2, samples)
    else:
        W = np.array(ws)
        Z = np.array(zs if zs is not None and len(zs) == len(ws) else [zs[0] if zs else [0.0] * (L.n + 1)] * len(ws))
    rows, bad = [], 0
    for z, w in zip(Z, W):
        try:
            c = classify_causal(L, z, w, pair)
            rows.append([*z, *w, c.kind.value, c.orientation.value])
        except InconsistentClassification:
            bad += 1
            rows.append([*z, *w, "inconsistent", ""])
    n = L.n
    write_csv(ctx.path("classify.csv"), ["t"] + [f"x{i}" for i in range(1, n + 1)] + ["tau"]
              + [f"v{i}" for i in range(1, n + 1)] + ["kind", "orientation"], rows)
    print(f"{len(rows)} vectors classified, {bad} disagreements")
    return _verdict("classify", bad == 0, bad)


def _launch(ctx, section, key_z, key_w, default_w):
    L = ctx.metric
    dz, dw = DEFAULT_LAUNCH.get(L.name, (None, None))
    if dz is None:
        box = np.asarray(L.sample_box, float) if L.sample_box else np.zeros((L.n, 2))
        dz = [0.0] + list(box.mean(axis=1))
        dw = default_w(L)
    z0 = ctx.cfg.vector(section, key_z, dz)
    w0 = ctx.cfg.vector(section, key_w, dw)
    return z0, w0


def _grid(ctx, section, s_span):
    k = ctx.cfg.number(section, "samples", None, int)
    return None if k is None else np.linspace(s_span[0], s_span[1], k)


def cmd_geodesic(ctx):
    L = ctx.metric

    def default_w(L):
        v = [1.0] + [0.0] * (L.n - 1)
        return [optical_metrics(L).f_b.at(np.zeros(L.n), v) if L.is_splitting else 1.0] + v

    z0, w0 = _launch(ctx, "geodesic", "z0", "w0", default_w)
    if L.name in DEFAULT_LAUNCH and ctx.cfg.get("geodesic", "w0") is None:
        v = np.array(w0)
        w0 = [optical_metrics(L).f_b.at(z0[1:], v)] + list(v)
    s_span = ctx.cfg.vector("geodesic", "s_span", [0.0, 10.0])
    tr = spacetime_geodesic_ivp(L, z0, w0, s_span, ctx.tol, s_eval=_grid(ctx, "geodesic", s_span))
    write_csv(ctx.path("trajectory.csv"), tr.csv_header(), tr.csv_rows())
    cq = conserved_quantities(tr, L)
    print(f"c_gamma = {float(cq.c_gamma)!r}, energy = {float(cq.energy)!r}, relative drift {cq.relative_drift:.3e}, "
          f"steps {tr.solver_stats['steps']}")
    return _verdict("geodesic", cq.relative_drift <= 10 * ctx.tol, cq.relative_drift)


def cmd_lightlike_check(ctx):
    L = ctx.metric
    z0, v0 = _launch(ctx, "lightlike-check", "z0", "v0", lambda L: [1.0] + [0.0] * (L.n - 1))
    s_span = ctx.cfg.vector("lightlike-check", "s_span", [0.0, 20.0])
    past = ctx.cfg.flag("lightlike-check", "past", None) if ctx.cfg.get("lightlike-check", "past") else None
    gap_tol = ctx.cfg.number("lightlike-check", "gap_tol", 1e-5)
    k = ctx.cfg.number("lightlike-check", "samples", 201, int)
    rep = lightlike_correspondence_check(L, z0, v0, s_span, ctx.tol, past=past, samples=k)
    st, base = rep.spacetime, rep.base
    rows = [[s, *x, *xb, t, th] for s, x, xb, t, th in zip(st.params, st.x, base.x, st.t, base.theta)]
    n = L.n
    write_csv(ctx.path("lightlike.csv"), ["s"] + [f"x{i}" for i in range(1, n + 1)]
              + [f"base_x{i}" for i in range(1, n + 1)] + ["t", "theta"], rows)
    print(f"{rep.orientation}: c_gamma = {float(rep.c_gamma)!r}, base gap {rep.gap:.3e}, "
          f"theta residual {rep.theta_residual:.3e}, G drift {rep.g_drift:.3e}")
    return _verdict("lightlike-check", rep.passed(gap_tol), max(rep.gap, rep.theta_residual))


def _base_metric(ctx, section):
    L = ctx.metric
    pair = optical_metrics(L)
    which = (ctx.cfg.get(section, "metric") or "F_B").strip()
    table = {"F_B": pair.f_b, "F_B-": pair.f_b_minus, "G": pair.g_aux}
    if which not in table:
        raise ctx.cfg.error(section, "metric", f"expected one of {sorted(table)}")
    return table[which]


def cmd_shoot(ctx):
    L = ctx.metric
    F = _base_metric(ctx, "shoot")
    x0 = ctx.cfg.vector("shoot", "x0", [0.0] * L.n)
    x1 = ctx.cfg.vector("shoot", "x1", [1.0] + [0.0] * (L.n - 1))
    res = geodesic_bvp_shoot(F, x0, x1, chart=L.chart)
    if res.trajectory is not None:
        tr = res.trajectory
        write_csv(ctx.path("shoot.csv"), ["s"] + [f"x{i}" for i in range(1, L.n + 1)]
                  + [f"v{i}" for i in range(1, L.n + 1)] + ["length"],
                  [[s, *x, *v, ell] for s, x, v, ell in zip(tr.params, tr.x, tr.v, tr.length)])
    print(f"length {float(res.length)!r}, endpoint error {res.endpoint_error:.3e}"
          + (" (degenerate: x0 = x1)" if res.degenerate else ""))
    return _verdict("shoot", res.converged, res.endpoint_error)


def cmd_balls(ctx):
    L = ctx.metric
    F = _base_metric(ctx, "balls")
    center = ctx.cfg.vector("balls", "center", [0.0] * L.n)
    radii = ctx.cfg.vector("balls", "radii", [1.0])
    kind = BallKind((ctx.cfg.get("balls", "kind") or "Forward").strip())
    n_dirs = ctx.cfg.number("balls", "n_dirs", 64, int)
    rows, worst = [], 0.0
    for r in radii:
        b = ball_boundary(F, center, r, kind, n_dirs)
        worst = max(worst, b.worst_radius_error)
        rows.extend(b.csv_rows(""))
    write_csv(ctx.path("balls.csv"), ball_csv_header(L.n), rows)
    print(f"{len(radii)} {kind.value.lower()} balls, worst |length - r| {worst:.3e}")
    return _verdict("balls", worst <= 1e-6 * max(radii), worst)


def cmd_chrono(ctx):
    L = ctx.metric
    p0 = ctx.cfg.vector("chrono", "p0", [0.0] * (L.n + 1))
    radii = ctx.cfg.vector("chrono", "radii", [0.5, 1.0, 1.5])
    sign = TimeSign((ctx.cfg.get("chrono", "sign") or "Future").strip())
    n_dirs = ctx.cfg.number("chrono", "n_dirs", 128, int)
    cs = chronological_set(L, p0, radii, n_dirs, sign)
    files, worst = [], 0.0
    for i, (t, b) in enumerate(cs.slices):
        name = f"slice_{i:03d}.csv"
        write_csv(ctx.path(name), ball_csv_header(L.n), b.csv_rows(t))
        files.append({"file": name, "t": t, "r": b.radius, "kind": b.kind.value})
        worst = max(worst, b.worst_radius_error)
    manifest = {"base_point": list(map(float, p0)), "sign": sign.value, "slices": files}
    with open(ctx.path("chrono_manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{len(files)} slices of the {sign.value.lower()} set written")
    return _verdict("chrono", worst <= 1e-6 * max(radii), worst)


def cmd_evidence(ctx):
    L = ctx.metric
    F = _base_metric(ctx, "evidence")
    box = ctx.cfg.vector("evidence", "box")
    if box is None:
        box = np.asarray(L.sample_box, float) if L.sample_box else np.array([(-1.0, 1.0)] * L.n)
    box = np.asarray(box, float).reshape(L.n, 2)
    res = ctx.cfg.number("evidence", "resolution", 200, int)
    pairs = ctx.cfg.number("evidence", "pairs", 10, int)
    rays = ctx.cfg.number("evidence", "rays", 16, int)
    order = ctx.cfg.number("evidence", "order", 2, int)
    mc = ctx.cfg.vector("evidence", "mask_center")
    mr = ctx.cfg.number("evidence", "mask_radius")
    mask = punctured_mask(mc, mr) if mc is not None and mr is not None else None
    ev = causality2_evidence(F, box, res, ctx.rng(), pairs, rays, mask, order)
    c, p, i = ev.connectedness, ev.completeness, ev.intersection
    rows = [["connectedness", "success_rate", c.success_rate],
            ["connectedness", "max_relative_gap", c.max_relative_gap],
            ["completeness", "rays_exiting_box", p.exited_box],
            ["completeness", "rays_stopped_inside", len(p.stalled_inside)],
            ["intersection", "cells", i.cells],
            ["intersection", "touches_box", int(i.touches_box)]]
    write_csv(ctx.path("evidence.csv"), ["item", "quantity", "value"], rows)
    for r in rows:
        print(f"EVIDENCE {r[0]} {r[1]} {r[2]}")
    ok = c.success_rate == 1.0 and not i.touches_box and i.nonempty and not p.stalled_inside
    worst = c.max_relative_gap if np.isfinite(c.max_relative_gap) else 1.0
    return _verdict("evidence", ok, worst if ok else 1.0 - c.success_rate)


def cmd_zoo_list(ctx_args):
    for name, e in ZOO.items():
        params = ", ".join(f"{p.name}={p.default}" for p in e.params)
        print(f"{name:22s} {e.kind:8s} {params:40s} {e.doc}")
    print(f"VERDICT zoo-list pass {0.0:.6e}")
    return PASS


COMMANDS = {
    "eval": cmd_eval,
    "tensor": cmd_tensor,
    "index-check": cmd_index_check,
    "killing-check": cmd_killing_check,
    "static-check": cmd_static_check,
    "fermat": cmd_fermat,
    "classify": cmd_classify,
    "geodesic": cmd_geodesic,
    "lightlike-check": cmd_lightlike_check,
    "shoot": cmd_shoot,
    "balls": cmd_balls,
    "chrono": cmd_chrono,
    "evidence": cmd_evidence,
}


def build_parser():
    p = argparse.ArgumentParser(prog="stationary-finsler",
                                description="Numerical checks for stationary splitting Finsler spacetimes")
    p.add_argument("command", choices=sorted(COMMANDS) + ["zoo"])
    p.add_argument("subcommand", nargs="?", help="'list' for the zoo command")
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--zoo", help="use a zoo entry instead of a config metric")
    p.add_argument("--param", action="append", help="zoo parameter key=value (repeatable)")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="random seed for sampled commands")
    p.add_argument("--threads", type=int, help=f"worker threads (default {default_threads()})")
    p.add_argument("--tol", type=float, help="solver / residual tolerance (default 1e-10)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            set_threads(args.threads)
        if args.command == "zoo":
            if args.subcommand != "list":
                raise ConfigError("usage: zoo list", None, None)
            return cmd_zoo_list(args)
        if args.subcommand is not None:
            raise ConfigError(f"unexpected argument {args.subcommand!r}", None, None)
        if args.config:
            cfg = load_config(args.config, COMMAND_SECTIONS)
        else:
            cfg = parse_config("", COMMAND_SECTIONS)
        if not args.config and not args.zoo:
            raise ConfigError("give --config PATH or --zoo NAME", None, None)
        if args.zoo and cfg.has_metric():
            raise ConfigError("--zoo conflicts with the metric in the config file", None, None)
        ctx = Context(args, cfg)
        if args.command in SAMPLED and ctx.seed is None:
            raise ConfigError(f"{args.command} samples at random: give --seed or [run] seed", None, None)
        return COMMANDS[args.command](ctx)
    except (FinslerError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(f"VERDICT {args.command} fail nan")
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
