"""Command-line experiment runner.

Every subcommand takes a JSON config (``--json``) and/or flags, writes one
CSV, one ``summary.json`` (inputs, metrics, per-check pass/fail), a
``timing.json`` with the wall time, and optionally an SVG plot.  Exit
status: 0 when every in-run check passes, 2 for a bad config, 3 for a
numerical failure or a failed check.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import delta, rng
from .borchers import BorchersElement, State, gaussian_state, positivity_gram
from .correlation import correlation_deriv, correlation_mc_many, correlation_wick
from .deformation import InjectionField, commutator, commutator_pairing
from .errors import DistspaceError
from .gaussian import (
    CovarianceForm,
    GaussianMeasure,
    bochner_check,
    hellinger_affinity,
    hellinger_affinity_mc,
    mc_charfun,
)
from .grid import Distribution, Grid, Point, bump, distribution_from_json, pair, tensor
from .measure import Measure, identity_residuals

COMMANDS = ("homeo", "measure", "charfun", "equiv", "wick", "deform", "borchers")

DEFAULT_GRIDS = {
    "homeo": (1, 5.0, 0.01),
    "measure": (1, 5.0, 0.01),
    "charfun": (1, 5.0, 0.01),
    "equiv": (1, 5.0, 0.01),
    "wick": (1, 5.0, 0.01),
    "deform": (1, 2.0, 0.05),
    "borchers": (1, 2.0, 0.02),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    grid: tuple = None
    kernel: dict = field(default_factory=lambda: {"type": "inverse_laplacian", "params": {}})
    N: int = 100_000
    seed: int = 0
    out: str = "out"
    svg: bool = False
    probes: int = None
    n: int = 4
    corrupt: bool = False
    lam: float = 1.0
    lam2: float = 2.0
    dofs: list = field(default_factory=lambda: [8, 32, 128, 512, 2048])
    mc_dmax: int = 20
    measure: dict = None
    points: list = None
    K: int = 2
    state: str = "gaussian"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        self.grid = _parse_grid(self.grid if self.grid is not None else DEFAULT_GRIDS[self.command])
        try:
            Grid(*self.grid)
        except DistspaceError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(self.kernel, dict) or set(self.kernel) - {"type", "params"}:
            raise ConfigError("kernel must be {type, params}")
        for name in ("N", "seed", "n", "K", "mc_dmax"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0:
                raise ConfigError(f"{name} must be a non-negative integer")
        if self.seed >= 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.probes is not None and (not isinstance(self.probes, int) or self.probes < 1):
            raise ConfigError("probes must be a positive integer")

    @classmethod
    def from_mapping(cls, command: str, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)} - {"command"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(command=command, **data)


def _parse_grid(spec) -> tuple:
    try:
        if isinstance(spec, str):
            parts = spec.split(",")
        elif isinstance(spec, dict):
            if set(spec) - {"n", "L", "h"}:
                raise ConfigError(f"unknown grid fields {sorted(set(spec) - {'n', 'L', 'h'})}")
            parts = [spec["n"], spec["L"], spec["h"]]
        else:
            parts = list(spec)
        n, L, h = int(parts[0]), float(parts[1]), float(parts[2])
        if len(parts) != 3:
            raise ValueError
    except (ValueError, KeyError, TypeError, IndexError):
        raise ConfigError(f"grid must be 'n,L,h', got {spec!r}") from None
    return (n, L, h)


def _make_grid(cfg) -> Grid:
    n, L, h = cfg.grid
    return Grid(n, L, h)


def make_kernel(grid: Grid, kernel: dict) -> CovarianceForm:
    kind = kernel.get("type")
    params = dict(kernel.get("params") or {})
    try:
        if kind == "scaled_identity":
            return CovarianceForm.scaled_identity(grid, **params)
        if kind == "inverse_laplacian":
            return CovarianceForm.inverse_laplacian(grid, **params)
    except TypeError as exc:
        raise ConfigError(f"bad kernel params: {exc}") from None
    raise ConfigError(f"unknown kernel type {kind!r}")


def random_bumps(grid: Grid, count: int, seed: int, radius=(0.5, 1.0), amplitude=(0.5, 1.5), spread=None) -> list:
    """Seeded random bumps whose supports stay inside the box.

    ``spread`` limits the centers to ``[-spread, spread]`` per axis, which
    keeps the supports overlapping and the correlations well away from 0.
    """
    gen = np.random.default_rng([seed, 0x5EED])
    out = []
    for _ in range(count):
        r = gen.uniform(*radius)
        lim = grid.extent - r - 2 * grid.spacing
        if spread is not None:
            lim = min(lim, spread)
        c = gen.uniform(-lim, lim, size=grid.dim) if lim > 0 else np.zeros(grid.dim)
        out.append(bump(grid, c, r, gen.uniform(*amplitude) * gen.choice([-1.0, 1.0])))
    return out


# -- experiments -------------------------------------------------------------
# each returns (header, rows, metrics, checks, plot) where plot is
# (xlabel, ylabel, x, {label: y}) or None


def run_homeo(cfg):
    grid = _make_grid(cfg)
    P = delta.ProbeFamily.default(grid)
    sweep = delta.homeo_sweep(P)
    C = delta.lipschitz_constant(P)
    scan = delta.separation_scan(P)
    sd = [s for _, s in sweep]
    metrics = {
        "lipschitz_upper": C,
        "separation_lower": scan["separation_lower"],
        "min_semidist": scan["min_semidist"],
        "final_semidist": sd[-1],
        "probes": len(P),
    }
    checks = {
        "lipschitz_bound": all(s <= C * d * (1 + 1e-12) for d, s in sweep),
        "monotone_nonincreasing": all(b <= a for a, b in zip(sd, sd[1:])),
        "converges_below_1e-6": sd[-1] < 1e-6,
        "separation_positive": scan["min_semidist"] > 0 and scan["separation_lower"] > 0,
    }
    plot = ("|x - y|", "semidist", [d for d, _ in sweep], {"semidist": sd, "C |x-y|": [C * d for d, _ in sweep]})
    return ["dist", "semidist"], sweep, metrics, checks, plot


def _measure_from_spec(grid, spec):
    spec = dict(spec or {"density_sqrt": {"type": "bump", "center": 0.0, "radius": 1.0}})
    if set(spec) - {"density_sqrt", "atoms"}:
        raise ConfigError("measure spec fields are density_sqrt and atoms")
    c = None
    ds = spec.get("density_sqrt")
    if ds is not None:
        kind = ds.get("type")
        if kind == "ones":
            c = np.ones(grid.shape)
        elif kind == "bump":
            c = bump(grid, ds.get("center", 0.0), ds.get("radius", 1.0), ds.get("amplitude", 1.0)).values.real
        else:
            raise ConfigError(f"unknown density_sqrt type {kind!r}")
    atoms = [(Point(tuple(a[:-1])), a[-1]) for a in spec.get("atoms", [])]
    return Measure(grid, c, atoms)


def run_measure(cfg):
    grid = _make_grid(cfg)
    nu = _measure_from_spec(grid, cfg.measure)
    rows = []
    worst = 0.0
    for i, phi in enumerate(random_bumps(grid, cfg.probes or 100, cfg.seed)):
        lhs, mid, rhs, gap = identity_residuals(phi, nu)
        worst = max(worst, gap)
        rows.append((i, lhs.real, lhs.imag, mid.real, mid.imag, rhs.real, rhs.imag, gap))
    header = ["probe_id", "integral_re", "integral_im", "pairing_re", "pairing_im", "dirac_re", "dirac_im", "residual"]
    metrics = {"max_relative_residual": worst, "total_mass": nu.total_mass}
    checks = {"three_way_identity_1e-12": worst <= 1e-12}
    plot = ("probe", "relative residual", [r[0] for r in rows], {"residual": [r[-1] for r in rows]})
    return header, rows, metrics, checks, plot


def run_charfun(cfg):
    grid = _make_grid(cfg)
    mu = GaussianMeasure(make_kernel(grid, cfg.kernel), seed=cfg.seed)
    qs = random_bumps(grid, cfg.probes or 100, cfg.seed)
    est, err = mc_charfun(mu, qs, cfg.N)
    rows, hits = [], 0
    for i, q in enumerate(qs):
        z = mu.charfun(q)
        hits += abs(est[i] - z) <= 5 * err[i]
        rows.append((i, z.real, z.imag, est[i].real, est[i].imag, err[i]))
    if cfg.corrupt:
        B = mu.covariance

        def Z(q):
            return complex(np.exp(0.5 * B.bilinear(q, q)))
    else:
        Z = mu.charfun
    min_eig = bochner_check(Z, qs[:32])
    metrics = {"within_5_stderr": int(hits), "probes": len(qs), "bochner_min_eig": min_eig, "corrupted": cfg.corrupt}
    checks = {"mc_within_5_stderr_95pct": hits >= 0.95 * len(qs), "bochner_psd": min_eig >= -1e-10}
    plot = ("probe", "Re Z", [r[0] for r in rows], {"analytic": [r[1] for r in rows], "monte carlo": [r[3] for r in rows]})
    return ["q_index", "Z_analytic_re", "Z_analytic_im", "Z_mc_re", "Z_mc_im", "stderr"], rows, metrics, checks, plot


def run_equiv(cfg):
    lam, lam2 = cfg.lam, cfg.lam2
    dmc = max(0, min(cfg.mc_dmax, 64))
    mc_est, mc_err = hellinger_affinity_mc(lam, lam2, dmc, cfg.N, cfg.seed) if dmc else ([], [])
    dims = sorted(set(range(1, dmc + 1)) | set(cfg.dofs))
    rows, ok_mc = [], True
    for d in dims:
        a = hellinger_affinity(lam, lam2, d)
        mc = mc_est[d - 1] if d <= dmc else ""
        if mc != "":
            ok_mc &= abs(mc - a) <= max(0.01, 5 * mc_err[d - 1])
        rows.append((d, a, mc))
    closed = [r[1] for r in rows]
    if lam != lam2:
        monotone = all(b < a for a, b in zip(closed, closed[1:]))
    else:
        monotone = all(c == 1.0 for c in closed)
    metrics = {"lam": lam, "lam2": lam2, "affinity_at_max_d": closed[-1]}
    checks = {"closed_form_monotone": monotone, "mc_within_0.01": bool(ok_mc)}
    plot = ("dof d", "affinity", [r[0] for r in rows], {"closed form": closed})
    return ["d", "affinity_closed", "affinity_mc"], rows, metrics, checks, plot


def run_wick(cfg):
    grid = _make_grid(cfg)
    mu = GaussianMeasure(make_kernel(grid, cfg.kernel), seed=cfg.seed)
    count = cfg.probes or 10
    pool = random_bumps(grid, count * cfg.n, cfg.seed, spread=0.5)
    tuples = [pool[t * cfg.n:(t + 1) * cfg.n] for t in range(count)]
    mcs, errs = correlation_mc_many(mu, tuples, cfg.N)
    rows, ok_deriv, ok_mc = [], True, True
    for t, qs in enumerate(tuples):
        w = correlation_wick(mu.covariance, qs)
        d = correlation_deriv(mu.charfun, qs)
        m, e = complex(mcs[t]), float(errs[t])
        ok_deriv &= abs(w - d) <= 1e-5 * abs(w)
        ok_mc &= abs(w - m) <= 5 * e
        rows.append((t, w.real, d.real, m.real, e))
    metrics = {"n": cfg.n, "tuples": count}
    checks = {"wick_vs_deriv_1e-5": bool(ok_deriv), "wick_vs_mc_5_stderr": bool(ok_mc)}
    plot = ("tuple", "correlation", [r[0] for r in rows], {"wick": [r[1] for r in rows], "mc": [r[3] for r in rows]})
    return ["tuple_id", "wick", "deriv", "mc", "stderr"], rows, metrics, checks, plot


def make_injection(grid2: Grid, kernel: dict) -> InjectionField:
    kind = kernel.get("type")
    params = dict(kernel.get("params") or {})
    if kind == "zero":
        return InjectionField.zero(grid2)
    if kind == "delta_self":
        return InjectionField.delta_self(grid2)
    if kind == "swap":
        return InjectionField.swap(grid2)
    if kind == "weighted_delta":
        return InjectionField.weighted_delta(grid2)
    if kind == "constant":
        at = params.get("at", [0.0] * grid2.dim)
        w = Distribution(grid2, [(Point(tuple(at)), params.get("weight", 1.0))])
        return InjectionField.constant(w)
    raise ConfigError(f"unknown injection type {kind!r}")


def run_deform(cfg):
    base = _make_grid(cfg)
    grid2 = base.power(2)
    kernel = cfg.kernel if cfg.kernel.get("type") != "inverse_laplacian" else {"type": "weighted_delta"}
    s = make_injection(grid2, kernel)
    r = 0.4 * base.extent
    b1, b2 = bump(base, 0.1 * base.extent, r), bump(base, -0.2 * base.extent, r, 0.7)
    phi = tensor(b1, b2) + tensor(b2, b1)
    pts = cfg.points or [[0.1, -0.3], [0.25, 0.05], [-0.4, 0.35], [0.0, 0.0], [0.33, -0.12]]
    rows, worst = [], 0.0
    for x, y in pts:
        lhs = commutator(phi, s, x, y)
        rhs = commutator_pairing(phi, s, x, y)
        res = abs(lhs - rhs)
        worst = max(worst, res)
        sx = x if np.isscalar(x) else ";".join(map(str, x))
        sy = y if np.isscalar(y) else ";".join(map(str, y))
        rows.append((sx, sy, lhs.real, rhs.real, res))
    metrics = {"injection": s.name, "max_residual": worst}
    checks = {"commutator_identity_1e-12": worst <= 1e-12}
    plot = ("point", "commutator", list(range(len(rows))), {"lhs": [r[2] for r in rows], "rhs": [r[3] for r in rows]})
    return ["x", "y", "lhs_commutator", "rhs_pairing", "residual"], rows, metrics, checks, plot


def _load_state(path, base, cap):
    data = json.loads(Path(path).read_text())
    comps = {int(k): distribution_from_json(v) for k, v in data["components"].items()}
    return State(base, comps, int(data.get("degree_cap", cap)))


def run_borchers(cfg):
    base = _make_grid(cfg)
    C = make_kernel(base, cfg.kernel)
    if cfg.state == "gaussian":
        W = gaussian_state(C, max(cfg.K, 2))
    else:
        W = _load_state(cfg.state, base, cfg.K)
    count = cfg.probes or 16
    gen = np.random.default_rng([cfg.seed, 0xB0C])
    bumps = random_bumps(base, count, cfg.seed, radius=(0.3, 0.6))
    probes = []
    for b in bumps:
        a0 = complex(gen.normal(), gen.normal())
        probes.append(BorchersElement(base, {0: a0, 1: complex(gen.normal(), gen.normal()) * b}, W.cap))
    G = positivity_gram(W, probes)
    herm_gap = float(np.abs(G - G.conj().T).max())
    eig = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    rows = [(i, float(v)) for i, v in enumerate(eig)]
    metrics = {"min_eigenvalue": float(eig[0]), "hermitian_gap": herm_gap, "probes": count}
    checks = {"hermitian_1e-12": herm_gap <= 1e-12 * max(1.0, float(np.abs(G).max())), "positive_1e-8": eig[0] >= -1e-8}
    plot = ("index", "eigenvalue", [r[0] for r in rows], {"eigenvalue": [r[1] for r in rows]})
    return ["index", "eigenvalue"], rows, metrics, checks, plot


RUNNERS = {
    "homeo": run_homeo,
    "measure": run_measure,
    "charfun": run_charfun,
    "equiv": run_equiv,
    "wick": run_wick,
    "deform": run_deform,
    "borchers": run_borchers,
}


# -- output --------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not np.isfinite(v):
        return repr(v)
    return v


def _write_svg(path, plot, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "distspace"
    xlabel, ylabel, x, series = plot
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, marker=".", label=label)
    if xlabel in ("|x - y|", "dof d"):
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    inputs = {k: v for k, v in asdict(cfg).items() if k != "out"}
    t0 = time.perf_counter()
    try:
        header, rows, metrics, checks, plot = RUNNERS[cfg.command](cfg)
    except ConfigError:
        raise
    except (DistspaceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        summary = {"command": cfg.command, "inputs": inputs, "error": f"{type(exc).__name__}: {exc}", "passed": False}
        (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
        print(f"{cfg.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    with open(out / f"{cfg.command}.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    passed = all(bool(v) for v in checks.values())
    summary = {
        "command": cfg.command,
        "inputs": inputs,
        "metrics": metrics,
        "checks": {k: bool(v) for k, v in checks.items()},
        "passed": passed,
    }
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    if cfg.svg and plot is not None:
        _write_svg(out / f"{cfg.command}.svg", plot, cfg.command)
    # wall time lives apart from the summary so reruns stay byte-identical
    (out / "timing.json").write_text(json.dumps({"wall_time_s": time.perf_counter() - t0}) + "\n")
    for name, ok in summary["checks"].items():
        print(f"{cfg.command}: {name}: {'PASS' if ok else 'FAIL'}")
    return 0 if passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--json", metavar="CONFIG", help="JSON config file (flags override it)")
        p.add_argument("--grid", help="n,L,h")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", "--N", dest="N", type=int)
        p.add_argument("--out")
        p.add_argument("--svg", action="store_true", default=None)
        p.add_argument("--probes", type=int)
        if name == "wick":
            p.add_argument("--n", type=int)
        if name == "charfun":
            p.add_argument("--corrupt", action="store_true", default=None, help="use Z = exp(+B/2) in the Bochner check")
        if name == "equiv":
            p.add_argument("--lam", type=float)
            p.add_argument("--lam2", type=float)
        if name == "borchers":
            p.add_argument("--K", type=int)
            p.add_argument("--state")
    return parser


def config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.json:
        try:
            data = json.loads(Path(args.json).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.json}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for key, value in vars(args).items():
        if key in ("command", "json") or value is None:
            continue
        data[key] = value
    return ExperimentConfig.from_mapping(args.command, data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
