"""Scenario runner: reproduces the underlying data of every figure-style
portrait as CSV/JSON from named subcommands.

Deterministic by construction: no clocks, no RNG, fixed summation orders,
atomic writes (temp file + rename).  Exit codes: 0 success, 2 configuration
error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import bipartite as bp
from . import flow as fl
from . import infoprofile as ip
from . import wigner as wg
from .ptsystem import (ClassicalRegime, PTParams, TwoLevelState,
                       classical_trajectory)

__all__ = ["main", "ConfigError"]


class ConfigError(ValueError):
    pass


_NUMBER_RE = re.compile(r"^[0-9pi+\-*/(). ]+$")


def parse_number(text: str) -> float:
    """Parse a float that may contain 'pi' (e.g. 'pi/12', '3*pi/4')."""
    text = str(text).strip()
    if not text or not _NUMBER_RE.match(text):
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        return float(eval(text, {"__builtins__": {}}, {"pi": math.pi}))
    except Exception as exc:
        raise ConfigError(f"cannot parse number {text!r}: {exc}") from None


def parse_tau_steps(text: str) -> list[float]:
    """Comma list of tau values, or 'start:stop:count' for a uniform sweep."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("tau range must be start:stop:count")
        start, stop = parse_number(parts[0]), parse_number(parts[1])
        count = int(parts[2])
        if count < 2:
            raise ConfigError("tau range needs at least 2 steps")
        return list(np.linspace(start, stop, count))
    return [parse_number(t) for t in text.split(",") if t.strip()]


def parse_grid(text: str) -> wg.Grid:
    """Grid spec 'smin:smax:ns,qmin:qmax:nq'."""
    try:
        s_part, q_part = text.split(",")
        s_min, s_max, ns = s_part.split(":")
        q_min, q_max, nq = q_part.split(":")
        return wg.Grid(parse_number(s_min), parse_number(s_max),
                       parse_number(q_min), parse_number(q_max),
                       int(ns), int(nq))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"bad grid spec {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# config file and flag merging

_KNOWN_KEYS = {
    "regime", "ell", "lambda", "lambda-min", "lambda-max", "theta", "phi",
    "tau", "tau-steps", "grid", "truncation-K", "mixed", "out", "format",
    "ordering",
}


def read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def setting(args, config, key, default=None, convert=str):
    """Flag > config file > default.  Flags live under underscore names,
    config keys under dash names."""
    flag_val = getattr(args, key.replace("-", "_"), None)
    if flag_val is not None:
        return flag_val
    cfg_key = key.replace("_", "-")
    if cfg_key in config:
        raw = config[cfg_key]
        if convert is bool:
            return str(raw).lower() in ("1", "true", "yes")
        return convert(raw)
    return default


# ---------------------------------------------------------------------------
# deterministic writers


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    xf = float(x)
    return "nan" if math.isnan(xf) else format(xf, ".17g")


def _atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _header_lines(command: str, config_echo: dict, columns) -> list[str]:
    cfg = " ".join(f"{k}={v}" for k, v in sorted(config_echo.items()))
    return [f"ptphase {__version__}", f"command: {command}", f"config: {cfg}",
            "columns: " + ",".join(columns)]


def write_table(path, command, config_echo, columns, rows, fmt="csv"):
    if fmt == "csv":
        lines = [f"# {h}" for h in _header_lines(command, config_echo, columns)]
        lines.append(",".join(columns))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        _atomic_write(path, "\n".join(lines) + "\n")
    elif fmt == "json":
        payload = {
            "tool": f"ptphase {__version__}",
            "command": command,
            "config": {k: str(v) for k, v in sorted(config_echo.items())},
            "columns": list(columns),
            "rows": [[(None if (isinstance(v, float) and math.isnan(v)) else
                       (float(v) if isinstance(v, (float, np.floating)) else
                        (int(v) if isinstance(v, (bool, np.bool_, int, np.integer)) else v)))
                      for v in row] for row in rows],
        }
        _atomic_write(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def write_json_sidecar(path, payload):
    _atomic_write(path, json.dumps(payload, indent=1, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# shared scenario pieces


def _state_from(args, config) -> TwoLevelState:
    theta = setting(args, config, "theta", math.pi / 4, parse_number)
    phi = setting(args, config, "phi", 0.0, parse_number)
    mixed = setting(args, config, "mixed", False, bool)
    return TwoLevelState.mixed(theta) if mixed else TwoLevelState.pure(theta, phi)


def _tau_list(args, config) -> list[float]:
    steps = setting(args, config, "tau_steps", None, parse_tau_steps)
    if steps is not None:
        return steps
    return [setting(args, config, "tau", 0.0, parse_number)]


def _echo(**kv) -> dict:
    out = {}
    for k, v in kv.items():
        if isinstance(v, TwoLevelState):
            out["state"] = f"{v.kind}(theta={v.theta:.12g},phi={v.varphi:.12g})"
        elif isinstance(v, wg.Grid):
            out["grid"] = (f"{v.s_min:g}:{v.s_max:g}:{v.ns},"
                           f"{v.q_min:g}:{v.q_max:g}:{v.nq}")
        else:
            out[k] = v
    return out


def _multi_tau_path(base: Path, i: int, many: bool) -> Path:
    if not many:
        return base
    return base.with_name(f"{base.stem}_tau{i:02d}{base.suffix}")


# ---------------------------------------------------------------------------
# subcommands


def run_classical(args, config) -> int:
    regime_name = setting(args, config, "regime", "bound")
    if regime_name in ("bound", "separatrix"):
        param = setting(args, config, "ell", 2.0, parse_number)
    else:
        param = float(setting(args, config, "lambda", 1, int))
    regime = ClassicalRegime(regime_name, param)
    steps = setting(args, config, "tau_steps", None, parse_tau_steps)
    single = setting(args, config, "tau", None, parse_number)
    if steps is not None:
        taus = steps
    elif single is not None:
        taus = [single]
    else:
        taus = list(np.linspace(0.0, 2 * math.pi, 257))
    # H is evaluated with the well depth the closed form belongs to, p*(p+1),
    # so the column displays the conserved value of each regime
    depth = param * (param + 1)
    rows = []
    for tau in taus:
        p = classical_trajectory(regime, tau)
        rows.append((tau, p.s, p.q, p.q**2 - depth / math.cosh(p.s) ** 2))
    out = Path(setting(args, config, "out", "classical.csv"))
    fmt = setting(args, config, "format", "csv")
    write_table(out, "classical",
                _echo(regime=regime_name, parameter=param),
                ("tau", "s", "q", "H"), rows, fmt)
    print(f"wrote {out}")
    return 0


def _grid_rows(grid: wg.Grid, *fields):
    """Row-major with s fastest: outer loop q, inner loop s."""
    s_vals, q_vals = grid.s_values, grid.q_values
    rows = []
    for j in range(grid.nq):
        for i in range(grid.ns):
            rows.append((s_vals[i], q_vals[j]) + tuple(f[i, j] for f in fields))
    return rows


def run_wigner(args, config) -> int:
    params = PTParams(setting(args, config, "lambda", 2, int))
    state = _state_from(args, config)
    grid = setting(args, config, "grid", wg.Grid.square(3.0, 101), parse_grid)
    taus = _tau_list(args, config)
    out = Path(setting(args, config, "out", "wigner.csv"))
    fmt = setting(args, config, "format", "csv")
    for i, tau in enumerate(taus):
        field = wg.sample_field(params, state, tau, grid)
        path = _multi_tau_path(out, i, len(taus) > 1)
        write_table(path, "wigner",
                    _echo(lam=params.lam, state=state, tau=tau, grid=grid,
                          box_integral=f"{field.meta['box_integral']:.12g}"),
                    ("s", "q", "W"), _grid_rows(grid, field.values), fmt)
        print(f"wrote {path}")
    return 0


def run_flow(args, config) -> int:
    params = PTParams(setting(args, config, "lambda", 2, int))
    state = _state_from(args, config)
    grid = setting(args, config, "grid", wg.Grid.square(3.0, 101), parse_grid)
    k = setting(args, config, "truncation_K", fl.DEFAULT_TRUNCATION, int)
    taus = _tau_list(args, config)
    out = Path(setting(args, config, "out", "flow.csv"))
    fmt = setting(args, config, "format", "csv")
    for i, tau in enumerate(taus):
        field = fl.sample_flow(params, state, tau, grid, k)
        path = _multi_tau_path(out, i, len(taus) > 1)
        write_table(path, "flow",
                    _echo(lam=params.lam, state=state, tau=tau, grid=grid, K=k),
                    ("s", "q", "W", "J_s", "J_q"),
                    _grid_rows(grid, field.w, field.j_s, field.j_q), fmt)
        points = fl.find_stagnation_points(field)
        sidecar = path.with_suffix(path.suffix + ".stagnation.json")
        write_json_sidecar(sidecar, {
            "tool": f"ptphase {__version__}",
            "lam": params.lam, "tau": tau, "truncation_K": k,
            "points": [{"s": p.location.s, "q": p.location.q,
                        "index": p.poincare_index, "kind": p.kind}
                       for p in points],
        })
        print(f"wrote {path} (+{sidecar.name}, {len(points)} stagnation points)")
    return 0


def run_liouvillian(args, config) -> int:
    params = PTParams(setting(args, config, "lambda", 2, int))
    state = _state_from(args, config)
    grid = setting(args, config, "grid", wg.Grid.square(3.0, 101), parse_grid)
    k = setting(args, config, "truncation_K", fl.DEFAULT_TRUNCATION, int)
    taus = _tau_list(args, config)
    out = Path(setting(args, config, "out", "liouvillian.csv"))
    fmt = setting(args, config, "format", "csv")
    for i, tau in enumerate(taus):
        vals, mask, w = fl.sample_liouvillian(params, state, tau, grid, k)
        path = _multi_tau_path(out, i, len(taus) > 1)
        write_table(path, "liouvillian",
                    _echo(lam=params.lam, state=state, tau=tau, grid=grid, K=k),
                    ("s", "q", "W", "arctan_div_u", "mask"),
                    _grid_rows(grid, w, vals, mask), fmt)
        print(f"wrote {path}")
    return 0


_INFO_STATES = (
    ("ground", lambda: TwoLevelState.pure(math.pi / 2)),
    ("excited", lambda: TwoLevelState.pure(0.0)),
    ("mixture", lambda: TwoLevelState.mixed(math.pi / 4)),
    ("superposition", lambda: TwoLevelState.pure(math.pi / 4, 0.0)),
)


def run_infoprofile(args, config) -> int:
    lo = setting(args, config, "lambda_min", 2, int)
    hi = setting(args, config, "lambda_max", 20, int)
    rows = []
    for lam in range(lo, hi + 1):
        params = PTParams(lam)
        for name, mk in _INFO_STATES:
            state = mk()
            mt = ip.moments(params, state)
            kr = ip.kurtosis(mt)
            cov = ip.covariance(mt)
            delta = ip.entropic_nongaussianity(cov, state)
            rows.append((lam, name,
                         kr.formula_s, kr.formula_q, kr.excess_s, kr.excess_q,
                         kr.ratio_s, kr.ratio_q, cov.det,
                         ip.gaussian_entropy(math.sqrt(max(cov.det, 0.25))),
                         state.entropy(), delta))
    out = Path(setting(args, config, "out", "infoprofile.csv"))
    write_table(out, "infoprofile", _echo(lambda_min=lo, lambda_max=hi),
                ("lambda", "state", "kurt_formula_s", "kurt_formula_q",
                 "kurt_excess_s", "kurt_excess_q", "kurt_ratio_s", "kurt_ratio_q",
                 "det_sigma", "gaussian_entropy", "shannon_entropy", "delta"),
                rows, setting(args, config, "format", "csv"))
    print(f"wrote {out}")
    return 0


def run_bipartite(args, config) -> int:
    lo = setting(args, config, "lambda_min", 2, int)
    hi = setting(args, config, "lambda_max", 20, int)
    ordering = setting(args, config, "ordering", "weyl")
    rows = []
    for lam in range(lo, hi + 1):
        params = PTParams(lam)
        cov = bp.bipartite_covariance(params)
        rep = bp.separability_report(params, ordering)
        rows.append((lam, cov.alpha_s, cov.alpha_q, cov.gamma_s, cov.gamma_q,
                     rep.d_minus, rep.d_plus, rep.d_tilde_minus, rep.d_tilde_plus,
                     rep.det_m_ppt, rep.det_simon_mod, rep.det_duan,
                     rep.verdicts["uncertainty_ok"], rep.verdicts["ppt_separable"],
                     rep.verdicts["moments_separable_consistent"]))
    out = Path(setting(args, config, "out", "bipartite.csv"))
    write_table(out, "bipartite", _echo(lambda_min=lo, lambda_max=hi, ordering=ordering),
                ("lambda", "alpha_s", "alpha_q", "gamma_s", "gamma_q",
                 "d_minus", "d_plus", "d_tilde_minus", "d_tilde_plus",
                 "det_M_ppt", "det_simon_mod", "det_duan",
                 "uncertainty_ok", "ppt_separable", "moments_separable_consistent"),
                rows, setting(args, config, "format", "csv"))
    print(f"wrote {out}")
    return 0


def run_validate(args, config) -> int:
    """Condensed oracle cross-check suite (the full suite lives in the tests)."""
    from .ptsystem import eigenstate
    failures = 0

    def check(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    for lam in (2, 3):
        params = PTParams(lam)
        pts = [(-1.3, 0.4), (0.2, -1.1), (0.9, 1.7)]
        worst = 0.0
        for s, q in pts:
            closed = wg.wigner_component(params, 0, 0, s, q)
            ref = wg.wigner_oracle(lambda x: eigenstate(params, 0, x), s, q,
                                   decay=lam)
            worst = max(worst, abs(closed - ref))
        check(f"ground-state closed form vs defining integral (lam={lam})",
              worst < 1e-8)

    for lam in range(2, 9):
        params = PTParams(lam)
        ok = (abs(wg.wigner_component(params, 0, 0, 0.0, 0.0) - 1 / math.pi) < 1e-10
              and abs(wg.wigner_component(params, 1, 1, 0.0, 0.0) + 1 / math.pi) < 1e-10)
        check(f"origin identities +-1/pi (lam={lam})", ok)

    params = PTParams(3)
    state = TwoLevelState.pure(math.pi / 3, 0.2)
    mt_closed = ip.moments(params, state)
    mt_wf = ip.moments(params, state, method="wavefunction")
    check("closed-form moments vs wave-function quadrature (lam=3)",
          abs(mt_closed.m2_s - mt_wf.m2_s) < 1e-8
          and abs(mt_closed.m2_q - mt_wf.m2_q) < 1e-8)

    cov = bp.bipartite_covariance(PTParams(2))
    s1 = bp.symplectic_eigenvalues(cov)
    s2 = bp.symplectic_from_invariants(cov)
    check("symplectic eigenvalue routes agree (lam=2)",
          abs(s1.d_minus - s2.d_minus) < 1e-12
          and abs(s1.d_tilde_minus - s2.d_tilde_minus) < 1e-12)

    mm = bp.build_moments_matrix(PTParams(2), transpose_B=True)
    oracle = bp.moments_matrix_oracle(PTParams(2), transpose_B=True, n=24)
    check("moments matrix vs 4-D quadrature oracle (lam=2)",
          float(np.max(np.abs(mm.m - oracle))) < 1e-2)

    print(f"{'OK' if failures == 0 else 'FAILED'}: {failures} failure(s)")
    return 0 if failures == 0 else 3


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptphase",
        description="Phase-space portraits of hyperbolic quantum-well two-level systems")
    sub = parser.add_subparsers(dest="command", required=True)
    runners = {
        "classical": run_classical, "wigner": run_wigner, "flow": run_flow,
        "liouvillian": run_liouvillian, "infoprofile": run_infoprofile,
        "bipartite": run_bipartite, "validate": run_validate,
    }
    for name, fn in runners.items():
        p = sub.add_parser(name)
        p.set_defaults(runner=fn)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--lambda", dest="lam", type=int, help="well index")
        p.add_argument("--lambda-min", dest="lambda_min", type=int)
        p.add_argument("--lambda-max", dest="lambda_max", type=int)
        p.add_argument("--theta", type=parse_number, help="mixing angle (pi allowed)")
        p.add_argument("--phi", type=parse_number, help="relative phase")
        p.add_argument("--mixed", action="store_const", const=True, default=None,
                       help="statistical mixture instead of a superposition")
        p.add_argument("--tau", type=parse_number)
        p.add_argument("--tau-steps", dest="tau_steps", type=parse_tau_steps,
                       help="comma list of tau values or start:stop:count")
        p.add_argument("--grid", type=parse_grid,
                       help="smin:smax:ns,qmin:qmax:nq")
        p.add_argument("--truncation-K", dest="truncation_K", type=int)
        p.add_argument("--regime", choices=("bound", "separatrix", "unbound"))
        p.add_argument("--ell", type=parse_number, help="classical regime parameter")
        p.add_argument("--ordering", choices=("weyl", "operator"))
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    # argparse stores --lambda under 'lam'; present it to setting() as 'lambda'
    args.__dict__.setdefault("lambda", getattr(args, "lam", None))
    try:
        config = read_config(args.config) if args.config else {}
        return args.runner(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (wg.OracleConvergenceError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
