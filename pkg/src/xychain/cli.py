"""Command-line front end.

Every subcommand accepts ``--config FILE`` with flat ``key = value`` lines
(keys are the long flag names, ``-`` or ``_`` both accepted); flags given on
the command line override the file.  Exit status is 0 on success, 2 for
invalid input and 1 when a computation fails.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from xychain import __version__, analysis, closedform, elliptic, exactspin, quadoracle, spectrum
from xychain.errors import DomainError

OUTPUT_DIR_ENV = "XYCHAIN_OUTPUT_DIR"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Invalid command line or config file."""


# figure id -> (subcommand, preset options, plot kind)
FIGURES: dict[str, tuple[str, dict, str]] = {
    "2": ("scan", {"quantity": "energy", "alpha_range": [0.0, 2.0, 201], "gamma_range": [0.0, 1.0, 101]}, "map"),
    "3a": ("scan", {"quantity": "magnetization", "alpha_range": [0.0, 2.0, 401], "gamma_range": [1 / 3, 1.0, 3]}, "lines"),
    "3b": ("scan", {"quantity": "susceptibility", "alpha_range": [0.0, 2.0, 401], "gamma_range": [1 / 3, 1.0, 3]}, "lines"),
    "4a": ("gap", {"alpha": [0.8, 0.9], "gamma": [0.6, 0.8], "n_min": 50, "n_max": 1000}, "gap"),
    "4b": ("gap", {"alpha": [1.5, 1.3], "gamma": [0.6, 0.5], "n_min": 50, "n_max": 1000}, "gap"),
    **{
        fig: ("scan", {"quantity": "gap", "n_sites": n, "alpha_range": [0.0, 1.5, 151], "gamma_range": [0.0, 1.0, 101]}, "map")
        for fig, n in (("5a", 5), ("5b", 10), ("5c", 20), ("5d", 50))
    },
}


def _default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key = value file; flags override it")
    p.add_argument("--workers", type=int, default=_default_workers(), help="parallel evaluations")
    p.add_argument(
        "--output-dir",
        type=Path,
        default=None,
        help=f"directory for output files (default: ${OUTPUT_DIR_ENV} or the current directory)",
    )


def _add_quad_tol(p: argparse.ArgumentParser) -> None:
    p.add_argument("--abs-tol", type=float, default=quadoracle.QuadratureSpec.abs_tol)
    p.add_argument("--rel-tol", type=float, default=quadoracle.QuadratureSpec.rel_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xychain",
        description="Ground-state thermodynamics and gaps of the anisotropic XY chain in a transverse field.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="energy per site by closed form, quadrature and a cyclic-chain sum")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n-cyclic", type=int, default=10_000, help="sites in the cyclic-chain Riemann sum")
    _add_quad_tol(p)
    _add_common(p)

    p = sub.add_parser("scan", help="evaluate a quantity on an (alpha, gamma) grid and write CSV")
    p.add_argument("--figure", choices=[f for f, spec in FIGURES.items() if spec[0] == "scan"])
    p.add_argument("--quantity", choices=analysis.QUANTITIES, default="energy")
    p.add_argument("--alpha-range", type=float, nargs=3, metavar=("LO", "HI", "COUNT"), default=[0.0, 2.0, 101])
    p.add_argument("--gamma-range", type=float, nargs=3, metavar=("LO", "HI", "COUNT"), default=[0.0, 1.0, 51])
    p.add_argument("--n-sites", type=int, help="chain length for gap scans")
    p.add_argument("--boundary", choices=["open", "c-cyclic"], default="open")
    p.add_argument("--order", type=int, help="derivative order for circle-derivative scans")
    p.add_argument("--output", help="CSV file name (default: stdout, or fig<ID>.csv with --figure)")
    p.add_argument("--plot-script", action="store_true", help="also write a matplotlib script next to the CSV")
    _add_common(p)

    p = sub.add_parser("derivatives", help="derivatives of the energy on the circle alpha^2 + gamma^2 = 1")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--max-order", type=int, default=6)
    p.add_argument("--fd", action="store_true", help="add one-sided finite-difference columns from both sides")
    _add_common(p)

    p = sub.add_parser("gap", help="open or cyclic chain gap series with the a/N + Delta_inf fit")
    p.add_argument("--figure", choices=[f for f, spec in FIGURES.items() if spec[0] == "gap"])
    p.add_argument("--alpha", type=float, nargs="+", default=[1.5])
    p.add_argument("--gamma", type=float, nargs="+", default=[0.6])
    p.add_argument("--ns", type=int, nargs="+", help="explicit chain lengths (overrides the ladder)")
    p.add_argument("--n-min", type=int, default=50)
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--n-count", type=int, default=10, help="points in the geometric ladder")
    p.add_argument("--boundary", choices=["open", "c-cyclic"], default="open")
    p.add_argument("--output", help="CSV file for the series")
    p.add_argument("--plot-script", action="store_true")
    _add_common(p)

    p = sub.add_parser("verify", help="cross-check closed forms against the numerical oracles")
    p.add_argument("--quick", action="store_true", help="reduced sample sizes")
    p.add_argument("--seed", type=int, default=12345)
    _add_quad_tol(p)
    _add_common(p)

    p = sub.add_parser("expand", help="critical-line and small-gamma expansions against exact values")
    p.add_argument("--gamma", type=float, default=1 / 3, help="anisotropy for the expansion near alpha = 1")
    p.add_argument("--alpha", type=float, default=0.0, help="field for the small-gamma expansion")
    _add_common(p)
    return parser


# ----------------------------------------------------------------- config file


def read_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    entries: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key in entries:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _config_tokens(subparser: argparse.ArgumentParser, entries: dict[str, str]) -> list[str]:
    actions = {a.dest: a for a in subparser._actions if a.option_strings}
    tokens: list[str] = []
    for key, value in entries.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        flag = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"config key {key!r} expects true or false")
            continue
        tokens.append(flag)
        tokens.extend(value.replace(",", " ").split() if action.nargs else [value])
    return tokens


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config":
            return argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv: list[str]) -> tuple[argparse.Namespace, list[str]]:
    """Parse flags merged with the config file; also returns the merged argv.

    The config is merged before parsing so that it can supply required flags.
    """
    parser = build_parser()
    path = _config_path(argv)
    commands = parser._subparsers._group_actions[0].choices
    command = next((tok for tok in argv if tok in commands), None)
    if path is None or command is None:
        return parser.parse_args(argv), argv
    tokens = _config_tokens(commands[command], read_config(Path(path)))
    # config first so that later command-line flags win
    i = argv.index(command)
    merged = argv[: i + 1] + tokens + argv[i + 1 :]
    return parser.parse_args(merged), merged


def _apply_figure(args: argparse.Namespace, argv: list[str]) -> None:
    if getattr(args, "figure", None) is None:
        return
    _, preset, _ = FIGURES[args.figure]
    given = {tok.split("=", 1)[0].lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
    for key, value in preset.items():
        if key not in given:
            setattr(args, key, value)
    if getattr(args, "output", None) is None:
        args.output = f"fig{args.figure}.csv"
    args.plot_script = True


def _output_dir(args) -> Path:
    if args.output_dir is not None:
        return args.output_dir
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _output_path(args, name: str) -> Path:
    path = Path(name)
    if not path.is_absolute():
        path = _output_dir(args) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _quad_spec(args) -> quadoracle.QuadratureSpec:
    return quadoracle.QuadratureSpec(abs_tol=args.abs_tol, rel_tol=args.rel_tol)


# ----------------------------------------------------------------- commands


def cmd_energy(args, out) -> int:
    closedform.ModelParams(args.alpha, args.gamma)
    if args.n_cyclic < 2:
        raise DomainError("--n-cyclic must be >= 2")
    values = {
        "closed-form": closedform.ground_energy(args.alpha, args.gamma),
        "quadrature": quadoracle.ground_energy_integral(args.alpha, args.gamma, _quad_spec(args)),
        f"cyclic N={args.n_cyclic}": spectrum.cyclic_lambdas(args.alpha, args.gamma, args.n_cyclic).ground_energy
        / args.n_cyclic,
    }
    print(f"alpha = {args.alpha!r}  gamma = {args.gamma!r}  region = {closedform.classify(args.alpha, args.gamma).name}", file=out)
    for name, value in values.items():
        print(f"{name:>20s}  {value: .17g}", file=out)
    names = list(values)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            print(f"{'|' + a + ' - ' + b + '|':>44s}  {abs(values[a] - values[b]):.3e}", file=out)
    return EXIT_OK


def _emit_plot(args, csv_path: Path, kind: str, title: str, quantity: str, out) -> None:
    script = csv_path.with_suffix(".py")
    script.write_text(analysis.plot_script(kind, csv_path, title, quantity), encoding="utf-8")
    print(f"wrote {script}", file=out)


def cmd_scan(args, out) -> int:
    grid = analysis.ScanGrid(
        alpha_range=tuple(args.alpha_range),
        gamma_range=tuple(args.gamma_range),
        quantity=args.quantity,
        n_sites=args.n_sites,
        boundary=args.boundary,
        order=args.order,
    )
    rows = analysis.scan(grid, workers=args.workers)
    if args.output is None:
        analysis.write_csv(rows, out)
        return EXIT_OK
    path = _output_path(args, args.output)
    analysis.write_csv(rows, path)
    flagged = sum(r.status != "ok" for r in rows)
    print(f"wrote {path} ({len(rows)} rows, {flagged} flagged)", file=out)
    if args.plot_script:
        kind = FIGURES[args.figure][2] if args.figure else "map"
        title = f"Figure {args.figure}: {grid.label}" if args.figure else grid.label
        _emit_plot(args, path, kind, title, grid.label, out)
    return EXIT_OK


def cmd_derivatives(args, out) -> int:
    if not 0.0 < args.gamma < 1.0:
        raise DomainError(f"--gamma must lie in (0, 1) (got {args.gamma})")
    if not 2 <= args.max_order <= (6 if args.fd else 40):
        raise DomainError("--max-order must be in 2..6 with --fd, 2..40 otherwise")
    alpha0 = math.sqrt(1.0 - args.gamma**2)
    print(f"circle point alpha = {alpha0:.17g}, gamma = {args.gamma!r}", file=out)
    header = f"{'order':>5s}  {'d^n eps/d alpha^n':>24s}"
    if args.fd:
        header += f"  {'FD disk side':>24s}  {'+/-':>9s}  {'FD annulus side':>24s}  {'+/-':>9s}"
    print(header, file=out)
    for order in range(2, args.max_order + 1):
        line = f"{order:5d}  {closedform.circle_derivative(order, args.gamma): 24.17g}"
        if args.fd:
            for side in (-1, 1):
                d = analysis.circle_fd_derivative(order, args.gamma, side)
                line += f"  {d.value: 24.17g}  {d.error:9.2e}"
        print(line, file=out)
    return EXIT_OK


def _ladder(args) -> list[int]:
    if args.ns:
        return sorted(args.ns)
    if not 2 <= args.n_min < args.n_max:
        raise DomainError("need 2 <= --n-min < --n-max")
    return analysis.default_gap_ladder(args.n_min, args.n_max, args.n_count)


def _format_fit(fit: analysis.GapFit) -> str:
    return (
        f"N={fit.n_range[0]}..{fit.n_range[1]} ({fit.n_points} pts)  "
        f"a = {fit.a:.10g} +/- {fit.stderr_a:.2e}  "
        f"Delta_inf = {fit.delta_inf:.3e} +/- {fit.stderr_delta_inf:.2e}  "
        f"rms = {fit.residual_norm:.2e}"
    )


def cmd_gap(args, out) -> int:
    if len(args.alpha) != len(args.gamma):
        raise DomainError("--alpha and --gamma need the same number of values")
    for a, g in zip(args.alpha, args.gamma):
        closedform.ModelParams(a, g)
    ns = _ladder(args)
    all_rows = []
    for a, g in zip(args.alpha, args.gamma):
        series = analysis.gap_series(a, g, ns, args.boundary, workers=args.workers)
        all_rows += analysis.gap_series_rows(a, g, series, args.boundary)
        print(f"alpha = {a!r}  gamma = {g!r}  boundary = {args.boundary}", file=out)
        for n, d in series:
            print(f"  N = {n:5d}  Delta_N = {d:.17g}", file=out)
        fits = analysis.fit_range_sensitivity(series)
        print(f"  fit        {_format_fit(fits[0])}", file=out)
        for fit in fits[1:]:
            print(f"  sub-range  {_format_fit(fit)}", file=out)
    if args.output:
        path = _output_path(args, args.output)
        analysis.write_csv(all_rows, path)
        print(f"wrote {path}", file=out)
        if args.plot_script:
            title = f"Figure {args.figure}: gap vs N" if args.figure else "gap vs N"
            _emit_plot(args, path, "gap", title, "gap", out)
    return EXIT_OK


# ----------------------------------------------------------------- verify


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _sample_points(n: int, seed: int) -> np.ndarray:
    from scipy.stats import qmc

    pts = qmc.Halton(d=2, seed=seed).random(n)
    return np.column_stack([2.0 * pts[:, 0], pts[:, 1]])


def _check_energy(n, seed, spec):
    worst = max(
        abs(closedform.ground_energy(a, g) - quadoracle.ground_energy_integral(a, g, spec))
        for a, g in _sample_points(n, seed)
    )
    return Check(f"energy closed form vs quadrature ({n} pts)", worst < 1e-10, f"max |diff| = {worst:.2e}")


def _check_magnetization(n, seed, spec):
    worst = max(
        abs(closedform.magnetization(a, g) - quadoracle.magnetization_integral(a, g, spec))
        for a, g in _sample_points(n, seed + 1)
    )
    return Check(f"magnetization closed form vs quadrature ({n} pts)", worst < 1e-10, f"max |diff| = {worst:.2e}")


def _check_susceptibility(n, seed, spec):
    worst = 0.0
    for a, g in _sample_points(n, seed + 2):
        if abs(a - 1.0) < 1e-3 or g < 1e-3:
            continue
        exact = closedform.susceptibility(a, g)
        worst = max(worst, abs(exact - quadoracle.susceptibility_integral(a, g, spec)) / abs(exact))
    return Check(f"susceptibility closed form vs quadrature ({n} pts)", worst < 1e-8, f"max rel diff = {worst:.2e}")


def _check_circle(n):
    worst = max(
        abs(closedform.ground_energy(math.cos(t), math.sin(t)) + 0.5)
        for t in np.linspace(0.0, 0.5 * math.pi, n)
    )
    return Check(f"energy = -1/2 on the circle ({n} pts)", worst < 1e-11, f"max |diff| = {worst:.2e}")


def _check_circle_derivatives(max_order):
    bad = []
    for g in (0.3, 0.6, 0.8):
        for order in range(2, max_order + 1):
            exact = closedform.circle_derivative(order, g)
            for side in (-1, 1):
                d = analysis.circle_fd_derivative(order, g, side)
                if abs(d.value - exact) > d.error:
                    bad.append((g, order, side))
    return Check(
        f"circle derivatives 2..{max_order} vs one-sided FD", not bad, "all within FD error" if not bad else f"failed {bad}"
    )


def _check_free_fermion(sizes):
    worst = 0.0
    for n in sizes:
        for a, g in ((0.3, 0.6), (0.8, 0.6), (1.5, 0.2), (1.0, 1.0), (0.5, -0.4)):
            ed = exactspin.full_spectrum(exactspin.build(a, g, n))
            ff = spectrum.many_body_levels(spectrum.open_chain_spectrum(a, g, n))
            worst = max(worst, float(np.max(np.abs(ed - ff))))
    return Check(f"free-fermion levels vs exact diagonalization N={list(sizes)}", worst < 1e-9, f"max |diff| = {worst:.2e}")


def _check_gap_limit(n_sites):
    worst = 0.0
    for a in (0.2, 0.5, 0.7, 0.95, 1.3, 1.5):
        for g in (0.3, 0.6, 0.9):
            limit = spectrum.gap_thermo_limit(a, g)
            finite = spectrum.cyclic_lambdas(a, g, n_sites).scaled_gap
            worst = max(worst, abs(limit - finite))
    return Check(f"cyclic N*Delta_N at N={n_sites} vs thermodynamic limit", worst < 1e-4, f"max |diff| = {worst:.2e}")


def _check_legendre(n):
    worst = 0.0
    for k in np.linspace(0.01, 0.99, n):
        kp = math.sqrt(1.0 - k * k)
        e, ek = elliptic.ellip_e(k), elliptic.ellip_k(k)
        ep, ekp = elliptic.ellip_e(kp), elliptic.ellip_k(kp)
        worst = max(worst, abs(e * ekp + ep * ek - ek * ekp - 0.5 * math.pi))
    return Check(f"Legendre relation ({n} moduli)", worst < 1e-11, f"max |diff| = {worst:.2e}")


def run_checks(quick: bool, seed: int, spec: quadoracle.QuadratureSpec) -> list[Check]:
    n = 60 if quick else 500
    checks: list[Callable[[], Check]] = [
        lambda: _check_legendre(20 if quick else 100),
        lambda: _check_energy(n, seed, spec),
        lambda: _check_magnetization(n // 2, seed, spec),
        lambda: _check_susceptibility(n // 2, seed, spec),
        lambda: _check_circle(50),
        lambda: _check_circle_derivatives(4 if quick else 6),
        lambda: _check_free_fermion((4, 6) if quick else (4, 6, 8, 10)),
        lambda: _check_gap_limit(10_000 if quick else 100_000),
    ]
    results = []
    for make in checks:
        try:
            results.append(make())
        except (ArithmeticError, DomainError) as exc:
            results.append(Check(getattr(make, "__name__", "check"), False, f"raised {exc!r}"))
    return results


def cmd_verify(args, out) -> int:
    results = run_checks(args.quick, args.seed, _quad_spec(args))
    for check in results:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: {check.detail}", file=out)
    failed = sum(not c.passed for c in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=out)
    return EXIT_OK if failed == 0 else EXIT_FAILURE


# ----------------------------------------------------------------- expand


def cmd_expand(args, out) -> int:
    g = abs(args.gamma)
    print(f"susceptibility near alpha = 1 at gamma = {args.gamma!r}", file=out)
    print(f"{'alpha':>14s}  {'exact':>22s}  {'expansion':>22s}  {'rel err':>9s}", file=out)
    for side in (-1, 1):
        for e in range(2, 7):
            a = 1.0 + side * 10.0**-e
            exact = closedform.susceptibility(a, g)
            approx = closedform.chi_expansion_near_critical(a, g)
            print(f"{a:14.8f}  {exact:22.15g}  {approx:22.15g}  {abs(approx / exact - 1):9.2e}", file=out)
    print(f"\nd2 eps/d gamma^2 near gamma = 0 at alpha = {args.alpha!r}", file=out)
    print(f"{'gamma':>14s}  {'quadrature':>22s}  {'expansion':>22s}  {'rel err':>9s}", file=out)
    for e in range(1, 5):
        gg = 10.0**-e
        exact = quadoracle.d2e_dgamma2_integral(args.alpha, gg)
        approx = closedform.d2e_dgamma2_expansion(args.alpha, gg)
        print(f"{gg:14.1e}  {exact:22.15g}  {approx:22.15g}  {abs(approx / exact - 1):9.2e}", file=out)
    return EXIT_OK


COMMANDS = {
    "energy": cmd_energy,
    "scan": cmd_scan,
    "derivatives": cmd_derivatives,
    "gap": cmd_gap,
    "verify": cmd_verify,
    "expand": cmd_expand,
}


def run(argv: list[str] | None = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    try:
        args, merged = parse_args(argv)
        _apply_figure(args, merged)
        if args.workers < 1:
            raise DomainError("--workers must be >= 1")
    except SystemExit as exc:  # argparse reports usage errors this way
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except (UsageError, DomainError) as exc:
        print(f"xychain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (DomainError, UsageError) as exc:
        print(f"xychain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"xychain: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run())
