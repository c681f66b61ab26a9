"""Command-line front end: ``scan``, ``single`` and ``check``.

Exit codes: 0 success, 1 failed check or numerical failure, 2 usage or
configuration error, 3 environment error.
"""

import argparse
from fractions import Fraction
import logging
import os
from pathlib import Path
import sys
import tempfile

import numpy as np

from .kubo import TransportConfig
from .model import ModelParams
from .scan import ScanConfig, ScanError, run_scan

__all__ = ["ConfigError", "EnvironmentFailure", "parse_config", "emit_csv",
           "run_checks", "main", "DEFAULTS"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_MATH, EXIT_USAGE, EXIT_ENV = 0, 1, 2, 3


class ConfigError(ValueError):
    """Bad configuration; ``key`` names the offending entry."""

    def __init__(self, key, msg):
        super().__init__(f"{key}: {msg}")
        self.key = key


class EnvironmentFailure(RuntimeError):
    pass


def _number(s):
    # accepts fractions such as 1/6 as well as plain decimals
    return float(Fraction(s.strip())) if "/" in s else float(s)


def _integer(s):
    v = _number(s)
    if v != int(v):
        raise ValueError(f"not an integer: {s!r}")
    return int(v)


def _boolean(s):
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _quantities(s):
    return frozenset(t.strip() for t in s.split(",") if t.strip())


# key -> (parser, default); N has no default
DEFAULTS = {
    "N": (_integer, None),
    "M": (_integer, 1000),
    "W": (_number, 0.5),
    "sigma": (_number, 0.25),
    "cutoff_sigmas": (_number, 6.0),
    "beta": (_number, 250.0),
    "tau": (_number, 250.0),
    "omega": (_number, 0.0),
    "epsilon": (_number, 0.01),
    "alpha_min": (_number, 1 / 6),
    "alpha_max": (_number, 6.0),
    "mu_min": (_number, -2.5),
    "mu_max": (_number, 2.5),
    "mu_steps": (_integer, 21),
    "quantities": (_quantities, frozenset({"dos", "conductivity", "integrated_dos"})),
    "workers": (_integer, 1),
    "cache": (_boolean, False),
}


def _pairs(lines, source):
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"expected key=value ({source}:{lineno})")
        key, value = (t.strip() for t in line.split("=", 1))
        yield key, value


def _build(values, output_dir):
    def need(*keys):
        return [values[k] for k in keys]

    try:
        model = ModelParams(*need("W", "sigma", "cutoff_sigmas"))
    except ValueError as exc:
        raise ConfigError(str(exc).split()[0], str(exc)) from None
    try:
        transport = TransportConfig(beta=values["beta"], tau_rel=values["tau"],
                                    omega_hat=values["omega"])
    except ValueError as exc:
        first = str(exc).split()[0]
        key = {"tau_rel": "tau"}.get(first, first)
        raise ConfigError(key, str(exc)) from None
    try:
        return ScanConfig(
            N=values["N"], alpha_min=values["alpha_min"], alpha_max=values["alpha_max"],
            M=values["M"], model=model, transport=transport,
            mu_grid=(values["mu_min"], values["mu_max"], values["mu_steps"]),
            epsilon_rescale=values["epsilon"], quantities=values["quantities"],
            workers=values["workers"], output_dir=output_dir, cache=values["cache"])
    except ValueError as exc:
        msg = str(exc)
        first = msg.split()[0].rstrip(":")
        key = {"epsilon_rescale": "epsilon", "unknown": "quantities",
               "quantity": "quantities"}.get(first, first)
        raise ConfigError(key, msg) from None


def parse_config(path=None, overrides=(), output_dir=None, require_N=True):
    """Read a flat ``key=value`` file, apply ``overrides``, return a :class:`ScanConfig`.

    Blank lines and ``#`` comments are ignored. ``overrides`` are
    ``"key=value"`` strings applied after the file. Every error is a
    :class:`ConfigError` naming the offending key.
    """
    raw = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        raw.update(_pairs(text.splitlines(), path))
    raw.update(_pairs(overrides, "--set"))
    values = {k: d for k, (_, d) in DEFAULTS.items()}
    for key, text in raw.items():
        if key not in DEFAULTS:
            raise ConfigError(key, "unknown key")
        try:
            values[key] = DEFAULTS[key][0](text)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(key, f"malformed value {text!r}") from None
    if values["N"] is None:
        if require_N:
            raise ConfigError("N", "required")
        values["N"] = 6
    return _build(values, output_dir)


def _g(x):
    return format(float(x), ".10g")


def _dos_rows(gr):
    for r in sorted(gr.records, key=lambda r: r.p):
        E, nu = r.energies, r.nu
        for k in range(len(E)):
            yield f"{_g(r.alpha)},{r.p},{r.q},{_g(E[k])},{_g(nu[k])}"


def _conductivity_rows(gr):
    for r in sorted(gr.records, key=lambda r: r.p):
        for mu, s in zip(r.mu_values, r.sigma):
            yield f"{_g(r.alpha)},{r.p},{r.q},{_g(mu)},{_g(s.real)},{_g(s.imag)}"


def _ids_rows(gr):
    for r in sorted(gr.records, key=lambda r: r.p):
        for n, s in zip(r.ids_at_mu, r.sigma):
            yield f"{_g(r.alpha)},{r.p},{r.q},{_g(n)},{_g(s.real)}"


def emit_csv(gr, out_dir):
    """Write the CSV files requested by ``gr.config.quantities``; returns their paths.

    The directory is created and probed for writability before any file is
    written. Each file is written to a temporary name and renamed into place.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        fd, probe = tempfile.mkstemp(dir=out, suffix=".probe")
        os.close(fd)
        os.unlink(probe)
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc.strerror}") from None

    q = gr.config.quantities
    plan = [("dos.csv", "alpha,p,q,E,nu", _dos_rows)]
    if "conductivity" in q:
        plan.append(("conductivity.csv", "alpha,p,q,mu,sigma_re,sigma_im", _conductivity_rows))
    if "integrated_dos" in q:
        plan.append(("ids.csv", "alpha,p,q,n,sigma_re", _ids_rows))

    written = []
    for name, header, rows in plan:
        text = "\n".join([header, *rows(gr)]) + "\n"
        fd, tmp = tempfile.mkstemp(dir=out, suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out / name)
        written.append(out / name)
    return written


def _probe_environment():
    """Raise :class:`EnvironmentFailure` if the dense eigensolver is unusable."""
    try:
        import scipy.fft  # noqa: F401
        lam = np.linalg.eigvalsh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    except (ImportError, np.linalg.LinAlgError, OSError) as exc:
        raise EnvironmentFailure(f"eigensolver backend unavailable: {exc}") from exc
    if not np.allclose(lam, [1.0, 3.0]):
        raise EnvironmentFailure("eigensolver backend returns wrong eigenvalues")


def _check_algebra():
    from .algebra import adjoint, derive_parallel, derive_perpendicular, star_product
    from .lattice import lattice_constants
    from .testing import block_values, random_element, sample_points

    rng = np.random.default_rng(20240601)
    l1, l2 = lattice_constants((1 + 5 ** 0.5) / 2)
    worst = 0.0
    for _ in range(4):
        f, g, h = (random_element(rng, l1, l2) for _ in range(3))
        pts = sample_points(rng, l1, l2, 16)
        pairs = [
            (star_product(star_product(f, g), h), star_product(f, star_product(g, h))),
            (adjoint(adjoint(f)), f),
            (adjoint(star_product(f, g)), star_product(adjoint(g), adjoint(f))),
        ]
        for D in (derive_parallel, derive_perpendicular):
            pairs.append((D(star_product(f, g)),
                          star_product(D(f), g) + star_product(f, D(g))))
        for lhs, rhs in pairs:
            a, b = block_values(lhs, pts), block_values(rhs, pts)
            worst = max(worst, np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a))))
    return worst < 1e-12, f"max relative deviation {worst:.2e}"


def _mini_scan():
    return run_scan(ScanConfig(N=34, M=64, quantities=frozenset({"dos"})))


def _check_normalization():
    # sums over the nodes see only mu_0 g_0, whatever the damping does to higher moments
    gr = _mini_scan()
    worst = max(max(abs(r.moments.mu[0] - 1), abs(r.gamma.mean() - 1),
                    abs(r.ids[np.argmax(r.x)] - 1))
                for r in gr.records)
    return worst < 1e-12, f"{len(gr.records)} ratios, max deviation {worst:.2e}"


def _check_monotone():
    for r in _mini_scan().records:
        if np.any(np.diff(r.ids[np.argsort(r.x)]) < -1e-12):
            return False, f"integrated DoS decreases for p={r.p}, q={r.q}"
    return True, "non-decreasing for every ratio"


def _check_free_dos():
    # M < p keeps the moments of the finite ring equal to the infinite-chain ones
    from .kpm import dos_moments, dos_nodes, rescale_bounds
    from .kubo import eigendecompose
    from .lattice import supercell_params
    from .model import assemble_supercell

    sp = supercell_params(120, 120)
    lam, _ = eigendecompose(assemble_supercell(ModelParams(W=0.0), sp))
    a, b = rescale_bounds(lam)
    sm = dos_moments(lam, a, b, 100)
    x, gamma = dos_nodes(sm)
    E = a * x + b
    nu = gamma / (np.pi * np.sqrt(a * a - (E - b) ** 2))
    sel = np.abs(E) <= 1.8
    err = np.max(np.abs(nu[sel] - 1 / (np.pi * np.sqrt(4 - E[sel] ** 2))))
    return err < 0.02, f"max deviation {err:.2e}"


def _check_kubo():
    from .kpm import SpectralMoments, dos_moments, rescale_bounds
    from .kubo import (ccc_moments, conductivity_exact, conductivity_kpm,
                       current_in_eigenbasis, eigendecompose)
    from .lattice import supercell_params
    from .model import assemble_current, assemble_supercell

    # beta = tau = 10 keeps both energy windows wider than the M=1000 broadening
    op = assemble_supercell(ModelParams(), supercell_params(34, 21))
    lam, V = eigendecompose(op)
    a, b = rescale_bounds(lam)
    J = current_in_eigenbasis(V, assemble_current(op))
    M = 1000
    sm = dos_moments(lam, a, b, M)
    sm = SpectralMoments(a=a, b=b, M=M, mu=sm.mu, ccc=ccc_moments((lam - b) / a, J, M))
    worst = 0.0
    for mu in (-1.0, 0.0, 1.0):
        tc = TransportConfig(beta=10.0, mu=mu, tau_rel=10.0)
        ex = conductivity_exact(lam, J, tc, a=a)
        worst = max(worst, abs(conductivity_kpm(sm, tc) - ex) / abs(ex))
    return worst < 0.05, f"max relative error {worst:.2e}"


CHECKS = [
    ("algebra axioms", _check_algebra),
    ("normalization identities", _check_normalization),
    ("integrated DoS monotone", _check_monotone),
    ("free-chain DoS", _check_free_dos),
    ("KPM vs exact conductivity", _check_kubo),
]


def run_checks(stream=None):
    """Run the fast invariant suite; returns an exit code."""
    stream = stream or sys.stdout
    try:
        _probe_environment()
    except EnvironmentFailure as exc:
        print(f"ENVIRONMENT ERROR: {exc}", file=stream)
        return EXIT_ENV
    failed = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except EnvironmentFailure as exc:
            print(f"ENVIRONMENT ERROR in {name}: {exc}", file=stream)
            return EXIT_ENV
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=stream)
    return EXIT_MATH if failed else EXIT_OK


def _parser():
    ap = argparse.ArgumentParser(
        prog="bilayer-kpm",
        description="Density of states and Kubo conductivity of an incommensurate bilayer chain.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    sc = sub.add_parser("scan", help="scan all ratios p/q with p + q = N")
    sc.add_argument("--config", required=True, type=Path)
    sc.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    sc.add_argument("--out", required=True, type=Path)
    si = sub.add_parser("single", help="one supercell")
    si.add_argument("--p", required=True, type=int)
    si.add_argument("--q", required=True, type=int)
    si.add_argument("--config", type=Path)
    si.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    si.add_argument("--out", required=True, type=Path)
    sub.add_parser("check", help="run the fast invariant suite")
    return ap


def main(argv=None):
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "check":
        return run_checks()

    try:
        if args.command == "scan":
            cfg = parse_config(args.config, args.set, output_dir=args.out)
            ratios = None
        else:
            overrides = [s for s in args.set if not s.strip().startswith("N=")]
            cfg = parse_config(args.config, overrides + [f"N={args.p + args.q}"],
                               output_dir=args.out)
            ratios = [(args.p, args.q)]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        _probe_environment()
    except EnvironmentFailure as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return EXIT_ENV
    try:
        gr = run_scan(cfg, ratios)
    except ScanError as exc:
        print(f"scan failed: {exc}", file=sys.stderr)
        return EXIT_MATH
    try:
        paths = emit_csv(gr, args.out)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_ENV
    for p, q, reason in gr.failures:
        print(f"skipped p={p} q={q}: {reason}", file=sys.stderr)
    print(f"{len(gr.records)} ratios in {gr.elapsed:.1f} s; wrote "
          + ", ".join(str(p) for p in paths))
    return EXIT_MATH if gr.failures and args.command == "single" else EXIT_OK
