"""Sweep over supercells of fixed size, with an on-disk moment cache."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
import hashlib
import json
import logging
import os
from pathlib import Path
import tempfile
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import kpm
from .kubo import (TransportConfig, ccc_moments, ccc_node_weights,
                   conductivity_from_weights, current_in_eigenbasis,
                   eigendecompose)
from .lattice import scan_ratios, supercell_params
from .model import ModelParams, assemble_current, assemble_supercell

__all__ = ["ScanConfig", "RatioRecord", "GridResult", "ScanError", "run_scan",
           "compute_ratio", "cache_key", "write_cache", "read_cache",
           "moments_cache_roundtrip", "CACHE_FORMAT_VERSION"]

log = logging.getLogger(__name__)

CACHE_FORMAT_VERSION = 1
QUANTITIES = frozenset({"dos", "conductivity", "integrated_dos"})


class ScanError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScanConfig:
    """Everything a scan needs; only ``N`` has no default."""

    N: int
    alpha_min: float = 1 / 6
    alpha_max: float = 6.0
    M: int = 1000
    model: ModelParams = field(default_factory=ModelParams)
    transport: TransportConfig = field(default_factory=TransportConfig)
    mu_grid: tuple = (-2.5, 2.5, 21)
    epsilon_rescale: float = 0.01
    quantities: frozenset = frozenset({"dos"})
    workers: int = 1
    output_dir: Path = None
    cache: bool = False

    def __post_init__(self):
        if self.N < 6:
            raise ValueError("N must be >= 6")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if int(self.mu_grid[2]) < 1:
            raise ValueError("mu_steps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        unknown = set(self.quantities) - QUANTITIES
        if unknown:
            raise ValueError(f"unknown quantities: {sorted(unknown)}")
        if "integrated_dos" in self.quantities and "conductivity" not in self.quantities:
            raise ValueError("quantity integrated_dos pairs n with sigma and needs conductivity")
        if not self.alpha_min < self.alpha_max:
            raise ValueError("alpha_min must be < alpha_max")
        if not 0 < self.epsilon_rescale < 1:
            raise ValueError("epsilon_rescale must lie in (0, 1)")

    @property
    def mu_values(self):
        lo, hi, n = self.mu_grid
        return np.linspace(lo, hi, int(n))

    @property
    def wants_conductivity(self):
        return "conductivity" in self.quantities

    @property
    def cache_dir(self):
        if not self.cache:
            return None
        return Path(self.output_dir or ".") / "cache"


@dataclass(eq=False)
class RatioRecord:
    p: int
    q: int
    moments: kpm.SpectralMoments
    x: np.ndarray
    gamma: np.ndarray
    ids: np.ndarray
    Gamma: np.ndarray = None
    mu_values: np.ndarray = None
    sigma: np.ndarray = None
    ids_at_mu: np.ndarray = None
    from_cache: bool = False

    @property
    def alpha(self):
        return self.p / self.q

    @property
    def energies(self):
        return self.moments.a * self.x + self.moments.b

    @property
    def nu(self):
        a, b = self.moments.a, self.moments.b
        return self.gamma / (np.pi * np.sqrt(a * a - (self.energies - b) ** 2))

    def finite(self):
        arrays = [self.gamma, self.ids, self.nu]
        if self.sigma is not None:
            arrays += [self.sigma, self.ids_at_mu]
        return all(np.all(np.isfinite(a)) for a in arrays)


@dataclass(eq=False)
class GridResult:
    config: ScanConfig
    records: list
    failures: list
    elapsed: float = 0.0

    def record(self, p, q):
        for r in self.records:
            if (r.p, r.q) == (p, q):
                return r
        raise KeyError((p, q))


def cache_key(cfg, p, q):
    m = cfg.model
    return {"N": int(p + q), "p": int(p), "q": int(q), "M": int(cfg.M), "W": float(m.W),
            "sigma": float(m.sigma), "cutoff_sigmas": float(m.cutoff_sigmas),
            "epsilon": float(cfg.epsilon_rescale)}


def _cache_path(cache_dir, key):
    digest = hashlib.sha1(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]
    return Path(cache_dir) / f"moments_N{key['N']}_p{key['p']}_q{key['q']}_{digest}.json"


def _num(x):
    return format(float(x), ".17g")


def _dump(key, sm):
    lines = ["{", f'  "format_version": {CACHE_FORMAT_VERSION},']
    for k, v in key.items():
        lines.append(f'  "{k}": {v if isinstance(v, int) else _num(v)},')
    lines.append(f'  "a": {_num(sm.a)},')
    lines.append(f'  "b": {_num(sm.b)},')
    lines.append('  "mu": [' + ", ".join(_num(v) for v in sm.mu) + "]"
                 + ("," if sm.ccc is not None else ""))
    if sm.ccc is not None:
        rows = ",\n    ".join("[" + ", ".join(_num(v) for v in row) + "]" for row in sm.ccc)
        lines.append('  "ccc": [\n    ' + rows + "\n  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_cache(cache_dir, key, sm):
    """Write one moment record atomically; concurrent writers of distinct keys never collide."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = _cache_path(cache_dir, key)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(_dump(key, sm))
    os.replace(tmp, path)
    return path


def read_cache(cache_dir, key, need_ccc=False):
    """Cached moments for ``key``, or ``None`` on any mismatch."""
    path = _cache_path(cache_dir, key)
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError):
        return None
    if data.get("format_version") != CACHE_FORMAT_VERSION:
        return None
    if any(data.get(k) != v for k, v in key.items()):
        return None
    ccc = data.get("ccc")
    if need_ccc and ccc is None:
        return None
    return kpm.SpectralMoments(a=data["a"], b=data["b"], M=key["M"],
                               mu=np.array(data["mu"], float),
                               ccc=None if ccc is None else np.array(ccc, float))


def moments_cache_roundtrip(cache_dir, key, sm):
    write_cache(cache_dir, key, sm)
    return read_cache(cache_dir, key, need_ccc=sm.ccc is not None)


def _moments(cfg, p, q):
    sp = supercell_params(p, q)
    op = assemble_supercell(cfg.model, sp)
    lam, V = eigendecompose(op)
    a, b = kpm.rescale_bounds(lam, cfg.epsilon_rescale)
    sm = kpm.dos_moments(lam, a, b, cfg.M)
    if cfg.wants_conductivity:
        J = current_in_eigenbasis(V, assemble_current(op))
        ccc = ccc_moments((lam - b) / a, J, cfg.M)
        sm = kpm.SpectralMoments(a=a, b=b, M=cfg.M, mu=sm.mu, ccc=ccc)
    return sm


def compute_ratio(cfg, p, q):
    """Full pipeline for one supercell: moments, node weights, conductivity."""
    with threadpool_limits(limits=1):
        key = cache_key(cfg, p, q)
        sm, hit = None, False
        if cfg.cache_dir is not None:
            sm = read_cache(cfg.cache_dir, key, need_ccc=cfg.wants_conductivity)
            hit = sm is not None
        if sm is None:
            sm = _moments(cfg, p, q)
            if cfg.cache_dir is not None:
                write_cache(cfg.cache_dir, key, sm)
        x, gamma = kpm.dos_nodes(sm)
        rec = RatioRecord(p=p, q=q, moments=sm, x=x, gamma=gamma,
                          ids=kpm.integrated_dos(x, gamma), from_cache=hit)
        if cfg.wants_conductivity:
            Gamma = ccc_node_weights(sm)
            mus = cfg.mu_values
            t = cfg.transport
            rec.Gamma = Gamma
            rec.mu_values = mus
            rec.sigma = np.array([
                conductivity_from_weights(Gamma, sm.a, sm.b,
                                          TransportConfig(t.beta, float(m), t.tau_rel, t.omega_hat))
                for m in mus])
            rec.ids_at_mu = kpm.integrated_dos_at(sm, mus)
    return rec


def _safe_compute(args):
    cfg, p, q = args
    try:
        return compute_ratio(cfg, p, q), None
    except Exception as exc:  # per-ratio failures are reported, not fatal
        return None, (p, q, f"{type(exc).__name__}: {exc}")


def run_scan(cfg, ratios=None):
    """Run every ratio of the scan and collect records in ascending ``p``.

    ``ratios`` overrides the list from :func:`scan_ratios`.
    """
    t0 = time.perf_counter()
    if ratios is None:
        ratios = scan_ratios(cfg.N, cfg.alpha_min, cfg.alpha_max)
    ratios = sorted(ratios)
    if not ratios:
        raise ScanError("no ratios in range")
    jobs = [(cfg, p, q) for p, q in ratios]
    if cfg.workers == 1:
        results = [_safe_compute(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_safe_compute, jobs))
    records, failures = [], []
    for rec, fail in results:
        if fail is not None:
            log.warning("ratio p=%d q=%d failed: %s", *fail)
            failures.append(fail)
        else:
            records.append(rec)
    if not records:
        raise ScanError(f"all {len(ratios)} ratios failed")
    bad = [(r.p, r.q) for r in records if not r.finite()]
    if bad:
        raise ScanError(f"non-finite values for ratios {bad}")
    return GridResult(config=cfg, records=records, failures=failures,
                      elapsed=time.perf_counter() - t0)


def config_echo(cfg):
    d = asdict(cfg)
    d["quantities"] = sorted(cfg.quantities)
    d["output_dir"] = None if cfg.output_dir is None else str(cfg.output_dir)
    return d
