"""Block-decomposed convolution algebra of a one-dimensional bilayer.

An element is given by four kernels

* ``f11(gamma2, m)``: hop between sites of chain 1, seen from a chain-1 site
  whose view of chain 2 is the torus point ``gamma2``; ``m`` is a multiple
  of ``ell1``;
* ``f12(q)``: hop from a chain-1 site to a chain-2 site at displacement ``q``;
* ``f21(p)``: hop from a chain-2 site to a chain-1 site at displacement ``p``;
* ``f22(gamma1, n)``: hop inside chain 2, ``n`` a multiple of ``ell2``.

Kernels are numpy-broadcasting callables with a finite support radius. The
product, adjoint and derivations compose them lazily, so evaluating a product
only ever performs the finite lattice sums allowed by the supports.
"""

from dataclasses import dataclass
import math

import numpy as np

from .lattice import SupercellParams, lattice_constants, reduce_to_cell

__all__ = ["Kernel", "AlgebraElement", "Configuration", "SupercellOperator",
           "LatticeMismatch", "EmptyTruncation", "identity", "star_product",
           "adjoint", "derive_parallel", "derive_perpendicular", "represent",
           "trace_per_unit_volume", "birkhoff_average",
           "ergodic_character_sum"]

_TOL = 1e-9


class LatticeMismatch(ValueError):
    """Two elements defined over different lattice constants were combined."""


class EmptyTruncation(ValueError):
    """A truncation radius too small to hold a single hop."""


@dataclass(frozen=True)
class Kernel:
    func: object
    radius: float

    def __post_init__(self):
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ValueError(f"support radius must be finite and >= 0, got {self.radius}")


def _support(x, radius):
    return np.abs(x) <= radius * (1 + _TOL) + _TOL


def _lattice_points(radius, ell):
    """Multiples of ``ell`` inside ``[-radius, radius]``."""
    kmax = int(math.floor(radius / ell * (1 + _TOL) + _TOL))
    return np.arange(-kmax, kmax + 1) * ell


def _coset_offsets(radius, ell):
    """Multiples of ``ell`` covering ``gamma + ell Z`` in the ball for any reduced gamma."""
    kmax = int(math.ceil(radius / ell + 0.5)) + 1
    return np.arange(-kmax, kmax + 1) * ell


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Element of the bilayer algebra over lattice constants ``ell1, ell2``.

    Any block may be ``None``, meaning identically zero. Blocks are read with
    :meth:`b11`, :meth:`b12`, :meth:`b21`, :meth:`b22`, which reduce torus
    arguments to their fundamental domain and enforce the supports.
    """

    ell1: float
    ell2: float
    f11: Kernel = None
    f12: Kernel = None
    f21: Kernel = None
    f22: Kernel = None

    def radius(self, block):
        k = getattr(self, block)
        return None if k is None else k.radius

    def b11(self, gamma2, m):
        gamma2, m = np.broadcast_arrays(np.asarray(gamma2, float), np.asarray(m, float))
        if self.f11 is None:
            return np.zeros(m.shape, complex)
        g = reduce_to_cell(gamma2, self.ell2)
        return np.where(_support(m, self.f11.radius), self.f11.func(g, m), 0).astype(complex)

    def b22(self, gamma1, n):
        gamma1, n = np.broadcast_arrays(np.asarray(gamma1, float), np.asarray(n, float))
        if self.f22 is None:
            return np.zeros(n.shape, complex)
        g = reduce_to_cell(gamma1, self.ell1)
        return np.where(_support(n, self.f22.radius), self.f22.func(g, n), 0).astype(complex)

    def b12(self, q):
        q = np.asarray(q, float)
        if self.f12 is None:
            return np.zeros(q.shape, complex)
        return np.where(_support(q, self.f12.radius), self.f12.func(q), 0).astype(complex)

    def b21(self, p):
        p = np.asarray(p, float)
        if self.f21 is None:
            return np.zeros(p.shape, complex)
        return np.where(_support(p, self.f21.radius), self.f21.func(p), 0).astype(complex)

    def __add__(self, other):
        _check_lattice(self, other)
        blocks = {}
        for name, ev in (("f11", "b11"), ("f22", "b22")):
            a, b = getattr(self, name), getattr(other, name)
            if a is None or b is None:
                blocks[name] = a or b
            else:
                fa, fb = getattr(self, ev), getattr(other, ev)
                blocks[name] = Kernel(lambda g, m, fa=fa, fb=fb: fa(g, m) + fb(g, m),
                                      max(a.radius, b.radius))
        for name, ev in (("f12", "b12"), ("f21", "b21")):
            a, b = getattr(self, name), getattr(other, name)
            if a is None or b is None:
                blocks[name] = a or b
            else:
                fa, fb = getattr(self, ev), getattr(other, ev)
                blocks[name] = Kernel(lambda x, fa=fa, fb=fb: fa(x) + fb(x),
                                      max(a.radius, b.radius))
        return AlgebraElement(self.ell1, self.ell2, **blocks)

    def __rmul__(self, c):
        return _map_blocks(self,
                           intra=lambda ev: (lambda g, m: c * ev(g, m)),
                           inter=lambda ev: (lambda x: c * ev(x)))

    def __neg__(self):
        return (-1) * self

    def __sub__(self, other):
        return self + (-other)


@dataclass(frozen=True)
class Configuration:
    """Point of the transversal: a site of chain ``layer`` sits at the origin.

    ``gamma`` is the offset of the other chain, on its own torus.
    """

    layer: int
    gamma: float = 0.0

    def __post_init__(self):
        if self.layer not in (1, 2):
            raise ValueError("layer must be 1 or 2")

    @classmethod
    def reduced(cls, layer, gamma, ell1, ell2):
        return cls(layer, float(reduce_to_cell(gamma, ell2 if layer == 1 else ell1)))


@dataclass(frozen=True, eq=False)
class SupercellOperator:
    """Dense matrix together with its ordered site list.

    Sites are chain-1 sites by ascending coordinate, then chain-2 sites.
    ``L`` and ``params`` are ``None`` for open truncations.
    """

    H: np.ndarray
    layers: np.ndarray
    x: np.ndarray
    L: float = None
    params: SupercellParams = None

    @property
    def sites(self):
        return list(zip(self.layers.tolist(), self.x.tolist()))

    @property
    def N(self):
        return self.H.shape[0]


def _check_lattice(f, g):
    if not (math.isclose(f.ell1, g.ell1, rel_tol=1e-14)
            and math.isclose(f.ell2, g.ell2, rel_tol=1e-14)):
        raise LatticeMismatch(
            f"lattice constants differ: ({f.ell1}, {f.ell2}) vs ({g.ell1}, {g.ell2})")


def _map_blocks(f, intra, inter):
    out = {}
    for name, ev in (("f11", f.b11), ("f22", f.b22)):
        k = getattr(f, name)
        out[name] = None if k is None else Kernel(intra(ev), k.radius)
    for name, ev in (("f12", f.b12), ("f21", f.b21)):
        k = getattr(f, name)
        out[name] = None if k is None else Kernel(inter(ev), k.radius)
    return AlgebraElement(f.ell1, f.ell2, **out)


def identity(ell1, ell2):
    """Unit of the algebra: ``1`` at zero displacement in both chains."""
    delta = Kernel(lambda g, m: (np.abs(m) < _TOL).astype(float), 0.0)
    return AlgebraElement(ell1, ell2, f11=delta, f22=delta)


def _radius_sum(*pairs):
    rs = [a + b for a, b in pairs if a is not None and b is not None]
    return max(rs) if rs else None


def star_product(f, g):
    """Convolution product ``f * g`` of two elements over the same lattices."""
    _check_lattice(f, g)
    l1, l2 = f.ell1, f.ell2
    R = lambda name, h: h.radius(name)  # noqa: E731

    def p11(gamma2, m):
        gamma2, m = np.broadcast_arrays(np.asarray(gamma2, float), np.asarray(m, float))
        G, Mx = gamma2[..., None], m[..., None]
        out = np.zeros(m.shape, complex)
        if f.f11 is not None and g.f11 is not None:
            mp = _lattice_points(f.f11.radius, l1)
            out += np.sum(f.b11(G, mp) * g.b11(G - mp, Mx - mp), axis=-1)
        if f.f12 is not None and g.f21 is not None:
            qp = reduce_to_cell(G, l2) + _coset_offsets(f.f12.radius, l2)
            out += np.sum(f.b12(qp) * g.b21(Mx - qp), axis=-1)
        return out

    def p12(q):
        q = np.asarray(q, float)
        Q = q[..., None]
        out = np.zeros(q.shape, complex)
        if f.f11 is not None and g.f12 is not None:
            mp = _lattice_points(f.f11.radius, l1)
            out += np.sum(f.b11(Q, mp) * g.b12(Q - mp), axis=-1)
        if f.f12 is not None and g.f22 is not None:
            nq = _lattice_points(g.f22.radius, l2)
            out += np.sum(f.b12(Q - nq) * g.b22(nq - Q, nq), axis=-1)
        return out

    def p21(p):
        p = np.asarray(p, float)
        P = p[..., None]
        out = np.zeros(p.shape, complex)
        if f.f22 is not None and g.f21 is not None:
            nq = _lattice_points(f.f22.radius, l2)
            out += np.sum(f.b22(P, nq) * g.b21(P - nq), axis=-1)
        if f.f21 is not None and g.f11 is not None:
            mp = _lattice_points(g.f11.radius, l1)
            out += np.sum(f.b21(P - mp) * g.b11(mp - P, mp), axis=-1)
        return out

    def p22(gamma1, n):
        gamma1, n = np.broadcast_arrays(np.asarray(gamma1, float), np.asarray(n, float))
        G, Nx = gamma1[..., None], n[..., None]
        out = np.zeros(n.shape, complex)
        if f.f22 is not None and g.f22 is not None:
            nq = _lattice_points(f.f22.radius, l2)
            out += np.sum(f.b22(G, nq) * g.b22(G - nq, Nx - nq), axis=-1)
        if f.f21 is not None and g.f12 is not None:
            pp = reduce_to_cell(G, l1) + _coset_offsets(f.f21.radius, l1)
            out += np.sum(f.b21(pp) * g.b12(Nx - pp), axis=-1)
        return out

    r11 = _radius_sum((R("f11", f), R("f11", g)), (R("f12", f), R("f21", g)))
    r12 = _radius_sum((R("f11", f), R("f12", g)), (R("f12", f), R("f22", g)))
    r21 = _radius_sum((R("f22", f), R("f21", g)), (R("f21", f), R("f11", g)))
    r22 = _radius_sum((R("f22", f), R("f22", g)), (R("f21", f), R("f12", g)))
    mk = lambda fn, r: None if r is None else Kernel(fn, r)  # noqa: E731
    return AlgebraElement(l1, l2, f11=mk(p11, r11), f12=mk(p12, r12),
                          f21=mk(p21, r21), f22=mk(p22, r22))


def adjoint(f):
    """Involution ``f -> f*``."""
    def a11(gamma2, m):
        return np.conj(f.b11(np.asarray(gamma2) - np.asarray(m), -np.asarray(m)))

    def a22(gamma1, n):
        return np.conj(f.b22(np.asarray(gamma1) - np.asarray(n), -np.asarray(n)))

    def a12(q):
        return np.conj(f.b21(-np.asarray(q)))

    def a21(p):
        return np.conj(f.b12(-np.asarray(p)))

    mk = lambda fn, k: None if k is None else Kernel(fn, k.radius)  # noqa: E731
    return AlgebraElement(f.ell1, f.ell2, f11=mk(a11, f.f11), f12=mk(a12, f.f21),
                          f21=mk(a21, f.f12), f22=mk(a22, f.f22))


def derive_parallel(f):
    """Horizontal derivation: multiply every block by ``i`` times the hop length."""
    return _map_blocks(f,
                       intra=lambda ev: (lambda g, m: 1j * np.asarray(m) * ev(g, m)),
                       inter=lambda ev: (lambda x: 1j * np.asarray(x) * ev(x)))


def derive_perpendicular(f):
    """Vertical derivation: ``+i`` on chain 1 -> 2 hops, ``-i`` on 2 -> 1, zero inside chains."""
    f12 = None if f.f12 is None else Kernel(lambda q: 1j * f.b12(q), f.f12.radius)
    f21 = None if f.f21 is None else Kernel(lambda p: -1j * f.b21(p), f.f21.radius)
    return AlgebraElement(f.ell1, f.ell2, f12=f12, f21=f21)


def _sites(cfg, ell1, ell2, radius, params):
    """Integer labels and coordinates of both chains for a truncation."""
    o1, o2 = (0.0, cfg.gamma) if cfg.layer == 1 else (cfg.gamma, 0.0)
    if params is None:
        k1 = np.arange(math.ceil((-radius - o1) / ell1 - _TOL),
                       math.floor((radius - o1) / ell1 + _TOL) + 1)
        k2 = np.arange(math.ceil((-radius - o2) / ell2 - _TOL),
                       math.floor((radius - o2) / ell2 + _TOL) + 1)
    else:
        k1, k2 = np.arange(params.p), np.arange(params.q)
    return o1, o2, k1, k2


def represent(f, cfg, radius=None, boundary="open"):
    """Matrix of ``f`` acting on the sites of configuration ``cfg``.

    Parameters
    ----------
    f : AlgebraElement
    cfg : Configuration
        Which chain sits at the origin and the offset of the other one.
    radius : float
        Half-width of the window for an open truncation. Ignored for
        periodic boundaries, where one supercell is used.
    boundary : ``"open"`` or SupercellParams
        With a :class:`SupercellParams`, hops are wrapped around the ring of
        length ``L``. Every periodic image inside a kernel's support is
        summed, which reduces to the minimal image whenever the supports are
        shorter than ``L / 2``.

    Returns
    -------
    SupercellOperator
    """
    params = None if isinstance(boundary, str) else boundary
    if params is None:
        if boundary != "open":
            raise ValueError(f"unknown boundary {boundary!r}")
        if radius is None or radius < min(f.ell1, f.ell2):
            raise EmptyTruncation(f"empty truncation: radius={radius}")
    else:
        if not (math.isclose(params.ell1, f.ell1, rel_tol=1e-12)
                and math.isclose(params.ell2, f.ell2, rel_tol=1e-12)):
            raise LatticeMismatch("supercell lattice constants differ from the element's")
    o1, o2, k1, k2 = _sites(cfg, f.ell1, f.ell2, radius, params)
    return _assemble(f, o1, o2, k1, k2, params)


def _assemble(f, o1, o2, k1, k2, params):
    """Fill the matrix for chain offsets ``o1, o2`` and integer site labels."""
    l1, l2 = f.ell1, f.ell2
    x1, x2 = o1 + k1 * l1, o2 + k2 * l2
    n1, n2 = len(k1), len(k2)
    H = np.zeros((n1 + n2, n1 + n2), complex)

    # configuration seen from each site
    c1 = (o2 - x1)[:, None]
    c2 = (o1 - x2)[:, None]

    if params is None:
        H[:n1, :n1] = f.b11(c1, (k1[None, :] - k1[:, None]) * l1)
        H[n1:, n1:] = f.b22(c2, (k2[None, :] - k2[:, None]) * l2)
        H[:n1, n1:] = f.b12(x2[None, :] - x1[:, None])
        H[n1:, :n1] = f.b21(x1[None, :] - x2[:, None])
    else:
        L, p, q = params.L, params.p, params.q
        d11 = _wrap_int(k1[None, :] - k1[:, None], p)
        d22 = _wrap_int(k2[None, :] - k2[:, None], q)
        d12 = _wrap(x2[None, :] - x1[:, None], L)
        d21 = _wrap(x1[None, :] - x2[:, None], L)
        for t in _images(f, L):
            H[:n1, :n1] += f.b11(c1, (d11 + t * p) * l1)
            H[n1:, n1:] += f.b22(c2, (d22 + t * q) * l2)
            H[:n1, n1:] += f.b12(d12 + t * L)
            H[n1:, :n1] += f.b21(d21 + t * L)
    layers = np.r_[np.ones(n1, int), np.full(n2, 2)]
    return SupercellOperator(H=H, layers=layers, x=np.r_[x1, x2],
                             L=None if params is None else params.L, params=params)


def _wrap_int(d, n):
    return d - n * np.floor(d / n + 0.5).astype(int)


def _wrap(d, L):
    return d - L * np.floor(d / L + 0.5)


def _images(f, L):
    radii = [k.radius for k in (f.f11, f.f12, f.f21, f.f22) if k is not None]
    T = int(math.ceil(max(radii, default=0.0) / L + 0.5))
    return range(-T, T + 1)


def trace_per_unit_volume(f, n_quad=256):
    """Trace per unit volume by uniform quadrature over both transversal tori."""
    if n_quad < 1:
        raise ValueError("n_quad must be >= 1")
    l1, l2 = f.ell1, f.ell2
    t = np.arange(n_quad) / n_quad - 0.5
    i11 = l2 * np.mean(f.b11(t * l2, 0.0))
    i22 = l1 * np.mean(f.b22(t * l1, 0.0))
    return complex((i11 + i22) / (l1 + l2))


def _constants(params):
    if isinstance(params, SupercellParams):
        return params.ell1, params.ell2
    return lattice_constants(float(params))


def birkhoff_average(f_scalar, cfg, params, r):
    """Average of ``f_scalar`` over the configurations seen from every site in ``[-r, r]``.

    ``params`` is a :class:`SupercellParams` or a ratio ``ell2 / ell1``.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    l1, l2 = _constants(params)
    o1, o2, k1, k2 = _sites(cfg, l1, l2, r, None)
    x1, x2 = o1 + k1 * l1, o2 + k2 * l2
    vals = [f_scalar(Configuration(1, float(reduce_to_cell(o2 - x, l2)))) for x in x1]
    vals += [f_scalar(Configuration(2, float(reduce_to_cell(o1 - y, l1)))) for y in x2]
    return complex(np.mean(vals))


def ergodic_character_sum(ell, k, r):
    """Normalized sum of ``exp(2 pi i k n)`` over ``n`` in ``ell Z`` with ``|n| <= r``."""
    if ell <= 0 or r <= 0:
        raise ValueError("ell and r must be positive")
    jmax = int(math.floor(r / ell * (1 + 1e-15)))
    j = np.arange(-jmax, jmax + 1)
    # only the fractional part of k ell matters; a dual point computed as
    # k = 1/ell is off by round-off, so snap it to the integer
    kl = k * ell
    frac = kl - round(kl)
    if abs(frac) <= 4 * np.finfo(float).eps * max(1.0, abs(kl)):
        frac = 0.0
    phase = np.mod(frac * j, 1.0)
    return complex(np.mean(np.exp(2j * np.pi * phase)))
