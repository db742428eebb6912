"""Fermionic state sum on triangulated intervals and circles.

An oriented edge carrying the matrix ``Q`` contributes
``exp(-psibar_0 Q psi_1)``; edges are glued with the pairing
``∫dpsi dpsibar f e^{psibar psi} g``. The symbolic routines below do this
literally in the Grassmann algebra and are paired with the determinant
closed forms used for large inputs.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import grassmann as gm
from .linalg import as_matrix, haar_unitary_batch, det

MC_CHUNK = 10_000
CONDITION_LIMIT = 1e10


class ConditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# triangulations
# ---------------------------------------------------------------------------

def _edges(edges) -> tuple[np.ndarray, ...]:
    out = tuple(as_matrix(Q) for Q in edges)
    if not out:
        raise ValueError("need at least one edge")
    n = out[0].shape[0]
    for Q in out:
        if Q.shape != (n, n):
            raise ValueError("edge matrices must all be n x n with the same n")
    return out


def holonomy(edges: Sequence[np.ndarray]) -> np.ndarray:
    """Ordered product ``Q_1 Q_2 ... Q_N``."""
    out = np.eye(edges[0].shape[0], dtype=complex)
    for Q in edges:
        out = out @ Q
    return out


@dataclass(frozen=True)
class TriangulatedInterval:
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", _edges(self.edges))

    @property
    def N(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return self.edges[0].shape[0]

    @property
    def holonomy(self) -> np.ndarray:
        return holonomy(self.edges)


@dataclass(frozen=True)
class TriangulatedCircle:
    """Cyclically ordered edges; ``l`` only matters through ``dt = l / N``."""

    edges: tuple
    l: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "edges", _edges(self.edges))
        if not self.l > 0:
            raise ValueError("circumference must be positive")

    @property
    def N(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return self.edges[0].shape[0]

    @property
    def dt(self) -> float:
        return self.l / self.N

    @property
    def holonomy(self) -> np.ndarray:
        return holonomy(self.edges)

    def reversed(self) -> TriangulatedCircle:
        """Same circle traversed the other way: edges reversed and inverted."""
        return TriangulatedCircle(tuple(np.linalg.inv(Q) for Q in reversed(self.edges)), self.l)


def u1_circle(theta: float, N: int = 1, l: float = 1.0) -> TriangulatedCircle:
    """U(1) circle with holonomy ``exp(-i theta)`` split evenly over ``N`` edges."""
    q = np.exp(-1j * theta / N)
    return TriangulatedCircle(tuple(np.array([[q]]) for _ in range(N)), l)


# ---------------------------------------------------------------------------
# generator layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VertexFields:
    """psi_j, psibar_j for vertices j = 0..count-1 inside one algebra."""

    algebra: gm.GrassmannAlgebra
    psi: tuple
    psibar: tuple

    @property
    def n(self) -> int:
        return len(self.psi[0])


def vertex_fields(n: int, count: int) -> VertexFields:
    """Allocate ``2 n count`` generators; components of psi_j and psibar_j are interleaved."""
    size = 2 * n * count
    if size > gm.MAX_GENERATORS:
        raise gm.CapacityError(
            f"n={n} with {count} vertices needs {size} generators, limit is {gm.MAX_GENERATORS}"
        )
    labels = []
    psis, psibars = [], []
    for j in range(count):
        a_ids, b_ids = [], []
        for i in range(n):
            base = 2 * (j * n + i)
            a_ids.append(base)
            b_ids.append(base + 1)
            suffix = f"{j}" if n == 1 else f"{j}.{i + 1}"
            labels += [f"a{suffix}", f"b{suffix}"]
        psi, psibar = gm.field_pair(a_ids, b_ids)
        psis.append(psi)
        psibars.append(psibar)
    return VertexFields(gm.GrassmannAlgebra(size, labels), tuple(psis), tuple(psibars))


# ---------------------------------------------------------------------------
# massless model
# ---------------------------------------------------------------------------

def edge_partition(Q, psibar0: gm.GeneratorVector, psi1: gm.GeneratorVector,
                   algebra: gm.GrassmannAlgebra) -> gm.GrassmannElement:
    """``exp(-psibar_0 Q psi_1)``."""
    Q = as_matrix(Q)
    if Q.shape != (len(psibar0), len(psi1)):
        raise ValueError(f"edge matrix {Q.shape} does not match field dimension {len(psi1)}")
    return gm.exp_even(-gm.bilinear(psibar0.elements(algebra), Q, psi1.elements(algebra)))


def glue(Z1: gm.GrassmannElement, Z2: gm.GrassmannElement,
         psi: gm.GeneratorVector, psibar: gm.GeneratorVector) -> gm.GrassmannElement:
    return gm.bilinear_pair(Z1, Z2, psi, psibar)


def interval_partition(tri: TriangulatedInterval, fields: VertexFields | None = None) -> gm.GrassmannElement:
    """Glue the edges left to right; the result lives in (psibar_0, psi_N)."""
    if fields is None:
        fields = vertex_fields(tri.n, tri.N + 1)
    if fields.n != tri.n or len(fields.psi) < tri.N + 1:
        raise ValueError("vertex fields do not fit the triangulation")
    alg = fields.algebra
    Z = edge_partition(tri.edges[0], fields.psibar[0], fields.psi[1], alg)
    for i in range(1, tri.N):
        Zi = edge_partition(tri.edges[i], fields.psibar[i], fields.psi[i + 1], alg)
        Z = glue(Z, Zi, fields.psi[i], fields.psibar[i])
    return Z


def _circle_factors(tri: TriangulatedCircle, fields: VertexFields, diagonal: complex = 1.0):
    """Per-vertex factors ``e^{c psibar_j psi_j}`` and per-edge ``e^{-psibar_j Q_{j+1} psi_{j+1}}``.

    Vertex 0 stands for both psi_0 and psi_N.
    """
    alg = fields.algebra
    N, n = tri.N, tri.n
    eye = diagonal * np.eye(n)
    for j in range(N):
        yield gm.exp_even(gm.bilinear(fields.psibar[j].elements(alg), eye, fields.psi[j].elements(alg)))
        yield edge_partition(tri.edges[j], fields.psibar[j], fields.psi[(j + 1) % N], alg)


def circle_integrand(tri: TriangulatedCircle, fields: VertexFields | None = None,
                     diagonal: complex = 1.0) -> gm.GrassmannElement:
    if fields is None:
        fields = vertex_fields(tri.n, tri.N)
    out = fields.algebra.one
    for factor in _circle_factors(tri, fields, diagonal):
        out = out * factor
    return out


def circle_action(tri: TriangulatedCircle, fields: VertexFields, diagonal: complex = 1.0) -> gm.GrassmannElement:
    """Discrete action ``sum_j psibar_j (c psi_j - Q_{j+1} psi_{j+1})``, indices mod N."""
    alg = fields.algebra
    out = alg.zero
    eye = diagonal * np.eye(tri.n)
    for j in range(tri.N):
        pb = fields.psibar[j].elements(alg)
        out = out + gm.bilinear(pb, eye, fields.psi[j].elements(alg))
        out = out - gm.bilinear(pb, tri.edges[j], fields.psi[(j + 1) % tri.N].elements(alg))
    return out


def _integrate_circle(tri: TriangulatedCircle, diagonal: complex) -> complex:
    fields = vertex_fields(tri.n, tri.N)
    J = circle_integrand(tri, fields, diagonal)
    order: list[int] = []
    for psi, psibar in zip(fields.psi, fields.psibar):
        order += gm.measure(psi, psibar)
    result = gm.berezin(J, order)
    leftover = {m: c for m, c in result.terms.items() if m}
    if leftover:
        raise AssertionError("full Berezin integral left generators behind")
    return result.scalar_part


def circle_partition_symbolic(tri: TriangulatedCircle) -> complex:
    """Berezin-integrate the full circle integrand over every vertex variable."""
    return _integrate_circle(tri, 1.0)


def circle_partition_closed(tri: TriangulatedCircle) -> complex:
    """``det(I - Q_1 ... Q_N)``."""
    Q = tri.holonomy
    return det(np.eye(tri.n) - Q)


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaugeTransformation:
    """Invertible matrices U_0..U_N, one per vertex."""

    maps: tuple

    def __post_init__(self):
        maps = tuple(as_matrix(U) for U in self.maps)
        for U in maps:
            if np.linalg.cond(U) > CONDITION_LIMIT:
                raise ConditionError("gauge matrix is numerically singular")
        object.__setattr__(self, "maps", maps)


def gauge_transform(tri, g: GaugeTransformation):
    """``Q'_i = U_{i-1} Q_i U_i^{-1}``; on a circle U_0 must equal U_N."""
    if len(g.maps) != tri.N + 1:
        raise ValueError(f"need {tri.N + 1} vertex maps, got {len(g.maps)}")
    U = g.maps
    if isinstance(tri, TriangulatedCircle) and not np.allclose(U[0], U[-1], atol=1e-12, rtol=0):
        raise ValueError("circle gauge transformation needs U_0 = U_N")
    edges = tuple(U[i] @ Q @ np.linalg.inv(U[i + 1]) for i, Q in enumerate(tri.edges))
    if isinstance(tri, TriangulatedCircle):
        return TriangulatedCircle(edges, tri.l)
    return TriangulatedInterval(edges)


def transform_boundary_variables(Z: gm.GrassmannElement, psibar0: gm.GeneratorVector,
                                 psiN: gm.GeneratorVector, U0, UN) -> gm.GrassmannElement:
    """Rewrite ``Z`` under ``psibar_0 -> U_0^{-T} psibar_0`` and ``psi_N -> U_N psi_N``.

    With ``Q' = U_0 Q U_N^{-1}`` this maps the edge partition of ``Q'`` to
    that of ``Q``.
    """
    alg = Z.algebra
    A = np.linalg.inv(as_matrix(U0)).T
    B = as_matrix(UN)
    pb = psibar0.elements(alg)
    ps = psiN.elements(alg)
    mapping = {}
    for i, gid in enumerate(psibar0.ids):
        mapping[gid] = sum((complex(A[i, j]) * pb[j] for j in range(len(pb))), alg.zero)
    for i, gid in enumerate(psiN.ids):
        mapping[gid] = sum((complex(B[i, j]) * ps[j] for j in range(len(ps))), alg.zero)
    return gm.linear_change(Z, mapping)


# ---------------------------------------------------------------------------
# mass term
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassiveModel:
    """Circle with the discretised mass term ``(1 - i m dt) psibar_j psi_j``.

    Complex ``m`` is non-physical and must be requested with ``complex_mass=True``.
    """

    circle: TriangulatedCircle
    m: complex
    complex_mass: bool = False

    def __post_init__(self):
        if not self.complex_mass and complex(self.m).imag != 0:
            raise ValueError("complex mass needs complex_mass=True")

    @property
    def dt(self) -> float:
        return self.circle.dt

    @property
    def step_factor(self) -> complex:
        return 1 - 1j * self.m * self.dt


def massive_circle_partition(mm: MassiveModel) -> complex:
    """``det((1 - i m dt)^N - Q_1 ... Q_N)``."""
    c = mm.step_factor ** mm.circle.N
    return det(c * np.eye(mm.circle.n) - mm.circle.holonomy)


def massive_circle_partition_symbolic(mm: MassiveModel) -> complex:
    return _integrate_circle(mm.circle, mm.step_factor)


def massive_limit(Q, m: float, l: float) -> complex:
    """N -> infinity value ``det(exp(-i m l) - Q)``."""
    Q = as_matrix(Q)
    return det(np.exp(-1j * m * l) * np.eye(Q.shape[0]) - Q)


def exponential_mass_model(circle: TriangulatedCircle, m_prime: float) -> MassiveModel:
    """Complex mass chosen so that ``1 - i m dt = exp(-i m' l / N)``."""
    step = np.exp(-1j * m_prime * circle.l / circle.N)
    m = (1 - step) / (1j * circle.dt)
    return MassiveModel(circle, m, complex_mass=True)


def exponential_mass_partition(circle: TriangulatedCircle, m_prime: float) -> complex:
    return massive_circle_partition(exponential_mass_model(circle, m_prime))


# ---------------------------------------------------------------------------
# Haar averages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HaarAverage:
    value: complex
    stderr: float
    samples: int
    method: str


def _chunk_values(n: int, size: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    U = haar_unitary_batch(n, size, seed_seq)
    return np.linalg.det(np.eye(n) - U)


def haar_average_circle(n: int, samples: int = 100_000, seed: int = 0,
                        nodes: int = 64, workers: int = 1) -> HaarAverage:
    """Average of ``det(I - Q)`` over Haar-random ``Q`` in U(n).

    For ``n = 1`` this is the trapezoidal rule on ``nodes`` equally spaced
    phases. Otherwise Monte Carlo in fixed-size chunks, each with its own
    spawned seed, so the result does not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if n == 1:
        theta = 2 * np.pi * np.arange(nodes) / nodes
        vals = 1 - np.exp(-1j * theta)
        return HaarAverage(complex(np.mean(vals)), 0.0, nodes, "quadrature")
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _chunk_values(n, *job), jobs))
    else:
        parts = [_chunk_values(n, *job) for job in jobs]
    vals = np.concatenate(parts)
    mean = complex(np.mean(vals))
    stderr = float(np.sqrt((np.var(vals.real) + np.var(vals.imag)) / samples))
    return HaarAverage(mean, stderr, samples, "monte_carlo")


@dataclass
class ProjectorReport:
    T: gm.GrassmannElement
    TT: gm.GrassmannElement
    deviation: float
    is_projector: bool
    control_deviation: float


def haar_projector_check(nodes: int = 16, control_theta: float = 1.0, tol: float = 1e-10) -> ProjectorReport:
    """Check ``T T = T`` for the U(1)-averaged edge partition ``T = ∫dQ Z^Q``.

    The average is taken coefficientwise with the trapezoidal rule in theta.
    As a control, a single fixed-phase edge glued with itself is compared to
    itself; that deviation should be far from zero.
    """
    fields = vertex_fields(1, 3)
    alg = fields.algebra
    thetas = 2 * np.pi * np.arange(nodes) / nodes

    def averaged(left: int, right: int) -> gm.GrassmannElement:
        total = alg.zero
        for th in thetas:
            total = total + edge_partition([[np.exp(-1j * th)]], fields.psibar[left], fields.psi[right], alg)
        return total / nodes

    T01, T12, T02 = averaged(0, 1), averaged(1, 2), averaged(0, 2)
    TT = glue(T01, T12, fields.psi[1], fields.psibar[1])
    dev = TT.max_abs_diff(T02)

    q = [[np.exp(-1j * control_theta)]]
    Z01 = edge_partition(q, fields.psibar[0], fields.psi[1], alg)
    Z12 = edge_partition(q, fields.psibar[1], fields.psi[2], alg)
    Z02 = edge_partition(q, fields.psibar[0], fields.psi[2], alg)
    control = glue(Z01, Z12, fields.psi[1], fields.psibar[1]).max_abs_diff(Z02)
    return ProjectorReport(T02, TT, dev, dev <= tol, control)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass
class PartitionRecord:
    n: int
    N: int
    l: float
    mode: str
    value_re: float
    value_im: float
    method: str  # "symbolic" | "closed"

    @classmethod
    def from_value(cls, value: complex, *, n: int, N: int, l: float, mode: str, method: str):
        return cls(n, N, l, mode, float(value.real), float(value.imag), method)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)
