"""Invariant suites run by ``fermion-statesum verify``.

Each suite returns ``(passed, detail)`` where ``detail`` is a short dict of
the worst deviation seen. Seeds are pinned so a green run is reproducible.
"""
from __future__ import annotations

import math

import numpy as np

from . import grassmann as gm
from . import spectral, statesum as ss, zetareg as zr
from .linalg import haar_unitary, random_special_orthogonal, rng_from_seed


def _random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def grassmann_relations(seed=101):
    alg = gm.GrassmannAlgebra(6)
    worst = 0.0
    for i in range(6):
        for j in range(6):
            x, y = alg.gen(i), alg.gen(j)
            worst = max(worst, (x * y + y * x).max_abs_diff(alg.zero))
    return worst == 0.0, {"anticommutator_max": worst}


def gaussian(seed=102):
    rng = rng_from_seed(seed)
    worst = 0.0
    for n in (1, 2, 3):
        alg = gm.GrassmannAlgebra(2 * n)
        psi, psibar = gm.field_pair(range(0, 2 * n, 2), range(1, 2 * n, 2))
        for _ in range(5):
            M = _random_matrix(rng, n)
            val = gm.gaussian_berezin(M, psi, psibar, alg)
            worst = max(worst, val.max_abs_diff(alg.scalar(np.linalg.det(M))))
    for n in (1, 2):
        alg = gm.GrassmannAlgebra(2 * n + 4)
        psi, psibar = gm.field_pair(range(0, 2 * n, 2), range(1, 2 * n, 2))
        spect = [alg.gen(2 * n + k) for k in range(4)]
        for _ in range(3):
            M = _random_matrix(rng, n) + 2 * np.eye(n)
            cbar = [sum((complex(c) * g for c, g in zip(_random_matrix(rng, 2)[0], spect[:2])), alg.zero) for _ in range(n)]
            d = [sum((complex(c) * g for c, g in zip(_random_matrix(rng, 2)[0], spect[2:])), alg.zero) for _ in range(n)]
            lhs = gm.gaussian_berezin(M, psi, psibar, alg, cbar, d)
            rhs = gm.gaussian_closed_form(M, alg, cbar, d)
            worst = max(worst, lhs.max_abs_diff(rhs))
    return worst <= 1e-12, {"max_coeff_error": worst}


def gluing(seed=103):
    worst = 0.0
    for n in (1, 2):
        for N in (2, 3, 4):
            edges = [haar_unitary(n, [seed, n, N, i]) for i in range(N)]
            fields = ss.vertex_fields(n, N + 1)
            Z = ss.interval_partition(ss.TriangulatedInterval(edges), fields)
            ref = ss.edge_partition(ss.holonomy(edges), fields.psibar[0], fields.psi[N], fields.algebra)
            worst = max(worst, Z.max_abs_diff(ref))
    return worst <= 1e-12, {"max_coeff_error": worst}


def circle_identity(seed=104):
    worst = 0.0
    for n in (1, 2):
        for N in (1, 2, 3):
            tri = ss.TriangulatedCircle([haar_unitary(n, [seed, n, N, i]) for i in range(N)])
            worst = max(worst, abs(ss.circle_partition_symbolic(tri) - ss.circle_partition_closed(tri)))
    u1 = abs(ss.circle_partition_symbolic(ss.u1_circle(0.7)) - (1 - np.exp(-0.7j)))
    so3 = abs(ss.circle_partition_closed(ss.TriangulatedCircle([random_special_orthogonal(3, seed)])))
    return worst <= 1e-12 and u1 <= 1e-12 and so3 <= 1e-10, {
        "symbolic_vs_det": worst, "u1": u1, "so3": so3}


def gauge_invariance(seed=105):
    worst = 0.0
    for n in (1, 2, 3):
        N = 4
        tri = ss.TriangulatedCircle([haar_unitary(n, [seed, n, i]) for i in range(N)])
        U = [haar_unitary(n, [seed, n, 100 + i]) for i in range(N)]
        g = ss.GaugeTransformation(U + [U[0]])
        worst = max(worst, abs(ss.circle_partition_closed(ss.gauge_transform(tri, g)) - ss.circle_partition_closed(tri)))
    return worst <= 1e-12, {"max_error": worst}


def spectral_determinant(seed=106):
    worst = 0.0
    for n, N in ((1, 7), (2, 4), (3, 5)):
        tri = ss.TriangulatedCircle([haar_unitary(n, [seed, n, N, i]) for i in range(N)])
        worst = max(worst, abs(spectral.build_discrete_dirac(tri).det() - ss.circle_partition_closed(tri)))
    return worst <= 1e-10, {"max_error": worst}


def finite_zeta(seed=107):
    rng = rng_from_seed(seed)
    worst = 0.0
    even_ok = True
    for _ in range(50):
        size = int(rng.integers(1, 13))
        ev = rng.uniform(0.2, 3, size) * rng.choice([-1, 1], size)
        spec = zr.FiniteSpectrum(ev)
        prod = np.prod(ev)
        for eps in (1, -1):
            r = zr.finite_det_via_zeta(spec, eps)
            worst = max(worst, abs(r.detD - prod) / abs(prod), abs(r.detiD - np.prod(1j * ev)) / abs(prod))
            diff = r.eta0 - r.zeta0
            even_ok &= diff == round(diff) and round(diff) % 2 == 0
    return worst <= 1e-12 and even_ok, {"max_rel_error": worst, "even_integer": even_ok}


def hurwitz(seed=108):
    worst = 0.0
    for q in (0.25, 0.5, 0.9):
        worst = max(worst, abs(zr.hurwitz_zeta(0, q) - (0.5 - q)))
    worst = max(worst, abs(zr.hurwitz_zeta(2, 1) - math.pi ** 2 / 6))
    return worst <= 1e-11, {"max_error": worst}


def central_identity(seed=109):
    worst = 0.0
    for n in (1, 2, 3, 4):
        for i in range(5):
            Q = haar_unitary(n, [seed, n, i])
            worst = max(worst, abs(zr.continuum_det_un(Q) - zr.closed_form_det_iD(Q)))
    for a in np.arange(1, 10) / 10:
        r = zr.continuum_regularised_det(zr.U1Connection(a))
        worst = max(worst, abs(r.det_iD - (1 - np.exp(-2j * np.pi * a))))
    return worst <= 1e-10, {"max_error": worst}


def mass_limit(seed=110):
    tri = ss.u1_circle(math.pi, 1, 1.0)
    Q = tri.holonomy
    devs = []
    Ns = (100, 1000, 10000)
    for N in Ns:
        mm = ss.MassiveModel(ss.u1_circle(math.pi, N, 1.0), 1.0)
        devs.append(abs(ss.massive_circle_partition(mm) - ss.massive_limit(Q, 1.0, 1.0)))
    slope = float(np.polyfit(np.log(Ns), np.log(devs), 1)[0])
    return abs(slope + 1) <= 0.1, {"slope": slope}


def haar_projector(seed=111):
    rep = ss.haar_projector_check()
    quad = ss.haar_average_circle(1)
    ok = rep.is_projector and rep.control_deviation > 1e-3 and abs(quad.value - 1) <= 1e-12
    return ok, {"TT_minus_T": rep.deviation, "control": rep.control_deviation, "quadrature": abs(quad.value - 1)}


SUITES = {
    "grassmann_relations": grassmann_relations,
    "gaussian": gaussian,
    "gluing": gluing,
    "circle_identity": circle_identity,
    "gauge_invariance": gauge_invariance,
    "spectral_determinant": spectral_determinant,
    "finite_zeta": finite_zeta,
    "hurwitz": hurwitz,
    "central_identity": central_identity,
    "mass_limit": mass_limit,
    "haar_projector": haar_projector,
}


def run_all(names=None) -> dict:
    results = {}
    for name, fn in SUITES.items():
        if names and name not in names:
            continue
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, reported by name
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        results[name] = {"passed": bool(ok), **{k: _plain(v) for k, v in detail.items()}}
    return results


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v
