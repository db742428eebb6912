"""Command line front end.

Every command reads an optional JSON ``--config`` file; explicit flags
override it. Outputs are deterministic for a fixed config and seed, and
each file starts with an echo of the full config.

Exit codes: 0 success, 1 suite failure, 2 usage/validation, 3 capacity.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import grassmann as gm
from . import spectral, statesum as ss, suites, zetareg as zr
from .linalg import check_unitary, eig_unitary, haar_unitary, random_special_orthogonal

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3
SYMBOLIC_AUTO_LIMIT = 12  # generators; larger circles use the closed form unless forced


class ValidationError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str = ""
    holonomy: dict | None = None
    theta: float = math.pi
    N: int = 1
    n: int = 1
    l: float | None = None  # per command: N for spectrum, 2 pi for cutoff/zeta, else 1
    m: float = 1.0
    m_prime: float | None = None
    a: float = 0.5
    eps: int = 1
    k_max: int = 5
    cutoffs: list = field(default_factory=lambda: np.geomspace(1e2, 1e4, 41).tolist())
    N_grid: list = field(default_factory=lambda: [10, 20, 50, 100, 200, 500, 1000, 2000, 5000,
                                                  10000, 20000, 50000, 100000])
    samples: int = 100_000
    nodes: int = 64
    seed: int | None = None
    workers: int = 1
    symbolic: str = "auto"
    allow_zero_mode: bool = False
    out: str | None = None
    format: str | None = None

    def echo(self) -> dict:
        # out and workers do not change results, so they stay out of the provenance header
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# holonomy specs
# ---------------------------------------------------------------------------

def _need(spec: dict, key: str):
    if key not in spec:
        raise ValidationError(f"holonomy spec of type {spec.get('type')!r} is missing field {key!r}")
    return spec[key]


def _matrix_from_pairs(data) -> np.ndarray:
    if isinstance(data, dict):
        data = data.get("matrix", data.get("entries"))
    flat = np.asarray(data, dtype=float).ravel()
    if flat.size % 2:
        raise ValidationError("holonomy file needs (re, im) pairs")
    vals = flat[0::2] + 1j * flat[1::2]
    n = math.isqrt(vals.size)
    if n * n != vals.size or n == 0:
        raise ValidationError(f"holonomy file has {vals.size} entries, not a square count")
    return vals.reshape(n, n)


def parse_holonomy(spec) -> np.ndarray:
    """Build a holonomy matrix from the JSON mini-language.

    ``{"type": "u1", "theta": t}``, ``{"type": "file", "path": p}``,
    ``{"type": "haar", "n": 2, "seed": 11}``, ``{"type": "so", "n": 3, "seed": 7}``.
    Files hold row-major ``re, im`` pairs, flat or nested.
    """
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"holonomy spec is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise ValidationError("holonomy spec must be a JSON object")
    kind = _need(spec, "type")
    if kind == "u1":
        return np.array([[np.exp(-1j * float(_need(spec, "theta")))]])
    if kind == "file":
        layout = spec.get("layout", "row-major re,im pairs")
        if layout != "row-major re,im pairs":
            raise ValidationError(f"unsupported layout {layout!r}")
        try:
            with open(_need(spec, "path")) as fh:
                return _matrix_from_pairs(json.load(fh))
        except OSError as exc:
            raise ValidationError(f"cannot read holonomy file: {exc}") from None
    if kind == "haar":
        return haar_unitary(int(_need(spec, "n")), int(_need(spec, "seed")))
    if kind == "so":
        return random_special_orthogonal(int(_need(spec, "n")), int(_need(spec, "seed"))).astype(complex)
    raise ValidationError(f"unknown holonomy type {kind!r}")


def split_holonomy(Q: np.ndarray, N: int) -> list[np.ndarray]:
    """N edges whose ordered product is Q: equal principal roots for unitaries, else Q then identities."""
    if N == 1:
        return [Q]
    if check_unitary(Q).is_unitary:
        theta, V = eig_unitary(Q, return_vectors=True)
        root = V @ np.diag(np.exp(-1j * theta / N)) @ V.conj().T
        return [root] * N
    return [Q] + [np.eye(Q.shape[0], dtype=complex)] * (N - 1)


DEFAULT_LENGTH = {"spectrum": None, "cutoff": 2 * math.pi, "zeta": 2 * math.pi}


def resolve_length(cfg: ExperimentConfig) -> None:
    if cfg.l is None:
        cfg.l = DEFAULT_LENGTH.get(cfg.command, 1.0)
        if cfg.l is None:
            cfg.l = float(cfg.N)


def _holonomy(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.holonomy is not None:
        return parse_holonomy(cfg.holonomy)
    return np.array([[np.exp(-1j * cfg.theta)]])


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _write(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(cfg: ExperimentConfig, header, rows, footer=()) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(cfg.echo(), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, np.integer)) else fmt(v) for v in row])
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _json(cfg: ExperimentConfig, payload: dict) -> str:
    return json.dumps(_finite({"config": cfg.echo(), **payload}), allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(cfg: ExperimentConfig, inject_sign_flip: bool = False) -> int:
    if inject_sign_flip:
        with gm.mutated_integration_convention():
            results = suites.run_all()
    else:
        results = suites.run_all()
    failed = [k for k, v in results.items() if not v["passed"]]
    _write(cfg, json.dumps({"suites": results, "failed": failed}, indent=2) + "\n")
    for name in failed:
        print(f"invariant failed: {name}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_circle(cfg: ExperimentConfig) -> int:
    Q = _holonomy(cfg)
    tri = ss.TriangulatedCircle(split_holonomy(Q, cfg.N), cfg.l)
    records = [ss.PartitionRecord.from_value(ss.circle_partition_closed(tri), n=tri.n, N=tri.N,
                                             l=cfg.l, mode="massless", method="closed")]
    size = 2 * tri.n * tri.N
    if cfg.symbolic == "always" or (cfg.symbolic == "auto" and size <= SYMBOLIC_AUTO_LIMIT):
        value = ss.circle_partition_symbolic(tri)  # may raise CapacityError
        records.append(ss.PartitionRecord.from_value(value, n=tri.n, N=tri.N, l=cfg.l,
                                                     mode="massless", method="symbolic"))
    _write(cfg, _json(cfg, {"records": [asdict(r) for r in records]}))
    return EXIT_OK


def cmd_spectrum(cfg: ExperimentConfig) -> int:
    if cfg.k_max >= cfg.N:
        raise ValidationError("k_max must be smaller than N")
    rep = spectral.compare_spectra(cfg.theta, cfg.N, cfg.k_max, cfg.l)
    if (cfg.format or "csv") == "json":
        payload = {"rows": [dict(zip(("k", "re_disc", "im_disc", "re_cont", "im_cont", "abs_dev"), r))
                            for r in rep.rows()],
                   "fitted_order": rep.fitted_order,
                   "product_re": rep.product.real, "product_im": rep.product.imag}
        _write(cfg, _json(cfg, payload))
    else:
        _write(cfg, _csv(cfg, ["k", "re_disc", "im_disc", "re_cont", "im_cont", "abs_dev"], rep.rows(),
                         [f"l: {fmt(rep.l)}", f"fitted_order: {fmt(rep.fitted_order)}"]))
    return EXIT_OK


def mass_sweep(Q: np.ndarray, m: float, l: float, N_grid) -> tuple[list, complex, float]:
    limit = ss.massive_limit(Q, m, l)
    rows = []
    for N in N_grid:
        tri = ss.TriangulatedCircle(split_holonomy(Q, 1) + [np.eye(Q.shape[0])] * (N - 1), l)
        val = ss.massive_circle_partition(ss.MassiveModel(tri, m))
        rows.append((int(N), val.real, val.imag, abs(val - limit)))
    Ns = np.array([r[0] for r in rows], dtype=float)
    devs = np.array([r[3] for r in rows])
    window = (Ns >= 100) & (Ns <= 10_000)
    slope = float(np.polyfit(np.log(Ns[window]), np.log(devs[window]), 1)[0]) if window.sum() >= 2 else float("nan")
    return rows, limit, slope


def cmd_mass(cfg: ExperimentConfig) -> int:
    Q = _holonomy(cfg)
    if cfg.m_prime is not None:
        rows = []
        for N in cfg.N_grid:
            tri = ss.TriangulatedCircle([Q] + [np.eye(Q.shape[0])] * (int(N) - 1), cfg.l)
            val = ss.exponential_mass_partition(tri, cfg.m_prime)
            rows.append((int(N), val.real, val.imag))
        limit = ss.massive_limit(Q, cfg.m_prime, cfg.l)
        spread = max(abs(complex(r[1], r[2]) - limit) for r in rows)
        _write(cfg, _csv(cfg, ["N", "value_re", "value_im"], rows,
                         ["mode: exponential_mass (complex m, non-physical)",
                          f"limit_re: {fmt(limit.real)}", f"limit_im: {fmt(limit.imag)}",
                          f"max_abs_dev_from_limit: {fmt(spread)}"]))
        return EXIT_OK
    rows, limit, slope = mass_sweep(Q, cfg.m, cfg.l, cfg.N_grid)
    _write(cfg, _csv(cfg, ["N", "value_re", "value_im", "abs_dev"], rows,
                     [f"limit_re: {fmt(limit.real)}", f"limit_im: {fmt(limit.imag)}",
                      f"slope_fit_N_100_10000: {fmt(slope)}"]))
    return EXIT_OK


def cmd_cutoff(cfg: ExperimentConfig) -> int:
    if not cfg.a % 1.0:
        raise ValidationError("cutoff needs a non-integer a")
    rep = spectral.cutoff_report(cfg.a, cfg.l, cfg.cutoffs)
    _write(cfg, _csv(cfg, ["c", "logdet", "fitted_leading", "residual"], rep.rows(),
                     [f"kappa: {fmt(rep.kappa)}", f"expected_l_over_pi: {fmt(cfg.l / math.pi)}",
                      "fit_coefficients: " + " ".join(fmt(x) for x in rep.coefficients)]))
    return EXIT_OK


def cmd_haar(cfg: ExperimentConfig) -> int:
    if cfg.n > 1 and cfg.seed is None:
        raise ValidationError("haar with n > 1 is stochastic and needs --seed")
    res = ss.haar_average_circle(cfg.n, cfg.samples, cfg.seed or 0, cfg.nodes, cfg.workers)
    _write(cfg, _json(cfg, {"value_re": res.value.real, "value_im": res.value.imag,
                            "stderr": res.stderr, "samples": res.samples, "method": res.method}))
    return EXIT_OK


def cmd_zeta(cfg: ExperimentConfig) -> int:
    conn = zr.U1Connection(cfg.a, cfg.l)
    if conn.zero_mode and not cfg.allow_zero_mode:
        raise ValidationError("a = 0 is a zero mode; pass --allow-zero-mode to get determinant 0")
    rep = zr.continuum_regularised_det(conn, cfg.eps)
    _write(cfg, _json(cfg, rep.to_dict()))
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "circle": cmd_circle,
    "spectrum": cmd_spectrum,
    "mass": cmd_mass,
    "cutoff": cmd_cutoff,
    "haar": cmd_haar,
    "zeta": cmd_zeta,
}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fermion-statesum", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--holonomy", help="holonomy spec as JSON text")
    p.add_argument("--theta", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--l", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--m-prime", dest="m_prime", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--eps", type=int, choices=(1, -1))
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--cutoffs", type=_floats, help="comma-separated cutoff values")
    p.add_argument("--N-grid", dest="N_grid", type=_ints, help="comma-separated edge counts")
    p.add_argument("--samples", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--symbolic", choices=("auto", "always", "never"))
    p.add_argument("--allow-zero-mode", dest="allow_zero_mode", action="store_true", default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--inject-sign-flip", action="store_true", help=argparse.SUPPRESS)
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(command=args.command)
    known = {f.name for f in fields(ExperimentConfig)}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for k in known - {"command"}:
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, json.loads(v) if k == "holonomy" and isinstance(v, str) and v.strip().startswith("{") else v)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.N < 1:
        raise ValidationError("N must be at least 1")
    if cfg.n < 1:
        raise ValidationError("n must be at least 1")
    resolve_length(cfg)
    if not cfg.l > 0:
        raise ValidationError("l must be positive")
    if cfg.samples < 1:
        raise ValidationError("samples must be positive")
    if cfg.workers < 1:
        raise ValidationError("workers must be positive")
    if any(N < 1 for N in cfg.N_grid):
        raise ValidationError("N_grid entries must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, args.inject_sign_flip)
        return COMMANDS[args.command](cfg)
    except gm.CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
