"""Angular densities on the circle.

A density rho(xi) on [-pi, pi] must be non-negative, normalized, and
symmetric under both xi -> -xi and xi -> pi - xi.  It is the generator of
the deformation map built in :mod:`deformable_bell.gamma`.

Three kinds exist: ``uniform`` (1/2pi), ``quantum`` (|sin xi|/4) and
``tabulated`` (piecewise linear between the nodes of a uniform grid).
Cumulative integrals are taken cell by cell with Gauss-Legendre quadrature,
which is exact for tabulated densities and accurate to rounding for the
smooth builtins.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circle import TWO_PI, wrap_closed

DEFAULT_GRID_SIZE = 4097
MIN_TABLE_NODES = 65

BUILTIN_SYMMETRY_TOL = 1e-9
TABLE_SYMMETRY_TOL = 1e-6
NORMALIZATION_TOL = 1e-9
RENORMALIZE_LIMIT = 1e-3
NEGATIVITY_TOL = 1e-12
GRID_TOL = 1e-9

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class DensityValidationError(ValueError):
    """A density violates one of its constraints.

    ``constraint`` names the violated check; ``report`` carries the full
    :class:`ValidationReport` when one was produced.
    """

    def __init__(self, constraint, message, report=None):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint
        self.report = report


class DensityFileError(ValueError):
    """Malformed density CSV."""


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    defect: float
    tolerance: float


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "defect": c.defect, "tolerance": c.tolerance}
                for c in self.checks
            ],
        }


@dataclass(frozen=True, eq=False)
class AngularDensity:
    """A density on [-pi, pi] with its cumulative table.

    Construct through :func:`make_uniform`, :func:`make_quantum` or
    :func:`from_table`.  ``nodes`` is the quadrature grid (the table grid for
    tabulated densities) and ``cum`` the cumulative mass at each node.
    """

    kind: str
    nodes: np.ndarray
    values: np.ndarray
    cum: np.ndarray = field(repr=False)

    @property
    def grid_size(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def total_mass(self) -> float:
        return float(self.cum[-1])

    @property
    def symmetry_tol(self) -> float:
        return TABLE_SYMMETRY_TOL if self.kind == "tabulated" else BUILTIN_SYMMETRY_TOL

    def __call__(self, xi):
        xi = wrap_closed(xi)
        if self.kind == "uniform":
            out = np.full(np.shape(xi), 1.0 / TWO_PI)
        elif self.kind == "quantum":
            out = 0.25 * np.abs(np.sin(xi))
        else:
            out = np.interp(xi, self.nodes, self.values)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def digest(self) -> str:
        h = hashlib.sha256(self.kind.encode())
        h.update(np.ascontiguousarray(self.nodes).tobytes())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return h.hexdigest()


def _integrate(fn, a, b):
    """Gauss-Legendre integral of ``fn`` over [a, b], elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[..., None] + half[..., None] * _GL_NODES
    return half * (fn(pts) @ _GL_WEIGHTS)


def _raw_eval(kind, nodes, values):
    if kind == "uniform":
        return lambda x: np.full(np.shape(x), 1.0 / TWO_PI)
    if kind == "quantum":
        return lambda x: 0.25 * np.abs(np.sin(x))
    return lambda x: np.interp(x, nodes, values)


def _assemble(kind, nodes, values) -> AngularDensity:
    fn = _raw_eval(kind, nodes, values)
    cells = _integrate(fn, nodes[:-1], nodes[1:])
    # extended-precision running sum keeps the table free of O(N eps) drift
    cum = np.concatenate([[0.0], np.cumsum(cells, dtype=np.longdouble).astype(float)])
    return AngularDensity(kind=kind, nodes=nodes, values=values, cum=cum)


def _builtin_grid(grid_size: int) -> np.ndarray:
    if grid_size < 3 or grid_size % 2 == 0:
        raise ValueError(f"grid_size must be an odd integer >= 3, got {grid_size}")
    return np.linspace(-np.pi, np.pi, grid_size)


def make_uniform(grid_size: int = DEFAULT_GRID_SIZE) -> AngularDensity:
    nodes = _builtin_grid(grid_size)
    return _assemble("uniform", nodes, np.full(grid_size, 1.0 / TWO_PI))


def make_quantum(grid_size: int = DEFAULT_GRID_SIZE) -> AngularDensity:
    """rho(xi) = |sin xi| / 4, whose correlation law is cos(theta)."""
    nodes = _builtin_grid(grid_size)
    return _assemble("quantum", nodes, 0.25 * np.abs(np.sin(nodes)))


def tabulated(xi, rho) -> AngularDensity:
    """Wrap a table as a density without any checks or renormalization.

    Mostly useful for inspecting broken input with :func:`validate`;
    :func:`from_table` is the checked constructor.
    """
    xi = np.asarray(xi, dtype=float)
    rho = np.asarray(rho, dtype=float)
    return _assemble("tabulated", xi, rho)


def _check_grid(xi):
    if xi.ndim != 1 or len(xi) < MIN_TABLE_NODES:
        raise DensityValidationError(
            "grid", f"need at least {MIN_TABLE_NODES} nodes, got {xi.size}")
    if not np.all(np.isfinite(xi)):
        raise DensityValidationError("grid", "non-finite abscissa")
    if abs(xi[0] + np.pi) > GRID_TOL or abs(xi[-1] - np.pi) > GRID_TOL:
        raise DensityValidationError(
            "grid", f"grid must cover [-pi, pi], got [{xi[0]!r}, {xi[-1]!r}]")
    h = TWO_PI / (len(xi) - 1)
    if np.max(np.abs(np.diff(xi) - h)) > GRID_TOL:
        raise DensityValidationError("grid", "grid is not uniform")


def from_table(xi, rho=None) -> AngularDensity:
    """Checked constructor for a piecewise-linear density.

    Accepts either two arrays or a single sequence of ``(xi, rho)`` pairs.
    Small normalization defects (up to 1e-3) are divided out; anything else
    that fails :func:`validate` raises :class:`DensityValidationError`.
    """
    if rho is None:
        pairs = np.asarray(xi, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise DensityValidationError("grid", "expected a sequence of (xi, rho) pairs")
        xi, rho = pairs[:, 0], pairs[:, 1]
    xi = np.asarray(xi, dtype=float)
    rho = np.array(rho, dtype=float)
    if xi.shape != rho.shape:
        raise DensityValidationError("grid", "xi and rho differ in length")
    _check_grid(xi)
    if not np.all(np.isfinite(rho)):
        raise DensityValidationError("finite", "density values must be finite")
    if rho.min() < -NEGATIVITY_TOL:
        k = int(np.argmin(rho))
        raise DensityValidationError(
            "non_negativity", f"rho({xi[k]:.6g}) = {rho[k]:.6g} < 0")
    rho = np.maximum(rho, 0.0)
    nodes = np.linspace(-np.pi, np.pi, len(xi))

    # trapezoid is exact for the piecewise-linear interpolant
    total = float(np.sum(0.5 * (rho[1:] + rho[:-1]) * np.diff(nodes)))
    if abs(total - 1.0) > RENORMALIZE_LIMIT:
        raise DensityValidationError(
            "normalization", f"integral is {total:.9g}, defect exceeds {RENORMALIZE_LIMIT}")
    d = _assemble("tabulated", nodes, rho / total)
    report = validate(d)
    if not report.ok:
        first = report[report.failures[0]]
        raise DensityValidationError(
            first.name, f"defect {first.defect:.3g} exceeds tolerance {first.tolerance:.3g}",
            report)
    return d


def _widest_plateau(cells, width):
    widest = run = 0
    for empty in cells <= 0.0:
        run = run + 1 if empty else 0
        widest = max(widest, run)
    return widest * width


def validate(d: AngularDensity) -> ValidationReport:
    """Measure every density constraint; never raises."""
    nodes = d.nodes
    vals = np.asarray(d(nodes), dtype=float)
    sym_tol = d.symmetry_tol
    checks = []

    finite = bool(np.all(np.isfinite(vals)))
    checks.append(Check("finite", finite, 0.0 if finite else float("inf"), 0.0))
    vals = np.where(np.isfinite(vals), vals, 0.0)

    neg = float(max(0.0, -vals.min()))
    checks.append(Check("non_negativity", neg <= NEGATIVITY_TOL, neg, NEGATIVITY_TOL))

    norm = abs(d.total_mass - 1.0)
    checks.append(Check("normalization", norm <= NORMALIZATION_TOL, norm, NORMALIZATION_TOL))

    parity = float(np.max(np.abs(np.asarray(d(-nodes)) - vals)))
    checks.append(Check("parity_symmetry", parity <= sym_tol, parity, sym_tol))

    reflected = np.asarray(d(wrap_closed(np.pi - nodes)))
    half_turn = float(np.max(np.abs(reflected - vals)))
    checks.append(Check("half_turn_symmetry", half_turn <= sym_tol, half_turn, sym_tol))

    cells = np.diff(d.cum)
    plateau = _widest_plateau(cells, d.spacing)
    checks.append(Check("cdf_plateau", plateau == 0.0, plateau, 0.0))

    return ValidationReport(kind=d.kind, checks=tuple(checks))


def cdf(d: AngularDensity, x):
    """Integral of rho from -pi to ``x``; exact table lookup plus one partial cell."""
    x = wrap_closed(x)
    xa = np.asarray(x, dtype=float)
    k = np.clip(np.searchsorted(d.nodes, xa, side="right") - 1, 0, len(d.nodes) - 2)
    fn = _raw_eval(d.kind, d.nodes, d.values)
    out = d.cum[k] + _integrate(fn, d.nodes[k], xa)
    out = np.clip(out, 0.0, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def resolve(spec, grid_size: int = DEFAULT_GRID_SIZE) -> AngularDensity:
    """Turn ``'uniform'``, ``'quantum'`` or ``'table:<path>'`` into a density."""
    if isinstance(spec, AngularDensity):
        return spec
    if spec == "uniform":
        return make_uniform(grid_size)
    if spec == "quantum":
        return make_quantum(grid_size)
    if isinstance(spec, str) and spec.startswith("table:"):
        return load_csv(spec[len("table:"):])
    raise ValueError(f"unknown density spec {spec!r}")


def read_two_column_csv(path, header):
    """Read a headed two-column numeric CSV into two float arrays."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DensityFileError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise DensityFileError(f"{path}: expected header {','.join(header)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise DensityFileError(f"{path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise DensityFileError(f"{path}: expected exactly two columns per row")
    return data[:, 0], data[:, 1]


def load_csv(path) -> AngularDensity:
    xi, rho = read_two_column_csv(path, ("xi", "rho"))
    return from_table(xi, rho)


def write_csv(d: AngularDensity, path_or_file) -> None:
    rows = zip(d.nodes, np.asarray(d(d.nodes)))
    if hasattr(path_or_file, "write"):
        _write_rows(path_or_file, rows)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write_rows(fh, rows)


def _write_rows(fh, rows):
    fh.write("xi,rho\n")
    for x, r in rows:
        fh.write(f"{x:.17g},{r:.17g}\n")
