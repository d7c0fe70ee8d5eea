"""Galerkin assembly and solve for the L-shaped heat-transfer problem.

The parametric domain is the square [0, 2] x [0, 2]; physically it is the
square [-1, 1] x [-1, 1] shifted by +1 per axis. The L shape removes the
lower-left quarter [0, 1] x [0, 1]: basis functions supported inside that
quarter are constrained to zero (homogeneous Dirichlet), while the outer
boundary carries the Neumann heating

    g = v_i * 2*pi*n * cos(2*pi*n * x_i) * sin(2*pi*n * x_j)

written in centered coordinates, where i is the axis of the outward normal
v (|x_i| = 1 on the edge) and j is the other axis.

Matrices are assembled by true two-dimensional quadrature over each
element (tensor Gauss rule per element); no use is made of the fact that
the global operators factor into Kronecker products, which keeps that
identity available as an independent check.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .bspline import (
    KnotVector,
    SplineField2D,
    eval_basis,
    eval_basis_derivatives,
    make_field,
    make_knot_vector,
    sample_field_grid,
)
from .quadrature import MAX_POINTS, QuadRule, gauss_legendre, rectangle_edges

DOMAIN_SIDE = 2.0  # parametric square is [0, 2] x [0, 2]
QUARTER_SPLIT = 1.0  # the removed quarter is [0, 1] x [0, 1]


class SingularMatrixError(RuntimeError):
    """Raised when LU factorization meets an exactly zero pivot."""

    def __init__(self, pivot_index: int):
        super().__init__(f"singular matrix: zero pivot at index {pivot_index}")
        self.pivot_index = pivot_index


@dataclass(frozen=True)
class DofMap:
    """Bijection between coefficient pairs (i, j) and flat row indices."""

    nx: int
    ny: int

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def flat(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise ValueError(f"pair ({i}, {j}) outside ({self.nx}, {self.ny})")
        return i * self.ny + j

    def pair(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.size:
            raise ValueError(f"flat index {k} outside [0, {self.size})")
        return divmod(k, self.ny)


@dataclass
class LinearSystem:
    """Dense square system A u = b with the dof numbering that built it."""

    matrix: np.ndarray
    rhs: np.ndarray
    dof_map: DofMap


@dataclass(frozen=True)
class HeatProblem:
    """Parameterized L-shape heat problem instance.

    Attributes
    ----------
    n : float
        Heating parameter, positive.
    mesh : int
        Elements per direction on the full square; even and at least 2 so
        the quarter boundary is a mesh line.
    degree : int
        B-spline degree per direction, at least 1.
    """

    n: float
    mesh: int = 10
    degree: int = 2

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.mesh < 2 or self.mesh % 2 != 0:
            raise ValueError(f"mesh must be even and >= 2, got {self.mesh}")
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")

    def knot_vector(self) -> KnotVector:
        return lshape_knot_vector(self.mesh, self.degree)

    @property
    def num_basis_1d(self) -> int:
        return self.mesh + 2 * self.degree - 1

    @property
    def num_coefficients(self) -> int:
        return self.num_basis_1d ** 2

    def dof_map(self) -> DofMap:
        return DofMap(self.num_basis_1d, self.num_basis_1d)


@lru_cache(maxsize=None)
def lshape_knot_vector(mesh: int, degree: int) -> KnotVector:
    """Open uniform knots on [0, 2] with the quarter line repeated.

    The interior knot 1.0 carries multiplicity ``degree`` so the basis is
    C0 across the re-entrant corner line; all other interior knots are
    simple. This yields mesh + 2*degree - 1 basis functions per direction.
    """
    if mesh < 2 or mesh % 2 != 0:
        raise ValueError(f"mesh must be even and >= 2, got {mesh}")
    breaks = np.linspace(0.0, DOMAIN_SIDE, mesh + 1)
    breaks[mesh // 2] = QUARTER_SPLIT  # keep the split coordinate exact
    interior: list[float] = []
    for k in range(1, mesh):
        mult = degree if k == mesh // 2 else 1
        interior.extend([float(breaks[k])] * mult)
    knots = [0.0] * (degree + 1) + interior + [DOMAIN_SIDE] * (degree + 1)
    return make_knot_vector(knots, degree)


def heating_g(n: float, x, y, normal) -> np.ndarray | float:
    """Boundary heating in centered coordinates (the [-1, 1] frame).

    Parameters
    ----------
    n : float
        Heating parameter, positive.
    x, y : float or ndarray
        Point coordinates in the centered frame; the coordinate along the
        normal axis must be +/-1 (the point lies on that edge).
    normal : sequence of 2 floats
        Outward unit normal of the edge, axis aligned.
    """
    if not n > 0:
        raise ValueError(f"n must be positive, got {n}")
    nrm = np.asarray(normal, dtype=float)
    if nrm.shape != (2,) or sorted(np.abs(nrm)) != [0.0, 1.0]:
        raise ValueError(f"normal must be an axis-aligned unit vector, got {normal}")
    axis = 0 if nrm[0] != 0.0 else 1
    coords = (np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    along, across = coords[axis], coords[1 - axis]
    if np.any(np.abs(np.abs(along) - 1.0) > 1e-12):
        raise ValueError("edge points must have |coordinate| = 1 along the normal axis")
    freq = 2.0 * math.pi * n
    g = nrm[axis] * freq * np.cos(freq * along) * np.sin(freq * across)
    return g if g.ndim else float(g)


def _span_tables(kv: KnotVector, rule: QuadRule, max_order: int):
    """Per nonempty span: (first active index, points, jac-scaled weights, ders).

    ``ders`` has shape (max_order + 1, npoints, degree + 1); row 0 holds
    basis values.
    """
    p = kv.degree
    tables = []
    for i in range(p, kv.num_basis):
        a, b = float(kv.knots[i]), float(kv.knots[i + 1])
        if b <= a:
            continue
        jac = 0.5 * (b - a)
        pts = 0.5 * (a + b) + jac * rule.nodes
        ders = np.empty((max_order + 1, rule.npoints, p + 1))
        for q, xq in enumerate(pts):
            be = eval_basis_derivatives(kv, float(xq), max_order)
            ders[:, q, :] = be.derivatives
        tables.append((i - p, pts, jac * rule.weights, ders))
    return tables


def _matrix_rule(kv: KnotVector, rule: QuadRule | None) -> QuadRule:
    # degree+1 points integrate the degree-2p products exactly
    return rule if rule is not None else gauss_legendre(kv.degree + 1)


def _load_rule(kv: KnotVector, rule: QuadRule | None) -> QuadRule:
    # generous default: right-hand sides are generally not polynomial
    return rule if rule is not None else gauss_legendre(min(MAX_POINTS, kv.degree + 8))


def mass_matrix_1d(kv: KnotVector, rule: QuadRule | None = None) -> np.ndarray:
    """Gram matrix M[i, k] = integral of B_i B_k over the knot-vector domain."""
    rule = _matrix_rule(kv, rule)
    mat = np.zeros((kv.num_basis, kv.num_basis))
    for first, _, w, ders in _span_tables(kv, rule, 0):
        local = np.einsum("q,qa,qc->ac", w, ders[0], ders[0])
        sl = slice(first, first + kv.degree + 1)
        mat[sl, sl] += local
    return mat


def stiffness_matrix_1d(kv: KnotVector, rule: QuadRule | None = None) -> np.ndarray:
    """Stiffness matrix K[i, k] = integral of B_i' B_k' over the domain."""
    rule = _matrix_rule(kv, rule)
    mat = np.zeros((kv.num_basis, kv.num_basis))
    for first, _, w, ders in _span_tables(kv, rule, 1):
        local = np.einsum("q,qa,qc->ac", w, ders[1], ders[1])
        sl = slice(first, first + kv.degree + 1)
        mat[sl, sl] += local
    return mat


def load_vector_1d(kv: KnotVector, f, rule: QuadRule | None = None) -> np.ndarray:
    """Load vector b[i] = integral of f(x) B_i(x) over the domain."""
    rule = _load_rule(kv, rule)
    vec = np.zeros(kv.num_basis)
    for first, pts, w, ders in _span_tables(kv, rule, 0):
        fvals = np.asarray(f(pts), dtype=float)
        vec[first : first + kv.degree + 1] += np.einsum("q,q,qa->a", w, fvals, ders[0])
    return vec


def _local_rows(dof_map: DofMap, i0: int, j0: int, px: int, py: int) -> np.ndarray:
    ii = (i0 + np.arange(px + 1))[:, None] * dof_map.ny
    jj = (j0 + np.arange(py + 1))[None, :]
    return (ii + jj).ravel()


def assemble_l2_projection(
    basis_x: KnotVector,
    basis_y: KnotVector,
    f,
    matrix_rule: QuadRule | None = None,
    rhs_rule: QuadRule | None = None,
) -> LinearSystem:
    """Assemble the 2D L2-projection system: mass matrix and load of ``f``.

    ``f`` must accept coordinate arrays of equal shape and evaluate
    elementwise. Quadrature runs element by element with a tensor Gauss
    rule; the matrix rule is exact for the spline products, the rhs rule
    defaults higher because ``f`` is arbitrary.
    """
    dof_map = DofMap(basis_x.num_basis, basis_y.num_basis)
    matrix = np.zeros((dof_map.size, dof_map.size))
    rhs = np.zeros(dof_map.size)
    px, py = basis_x.degree, basis_y.degree

    tx = _span_tables(basis_x, _matrix_rule(basis_x, matrix_rule), 0)
    ty = _span_tables(basis_y, _matrix_rule(basis_y, matrix_rule), 0)
    for i0, _, wx, dx in tx:
        for j0, _, wy, dy in ty:
            local = np.einsum("q,r,qa,rb,qc,rd->abcd", wx, wy, dx[0], dy[0], dx[0], dy[0])
            rows = _local_rows(dof_map, i0, j0, px, py)
            matrix[np.ix_(rows, rows)] += local.reshape(len(rows), len(rows))

    tx = _span_tables(basis_x, _load_rule(basis_x, rhs_rule), 0)
    ty = _span_tables(basis_y, _load_rule(basis_y, rhs_rule), 0)
    for i0, ptsx, wx, dx in tx:
        for j0, ptsy, wy, dy in ty:
            fvals = np.asarray(f(ptsx[:, None], ptsy[None, :]), dtype=float)
            local = np.einsum("q,r,qr,qa,rb->ab", wx, wy, fvals, dx[0], dy[0])
            rows = _local_rows(dof_map, i0, j0, px, py)
            np.add.at(rhs, rows, local.ravel())
    return LinearSystem(matrix=matrix, rhs=rhs, dof_map=dof_map)


def assemble_stiffness(
    basis_x: KnotVector, basis_y: KnotVector, rule: QuadRule | None = None
) -> LinearSystem:
    """Assemble the 2D stiffness matrix (grad-grad form); rhs starts at zero."""
    dof_map = DofMap(basis_x.num_basis, basis_y.num_basis)
    matrix = np.zeros((dof_map.size, dof_map.size))
    px, py = basis_x.degree, basis_y.degree
    tx = _span_tables(basis_x, _matrix_rule(basis_x, rule), 1)
    ty = _span_tables(basis_y, _matrix_rule(basis_y, rule), 1)
    for i0, _, wx, dx in tx:
        for j0, _, wy, dy in ty:
            local = np.einsum("q,r,qa,rb,qc,rd->abcd", wx, wy, dx[1], dy[0], dx[1], dy[0])
            local += np.einsum("q,r,qa,rb,qc,rd->abcd", wx, wy, dx[0], dy[1], dx[0], dy[1])
            rows = _local_rows(dof_map, i0, j0, px, py)
            matrix[np.ix_(rows, rows)] += local.reshape(len(rows), len(rows))
    return LinearSystem(matrix=matrix, rhs=np.zeros(dof_map.size), dof_map=dof_map)


def _neumann_load_once(
    basis_x: KnotVector, basis_y: KnotVector, n: float, rule: QuadRule
) -> np.ndarray:
    load = np.zeros((basis_x.num_basis, basis_y.num_basis))
    for edge in rectangle_edges(basis_x, basis_y).values():
        kv_tan = basis_x if edge.tangent_axis == 0 else basis_y
        kv_fix = basis_y if edge.tangent_axis == 0 else basis_x
        fixed_eval = eval_basis(kv_fix, edge.fixed_value)
        f0 = fixed_eval.first_index
        for t0, pts, w, ders in _span_tables(kv_tan, rule, 0):
            if edge.tangent_axis == 0:
                xc, yc = pts - 1.0, np.full_like(pts, edge.fixed_value - 1.0)
            else:
                xc, yc = np.full_like(pts, edge.fixed_value - 1.0), pts - 1.0
            g = heating_g(n, xc, yc, edge.normal)
            tangent = np.einsum("q,q,qa->a", w, g, ders[0])
            block = np.outer(tangent, fixed_eval.values)
            nt, nf = len(tangent), len(fixed_eval.values)
            if edge.tangent_axis == 0:
                load[t0 : t0 + nt, f0 : f0 + nf] += block
            else:
                load[f0 : f0 + nf, t0 : t0 + nt] += block.T
    return load.ravel()


def assemble_neumann_load(
    basis_x: KnotVector,
    basis_y: KnotVector,
    n: float,
    rule: QuadRule | None = None,
    tol: float = 1e-12,
) -> np.ndarray:
    """Boundary load b[(i, j)] = integral of g B_i B_j over the square boundary.

    With ``rule`` given, a single pass uses exactly that rule. Otherwise
    the heating is oscillatory, so the edge rule starts at degree+2 points
    per span and doubles until the load changes by less than ``tol`` in
    the max norm (capped at the largest available rule).
    """
    if rule is not None:
        return _neumann_load_once(basis_x, basis_y, n, rule)
    npts = max(basis_x.degree, basis_y.degree) + 2
    load = _neumann_load_once(basis_x, basis_y, n, gauss_legendre(npts))
    while npts < MAX_POINTS:
        npts = min(2 * npts, MAX_POINTS)
        refined = _neumann_load_once(basis_x, basis_y, n, gauss_legendre(npts))
        done = np.max(np.abs(refined - load)) < tol
        load = refined
        if done:
            break
    return load


def dirichlet_indices_1d(kv: KnotVector, split: float = QUARTER_SPLIT) -> np.ndarray:
    """Indices of basis functions whose support lies inside [domain start, split]."""
    return np.array(
        [i for i in range(kv.num_basis) if kv.support(i)[1] <= split], dtype=int
    )


def dirichlet_flat_indices(problem: HeatProblem) -> np.ndarray:
    """Flat dof indices constrained by the L-shape Dirichlet condition."""
    kv = problem.knot_vector()
    idx = dirichlet_indices_1d(kv)
    dof_map = problem.dof_map()
    return np.array([dof_map.flat(i, j) for i in idx for j in idx], dtype=int)


def apply_dirichlet_lshape(system: LinearSystem, problem: HeatProblem) -> LinearSystem:
    """Constrain the quarter-supported coefficients to zero.

    For each constrained row: zero the row, put 1.0 on the diagonal, zero
    the right-hand side. Returns a new system; the input is untouched.
    """
    expected = problem.dof_map()
    if system.dof_map != expected:
        raise ValueError(
            f"system dof map {system.dof_map} does not match problem {expected}"
        )
    rows = dirichlet_flat_indices(problem)
    matrix = system.matrix.copy()
    rhs = system.rhs.copy()
    matrix[rows, :] = 0.0
    matrix[rows, rows] = 1.0
    rhs[rows] = 0.0
    return LinearSystem(matrix=matrix, rhs=rhs, dof_map=system.dof_map)


def solve_system(system: LinearSystem) -> np.ndarray:
    """Direct dense solve by LU factorization with partial pivoting."""
    matrix = np.asarray(system.matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got shape {matrix.shape}")
    if matrix.shape[0] != len(system.rhs):
        raise ValueError("rhs length does not match matrix size")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix)
    diag = np.abs(np.diag(lu))
    zero = np.flatnonzero(diag == 0.0)
    if zero.size:
        raise SingularMatrixError(int(zero[0]))
    return scipy.linalg.lu_solve((lu, piv), system.rhs)


def build_heat_system(problem: HeatProblem) -> LinearSystem:
    """Stiffness + Neumann heating + L-shape Dirichlet rows, ready to solve."""
    kv = problem.knot_vector()
    system = assemble_stiffness(kv, kv)
    system.rhs = assemble_neumann_load(kv, kv, problem.n)
    return apply_dirichlet_lshape(system, problem)


def solve_heat_problem(problem: HeatProblem) -> SplineField2D:
    """Solve the L-shape problem and return the coefficient field."""
    system = build_heat_system(problem)
    solution = solve_system(system)
    kv = problem.knot_vector()
    return make_field(kv, kv, solution.reshape(kv.num_basis, kv.num_basis))


# --- 1D reference solve ----------------------------------------------------

QUADRATIC_UNIT_KNOTS = (0.0, 0.0, 0.0, 1.0, 1.0, 1.0)


def unit_quadratic_basis() -> KnotVector:
    """The three quadratic basis functions (1-x)^2, 2x(1-x), x^2 on [0, 1]."""
    return make_knot_vector(QUADRATIC_UNIT_KNOTS, 2)


def sine_projection_rhs(n: float) -> np.ndarray:
    """Closed-form loads integral of B_i(x) sin(n pi x) dx on [0, 1]."""
    if not n > 0:
        raise ValueError(f"n must be positive, got {n}")
    pi = math.pi
    s, c = math.sin(pi * n), math.cos(pi * n)
    denom = pi ** 3 * n ** 3
    r1 = (pi ** 2 * n ** 2 + 2.0 * c - 2.0) / denom
    r2 = (-2.0 * pi * n * s - 4.0 * c + 4.0) / denom
    r3 = ((2.0 - pi ** 2 * n ** 2) * c + 2.0 * pi * n * s - 2.0) / denom
    return np.array([r1, r2, r3])


def project_sine_1d(n: float) -> np.ndarray:
    """L2-project sin(n pi x) onto the quadratic basis on [0, 1].

    The Gram matrix is assembled by quadrature; the load uses the closed
    forms of :func:`sine_projection_rhs`. Returns the three coefficients.
    """
    kv = unit_quadratic_basis()
    system = LinearSystem(
        matrix=mass_matrix_1d(kv), rhs=sine_projection_rhs(n), dof_map=DofMap(3, 1)
    )
    return solve_system(system)


# --- field comparison and export -------------------------------------------


def _eval_on_grid(field, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    if isinstance(field, SplineField2D):
        _, _, values = sample_field_grid(field, len(xs), len(ys))
        return values
    if callable(field):
        return np.asarray(field(xs[:, None], ys[None, :]), dtype=float)
    raise TypeError(f"expected SplineField2D or callable, got {type(field)!r}")


def lshape_mask(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Boolean grid mask of points belonging to the L shape (quarter removed)."""
    return (xs[:, None] >= QUARTER_SPLIT) | (ys[None, :] >= QUARTER_SPLIT)


def pointwise_mse(
    field_a,
    field_b,
    nx: int = 100,
    ny: int = 100,
    domain: tuple[tuple[float, float], tuple[float, float]] | None = None,
    exclude_lower_left: bool = True,
) -> float:
    """Mean squared difference of two fields on a uniform grid.

    Fields are :class:`SplineField2D` instances or vectorized callables
    ``f(x, y)``. With ``exclude_lower_left`` the grid points strictly
    inside the removed quarter are dropped, so the mean runs over the
    L shape only.
    """
    if nx < 2 or ny < 2:
        raise ValueError(f"grid sizes must be >= 2, got ({nx}, {ny})")
    if domain is None:
        for f in (field_a, field_b):
            if isinstance(f, SplineField2D):
                domain = (f.basis_x.domain, f.basis_y.domain)
                break
        else:
            raise ValueError("domain required when both fields are callables")
    xs = np.linspace(*domain[0], nx)
    ys = np.linspace(*domain[1], ny)
    diff = _eval_on_grid(field_a, xs, ys) - _eval_on_grid(field_b, xs, ys)
    if exclude_lower_left:
        mask = lshape_mask(xs, ys)
        return float(np.mean(diff[mask] ** 2))
    return float(np.mean(diff ** 2))


def export_solution_csv(field: SplineField2D, path, nx: int = 100, ny: int = 100) -> None:
    """Write grid samples as ``x,y,u`` rows (row-major, x outer)."""
    xs, ys, values = sample_field_grid(field, nx, ny)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "y", "u"])
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(values[i, j]))])


def export_coefficients_csv(field: SplineField2D, path) -> None:
    """Write the coefficient array as ``i,j,u_ij`` rows (row-major)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["i", "j", "u_ij"])
        ni, nj = field.coefficients.shape
        for i in range(ni):
            for j in range(nj):
                writer.writerow([i, j, repr(float(field.coefficients[i, j]))])
