"""B-spline basis evaluation and tensor-product spline fields.

Basis values come from the local Cox-de Boor triangle: at any parameter
only the degree+1 functions active on the containing span are computed.
Derivatives use the knot-difference recurrence on the same triangle.
Two-dimensional fields are tensor products of two univariate bases with a
rectangular coefficient array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class KnotVector:
    """Non-decreasing knot sequence with a polynomial degree.

    Attributes
    ----------
    knots : ndarray
        Non-decreasing knot values; no value repeats more than degree+1
        times.
    degree : int
        Polynomial degree of the basis, at least 1.

    Notes
    -----
    With m+1 knots and degree p there are n = m - p basis functions.
    The basis is evaluated on the domain [knots[p], knots[n]].
    """

    knots: np.ndarray
    degree: int

    @property
    def num_basis(self) -> int:
        """Number of basis functions defined by this knot vector."""
        return len(self.knots) - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        """Parameter interval on which the basis forms a partition of unity."""
        return float(self.knots[self.degree]), float(self.knots[self.num_basis])

    def spans(self) -> list[tuple[float, float]]:
        """Nonempty knot intervals covering the domain, in ascending order."""
        out = []
        for i in range(self.degree, self.num_basis):
            a, b = float(self.knots[i]), float(self.knots[i + 1])
            if b > a:
                out.append((a, b))
        return out

    def support(self, i: int) -> tuple[float, float]:
        """Support interval [knots[i], knots[i + degree + 1]] of basis function i."""
        if not 0 <= i < self.num_basis:
            raise ValueError(f"basis index {i} out of range [0, {self.num_basis})")
        return float(self.knots[i]), float(self.knots[i + self.degree + 1])


def make_knot_vector(knots, degree: int) -> KnotVector:
    """Validate a knot sequence and wrap it in a :class:`KnotVector`.

    Parameters
    ----------
    knots : array_like
        Non-decreasing knot values.
    degree : int
        Polynomial degree, at least 1.

    Raises
    ------
    ValueError
        If the sequence decreases anywhere, is too short to carry a single
        basis function, or any knot value repeats more than degree+1 times.
    """
    if not isinstance(degree, (int, np.integer)) or degree < 1:
        raise ValueError(f"degree must be an integer >= 1, got {degree!r}")
    arr = np.asarray(knots, dtype=float).copy()
    if arr.ndim != 1:
        raise ValueError("knots must be a one-dimensional sequence")
    if len(arr) < 2 * (degree + 1):
        raise ValueError(
            f"need at least {2 * (degree + 1)} knots for degree {degree}, got {len(arr)}"
        )
    if np.any(np.diff(arr) < 0):
        raise ValueError("knots must be non-decreasing")
    _, counts = np.unique(arr, return_counts=True)
    if np.any(counts > degree + 1):
        raise ValueError(f"knot multiplicity exceeds degree + 1 = {degree + 1}")
    arr.setflags(write=False)
    kv = KnotVector(knots=arr, degree=int(degree))
    if kv.domain[0] >= kv.domain[1]:
        raise ValueError("knot vector has an empty domain")
    return kv


@dataclass(frozen=True)
class BasisEval:
    """Active basis values (and optional derivatives) at one parameter.

    Attributes
    ----------
    span : int
        Knot span index s with knots[s] <= x < knots[s+1].
    values : ndarray
        The degree+1 active basis values; they sum to 1.
    derivatives : ndarray or None
        When requested, rows 0..max_order of derivatives for the same
        active functions; row 0 repeats ``values``.
    """

    span: int
    values: np.ndarray
    derivatives: np.ndarray | None = None

    @property
    def first_index(self) -> int:
        """Global index of the first active basis function."""
        return self.span - (len(self.values) - 1)


def find_span(kv: KnotVector, x: float) -> int:
    """Return the knot span index containing ``x``.

    The last span is closed on the right so the domain endpoint belongs
    to it.
    """
    lo, hi = kv.domain
    if not lo <= x <= hi:
        raise ValueError(f"parameter {x} outside domain [{lo}, {hi}]")
    n = kv.num_basis
    if x >= kv.knots[n]:
        # right domain endpoint: step back past any repeated end knots
        span = n - 1
        while kv.knots[span + 1] <= kv.knots[span]:
            span -= 1
        return span
    return int(np.searchsorted(kv.knots, x, side="right")) - 1


def _basis_values(knots: np.ndarray, p: int, span: int, x: float) -> np.ndarray:
    values = np.empty(p + 1)
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    values[0] = 1.0
    for j in range(1, p + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = 0.0
        for r in range(j):
            tmp = values[r] / (right[r + 1] + left[j - r])
            values[r] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        values[j] = saved
    return values


def _basis_all_derivatives(
    knots: np.ndarray, p: int, span: int, x: float, max_order: int
) -> np.ndarray:
    # Cox-de Boor triangle with knot differences kept on the lower part,
    # then the usual two-row alternation for the derivative coefficients.
    ndu = np.empty((p + 1, p + 1))
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            tmp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        ndu[j, j] = saved

    ders = np.zeros((max_order + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.empty((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, max_order + 1):
            dd = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                dd = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                dd += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                dd += a[s2, k] * ndu[r, pk]
            ders[k, r] = dd
            s1, s2 = s2, s1
    factor = float(p)
    for k in range(1, max_order + 1):
        ders[k, :] *= factor
        factor *= p - k
    return ders


def eval_basis(kv: KnotVector, x: float) -> BasisEval:
    """Evaluate the active basis functions at parameter ``x``.

    Parameters
    ----------
    kv : KnotVector
        Basis description.
    x : float
        Parameter inside the knot-vector domain.

    Returns
    -------
    BasisEval
        Span index and the degree+1 active values.
    """
    span = find_span(kv, x)
    values = _basis_values(kv.knots, kv.degree, span, float(x))
    return BasisEval(span=span, values=values)


def eval_basis_derivatives(kv: KnotVector, x: float, max_order: int) -> BasisEval:
    """Evaluate active basis values and derivatives up to ``max_order``.

    Parameters
    ----------
    kv : KnotVector
        Basis description.
    x : float
        Parameter inside the knot-vector domain.
    max_order : int
        Highest derivative order, between 0 and the degree.

    Returns
    -------
    BasisEval
        ``derivatives`` holds rows 0..max_order for the active functions.
    """
    if not 0 <= max_order <= kv.degree:
        raise ValueError(
            f"max_order must be in [0, {kv.degree}] for degree {kv.degree}, got {max_order}"
        )
    span = find_span(kv, x)
    ders = _basis_all_derivatives(kv.knots, kv.degree, span, float(x), max_order)
    return BasisEval(span=span, values=ders[0].copy(), derivatives=ders)


@dataclass(frozen=True, eq=False)
class SplineField2D:
    """Tensor-product spline u(x, y) = sum_ij c[i, j] B_i(x) B_j(y).

    Attributes
    ----------
    basis_x, basis_y : KnotVector
        Univariate bases of the two directions.
    coefficients : ndarray
        Array of shape (basis_x.num_basis, basis_y.num_basis).
    """

    basis_x: KnotVector
    basis_y: KnotVector
    coefficients: np.ndarray


def make_field(basis_x: KnotVector, basis_y: KnotVector, coefficients) -> SplineField2D:
    """Wrap a coefficient array into a :class:`SplineField2D`, checking shape."""
    coeffs = np.asarray(coefficients, dtype=float).copy()
    expected = (basis_x.num_basis, basis_y.num_basis)
    if coeffs.shape != expected:
        raise ValueError(f"coefficient shape {coeffs.shape} does not match bases {expected}")
    coeffs.setflags(write=False)
    return SplineField2D(basis_x=basis_x, basis_y=basis_y, coefficients=coeffs)


def eval_field(field: SplineField2D, x: float, y: float) -> float:
    """Evaluate the field at one point using only the active basis block."""
    bx = eval_basis(field.basis_x, x)
    by = eval_basis(field.basis_y, y)
    i0, j0 = bx.first_index, by.first_index
    block = field.coefficients[i0 : i0 + len(bx.values), j0 : j0 + len(by.values)]
    return float(bx.values @ block @ by.values)


def _collocation_matrix(kv: KnotVector, points: np.ndarray) -> np.ndarray:
    mat = np.zeros((len(points), kv.num_basis))
    for row, x in enumerate(points):
        be = eval_basis(kv, float(x))
        mat[row, be.first_index : be.first_index + len(be.values)] = be.values
    return mat


def sample_field_grid(
    field: SplineField2D, nx: int, ny: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample the field on a uniform tensor grid over its domain.

    Parameters
    ----------
    field : SplineField2D
        Field to sample.
    nx, ny : int
        Grid sizes per direction, at least 2 (endpoints included).

    Returns
    -------
    (xs, ys, values)
        1D coordinate arrays and the (nx, ny) value array with
        values[i, j] = u(xs[i], ys[j]).
    """
    if nx < 2 or ny < 2:
        raise ValueError(f"grid sizes must be >= 2, got ({nx}, {ny})")
    xs = np.linspace(*field.basis_x.domain, nx)
    ys = np.linspace(*field.basis_y.domain, ny)
    bx = _collocation_matrix(field.basis_x, xs)
    by = _collocation_matrix(field.basis_y, ys)
    return xs, ys, bx @ field.coefficients @ by.T
