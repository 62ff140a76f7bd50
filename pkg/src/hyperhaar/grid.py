"""Exact algebra of piecewise-constant functions on dyadic grids.

Everything downstream (hyperbolic sums, Riesz products, coincidence sums,
discrepancy work) is carried by one representation: a dense array of cell
values on a dyadic grid in dimension 1-3.  Two scalar backends live behind
the same interface:

* ``"float"`` -- float64 cells, fast, for measurements and fits;
* ``"exact"`` -- integer or ``fractions.Fraction`` cells (numpy integer
  dtypes or ``object`` arrays), for identity verification with zero
  tolerance.

Cells are half-open boxes: axis ``i`` at level ``m_i`` splits ``[0,1)`` into
``2**m_i`` intervals ``[j*2**-m_i, (j+1)*2**-m_i)``.  The point ``x = 1`` is
excluded (measure zero).

The Haar transform uses an in-place butterfly layout along each axis: index
``0`` holds the constant (mean) factor and index ``2**k + j`` holds the
coefficient of the L-infinity-normalized Haar function of the interval
``(level k, position j)``.  Synthesis is division-free (children are
``parent -+ coefficient``), so it is exact over integers and costs
O(cells) per axis; that property is what makes the large exact
constructions in the other modules feasible.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: Cap on the total level (sum over axes); 2**MAX_TOTAL_LEVEL cells at most.
#: Mutable on purpose: tests and the CLI budget flag may lower or raise it.
MAX_TOTAL_LEVEL = 27

_MAGIC = b"GRIDFN01"


class GridError(Exception):
    """Base class for grid-layer failures."""


class InsufficientResolutionError(GridError):
    """A grid is too coarse to represent the requested object exactly."""


class GridTooLargeError(GridError):
    """A construction would exceed the configured cell cap."""


class BudgetExceededError(GridError):
    """A combinatorial enumeration would exceed its configured budget."""


# ---------------------------------------------------------------------------
# dyadic geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DyadicInterval:
    """Half-open dyadic interval ``[position * 2**-level, (position+1) * 2**-level)``."""

    level: int
    position: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError(f"level must be nonnegative, got {self.level}")
        if not 0 <= self.position < (1 << self.level):
            raise ValueError(
                f"position {self.position} out of range for level {self.level}"
            )

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def left(self) -> Fraction:
        return Fraction(self.position, 1 << self.level)

    def contains(self, other: "DyadicInterval") -> bool:
        """True iff ``other`` is a subinterval of ``self`` (dyadic nesting)."""
        if other.level < self.level:
            return False
        return (other.position >> (other.level - self.level)) == self.position

    def haar_sign_on(self, sub: "DyadicInterval") -> int:
        """Value of this interval's Haar function on a strict subinterval.

        ``sub`` must be strictly finer and contained in ``self``; the value
        is -1 on the left half and +1 on the right half.
        """
        if sub.level <= self.level or not self.contains(sub):
            raise ValueError("sub must be a strictly finer subinterval")
        bit = (sub.position >> (sub.level - self.level - 1)) & 1
        return 1 if bit else -1


@dataclass(frozen=True, slots=True)
class DyadicRectangle:
    """Product of dyadic intervals, one per coordinate (d in 1..3)."""

    sides: tuple[DyadicInterval, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.sides) <= 3:
            raise ValueError("rectangles live in dimension 1..3")

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(side.level for side in self.sides)

    @property
    def volume(self) -> Fraction:
        return Fraction(1, 1 << sum(side.level for side in self.sides))


def rectangle(shape: tuple[int, ...], positions: tuple[int, ...]) -> DyadicRectangle:
    """Convenience constructor from per-axis levels and positions."""
    return DyadicRectangle(
        tuple(DyadicInterval(k, j) for k, j in zip(shape, positions, strict=True))
    )


@dataclass(frozen=True, slots=True)
class Resolution:
    """Per-axis dyadic levels of a grid; the cell count is ``2**sum(levels)``."""

    levels: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.levels) <= 3:
            raise ValueError("resolutions live in dimension 1..3")
        if any(m < 0 for m in self.levels):
            raise ValueError("levels must be nonnegative")
        if sum(self.levels) > MAX_TOTAL_LEVEL:
            raise GridTooLargeError(
                f"grid too large: total level {sum(self.levels)} exceeds cap "
                f"{MAX_TOTAL_LEVEL}"
            )

    @classmethod
    def uniform(cls, level: int, d: int) -> "Resolution":
        return cls((level,) * d)

    @property
    def d(self) -> int:
        return len(self.levels)

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(1 << m for m in self.levels)

    @property
    def cells(self) -> int:
        return 1 << sum(self.levels)

    def refines(self, other: "Resolution") -> bool:
        """True iff ``self`` is at least as fine as ``other`` in every axis."""
        if self.d != other.d:
            return False
        return all(a >= b for a, b in zip(self.levels, other.levels))

    def join(self, other: "Resolution") -> "Resolution":
        """Coordinatewise max -- the coarsest common refinement."""
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        return Resolution(tuple(max(a, b) for a, b in zip(self.levels, other.levels)))


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------

_EXACT_KINDS = ("i", "u", "O")


def _mode_of_dtype(dtype: np.dtype) -> str:
    if dtype.kind in ("i", "u", "O"):
        return "exact"
    if dtype.kind == "f":
        return "float"
    raise TypeError(f"unsupported dtype {dtype}")


@dataclass(frozen=True)
class GridFunction:
    """Piecewise-constant function on ``[0,1)**d``, one value per grid cell.

    ``values`` has shape ``resolution.grid_shape`` (row-major over the cells).
    ``mode`` is ``"exact"`` (integer dtype or object array of ints/Fractions)
    or ``"float"`` (float64).  Instances are treated as immutable.
    """

    resolution: Resolution
    values: np.ndarray
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.values.shape != self.resolution.grid_shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match resolution "
                f"{self.resolution.grid_shape}"
            )
        if _mode_of_dtype(self.values.dtype) != self.mode:
            raise ValueError(f"dtype {self.values.dtype} inconsistent with mode {self.mode!r}")

    @classmethod
    def from_values(cls, resolution: Resolution, values, mode: str | None = None) -> "GridFunction":
        arr = np.asarray(values)
        if mode is None:
            mode = _mode_of_dtype(arr.dtype)
        elif mode == "float" and arr.dtype != np.float64:
            arr = arr.astype(np.float64)
        elif mode == "exact" and arr.dtype.kind not in ("i", "u", "O"):
            raise ValueError("exact mode needs integer or object values")
        return cls(resolution, arr.reshape(resolution.grid_shape), mode)

    @classmethod
    def constant(cls, value, resolution: Resolution, mode: str = "exact") -> "GridFunction":
        if mode == "float":
            arr = np.full(resolution.grid_shape, float(value), dtype=np.float64)
        elif isinstance(value, Fraction):
            arr = np.full(resolution.grid_shape, value, dtype=object)
        else:
            arr = np.full(resolution.grid_shape, int(value), dtype=np.int64)
        return cls(resolution, arr, mode)

    @classmethod
    def zero(cls, resolution: Resolution, mode: str = "exact") -> "GridFunction":
        return cls.constant(0, resolution, mode)

    @property
    def d(self) -> int:
        return self.resolution.d

    def to_float(self) -> "GridFunction":
        if self.mode == "float":
            return self
        arr = np.vectorize(float, otypes=[np.float64])(self.values) \
            if self.values.dtype == object else self.values.astype(np.float64)
        return GridFunction(self.resolution, arr, "float")

    def to_exact(self) -> "GridFunction":
        """Exact view; float values convert via Fraction(float), which is exact."""
        if self.mode == "exact":
            return self
        arr = np.vectorize(Fraction, otypes=[object])(self.values)
        return GridFunction(self.resolution, arr, "exact")

    def float_values(self) -> np.ndarray:
        return self.to_float().values


def refine(f: GridFunction, resolution: Resolution) -> GridFunction:
    """Replicate cell values onto a finer grid; preserves all norms exactly."""
    if not resolution.refines(f.resolution):
        raise InsufficientResolutionError(
            f"insufficient resolution: {resolution.levels} does not refine "
            f"{f.resolution.levels}"
        )
    arr = f.values
    for axis, (m_new, m_old) in enumerate(zip(resolution.levels, f.resolution.levels)):
        if m_new > m_old:
            arr = np.repeat(arr, 1 << (m_new - m_old), axis=axis)
    return GridFunction(resolution, arr, f.mode)


def common_refinement(f: GridFunction, g: GridFunction) -> tuple[GridFunction, GridFunction]:
    res = f.resolution.join(g.resolution)
    return refine(f, res), refine(g, res)


def _exact_array(arr: np.ndarray) -> np.ndarray:
    return arr if arr.dtype == object else arr.astype(object)


def _binary(f: GridFunction, g, op) -> GridFunction:
    """Cellwise binary op against a GridFunction or a scalar."""
    if isinstance(g, GridFunction):
        a, b = common_refinement(f, g)
        if a.mode == "exact" and b.mode == "exact":
            arr = op(_exact_array(a.values), _exact_array(b.values))
            return GridFunction(a.resolution, arr, "exact")
        arr = op(a.float_values(), b.float_values())
        return GridFunction(a.resolution, arr, "float")
    # scalar operand
    if f.mode == "exact" and isinstance(g, (int, Fraction)) and not isinstance(g, bool):
        return GridFunction(f.resolution, op(_exact_array(f.values), g), "exact")
    return GridFunction(f.resolution, op(f.float_values(), float(g)), "float")


def add(f: GridFunction, g) -> GridFunction:
    return _binary(f, g, lambda a, b: a + b)


def sub(f: GridFunction, g) -> GridFunction:
    return _binary(f, g, lambda a, b: a - b)


def mul(f: GridFunction, g) -> GridFunction:
    return _binary(f, g, lambda a, b: a * b)


def scale(f: GridFunction, c) -> GridFunction:
    return mul(f, c) if not isinstance(c, GridFunction) else _binary(f, c, lambda a, b: a * b)


def affine(f: GridFunction, a, b) -> GridFunction:
    """Return ``a*f + b`` cellwise."""
    return add(scale(f, a), GridFunction.constant(
        b, f.resolution,
        "exact" if f.mode == "exact" and isinstance(a, (int, Fraction))
        and isinstance(b, (int, Fraction)) else "float"))


def grids_equal(f: GridFunction, g: GridFunction) -> bool:
    """Exact cellwise equality after refining both to the common grid."""
    a, b = common_refinement(f, g)
    return bool(np.all(a.values == b.values))


def max_abs_diff(f: GridFunction, g: GridFunction) -> float:
    a, b = common_refinement(f, g)
    return float(np.max(np.abs(a.float_values() - b.float_values()))) if a.values.size else 0.0


# ---------------------------------------------------------------------------
# expectation, inner products, norms
# ---------------------------------------------------------------------------


def expectation(f: GridFunction):
    """Mean value = 2**-(m1+...+md) * sum of cells; Fraction in exact mode."""
    if f.mode == "exact":
        total = f.values.sum()
        return Fraction(total) / f.resolution.cells
    return float(np.sum(f.values)) / f.resolution.cells


def inner_product(f: GridFunction, g: GridFunction):
    """E(f*g), exact when both operands are exact."""
    return expectation(mul(f, g))


def lp_moment(f: GridFunction, p: int):
    """E|f|**p for integer p >= 1; exact (Fraction) in exact mode."""
    if not isinstance(p, int) or p < 1:
        raise ValueError("lp_moment needs an integer p >= 1")
    if f.mode == "exact":
        if f.values.dtype != object:
            return Fraction(_int_abs_power_sum(f.values, p), f.resolution.cells)
        vals = _exact_array(f.values)
        powered = vals ** p if p % 2 == 0 else abs(vals) ** p
        return Fraction(powered.sum()) / f.resolution.cells
    return float(np.mean(np.abs(f.values) ** p))


def _int_abs_power_sum(values: np.ndarray, p: int) -> int:
    """Exact sum of |v|**p over an integer array, chunked; falls back to
    Python-int arithmetic when int64 powers could overflow."""
    flat = values.reshape(-1)
    if flat.size == 0:
        return 0
    chunk = 1 << 22
    peak = int(np.max(np.abs(flat)))
    total = 0
    safe = peak == 0 or peak ** p < (1 << 62) // min(chunk, flat.size)
    for start in range(0, flat.size, chunk):
        part = np.abs(flat[start:start + chunk].astype(np.int64))
        if safe:
            total += int(np.sum(part ** p))
        else:
            total += sum(int(v) ** p for v in part)
    return total


def lp_norm(f: GridFunction, p) -> float:
    """(E|f|**p)**(1/p).  For integer p in exact mode the moment is exact and
    only the final root is floating point; otherwise float throughout."""
    if p <= 0:
        raise ValueError("p must be positive")
    if f.mode == "exact" and isinstance(p, int):
        moment = lp_moment(f, p)
        return float(moment) ** (1.0 / p)
    return float(np.mean(np.abs(f.float_values()) ** float(p)) ** (1.0 / float(p)))


def sup_norm(f: GridFunction):
    """max |cell value| -- exact, since f is piecewise constant on its grid."""
    if f.values.size == 0:
        return 0
    if f.mode == "exact":
        return max(abs(v) for v in f.values.flat) if f.values.dtype == object \
            else int(np.max(np.abs(f.values)))
    return float(np.max(np.abs(f.values)))


def distribution(f: GridFunction, lam):
    """P(|f| > lam) as a measure; Fraction in exact mode."""
    if f.mode == "exact":
        count = int(np.count_nonzero(abs(_exact_array(f.values)) > lam))
        return Fraction(count, f.resolution.cells)
    return float(np.count_nonzero(np.abs(f.values) > float(lam))) / f.resolution.cells


# ---------------------------------------------------------------------------
# Haar basis on the grid
# ---------------------------------------------------------------------------


def haar_1d(interval: DyadicInterval, resolution: Resolution) -> GridFunction:
    """L-infinity normalized Haar function: -1 on the left half of the
    interval, +1 on the right half, 0 outside."""
    if resolution.d != 1:
        raise ValueError("haar_1d needs a 1-dimensional resolution")
    vec = _haar_axis_values(interval, resolution.levels[0])
    return GridFunction(resolution, vec, "exact")


def _haar_axis_values(interval: DyadicInterval, m: int) -> np.ndarray:
    if m < interval.level + 1:
        raise InsufficientResolutionError(
            f"insufficient resolution: level {m} cannot represent the halves "
            f"of an interval at level {interval.level}"
        )
    vec = np.zeros(1 << m, dtype=np.int8)
    width = 1 << (m - interval.level)
    start = interval.position * width
    half = width >> 1
    vec[start:start + half] = -1
    vec[start + half:start + width] = 1
    return vec


def haar_tensor(rect: DyadicRectangle, resolution: Resolution) -> GridFunction:
    """Tensor Haar function of a rectangle: the product of per-axis Haar values."""
    if resolution.d != rect.d:
        raise ValueError("dimension mismatch")
    arr = np.ones((1,) * rect.d, dtype=np.int8)
    for axis, side in enumerate(rect.sides):
        vec = _haar_axis_values(side, resolution.levels[axis])
        shape = [1] * rect.d
        shape[axis] = vec.size
        arr = arr * vec.reshape(shape)
    return GridFunction(resolution, arr.astype(np.int8), "exact")


def indicator_grid(rect: DyadicRectangle, resolution: Resolution) -> GridFunction:
    """Indicator function of a dyadic rectangle on the grid."""
    if resolution.d != rect.d:
        raise ValueError("dimension mismatch")
    arr = np.ones((1,) * rect.d, dtype=np.int8)
    for axis, side in enumerate(rect.sides):
        m = resolution.levels[axis]
        if m < side.level:
            raise InsufficientResolutionError(
                f"insufficient resolution: level {m} < interval level {side.level}"
            )
        vec = np.zeros(1 << m, dtype=np.int8)
        width = 1 << (m - side.level)
        vec[side.position * width:(side.position + 1) * width] = 1
        shape = [1] * rect.d
        shape[axis] = vec.size
        arr = arr * vec.reshape(shape)
    return GridFunction(resolution, arr.astype(np.int8), "exact")


# -- transform kernels -------------------------------------------------------


def synthesize_axis0(coef: np.ndarray, signed: bool = True) -> np.ndarray:
    """Invert the Haar layout along axis 0 with the division-free butterfly.

    ``signed=True`` is the Haar synthesis (left child = parent - c, right
    child = parent + c).  ``signed=False`` sends both children to
    ``parent + c``, which accumulates coefficients over cell ancestries --
    exactly the map that turns squared coefficients into the squared square
    function.  Works for integer, float and object dtypes alike; exact
    whenever the dtype is.
    """
    size = coef.shape[0]
    m = size.bit_length() - 1
    if size != (1 << m):
        raise ValueError("axis length must be a power of two")
    cur = coef[0:1].copy()
    for k in range(m):
        c = coef[1 << k: 1 << (k + 1)]
        nxt = np.empty((2 << k,) + coef.shape[1:], dtype=coef.dtype)
        nxt[0::2] = (cur - c) if signed else (cur + c)
        nxt[1::2] = cur + c
        cur = nxt
    return cur


def _analyze_axis0(vals: np.ndarray, exact: bool) -> np.ndarray:
    size = vals.shape[0]
    m = size.bit_length() - 1
    if size != (1 << m):
        raise ValueError("axis length must be a power of two")
    half = Fraction(1, 2) if exact else 0.5
    cur = vals.astype(object) if exact else vals.astype(np.float64)
    out = np.empty_like(cur)
    for k in range(m - 1, -1, -1):
        even = cur[0::2]
        odd = cur[1::2]
        out[1 << k: 1 << (k + 1)] = (odd - even) * half
        cur = (odd + even) * half
    out[0:1] = cur
    return out


def apply_along_axis0(fn, arr: np.ndarray, axis: int, *args, **kwargs) -> np.ndarray:
    moved = np.moveaxis(arr, axis, 0)
    return np.moveaxis(fn(moved, *args, **kwargs), 0, axis)


@dataclass(frozen=True)
class HaarSpectrum:
    """Tensor Haar coefficients of a GridFunction.

    ``coefficients`` has the same shape as the value grid.  Along each axis,
    index 0 is the constant factor and index ``2**k + j`` is the Haar
    function of interval ``(k, j)``; a tensor entry is the coefficient of
    the product of its per-axis factors.  The support weight of an entry is
    the product of its factor supports (1 for constant factors, ``2**-k``
    otherwise), which is the Parseval weight for the L-infinity-normalized
    basis.
    """

    resolution: Resolution
    coefficients: np.ndarray
    mode: str


def haar_analyze(f: GridFunction) -> HaarSpectrum:
    exact = f.mode == "exact"
    arr = f.values
    for axis in range(f.d):
        arr = apply_along_axis0(_analyze_axis0, arr, axis, exact)
    return HaarSpectrum(f.resolution, arr, f.mode)


def haar_synthesize(spectrum: HaarSpectrum) -> GridFunction:
    arr = spectrum.coefficients
    if spectrum.mode == "exact" and arr.dtype.kind not in ("i", "u", "O"):
        raise ValueError("exact spectrum needs integer or object coefficients")
    for axis in range(spectrum.resolution.d):
        arr = apply_along_axis0(synthesize_axis0, arr, axis, True)
    return GridFunction(spectrum.resolution, arr, spectrum.mode)


def _support_weights(m: int) -> np.ndarray:
    """Parseval weight per spectrum index along one axis of level m."""
    w = np.empty(1 << m, dtype=np.float64)
    w[0] = 1.0
    for k in range(m):
        w[1 << k: 1 << (k + 1)] = 2.0 ** -k
    return w


def parseval_l2_moment(spectrum: HaarSpectrum):
    """||f||_2**2 from the spectrum: sum of c**2 times support weight."""
    arr = spectrum.coefficients
    if spectrum.mode == "exact":
        total = Fraction(0)
        flat = arr.reshape(-1)
        weights = _exact_support_weights(spectrum.resolution)
        for idx in range(flat.size):
            c = flat[idx]
            if c:
                total += Fraction(c) * Fraction(c) * weights[idx]
        return total
    w = np.ones((1,) * arr.ndim)
    for axis, m in enumerate(spectrum.resolution.levels):
        shape = [1] * arr.ndim
        shape[axis] = 1 << m
        w = w * _support_weights(m).reshape(shape)
    return float(np.sum(arr * arr * w))


def _exact_support_weights(resolution: Resolution) -> list[Fraction]:
    per_axis = []
    for m in resolution.levels:
        w = [Fraction(1)] * (1 << m)
        for k in range(m):
            for j in range(1 << k):
                w[(1 << k) + j] = Fraction(1, 1 << k)
        per_axis.append(w)
    out = []
    import itertools
    for combo in itertools.product(*per_axis):
        prod = Fraction(1)
        for v in combo:
            prod *= v
        out.append(prod)
    return out


def square_function_squared(f: GridFunction) -> GridFunction:
    """S(f)**2: for every spectrum entry, its squared coefficient spread over
    the entry's support.  In d=1 this is |Ef|**2 + sum over intervals of
    (c_I)**2 1_I; for a pure Haar sum it is sum a_R**2 1_R.  Exact in exact
    mode."""
    spectrum = haar_analyze(f)
    arr = spectrum.coefficients
    sq = arr * arr
    for axis in range(f.d):
        sq = apply_along_axis0(synthesize_axis0, sq, axis, False)
    return GridFunction(f.resolution, sq, f.mode)


def square_function(f: GridFunction) -> GridFunction:
    """S(f) itself (float mode: the cellwise square root is irrational)."""
    sq = square_function_squared(f)
    return GridFunction(f.resolution, np.sqrt(sq.float_values()), "float")


def conditional_expectation(f: GridFunction, field: Resolution) -> GridFunction:
    """Average f over the atoms (cells) of a coarser resolution."""
    if field.d != f.d:
        raise ValueError("dimension mismatch")
    if not f.resolution.refines(field):
        raise ValueError("field finer than f: cannot condition on a finer grid")
    factors = [1 << (m - mf) for m, mf in zip(f.resolution.levels, field.levels)]
    inter_shape: list[int] = []
    for mf, fac in zip(field.levels, factors):
        inter_shape.extend((1 << mf, fac))
    sum_axes = tuple(range(1, 2 * f.d, 2))
    sums = f.values.reshape(inter_shape).sum(axis=sum_axes)
    count = 1
    for fac in factors:
        count *= fac
    if f.mode == "exact":
        if count == 1:
            return GridFunction(field, sums, "exact")
        arr = _exact_array(sums) * Fraction(1, count)
        return GridFunction(field, arr, "exact")
    return GridFunction(field, sums / count, "float")


# ---------------------------------------------------------------------------
# LP / Orlicz diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LPEntry:
    p: float
    norm: float
    square_function_norm: float
    a_p: float  # ||S(f)||_p / ||f||_p
    b_p: float  # ||f||_p / ||S(f)||_p


@dataclass(frozen=True)
class LPReport:
    entries: tuple[LPEntry, ...]


def lp_profile(f: GridFunction, p_list) -> LPReport:
    """Norms of f and S(f) with the two-sided ratio estimates per p."""
    ps = list(p_list)
    if not ps:
        raise ValueError("p_list must be nonempty")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        raise ValueError("p_list must be strictly increasing")
    sf = square_function(f)
    entries = []
    for p in ps:
        nf = lp_norm(f, p)
        ns = lp_norm(sf, p)
        entries.append(LPEntry(
            p=float(p), norm=nf, square_function_norm=ns,
            a_p=(ns / nf) if nf else float("nan"),
            b_p=(nf / ns) if ns else float("nan"),
        ))
    return LPReport(tuple(entries))


def orlicz_norm_estimate(f: GridFunction, alpha: float, p_max: int) -> float:
    """max over integer p in [1, p_max] of p**(-1/alpha) * ||f||_p.

    This is the sup-over-p equivalent of the exponential-integrability norm,
    a surrogate that matches the true norm up to absolute constants; it is
    reported as such, never asserted against one.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if p_max < 1:
        raise ValueError("p_max must be at least 1")
    vals = np.abs(f.float_values())
    best = 0.0
    for p in range(1, p_max + 1):
        best = max(best, float(p) ** (-1.0 / alpha) * float(np.mean(vals ** p) ** (1.0 / p)))
    return best


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def grid_to_bytes(f: GridFunction) -> bytes:
    """Self-describing container: float grids go binary, exact grids go JSON
    with "p/q" rational strings."""
    header = {"d": f.d, "levels": list(f.resolution.levels), "mode": f.mode}
    if f.mode == "float":
        head = json.dumps(header, sort_keys=True).encode()
        payload = np.ascontiguousarray(f.values, dtype="<f8").tobytes()
        return _MAGIC + struct.pack("<I", len(head)) + head + payload
    header["values"] = [_scalar_to_str(v) for v in f.values.reshape(-1)]
    return json.dumps(header, sort_keys=True).encode()


def grid_from_bytes(data: bytes) -> GridFunction:
    if data[:8] == _MAGIC:
        (hlen,) = struct.unpack("<I", data[8:12])
        header = json.loads(data[12:12 + hlen])
        res = Resolution(tuple(header["levels"]))
        arr = np.frombuffer(data[12 + hlen:], dtype="<f8").reshape(res.grid_shape)
        return GridFunction(res, arr.astype(np.float64), "float")
    header = json.loads(data)
    res = Resolution(tuple(header["levels"]))
    vals = [_scalar_from_str(s) for s in header["values"]]
    arr = np.empty(res.cells, dtype=object)
    arr[:] = vals
    return GridFunction(res, arr.reshape(res.grid_shape), "exact")


def save_grid(f: GridFunction, path) -> None:
    with open(path, "wb") as fh:
        fh.write(grid_to_bytes(f))


def load_grid(path) -> GridFunction:
    with open(path, "rb") as fh:
        return grid_from_bytes(fh.read())


def _scalar_to_str(v) -> str:
    return str(Fraction(v))


def _scalar_from_str(s: str):
    frac = Fraction(s)
    return int(frac) if frac.denominator == 1 else frac
