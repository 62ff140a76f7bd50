"""Hyperbolic shape enumeration, r-functions, and hyperbolic Haar sums.

A *shape* is a tuple of d nonnegative levels summing to n; its rectangle
family (one rectangle per position tuple) tiles the unit cube with 2**n
congruent dyadic rectangles of volume 2**-n.  A coefficient field assigns a
scalar to every rectangle of every shape; it induces sign patterns
(sgn(0) := +1), r-functions, and the hyperbolic sum over all rectangles.

Fast exact construction: all rectangles of one shape occupy, per axis, the
contiguous Haar-spectrum block [2**r, 2**(r+1)), and distinct shapes occupy
disjoint tensor blocks.  So a whole hyperbolic sum is a single spectrum
fill followed by one division-free synthesis -- O(cells) integer work.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import grid
from .grid import (
    DyadicInterval,
    DyadicRectangle,
    GridFunction,
    InsufficientResolutionError,
    Resolution,
)

Shape = tuple[int, ...]


def shape_count(n: int, d: int) -> int:
    """#H_n = C(n+d-1, d-1) -- compositions of n into d nonnegative parts."""
    return math.comb(n + d - 1, d - 1)


def enumerate_shapes(n: int, d: int) -> list[Shape]:
    """All compositions of n into d nonnegative parts, lexicographically
    descending: (n,0,..), ..., (0,..,n)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if d == 1:
        return [(n,)]
    out: list[Shape] = []
    for first in range(n, -1, -1):
        out.extend((first, *rest) for rest in enumerate_shapes(n - first, d - 1))
    return out


def rectangles_of_shape(shape: Shape) -> list[DyadicRectangle]:
    """The 2**n pairwise disjoint rectangles of one shape, tiling [0,1)**d."""
    ranges = [range(1 << r) for r in shape]
    return [
        DyadicRectangle(tuple(DyadicInterval(r, j) for r, j in zip(shape, pos)))
        for pos in itertools.product(*ranges)
    ]


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass(frozen=True)
class CoefficientField:
    """Map from rectangles of volume 2**-n (all shapes required) to scalars.

    ``values[shape]`` is an array of grid shape ``(2**r_1, ..., 2**r_d)``
    indexed by rectangle positions.  Extended fields may carry additional
    coarser shapes (level sum < n) for the d=2 inequality's right-hand side.
    """

    n: int
    d: int
    values: dict[Shape, np.ndarray]
    mode: str = "exact"

    def __post_init__(self) -> None:
        required = set(enumerate_shapes(self.n, self.d))
        present = set(self.values)
        if not required <= present:
            raise ValueError("field must cover every shape of the exact volume")
        for shape, arr in self.values.items():
            if len(shape) != self.d or any(r < 0 for r in shape):
                raise ValueError(f"bad shape key {shape}")
            if sum(shape) > self.n:
                raise ValueError(f"shape {shape} finer than volume 2**-{self.n}")
            if arr.shape != tuple(1 << r for r in shape):
                raise ValueError(f"values for {shape} have wrong shape {arr.shape}")

    @property
    def exact_volume_shapes(self) -> list[Shape]:
        return enumerate_shapes(self.n, self.d)

    @property
    def coarse_shapes(self) -> list[Shape]:
        return sorted((s for s in self.values if sum(s) < self.n), reverse=True)

    def abs_sum(self):
        """Sum of |alpha(R)| over the exact-volume rectangles (exact for ints)."""
        total = 0
        for shape in self.exact_volume_shapes:
            arr = self.values[shape]
            total += abs(arr.astype(object)).sum() if arr.dtype == object \
                else (float(np.sum(np.abs(arr))) if self.mode == "float"
                      else int(np.sum(np.abs(arr.astype(np.int64)))))
        return total

    def square_sum(self):
        """Sum of alpha(R)**2 over the exact-volume rectangles."""
        total = 0
        for shape in self.exact_volume_shapes:
            arr = self.values[shape]
            if arr.dtype == object:
                total += (arr.astype(object) ** 2).sum()
            elif self.mode == "float":
                total += float(np.sum(arr.astype(np.float64) ** 2))
            else:
                total += int(np.sum(arr.astype(np.int64) ** 2))
        return total

    @classmethod
    def constant(cls, n: int, d: int, value: int = 1) -> "CoefficientField":
        vals = {
            s: np.full(tuple(1 << r for r in s), int(value), dtype=np.int64)
            for s in enumerate_shapes(n, d)
        }
        return cls(n, d, vals, "exact")

    @classmethod
    def random_signs(cls, n: int, d: int, seed_or_rng) -> "CoefficientField":
        rng = _as_rng(seed_or_rng)
        vals = {
            s: (rng.integers(0, 2, size=tuple(1 << r for r in s), dtype=np.int8) * 2 - 1)
            .astype(np.int64)
            for s in enumerate_shapes(n, d)
        }
        return cls(n, d, vals, "exact")

    @classmethod
    def random_integers(cls, n: int, d: int, seed_or_rng, low: int = -3,
                        high: int = 3) -> "CoefficientField":
        """Integer-valued field with zeros included (exercises sgn(0))."""
        rng = _as_rng(seed_or_rng)
        vals = {
            s: rng.integers(low, high + 1, size=tuple(1 << r for r in s), dtype=np.int64)
            for s in enumerate_shapes(n, d)
        }
        return cls(n, d, vals, "exact")

    @classmethod
    def random_normal(cls, n: int, d: int, seed_or_rng) -> "CoefficientField":
        rng = _as_rng(seed_or_rng)
        vals = {
            s: rng.standard_normal(tuple(1 << r for r in s))
            for s in enumerate_shapes(n, d)
        }
        return cls(n, d, vals, "float")


def add_coarse_random(field: CoefficientField, seed_or_rng, low: int = -3,
                      high: int = 3) -> CoefficientField:
    """Extended field: add integer coefficients on every coarser shape
    (level sum < n).  Used by the d=2 product verification, whose identity
    must be unchanged by any such extension."""
    rng = _as_rng(seed_or_rng)
    vals = dict(field.values)
    for total in range(field.n):
        for s in enumerate_shapes(total, field.d):
            vals[s] = rng.integers(low, high + 1, size=tuple(1 << r for r in s),
                                   dtype=np.int64)
    return CoefficientField(field.n, field.d, vals, field.mode)


@dataclass(frozen=True)
class RFunction:
    """Sign pattern of one shape: the induced grid function is the sum of
    one signed Haar function per rectangle and takes values in {-1,+1}
    everywhere (its square is identically 1)."""

    shape: Shape
    signs: np.ndarray  # int8 array of +-1, indexed by rectangle positions


def signs_of(values: np.ndarray) -> np.ndarray:
    """Sign pattern with the sgn(0) := +1 tie-break."""
    if values.dtype == object:
        return np.array([[1] if v >= 0 else [-1] for v in values.reshape(-1)],
                        dtype=np.int8).reshape(values.shape)
    return np.where(values >= 0, 1, -1).astype(np.int8)


def r_function(field: CoefficientField, shape: Shape) -> RFunction:
    if shape not in field.values:
        raise KeyError(f"field has no shape {shape}")
    return RFunction(shape, signs_of(field.values[shape]))


def minimal_resolution(shapes, d: int | None = None) -> Resolution:
    """Coarsest grid that represents every Haar function of the given shapes:
    per axis, (max level over shapes) + 1."""
    shapes = list(shapes)
    if not shapes:
        raise ValueError("no shapes given")
    if d is None:
        d = len(shapes[0])
    levels = tuple(max(s[axis] for s in shapes) + 1 for axis in range(d))
    return Resolution(levels)


def field_resolution(field: CoefficientField) -> Resolution:
    return minimal_resolution(field.values.keys(), field.d)


def _check_resolution(resolution: Resolution, shapes) -> None:
    for s in shapes:
        for axis, r in enumerate(s):
            if resolution.levels[axis] < r + 1:
                raise InsufficientResolutionError(
                    f"insufficient resolution: axis {axis} level "
                    f"{resolution.levels[axis]} < {r + 1} needed by shape {s}"
                )


def _place_shape(spectrum: np.ndarray, shape: Shape, values: np.ndarray) -> None:
    slices = tuple(slice(1 << r, 2 << r) for r in shape)
    spectrum[slices] = values


def _synthesize(spectrum: np.ndarray, d: int, signed: bool = True) -> np.ndarray:
    for axis in range(d):
        spectrum = grid.apply_along_axis0(grid.synthesize_axis0, spectrum, axis, signed)
    return spectrum


def shape_sum_grid(shape_values: dict[Shape, np.ndarray], resolution: Resolution,
                   dtype=None, signed: bool = True) -> np.ndarray:
    """Sum over shapes of the Haar sums with the given per-rectangle
    coefficients, evaluated on the grid by one spectrum synthesis."""
    _check_resolution(resolution, shape_values.keys())
    if dtype is None:
        kinds = {np.asarray(v).dtype.kind for v in shape_values.values()}
        dtype = object if "O" in kinds else (np.float64 if "f" in kinds else np.int64)
    spectrum = np.zeros(resolution.grid_shape, dtype=dtype)
    for shape, values in shape_values.items():
        _place_shape(spectrum, shape, np.asarray(values).astype(dtype, copy=False))
    return _synthesize(spectrum, resolution.d, signed)


def r_function_grid(rf: RFunction, resolution: Resolution) -> GridFunction:
    arr = shape_sum_grid({rf.shape: rf.signs}, resolution, dtype=np.int8)
    return GridFunction(resolution, arr, "exact")


def hyperbolic_sum(field: CoefficientField, resolution: Resolution | None = None,
                   dtype=None) -> GridFunction:
    """H_n = sum over all rectangles (every shape in the field, coarse shapes
    included for extended fields) of alpha(R) h_R, exactly on the grid."""
    if resolution is None:
        resolution = field_resolution(field)
    arr = shape_sum_grid(field.values, resolution, dtype=dtype)
    return GridFunction(resolution, arr,
                        "float" if arr.dtype.kind == "f" else "exact")


def coefficient_square_sum(field: CoefficientField,
                           resolution: Resolution | None = None) -> GridFunction:
    """sum over exact-volume rectangles of alpha(R)**2 1_R -- the squared
    square function of the hyperbolic sum.  Computed by the unsigned
    butterfly, so it is exact for integer fields."""
    if resolution is None:
        resolution = field_resolution(field)
    squares = {}
    for s in field.exact_volume_shapes:
        arr = field.values[s]
        squares[s] = (arr.astype(object) ** 2 if arr.dtype == object
                      else (arr.astype(np.float64) ** 2 if field.mode == "float"
                            else arr.astype(np.int64) ** 2))
    arr = shape_sum_grid(squares, resolution, signed=False)
    return GridFunction(resolution, arr,
                        "float" if arr.dtype.kind == "f" else "exact")


def signed_r_sum(field: CoefficientField, resolution: Resolution | None = None,
                 shapes=None, dtype=np.int16) -> GridFunction:
    """Sum over the given shapes (default: all exact-volume shapes) of the
    alpha-induced r-functions -- integer valued, one synthesis."""
    chosen = list(shapes) if shapes is not None else field.exact_volume_shapes
    if resolution is None:
        resolution = minimal_resolution(chosen, field.d)
    sign_arrays = {s: signs_of(field.values[s]) for s in chosen}
    arr = shape_sum_grid(sign_arrays, resolution, dtype=dtype)
    return GridFunction(resolution, arr, "exact")


# ---------------------------------------------------------------------------
# reports and experiments
# ---------------------------------------------------------------------------


def trivial_bound_report(field: CoefficientField) -> dict:
    """The counting bound: 2**-n sum|alpha| <= sqrt(#H_n) ||H||_2
    <= sqrt(#H_n) ||H||_inf, verified exactly via squared comparisons."""
    n, d = field.n, field.d
    count = shape_count(n, d)
    h = hyperbolic_sum(field)
    lhs = Fraction(field.abs_sum(), 1 << n) if field.mode == "exact" \
        else field.abs_sum() / float(1 << n)
    l2_sq = grid.lp_moment(h, 2)
    sup = grid.sup_norm(h)
    ortho_rhs = (Fraction(field.square_sum(), 1 << n) if field.mode == "exact"
                 else field.square_sum() / float(1 << n))
    chain_first = lhs * lhs <= count * l2_sq
    chain_second = l2_sq <= sup * sup
    return {
        "n": n,
        "d": d,
        "lhs": lhs,
        "shape_count": count,
        "l2_norm": float(l2_sq) ** 0.5,
        "l2_moment": l2_sq,
        "sup_norm": sup,
        "l2_identity_exact": l2_sq == ortho_rhs,
        "chain_ok": bool(chain_first and chain_second),
    }


def sharpness_experiment(n_values, d: int, trials: int, seed: int,
                         threads: int = 1) -> dict:
    """Random-sign hyperbolic sums: per-n mean sup norm (exact per trial),
    the per-trial coefficient-sum check, and the fitted growth exponent of
    the mean sup norm against n.  Per-trial RNG streams are derived from
    (seed, n, trial), so results do not depend on execution order or the
    thread count."""
    if isinstance(n_values, int):
        n_values = [n_values]
    n_values = sorted(n_values)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_n = []
    for n in n_values:
        shapes = enumerate_shapes(n, d)
        res = minimal_resolution(shapes, d)
        count = shape_count(n, d)

        def one_trial(t: int, n=n, shapes=shapes, res=res, count=count):
            rng = np.random.default_rng((seed, n, t))
            sign_arrays = {
                s: (rng.integers(0, 2, size=tuple(1 << r for r in s),
                                 dtype=np.int8) * 2 - 1)
                for s in shapes
            }
            total_abs = sum(int(a.size) for a in sign_arrays.values())
            ok = Fraction(total_abs, 1 << n) == count
            arr = shape_sum_grid(sign_arrays, res, dtype=np.int16)
            return int(np.max(np.abs(arr))), ok

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one_trial, range(trials)))
        else:
            results = [one_trial(t) for t in range(trials)]
        sups = np.array([r[0] for r in results], dtype=np.int64)
        coeff_ok = all(r[1] for r in results)
        per_n.append({
            "n": n,
            "mean_sup": float(np.mean(sups)),
            "min_sup": int(np.min(sups)),
            "max_sup": int(np.max(sups)),
            "shape_count": count,
            "coeff_sum_ok": bool(coeff_ok),
        })
    exponent = None
    if len(n_values) >= 2:
        xs = np.log([row["n"] for row in per_n])
        ys = np.log([row["mean_sup"] for row in per_n])
        exponent = float(np.polyfit(xs, ys, 1)[0])
    return {
        "d": d,
        "trials": trials,
        "seed": seed,
        "per_n": per_n,
        "fitted_exponent": exponent,
    }


def exp_integrability_profile(field: CoefficientField, p_max: int) -> dict:
    """sup over p <= p_max of p**-((d-1)/2) ||H_n||_p divided by the sup of
    [sum alpha**2 1_R]**(1/2) -- the measured exponential-integrability
    constant."""
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    h = hyperbolic_sum(field)
    sq = coefficient_square_sum(field)
    s_inf = float(grid.sup_norm(sq)) ** 0.5
    vals = np.abs(h.float_values())
    d = field.d
    ps = list(range(1, p_max + 1))
    ratios = []
    for p in ps:
        norm_p = float(np.mean(vals ** p) ** (1.0 / p))
        ratios.append(norm_p * p ** (-(d - 1) / 2.0) / s_inf if s_inf else float("nan"))
    return {
        "n": field.n,
        "d": d,
        "p": ps,
        "ratio": ratios,
        "sup_ratio": max(ratios) if ratios else float("nan"),
    }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def field_to_json(field: CoefficientField) -> dict:
    shapes = []
    for s in sorted(field.values, reverse=True):
        arr = field.values[s]
        flat = arr.reshape(-1)
        if arr.dtype == object:
            vals = [str(Fraction(v)) for v in flat]
        elif field.mode == "float":
            vals = [float(v) for v in flat]
        else:
            vals = [int(v) for v in flat]
        shapes.append({"shape": list(s), "values": vals})
    return {"n": field.n, "d": field.d, "mode": field.mode, "shapes": shapes}


def field_from_json(obj: dict) -> CoefficientField:
    n, d, mode = obj["n"], obj["d"], obj["mode"]
    values: dict[Shape, np.ndarray] = {}
    for entry in obj["shapes"]:
        shape = tuple(entry["shape"])
        grid_shape = tuple(1 << r for r in shape)
        raw = entry["values"]
        if mode == "float":
            arr = np.array(raw, dtype=np.float64).reshape(grid_shape)
        elif any(isinstance(v, str) for v in raw):
            parsed = [Fraction(v) if isinstance(v, str) else Fraction(v) for v in raw]
            if all(f.denominator == 1 for f in parsed):
                arr = np.array([int(f) for f in parsed], dtype=np.int64).reshape(grid_shape)
            else:
                arr = np.empty(len(parsed), dtype=object)
                arr[:] = parsed
                arr = arr.reshape(grid_shape)
        else:
            arr = np.array(raw, dtype=np.int64).reshape(grid_shape)
        values[shape] = arr
    return CoefficientField(n, d, values, mode)
