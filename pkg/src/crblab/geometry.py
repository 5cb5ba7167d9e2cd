"""Distributed linear array geometries.

An array is a set of element positions on a line, partitioned into
contiguous subarrays.  The same physical geometry serves both the fully
calibrated case (all positions known) and the partly calibrated case
(intra-subarray displacements known, inter-subarray offsets unknown);
which knowledge is assumed is a choice made by the bound/estimator
operations, not a property of the geometry.

Units are fixed package-wide: positions in meters, spatial frequencies
in rad/meter, angles in radians (degrees appear only in config files).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError


@dataclass(frozen=True)
class ArrayGeometry:
    """Immutable distributed linear array.

    Parameters
    ----------
    element_positions : array-like of float
        Positions of the N elements in meters, strictly increasing,
        first element at 0.
    subarray_bounds : tuple of (start, stop) pairs
        Contiguous half-open index ranges covering 0..N-1 disjointly;
        subarray k occupies ``element_positions[start:stop]``.
    wavelength : float
        Carrier wavelength in meters.
    """

    element_positions: np.ndarray
    subarray_bounds: tuple[tuple[int, int], ...]
    wavelength: float
    inter_subarray_offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        positions = np.array(self.element_positions, dtype=float)
        positions.setflags(write=False)
        object.__setattr__(self, "element_positions", positions)

        if positions.ndim != 1 or positions.size < 1:
            raise GeometryError("element positions must be a nonempty 1-D sequence")
        if positions[0] != 0.0:
            raise GeometryError(f"first element must sit at 0 m, got {positions[0]}")
        if positions.size > 1 and not np.all(np.diff(positions) > 0):
            raise GeometryError("element positions must be strictly increasing")
        if self.wavelength <= 0:
            raise GeometryError(f"wavelength must be positive, got {self.wavelength}")

        bounds = tuple((int(a), int(b)) for a, b in self.subarray_bounds)
        object.__setattr__(self, "subarray_bounds", bounds)
        if not bounds:
            raise GeometryError("at least one subarray is required")
        cursor = 0
        for k, (start, stop) in enumerate(bounds):
            if start != cursor or stop <= start:
                raise GeometryError(
                    f"subarray {k + 1} range [{start}, {stop}) is empty or "
                    f"non-contiguous (expected start {cursor})"
                )
            cursor = stop
        if cursor != positions.size:
            raise GeometryError(
                f"partition covers {cursor} elements, geometry has {positions.size}"
            )

        offsets = np.array([positions[start] for start, _ in bounds])
        offsets.setflags(write=False)
        object.__setattr__(self, "inter_subarray_offsets", offsets)

    @property
    def n_elements(self) -> int:
        return self.element_positions.size

    @property
    def n_subarrays(self) -> int:
        return len(self.subarray_bounds)

    @property
    def subarray_sizes(self) -> np.ndarray:
        return np.array([stop - start for start, stop in self.subarray_bounds])

    def subarray_indices(self, k: int) -> np.ndarray:
        """Element indices (0-based) of subarray k (1-based, like the math)."""
        if not 1 <= k <= self.n_subarrays:
            raise GeometryError(f"subarray index {k} outside 1..{self.n_subarrays}")
        start, stop = self.subarray_bounds[k - 1]
        return np.arange(start, stop)

    def subarray_positions(self, k: int) -> np.ndarray:
        start, stop = self.subarray_bounds[k - 1]
        return self.element_positions[start:stop]


def build_uniform_distributed_geometry(
    n_subarrays: int,
    elements_per_subarray: int,
    element_spacing: float,
    interval: float,
    wavelength: float,
) -> ArrayGeometry:
    """Uniformly spaced subarrays of identical uniform linear layout.

    Subarray k (1-based) starts at ``interval * (k-1) * wavelength`` and
    holds ``elements_per_subarray`` elements spaced ``element_spacing``
    meters apart.

    Raises
    ------
    GeometryError
        If consecutive subarrays would overlap, naming the offending pair.
    """
    if n_subarrays < 2:
        raise GeometryError(f"need at least 2 subarrays, got {n_subarrays}")
    if elements_per_subarray < 2:
        raise GeometryError(
            f"need at least 2 elements per subarray, got {elements_per_subarray}"
        )
    if element_spacing <= 0:
        raise GeometryError(f"element spacing must be positive, got {element_spacing}")
    if wavelength <= 0:
        raise GeometryError(f"wavelength must be positive, got {wavelength}")

    extent = (elements_per_subarray - 1) * element_spacing
    step = interval * wavelength
    if extent >= step:
        raise GeometryError(
            f"subarrays 1 and 2 overlap: intra extent {extent} m >= "
            f"inter-subarray step {step} m"
        )

    local = np.arange(elements_per_subarray) * element_spacing
    starts = np.arange(n_subarrays) * step
    positions = (starts[:, None] + local[None, :]).ravel()
    bounds = tuple(
        (k * elements_per_subarray, (k + 1) * elements_per_subarray)
        for k in range(n_subarrays)
    )
    return ArrayGeometry(positions, bounds, wavelength)


def random_distributed_geometry(
    n_subarrays: int,
    elements_per_subarray: int,
    aperture_scale: float,
    rng: np.random.Generator,
    element_spacing: float = 0.5,
    wavelength: float = 1.0,
) -> ArrayGeometry:
    """Random non-overlapping geometry with uniform subarray start offsets.

    Subarray starts are drawn uniformly over ``[0, aperture_scale]``,
    sorted, and pushed apart just enough to keep subarrays disjoint; the
    whole array is then shifted so the first element sits at 0.  Used by
    the randomized test suites that model uniformly scattered subarrays.
    """
    extent = (elements_per_subarray - 1) * element_spacing
    starts = np.sort(rng.uniform(0.0, aperture_scale, size=n_subarrays))
    gap = extent + element_spacing
    for k in range(1, n_subarrays):
        if starts[k] - starts[k - 1] < gap:
            starts[k] = starts[k - 1] + gap
    starts -= starts[0]
    local = np.arange(elements_per_subarray) * element_spacing
    positions = (starts[:, None] + local[None, :]).ravel()
    bounds = tuple(
        (k * elements_per_subarray, (k + 1) * elements_per_subarray)
        for k in range(n_subarrays)
    )
    return ArrayGeometry(positions, bounds, wavelength)


def aperture(geometry: ArrayGeometry) -> float:
    """Whole-array aperture: position of the last element (first is at 0)."""
    return float(geometry.element_positions[-1])


def rayleigh_limit(geometry: ArrayGeometry) -> float:
    """Resolution limit of the spatial frequency, ``2*pi / aperture``."""
    d = aperture(geometry)
    if d <= 0:
        raise GeometryError("aperture must be positive for a resolution limit")
    return 2.0 * np.pi / d
