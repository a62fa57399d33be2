"""Gate fidelity, pulse-area fidelity maps, lattice analysis, and factor scans.

The fidelity of a protocol against a diagonal +-1 target signature T is, by
default, F = |Tr(T^dag U) / d|^2 where U is the diagonal of return amplitudes
over the 2^n computational states and d = 2^n. Two alternates are available
for sensitivity studies ("trace": |Tr|/d, "average": the standard
average-gate-fidelity combination). Maps sweep the total odd and even pulse
areas on a rectangular grid; their maxima form (possibly rotated) lattices.
"""

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyGridError,
    NoMaximaFoundError,
    NotNormalizedError,
    SignatureMismatchError,
)
from .model import (
    GateSignature,
    Protocol,
    Pulse,
    StructuralVector,
    basis_labels,
    cphase_signature,
    spectator_orthogonal_pair,
)
from .propagator import block_decompose, diagonal_amplitudes, star_propagator_batch

FIDELITY_DEFINITIONS = ("trace-sq", "trace", "average")

#: Default sweep: [-8*pi, 8*pi] in steps of 0.05*pi resolves the 4*pi lattice
#: and locates optima to a few percent of pi.
DEFAULT_GRID = (-8.0, 8.0, 0.05)

#: Default acceptance level for map maxima.
DEFAULT_MAXIMA_THRESHOLD = 0.7


@dataclass(frozen=True)
class GridSpec:
    """Inclusive 1-D sweep range in units of pi."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if self.step <= 0 or self.hi < self.lo:
            raise EmptyGridError(f"invalid grid {self.lo}:{self.hi}:{self.step}")

    @property
    def n_points(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    def values_pi(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.n_points)

    def values_radians(self) -> np.ndarray:
        return self.values_pi() * math.pi


@dataclass(frozen=True)
class ProtocolFamily:
    """Alternating protocol family with fixed structural vectors.

    ``b`` is the field overlap of the two gate qubits, ``c`` the spectator
    factor (3-qubit registers only). Odd pulses share one vector, even pulses
    another. With ``orthogonal=True`` consecutive vectors are exactly
    orthogonal (for 3 qubits the gate-qubit sub-vector of the even pulse is
    tilted to cancel the c^2 overlap, keeping the all-zeros passage dark-state
    protected); with ``orthogonal=False`` the even vector is the mirrored
    (b, a) variant, i.e. plain single-site beams brought close without
    structured light. Pulse areas are set per map point by splitting the
    total odd area equally over the odd pulses and likewise for the even
    ones.
    """

    n_qubits: int = 2
    b: float = 0.0
    c: float = 0.0
    m_pulses: int = 3
    orthogonal: bool = True

    def __post_init__(self):
        if self.n_qubits not in (2, 3):
            raise DimensionMismatchError("protocol families are defined for 2 or 3 qubits")
        if self.n_qubits == 2 and self.c != 0.0:
            raise DimensionMismatchError("spectator factor c needs a 3-qubit register")
        if self.b**2 + self.c**2 > 1.0:
            raise NotNormalizedError("b^2 + c^2 exceeds 1")
        if self.orthogonal and self.n_qubits == 3 and 2.0 * self.c**2 > 1.0:
            raise NotNormalizedError("orthogonal spectator family needs c^2 <= 0.5")
        if self.m_pulses < 1:
            raise EmptyGridError("family needs at least one pulse")

    @property
    def vector_odd(self) -> StructuralVector:
        a = math.sqrt(1.0 - self.b**2 - self.c**2)
        if self.n_qubits == 2:
            return StructuralVector((a, self.b))
        return StructuralVector((a, self.b, self.c))

    @property
    def vector_even(self) -> StructuralVector:
        a = math.sqrt(1.0 - self.b**2 - self.c**2)
        if self.n_qubits == 2:
            sign = -1.0 if self.orthogonal else 1.0
            return StructuralVector((sign * self.b, a))
        if self.orthogonal:
            return spectator_orthogonal_pair(self.b, self.c, self.c)[1]
        return StructuralVector((self.b, a, self.c))

    @property
    def n_odd_pulses(self) -> int:
        return (self.m_pulses + 1) // 2

    @property
    def n_even_pulses(self) -> int:
        return self.m_pulses // 2

    def pulse_vectors(self) -> list[StructuralVector]:
        e_o, e_e = self.vector_odd, self.vector_even
        return [e_o if k % 2 == 0 else e_e for k in range(self.m_pulses)]

    def pulse_areas(self, area_odd: float, area_even: float) -> list[float]:
        per_odd = area_odd / self.n_odd_pulses
        per_even = area_even / self.n_even_pulses if self.n_even_pulses else 0.0
        return [per_odd if k % 2 == 0 else per_even for k in range(self.m_pulses)]

    def protocol(self, area_odd: float, area_even: float) -> Protocol:
        """Concrete protocol at total areas (radians) split per family rules."""
        pulses = tuple(
            Pulse(area, vec)
            for area, vec in zip(self.pulse_areas(area_odd, area_even), self.pulse_vectors())
        )
        return Protocol(pulses=pulses, n_qubits=self.n_qubits)

    def meta(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "b2": self.b * abs(self.b),
            "c2": self.c * abs(self.c),
            "m_pulses": self.m_pulses,
            "orthogonal": self.orthogonal,
        }


def sop_family(
    b2: float = 0.0,
    c2: float = 0.0,
    n_qubits: int | None = None,
    m_pulses: int = 3,
    orthogonal: bool = True,
) -> ProtocolFamily:
    """Family factory from squared factors, as exposed on the command line."""
    if n_qubits is None:
        n_qubits = 3 if c2 > 0 else 2
    return ProtocolFamily(
        n_qubits=n_qubits,
        b=math.sqrt(b2),
        c=math.sqrt(c2),
        m_pulses=m_pulses,
        orthogonal=orthogonal,
    )


@dataclass(frozen=True)
class FidelityMap:
    """Fidelity over a rectangular grid of total (odd, even) pulse areas.

    ``axis_odd`` and ``axis_even`` are in radians; ``values[i, j]`` is the
    fidelity at (axis_odd[i], axis_even[j]).
    """

    axis_odd: np.ndarray
    axis_even: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LatticeReport:
    """Geometry of a map's qualified maxima.

    ``maxima`` has one row (area_odd, area_even, fidelity) per strict local
    maximum above threshold, sorted by fidelity descending. ``rotation_angle``
    is the clockwise rotation of the maxima lattice relative to the
    axis-aligned independent-qubit lattice, folded into [0, pi/2);
    ``nn_spacing`` is the median nearest-neighbour distance. Radians.
    """

    maxima: np.ndarray
    rotation_angle: float
    nn_spacing: float


def fidelity_from_amplitudes(diag, target: GateSignature, definition: str = "trace-sq"):
    """Combine diagonal return amplitudes into a fidelity in [0, 1].

    ``diag`` has the basis-state axis first and may carry trailing grid axes.
    """
    phases = target.as_array()
    d = phases.size
    diag = np.asarray(diag)
    if diag.shape[0] != d:
        raise SignatureMismatchError(
            f"{diag.shape[0]} amplitudes for a {d}-entry signature"
        )
    overlap = np.tensordot(phases, diag, axes=(0, 0))
    if definition == "trace-sq":
        return np.abs(overlap / d) ** 2
    if definition == "trace":
        return np.abs(overlap) / d
    if definition == "average":
        return (np.abs(overlap) ** 2 + np.sum(np.abs(diag) ** 2, axis=0)) / (d * d + d)
    raise ValueError(f"unknown fidelity definition {definition!r}")


def gate_fidelity(
    protocol: Protocol, target: GateSignature, definition: str = "trace-sq"
) -> float:
    """Fidelity of a protocol against a diagonal +-1 target signature."""
    if len(target.phases) != 2**protocol.n_qubits:
        raise SignatureMismatchError(
            f"signature of length {len(target.phases)} for {protocol.n_qubits} qubits"
        )
    return float(fidelity_from_amplitudes(diagonal_amplitudes(protocol), target, definition))


def family_diagonal_grid(
    family: ProtocolFamily, area_odd_grid: np.ndarray, area_even_grid: np.ndarray
) -> np.ndarray:
    """Return amplitudes of every basis state over an area grid.

    Output shape is (2^n, len(area_odd_grid), len(area_even_grid)), complex.
    The per-state block compositions are evaluated with batched matrix
    products; evaluation is embarrassingly parallel and deterministic.
    """
    area_o, area_e = np.meshgrid(area_odd_grid, area_even_grid, indexing="ij")
    thetas = [0.5 * a for a in _family_pulse_area_grids(family, area_o, area_e)]
    reference = family.protocol(1.0, 1.0)
    blocks = block_decompose(reference)
    diag = np.empty((len(blocks),) + area_o.shape, dtype=complex)
    for j, block in enumerate(blocks):
        u_tot = None
        for k in range(family.m_pulses):
            u_k = star_propagator_batch(block.couplings[k], thetas[k])
            u_tot = u_k if u_tot is None else u_k @ u_tot
        diag[j] = u_tot[..., 0, 0]
    return diag


def _family_pulse_area_grids(family, area_o, area_e):
    per_odd = area_o / family.n_odd_pulses
    per_even = area_e / family.n_even_pulses if family.n_even_pulses else np.zeros_like(area_e)
    return [per_odd if k % 2 == 0 else per_even for k in range(family.m_pulses)]


def fidelity_map(
    family: ProtocolFamily,
    grid_odd: GridSpec | None = None,
    grid_even: GridSpec | None = None,
    target: GateSignature | None = None,
    definition: str = "trace-sq",
) -> FidelityMap:
    """Evaluate the gate fidelity of a protocol family over an area grid.

    Parameters
    ----------
    family : ProtocolFamily
        Fixes the structural vectors and the area-splitting rule.
    grid_odd, grid_even : GridSpec, optional
        Sweep ranges in units of pi; ``grid_even`` defaults to ``grid_odd``
        and ``grid_odd`` to the package default [-8, 8] step 0.05.
    target : GateSignature, optional
        Defaults to the controlled-phase signature on the gate qubits.
    """
    grid_odd = grid_odd or GridSpec(*DEFAULT_GRID)
    grid_even = grid_even or grid_odd
    if target is None:
        target = cphase_signature(family.n_qubits)
    axis_odd = grid_odd.values_radians()
    axis_even = grid_even.values_radians()
    diag = family_diagonal_grid(family, axis_odd, axis_even)
    values = fidelity_from_amplitudes(diag, target, definition)
    meta = {
        "family": family.meta(),
        "grid_odd": [grid_odd.lo, grid_odd.hi, grid_odd.step],
        "grid_even": [grid_even.lo, grid_even.hi, grid_even.step],
        "fidelity_definition": definition,
        "signature": list(target.phases),
    }
    return FidelityMap(axis_odd=axis_odd, axis_even=axis_even, values=values, meta=meta)


def _strict_local_maxima_mask(values: np.ndarray) -> np.ndarray:
    """Cells strictly greater than all existing 8-neighbours."""
    padded = np.pad(values, 1, constant_values=-np.inf)
    center = padded[1:-1, 1:-1]
    mask = np.ones(values.shape, dtype=bool)
    n_rows, n_cols = padded.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= center > padded[1 + di : n_rows - 1 + di, 1 + dj : n_cols - 1 + dj]
    return mask


def map_maxima(fmap: FidelityMap, threshold: float = DEFAULT_MAXIMA_THRESHOLD) -> np.ndarray:
    """Strict-local-maxima rows (area_odd, area_even, F), fidelity descending."""
    mask = _strict_local_maxima_mask(fmap.values) & (fmap.values >= threshold)
    ii, jj = np.nonzero(mask)
    rows = np.column_stack([fmap.axis_odd[ii], fmap.axis_even[jj], fmap.values[ii, jj]])
    return rows[np.argsort(-rows[:, 2])]


def _sector_median(angles: np.ndarray, period: float) -> float:
    """Median of angles identified modulo ``period``, robust to wrap-around."""
    wrapped = np.mod(angles, period)
    full = wrapped * (2.0 * math.pi / period)
    mean = math.atan2(np.mean(np.sin(full)), np.mean(np.cos(full)))
    centered = np.mod(full - mean + math.pi, 2.0 * math.pi) - math.pi
    med = float(np.median(centered)) + mean
    return (med * period / (2.0 * math.pi)) % period


def lattice_analysis(
    fmap: FidelityMap, threshold: float = DEFAULT_MAXIMA_THRESHOLD
) -> LatticeReport:
    """Measure rotation and spacing of the lattice formed by a map's maxima.

    Maxima are strict local maxima over the 8-neighbourhood with fidelity at
    least ``threshold``. The rotation angle is the sector-median direction of
    nearest-neighbour displacement vectors, read as a clockwise rotation of
    the axis-aligned lattice; the spacing is the median nearest-neighbour
    distance. Maxima sitting on the grid edge are kept in the report but left
    out of the geometry statistics (their positions are clipped by the
    window).
    """
    maxima = map_maxima(fmap, threshold)
    if len(maxima) < 2:
        raise NoMaximaFoundError(
            f"found {len(maxima)} maxima >= {threshold}; need at least 2 for lattice geometry"
        )
    interior = (
        (maxima[:, 0] > fmap.axis_odd[0])
        & (maxima[:, 0] < fmap.axis_odd[-1])
        & (maxima[:, 1] > fmap.axis_even[0])
        & (maxima[:, 1] < fmap.axis_even[-1])
    )
    points = maxima[interior, :2] if np.count_nonzero(interior) >= 2 else maxima[:, :2]
    deltas = points[:, None, :] - points[None, :, :]
    dists = np.hypot(deltas[..., 0], deltas[..., 1])
    np.fill_diagonal(dists, np.inf)
    nn_index = np.argmin(dists, axis=1)
    nn_dist = dists[np.arange(len(points)), nn_index]
    nn_vec = points[nn_index] - points
    # Clockwise rotation of the lattice maps a primitive axis vector to
    # direction -beta, so the displacement angles cluster at -beta mod 90 deg.
    phi = np.arctan2(nn_vec[:, 1], nn_vec[:, 0])
    rotation = _sector_median(-phi, math.pi / 2.0)
    return LatticeReport(
        maxima=maxima,
        rotation_angle=rotation,
        nn_spacing=float(np.median(nn_dist)),
    )


@dataclass(frozen=True)
class RobustnessCurves:
    """Return amplitudes of the three non-trivial two-qubit states vs area error."""

    delta_area: np.ndarray
    u11v: np.ndarray
    u11a: np.ndarray
    u11b: np.ndarray


def robustness_scan(protocol: Protocol, delta_grid) -> RobustnessCurves:
    """Scan area errors: every odd pulse gets +delta, every even pulse +2*delta.

    Returns the real return amplitudes of |00>, |01> and |10> as functions of
    the per-odd-pulse area error (radians).
    """
    if protocol.n_qubits != 2:
        raise DimensionMismatchError("robustness scan is defined for 2-qubit protocols")
    delta = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    blocks = block_decompose(protocol)
    by_state = {b.initial_state: b for b in blocks}
    curves = {}
    for label in ("00", "01", "10"):
        block = by_state[label]
        u_tot = None
        for k, pulse in enumerate(protocol.pulses):
            bump = delta if k % 2 == 0 else 2.0 * delta
            u_k = star_propagator_batch(block.couplings[k], 0.5 * (pulse.area + bump))
            u_tot = u_k if u_tot is None else u_k @ u_tot
        curves[label] = u_tot[..., 0, 0].real
    return RobustnessCurves(
        delta_area=delta, u11v=curves["00"], u11a=curves["01"], u11b=curves["10"]
    )


def b_scan(
    area_pair_pi: tuple[float, float],
    b2_grid,
    orthogonal: bool = True,
    target: GateSignature | None = None,
    definition: str = "trace-sq",
) -> np.ndarray:
    """Fidelity of a fixed-area three-pulse protocol versus the overlap b^2.

    ``area_pair_pi`` is (A_odd, A_even) in units of pi. With
    ``orthogonal=False`` the even vector is (b, a) instead of (-b, a),
    modelling approaching atoms without structured light.
    """
    b2_values = np.atleast_1d(np.asarray(b2_grid, dtype=float))
    if target is None:
        target = cphase_signature(2)
    area_odd = area_pair_pi[0] * math.pi
    area_even = area_pair_pi[1] * math.pi
    out = np.empty(b2_values.shape, dtype=float)
    for i, b2 in enumerate(b2_values):
        family = ProtocolFamily(b=math.sqrt(b2), orthogonal=orthogonal)
        out[i] = gate_fidelity(family.protocol(area_odd, area_even), target, definition)
    return out


def map_csv_text(fmap: FidelityMap) -> str:
    """Render a map as CSV: areas in units of pi, 9 significant digits, row-major."""
    buf = io.StringIO()
    buf.write("a_odd_over_pi,a_even_over_pi,fidelity\n")
    odd_pi = fmap.axis_odd / math.pi
    even_pi = fmap.axis_even / math.pi
    for i, ao in enumerate(odd_pi):
        row = fmap.values[i]
        for j, ae in enumerate(even_pi):
            buf.write(f"{ao:.9g},{ae:.9g},{row[j]:.9g}\n")
    return buf.getvalue()


def write_map_csv(fmap: FidelityMap, path) -> None:
    with open(path, "w") as handle:
        handle.write(map_csv_text(fmap))


def lattice_report_dict(report: LatticeReport) -> dict:
    """JSON-friendly report: areas in units of pi, angles in degrees."""
    return {
        "rotation_angle_deg": math.degrees(report.rotation_angle),
        "nn_spacing_over_pi": report.nn_spacing / math.pi,
        "n_maxima": int(len(report.maxima)),
        "maxima": [
            {
                "a_odd_over_pi": row[0] / math.pi,
                "a_even_over_pi": row[1] / math.pi,
                "fidelity": row[2],
            }
            for row in report.maxima.tolist()
        ],
    }
