"""Sampler for the limiting law of rank-2 functionals over a window.

The limit is a double Wiener-Ito integral whose kernel couples the window
transform with a power singularity at zero frequency. Discretizing that
operator with a graded Nystrom mesh turns the law into a weighted series
sum_j nu_j (Z_j^2 - 1) of centered chi-squares, which is cheap to sample
and has closed-form cumulants. The construction is validated against an
independent distance-integral variance oracle and calibrated to it by a
single reported rescale factor.

The kernel matrix uses the frequency-difference form
M_ij = c2 sqrt(w_i w_j) K(lam_i - lam_j) (|lam_i||lam_j|)^(-(d-alpha)/2):
with the difference argument the matrix is T^(1/2) P T^(1/2) for the
positive operator T of multiplication by the singular weight conjugated
with the window projection P, so the eigenvalue signs and hence the odd
cumulants come out right; the exact finite-window Karhunen-Loeve weights
of the rank-2 statistic converge to these eigenvalues.

In d=2 the kernel oscillates on a unit frequency scale out to the cutoff,
which a dense polar mesh cannot resolve at a feasible matrix size. For
ball windows both the window transform and the singular weight are
isotropic, so the operator commutes with rotations and splits into
angular Fourier blocks: each harmonic gives a small radial eigenproblem
(multiplicity two except the zeroth), and the blocks are solved exactly
instead of meshing the angle. Rectangular d=2 windows do not decouple
and are refused.
"""

import json
from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np

from .covmodels import c2_constant
from .errors import (
    AccuracyError,
    DomainError,
    IntegrabilityError,
    ParameterError,
    UnsupportedModelError,
)
from .geometry import ball_ft_radial, distance_integral

__all__ = [
    "RosenblattKernel",
    "EigenSeries",
    "DensityTable",
    "build_kernel",
    "eigen_series",
    "calibrate_series",
    "sample",
    "cumulant",
    "variance_oracle",
    "density_estimate",
    "series_to_json",
    "series_from_json",
    "DEFAULT_NODES_1D",
    "DEFAULT_CUTOFF_1D",
]

DEFAULT_NODES_1D = 1504
DEFAULT_CUTOFF_1D = 500.0
DEFAULT_RADIAL_2D = 160
DEFAULT_CUTOFF_2D = 60.0
_INNER_RADIUS = 1e-8
_GL_ORDER = 4
_SAMPLE_CHUNK = 20000
_GRADED_END_2D = 1.0
_ANGULAR_SAMPLES = 512  # transform content stays under ~cutoff+m_max harmonics
_MAX_HARMONIC = 96


@dataclass(frozen=True)
class RosenblattKernel:
    """Nystrom discretization of the rank-2 limit kernel.

    d=1: nodes (n, 1), weights (n,), dense symmetric matrix.
    d=2 (ball windows): nodes are radial, matrix is None, and blocks holds
    one symmetric radial matrix per angular harmonic with the matching
    spectral multiplicity (1 for the zeroth harmonic, 2 beyond).
    """

    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    dimension: int
    alpha: float
    blocks: tuple = None
    block_multiplicity: tuple = None

    @property
    def spectrum_size(self):
        if self.blocks is not None:
            return sum(
                mult * blk.shape[0]
                for blk, mult in zip(self.blocks, self.block_multiplicity)
            )
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenSeries:
    """Leading eigenvalues of the kernel, optionally calibrated.

    raw_variance is 2 sum nu^2 before calibration; calibration_factor has
    been applied to the stored eigenvalues (1.0 when uncalibrated).
    tail_mass is the relative Frobenius mass beyond the kept eigenvalues.
    """

    eigenvalues: tuple
    kept: int
    tail_mass: float
    raw_variance: float
    calibration_factor: float = 1.0

    @property
    def variance(self):
        return 2.0 * sum(v * v for v in self.eigenvalues)


def _check_symmetric(window):
    if window.shape == "ball":
        return
    for a, b in zip(window.lower, window.upper):
        if abs(a + b) > 1e-12:
            raise UnsupportedModelError(
                "kernel construction needs an origin-symmetric window so the "
                "window transform is real and even"
            )


def _graded_axis(n_nodes, cutoff):
    """Symmetric graded 1-d mesh: nodes and weights, origin excluded.

    Geometric panels from the inner radius to the cutoff with Gauss-Legendre
    points inside each panel, mirrored to the negative axis.
    """
    per_side = n_nodes // 2
    panels = max(per_side // _GL_ORDER, 4)
    ratio = (cutoff / _INNER_RADIUS) ** (1.0 / panels)
    edges = _INNER_RADIUS * ratio ** np.arange(panels + 1)
    edges[-1] = cutoff
    tg, wg = np.polynomial.legendre.leggauss(_GL_ORDER)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * tg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return np.concatenate([-x[::-1], x]), np.concatenate([w[::-1], w])


def _window_transform_diff_1d(window, t):
    # real even transform of an origin-symmetric 1-d window at a lag matrix
    if window.shape == "ball":
        b = window.radius
    else:
        b = window.upper[0]
    out = np.empty_like(t)
    small = np.abs(t) < 1e-8
    out[small] = 2.0 * b * (1.0 - (b * t[small]) ** 2 / 6.0)
    ts = t[~small]
    out[~small] = 2.0 * np.sin(b * ts) / ts
    return out


def _radial_axis_2d(n_nodes, cutoff):
    """Radial mesh: graded panels over the weight singularity near zero,
    then uniform panels sized to resolve the unit-scale transform
    oscillation out to the cutoff. Returns nodes and plain dr weights."""
    inner_panels = max(8, n_nodes // 16)
    outer_panels = (n_nodes - _GL_ORDER * inner_panels) // _GL_ORDER
    if outer_panels < 8:
        raise ParameterError(
            f"n_nodes {n_nodes} too small for the d=2 radial mesh; need >= "
            f"{_GL_ORDER * (inner_panels + 8)}"
        )
    tg, wg = np.polynomial.legendre.leggauss(_GL_ORDER)
    graded_end = min(_GRADED_END_2D, 0.5 * cutoff)
    ratio = (graded_end / _INNER_RADIUS) ** (1.0 / inner_panels)
    edges = np.concatenate(
        [
            _INNER_RADIUS * ratio ** np.arange(inner_panels),
            np.linspace(graded_end, cutoff, outer_panels + 1),
        ]
    )
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * tg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


def _angular_block_coeffs(window, rad, m_max):
    """Fourier coefficients a_m(r_i, r_j) of the window transform over the
    included angle, m = 0..m_max, via an FFT in the angle.

    The transform oscillates in the chord length, so the angular content
    at radii (r, s) reaches roughly min(r, s) harmonics; the sample count
    must stay ahead of both that and m_max. Chunked over rows to bound
    the n^2 * samples intermediate.
    """
    n_psi = _ANGULAR_SAMPLES
    cos = np.cos(2.0 * pi * np.arange(n_psi) / n_psi)
    n = rad.size
    coef = np.empty((n, n, m_max + 1))
    step = max(1, int(2e8 / (8 * n * n_psi)))
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        chord = np.sqrt(
            np.maximum(
                rad[lo:hi, None, None] ** 2
                + rad[None, :, None] ** 2
                - 2.0 * rad[lo:hi, None, None] * rad[None, :, None] * cos,
                0.0,
            )
        )
        vals = ball_ft_radial(window, chord)
        coef[lo:hi] = np.fft.rfft(vals, axis=2).real[:, :, : m_max + 1] / n_psi
    return coef


def build_kernel(
    window,
    d,
    alpha,
    n_nodes=None,
    cutoff=None,
):
    """Nystrom form of the rank-2 limit kernel.

    d in (1, 2). n_nodes is the per-axis mesh size for d=1 and the radial
    count for d=2; cutoff is the frequency truncation radius. Defaults come
    from a refinement study: doubling n_nodes moves the spectral mass by
    well under 1% and the series variance lands within 2% of the
    independent oracle, the remainder being cutoff truncation that the
    calibration step absorbs.
    """
    d = int(d)
    if d not in (1, 2):
        raise ParameterError(f"kernel construction supports d in (1, 2), got {d}")
    if not (0.0 < alpha < 0.5 * d):
        raise DomainError(f"alpha must lie in (0, d/2) = (0, {d / 2}), got {alpha}")
    if window.dimension != d:
        raise ParameterError(
            f"window dimension {window.dimension} does not match d={d}"
        )
    _check_symmetric(window)
    c2 = c2_constant(d, alpha)
    expo = -0.5 * (d - alpha)
    if d == 1:
        n_nodes = DEFAULT_NODES_1D if n_nodes is None else int(n_nodes)
        cutoff = DEFAULT_CUTOFF_1D if cutoff is None else float(cutoff)
        x, w = _graded_axis(n_nodes, cutoff)
        k_lag = _window_transform_diff_1d(window, x[:, None] - x[None, :])
        sing = np.abs(x) ** expo
        m = c2 * np.sqrt(np.outer(w, w)) * k_lag * np.outer(sing, sing)
        m = 0.5 * (m + m.T)  # kill rounding asymmetry
        return RosenblattKernel(
            nodes=x[:, None], weights=w, matrix=m, dimension=1, alpha=float(alpha)
        )
    if window.shape != "ball":
        raise UnsupportedModelError(
            "d=2 kernel construction needs a ball window; the angular "
            "decomposition relies on an isotropic transform"
        )
    n_rad = DEFAULT_RADIAL_2D if n_nodes is None else int(n_nodes)
    cutoff = DEFAULT_CUTOFF_2D if cutoff is None else float(cutoff)
    if cutoff <= 2.0 * _GRADED_END_2D:
        raise ParameterError(f"d=2 cutoff must exceed {2 * _GRADED_END_2D}, got {cutoff}")
    rad, wrad = _radial_axis_2d(n_rad, cutoff)
    m_max = min(_MAX_HARMONIC, _ANGULAR_SAMPLES // 2 - 1)
    coef = _angular_block_coeffs(window, rad, m_max)
    # radial measure s ds and one weight factor per side
    su = np.sqrt(wrad * rad) * rad**expo
    base = 2.0 * pi * c2 * np.outer(su, su)
    blocks = []
    for harmonic in range(m_max + 1):
        blk = base * coef[:, :, harmonic]
        blocks.append(0.5 * (blk + blk.T))
    return RosenblattKernel(
        nodes=rad[:, None],
        weights=wrad,
        matrix=None,
        dimension=2,
        alpha=float(alpha),
        blocks=tuple(blocks),
        block_multiplicity=(1,) + (2,) * m_max,
    )


def eigen_series(kernel, m):
    """Top-m eigenvalues of the kernel by magnitude, with tail-mass report.

    Block kernels are solved per angular harmonic and merged with their
    multiplicities. The relative Frobenius mass left out by the truncation
    must stay below 1%; a larger tail means m is too small for sampling
    purposes.
    """
    try:
        if kernel.blocks is not None:
            parts = [
                np.repeat(np.linalg.eigvalsh(blk), mult)
                for blk, mult in zip(kernel.blocks, kernel.block_multiplicity)
            ]
            eig = np.concatenate(parts)
        else:
            eig = np.linalg.eigvalsh(kernel.matrix)
    except np.linalg.LinAlgError as exc:
        raise AccuracyError(f"eigen-solver did not converge: {exc}") from None
    size = eig.size
    m = int(m)
    if not (1 <= m <= size):
        raise ParameterError(f"truncation count must lie in [1, {size}], got {m}")
    order = np.argsort(-np.abs(eig))
    eig = eig[order]
    total = float(np.sum(eig**2))
    mass = float(np.sum(eig[:m] ** 2))
    tail = 0.0 if total == 0.0 else max(0.0, 1.0 - mass / total)
    if tail >= 0.01:
        raise ParameterError(
            f"truncation keeps only {100 * (1 - tail):.2f}% of the spectral mass; "
            f"increase m (got {m})"
        )
    return EigenSeries(
        eigenvalues=tuple(float(v) for v in eig[:m]),
        kept=m,
        tail_mass=tail,
        raw_variance=2.0 * mass,
    )


def calibrate_series(series, target_variance):
    """Rescale eigenvalues so the series variance matches the oracle exactly.

    The factor is stored on the result and is a quality metric: values
    outside [0.97, 1.03] mean the mesh has not converged and are refused.
    """
    if not target_variance > 0.0:
        raise ParameterError(f"target variance must be positive, got {target_variance}")
    current = series.variance
    factor = sqrt(target_variance / current)
    if not (0.97 <= factor <= 1.03):
        raise ParameterError(
            f"calibration factor {factor:.4f} outside [0.97, 1.03]; kernel mesh "
            f"has not converged to the oracle variance"
        )
    return EigenSeries(
        eigenvalues=tuple(v * factor for v in series.eigenvalues),
        kept=series.kept,
        tail_mass=series.tail_mass,
        raw_variance=series.raw_variance,
        calibration_factor=series.calibration_factor * factor,
    )


def sample(series, n, seed):
    """n i.i.d. draws of sum_j nu_j (Z_j^2 - 1), chunked for memory."""
    n = int(n)
    if n < 1:
        raise ParameterError(f"sample count must be >= 1, got {n}")
    nu = np.asarray(series.eigenvalues)
    rng = np.random.default_rng(seed)
    out = np.empty(n)
    done = 0
    while done < n:
        take = min(_SAMPLE_CHUNK, n - done)
        z = rng.standard_normal((take, nu.size))
        out[done : done + take] = (z * z - 1.0) @ nu
        done += take
    return out


def cumulant(series, p):
    """p-th cumulant 2^(p-1) (p-1)! sum_j nu_j^p of the series law."""
    p = int(p)
    if p < 2:
        raise ParameterError(f"cumulant order must be >= 2, got {p}")
    nu = np.asarray(series.eigenvalues)
    return float(2.0 ** (p - 1) * factorial(p - 1) * np.sum(nu**p))


def variance_oracle(window, alpha, d):
    """Limit variance: twice the double window integral of |u-v|^(-2 alpha).

    Independent of the Nystrom construction; evaluated through the distance
    distribution of the window. Diverges (and raises) once alpha >= d/2.
    """
    d = int(d)
    if window.dimension != d:
        raise ParameterError(
            f"window dimension {window.dimension} does not match d={d}"
        )
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if alpha >= 0.5 * d:
        raise IntegrabilityError(
            f"limit variance diverges for alpha >= d/2 (got alpha={alpha}, d={d})"
        )
    return 2.0 * distance_integral(window, 1.0, lambda z: z ** (-2.0 * alpha))


@dataclass(frozen=True)
class DensityTable:
    """KDE on a uniform grid; max_value witnesses density boundedness."""

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    max_value: float


def density_estimate(samples, bandwidth, grid_size=512):
    """Gaussian-kernel density estimate via a fine histogram convolution.

    Needs at least 10^4 samples; the returned table integrates to 1 up to
    the grid truncation (four bandwidths beyond the sample range).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 10**4:
        raise ParameterError(
            f"density estimate needs >= 10^4 samples, got {samples.size}"
        )
    if not bandwidth > 0.0:
        raise ParameterError(f"bandwidth must be positive, got {bandwidth}")
    lo = samples.min() - 4.0 * bandwidth
    hi = samples.max() + 4.0 * bandwidth
    fine = 8 * int(grid_size)
    hist, edges = np.histogram(samples, bins=fine, range=(lo, hi), density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    step = edges[1] - edges[0]
    half_width = int(np.ceil(4.0 * bandwidth / step))
    ker_x = np.arange(-half_width, half_width + 1) * step
    ker = np.exp(-0.5 * (ker_x / bandwidth) ** 2)
    ker /= ker.sum()
    smooth = np.convolve(hist, ker, mode="same")
    stride = fine // int(grid_size)
    grid = centers[::stride]
    vals = smooth[::stride]
    return DensityTable(
        grid=grid,
        values=vals,
        bandwidth=float(bandwidth),
        max_value=float(smooth.max()),
    )


def series_to_json(series):
    return json.dumps(
        {
            "eigenvalues": list(series.eigenvalues),
            "kept": series.kept,
            "tail_mass": series.tail_mass,
            "raw_variance": series.raw_variance,
            "calibration_factor": series.calibration_factor,
        }
    )


def series_from_json(text):
    obj = json.loads(text)
    missing = [k for k in ("eigenvalues", "kept", "tail_mass", "raw_variance") if k not in obj]
    if missing:
        raise ParameterError(f"series document missing {missing}")
    return EigenSeries(
        eigenvalues=tuple(obj["eigenvalues"]),
        kept=int(obj["kept"]),
        tail_mass=float(obj["tail_mass"]),
        raw_variance=float(obj["raw_variance"]),
        calibration_factor=float(obj.get("calibration_factor", 1.0)),
    )
