"""
Posterior algebra for max-backup

Value posteriors come in two forms: a Gaussian (std 0 is a point mass) and a
discrete CDF tabulated on strictly increasing bins. Max-backup turns a set of
independent child posteriors into the posterior of their maximum by
interpolating every CDF onto a shared grid and multiplying pointwise.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from app.errors import InvalidArgumentError, InvalidParameterError

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_BINS = 50
LOWER_QUANTILE = 0.001
UPPER_QUANTILE = 0.999
POINT_MASS_EPS = 1e-9


@dataclass(frozen=True)
class GaussianPosterior:
    """Gaussian value posterior; std == 0 denotes a point mass"""
    mean: float
    std: float

    @property
    def is_point_mass(self) -> bool:
        return self.std == 0.0

    @property
    def moments(self) -> Tuple[float, float]:
        return self.mean, self.std * self.std


@dataclass(frozen=True, eq=False)
class DiscreteCdfPosterior:
    """Piecewise-linear CDF tabulated at strictly increasing bins"""
    bins: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        bins = np.array(self.bins, dtype=float)
        cdf = np.array(self.cdf, dtype=float)
        if bins.ndim != 1 or bins.shape != cdf.shape or bins.size < 2:
            raise InvalidParameterError(
                "bins and cdf must be 1-D vectors of equal length >= 2",
                {"bins_shape": bins.shape, "cdf_shape": cdf.shape}
            )
        if np.any(np.diff(bins) <= 0):
            raise InvalidParameterError("bins must be strictly increasing")
        if np.any(np.diff(cdf) < 0) or cdf[0] < 0.0 or cdf[-1] > 1.0:
            raise InvalidParameterError("cdf must be nondecreasing within [0, 1]")
        bins.setflags(write=False)
        cdf.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "cdf", cdf)

    @property
    def is_point_mass(self) -> bool:
        return False

    @cached_property
    def moments(self) -> Tuple[float, float]:
        # Tail masses sit on the end bins, interval masses on the midpoints
        points = np.concatenate((
            self.bins[:1],
            0.5 * (self.bins[1:] + self.bins[:-1]),
            self.bins[-1:]
        ))
        weights = np.concatenate((
            self.cdf[:1],
            np.diff(self.cdf),
            [1.0 - self.cdf[-1]]
        ))
        mean = float(np.dot(weights, points))
        var = float(np.dot(weights, (points - mean) ** 2))
        return mean, max(var, 0.0)


PosteriorDist = Union[GaussianPosterior, DiscreteCdfPosterior]


@lru_cache(maxsize=16)
def _standard_grid(bins_m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Standard-normal bins from the lower to the upper quantile and their CDF"""
    grid = np.linspace(norm.ppf(LOWER_QUANTILE), norm.ppf(UPPER_QUANTILE), bins_m)
    cdf = norm.cdf(grid)
    grid.setflags(write=False)
    cdf.setflags(write=False)
    return grid, cdf


def make_gaussian(mean: float, std: float) -> GaussianPosterior:
    """
    Build a Gaussian posterior

    Args:
        mean: Posterior mean in reward units
        std: Posterior standard deviation, 0 for a point mass

    Returns:
        GaussianPosterior
    """
    if not np.isfinite(mean) or not np.isfinite(std):
        raise InvalidParameterError(f"mean and std must be finite, got ({mean}, {std})")
    if std < 0:
        raise InvalidParameterError(f"std must be non-negative, got {std}")
    return GaussianPosterior(float(mean), float(std))


def point_mass(value: float) -> GaussianPosterior:
    """Degenerate posterior concentrated on value"""
    return make_gaussian(value, 0.0)


def discretize(dist: PosteriorDist, bins_m: int = DEFAULT_BINS) -> DiscreteCdfPosterior:
    """
    Tabulate a posterior on bins_m linearly spaced bins between its 0.001 and 0.999 quantiles

    A point mass becomes a 2-bin step CDF on [mu - eps, mu].
    """
    if bins_m < 2:
        raise InvalidArgumentError(f"bins_m must be at least 2, got {bins_m}")

    if isinstance(dist, DiscreteCdfPosterior):
        if dist.bins.size == bins_m:
            return dist
        grid = np.linspace(dist.bins[0], dist.bins[-1], bins_m)
        return DiscreteCdfPosterior(grid, np.interp(grid, dist.bins, dist.cdf))

    if not dist.is_point_mass:
        grid, cdf = _standard_grid(bins_m)
        bins = dist.mean + dist.std * grid
        if np.all(np.diff(bins) > 0):
            return DiscreteCdfPosterior(bins, cdf)

    # Point masses (and stds below float resolution) become a step CDF
    lower = min(dist.mean - POINT_MASS_EPS, np.nextafter(dist.mean, -np.inf))
    return DiscreteCdfPosterior(np.array([lower, dist.mean]), np.array([0.0, 1.0]))


def max_of_independent(dists: Sequence[PosteriorDist], bins_m: int = DEFAULT_BINS) -> PosteriorDist:
    """
    Posterior of the maximum of independent variables

    Every input CDF is interpolated onto bins_m bins running from the largest
    first bin to the largest last bin (clamped to 0 left of its support and 1
    right of it), and the interpolated CDFs are multiplied pointwise.

    Args:
        dists: Nonempty list of independent posteriors
        bins_m: Number of output bins

    Returns:
        A point mass when every input is a point mass, otherwise a DiscreteCdfPosterior
    """
    if not dists:
        raise InvalidArgumentError("max_of_independent needs at least one posterior")

    if all(isinstance(d, GaussianPosterior) and d.is_point_mass for d in dists):
        return point_mass(max(d.mean for d in dists))

    tables = [discretize(d, bins_m) for d in dists]
    first_bin = max(t.bins[0] for t in tables)
    last_bin = max(t.bins[-1] for t in tables)
    if last_bin <= first_bin:
        return point_mass(last_bin)

    grid = np.linspace(first_bin, last_bin, bins_m)
    stacked = np.stack([np.interp(grid, t.bins, t.cdf, left=0.0, right=1.0) for t in tables])
    # Column-wise sort keeps the product independent of input order
    cdf = np.prod(np.sort(stacked, axis=0), axis=0)
    cdf = np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)
    return DiscreteCdfPosterior(grid, cdf)


def shift(dist: PosteriorDist, r: float) -> PosteriorDist:
    """Posterior of X + r"""
    if r == 0:
        return dist
    if isinstance(dist, GaussianPosterior):
        return GaussianPosterior(dist.mean + r, dist.std)
    return DiscreteCdfPosterior(dist.bins + r, dist.cdf)


def mean_var(dist: PosteriorDist) -> Tuple[float, float]:
    """Mean and variance (exact for Gaussians, midpoint rule for discrete CDFs)"""
    return dist.moments


def _inverse_cdf(dist: DiscreteCdfPosterior, level: float) -> float:
    """Smallest interpolated value whose CDF reaches level"""
    bins, cdf = dist.bins, dist.cdf
    if level <= cdf[0]:
        return float(bins[0])
    if level > cdf[-1]:
        return float(bins[-1])
    idx = int(np.searchsorted(cdf, level, side="left"))
    lo_c, hi_c = cdf[idx - 1], cdf[idx]
    if hi_c == lo_c:
        return float(bins[idx])
    frac = (level - lo_c) / (hi_c - lo_c)
    return float(bins[idx - 1] + frac * (bins[idx] - bins[idx - 1]))


def quantile(dist: PosteriorDist, alpha: float, exact: bool = False) -> float:
    """
    alpha-quantile of a posterior

    Discrete CDFs are moment-matched to a Gaussian unless exact is set.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"quantile level must lie in (0, 1), got {alpha}")

    if isinstance(dist, DiscreteCdfPosterior) and exact:
        return _inverse_cdf(dist, alpha)

    mean, var = dist.moments
    if var == 0.0:
        return mean
    return float(mean + np.sqrt(var) * norm.ppf(alpha))


def sample(dist: PosteriorDist, rng: np.random.Generator, exact: bool = False) -> float:
    """
    Draw one value; consumes exactly one generator call for every posterior form

    Discrete CDFs are moment-matched to a Gaussian unless exact is set.
    """
    if isinstance(dist, DiscreteCdfPosterior) and exact:
        return _inverse_cdf(dist, rng.random())
    mean, var = dist.moments
    return float(rng.normal(mean, np.sqrt(var)))


def sample_many(dist: PosteriorDist, rng: np.random.Generator, size: int, exact: bool = False) -> np.ndarray:
    """Vectorised sampling used by the brute-force oracles"""
    if isinstance(dist, DiscreteCdfPosterior) and exact:
        levels = rng.random(size)
        return np.array([_inverse_cdf(dist, u) for u in levels])
    mean, var = dist.moments
    return rng.normal(mean, np.sqrt(var), size)


def describe(dist: PosteriorDist) -> dict:
    """Plain-dict summary used by tree dumps and CLI tables"""
    mean, var = dist.moments
    summary = {
        "kind": "gaussian" if isinstance(dist, GaussianPosterior) else "discrete",
        "mean": mean,
        "std": float(np.sqrt(var))
    }
    if isinstance(dist, DiscreteCdfPosterior):
        summary["bins_m"] = int(dist.bins.size)
    return summary
