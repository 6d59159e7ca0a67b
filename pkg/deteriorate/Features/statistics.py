"""
Time-series statistics: first-order moments, co-occurrence features and
detrended fluctuation analysis.

Undefined quantities are returned as NaN so that the caller can mark the
feature missing and impute it.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial
from skimage.feature import graycomatrix

from deteriorate.errors import DomainError

DFA_MIN_WINDOW = 4
COOCCURRENCE_FEATURES = ("energy", "entropy", "correlation", "inertia", "local_homogeneity")


def first_order_stats(values):
    """
    Mean, standard deviation, min, max, skewness and kurtosis.

    The standard deviation uses denominator N; skewness and kurtosis are
    normalized by (N - 1) sigma^3 and (N - 1) sigma^4, kurtosis in excess
    of 3. NaN entries of ``values`` are ignored.

    Returns:
        dict: NaN for std when N < 2, for skewness/kurtosis when N < 3 or
            sigma is 0
    """
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    n = x.size
    stats = dict.fromkeys(("mean", "std", "min", "max", "skewness", "kurtosis"), float("nan"))
    if n == 0:
        return stats
    mean = x.mean()
    deviation = x - mean
    sigma = float(np.sqrt(np.mean(deviation ** 2)))
    stats.update(mean=float(mean), min=float(x.min()), max=float(x.max()))
    if n >= 2:
        stats["std"] = sigma
    if n >= 3 and sigma > 0:
        stats["skewness"] = float(np.sum(deviation ** 3) / ((n - 1) * sigma ** 3))
        stats["kurtosis"] = float(np.sum(deviation ** 4) / ((n - 1) * sigma ** 4) - 3.0)
    return stats


def quantize(values, levels, value_range=None):
    """
    Equal-width quantization to 0..levels-1, missing values to ``levels``.

    Values outside ``value_range`` are clipped to the end bins; a degenerate
    range maps everything to level 0.
    """
    x = np.asarray(values, dtype=float)
    valid = ~np.isnan(x)
    if value_range is None:
        value_range = (np.min(x[valid]), np.max(x[valid])) if valid.any() else (0.0, 0.0)
    low, high = (float(bound) for bound in value_range)
    quantized = np.full(x.shape, levels, dtype=np.uint8)
    if high <= low:
        quantized[valid] = 0
    else:
        bins = np.floor((x[valid] - low) / (high - low) * levels)
        quantized[valid] = np.clip(bins, 0, levels - 1).astype(np.uint8)
    return quantized


@dataclass(frozen=True)
class CooccurrenceMatrix:
    """
    Lag-d pair counts of quantized levels.

    Attributes:
        counts (np.ndarray): levels x levels, counts[i, j] = pairs (x_t, x_t+d)
            with x_t at level i and x_t+d at level j
        levels (int): Q
        lag (int): d
    """

    counts: np.ndarray
    levels: int
    lag: int

    @property
    def n_pairs(self):
        return int(self.counts.sum())

    @property
    def probabilities(self):
        return self.counts / self.counts.sum()


def cooccurrence_matrix(values, levels=16, lag=1, value_range=None):
    """
    Count matrix of quantized level pairs at distance ``lag``.

    Pairs with a missing member are not counted.

    Raises:
        DomainError: series not longer than the lag
    """
    x = np.asarray(values, dtype=float)
    if x.size <= lag:
        raise DomainError(f"series of length {x.size} is not longer than lag {lag}")
    image = quantize(x, levels, value_range)[np.newaxis, :]
    # one extra level collects pairs touching a missing minute
    counts = graycomatrix(image, distances=[lag], angles=[0], levels=levels + 1,
                          symmetric=False, normed=False)
    return CooccurrenceMatrix(counts[:levels, :levels, 0, 0].astype(np.int64), levels, lag)


def cooccurrence_features(values, levels=16, lag=1, value_range=None):
    """
    Energy, entropy, correlation, inertia and local homogeneity.

    Computed on the normalized co-occurrence matrix with levels numbered 1..Q;
    entropy is sum p log p with 0 log 0 = 0, and the marginal means and
    variances are divided by Q.

    Returns:
        dict: all NaN when no valid pair exists; correlation NaN when a
            marginal variance is 0
    """
    matrix = cooccurrence_matrix(values, levels, lag, value_range)
    names = COOCCURRENCE_FEATURES
    if matrix.n_pairs == 0:
        return dict.fromkeys(names, float("nan"))
    p = matrix.probabilities
    q = matrix.levels
    level = np.arange(1, q + 1, dtype=float)
    i, j = level[:, np.newaxis], level[np.newaxis, :]

    occupied = p[p > 0]
    px, py = p.sum(axis=1), p.sum(axis=0)
    mu_x, mu_y = (level * px).sum() / q, (level * py).sum() / q
    sigma_x = np.sqrt(((level - mu_x) ** 2 * px).sum() / q)
    sigma_y = np.sqrt(((level - mu_y) ** 2 * py).sum() / q)
    if sigma_x * sigma_y > 0:
        correlation = float(((i - mu_x) * (j - mu_y) * p).sum() / (sigma_x * sigma_y))
    else:
        correlation = float("nan")
    return {
        "energy": float((p ** 2).sum()),
        "entropy": float((occupied * np.log(occupied)).sum()),
        "correlation": correlation,
        "inertia": float(((i - j) ** 2 * p).sum()),
        "local_homogeneity": float((p / (1.0 + (i - j) ** 2)).sum()),
    }


def dfa_fluctuation(values, window, small_scale_correction=True):
    """
    Detrended fluctuation F(n) with linear detrending.

    The mean-centred series is integrated into a profile, cut into
    non-overlapping segments of ``window`` points (the trailing partial
    segment is dropped), and F is the root mean square of the residuals of
    a least-squares line fitted to each segment.

    Linear detrending of short segments shrinks F below its scaling law:
    for uncorrelated noise E[F(n)^2] = (n^2 - 4) / (15 n) rather than n / 15.
    With ``small_scale_correction`` F is multiplied by sqrt(n^2 / (n^2 - 4)),
    which removes that bias for uncorrelated noise and changes F by 2% at
    n = 10. The raw value is returned otherwise.

    Args:
        values (array-like): finite samples
        window (int): segment length n, at least 4
        small_scale_correction (bool): apply the small-n correction

    Returns:
        float: F(n); exactly 0 for a constant series

    Raises:
        DomainError: window below 4 or series shorter than 2 windows
    """
    x = np.asarray(values, dtype=float)
    n = int(window)
    if n < DFA_MIN_WINDOW:
        raise DomainError(f"DFA window must be at least {DFA_MIN_WINDOW}, got {n}")
    if x.size < 2 * n:
        raise DomainError(f"DFA needs at least {2 * n} samples, got {x.size}")
    if np.ptp(x) == 0:
        return 0.0
    profile = np.cumsum(x - x.mean())
    segments = profile[:(profile.size // n) * n].reshape(-1, n)
    t = np.arange(n, dtype=float)
    intercept, slope = polynomial.polyfit(t, segments.T, 1)
    trend = intercept[:, np.newaxis] + slope[:, np.newaxis] * t
    fluctuation = float(np.sqrt(np.mean((segments - trend) ** 2)))
    if small_scale_correction:
        fluctuation *= float(np.sqrt(n * n / (n * n - 4.0)))
    return fluctuation
