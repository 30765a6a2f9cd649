"""Warping functions w_d, w_m over a closed interval and their zero-set diagnostics."""

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

logger = logging.getLogger(__name__)

# Samples below this absolute value are structural zeros
ZERO_THRESHOLD = 1e-14

WARP_KINDS = ('constant', 'linear', 'sin', 'poly', 'table', 'abs')

# Default parameters per kind, filled from the left by the given params
KIND_DEFAULTS = {
    'constant': (1.0,),
    'linear': (1.0, 0.0),        # slope, intercept
    'sin': (1.0, 1.0, 0.0),      # amplitude, frequency, phase
    'abs': (1.0, 0.0),           # slope, center
}


class CompatibilityError(ValueError):
    """w_d vanishes at a level where w_m does not."""


@dataclass(frozen=True)
class WarpFunction:
    """A closed-form or tabulated warping function.

    ``table`` functions hold one value per grid level and are linearly
    interpolated between levels; ``poly`` coefficients run from the
    constant term upwards.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in WARP_KINDS:
            raise ValueError(f"unknown warp kind '{self.kind}', expected one of {', '.join(WARP_KINDS)}")

        params = tuple(float(p) for p in np.atleast_1d(np.asarray(self.params, dtype=float)))
        if self.kind in KIND_DEFAULTS:
            defaults = KIND_DEFAULTS[self.kind]
            if len(params) > len(defaults):
                raise ValueError(f"{self.kind} takes at most {len(defaults)} params, got {len(params)}")
            params = params + defaults[len(params):]
        elif not params:
            raise ValueError(f"{self.kind} warp needs at least one param")
        object.__setattr__(self, 'params', params)

    def __call__(self, t, levels=None):
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == 'constant':
            return np.full_like(t, p[0])
        if self.kind == 'linear':
            return p[0] * t + p[1]
        if self.kind == 'sin':
            return p[0] * np.sin(p[1] * t + p[2])
        if self.kind == 'poly':
            return P.polyval(t, p)
        if self.kind == 'abs':
            return p[0] * np.abs(t - p[1])
        return np.interp(t, self._table_levels(levels), p)

    def derivative(self, t, levels=None):
        """Derivative in t; one-sided segment slopes for tables, sign for abs."""
        t = np.asarray(t, dtype=float)
        p = self.params
        if self.kind == 'constant':
            return np.zeros_like(t)
        if self.kind == 'linear':
            return np.full_like(t, p[0])
        if self.kind == 'sin':
            return p[0] * p[1] * np.cos(p[1] * t + p[2])
        if self.kind == 'poly':
            return P.polyval(t, P.polyder(p)) if len(p) > 1 else np.zeros_like(t)
        if self.kind == 'abs':
            return p[0] * np.sign(t - p[1])

        levels = self._table_levels(levels)
        slopes = np.diff(p) / np.diff(levels)
        segment = np.clip(np.searchsorted(levels, t, side='right') - 1, 0, len(slopes) - 1)
        return slopes[segment]

    def _table_levels(self, levels):
        if levels is None:
            raise ValueError("table warp needs the level grid to be evaluated")
        if len(levels) != len(self.params):
            raise ValueError(f"table has {len(self.params)} entries but the grid has {len(levels)} levels")
        return levels

    def to_dict(self):
        return {'kind': self.kind, 'params': list(self.params)}

    @classmethod
    def from_dict(cls, document):
        if 'kind' not in document:
            raise ValueError("warp function is missing 'kind'")
        return cls(kind=document['kind'], params=tuple(np.atleast_1d(document.get('params', []))))


def _clean(values, label):
    """Zero out sub-threshold values and reject negative ones."""
    values = np.array(values, dtype=float)
    if not np.isfinite(values).all():
        raise ValueError(f"{label} is not finite on the interval")
    values[np.abs(values) < ZERO_THRESHOLD] = 0.0
    negative = np.flatnonzero(values < 0)
    if len(negative):
        raise ValueError(f"{label} is negative at level {negative[0]} ({values[negative[0]]:.6g})")
    return values


@dataclass(frozen=True)
class WarpProfile:
    """Warping functions sampled on a uniform grid of [a, b]."""

    interval: tuple
    grid_count: int
    w_d: WarpFunction
    w_m: WarpFunction

    def __post_init__(self):
        a, b = (float(v) for v in self.interval)
        object.__setattr__(self, 'interval', (a, b))
        object.__setattr__(self, 'grid_count', int(self.grid_count))

        if not a < b:
            raise ValueError(f"interval must satisfy a < b, got [{a}, {b}]")
        if self.grid_count < 2:
            raise ValueError(f"grid needs at least 2 levels, got {self.grid_count}")
        for label, func in (('w_d', self.w_d), ('w_m', self.w_m)):
            if func.kind == 'table' and len(func.params) != self.grid_count:
                raise ValueError(
                    f"{label} table has {len(func.params)} entries, expected {self.grid_count}"
                )
        # forces sampling, which validates nonnegativity
        self.wd_samples, self.wm_samples

    @property
    def a(self):
        return self.interval[0]

    @property
    def b(self):
        return self.interval[1]

    @property
    def length(self):
        return self.b - self.a

    @cached_property
    def levels(self):
        return np.linspace(self.a, self.b, self.grid_count)

    @property
    def dt(self):
        return self.length / (self.grid_count - 1)

    @cached_property
    def wd_samples(self):
        return _clean(self.w_d(self.levels, self.levels), 'w_d')

    @cached_property
    def wm_samples(self):
        return _clean(self.w_m(self.levels, self.levels), 'w_m')

    @cached_property
    def level_weights(self):
        """Trapezoid weights Δt_i, half at the two boundary levels."""
        weights = np.full(self.grid_count, self.dt)
        weights[[0, -1]] = self.dt / 2
        return weights

    def wd(self, t):
        """Vectorized w_d, sub-threshold values and round-off negatives set to 0."""
        values = np.asarray(self.w_d(t, self.levels), dtype=float)
        return np.where(values < ZERO_THRESHOLD, 0.0, values)

    def wm(self, t):
        values = np.asarray(self.w_m(t, self.levels), dtype=float)
        return np.where(values < ZERO_THRESHOLD, 0.0, values)

    def wd_derivative(self, t):
        return self.w_d.derivative(t, self.levels)

    def contains(self, t, slack=0.0):
        return self.a - slack <= t <= self.b + slack

    def level_of(self, t):
        """Nearest level index of t."""
        return int(np.clip(np.rint((t - self.a) / self.dt), 0, self.grid_count - 1))

    def to_dict(self):
        return {
            'interval': list(self.interval),
            'grid': self.grid_count,
            'w_d': self.w_d.to_dict(),
            'w_m': self.w_m.to_dict(),
        }


@dataclass(frozen=True)
class ZeroSetReport:
    """Zero levels of w_d, w_m with discreteness and linear-decay diagnostics."""

    zero_levels_wd: tuple
    zero_levels_wm: tuple
    is_discrete: bool
    linear_decay_constant: float = None

    @property
    def has_zeros(self):
        return len(self.zero_levels_wm) > 0


def eval_profile(profile, t):
    """
    Evaluate both warping functions at one point.

    Parameters
    ----------
    profile : WarpProfile
        The profile
    t : float
        Point of [a, b]

    Returns
    -------
    tuple
        (w_d(t), w_m(t))

    Examples
    --------
    >>> eval_profile(cone_profile(11), 0.5)
    (0.5, 0.5)
    """
    t = float(t)
    if not profile.contains(t):
        raise ValueError(f"t={t} lies outside the interval [{profile.a}, {profile.b}]")
    return float(profile.wd(t)), float(profile.wm(t))


def distance_to_zero_set(profile, t):
    """
    Distance D(t) from t to the nearest zero level of w_m.

    Returns +inf where w_m has no zero levels.
    """
    t = np.asarray(t, dtype=float)
    zeros = profile.levels[profile.wm_samples == 0]
    if len(zeros) == 0:
        return np.full_like(t, np.inf)
    return np.abs(t[..., None] - zeros).min(axis=-1)


def analyze_zero_set(profile):
    """
    Locate the zeros of the warping functions and check compatibility.

    Parameters
    ----------
    profile : WarpProfile
        The profile

    Returns
    -------
    ZeroSetReport
        Zero levels, discreteness of {w_m = 0}, and the smallest C with
        w_m(t_i) <= C * D(t_i) at every level (None when w_m has no zeros)

    Raises
    ------
    CompatibilityError
        If w_d vanishes at a level where w_m does not
    """
    wd_zero = np.flatnonzero(profile.wd_samples == 0)
    wm_zero = np.flatnonzero(profile.wm_samples == 0)

    incompatible = wd_zero[profile.wm_samples[wd_zero] > 0]
    if len(incompatible):
        i = int(incompatible[0])
        raise CompatibilityError(
            f"compatibility violation at level {i} (t={profile.levels[i]:.6g}): "
            f"w_d=0 but w_m={profile.wm_samples[i]:.6g}"
        )

    is_discrete = not bool((np.diff(wm_zero) == 1).any())

    decay = None
    if len(wm_zero):
        nonzero = profile.wm_samples > 0
        if nonzero.any():
            dist = distance_to_zero_set(profile, profile.levels[nonzero])
            decay = float((profile.wm_samples[nonzero] / dist).max())
        else:
            decay = 0.0

    logger.debug(
        "zero set: %d w_d levels, %d w_m levels, discrete=%s, C=%s",
        len(wd_zero), len(wm_zero), is_discrete, decay,
    )
    return ZeroSetReport(
        zero_levels_wd=tuple(int(i) for i in wd_zero),
        zero_levels_wm=tuple(int(i) for i in wm_zero),
        is_discrete=is_discrete,
        linear_decay_constant=decay,
    )


# ---------------------------------------------------------------------------
# Fixture profiles
# ---------------------------------------------------------------------------

def cylinder_profile(grid_count, interval=(0.0, 1.0)):
    """w_d = w_m = 1."""
    one = WarpFunction('constant', (1.0,))
    return WarpProfile(interval=interval, grid_count=grid_count, w_d=one, w_m=one)


def cone_profile(grid_count, height=1.0):
    """w_d(t) = w_m(t) = t on [0, height]."""
    linear = WarpFunction('linear', (1.0, 0.0))
    return WarpProfile(interval=(0.0, height), grid_count=grid_count, w_d=linear, w_m=linear)


def suspension_profile(grid_count):
    """w_d(t) = w_m(t) = sin t on [0, pi]."""
    sine = WarpFunction('sin', (1.0, 1.0, 0.0))
    return WarpProfile(interval=(0.0, np.pi), grid_count=grid_count, w_d=sine, w_m=sine)


PROFILE_FACTORIES = {
    'cylinder': cylinder_profile,
    'cone': cone_profile,
    'suspension': suspension_profile,
}


# ---------------------------------------------------------------------------
# Profile files
# ---------------------------------------------------------------------------

def profile_from_dict(document):
    missing = [key for key in ('interval', 'grid', 'w_d', 'w_m') if key not in document]
    if missing:
        raise ValueError(f"profile document is missing {', '.join(missing)}")
    interval = document['interval']
    if len(interval) != 2:
        raise ValueError("interval must be [a, b]")
    return WarpProfile(
        interval=tuple(interval),
        grid_count=int(document['grid']),
        w_d=WarpFunction.from_dict(document['w_d']),
        w_m=WarpFunction.from_dict(document['w_m']),
    )


def load_profile(path):
    """Load and validate a profile file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Profile file not found at {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"could not parse profile file {path}: {e}") from e
    return profile_from_dict(document)


def save_profile(profile, path):
    Path(path).write_text(json.dumps(profile.to_dict(), indent=2))
