import logging
import math
from typing import Callable, Dict, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, special, stats
from scipy.interpolate import PchipInterpolator

from utils.constants import (NORMALIZATION_TOL, SYMMETRY_TOL, TAIL_MASS,
                             ball_volume)
from utils.errors import DensityError, DimensionError, DomainError, ExtrapolationError
from utils.helpers import read_two_column_csv

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]


class DensityPoint(NamedTuple):
    pdf: float
    cdf: float
    dpdf: float


class SignalDensity:
    """
    Standardized symmetric single-peaked noise density phi and its scaled
    family lambda * phi(lambda * (x - theta)).

    For dimension n > 1 the density is radial: pdf(r) is the profile normalized
    so that its integral over R^n is one, and cdf(r) is the radial mass
    P(|eps| <= |r|).
    """

    def __init__(self, family: str, params: Dict[str, float], dimension: int,
                 support_halfwidth: float, tail_point: float,
                 pdf: ArrayFn, dpdf: ArrayFn, cdf: ArrayFn, radial_cdf: ArrayFn,
                 radial_quantile: Optional[ArrayFn] = None,
                 kinks: Sequence[float] = (), differentiable: bool = True,
                 noise_scale: float = 1.0, validate: bool = True):
        self.family = family
        self.params = dict(params)
        self.dimension = int(dimension)
        self.support_halfwidth = float(support_halfwidth)
        self.tail_point = float(tail_point)
        self.volume_coefficient = ball_volume(self.dimension)
        self.kinks = tuple(float(k) for k in kinks)
        self.differentiable = differentiable
        self.noise_scale = float(noise_scale)
        self._pdf = pdf
        self._dpdf = dpdf
        self._cdf = cdf
        self._radial_cdf = radial_cdf
        self._radial_quantile = radial_quantile
        if validate:
            self.validate()

    def __repr__(self) -> str:
        return f"SignalDensity(family={self.family!r}, params={self.params}, dimension={self.dimension})"

    # Vectorized evaluation (no hull checks, zero outside the support)

    def pdf(self, x) -> np.ndarray:
        return self._pdf(np.abs(np.asarray(x, dtype=float)))

    def dpdf(self, x) -> np.ndarray:
        """Derivative of the profile; right derivative at kinks."""
        x = np.asarray(x, dtype=float)
        sign = np.where(x < 0, -1.0, 1.0)
        return sign * self._dpdf(np.abs(x))

    def cdf(self, x) -> np.ndarray:
        return self._cdf(np.asarray(x, dtype=float))

    def radial_cdf(self, r) -> np.ndarray:
        """P(|eps| <= r); equals 2 * cdf(r) - 1 in dimension one."""
        r = np.maximum(np.asarray(r, dtype=float), 0.0)
        return self._radial_cdf(r)

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.support_halfwidth)

    @property
    def scan_limit(self) -> float:
        return self.support_halfwidth if self.is_compact else self.tail_point

    def evaluate(self, x: float) -> DensityPoint:
        x = float(x)
        if self.family == "tabulated" and abs(x) > self.support_halfwidth * (1 + 1e-12):
            raise ExtrapolationError(
                f"Tabulated density queried at x={x}, outside its grid hull [-{self.support_halfwidth}, {self.support_halfwidth}]")
        return DensityPoint(pdf=float(self.pdf(x)), cdf=float(self.cdf(x)), dpdf=float(self.dpdf(x)))

    def scaled_pdf(self, x, theta, lam: float) -> np.ndarray:
        """lambda^n * phi(lambda * |x - theta|)."""
        if lam <= 0:
            raise DomainError(f"Precision must be positive, got lambda={lam}")
        diff = np.asarray(x, dtype=float) - np.asarray(theta, dtype=float)
        if self.dimension > 1:
            if diff.ndim == 0 or diff.shape[-1] != self.dimension:
                raise DimensionError(f"Expected points with last axis {self.dimension}, got shape {diff.shape}")
            diff = np.linalg.norm(diff, axis=-1)
        return lam ** self.dimension * self.pdf(lam * diff)

    def radial_weight(self, r) -> np.ndarray:
        """Mass per unit radius: phi(r) * n * V_n * r^(n-1)."""
        r = np.asarray(r, dtype=float)
        n = self.dimension
        return self.pdf(r) * n * self.volume_coefficient * np.power(r, n - 1)

    def noise_scaled(self, k: float) -> "SignalDensity":
        """Density of k * eps, i.e. phi(x / k) / k^n."""
        if k <= 0:
            raise DomainError(f"Noise scale must be positive, got {k}")
        n = self.dimension
        base = self
        quantile = None
        if self._radial_quantile is not None:
            quantile = lambda u: k * base._radial_quantile(u)
        return SignalDensity(
            family=self.family, params=self.params, dimension=n,
            support_halfwidth=k * self.support_halfwidth, tail_point=k * self.tail_point,
            pdf=lambda r: base._pdf(r / k) / k ** n,
            dpdf=lambda r: base._dpdf(r / k) / k ** (n + 1),
            cdf=lambda x: base._cdf(x / k),
            radial_cdf=lambda r: base._radial_cdf(r / k),
            radial_quantile=quantile,
            kinks=[k * p for p in self.kinks], differentiable=self.differentiable,
            noise_scale=k * self.noise_scale, validate=False)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw noise eps; shape (size,) in dimension one, (size, n) otherwise."""
        u = rng.random(size)
        radius = self._quantile(u)
        if self.dimension == 1:
            sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
            return sign * radius
        direction = rng.standard_normal((size, self.dimension))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        return radius[:, None] * direction

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        if self._radial_quantile is not None:
            return self._radial_quantile(u)
        # Inverse of the radial cdf from a dense table
        grid = np.concatenate([[0.0], np.geomspace(1e-9 * self.scan_limit, self.scan_limit, 8192)])
        mass = np.maximum.accumulate(self.radial_cdf(grid))
        return np.interp(u, mass, grid)

    def validate(self) -> None:
        """Check symmetry, single-peakedness and normalization."""
        limit = self.scan_limit
        grid = np.linspace(0.0, limit, 2001)
        if np.max(np.abs(self.pdf(grid) - self.pdf(-grid))) > SYMMETRY_TOL:
            raise DensityError(f"{self.family} density is not symmetric")
        values = self._pdf(grid)
        if np.any(values < 0):
            raise DensityError(f"{self.family} density takes negative values")
        if np.any(np.diff(values) > SYMMETRY_TOL * max(1.0, values[0])):
            raise DensityError(f"{self.family} density is not single-peaked")
        total = self.total_mass()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DensityError(f"{self.family} density integrates to {total:.12g}, not 1")

    def total_mass(self) -> float:
        """Integral of the density over R^n by adaptive quadrature."""
        breaks = sorted({p for p in self.kinks if 0 < p} | ({self.support_halfwidth} if self.is_compact else set()))
        upper = self.support_halfwidth if self.is_compact else np.inf
        edges = [0.0] + [b for b in breaks if b < upper] + [upper]
        weight = lambda r: float(self.radial_weight(r))
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            value, _ = integrate.quad(weight, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += value
        return total


# Family builders

def _frozen_family(family: str, dist, dimension: int, support: float, kinks=(), differentiable=True,
                   dlogpdf: Optional[ArrayFn] = None) -> SignalDensity:
    if dimension != 1:
        raise DimensionError(f"{family} density is only available in dimension 1")
    pdf = lambda r: dist.pdf(r)
    dpdf = lambda r: dlogpdf(r) * dist.pdf(r)
    tail = support if math.isfinite(support) else float(dist.isf(TAIL_MASS))
    return SignalDensity(
        family=family, params={}, dimension=1, support_halfwidth=support, tail_point=tail,
        pdf=pdf, dpdf=dpdf, cdf=lambda x: dist.cdf(x),
        radial_cdf=lambda r: np.clip(2.0 * dist.cdf(r) - 1.0, 0.0, 1.0),
        radial_quantile=lambda u: dist.ppf(0.5 + 0.5 * u),
        kinks=kinks, differentiable=differentiable)


def gaussian(dimension: int = 1) -> SignalDensity:
    n = dimension
    if n == 1:
        return _frozen_family("gaussian", stats.norm(), 1, np.inf, dlogpdf=lambda r: -r)
    chi = stats.chi(df=n)
    norm_const = (2.0 * np.pi) ** (-n / 2.0)
    profile = lambda r: norm_const * np.exp(-0.5 * r * r)
    return SignalDensity(
        family="gaussian", params={}, dimension=n, support_halfwidth=np.inf,
        tail_point=float(chi.isf(TAIL_MASS)), pdf=profile, dpdf=lambda r: -r * profile(r),
        cdf=lambda x: chi.cdf(np.abs(x)), radial_cdf=lambda r: chi.cdf(r),
        radial_quantile=lambda u: chi.ppf(u))


def laplace(dimension: int = 1) -> SignalDensity:
    n = dimension
    if n == 1:
        return _frozen_family("laplace", stats.laplace(), 1, np.inf, kinks=(0.0,), differentiable=False,
                              dlogpdf=lambda r: -np.ones_like(r))
    radius = stats.gamma(a=n)
    norm_const = 1.0 / (n * ball_volume(n) * math.gamma(n))
    profile = lambda r: norm_const * np.exp(-r)
    return SignalDensity(
        family="laplace", params={}, dimension=n, support_halfwidth=np.inf,
        tail_point=float(radius.isf(TAIL_MASS)), pdf=profile, dpdf=lambda r: -profile(r),
        cdf=lambda x: radius.cdf(np.abs(x)), radial_cdf=lambda r: radius.cdf(r),
        radial_quantile=lambda u: radius.ppf(u), kinks=(0.0,), differentiable=False)


def logistic(dimension: int = 1) -> SignalDensity:
    if dimension == 1:
        return _frozen_family("logistic", stats.logistic(), 1, np.inf, dlogpdf=lambda r: -np.tanh(0.5 * r))
    shape = lambda r: np.exp(-r) / (1.0 + np.exp(-r)) ** 2
    return _radial_from_shape("logistic", {}, dimension, shape, lambda r: -np.tanh(0.5 * r) * shape(r),
                              support=np.inf, tail_guess=60.0)


def uniform(dimension: int = 1) -> SignalDensity:
    n = dimension
    if n == 1:
        return _frozen_family("uniform", stats.uniform(loc=-1.0, scale=2.0), 1, 1.0, kinks=(1.0,),
                              dlogpdf=lambda r: np.zeros_like(r))
    height = 1.0 / ball_volume(n)
    return SignalDensity(
        family="uniform", params={}, dimension=n, support_halfwidth=1.0, tail_point=1.0,
        pdf=lambda r: np.where(r <= 1.0, height, 0.0), dpdf=lambda r: np.zeros_like(r),
        cdf=lambda x: np.minimum(np.abs(x), 1.0) ** n, radial_cdf=lambda r: np.minimum(r, 1.0) ** n,
        radial_quantile=lambda u: u ** (1.0 / n), kinks=(1.0,))


def triangular(dimension: int = 1) -> SignalDensity:
    n = dimension
    if n == 1:
        return _frozen_family("triangular", stats.triang(c=0.5, loc=-1.0, scale=2.0), 1, 1.0,
                              kinks=(0.0, 1.0), differentiable=False,
                              dlogpdf=lambda r: np.where(r < 1.0, -1.0 / np.maximum(1.0 - r, 1e-300), 0.0))
    radius = stats.beta(n, 2)
    height = (n + 1) / ball_volume(n)
    return SignalDensity(
        family="triangular", params={}, dimension=n, support_halfwidth=1.0, tail_point=1.0,
        pdf=lambda r: height * np.clip(1.0 - r, 0.0, None),
        dpdf=lambda r: np.where(r < 1.0, -height, 0.0),
        cdf=lambda x: radius.cdf(np.minimum(np.abs(x), 1.0)), radial_cdf=lambda r: radius.cdf(np.minimum(r, 1.0)),
        radial_quantile=lambda u: radius.ppf(u), kinks=(0.0, 1.0), differentiable=False)


def cauchy(dimension: int = 1) -> SignalDensity:
    return _frozen_family("cauchy", stats.cauchy(), dimension, np.inf,
                          dlogpdf=lambda r: -2.0 * r / (1.0 + r * r))


def truncated_exp_inverse(eps: float = 0.1, dimension: int = 1) -> SignalDensity:
    """
    phi(x) = k * exp(1/eps) on |x| < eps, k * exp(1/|x|) on eps <= |x| <= 1, zero beyond.
    The elasticity is 0 below eps and 1/x on [eps, 1], so it decreases there.
    """
    if dimension != 1:
        raise DimensionError("truncated_exp_inverse density is only available in dimension 1")
    if not 1.0 / 700.0 < eps < 1.0:
        raise DensityError(f"truncated_exp_inverse needs eps in (1/700, 1), got {eps}")
    peak = math.exp(1.0 / eps)
    shape = lambda r: np.where(r < eps, peak, np.where(r <= 1.0, np.exp(1.0 / np.clip(r, eps, 1.0)), 0.0))
    inner, _ = integrate.quad(lambda r: math.exp(1.0 / r), eps, 1.0, epsabs=1e-12, epsrel=1e-13, limit=200)
    k = 1.0 / (2.0 * (eps * peak + inner))

    def half_mass(r):
        r = np.clip(r, 0.0, 1.0)
        body = np.clip(r, eps, 1.0)
        tail_part = (special.expi(1.0 / eps) - eps * peak) - (special.expi(1.0 / body) - body * np.exp(1.0 / body))
        return k * np.where(r < eps, r * peak, eps * peak + tail_part)

    pdf = lambda r: k * shape(r)
    dpdf = lambda r: np.where((r >= eps) & (r <= 1.0), -pdf(r) / np.clip(r, eps, 1.0) ** 2, 0.0)
    return SignalDensity(
        family="truncated_exp_inverse", params={"eps": eps, "k": k}, dimension=1,
        support_halfwidth=1.0, tail_point=1.0, pdf=pdf, dpdf=dpdf,
        cdf=lambda x: 0.5 + np.sign(x) * half_mass(np.abs(x)),
        radial_cdf=lambda r: np.clip(2.0 * half_mass(r), 0.0, 1.0),
        kinks=(eps, 1.0), differentiable=False)


def tabulated(points, dimension: int = 1) -> SignalDensity:
    """Monotone piecewise-cubic (PCHIP) density through (x, phi) pairs, symmetric about 0."""
    table = np.asarray(points, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or len(table) < 3:
        raise DensityError("tabulated density needs at least three (x, phi) pairs")
    negative = table[table[:, 0] < 0]
    half = table[table[:, 0] >= 0]
    half = half[np.argsort(half[:, 0])]
    if len(negative):
        mirror = PchipInterpolator(half[:, 0], half[:, 1], extrapolate=False)(-negative[:, 0])
        if np.any(np.isnan(mirror)) or np.max(np.abs(mirror - negative[:, 1])) > SYMMETRY_TOL:
            raise DensityError("tabulated density is not symmetric about 0")
    if half[0, 0] != 0.0:
        raise DensityError("tabulated density grid must contain x = 0")
    if np.any(np.diff(half[:, 1]) > 0) or np.any(half[:, 1] < 0):
        raise DensityError("tabulated density must be nonnegative and nonincreasing in |x|")
    hull = float(half[-1, 0])
    shape = PchipInterpolator(half[:, 0], half[:, 1], extrapolate=False)
    dshape = shape.derivative()
    n = dimension
    if n == 1:
        antideriv = shape.antiderivative()
        scale = 2.0 * float(antideriv(hull))
        pdf = lambda r: np.nan_to_num(shape(np.minimum(r, hull)) / scale) * (r <= hull)
        dpdf = lambda r: np.nan_to_num(dshape(np.minimum(r, hull)) / scale) * (r <= hull)
        half_mass = lambda r: antideriv(np.minimum(r, hull)) / scale
        return SignalDensity(
            family="tabulated", params={"nodes": float(len(half))}, dimension=1,
            support_halfwidth=hull, tail_point=hull, pdf=pdf, dpdf=dpdf,
            cdf=lambda x: 0.5 + np.sign(x) * half_mass(np.abs(x)),
            radial_cdf=lambda r: np.clip(2.0 * half_mass(r), 0.0, 1.0),
            kinks=tuple(half[:, 0]), differentiable=True)
    evaluate = lambda r: np.nan_to_num(shape(np.minimum(r, hull))) * (r <= hull)
    devaluate = lambda r: np.nan_to_num(dshape(np.minimum(r, hull))) * (r <= hull)
    return _radial_from_shape("tabulated", {"nodes": float(len(half))}, n, evaluate, devaluate,
                              support=hull, tail_guess=hull)


def _radial_from_shape(family: str, params: Dict[str, float], dimension: int,
                       shape: ArrayFn, dshape: ArrayFn, support: float, tail_guess: float) -> SignalDensity:
    """Radial density in R^n from an unnormalized profile, with quadrature for the radial cdf."""
    n = dimension
    surface = n * ball_volume(n)
    upper = support if math.isfinite(support) else np.inf
    radial = lambda r: float(shape(np.asarray(r))) * surface * r ** (n - 1)
    total, _ = integrate.quad(radial, 0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=400)
    if not np.isfinite(total) or total <= 0:
        raise DensityError(f"{family} profile is not integrable in dimension {n}")

    def radial_cdf(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, ri in enumerate(r.ravel()):
            hi = min(ri, upper)
            out.ravel()[i] = 0.0 if hi <= 0 else integrate.quad(radial, 0.0, hi, epsabs=1e-14, epsrel=1e-12, limit=400)[0] / total
        return np.clip(out, 0.0, 1.0)

    tail = support
    if not math.isfinite(support):
        tail = tail_guess
        while 1.0 - integrate.quad(radial, 0.0, tail, limit=400)[0] / total > TAIL_MASS:
            tail *= 1.5
    return SignalDensity(
        family=family, params=params, dimension=n, support_halfwidth=support, tail_point=tail,
        pdf=lambda r: shape(r) / total, dpdf=lambda r: dshape(r) / total,
        cdf=lambda x: radial_cdf(np.abs(x)).reshape(np.shape(x)), radial_cdf=lambda r: radial_cdf(r).reshape(np.shape(r)))


FAMILIES = {
    "gaussian": gaussian,
    "laplace": laplace,
    "logistic": logistic,
    "uniform": uniform,
    "triangular": triangular,
    "cauchy": cauchy,
    "truncated_exp_inverse": truncated_exp_inverse,
}


def load_tabulated_csv(path: str, dimension: int = 1) -> SignalDensity:
    return tabulated(read_two_column_csv(path), dimension=dimension)


def build_density(family: str, params: Optional[Dict[str, float]] = None, dimension: int = 1,
                  points=None, path: Optional[str] = None) -> SignalDensity:
    """Construct a density from its config description."""
    params = dict(params or {})
    if family == "tabulated":
        if path is not None:
            return load_tabulated_csv(path, dimension=dimension)
        return tabulated(points, dimension=dimension)
    if family not in FAMILIES:
        raise DensityError(f"Unknown density family: {family}")
    noise_scale = params.pop("scale", 1.0)
    density = FAMILIES[family](dimension=dimension, **params)
    if noise_scale != 1.0:
        density = density.noise_scaled(noise_scale)
    logger.debug(f"Built {density}")
    return density
