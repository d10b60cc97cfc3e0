"""Cross-section curves, reference profiles and the induced surface metric.

The surfaces under study are produced by translating a closed unit-speed
curve xi(t) = (xi1, xi2) of total length one along a spatial curve
r(x) = (x, f(x), g(x)).  In the (x, t) coordinates the induced metric is

    G = [[1 + f'^2 + g'^2,  f' xi1' + g' xi2'],
         [f' xi1' + g' xi2',        1        ]],

    det G = 1 + (f' xi2' - g' xi1')^2,   h = sqrt(det G).

Cross-sections are stored as uniform periodic samples with closed-form or
spectrally interpolated derivatives; everything downstream only ever needs
xi', xi'' (the curve itself is kept for display and sanity checks).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, NonClosableCurveError
from .fourier import spectral_antiderivative, trig_interp

UNIT_SPEED_TOL = 1e-10
CLOSURE_TOL = 1e-8
ACCEL_ORTHO_TOL = 1e-8


@dataclass
class CrossSection:
    """Sampled unit-speed closed curve on the circle of circumference one.

    Arrays hold values at t_i = i / n_samples and are indexed mod
    n_samples; first and second derivatives are stored explicitly so no
    numerical differentiation of the curve is ever needed.
    """

    n_samples: int
    xi1: np.ndarray
    xi2: np.ndarray
    dxi1: np.ndarray
    dxi2: np.ndarray
    ddxi1: np.ndarray
    ddxi2: np.ndarray
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        speed = self.dxi1**2 + self.dxi2**2
        if np.max(np.abs(speed - 1.0)) > UNIT_SPEED_TOL:
            raise InvalidArgumentError(
                "cross-section is not unit speed: max |xi'^2 - 1| = %.3e"
                % np.max(np.abs(speed - 1.0))
            )
        dot = self.dxi1 * self.ddxi1 + self.dxi2 * self.ddxi2
        if np.max(np.abs(dot)) > ACCEL_ORTHO_TOL:
            raise InvalidArgumentError(
                "xi' . xi'' does not vanish: max = %.3e" % np.max(np.abs(dot))
            )

    def closure_gap(self) -> float:
        """|xi(1) - xi(0)| reconstructed from the tangent samples."""
        g1 = np.mean(self.dxi1)
        g2 = np.mean(self.dxi2)
        return float(np.hypot(g1, g2))

    def tangent_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """(xi1'(t), xi2'(t)) by trigonometric interpolation."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (self._interp("dxi1", t), self._interp("dxi2", t))

    def tangent_dt_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """(xi1''(t), xi2''(t)) by trigonometric interpolation."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (self._interp("ddxi1", t), self._interp("ddxi2", t))

    def resample(self, n: int) -> "CrossSection":
        """Same curve on an n-point grid via trigonometric interpolation."""
        if n == self.n_samples:
            return self
        t = np.arange(n) / n
        return CrossSection(
            n_samples=n,
            xi1=self._interp("xi1", t),
            xi2=self._interp("xi2", t),
            dxi1=self._interp("dxi1", t),
            dxi2=self._interp("dxi2", t),
            ddxi1=self._interp("ddxi1", t),
            ddxi2=self._interp("ddxi2", t),
            description=self.description,
        )

    def _interp(self, name: str, t: np.ndarray) -> np.ndarray:
        return trig_interp(getattr(self, name), t)


class ProfileKind(Enum):
    SMOOTH = "smooth"
    BROKEN = "broken"


@dataclass(frozen=True)
class ReferenceProfile:
    """The longitudinal slope data f', g' (and second derivatives).

    Smooth profiles must supply f'', g'' analytically: the x-derivative of
    the metric enters quadratically sensitive terms, so numerical
    differentiation of user callables is deliberately unsupported.

    Broken profiles describe f == 0, g(x) = beta |x|; g'(0) is assigned 0
    (midpoint of +-beta).  All assembly grids stagger their evaluation
    points away from x = 0, so the convention never influences a result.
    """

    kind: ProfileKind
    fp: Callable[[np.ndarray], np.ndarray]
    gp: Callable[[np.ndarray], np.ndarray]
    fpp: Callable[[np.ndarray], np.ndarray]
    gpp: Callable[[np.ndarray], np.ndarray]
    beta1: float
    beta2: float
    beta: float = 0.0
    description: str = ""


def _const(c: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: np.full_like(np.asarray(x, dtype=float), c)


def flat_profile() -> ReferenceProfile:
    """f' = g' = 0: the flat cylinder R x C."""
    return ReferenceProfile(
        ProfileKind.SMOOTH, _const(0.0), _const(0.0), _const(0.0), _const(0.0),
        beta1=0.0, beta2=0.0, description="flat",
    )


def constant_slope_profile(beta1: float, beta2: float) -> ReferenceProfile:
    """f' == beta1, g' == beta2: the profile equal to its own asymptote."""
    return ReferenceProfile(
        ProfileKind.SMOOTH, _const(beta1), _const(beta2), _const(0.0), _const(0.0),
        beta1=beta1, beta2=beta2,
        description=f"constant_slope({beta1},{beta2})",
    )


def tanh_profile(beta1: float, beta2: float, width: float = 1.0) -> ReferenceProfile:
    """f'(x) = beta1 tanh(x/width), g'(x) = beta2 tanh(x/width).

    The two tails approach slopes of opposite sign, but the transverse
    operator only sees the squared combination (f' xi2' - g' xi1')^2 when
    the ratio f'/g' is fixed, so both infinities share one threshold.
    """
    if width <= 0:
        raise InvalidArgumentError("width must be positive")

    def fp(x):
        return beta1 * np.tanh(np.asarray(x, dtype=float) / width)

    def gp(x):
        return beta2 * np.tanh(np.asarray(x, dtype=float) / width)

    def fpp(x):
        return beta1 / width / np.cosh(np.asarray(x, dtype=float) / width) ** 2

    def gpp(x):
        return beta2 / width / np.cosh(np.asarray(x, dtype=float) / width) ** 2

    return ReferenceProfile(
        ProfileKind.SMOOTH, fp, gp, fpp, gpp, beta1=beta1, beta2=beta2,
        description=f"tanh({beta1},{beta2},w={width})",
    )


def tanh_bump_profile(beta1: float, bump: float, width: float = 1.0,
                      bump_width: float = 1.0, center: float = 0.0) -> ReferenceProfile:
    """f'(x) = beta1 tanh(x/width) + bump * exp(-((x-c)/bw)^2), g' = 0.

    One-parameter family used to engineer profiles with a prescribed
    integral of the effective potential (the Gaussian dies off fast enough
    not to move the asymptotic slopes).
    """

    def fp(x):
        x = np.asarray(x, dtype=float)
        return beta1 * np.tanh(x / width) + bump * np.exp(-((x - center) / bump_width) ** 2)

    def fpp(x):
        x = np.asarray(x, dtype=float)
        return (beta1 / width / np.cosh(x / width) ** 2
                - 2.0 * bump * (x - center) / bump_width**2
                * np.exp(-((x - center) / bump_width) ** 2))

    return ReferenceProfile(
        ProfileKind.SMOOTH, fp, _const(0.0), fpp, _const(0.0),
        beta1=beta1, beta2=0.0,
        description=f"tanh_bump({beta1},{bump},w={width},bw={bump_width},c={center})",
    )


def broken_profile(beta: float) -> ReferenceProfile:
    """f == 0, g(x) = beta |x| (corner at x = 0)."""
    if beta <= 0:
        raise InvalidArgumentError("broken profile requires beta > 0")

    def gp(x):
        return beta * np.sign(np.asarray(x, dtype=float))

    return ReferenceProfile(
        ProfileKind.BROKEN, _const(0.0), gp, _const(0.0), _const(0.0),
        beta1=0.0, beta2=beta, beta=beta,
        description=f"broken({beta})",
    )


@dataclass(frozen=True)
class MetricSample:
    """Induced metric at a single point (x, t)."""

    G11: float
    G12: float
    G22: float
    det: float
    h: float


def make_circle_cross_section(n_samples: int) -> CrossSection:
    """Circle of circumference one: xi(t) = (cos 2 pi t, sin 2 pi t) / (2 pi)."""
    if n_samples < 16:
        raise InvalidArgumentError("n_samples must be at least 16")
    t = np.arange(n_samples) / n_samples
    w = 2.0 * np.pi
    return CrossSection(
        n_samples=n_samples,
        xi1=np.cos(w * t) / w,
        xi2=np.sin(w * t) / w,
        dxi1=-np.sin(w * t),
        dxi2=np.cos(w * t),
        ddxi1=-w * np.cos(w * t),
        ddxi2=-w * np.sin(w * t),
        description="circle",
    )


def make_tangent_angle_cross_section(
    sin_coeffs: Sequence[float],
    n_samples: int,
    cos_coeffs: Optional[Sequence[float]] = None,
    max_newton_iter: int = 50,
) -> CrossSection:
    """Closed curve from a tangent angle phi(t) = 2 pi t + Fourier series.

    With xi' = (cos phi, sin phi) the curve is automatically unit speed and
    of length one; closure requires the two constraints

        int_0^1 cos phi dt = 0,   int_0^1 sin phi dt = 0,

    which are enforced by a damped Newton correction of the k = 1 Fourier
    pair (a1, b1) only.  Higher coefficients are taken verbatim, which is
    how asymmetric cross-sections (needed for a nonzero broken-case
    coupling constant) are produced, e.g. sin_coeffs = [0, 0.3].
    """
    if n_samples < 16:
        raise InvalidArgumentError("n_samples must be at least 16")
    n_coef = max(2, len(sin_coeffs) + 1,
                 1 + (len(cos_coeffs) if cos_coeffs is not None else 0))
    a = np.zeros(n_coef)
    b = np.zeros_like(a)
    a[1:1 + len(sin_coeffs)] = sin_coeffs
    if cos_coeffs is not None:
        b[1:1 + len(cos_coeffs)] = cos_coeffs

    # Work on a grid fine enough for the trapezoid closure integrals to be
    # spectrally converged even when the user grid is coarse.
    n_work = max(n_samples, 256)
    t = np.arange(n_work) / n_work
    k = np.arange(1, len(a))
    sin_kt = np.sin(2.0 * np.pi * np.outer(k, t))
    cos_kt = np.cos(2.0 * np.pi * np.outer(k, t))

    def angle(a1, b1):
        aa = a.copy()
        bb = b.copy()
        aa[1] = a1
        bb[1] = b1
        return 2.0 * np.pi * t + aa[1:] @ sin_kt + bb[1:] @ cos_kt

    a1, b1 = float(a[1]), float(b[1])
    converged = False
    for _ in range(max_newton_iter):
        phi = angle(a1, b1)
        c, s = np.cos(phi), np.sin(phi)
        res = np.array([np.mean(c), np.mean(s)])
        if np.hypot(*res) <= 1e-14:
            converged = True
            break
        jac = np.array([
            [-np.mean(s * sin_kt[0]), -np.mean(s * cos_kt[0])],
            [np.mean(c * sin_kt[0]), np.mean(c * cos_kt[0])],
        ])
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NonClosableCurveError("singular closure Jacobian") from exc
        damping = 1.0
        base = np.hypot(*res)
        while damping > 1e-6:
            phi_try = angle(a1 + damping * step[0], b1 + damping * step[1])
            res_try = np.hypot(np.mean(np.cos(phi_try)), np.mean(np.sin(phi_try)))
            if res_try < base:
                break
            damping *= 0.5
        a1 += damping * step[0]
        b1 += damping * step[1]
    else:
        converged = np.hypot(*res) <= CLOSURE_TOL
    if not converged and np.hypot(*np.array([np.mean(np.cos(angle(a1, b1))),
                                             np.mean(np.sin(angle(a1, b1)))])) > CLOSURE_TOL:
        raise NonClosableCurveError(
            "closure correction did not converge within %d iterations" % max_newton_iter
        )

    a[1], b[1] = a1, b1
    ts = np.arange(n_samples) / n_samples
    kk = np.arange(1, len(a))
    phi = (2.0 * np.pi * ts
           + a[1:] @ np.sin(2.0 * np.pi * np.outer(kk, ts))
           + b[1:] @ np.cos(2.0 * np.pi * np.outer(kk, ts)))
    dphi = (2.0 * np.pi
            + (a[1:] * 2.0 * np.pi * kk) @ np.cos(2.0 * np.pi * np.outer(kk, ts))
            - (b[1:] * 2.0 * np.pi * kk) @ np.sin(2.0 * np.pi * np.outer(kk, ts)))
    dxi1, dxi2 = np.cos(phi), np.sin(phi)
    # Spectral antiderivative keeps the reconstructed curve at the same
    # accuracy as the tangent data; the curve is centered at its mean.
    xi1 = spectral_antiderivative(dxi1)
    xi2 = spectral_antiderivative(dxi2)
    xi1 -= np.mean(xi1)
    xi2 -= np.mean(xi2)
    return CrossSection(
        n_samples=n_samples,
        xi1=xi1, xi2=xi2,
        dxi1=dxi1, dxi2=dxi2,
        ddxi1=-dphi * dxi2, ddxi2=dphi * dxi1,
        description="tangent_angle(a=%s, b=%s)" % (a[1:].tolist(), b[1:].tolist()),
    )


def metric_at(cs: CrossSection, profile: ReferenceProfile, x: float, t: float) -> MetricSample:
    """Induced metric G, det G and h = sqrt(det G) at one point."""
    d1, d2 = cs.tangent_at(t % 1.0)
    fp = float(profile.fp(np.asarray(x, dtype=float)))
    gp = float(profile.gp(np.asarray(x, dtype=float)))
    u = fp * float(d2[0]) - gp * float(d1[0])
    det = 1.0 + u * u
    return MetricSample(
        G11=1.0 + fp * fp + gp * gp,
        G12=fp * float(d1[0]) + gp * float(d2[0]),
        G22=1.0,
        det=det,
        h=float(np.sqrt(det)),
    )


def h_squared_derivatives(cs: CrossSection, profile: ReferenceProfile,
                          x: float, t: float) -> tuple[float, float, float]:
    """(h^2, d/dt h^2, d/dx h^2) at one point.

    With u = f' xi2' - g' xi1' these are h^2 = 1 + u^2,
    dt h^2 = 2u (f' xi2'' - g' xi1'') and dx h^2 = 2u (f'' xi2' - g'' xi1').
    For broken profiles f'' = g'' = 0 away from the corner, so the
    x-derivative vanishes identically (and the x = 0 convention g'(0) = 0
    is used if the corner is queried).
    """
    tm = t % 1.0
    d1, d2 = cs.tangent_at(tm)
    dd1, dd2 = cs.tangent_dt_at(tm)
    xa = np.asarray(x, dtype=float)
    fp, gp = float(profile.fp(xa)), float(profile.gp(xa))
    fpp, gpp = float(profile.fpp(xa)), float(profile.gpp(xa))
    u = fp * float(d2[0]) - gp * float(d1[0])
    h2 = 1.0 + u * u
    dt_h2 = 2.0 * u * (fp * float(dd2[0]) - gp * float(dd1[0]))
    dx_h2 = 2.0 * u * (fpp * float(d2[0]) - gpp * float(d1[0]))
    return h2, dt_h2, dx_h2


def reflection_symmetry_defect(cs: CrossSection) -> float:
    """How far the cross-section is from having a mirror axis.

    A closed unit-speed curve has a mirror symmetry (about an axis of
    any direction) exactly when its tangent angle satisfies
    phi(c - t) + phi(t) = const for some reversal center c; in terms of
    the complex tangent z = xi1' + i xi2' this says z(c - t) z(t) is a
    constant of modulus one.  The defect reported here is the worst
    deviation of that product from its mean, minimized over the half
    grid of candidate centers.  Mirror-symmetric curves score ~0 in any
    starting parametrization; genuinely asymmetric ones score O(1).
    """
    n = cs.n_samples
    t = np.arange(n) / n
    z = cs.dxi1 + 1j * cs.dxi2
    best = np.inf
    for j in range(2 * n):
        c = j / (2 * n)
        tr = (c - t) % 1.0
        d1r, d2r = cs.tangent_at(tr)
        w = (d1r + 1j * d2r) * z
        best = min(best, float(np.max(np.abs(w - np.mean(w)))))
    return float(best)
