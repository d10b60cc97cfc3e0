"""Effective-potential pipeline: the profile functions A..D, E and V.

For a smooth profile the one-dimensional quantities

    A(x) = int 1/h^2 |chi|^2 dt
    B(x) = int [ b dt_h2 / (2 h^4) + d/dt(b / h^2) - dx_h2 / (2 h^4) ] |chi|^2 dt
    C(x) = int [ (dx_h2 / (4 h^3))^2 - d/dt(b dx_h2 / (4 h^4))
                 - b dx_h2 dt_h2 / (8 h^6) ] |chi|^2 dt
    D(x) = int [ |chi'|^2 / h^2
                 + ( d/dt(dt_h2 / (4 h^4)) + (dt_h2 / (4 h^3))^2 ) |chi|^2 ] dt

with b = f' xi1' + g' xi2', plus the constant E (same integrand as D but
with the asymptotic metric), combine into the effective potential

    V(x) = C(x) + (1 + f'^2 + g'^2) D(x) - (1 + beta1^2 + beta2^2) E.

All t-quadratures are periodic trapezoid sums (spectrally accurate); all
outer d/dt(...) factors are differentiated spectrally, never by nested
finite differences.  chi comes from the pseudospectral transverse solve so
that its own discretization error does not dominate the quadratures.

The broken waveguide has the two constants

    A = int |chi1|^2 / h_b^2 dt,
    B = int [ (xi2'/h_b^2)' + xi2' (h_b^2)' / (2 h_b^4) ] |chi1|^2 dt.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .errors import DomainTooSmallError, InvalidArgumentError, WrongProfileKindError
from .fourier import spectral_derivative
from .geometry import CrossSection, ProfileKind, ReferenceProfile
from .transverse import TransverseOperatorSpec, transverse_eigs


@dataclass
class EffectivePotentialProfile:
    """Sampled A(x)..D(x), V(x) and the constant E on an x-grid."""

    x_grid: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    V: np.ndarray
    E_const: float
    quadrature_error: float
    beta1: float
    beta2: float
    E1: float


@dataclass(frozen=True)
class BrokenConstants:
    """The two broken-waveguide coupling constants (A > 0 always)."""

    A_const: float
    B_const: float
    beta: float
    quadrature_error: float
    E1: float


class Verdict(Enum):
    NEGATIVE_INT_V = "NegativeIntV"
    ZERO_INT_V_B_NONCONSTANT = "ZeroIntV_BNonconstant"
    BROKEN_B_NONZERO = "Broken_BNonzero"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PotentialClassification:
    verdict: Verdict
    int_V: float
    B_variation: float
    details: str


def _profile_terms(cs: CrossSection, chi: np.ndarray, fp: np.ndarray, gp: np.ndarray,
                   fpp: np.ndarray, gpp: np.ndarray):
    """A..D arrays for slope values fp.. (one entry per x) on chi's t-grid.

    Returns arrays shaped like fp.  All (n_x, n_t) intermediates are built
    by broadcasting scalars-in-x against the periodic t data.
    """
    n_t = len(chi)
    t = np.arange(n_t) / n_t
    d1, d2 = cs.tangent_at(t)
    dd1, dd2 = cs.tangent_dt_at(t)
    chi2 = chi**2
    dchi = spectral_derivative(chi)

    fp = np.asarray(fp, dtype=float)[:, None]
    gp = np.asarray(gp, dtype=float)[:, None]
    fpp = np.asarray(fpp, dtype=float)[:, None]
    gpp = np.asarray(gpp, dtype=float)[:, None]

    u = fp * d2 - gp * d1
    h2 = 1.0 + u * u
    dt_h2 = 2.0 * u * (fp * dd2 - gp * dd1)
    dx_h2 = 2.0 * u * (fpp * d2 - gpp * d1)
    b = fp * d1 + gp * d2

    def ddt(rows):
        return np.apply_along_axis(spectral_derivative, -1, rows)

    def quad(rows):
        return rows.mean(axis=-1)  # periodic trapezoid

    a_fun = quad(chi2 / h2)
    b_fun = quad((b * dt_h2 / (2.0 * h2**2) + ddt(b / h2) - dx_h2 / (2.0 * h2**2)) * chi2)
    c_fun = quad(((dx_h2 / (4.0 * h2**1.5)) ** 2
                  - ddt(b * dx_h2 / (4.0 * h2**2))
                  - b * dx_h2 * dt_h2 / (8.0 * h2**3)) * chi2)
    d_fun = quad(dchi**2 / h2
                 + (ddt(dt_h2 / (4.0 * h2**2)) + (dt_h2 / (4.0 * h2**1.5)) ** 2) * chi2)
    return a_fun, b_fun, c_fun, d_fun


def _e_constant(cs: CrossSection, chi: np.ndarray, beta1: float, beta2: float) -> float:
    """The constant E (the D-integrand evaluated in the asymptotic metric)."""
    n_t = len(chi)
    t = np.arange(n_t) / n_t
    d1, d2 = cs.tangent_at(t)
    dd1, dd2 = cs.tangent_dt_at(t)
    u = beta1 * d2 - beta2 * d1
    h2 = 1.0 + u * u
    dt_h2 = 2.0 * u * (beta1 * dd2 - beta2 * dd1)
    dchi = spectral_derivative(chi)
    integrand = (dchi**2 / h2
                 + (spectral_derivative(dt_h2 / (4.0 * h2**2))
                    + (dt_h2 / (4.0 * h2**1.5)) ** 2) * chi**2)
    return float(np.mean(integrand))


def compute_profile(cs: CrossSection, profile: ReferenceProfile,
                    x_grid: np.ndarray, n_t: int) -> EffectivePotentialProfile:
    """Evaluate A..D, E and V on an x-grid for a smooth profile."""
    if profile.kind is not ProfileKind.SMOOTH:
        raise WrongProfileKindError(
            "compute_profile requires a smooth profile; use compute_broken_constants"
        )
    x_grid = np.asarray(x_grid, dtype=float)
    n_t = n_t | 1  # spectral path needs an odd grid (Nyquist null mode)
    spec = TransverseOperatorSpec(cs, profile.beta1, profile.beta2, n_t)
    ts = transverse_eigs(spec, k=2, method="spectral")
    chi = ts.chi
    e1 = float(ts.eigenvalues[0])

    fp, gp = profile.fp(x_grid), profile.gp(x_grid)
    fpp, gpp = profile.fpp(x_grid), profile.gpp(x_grid)
    s = 1.0 + profile.beta1**2 + profile.beta2**2

    def build(chi_arr):
        a, b, c, d = _profile_terms(cs, chi_arr, fp, gp, fpp, gpp)
        e = _e_constant(cs, chi_arr, profile.beta1, profile.beta2)
        v = c + (1.0 + fp**2 + gp**2) * d - s * e
        return a, b, c, d, e, v

    a, b, c, d, e, v = build(chi)
    # Quadrature error from the half-resolution t-grid (same chi family).
    ts_half = transverse_eigs(
        TransverseOperatorSpec(cs, profile.beta1, profile.beta2, (n_t // 2) | 1),
        k=2, method="spectral")
    _, b_h, c_h, d_h, e_h, v_h = build(ts_half.chi)
    qerr = float(max(np.max(np.abs(v - v_h)), np.max(np.abs(b - b_h)), abs(e - e_h)))
    return EffectivePotentialProfile(
        x_grid=x_grid, A=a, B=b, C=c, D=d, V=v, E_const=e,
        quadrature_error=max(qerr, 1e-15),
        beta1=profile.beta1, beta2=profile.beta2, E1=e1,
    )


def integral_V(epp: EffectivePotentialProfile) -> tuple[float, float]:
    """Composite-Simpson integral of V with a grid-halving error estimate.

    The x-grid must be wide enough that V has decayed at both ends
    (|V| <= 1e-8 max|V|); otherwise the integral would silently miss tail
    mass and the error name the offending end.
    """
    v, x = epp.V, epp.x_grid
    scale = max(np.max(np.abs(v)), 1e-300)
    for end, name in ((v[0], "left"), (v[-1], "right")):
        if abs(end) > 1e-8 * scale:
            raise DomainTooSmallError(
                f"V has not decayed at the {name} end of the x-grid "
                f"(|V|={abs(end):.3e}, scale={scale:.3e})"
            )
    if len(x) % 2 == 0 or len(x) < 5:
        raise InvalidArgumentError("x_grid needs an odd number (>=5) of points")
    full = float(simpson(v, x=x))
    half = float(simpson(v[::2], x=x[::2]))
    span = float(x[-1] - x[0])
    err = max(abs(full - half) / 15.0, epp.quadrature_error * span)
    return full, err


def compute_broken_constants(cs: CrossSection, beta: float, n_t: int) -> BrokenConstants:
    """The broken-case constants from the (0, beta) transverse ground state."""
    if beta <= 0:
        raise InvalidArgumentError("beta must be positive")

    def build(n):
        n = n | 1  # spectral path needs an odd grid
        ts = transverse_eigs(TransverseOperatorSpec(cs, 0.0, beta, n),
                             k=2, method="spectral")
        chi1 = ts.chi
        t = np.arange(n) / n
        d1, d2 = cs.tangent_at(t)
        hb2 = 1.0 + beta**2 * d1**2
        dt_hb2 = spectral_derivative(hb2)
        a_const = float(np.mean(chi1**2 / hb2))
        b_integrand = (spectral_derivative(d2 / hb2)
                       + d2 * dt_hb2 / (2.0 * hb2**2)) * chi1**2
        return a_const, float(np.mean(b_integrand)), float(ts.eigenvalues[0])

    a_full, b_full, e1 = build(n_t)
    a_half, b_half, _ = build(n_t // 2)
    qerr = max(abs(a_full - a_half), abs(b_full - b_half), 1e-15)
    return BrokenConstants(A_const=a_full, B_const=b_full, beta=beta,
                           quadrature_error=qerr, E1=e1)


def classify(epp: Optional[EffectivePotentialProfile] = None,
             broken: Optional[BrokenConstants] = None) -> PotentialClassification:
    """Decide which discrete-spectrum criterion (if any) is satisfied.

    A hypothesis is accepted only when the signal exceeds a small multiple
    of the estimated numerical error (3x for the integral test, 10x for the
    coupling constants), so noise never produces a positive verdict.
    """
    if (epp is None) == (broken is None):
        raise InvalidArgumentError("pass exactly one of epp, broken")
    if broken is not None:
        if abs(broken.B_const) > 10.0 * broken.quadrature_error:
            return PotentialClassification(
                Verdict.BROKEN_B_NONZERO, int_V=float("nan"),
                B_variation=abs(broken.B_const),
                details=f"broken coupling constant B={broken.B_const:.6e} "
                        f"exceeds 10x quadrature error",
            )
        return PotentialClassification(
            Verdict.INCONCLUSIVE, int_V=float("nan"),
            B_variation=abs(broken.B_const),
            details="B vanishes within quadrature error "
                    "(for mirror-symmetric cross-sections this is exact)",
        )
    int_v, err = integral_V(epp)
    b_var = float(np.max(epp.B) - np.min(epp.B))
    if int_v < -3.0 * err:
        return PotentialClassification(
            Verdict.NEGATIVE_INT_V, int_V=int_v, B_variation=b_var,
            details=f"int V = {int_v:.6e} < -3 x {err:.1e}",
        )
    if abs(int_v) <= 3.0 * err and b_var > 10.0 * epp.quadrature_error:
        return PotentialClassification(
            Verdict.ZERO_INT_V_B_NONCONSTANT, int_V=int_v, B_variation=b_var,
            details=f"int V = {int_v:.3e} ~ 0, B varies by {b_var:.6e}",
        )
    return PotentialClassification(
        Verdict.INCONCLUSIVE, int_V=int_v, B_variation=b_var,
        details=f"int V = {int_v:.6e} (>= 0 within tolerance) "
                f"and/or B variation {b_var:.3e} below threshold",
    )
