"""The analytic first-return family on the cylinder cross-section.

Four variants are provided:

* ``full``    -- the three-passage composition at leading order in the
  forcing amplitude, phase coordinate modulo ``pi/omega``;
* ``case12``  -- the low-frequency reduction (saddle value moderate or
  large), phase modulo 1;
* ``case34``  -- the high-frequency reduction, a pure circle-map family;
* ``rescaled``-- the ``case12`` family after blowing up the leading
  coordinate by ``gamma**(-1/delta)``, the form whose singular limit is a
  circle map.

Second-order terms in the forcing amplitude are dropped exactly where the
derivations drop them; each map's docstring names the dropped order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NumericsError, ValidationError
from .params import ModelParams, derive_constants

__all__ = [
    "CylinderPoint",
    "KernelValues",
    "VARIANTS",
    "eta_omega",
    "kernels",
    "full_map",
    "case12_map",
    "case34_map",
    "rescaled_map",
    "rescaled_apply",
    "jacobian",
    "finite_difference_jacobian",
    "map_lift",
    "reduce_mod",
]

VARIANTS = ("full", "case12", "case34", "rescaled")

MOD_PI_OVER_OMEGA = "pi_over_omega"
MOD_ONE = "one"


@dataclass(frozen=True)
class CylinderPoint:
    """Point (x, s) on the return-map cylinder.

    ``modulus`` records the phase convention: ``"pi_over_omega"`` for the
    full map, ``"one"`` for the reduced families.
    """

    x: float
    s: float
    modulus: str = MOD_ONE

    def __post_init__(self):
        if self.modulus not in (MOD_PI_OVER_OMEGA, MOD_ONE):
            raise ValidationError(f"unknown modulus tag {self.modulus!r}")


@dataclass(frozen=True)
class KernelValues:
    eta: float
    L1: float
    L2: float
    G1: float
    G2: float
    T1: float
    T2: float
    T3: float


def reduce_mod(value: float, modulus: float) -> float:
    """Floor-based reduction to [0, modulus); exact ties map to 0."""
    return value - modulus * math.floor(value / modulus)


def eta_omega(s: float, params: ModelParams) -> float:
    """Frequency-dependent mean of the forcing kernel; lies between
    ``2 omega^2/(e^2+4 omega^2)`` and ``(e^2+2 omega^2)/(e^2+4 omega^2)``."""
    e, om = params.e, params.omega
    return (e * e * math.cos(om * s) ** 2 + 2.0 * om * om) / (e * e + 4.0 * om * om)


def _l2_closed_form(x, s, params, dc):
    """Exact evaluation of the contracting-passage kernel integral.

    Antiderivative of ``exp(-e(tau-s)) sin^2(omega tau)`` between the
    section time ``s`` and the first exit time ``T1 = s - ln(x)/e``.  The
    widely quoted truncation keeps only the x-independent part (and halves
    the quadrature coefficient of the sine term); the boundary terms decay
    like ``x`` and are kept here so the closed form matches quadrature at
    full precision.
    """
    e, om = params.e, params.omega
    t1 = s - math.log(x) / e
    main = (eta_omega(s, params) - dc.a2 * math.cos(2.0 * om * s)
            + 0.5 * dc.b2 * math.sin(2.0 * om * s)) / e
    bdry = -(x / (2.0 * e)) * (1.0 - dc.a2 * math.cos(2.0 * om * t1)
                               + dc.b2 * math.sin(2.0 * om * t1))
    return main + bdry


def _quad_checked(fun, a, b, tol=1e-10):
    val, err = quad(fun, a, b, epsabs=1e-12, epsrel=tol, limit=800)
    if err > tol * max(1.0, abs(val)) + 1e-12:
        raise NumericsError(
            f"kernel quadrature did not converge: estimate {val}, error {err}"
        )
    return val


def kernels(point: CylinderPoint, params: ModelParams) -> KernelValues:
    """Arrival times and forcing kernels of the three-passage composition.

    ``L2`` uses the exact closed form (checked elsewhere against an
    independent quadrature); ``L1``, ``G1``, ``G2`` are evaluated by
    adaptive quadrature of their defining integrals with the forcing
    profile ``sin^2(omega tau)``.  The exponentially weighted integrals are
    evaluated in shifted form (weight anchored at the upper limit) so they
    never overflow; this is an algebraic identity, not an approximation.
    """
    x, s = point.x, point.s
    if x <= 0.0:
        raise ValidationError(f"kernels need x > 0, got {x}")
    if params.gamma < 0.0:
        raise ValidationError("gamma must be >= 0")
    dc = derive_constants(params)
    c, e, om, gam = params.c, params.e, params.omega, params.gamma
    d1, d2, d3 = params.Delta1, params.Delta2, params.Delta3
    lx = math.log(x)

    t1 = s - lx / e
    t2 = s + d1 - (e + c) / (e * e) * lx
    l2 = _l2_closed_form(x, s, params, dc)
    t3 = s + d1 + d2 - dc.xi * lx - gam * dc.xi * l2 / x

    # second-passage kernel, weight rewritten as exp(c (tau - T3(0)))
    t3_0 = s + d1 + d2 - dc.xi * lx
    lo = t2 + d3
    if lo >= t3_0:
        l1 = 0.0
    else:
        l1 = _quad_checked(
            lambda tau: math.exp(c * (tau - t3_0)) * math.sin(om * tau) ** 2,
            lo, t3_0,
        )

    period = math.pi / om
    # periodic averages seen from the arrival time, weights anchored at the
    # finite end so the prefactors stay bounded
    g1 = _quad_checked(
        lambda tau: math.exp(c * (tau - period)) * math.sin(om * (t3 + tau)) ** 2,
        0.0, period,
    ) / (1.0 - math.exp(-c * period))
    g2 = _quad_checked(
        lambda tau: math.exp(-e * tau) * math.sin(om * (t3 + d3 + tau)) ** 2,
        0.0, period,
    ) / (math.exp(-e * period) - 1.0)

    return KernelValues(eta=eta_omega(s, params), L1=l1, L2=l2,
                        G1=g1, G2=g2, T1=t1, T2=t2, T3=t3)


def _osc(u, a, b, om):
    return -a * math.cos(2.0 * om * u) - b * math.sin(2.0 * om * u)


def _full(x, s, params, dc, phase):
    c, e, om, gam = params.c, params.e, params.omega, params.gamma
    w = (eta_omega(s, params) - dc.a2 * math.cos(2.0 * om * s)
         + dc.b2 * math.sin(2.0 * om * s))
    f2 = s + params.mu3 - dc.xi * math.log(x)
    if gam:
        f2 -= gam * dc.xi * w / (e * x)
    if phase == "entry":
        phi = u4 = u5 = s
    else:
        phi = s + params.mu3 - dc.xi * math.log(x)
        u4 = f2 - params.Delta3
        u5 = f2
    f1 = params.mu * x**dc.delta + gam * (
        params.mu1
        + params.mu2 * _osc(phi, dc.a1, dc.b1, om)
        - params.mu4 * _osc(u4, dc.a1, dc.b1, om)
        - params.mu5 * _osc(u5, dc.a2, dc.b2, om)
    )
    return f1, f2


def full_map(point: CylinderPoint, params: ModelParams,
             phase: str = "composed") -> CylinderPoint:
    """Leading-order three-passage return map, phase modulo ``pi/omega``.

    Terms of second order in ``gamma`` are dropped.  ``phase="composed"``
    evaluates the forcing oscillations at the composed arrival times;
    ``phase="entry"`` evaluates them all at the section entry time (the
    simplification the reduced families build on) and exists mainly so the
    low-frequency degeneration onto :func:`case12_map` can be checked
    exactly.
    """
    if point.x <= 0.0:
        raise ValidationError(f"full_map needs x > 0, got {point.x}")
    if phase not in ("composed", "entry"):
        raise ValidationError(f"unknown phase convention {phase!r}")
    dc = derive_constants(params)
    f1, f2 = _full(point.x, point.s, params, dc, phase)
    return CylinderPoint(f1, reduce_mod(f2, math.pi / params.omega),
                         MOD_PI_OVER_OMEGA)


def _case12(x, s, params, dc):
    gam = params.gamma
    f1 = x**dc.delta + gam * params.mu1 * (1.0 - dc.sqrt_a1 * math.cos(2.0 * math.pi * s))
    if f1 <= 0.0:
        raise NumericsError(f"leading coordinate fell to {f1} <= 0")
    f2 = s + params.mu3 * params.omega / math.pi \
        - dc.xi * params.omega / math.pi * math.log(f1)
    return f1, f2


def case12_map(point: CylinderPoint, params: ModelParams) -> CylinderPoint:
    """Low-frequency return map, phase modulo 1.

    The remainder of first order in ``gamma`` in the phase component is
    dropped.  Positivity of the image coordinate is guaranteed for
    ``gamma > 0`` since ``sqrt(a1) < 1``.
    """
    if point.x <= 0.0:
        raise ValidationError(f"case12_map needs x > 0, got {point.x}")
    dc = derive_constants(params)
    f1, f2 = _case12(point.x, point.s, params, dc)
    return CylinderPoint(f1, reduce_mod(f2, 1.0), MOD_ONE)


def _case34(s, params, dc):
    gam, mu1 = params.gamma, params.mu1
    f1 = gam * mu1
    f2 = (s + params.mu3 * params.omega / math.pi
          - dc.xi * params.omega / math.pi * math.log(gam * mu1)
          - dc.xi * params.omega / (2.0 * params.e * math.pi * mu1)
          + dc.xi / (2.0 * math.pi * mu1) * math.sin(2.0 * math.pi * s))
    return f1, f2


def case34_map(point: CylinderPoint, params: ModelParams) -> CylinderPoint:
    """High-frequency return map: constant leading coordinate, circle map in s.

    The input ``x`` is ignored by construction.  Requires ``gamma > 0`` and
    ``mu1 > 0`` (the phase update takes a log of their product).
    """
    if params.gamma <= 0.0:
        raise ValidationError("case34_map requires gamma > 0")
    if params.mu1 <= 0.0:
        raise ValidationError("case34_map requires mu1 > 0")
    dc = derive_constants(params)
    f1, f2 = _case34(point.s, params, dc)
    return CylinderPoint(f1, reduce_mod(f2, 1.0), MOD_ONE)


def _rescaled(x, s, gamma, params, dc):
    if gamma <= 0.0 or gamma >= 1.0:
        raise ValidationError(f"rescaled family needs gamma in (0, 1), got {gamma}")
    shape = x**dc.delta + 1.0 - dc.sqrt_a1 * math.cos(2.0 * math.pi * s)
    f1 = gamma**dc.p * shape
    f2 = (s + params.mu3 * params.omega / math.pi
          + dc.K_omega * dc.xi * math.log(1.0 / gamma)
          - dc.xi * params.omega / math.pi * math.log(shape))
    return f1, f2


def rescaled_apply(x: float, s: float, gamma: float,
                   params: ModelParams) -> tuple[float, float]:
    """Rescaled family at an explicit amplitude, returning the phase lift."""
    if x < 0.0:
        raise ValidationError(f"rescaled family needs x >= 0, got {x}")
    dc = derive_constants(params)
    return _rescaled(x, s, gamma, params, dc)


def rescaled_map(point: CylinderPoint, n: int, a: float,
                 params: ModelParams) -> CylinderPoint:
    """Rescaled return map at the amplitude indexed by ``(n, a)``.

    The amplitude is the n-th member of the phase-locked sequence with
    offset ``a``, so the phase update carries the constant ``a`` modulo 1
    and the map degenerates to the singular-limit circle map at ``x = 0``.
    """
    from .singular import gamma_sequence
    if point.x < 0.0:
        raise ValidationError(f"rescaled_map needs x >= 0, got {point.x}")
    dc = derive_constants(params)
    gamma = gamma_sequence(n, a, dc)
    f1, f2 = _rescaled(point.x, point.s, gamma, params, dc)
    return CylinderPoint(f1, reduce_mod(f2, 1.0), MOD_ONE)


def map_lift(variant: str, x: float, s: float, params: ModelParams,
             n: int | None = None, a: float | None = None,
             gamma: float | None = None) -> tuple[float, float]:
    """Evaluate a variant without reducing the phase (for derivatives/orbits)."""
    dc = derive_constants(params)
    if variant == "full":
        return _full(x, s, params, dc, "composed")
    if variant == "case12":
        return _case12(x, s, params, dc)
    if variant == "case34":
        return _case34(s, params, dc)
    if variant == "rescaled":
        if gamma is None:
            from .singular import gamma_sequence
            if n is None or a is None:
                raise ValidationError("rescaled variant needs (n, a) or gamma")
            gamma = gamma_sequence(n, a, dc)
        return _rescaled(x, s, gamma, params, dc)
    raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def jacobian(point: CylinderPoint, variant: str, params: ModelParams,
             n: int | None = None, a: float | None = None,
             gamma: float | None = None):
    """Analytic Jacobian of a variant at a point.

    Returns ``(J, det, det_closed_form)``.  The closed form of the
    determinant exists for the reduced families: ``delta x**(delta-1)``
    for ``case12`` and ``gamma**p delta x**(delta-1)`` for ``rescaled``
    (the phase coupling cancels exactly); ``case34`` is rank-one
    degenerate with determinant 0, reported rather than raised.  The full
    variant has no closed form and ``det_closed_form`` is None.
    """
    x, s = point.x, point.s
    dc = derive_constants(params)
    om = params.omega
    two_pi_s = 2.0 * math.pi * s
    if variant == "case12":
        if x <= 0.0:
            raise ValidationError("jacobian needs x > 0 for case12")
        gam = params.gamma
        B = x**dc.delta + gam * params.mu1 * (1.0 - dc.sqrt_a1 * math.cos(two_pi_s))
        d11 = dc.delta * x ** (dc.delta - 1.0)
        d12 = 2.0 * math.pi * gam * params.mu1 * dc.sqrt_a1 * math.sin(two_pi_s)
        d21 = -(dc.xi * om / math.pi) * d11 / B
        d22 = 1.0 - (dc.xi * om / math.pi) * d12 / B
        J = np.array([[d11, d12], [d21, d22]])
        return J, float(d11 * d22 - d12 * d21), d11
    if variant == "rescaled":
        if x <= 0.0:
            raise ValidationError("jacobian needs x > 0 for rescaled")
        if gamma is None:
            from .singular import gamma_sequence
            if n is None or a is None:
                raise ValidationError("rescaled variant needs (n, a) or gamma")
            gamma = gamma_sequence(n, a, dc)
        gp = gamma**dc.p
        A = x**dc.delta + 1.0 - dc.sqrt_a1 * math.cos(two_pi_s)
        d11 = gp * dc.delta * x ** (dc.delta - 1.0)
        d12 = gp * 2.0 * math.pi * dc.sqrt_a1 * math.sin(two_pi_s)
        d21 = -(dc.xi * om / math.pi) * dc.delta * x ** (dc.delta - 1.0) / A
        d22 = 1.0 - (dc.xi * om / math.pi) * 2.0 * math.pi * dc.sqrt_a1 \
            * math.sin(two_pi_s) / A
        J = np.array([[d11, d12], [d21, d22]])
        det_cf = gp * dc.delta * x ** (dc.delta - 1.0)
        return J, float(d11 * d22 - d12 * d21), det_cf
    if variant == "case34":
        d22 = 1.0 + dc.xi / params.mu1 * math.cos(two_pi_s)
        J = np.array([[0.0, 0.0], [0.0, d22]])
        return J, 0.0, 0.0
    if variant == "full":
        if x <= 0.0:
            raise ValidationError("jacobian needs x > 0 for full")
        return _full_jacobian(x, s, params, dc)
    raise ValidationError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def _full_jacobian(x, s, params, dc):
    c, e, om, gam = params.c, params.e, params.omega, params.gamma
    a2, b2 = dc.a2, dc.b2
    W = (eta_omega(s, params) - a2 * math.cos(2.0 * om * s)
         + b2 * math.sin(2.0 * om * s))
    Wp = om * a2 * math.sin(2.0 * om * s) + 2.0 * om * b2 * math.cos(2.0 * om * s)
    f2 = s + params.mu3 - dc.xi * math.log(x) - gam * dc.xi * W / (e * x)
    f2x = -dc.xi / x + gam * dc.xi * W / (e * x * x)
    f2s = 1.0 - gam * dc.xi * Wp / (e * x)
    phi = s + params.mu3 - dc.xi * math.log(x)
    phix = -dc.xi / x

    def oscp(u, aj, bj):
        return 2.0 * om * aj * math.sin(2.0 * om * u) \
            - 2.0 * om * bj * math.cos(2.0 * om * u)

    p2 = oscp(phi, dc.a1, dc.b1)
    p4 = oscp(f2 - params.Delta3, dc.a1, dc.b1)
    p5 = oscp(f2, a2, b2)
    d11 = params.mu * dc.delta * x ** (dc.delta - 1.0) + gam * (
        params.mu2 * p2 * phix - params.mu4 * p4 * f2x - params.mu5 * p5 * f2x)
    d12 = gam * (params.mu2 * p2 - params.mu4 * p4 * f2s - params.mu5 * p5 * f2s)
    J = np.array([[d11, d12], [f2x, f2s]])
    return J, float(d11 * f2s - d12 * f2x), None


def finite_difference_jacobian(variant: str, x: float, s: float,
                               params: ModelParams, n: int | None = None,
                               a: float | None = None,
                               gamma: float | None = None,
                               rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a variant's phase lift (test oracle)."""
    hx = rel_step * max(abs(x), 1.0)
    hs = rel_step

    def f(xx, ss):
        return np.array(map_lift(variant, xx, ss, params, n=n, a=a, gamma=gamma))

    col_x = (f(x + hx, s) - f(x - hx, s)) / (2.0 * hx)
    col_s = (f(x, s + hs) - f(x, s - hs)) / (2.0 * hs)
    return np.column_stack([col_x, col_s])
