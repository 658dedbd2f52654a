"""Eavesdropping analyses for the COW protocol.

Two attacks are quantified per channel length. In the passive
beam-splitting attack Eve diverts the full loss budget, stores the
diverted states and decodes them collectively at the Holevo bound. In the
active variant she measures each diverted pulse immediately with a
threshold detector, blocks part of her inconclusive pulses within the
loss budget, and forwards the rest over a lossless line at a raised
intensity so that Bob's expected click rate is unchanged.

Both analyses report Eve's information per sifted bit and the critical
QBER at which her information matches Bob's, the point where no secret
key can be distilled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .core import (
    ProtocolParams,
    attenuate,
    binary_entropy_inverse,
    channel_point,
    coherent_pair_overlap,
    holevo_two_pure,
)

__all__ = [
    "BEAM_SPLITTING",
    "ACTIVE_BEAM_SPLITTING",
    "FULLY_INSECURE_TOL",
    "ActiveAttackPlan",
    "AttackReport",
    "OptimalIntensity",
    "bs_attack",
    "active_plan",
    "active_eve_info",
    "optimal_mu_e",
    "critical_length",
    "active_attack",
    "fully_insecure_length",
    "key_rate_margin",
    "optimal_source_intensity",
]

BEAM_SPLITTING = "beam_splitting"
ACTIVE_BEAM_SPLITTING = "active_beam_splitting"

# Eve's information is treated as unity (no added errors needed) above this.
FULLY_INSECURE_TOL = 1e-12

# Source-intensity search range and coarse-grid resolution. COW runs deep
# in the mu < 1 regime and the key-rate margin decays for bright sources,
# so (0, 2] brackets every practically relevant optimum.
MU_SEARCH_MAX = 2.0
MU_SEARCH_GRID = 2000


@dataclass(frozen=True)
class ActiveAttackPlan:
    """Eve's parameter choice for the active beam-splitting attack.

    mu_e is the diverted intensity, mu_b_prime the intensity forwarded to
    Bob over the lossless line. block_fraction is the share of all sent
    pulses Eve suppresses, capped at her inconclusive probability on
    information states; block_fraction_raw keeps the uncapped value of
    the intensity-budget balance for diagnostics.
    """

    mu_e: float
    mu_b_prime: float
    block_fraction: float
    block_fraction_raw: float
    p_conc_inf: float
    p_conc_cont: float
    p_conc_total: float


@dataclass(frozen=True)
class AttackReport:
    """Outcome of one attack analysis at one channel point."""

    attack_kind: str
    i_ae: float
    qber_critical: float
    fully_insecure: bool
    plan: Optional[ActiveAttackPlan] = None


class OptimalIntensity(NamedTuple):
    """Result of the legitimate users' source-intensity optimisation."""

    mu: float
    margin: float
    degenerate: bool  # True when no intensity in the search range yields a positive margin


def bs_attack(params: ProtocolParams, length_km: float) -> AttackReport:
    """Passive beam-splitting attack with collective decoding.

    Eve diverts the whole loss budget mu_e_max and is bounded by the
    Holevo quantity of her two single-slot coherent states. Her
    information stays below one bit at any finite length, so the critical
    QBER never reaches zero.
    """
    point = channel_point(params, length_km)
    i_ae = holevo_two_pure(coherent_pair_overlap(point.mu_e_max))
    insecure = i_ae >= 1.0 - FULLY_INSECURE_TOL
    qber = 0.0 if insecure else binary_entropy_inverse(1.0 - i_ae)
    return AttackReport(
        attack_kind=BEAM_SPLITTING,
        i_ae=i_ae,
        qber_critical=qber,
        fully_insecure=insecure,
    )


def active_plan(params: ProtocolParams, length_km: float, mu_e: float) -> ActiveAttackPlan:
    """Build the active-attack working point for a given diverted intensity.

    The blocking fraction balances the intensity budget: Bob's expected
    conclusive rate at the raised forward intensity mu_b_prime, thinned by
    blocking, must equal his rate over the ordinary lossy fibre,
    (1 - b) * (1 - exp(-mu_b_prime)) = 1 - exp(-mu_b). Blocking beyond
    Eve's inconclusive fraction on information states is useless, so the
    raw balance value is capped there (and clamped at zero against
    rounding when mu_e equals the full budget).
    """
    point = channel_point(params, length_km)
    if mu_e < 0:
        raise ValueError(f"diverted intensity must be non-negative, got {mu_e}")
    if mu_e > point.mu_e_max * (1.0 + 1e-12) + 1e-15:
        raise ValueError(
            f"diverted intensity {mu_e} exceeds the loss budget "
            f"{point.mu_e_max} at {length_km} km"
        )
    mu_e = min(mu_e, point.mu_e_max)

    mu_b_prime = params.mu - mu_e
    p_conc_inf = -math.expm1(-mu_e)
    # Decoys occupy both slots, so Eve's conclusive probability on them is
    # that of two independent threshold detections: 1 - exp(-2*mu_e).
    p_conc_cont = -math.expm1(-2.0 * mu_e)
    f = params.decoy_fraction
    p_conc_total = (1.0 - f) * p_conc_inf + f * p_conc_cont

    raw_b = 1.0 - (-math.expm1(-point.mu_b)) / (-math.expm1(-mu_b_prime))
    b = max(0.0, min(raw_b, 1.0 - p_conc_inf))
    return ActiveAttackPlan(
        mu_e=mu_e,
        mu_b_prime=mu_b_prime,
        block_fraction=b,
        block_fraction_raw=raw_b,
        p_conc_inf=p_conc_inf,
        p_conc_cont=p_conc_cont,
        p_conc_total=p_conc_total,
    )


def active_eve_info(plan: ActiveAttackPlan) -> float:
    """Eve's information per sifted bit under an active-attack plan.

    She knows every bit on which her threshold measurement was conclusive;
    blocking enriches the delivered stream in those bits, giving
    p_conc_inf / (1 - b). Reaches exactly one when the blocking cap is
    attained and every delivered bit is known to her.
    """
    if plan.p_conc_inf == 0.0:
        return 0.0
    if plan.block_fraction >= 1.0 - plan.p_conc_inf:  # cap reached, exactly one bit
        return 1.0
    return min(1.0, plan.p_conc_inf / (1.0 - plan.block_fraction))


def optimal_mu_e(params: ProtocolParams, length_km: float) -> float:
    """Eve's information-maximising diverted intensity: min(mu_e_max, mu/2).

    The uncapped information is proportional to
    (1 - exp(-(mu - mu_e))) * (1 - exp(-mu_e)), symmetric about mu/2, so
    the unconstrained optimum sits at mu/2 and the loss budget truncates
    it on short channels.
    """
    point = channel_point(params, length_km)
    return min(point.mu_e_max, params.mu / 2.0)


def critical_length(delta: float) -> float:
    """Length beyond which half the source intensity fits in the loss budget.

    Solves 1 - 10**(-delta*l/10) = 1/2, i.e. l = 10*log10(2)/delta
    (about 3.01/delta km). Past this point blocking becomes worthwhile
    for Eve.
    """
    if not delta > 0:
        raise ValueError(f"attenuation coefficient must be positive, got {delta}")
    return 10.0 * math.log10(2.0) / delta


def active_attack(params: ProtocolParams, length_km: float) -> AttackReport:
    """Active beam-splitting attack at Eve's optimal diverted intensity."""
    plan = active_plan(params, length_km, optimal_mu_e(params, length_km))
    i_ae = active_eve_info(plan)
    insecure = i_ae >= 1.0 - FULLY_INSECURE_TOL
    qber = 0.0 if insecure else binary_entropy_inverse(1.0 - i_ae)
    return AttackReport(
        attack_kind=ACTIVE_BEAM_SPLITTING,
        i_ae=i_ae,
        qber_critical=qber,
        fully_insecure=insecure,
        plan=plan,
    )


def fully_insecure_length(params: ProtocolParams) -> float:
    """Smallest length at which the active attack needs no added errors.

    At the blocking cap Bob's expected click rate must fit entirely inside
    Eve's conclusive-and-forwarded stream:
    1 - exp(-mu_b) = (1 - exp(-mu/2))**2 at the optimal mu_e = mu/2.
    Solving for mu_b and inverting the fibre loss gives the length in
    closed form. The cap is unreachable below the critical length, and
    the resulting mu_b is always below mu/2, so the mu/2 branch is the
    right one and the crossing is unique.
    """
    p_half = -math.expm1(-params.mu / 2.0)
    mu_b_star = -math.log1p(-p_half * p_half)
    return 10.0 / params.delta * math.log10(params.mu / mu_b_star)


def key_rate_margin(params: ProtocolParams, length_km: float) -> float:
    """Secret bits per sent pulse left to Alice and Bob under the active attack.

    Bob's information is the erasure-channel capacity 1 - exp(-mu_b) per
    pulse; Eve's share of it is active_eve_info at her optimal plan. The
    margin (1 - exp(-mu_b)) * (1 - i_ae) is zero exactly in the fully
    insecure regime.
    """
    mu_b = attenuate(params.mu, params.delta, length_km)
    plan = active_plan(params, length_km, optimal_mu_e(params, length_km))
    return -math.expm1(-mu_b) * (1.0 - active_eve_info(plan))


def _golden_max(fn, lo: float, hi: float, xtol: float) -> float:
    """Golden-section search for the maximiser of a unimodal fn on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
    return 0.5 * (a + b)


def optimal_source_intensity(
    delta: float, f: float, length_km: float
) -> OptimalIntensity:
    """Source intensity maximising the key-rate margin at a given length.

    Coarse grid scan over (0, MU_SEARCH_MAX] followed by a golden-section
    refinement around the best grid point. The margin is empirically
    unimodal in mu; the test suite re-checks grid dominance rather than
    assuming it. A degenerate result (no positive margin anywhere in the
    range) is flagged rather than raised.
    """
    if length_km < 0:
        raise ValueError(f"channel length must be non-negative, got {length_km}")

    def margin_at(mu: float) -> float:
        return key_rate_margin(ProtocolParams(mu=mu, decoy_fraction=f, delta=delta), length_km)

    step = MU_SEARCH_MAX / MU_SEARCH_GRID
    best_i, best_margin = 0, -math.inf
    for i in range(MU_SEARCH_GRID):
        m = margin_at(step * (i + 1))
        if m > best_margin:
            best_i, best_margin = i, m

    lo = max(step * best_i, step * 1e-3)  # keep the bracket inside (0, mu_max]
    hi = min(step * (best_i + 2), MU_SEARCH_MAX)
    mu_star = _golden_max(margin_at, lo, hi, xtol=1e-7)
    margin_star = margin_at(mu_star)
    # Refinement never loses to the coarse scan.
    if best_margin > margin_star:
        mu_star, margin_star = step * (best_i + 1), best_margin
    return OptimalIntensity(mu=mu_star, margin=margin_star, degenerate=margin_star <= 0.0)
