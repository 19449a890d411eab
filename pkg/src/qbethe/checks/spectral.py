"""
spectral.py — Checks on the Bethe state, H, H' and Theta.
"""

from ..bethe import bae_terms, tq_residual
from ..identities import (
    IdentityReport,
    Sample,
    bae2_check,
    hq_wronskian_check,
    make_report,
    reconstruct_q,
    solved_h_check,
)
from ..wronskian import (
    pointwise_quasi_periodicity,
    product_reconstruction,
    quasi_periodicity_residual,
    theta0_consistency,
)
from .base import BaseCheck, PointContext


class BaeCheck(BaseCheck):
    name = "bae"
    description = "Bethe equations at each root, and the TQ relation with t(x)."

    def run(self, context: PointContext) -> IdentityReport:
        state = context.state
        samples = []
        if state.roots:
            left, right = bae_terms(state.params, state.roots)
            for x, a, d in zip(state.roots, left, right, strict=True):
                scale = abs(a) + abs(d)
                residual = abs(a + d) / scale if scale else 0.0
                samples.append(Sample(x, complex(a), complex(-d), residual))
        tq = tq_residual(state)
        samples.append(Sample(0j, complex(tq), 0j, tq))
        return make_report(
            self.name,
            samples,
            context.tolerance,
            {"params": state.params.as_dict(), **state.as_dict()},
        )


class HqCheck(BaseCheck):
    name = "hq"
    description = "Wronskians of H and H' with Q, coefficient by coefficient."

    def run(self, context: PointContext) -> IdentityReport:
        return hq_wronskian_check(
            context.state, context.require_hpair(), context.tolerance
        )


class ThetaCheck(BaseCheck):
    name = "theta"
    description = "Quasi-periodicity of Theta and its theta-product form."

    def run(self, context: PointContext) -> IdentityReport:
        theta = context.require_theta()
        params = context.params
        probes = context.probes
        coeff = quasi_periodicity_residual(theta.theta, params)
        samples = [Sample(0j, complex(coeff), 0j, coeff)]
        shifted = pointwise_quasi_periodicity(theta.theta, params, probes)
        for x, r in zip(probes, shifted, strict=True):
            samples.append(Sample(x, theta.value(x), 0j, r))
        rebuilt = product_reconstruction(theta, probes)
        for x, r in zip(probes, rebuilt, strict=True):
            product = theta.theta0 * theta.product(x)
            samples.append(Sample(x, theta.value(x), product, r))
        context_info = {
            "params": params.as_dict(),
            **theta.as_dict(),
            "theta0_spread": theta0_consistency(theta, probes),
        }
        return make_report(
            self.name, samples, context.pointwise_tolerance, context_info
        )


class Q2Check(BaseCheck):
    name = "q2"
    description = "Q(x) rebuilt from H, H' and Theta at the probes."

    def run(self, context: PointContext) -> IdentityReport:
        return reconstruct_q(
            context.state,
            context.require_hpair(),
            context.require_theta(),
            context.probes,
            context.pointwise_tolerance,
        )


class Bae2Check(BaseCheck):
    name = "bae2"
    description = "Alternative quantisation: kappa' agrees across the theta zeros."

    def run(self, context: PointContext) -> IdentityReport:
        return bae2_check(
            context.state,
            context.require_hpair(),
            context.require_theta(),
            context.pointwise_tolerance,
        )


class HSolvedCheck(BaseCheck):
    name = "hsolved"
    description = "H(x/q) and H'(qx) against their unilateral sums over Q."

    def applies(self, context: PointContext) -> bool:
        return context.params.convergent and context.params.xi != 0

    def run(self, context: PointContext) -> IdentityReport:
        s = context.settings
        return solved_h_check(
            context.state,
            context.require_hpair(),
            context.probes,
            s.bilateral,
            K_max=s.bilateral_max,
            tol=context.pointwise_tolerance,
        )
