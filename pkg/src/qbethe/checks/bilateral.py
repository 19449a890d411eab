"""
bilateral.py — Checks built on certified bilateral sums.
"""

from ..identities import (
    IdentityReport,
    make_report,
    onepsi1_check,
    rr_check,
    rr_mapping,
    rrgen_check,
)
from .base import BaseCheck, PointContext


class RrCheck(BaseCheck):
    name = "rr"
    description = "Bilateral sum over Q against Theta (needs |p|, |p'| < 1)."

    def run(self, context: PointContext) -> IdentityReport:
        s = context.settings
        return rr_check(
            context.state,
            context.require_theta(),
            context.probes,
            s.bilateral,
            K_max=s.bilateral_max,
            tol=context.pointwise_tolerance,
        )


class RrgenCheck(BaseCheck):
    name = "rrgen"
    description = "psi and W functional equations with f = 1/(Q(x/q) Q(x))."

    def applies(self, context: PointContext) -> bool:
        return context.params.convergent and context.params.xi != 0

    def run(self, context: PointContext) -> IdentityReport:
        s = context.settings
        mapping = rr_mapping(context.params)
        return rrgen_check(
            mapping.a,
            mapping.b,
            mapping.z,
            context.params.q,
            "bethe",
            context.probes,
            s.bilateral,
            state=context.state,
            theta=context.require_theta(),
            K_max=s.bilateral_max,
            tol=context.pointwise_tolerance,
        )


class OnePsiOneCheck(BaseCheck):
    name = "onepsi1"
    description = "1psi1 summation at a = x/xi, b = xi x, z = omega xi (N=1, S=0)."

    def applies(self, context: PointContext) -> bool:
        p = context.params
        return p.N == 1 and p.S == 0 and p.xi != 0 and abs(p.xi) ** 2 < abs(p.twist) < 1

    def run(self, context: PointContext) -> IdentityReport:
        p = context.params
        s = context.settings
        mapping = rr_mapping(p)
        samples = []
        for x in context.probes:
            report = onepsi1_check(
                x / mapping.a[0],
                x / mapping.b[0],
                mapping.z,
                p.q,
                s.bilateral,
                K_max=s.bilateral_max,
                tol=context.tolerance,
            )
            samples.append(report.samples[0]._replace(probe=x))
        return make_report(
            self.name, samples, context.tolerance, {"params": p.as_dict()}
        )
