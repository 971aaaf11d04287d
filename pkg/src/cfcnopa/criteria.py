"""Multipartite inseparability test for N-mode GHZ-like states.

With vacuum quadrature variance 1, the state is inseparable if either

    V(X_i - X_j) + V(sum Y) < 4     or     V(sum X) + V(Y_i - Y_j) < 4.

All mode pairs are equivalent under the symmetric coupling, so one
representative pair is tested.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MismatchedContext
from .model import CRITERION_BOUND, VarianceReport

SQUEEZED_FORM = "xdiff_ysum"
ANTISQUEEZED_FORM = "xsum_ydiff"


@dataclass(frozen=True)
class CriterionVerdict:
    value: float
    form: str
    entangled: bool
    enhanced_vs_bare: bool
    bound: float = CRITERION_BOUND


def vlf_check(report: VarianceReport, bare: VarianceReport) -> tuple[CriterionVerdict, CriterionVerdict]:
    """Verdicts for the (squeezed, anti-squeezed) inequality forms.

    ``bare`` is the feedback-free report at the same NOPA settings; a form is
    enhanced when the tested value is strictly below the bare one.
    """
    if report.n_modes != bare.n_modes:
        raise MismatchedContext(f"n_modes differ: {report.n_modes} vs {bare.n_modes}")
    pairs = (
        (SQUEEZED_FORM, report.combined_squeezed, bare.combined_squeezed),
        (ANTISQUEEZED_FORM, report.combined_antisqueezed, bare.combined_antisqueezed),
    )
    return tuple(
        CriterionVerdict(
            value=value,
            form=form,
            entangled=value < CRITERION_BOUND,
            enhanced_vs_bare=value < reference,
        )
        for form, value, reference in pairs
    )
